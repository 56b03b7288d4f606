//! Full constraint battery for an embedding. The heuristic and the oracle
//! both accept a placement only through [`check_embedding`] and
//! [`recheck_operational`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::cost::chain_latency;
use super::embedding::{route_arcs, Embedding};
use super::{ChainKey, NetworkState};
use crate::service::{Direction, RegionBinding, ServiceRequest};
use crate::topology::{NodeId, PhysicalNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteFault {
    Empty,
    NoLink,
    RepeatsNode,
}

/// Why an embedding is not acceptable. `code()` gives a stable
/// machine-readable tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum Violation {
    Structure {
        chain: Option<u32>,
        detail: String,
    },
    Route {
        chain: u32,
        segment: usize,
        fault: RouteFault,
    },
    Endpoint {
        chain: u32,
        node: NodeId,
    },
    NodeCapacity {
        node: NodeId,
        demand: u64,
        residual: u64,
    },
    ArcCapacity {
        from: NodeId,
        to: NodeId,
        demand: u64,
        residual: u64,
    },
    Latency {
        chain: u32,
        latency: f64,
        limit: f64,
    },
    Stateful {
        group: String,
    },
    Region {
        chain: u32,
        position: usize,
        node: NodeId,
    },
    Veto {
        chain: u32,
        position: usize,
        node: NodeId,
    },
    Order {
        chain: u32,
    },
    OperationalLatency {
        chain: ChainKey,
    },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::Structure { .. } => "structure",
            Violation::Route { .. } => "route",
            Violation::Endpoint { .. } => "endpoint",
            Violation::NodeCapacity { .. } => "node-capacity",
            Violation::ArcCapacity { .. } => "arc-capacity",
            Violation::Latency { .. } => "latency",
            Violation::Stateful { .. } => "stateful",
            Violation::Region { .. } => "region",
            Violation::Veto { .. } => "veto",
            Violation::Order { .. } => "order",
            Violation::OperationalLatency { .. } => "operational-latency",
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.code())?;
        match self {
            Violation::Structure { detail, .. } => write!(f, ": {detail}"),
            Violation::Latency {
                chain,
                latency,
                limit,
            } => {
                write!(f, ": chain {chain} latency {latency:.6e} s > {limit:.6e} s")
            }
            Violation::OperationalLatency { chain } => write!(f, ": chain {chain}"),
            Violation::NodeCapacity { node, .. } => write!(f, ": node {node}"),
            Violation::ArcCapacity { from, to, .. } => write!(f, ": arc {from}->{to}"),
            _ => Ok(()),
        }
    }
}

/// Which operational chains a candidate is checked against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatencyGuard {
    /// Only the guard chain of each node the candidate loads (constant time).
    #[default]
    GuardOnly,
    /// Every operational chain with a VSNF on a node the candidate loads.
    Exhaustive,
}

/// Shape of the embedding matches the request and all node ids exist.
pub fn check_structure(
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    emb: &Embedding,
) -> Result<(), Violation> {
    if emb.chains.len() != req.chains.len() {
        return Err(Violation::Structure {
            chain: None,
            detail: format!(
                "{} chains embedded, {} requested",
                emb.chains.len(),
                req.chains.len()
            ),
        });
    }
    let n = net.node_count();
    for (chain, ce) in req.chains.iter().zip(&emb.chains) {
        let bad = |detail: &str| Violation::Structure {
            chain: Some(chain.id.0),
            detail: detail.to_string(),
        };
        if ce.hosts.len() != chain.vsnfs.len() + 2 {
            return Err(bad("one host per VSNF plus two endpoints expected"));
        }
        if ce.routes.len() != ce.hosts.len() - 1 {
            return Err(bad("one route per chain arc expected"));
        }
        let nodes = ce.hosts.iter().chain(ce.routes.iter().flatten());
        if nodes.into_iter().any(|x| x.index() >= n) {
            return Err(bad("unknown node"));
        }
    }
    Ok(())
}

/// Every route is a non-empty simple path along existing links.
pub fn check_routing(net: &PhysicalNetwork, emb: &Embedding) -> Result<(), Violation> {
    for (c, ce) in emb.chains.iter().enumerate() {
        for (segment, route) in ce.routes.iter().enumerate() {
            let fault = |fault| Violation::Route {
                chain: c as u32,
                segment,
                fault,
            };
            if route.is_empty() {
                return Err(fault(RouteFault::Empty));
            }
            if route_arcs(net, route).any(|a| a.is_none()) {
                return Err(fault(RouteFault::NoLink));
            }
            let distinct: BTreeSet<_> = route.iter().collect();
            if distinct.len() != route.len() {
                return Err(fault(RouteFault::RepeatsNode));
            }
        }
    }
    Ok(())
}

/// Stateful sharing, region and veto placement, and traversal order.
pub fn check_security(
    emb: &Embedding,
    req: &ServiceRequest,
    net: &PhysicalNetwork,
) -> Result<(), Violation> {
    for group in &req.stateful_groups {
        let mut hosts = group
            .members
            .iter()
            .map(|m| emb.chains[m.chain.0 as usize].hosts[m.position + 1]);
        let first = hosts.next();
        if hosts.any(|h| Some(h) != first) {
            return Err(Violation::Stateful {
                group: group.name.clone(),
            });
        }
    }

    for (chain, ce) in req.chains.iter().zip(&emb.chains) {
        let (user_end, remote_end) = match chain.direction {
            Direction::Upstream => (ce.source(), ce.sink()),
            Direction::Downstream => (ce.sink(), ce.source()),
        };
        if user_end != req.ep1 {
            return Err(Violation::Endpoint {
                chain: chain.id.0,
                node: user_end,
            });
        }
        if !req.ep2.contains(&remote_end) {
            return Err(Violation::Endpoint {
                chain: chain.id.0,
                node: remote_end,
            });
        }

        for (position, (vsnf, &node)) in chain.vsnfs.iter().zip(ce.vsnf_hosts()).enumerate() {
            if req.veto.contains(&node) {
                return Err(Violation::Veto {
                    chain: chain.id.0,
                    position,
                    node,
                });
            }
            let inside = match &vsnf.region {
                None => true,
                Some(RegionBinding::Ep1) => node == req.ep1,
                Some(RegionBinding::Ep2) => req.ep2.contains(&node),
                Some(RegionBinding::Named(r)) => net.region(r).is_some_and(|s| s.contains(&node)),
            };
            if !inside {
                return Err(Violation::Region {
                    chain: chain.id.0,
                    position,
                    node,
                });
            }
        }

        let ordered = ce.routes.iter().enumerate().all(|(k, route)| {
            route.first() == Some(&ce.hosts[k]) && route.last() == Some(&ce.hosts[k + 1])
        });
        if !ordered {
            return Err(Violation::Order { chain: chain.id.0 });
        }
    }
    Ok(())
}

/// Request demands fit within the current residuals.
pub fn check_capacity(
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    emb: &Embedding,
) -> Result<(), Violation> {
    for (node, demand) in emb.cpu_demands(req) {
        let residual = state.residual_gamma(node);
        if demand > residual {
            return Err(Violation::NodeCapacity {
                node,
                demand,
                residual,
            });
        }
    }
    for (arc, demand) in emb.arc_demands(req, net) {
        let residual = state.residual_beta(arc);
        if demand > residual {
            let (from, to) = net.arc_endpoints(arc);
            return Err(Violation::ArcCapacity {
                from,
                to,
                demand,
                residual,
            });
        }
    }
    Ok(())
}

/// Every chain of the request meets its latency bound once the whole
/// request is in place.
pub fn check_latency(
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    emb: &Embedding,
    delta: f64,
) -> Result<(), Violation> {
    let load = emb.cpu_demands(req);
    for (chain, ce) in req.chains.iter().zip(&emb.chains) {
        let latency = chain_latency(net, chain, ce, state.residual_gamma_all(), &load, delta);
        if !(latency <= chain.lambda_max) {
            return Err(Violation::Latency {
                chain: chain.id.0,
                latency,
                limit: chain.lambda_max,
            });
        }
    }
    Ok(())
}

/// Structure, routing, security, capacity and latency of the new request.
/// Operational chains are checked separately by [`recheck_operational`].
pub fn check_embedding(
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    emb: &Embedding,
    delta: f64,
) -> Result<(), Violation> {
    check_structure(net, req, emb)?;
    check_routing(net, emb)?;
    check_security(emb, req, net)?;
    check_capacity(state, net, req, emb)?;
    check_latency(state, net, req, emb, delta)
}

/// Verifies that loading the candidate's CPU demand does not push an
/// operational chain past its latency bound. Returns the first violator.
pub fn recheck_operational(
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    emb: &Embedding,
    mode: LatencyGuard,
    delta: f64,
) -> Result<(), ChainKey> {
    recheck_load(state, net, &emb.cpu_demands(req), mode, delta)
}

/// [`recheck_operational`] for a precomputed per-node CPU load.
pub fn recheck_load(
    state: &NetworkState,
    net: &PhysicalNetwork,
    load: &[(NodeId, u64)],
    mode: LatencyGuard,
    delta: f64,
) -> Result<(), ChainKey> {
    let mut keys: Vec<ChainKey> = Vec::new();
    for &(node, _) in load {
        match mode {
            LatencyGuard::GuardOnly => keys.extend(state.guard(node)),
            LatencyGuard::Exhaustive => keys.extend(state.chains_on(node).iter().copied()),
        }
    }
    keys.sort();
    keys.dedup();
    for key in keys {
        let op = &state.operational()[&key];
        let latency = state
            .operational_latency(net, key, load, delta)
            .expect("guarded chains are operational");
        if !(latency <= op.chain.lambda_max) {
            return Err(key);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service::{Chain, ChainId, RequestId, StatefulGroup, VsnfRef, VsnfSpec};
    use crate::state::embedding::ChainEmbedding;
    use crate::topology::load_topology;

    fn square() -> PhysicalNetwork {
        // 0 - 1 - 2 - 3 - 0, border = {2}
        load_topology(
            "nodes = [{ id = 0 }, { id = 1 }, { id = 2 }, { id = 3 }]\n\
             links = [{ a = 0, b = 1, bandwidth = 1000000000 },\n\
                      { a = 1, b = 2, bandwidth = 1000000000 },\n\
                      { a = 2, b = 3, bandwidth = 1000000000 },\n\
                      { a = 3, b = 0, bandwidth = 1000000000 }]\n\
             [regions]\nborder = [2]",
        )
        .unwrap()
    }

    fn chain(id: u32, names: &[&str], dir: Direction) -> Chain {
        Chain {
            id: ChainId(id),
            vsnfs: names.iter().map(|n| VsnfSpec::new(*n, 2.0, true)).collect(),
            beta_req: 1_000_000,
            lambda_max: 0.1,
            sigma: 8000.0,
            pi_external: 0.0,
            direction: dir,
        }
    }

    fn cctv() -> ServiceRequest {
        ServiceRequest {
            id: RequestId(0),
            ep1: NodeId(0),
            ep2: [NodeId(2)].into(),
            chains: vec![
                chain(0, &["fw"], Direction::Upstream),
                chain(1, &["ips", "fw"], Direction::Upstream),
            ],
            stateful_groups: vec![StatefulGroup {
                name: "fw".into(),
                members: vec![
                    VsnfRef {
                        chain: ChainId(0),
                        position: 0,
                    },
                    VsnfRef {
                        chain: ChainId(1),
                        position: 1,
                    },
                ],
            }],
            veto: [NodeId(3)].into(),
        }
    }

    fn n(x: u32) -> NodeId {
        NodeId(x)
    }

    fn good() -> Embedding {
        Embedding {
            chains: vec![
                ChainEmbedding {
                    hosts: vec![n(0), n(1), n(2)],
                    routes: vec![vec![n(0), n(1)], vec![n(1), n(2)]],
                },
                ChainEmbedding {
                    hosts: vec![n(0), n(0), n(1), n(2)],
                    routes: vec![vec![n(0)], vec![n(0), n(1)], vec![n(1), n(2)]],
                },
            ],
        }
    }

    #[test]
    fn shared_stateful_instance_passes() {
        let net = square();
        let state = NetworkState::new(&net);
        assert_eq!(
            check_embedding(&state, &net, &cctv(), &good(), 1e-6),
            Ok(())
        );
    }

    #[test]
    fn split_stateful_instance_fails() {
        let net = square();
        let mut emb = good();
        emb.chains[0] = ChainEmbedding {
            hosts: vec![n(0), n(0), n(2)],
            routes: vec![vec![n(0)], vec![n(0), n(1), n(2)]],
        };
        assert_eq!(
            check_security(&emb, &cctv(), &net).unwrap_err().code(),
            "stateful"
        );
    }

    #[test]
    fn region_and_veto_violations() {
        let net = square();
        let mut req = cctv();
        req.chains[0].vsnfs[0].region = Some(RegionBinding::Named("border".into()));
        assert_eq!(
            check_security(&good(), &req, &net).unwrap_err().code(),
            "region"
        );

        let req = cctv();
        let mut emb = good();
        emb.chains[1] = ChainEmbedding {
            hosts: vec![n(0), n(3), n(1), n(2)],
            routes: vec![vec![n(0), n(3)], vec![n(3), n(0), n(1)], vec![n(1), n(2)]],
        };
        assert_eq!(check_security(&emb, &req, &net).unwrap_err().code(), "veto");
    }

    #[test]
    fn order_and_routing_violations() {
        let net = square();
        let mut emb = good();
        emb.chains[0].routes[0] = vec![n(0), n(3), n(2)];
        assert_eq!(
            check_security(&emb, &cctv(), &net).unwrap_err().code(),
            "order"
        );

        let mut emb = good();
        emb.chains[0].routes[1] = vec![n(1), n(3)];
        assert!(matches!(
            check_routing(&net, &emb),
            Err(Violation::Route {
                fault: RouteFault::NoLink,
                ..
            })
        ));
        emb.chains[0].routes[1] = vec![n(1), n(2), n(1), n(2)];
        assert!(matches!(
            check_routing(&net, &emb),
            Err(Violation::Route {
                fault: RouteFault::RepeatsNode,
                ..
            })
        ));
    }

    #[test]
    fn endpoint_must_match_direction() {
        let net = square();
        let mut req = cctv();
        req.chains[0].direction = Direction::Downstream;
        assert_eq!(
            check_security(&good(), &req, &net).unwrap_err().code(),
            "endpoint"
        );
    }

    #[test]
    fn latency_violation() {
        let net = square();
        let mut req = cctv();
        req.chains[0].lambda_max = 1e-9;
        let state = NetworkState::new(&net);
        assert_eq!(
            check_embedding(&state, &net, &req, &good(), 1e-6)
                .unwrap_err()
                .code(),
            "latency"
        );
    }

    #[test]
    fn vacuous_recheck_passes() {
        let net = square();
        let state = NetworkState::new(&net);
        for mode in [LatencyGuard::GuardOnly, LatencyGuard::Exhaustive] {
            assert_eq!(
                recheck_operational(&state, &net, &cctv(), &good(), mode, 1e-6),
                Ok(())
            );
        }
    }
}
