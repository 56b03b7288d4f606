//! Residual-resource bookkeeping, delay and cost evaluation, and the
//! constraint battery shared by the heuristic and the exact oracle.
//!
//! Residuals are kept as integers (cycles/s, bits/s) so that any sequence of
//! embeds and releases lands on exactly the same vectors as a rebuild.

pub mod check;
pub mod cost;
pub mod embedding;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::service::{Chain, ChainId, RequestId, ServiceRequest};
use crate::topology::{ArcId, NodeId, PhysicalNetwork};
use embedding::{ChainEmbedding, Embedding, NodeLoad};

/// Identifies an operational chain network-wide. Lower keys are older.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChainKey {
    pub request: RequestId,
    pub chain: ChainId,
}

impl std::fmt::Display for ChainKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/c{}", self.request, self.chain.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperationalChain {
    pub chain: Chain,
    pub embedding: ChainEmbedding,
    /// Minimum average residual CPU its hosts must keep.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveService {
    pub request: ServiceRequest,
    pub embedding: Embedding,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("node {node}: demand {demand} exceeds residual {residual} cycles/s")]
    NodeCapacity {
        node: NodeId,
        demand: u64,
        residual: u64,
    },
    #[error("arc {from}->{to}: demand {demand} exceeds residual {residual} bits/s")]
    ArcCapacity {
        from: NodeId,
        to: NodeId,
        demand: u64,
        residual: u64,
    },
    #[error("request {0} is already active")]
    DuplicateRequest(RequestId),
    #[error("request {0} is not active")]
    UnknownRequest(RequestId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    residual_gamma: Vec<u64>,
    residual_beta: Vec<u64>,
    services: BTreeMap<RequestId, ActiveService>,
    operational: BTreeMap<ChainKey, OperationalChain>,
    /// Operational chains with at least one VSNF on each node.
    node_chains: Vec<BTreeSet<ChainKey>>,
    /// Per node, the chain of `node_chains` with the highest threshold.
    node_guard: Vec<Option<ChainKey>>,
}

fn outranks(a: (f64, ChainKey), b: (f64, ChainKey)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl NetworkState {
    /// Empty network: every residual at its nominal value.
    pub fn new(net: &PhysicalNetwork) -> Self {
        let n = net.node_count();
        NetworkState {
            residual_gamma: net.nodes().iter().map(|x| x.gamma_nominal).collect(),
            residual_beta: (0..net.arc_count() as u32)
                .map(|a| net.arc_capacity(ArcId(a)))
                .collect(),
            services: BTreeMap::new(),
            operational: BTreeMap::new(),
            node_chains: vec![BTreeSet::new(); n],
            node_guard: vec![None; n],
        }
    }

    pub fn residual_gamma(&self, node: NodeId) -> u64 {
        self.residual_gamma[node.index()]
    }

    pub fn residual_beta(&self, arc: ArcId) -> u64 {
        self.residual_beta[arc.index()]
    }

    pub fn residual_gamma_all(&self) -> &[u64] {
        &self.residual_gamma
    }

    pub fn residual_beta_all(&self) -> &[u64] {
        &self.residual_beta
    }

    pub fn services(&self) -> &BTreeMap<RequestId, ActiveService> {
        &self.services
    }

    pub fn operational(&self) -> &BTreeMap<ChainKey, OperationalChain> {
        &self.operational
    }

    pub fn guard(&self, node: NodeId) -> Option<ChainKey> {
        self.node_guard[node.index()]
    }

    pub fn guards(&self) -> &[Option<ChainKey>] {
        &self.node_guard
    }

    pub fn chains_on(&self, node: NodeId) -> &BTreeSet<ChainKey> {
        &self.node_chains[node.index()]
    }

    /// Fraction of the network's CPU in use.
    pub fn consumed_cpu_fraction(&self, net: &PhysicalNetwork) -> f64 {
        let residual: u64 = self.residual_gamma.iter().sum();
        1.0 - residual as f64 / net.total_gamma() as f64
    }

    /// Fraction of CPU in use over a subset of nodes.
    pub fn consumed_cpu_fraction_of<'a>(
        &self,
        net: &PhysicalNetwork,
        nodes: impl IntoIterator<Item = &'a NodeId>,
    ) -> f64 {
        let (mut residual, mut total) = (0u64, 0u64);
        for &n in nodes {
            residual += self.residual_gamma[n.index()];
            total += net.node(n).gamma_nominal;
        }
        if total == 0 {
            0.0
        } else {
            1.0 - residual as f64 / total as f64
        }
    }

    /// Checks that `cpu` and `arcs` fit, then subtracts them.
    pub fn debit(
        &mut self,
        net: &PhysicalNetwork,
        cpu: &NodeLoad,
        arcs: &[(ArcId, u64)],
    ) -> Result<(), StateError> {
        for &(node, demand) in cpu {
            let residual = self.residual_gamma[node.index()];
            if demand > residual {
                return Err(StateError::NodeCapacity {
                    node,
                    demand,
                    residual,
                });
            }
        }
        for &(arc, demand) in arcs {
            let residual = self.residual_beta[arc.index()];
            if demand > residual {
                let (from, to) = net.arc_endpoints(arc);
                return Err(StateError::ArcCapacity {
                    from,
                    to,
                    demand,
                    residual,
                });
            }
        }
        for &(node, demand) in cpu {
            self.residual_gamma[node.index()] -= demand;
        }
        for &(arc, demand) in arcs {
            self.residual_beta[arc.index()] -= demand;
        }
        Ok(())
    }

    fn credit(&mut self, net: &PhysicalNetwork, cpu: &NodeLoad, arcs: &[(ArcId, u64)]) {
        for &(node, demand) in cpu {
            let r = &mut self.residual_gamma[node.index()];
            *r += demand;
            debug_assert!(*r <= net.node(node).gamma_nominal);
        }
        for &(arc, demand) in arcs {
            let r = &mut self.residual_beta[arc.index()];
            *r += demand;
            debug_assert!(*r <= net.arc_capacity(arc));
        }
    }

    /// Copy of the state with the resources of `emb` subtracted.
    pub fn residual_after(
        &self,
        net: &PhysicalNetwork,
        req: &ServiceRequest,
        emb: &Embedding,
    ) -> Result<NetworkState, StateError> {
        let mut next = self.clone();
        next.debit(net, &emb.cpu_demands(req), &emb.arc_demands(req, net))?;
        Ok(next)
    }

    /// Debits an accepted embedding and makes its chains operational,
    /// updating the per-node guards.
    pub fn register(
        &mut self,
        net: &PhysicalNetwork,
        req: &ServiceRequest,
        emb: &Embedding,
        delta: f64,
    ) -> Result<(), StateError> {
        if self.services.contains_key(&req.id) {
            return Err(StateError::DuplicateRequest(req.id));
        }
        self.debit(net, &emb.cpu_demands(req), &emb.arc_demands(req, net))?;
        for (chain, ce) in req.chains.iter().zip(&emb.chains) {
            let key = ChainKey {
                request: req.id,
                chain: chain.id,
            };
            let threshold = cost::gamma_threshold(chain, ce, net, delta);
            let mut hosts: Vec<NodeId> = ce.vsnf_hosts().to_vec();
            hosts.sort();
            hosts.dedup();
            for node in hosts {
                self.node_chains[node.index()].insert(key);
                let slot = &mut self.node_guard[node.index()];
                let replace = match *slot {
                    None => true,
                    Some(inc) => {
                        outranks((threshold, key), (self.operational[&inc].threshold, inc))
                    }
                };
                if replace {
                    *slot = Some(key);
                }
            }
            self.operational.insert(
                key,
                OperationalChain {
                    chain: chain.clone(),
                    embedding: ce.clone(),
                    threshold,
                },
            );
        }
        self.services.insert(
            req.id,
            ActiveService {
                request: req.clone(),
                embedding: emb.clone(),
            },
        );
        Ok(())
    }

    /// Returns the resources of an active service and drops its chains,
    /// rebuilding the guard of every node it was guarding.
    pub fn release(
        &mut self,
        net: &PhysicalNetwork,
        id: RequestId,
    ) -> Result<ActiveService, StateError> {
        let service = self
            .services
            .remove(&id)
            .ok_or(StateError::UnknownRequest(id))?;
        let (req, emb) = (&service.request, &service.embedding);
        self.credit(net, &emb.cpu_demands(req), &emb.arc_demands(req, net));

        let mut stale = BTreeSet::new();
        for (chain, ce) in req.chains.iter().zip(&emb.chains) {
            let key = ChainKey {
                request: id,
                chain: chain.id,
            };
            self.operational.remove(&key);
            for &node in ce.vsnf_hosts() {
                self.node_chains[node.index()].remove(&key);
                if self.node_guard[node.index()] == Some(key) {
                    stale.insert(node);
                }
            }
        }
        for node in stale {
            self.node_guard[node.index()] = self.best_on(node);
        }
        Ok(service)
    }

    fn best_on(&self, node: NodeId) -> Option<ChainKey> {
        let mut best: Option<(f64, ChainKey)> = None;
        for &key in &self.node_chains[node.index()] {
            let cand = (self.operational[&key].threshold, key);
            if best.is_none_or(|b| outranks(cand, b)) {
                best = Some(cand);
            }
        }
        best.map(|(_, k)| k)
    }

    /// Guards recomputed from scratch over all operational chains.
    pub fn brute_force_guards(&self) -> Vec<Option<ChainKey>> {
        let mut guards: Vec<Option<(f64, ChainKey)>> = vec![None; self.node_guard.len()];
        for (&key, op) in &self.operational {
            for &node in op.embedding.vsnf_hosts() {
                let slot = &mut guards[node.index()];
                if slot.is_none_or(|b| outranks((op.threshold, key), b)) {
                    *slot = Some((op.threshold, key));
                }
            }
        }
        guards.into_iter().map(|g| g.map(|(_, k)| k)).collect()
    }

    /// Fresh state with every currently active service re-registered.
    pub fn rebuild(&self, net: &PhysicalNetwork, delta: f64) -> Result<NetworkState, StateError> {
        let mut fresh = NetworkState::new(net);
        for service in self.services.values() {
            fresh.register(net, &service.request, &service.embedding, delta)?;
        }
        Ok(fresh)
    }

    /// Latency of an operational chain under extra CPU load `extra`.
    pub fn operational_latency(
        &self,
        net: &PhysicalNetwork,
        key: ChainKey,
        extra: &NodeLoad,
        delta: f64,
    ) -> Option<f64> {
        let op = self.operational.get(&key)?;
        Some(cost::chain_latency(
            net,
            &op.chain,
            &op.embedding,
            &self.residual_gamma,
            extra,
            delta,
        ))
    }
}
