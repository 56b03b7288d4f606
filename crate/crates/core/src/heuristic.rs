//! The PESS heuristic: shortest-path initial solutions, an expanded set of
//! paths through high-capacity nodes, and a cost-ranked acceptance scan.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::service::{Direction, RegionBinding, RequestError, ServiceRequest};
use crate::state::check::{check_embedding, recheck_operational, LatencyGuard, Violation};
use crate::state::cost::{embedding_cost, CostParams};
use crate::state::embedding::{ChainEmbedding, Embedding};
use crate::state::{ChainKey, NetworkState, StateError};
use crate::topology::{ArcId, NodeId, PhysicalNetwork};

/// Order in which ranked candidates are offered to the operational check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanOrder {
    /// Cheapest first.
    #[default]
    Ascending,
    /// Most expensive first, as the pseudocode literally reads.
    LiteralDescending,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PessOptions {
    pub scan: ScanOrder,
    /// Expand from every reachable remote endpoint instead of only the best
    /// initial one.
    pub expand_all_ep2: bool,
    pub guard: LatencyGuard,
}

/// A path from ep1 to one remote endpoint with the request laid on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSolution {
    pub path: Vec<NodeId>,
    pub chosen_ep2: NodeId,
    pub embedding: Embedding,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStats {
    pub dijkstra_runs: usize,
    pub initial_paths: usize,
    pub expansion_nodes: usize,
    /// Distinct paths evaluated.
    pub candidates: usize,
    /// Candidates passing the constraint battery.
    pub feasible: usize,
    /// Feasible candidates turned down by the operational-chain check.
    pub operational_rejects: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub candidate: CandidateSolution,
    pub stats: PlanStats,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Rejection {
    #[error("invalid request: {0}")]
    Invalid(#[from] RequestError),
    #[error("no path with enough bandwidth to any remote endpoint")]
    NoRoute,
    #[error("every candidate violates a constraint (first: {0})")]
    Infeasible(Violation),
    #[error("every feasible candidate would break operational chain {0}")]
    Operational(ChainKey),
    #[error("registration failed: {0}")]
    State(#[from] StateError),
}

impl Rejection {
    /// Stable machine-readable reason.
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::Invalid(_) => "invalid-request",
            Rejection::NoRoute => "no-route",
            Rejection::Infeasible(_) | Rejection::Operational(_) => "infeasible",
            Rejection::State(_) => "state",
        }
    }
}

/// Per-direction bandwidth a path must carry. Arcs are priced by what the
/// request would actually pay on them: upstream traffic on the arc itself,
/// downstream traffic on its reverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathWeights {
    pub upstream: u64,
    pub downstream: u64,
    pub delta: f64,
}

impl PathWeights {
    pub fn of(req: &ServiceRequest, delta: f64) -> Self {
        let mut w = PathWeights {
            upstream: 0,
            downstream: 0,
            delta,
        };
        for c in &req.chains {
            match c.direction {
                Direction::Upstream => w.upstream += c.beta_req,
                Direction::Downstream => w.downstream += c.beta_req,
            }
        }
        w
    }

    /// Weight of `arc` in the ep1 to ep2 direction, `None` when either
    /// direction lacks the bandwidth.
    pub fn weight(&self, state: &NetworkState, arc: ArcId) -> Option<f64> {
        let fwd = state.residual_beta(arc);
        let rev = state.residual_beta(arc.reverse());
        if fwd < self.upstream || rev < self.downstream {
            return None;
        }
        Some(
            self.upstream as f64 / (fwd as f64 + self.delta)
                + self.downstream as f64 / (rev as f64 + self.delta),
        )
    }
}

/// Shortest-path tree. Forward trees hold paths from the root, reverse
/// trees paths towards it.
#[derive(Debug, Clone)]
pub struct PathTree {
    root: NodeId,
    reverse: bool,
    dist: Vec<f64>,
    parent: Vec<Option<NodeId>>,
}

#[derive(PartialEq)]
struct Entry(f64, NodeId);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PathTree {
    /// Dijkstra from `root`. With `reverse` set, arcs are walked backwards so
    /// that every path found ends at `root`.
    pub fn build(
        net: &PhysicalNetwork,
        state: &NetworkState,
        weights: &PathWeights,
        root: NodeId,
        reverse: bool,
    ) -> Self {
        let n = net.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[root.index()] = 0.0;
        heap.push(Reverse(Entry(0.0, root)));
        while let Some(Reverse(Entry(d, u))) = heap.pop() {
            if done[u.index()] {
                continue;
            }
            done[u.index()] = true;
            for &(v, out) in net.outgoing(u) {
                if done[v.index()] {
                    continue;
                }
                let arc = if reverse { out.reverse() } else { out };
                let Some(w) = weights.weight(state, arc) else {
                    continue;
                };
                let nd = d + w;
                if nd < dist[v.index()] {
                    dist[v.index()] = nd;
                    parent[v.index()] = Some(u);
                    heap.push(Reverse(Entry(nd, v)));
                }
            }
        }
        PathTree {
            root,
            reverse,
            dist,
            parent,
        }
    }

    pub fn reached(&self, node: NodeId) -> bool {
        self.dist[node.index()].is_finite()
    }

    pub fn distance(&self, node: NodeId) -> f64 {
        self.dist[node.index()]
    }

    /// Node path between `node` and the root, in travel direction.
    pub fn path(&self, node: NodeId) -> Option<Vec<NodeId>> {
        if !self.reached(node) {
            return None;
        }
        let mut path = vec![node];
        let mut at = node;
        while at != self.root {
            at = self.parent[at.index()].expect("reached nodes lead back to the root");
            path.push(at);
        }
        if !self.reverse {
            path.reverse();
        }
        Some(path)
    }
}

/// Lays the request on `path` (ep1 first, chosen remote endpoint last):
/// region-bound VSNFs go to the matching path end, all others to the
/// non-veto path node with the most residual CPU (ties to the lowest id).
/// Routes are the stretches of `path` between consecutive hosts; a chain
/// whose hosts are out of path order doubles back along it.
pub fn place_on_path(
    path: &[NodeId],
    req: &ServiceRequest,
    state: &NetworkState,
    net: &PhysicalNetwork,
) -> Embedding {
    let ep1 = path[0];
    let ep2 = *path.last().expect("paths are never empty");
    let free = path
        .iter()
        .copied()
        .filter(|n| !req.veto.contains(n))
        .max_by(|a, b| {
            state
                .residual_gamma(*a)
                .cmp(&state.residual_gamma(*b))
                .then(b.cmp(a))
        })
        .unwrap_or(ep1);
    let position = |node: NodeId| path.iter().position(|&x| x == node).expect("host on path");

    let chains = req
        .chains
        .iter()
        .map(|chain| {
            let (source, sink) = match chain.direction {
                Direction::Upstream => (ep1, ep2),
                Direction::Downstream => (ep2, ep1),
            };
            let mut hosts = vec![source];
            for v in &chain.vsnfs {
                hosts.push(match &v.region {
                    None => free,
                    Some(RegionBinding::Ep1) => ep1,
                    Some(RegionBinding::Ep2) => ep2,
                    Some(RegionBinding::Named(r)) => {
                        let region = net.region(r);
                        if region.is_some_and(|s| s.contains(&ep1)) {
                            ep1
                        } else {
                            ep2
                        }
                    }
                });
            }
            hosts.push(sink);
            let routes = hosts
                .windows(2)
                .map(|w| {
                    let (a, b) = (position(w[0]), position(w[1]));
                    if a <= b {
                        path[a..=b].to_vec()
                    } else {
                        path[b..=a].iter().rev().copied().collect()
                    }
                })
                .collect();
            ChainEmbedding { hosts, routes }
        })
        .collect();
    Embedding { chains }
}

fn has_repeats(path: &[NodeId]) -> bool {
    let set: BTreeSet<_> = path.iter().collect();
    set.len() != path.len()
}

struct Evaluated {
    candidate: CandidateSolution,
    verdict: Result<(), Violation>,
}

fn evaluate(
    path: Vec<NodeId>,
    req: &ServiceRequest,
    state: &NetworkState,
    net: &PhysicalNetwork,
    params: &CostParams,
) -> Evaluated {
    let embedding = place_on_path(&path, req, state, net);
    let verdict = check_embedding(state, net, req, &embedding, params.delta);
    let cost = match verdict {
        Ok(()) => embedding_cost(state, net, &embedding, req, params),
        Err(_) => f64::INFINITY,
    };
    Evaluated {
        candidate: CandidateSolution {
            chosen_ep2: *path.last().unwrap(),
            path,
            embedding,
            cost,
        },
        verdict,
    }
}

fn rank(a: &CandidateSolution, b: &CandidateSolution) -> Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then(a.path.len().cmp(&b.path.len()))
        .then(a.path.cmp(&b.path))
}

/// Chooses an embedding for `req` without touching `state`.
pub fn pess_plan(
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    params: &CostParams,
    opts: &PessOptions,
) -> Result<Plan, Rejection> {
    req.validate(net)?;
    let weights = PathWeights::of(req, params.delta);
    let mut stats = PlanStats::default();

    let from_ep1 = PathTree::build(net, state, &weights, req.ep1, false);
    stats.dijkstra_runs += 1;
    let initial: Vec<Vec<NodeId>> = req.ep2.iter().filter_map(|&e| from_ep1.path(e)).collect();
    if initial.is_empty() {
        return Err(Rejection::NoRoute);
    }
    stats.initial_paths = initial.len();

    let mut seen: BTreeSet<Vec<NodeId>> = BTreeSet::new();
    let mut evaluated: Vec<Evaluated> = Vec::new();
    for path in &initial {
        seen.insert(path.clone());
        evaluated.push(evaluate(path.clone(), req, state, net, params));
    }

    // Nodes beyond every initial solution with more CPU than any node on one.
    let in_initial: BTreeSet<NodeId> = initial.iter().flatten().copied().collect();
    let ceiling = in_initial
        .iter()
        .map(|&n| state.residual_gamma(n))
        .max()
        .unwrap_or(0);
    let expansion: Vec<NodeId> = net
        .node_ids()
        .filter(|n| !in_initial.contains(n) && !req.veto.contains(n))
        .filter(|&n| state.residual_gamma(n) > ceiling)
        .collect();
    stats.expansion_nodes = expansion.len();

    if !expansion.is_empty() {
        let targets: Vec<NodeId> = if opts.expand_all_ep2 {
            initial.iter().map(|p| *p.last().unwrap()).collect()
        } else {
            let best = evaluated
                .iter()
                .filter(|e| e.verdict.is_ok())
                .min_by(|a, b| rank(&a.candidate, &b.candidate))
                .map(|e| e.candidate.chosen_ep2);
            // Without a feasible initial solution, expand towards the
            // closest remote endpoint.
            let fallback = || {
                initial
                    .iter()
                    .map(|p| *p.last().unwrap())
                    .min_by(|a, b| {
                        from_ep1
                            .distance(*a)
                            .total_cmp(&from_ep1.distance(*b))
                            .then(a.cmp(b))
                    })
                    .unwrap()
            };
            vec![best.unwrap_or_else(fallback)]
        };
        for ep2 in targets {
            let to_ep2 = PathTree::build(net, state, &weights, ep2, true);
            stats.dijkstra_runs += 1;
            for &e in &expansion {
                let (Some(head), Some(tail)) = (from_ep1.path(e), to_ep2.path(e)) else {
                    continue;
                };
                let mut path = head;
                path.extend_from_slice(&tail[1..]);
                if has_repeats(&path) || !seen.insert(path.clone()) {
                    continue;
                }
                evaluated.push(evaluate(path, req, state, net, params));
            }
        }
    }
    stats.candidates = evaluated.len();

    let mut first_violation = None;
    let mut feasible = Vec::new();
    for e in evaluated {
        match e.verdict {
            Ok(()) => feasible.push(e.candidate),
            Err(v) => {
                first_violation.get_or_insert(v);
            }
        }
    }
    stats.feasible = feasible.len();
    feasible.sort_by(rank);
    if opts.scan == ScanOrder::LiteralDescending {
        feasible.reverse();
    }

    let mut blocker = None;
    for candidate in feasible {
        match recheck_operational(
            state,
            net,
            req,
            &candidate.embedding,
            opts.guard,
            params.delta,
        ) {
            Ok(()) => return Ok(Plan { candidate, stats }),
            Err(key) => {
                stats.operational_rejects += 1;
                blocker.get_or_insert(key);
            }
        }
    }
    Err(match (blocker, first_violation) {
        (Some(key), _) => Rejection::Operational(key),
        (None, Some(v)) => Rejection::Infeasible(v),
        (None, None) => Rejection::NoRoute,
    })
}

/// Debits an accepted embedding and records its chains as operational.
pub fn register_operational(
    state: &mut NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    emb: &Embedding,
    delta: f64,
) -> Result<(), StateError> {
    state.register(net, req, emb, delta)
}

/// Plans `req` and, on success, registers it in `state`.
pub fn pess_embed(
    state: &mut NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    params: &CostParams,
    opts: &PessOptions,
) -> Result<Plan, Rejection> {
    let plan = pess_plan(state, net, req, params, opts)?;
    register_operational(state, net, req, &plan.candidate.embedding, params.delta)?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service::{Chain, ChainId, RequestId, VsnfSpec};
    use crate::state::check::check_embedding;
    use crate::topology::load_topology;

    fn n(x: u32) -> NodeId {
        NodeId(x)
    }

    fn chain(id: u32, vsnfs: Vec<VsnfSpec>, dir: Direction) -> Chain {
        Chain {
            id: ChainId(id),
            vsnfs,
            beta_req: 10_000_000,
            lambda_max: 0.2,
            sigma: 8000.0,
            pi_external: 0.0,
            direction: dir,
        }
    }

    fn request(ep1: u32, ep2: &[u32], chains: Vec<Chain>) -> ServiceRequest {
        ServiceRequest {
            id: RequestId(1),
            ep1: n(ep1),
            ep2: ep2.iter().map(|&x| n(x)).collect(),
            stateful_groups: crate::service::stateful_groups_of(&chains),
            chains,
            veto: BTreeSet::new(),
        }
    }

    #[test]
    fn two_nodes_place_on_higher_residual_endpoint() {
        let net = load_topology(
            "nodes = [{ id = 0, gamma = 1e10 }, { id = 1, gamma = 2e10 }]\n\
             links = [{ a = 0, b = 1, bandwidth = 1e9 }]",
        )
        .unwrap();
        let mut state = NetworkState::new(&net);
        let req = request(
            0,
            &[1],
            vec![chain(
                0,
                vec![VsnfSpec::new("fw", 2.3, true)],
                Direction::Upstream,
            )],
        );
        let plan = pess_embed(
            &mut state,
            &net,
            &req,
            &CostParams::default(),
            &PessOptions::default(),
        )
        .unwrap();
        let ce = &plan.candidate.embedding.chains[0];
        assert_eq!(ce.hosts, vec![n(0), n(1), n(1)]);
        assert_eq!(ce.routes, vec![vec![n(0), n(1)], vec![n(1)]]);
        assert_eq!(
            state.guard(n(1)),
            Some(ChainKey {
                request: RequestId(1),
                chain: ChainId(0)
            })
        );
    }

    #[test]
    fn bandwidth_cut_at_source_is_no_route() {
        let net = load_topology(
            "nodes = [{ id = 0 }, { id = 1 }, { id = 2 }]\n\
             links = [{ a = 0, b = 1, bandwidth = 1e6 }, { a = 1, b = 2, bandwidth = 1e9 }]",
        )
        .unwrap();
        let state = NetworkState::new(&net);
        let req = request(0, &[2], vec![chain(0, vec![], Direction::Upstream)]);
        let err = pess_plan(
            &state,
            &net,
            &req,
            &CostParams::default(),
            &PessOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, Rejection::NoRoute);
        assert_eq!(err.code(), "no-route");
    }

    #[test]
    fn path_argmax_placement() {
        let net = load_topology(
            "nodes = [{ id = 0, gamma = 1e10 }, { id = 1, gamma = 9e10 }, { id = 2, gamma = 5e10 }]\n\
             links = [{ a = 0, b = 1, bandwidth = 1e9 }, { a = 1, b = 2, bandwidth = 1e9 }]",
        )
        .unwrap();
        let state = NetworkState::new(&net);
        let req = request(
            0,
            &[2],
            vec![
                chain(0, vec![VsnfSpec::new("fw", 2.3, true)], Direction::Upstream),
                chain(
                    1,
                    vec![
                        VsnfSpec::new("ips", 2.4, true),
                        VsnfSpec::new("fw", 2.3, true),
                    ],
                    Direction::Upstream,
                ),
            ],
        );
        let emb = place_on_path(&[n(0), n(1), n(2)], &req, &state, &net);
        for ce in &emb.chains {
            assert!(ce.vsnf_hosts().iter().all(|&h| h == n(1)));
        }
    }

    #[test]
    fn region_and_free_vsnf_composition() {
        let net = load_topology(
            "nodes = [{ id = 0, gamma = 1e10 }, { id = 1, gamma = 9e10 }, { id = 2, gamma = 5e10 }]\n\
             links = [{ a = 0, b = 1, bandwidth = 1e9 }, { a = 1, b = 2, bandwidth = 1e9 }]",
        )
        .unwrap();
        let state = NetworkState::new(&net);
        let req = request(
            0,
            &[2],
            vec![chain(
                0,
                vec![
                    VsnfSpec::new("ips", 2.4, true),
                    VsnfSpec::new("fw", 2.3, true).bound_to(RegionBinding::Ep2),
                ],
                Direction::Upstream,
            )],
        );
        let emb = place_on_path(&[n(0), n(1), n(2)], &req, &state, &net);
        assert_eq!(emb.chains[0].hosts, vec![n(0), n(1), n(2), n(2)]);
        assert_eq!(check_embedding(&state, &net, &req, &emb, 1e-6), Ok(()));
    }

    #[test]
    fn downstream_chain_visits_hosts_from_remote_end() {
        let net = load_topology(
            "nodes = [{ id = 0, gamma = 1e10 }, { id = 1, gamma = 9e10 }, { id = 2, gamma = 5e10 }]\n\
             links = [{ a = 0, b = 1, bandwidth = 1e9 }, { a = 1, b = 2, bandwidth = 1e9 }]",
        )
        .unwrap();
        let state = NetworkState::new(&net);
        let fw = VsnfSpec::new("fw", 2.3, true).bound_to(RegionBinding::Ep2);
        let ips = VsnfSpec::new("ips", 2.4, true);
        let req = request(
            0,
            &[2],
            vec![
                chain(0, vec![fw.clone(), ips.clone()], Direction::Downstream),
                chain(1, vec![ips, fw], Direction::Upstream),
            ],
        );
        let emb = place_on_path(&[n(0), n(1), n(2)], &req, &state, &net);
        assert_eq!(emb.chains[0].hosts, vec![n(2), n(2), n(1), n(0)]);
        assert_eq!(
            emb.chains[0].routes,
            vec![vec![n(2)], vec![n(2), n(1)], vec![n(1), n(0)]]
        );
        assert_eq!(emb.chains[1].hosts, vec![n(0), n(1), n(2), n(2)]);
        assert_eq!(check_embedding(&state, &net, &req, &emb, 1e-6), Ok(()));
    }

    /// Eight nodes A..H. A-B-C-H is the unique shortest path but its nodes
    /// are small; F is a large veto node, G the largest node off the path,
    /// and H doubles as the region of the bound VSNF.
    fn figure_network() -> PhysicalNetwork {
        load_topology(
            "nodes = [\n\
               { id = 0, name = \"A\", gamma = 1e9 }, { id = 1, name = \"B\", gamma = 1.5e9 },\n\
               { id = 2, name = \"C\", gamma = 1e9 }, { id = 3, name = \"D\", gamma = 4e10 },\n\
               { id = 4, name = \"E\", gamma = 1.2e9 }, { id = 5, name = \"F\", gamma = 9e10 },\n\
               { id = 6, name = \"G\", gamma = 8e10 }, { id = 7, name = \"H\", gamma = 1e9 }]\n\
             links = [\n\
               { a = \"A\", b = \"B\", bandwidth = 1e10 }, { a = \"B\", b = \"C\", bandwidth = 1e10 },\n\
               { a = \"C\", b = \"H\", bandwidth = 1e10 }, { a = \"A\", b = \"D\", bandwidth = 5e9 },\n\
               { a = \"D\", b = \"G\", bandwidth = 5e9 }, { a = \"G\", b = \"H\", bandwidth = 5e9 },\n\
               { a = \"B\", b = \"F\", bandwidth = 5e9 }, { a = \"F\", b = \"H\", bandwidth = 5e9 },\n\
               { a = \"C\", b = \"E\", bandwidth = 1e10 }]\n\
             [regions]\n\
             edge = [\"H\"]",
        )
        .unwrap()
    }

    #[test]
    fn figure_scenario() {
        let net = figure_network();
        let mut state = NetworkState::new(&net);
        let mut req = request(
            0,
            &[7],
            vec![chain(
                0,
                vec![
                    VsnfSpec::new("ips", 2.4, true),
                    VsnfSpec::new("fw", 2.3, true).bound_to(RegionBinding::Named("edge".into())),
                ],
                Direction::Upstream,
            )],
        );
        req.veto.insert(n(5));
        let plan = pess_embed(
            &mut state,
            &net,
            &req,
            &CostParams::default(),
            &PessOptions::default(),
        )
        .unwrap();

        let ce = &plan.candidate.embedding.chains[0];
        assert_eq!(ce.hosts[2], n(7), "region VSNF sits on H");
        assert_eq!(
            ce.hosts[1],
            n(6),
            "free VSNF on G, the best discovered node"
        );
        // D and G qualify; F is vetoed and E is no larger than B.
        assert_eq!(plan.stats.expansion_nodes, 2);
        assert_eq!(plan.stats.initial_paths, 1);
        assert!(plan.stats.dijkstra_runs <= 3);
        assert_eq!(plan.candidate.path, vec![n(0), n(3), n(6), n(7)]);
    }

    #[test]
    fn accepted_embedding_passes_battery_and_scan_orders_differ() {
        let net = figure_network();
        let state = NetworkState::new(&net);
        let req = request(
            0,
            &[7],
            vec![chain(
                0,
                vec![VsnfSpec::new("ips", 2.4, true)],
                Direction::Upstream,
            )],
        );
        let p = CostParams::default();
        let asc = pess_plan(&state, &net, &req, &p, &PessOptions::default()).unwrap();
        assert_eq!(
            check_embedding(&state, &net, &req, &asc.candidate.embedding, p.delta),
            Ok(())
        );
        let desc = pess_plan(
            &state,
            &net,
            &req,
            &p,
            &PessOptions {
                scan: ScanOrder::LiteralDescending,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(desc.candidate.cost >= asc.candidate.cost);
    }

    #[test]
    fn self_terminating_request_uses_empty_path() {
        let net = figure_network();
        let state = NetworkState::new(&net);
        let req = request(
            3,
            &[3],
            vec![chain(
                0,
                vec![VsnfSpec::new("ips", 2.4, true)],
                Direction::Upstream,
            )],
        );
        let plan = pess_plan(
            &state,
            &net,
            &req,
            &CostParams::default(),
            &PessOptions::default(),
        )
        .unwrap();
        assert_eq!(plan.candidate.path, vec![n(3)]);
        assert_eq!(plan.candidate.embedding.chains[0].hosts, vec![n(3); 3]);
    }

    #[test]
    fn tight_operational_chain_blocks_newcomer() {
        let net = load_topology(
            "nodes = [{ id = 0, gamma = 1e9 }, { id = 1, gamma = 1e9 }]\n\
             links = [{ a = 0, b = 1, bandwidth = 1e10 }]",
        )
        .unwrap();
        let mut state = NetworkState::new(&net);
        let p = CostParams::default();
        let mut first = request(
            0,
            &[0],
            vec![chain(
                0,
                vec![VsnfSpec::new("fw", 2.3, true)],
                Direction::Upstream,
            )],
        );
        // 2.3 * 8000 / 1e9 = 1.84e-5 s at full residual.
        first.chains[0].lambda_max = 2.0e-5;
        pess_embed(&mut state, &net, &first, &p, &PessOptions::default()).unwrap();

        let mut second = request(
            0,
            &[0],
            vec![chain(
                0,
                vec![VsnfSpec::new("fw", 2.3, true)],
                Direction::Upstream,
            )],
        );
        second.id = RequestId(2);
        second.chains[0].beta_req = 100_000_000;
        let err = pess_plan(&state, &net, &second, &p, &PessOptions::default()).unwrap_err();
        assert!(matches!(err, Rejection::Operational(k) if k.request == RequestId(1)));
    }
}
