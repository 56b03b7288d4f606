//! Exhaustive exact embedder for small instances.
//!
//! Every placement of the request's VSNFs (and every choice of remote
//! endpoint per chain) is enumerated. For a fixed placement the objective
//! splits into a placement term plus one term per chain segment, so the
//! segment routes are searched depth-first in ascending score order with
//! the sum of per-segment minima as a bound. The bound only discards
//! branches that are strictly worse, so the result is exact. Every
//! returned embedding has passed the same constraint battery as the
//! heuristic's.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::service::{RegionBinding, RequestError, ServiceRequest};
use crate::state::check::{check_embedding, recheck_load, LatencyGuard};
use crate::state::cost::{
    chain_latency, embedding_cost, processing_delay, route_delay, CostParams,
};
use crate::state::embedding::{route_arcs, ChainEmbedding, Embedding};
use crate::state::NetworkState;
use crate::topology::{NodeId, PhysicalNetwork};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Inverse-residual weighted use of bandwidth and CPU.
    #[default]
    ResourceCost,
    /// Number of distinct nodes hosting at least one VSNF.
    ActiveNodes,
    /// Sum of the end-to-end latencies of the request's chains.
    MinLatency,
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::ResourceCost => "resource-cost",
            Objective::ActiveNodes => "active-nodes",
            Objective::MinLatency => "min-latency",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub objective: Objective,
    /// Hop bound for routes; `None` means `|N| - 1`, which is no bound at all.
    pub max_path_len: Option<usize>,
    /// Cap on placements plus search-tree nodes visited.
    pub max_enumeration: u64,
    /// Same operational-chain check the heuristic applies, so both decide
    /// feasibility identically.
    pub guard: LatencyGuard,
    /// Visit every feasible assignment and keep all scores.
    pub exhaustive: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            objective: Objective::ResourceCost,
            max_path_len: None,
            max_enumeration: 20_000_000,
            guard: LatencyGuard::GuardOnly,
            exhaustive: false,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_path_len == Some(0) {
            return Err("max_path_len must be at least 1".into());
        }
        if self.max_enumeration == 0 {
            return Err("max_enumeration must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub embedding: Embedding,
    pub score: f64,
    /// Resource cost of the solution, whatever the objective.
    pub cost: f64,
    /// Placements plus search-tree nodes visited.
    pub evaluated: u64,
    /// Scores of every feasible assignment, in exhaustive mode only.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid request: {0}")]
    Invalid(#[from] RequestError),
    #[error("invalid oracle configuration: {0}")]
    Config(String),
    #[error("no feasible embedding")]
    Infeasible,
    #[error("search space exceeds the budget of {limit} evaluations")]
    BudgetExceeded { limit: u64 },
}

impl OracleError {
    pub fn code(&self) -> &'static str {
        match self {
            OracleError::Invalid(_) => "invalid-request",
            OracleError::Config(_) => "invalid-config",
            OracleError::Infeasible => "infeasible",
            OracleError::BudgetExceeded { .. } => "budget-exceeded",
        }
    }
}

/// Score of a complete embedding under `objective`.
pub fn objective_value(
    emb: &Embedding,
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    objective: Objective,
    params: &CostParams,
) -> f64 {
    match objective {
        Objective::ResourceCost => embedding_cost(state, net, emb, req, params),
        Objective::ActiveNodes => emb.active_nodes() as f64,
        Objective::MinLatency => {
            let load = emb.cpu_demands(req);
            req.chains
                .iter()
                .zip(&emb.chains)
                .map(|(c, ce)| {
                    chain_latency(net, c, ce, state.residual_gamma_all(), &load, params.delta)
                })
                .sum()
        }
    }
}

/// All simple paths from `from` to `to` with at most `max_hops` links, in
/// lexicographic order.
pub fn simple_paths(
    net: &PhysicalNetwork,
    from: NodeId,
    to: NodeId,
    max_hops: usize,
) -> Vec<Vec<NodeId>> {
    fn walk(
        net: &PhysicalNetwork,
        to: NodeId,
        max_hops: usize,
        path: &mut Vec<NodeId>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let at = *path.last().unwrap();
        if at == to {
            out.push(path.clone());
            return;
        }
        if path.len() > max_hops {
            return;
        }
        for &(next, _) in net.outgoing(at) {
            if on_path[next.index()] {
                continue;
            }
            on_path[next.index()] = true;
            path.push(next);
            walk(net, to, max_hops, path, on_path, out);
            path.pop();
            on_path[next.index()] = false;
        }
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; net.node_count()];
    on_path[from.index()] = true;
    walk(net, to, max_hops, &mut vec![from], &mut on_path, &mut out);
    out.sort();
    out
}

/// VSNFs that must share a host, with the nodes allowed to host them.
struct Slot {
    members: Vec<(usize, usize)>,
    domain: Vec<NodeId>,
}

fn slots(req: &ServiceRequest, net: &PhysicalNetwork) -> Vec<Slot> {
    let mut grouped = HashMap::new();
    let mut slots: Vec<Slot> = Vec::new();
    for g in &req.stateful_groups {
        let members: Vec<(usize, usize)> = g
            .members
            .iter()
            .map(|m| (m.chain.0 as usize, m.position))
            .collect();
        for &m in &members {
            grouped.insert(m, slots.len());
        }
        slots.push(Slot {
            members,
            domain: Vec::new(),
        });
    }
    for (c, chain) in req.chains.iter().enumerate() {
        for p in 0..chain.vsnfs.len() {
            if !grouped.contains_key(&(c, p)) {
                slots.push(Slot {
                    members: vec![(c, p)],
                    domain: Vec::new(),
                });
            }
        }
    }
    for slot in &mut slots {
        slot.domain = net
            .node_ids()
            .filter(|n| !req.veto.contains(n))
            .filter(|n| {
                slot.members
                    .iter()
                    .all(|&(c, p)| match &req.chains[c].vsnfs[p].region {
                        None => true,
                        Some(RegionBinding::Ep1) => *n == req.ep1,
                        Some(RegionBinding::Ep2) => req.ep2.contains(n),
                        Some(RegionBinding::Named(r)) => {
                            net.region(r).is_some_and(|s| s.contains(n))
                        }
                    })
            })
            .collect();
    }
    slots
}

/// One chain segment with its admissible routes, cheapest first.
struct Segment {
    chain: usize,
    routes: Vec<(f64, Vec<NodeId>)>,
    last_of_chain: bool,
}

struct Search<'a> {
    state: &'a NetworkState,
    net: &'a PhysicalNetwork,
    req: &'a ServiceRequest,
    cfg: &'a OracleConfig,
    params: &'a CostParams,
    max_hops: usize,
    paths: HashMap<(NodeId, NodeId), Vec<Vec<NodeId>>>,
    evaluated: u64,
    best: Option<(f64, Embedding)>,
    scores: Vec<f64>,
}

/// Slack on bound comparisons so that summation order never prunes an
/// optimum.
fn beats(bound: f64, best: f64) -> bool {
    bound <= best + 1e-12 * best.abs().max(1e-300)
}

impl<'a> Search<'a> {
    fn tick(&mut self) -> Result<(), OracleError> {
        self.evaluated += 1;
        if self.evaluated > self.cfg.max_enumeration {
            return Err(OracleError::BudgetExceeded {
                limit: self.cfg.max_enumeration,
            });
        }
        Ok(())
    }

    fn paths(&mut self, a: NodeId, b: NodeId) -> &[Vec<NodeId>] {
        let (net, hops) = (self.net, self.max_hops);
        self.paths
            .entry((a, b))
            .or_insert_with(|| simple_paths(net, a, b, hops))
    }

    fn segment_score(&self, chain: usize, route: &[NodeId], from_vsnf: bool, to_vsnf: bool) -> f64 {
        match self.cfg.objective {
            Objective::ResourceCost => {
                let beta = self.req.chains[chain].beta_req as f64;
                route_arcs(self.net, route)
                    .map(|a| {
                        beta / (self.state.residual_beta(a.unwrap()) as f64 + self.params.delta)
                    })
                    .sum()
            }
            Objective::ActiveNodes => 0.0,
            Objective::MinLatency => route_delay(self.net, route, from_vsnf, to_vsnf),
        }
    }

    fn placement_score(&self, hosts: &[Vec<NodeId>], load: &[(NodeId, u64)]) -> f64 {
        let delta = self.params.delta;
        match self.cfg.objective {
            Objective::ResourceCost => {
                let mut cpu = 0.0;
                for (chain, h) in self.req.chains.iter().zip(hosts) {
                    for (p, node) in h[1..h.len() - 1].iter().enumerate() {
                        cpu += chain.cpu_demand(p) as f64
                            / (self.state.residual_gamma(*node) as f64 + delta);
                    }
                }
                self.params.alpha * cpu
            }
            Objective::ActiveNodes => load.len() as f64,
            Objective::MinLatency => {
                let mut total = 0.0;
                for (chain, h) in self.req.chains.iter().zip(hosts) {
                    total += chain.pi_external;
                    for (v, node) in chain.vsnfs.iter().zip(&h[1..h.len() - 1]) {
                        let extra = load.iter().find(|(n, _)| n == node).map_or(0, |x| x.1);
                        total += processing_delay(
                            v.gamma_u,
                            chain.sigma,
                            self.state.residual_gamma(*node) as f64,
                            extra as f64,
                            delta,
                        );
                    }
                }
                total
            }
        }
    }

    fn try_placement(&mut self, hosts: Vec<Vec<NodeId>>) -> Result<(), OracleError> {
        self.tick()?;
        let mut load: Vec<(NodeId, u64)> = Vec::new();
        for (chain, h) in self.req.chains.iter().zip(&hosts) {
            for (p, &node) in h[1..h.len() - 1].iter().enumerate() {
                match load.iter_mut().find(|(n, _)| *n == node) {
                    Some(x) => x.1 += chain.cpu_demand(p),
                    None => load.push((node, chain.cpu_demand(p))),
                }
            }
        }
        load.sort();
        if load.iter().any(|&(n, d)| d > self.state.residual_gamma(n)) {
            return Ok(());
        }
        if recheck_load(
            self.state,
            self.net,
            &load,
            self.cfg.guard,
            self.params.delta,
        )
        .is_err()
        {
            return Ok(());
        }

        let mut segments = Vec::new();
        for (c, h) in hosts.iter().enumerate() {
            let beta = self.req.chains[c].beta_req;
            for k in 0..h.len() - 1 {
                let (from_vsnf, to_vsnf) = (k >= 1, k + 2 < h.len());
                let candidates = if h[k] == h[k + 1] {
                    vec![vec![h[k]]]
                } else {
                    self.paths(h[k], h[k + 1]).to_vec()
                };
                let mut routes: Vec<(f64, Vec<NodeId>)> = candidates
                    .into_iter()
                    .filter(|r| {
                        route_arcs(self.net, r)
                            .all(|a| self.state.residual_beta(a.unwrap()) >= beta)
                    })
                    .map(|r| (self.segment_score(c, &r, from_vsnf, to_vsnf), r))
                    .collect();
                if routes.is_empty() {
                    return Ok(());
                }
                routes.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
                segments.push(Segment {
                    chain: c,
                    routes,
                    last_of_chain: k + 2 == h.len(),
                });
            }
        }

        let fixed = self.placement_score(&hosts, &load);
        let mut suffix = vec![0.0; segments.len() + 1];
        for i in (0..segments.len()).rev() {
            suffix[i] = suffix[i + 1] + segments[i].routes[0].0;
        }
        if !self.cfg.exhaustive {
            if let Some((best, _)) = &self.best {
                if !beats(fixed + suffix[0], *best) {
                    return Ok(());
                }
            }
        }

        let mut chosen: Vec<Vec<Vec<NodeId>>> = hosts.iter().map(|_| Vec::new()).collect();
        let mut arc_load = vec![0u64; self.net.arc_count()];
        let mut done = false;
        self.descend(
            &hosts,
            &load,
            &segments,
            &suffix,
            0,
            fixed,
            &mut chosen,
            &mut arc_load,
            &mut done,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &mut self,
        hosts: &[Vec<NodeId>],
        load: &[(NodeId, u64)],
        segments: &[Segment],
        suffix: &[f64],
        i: usize,
        partial: f64,
        chosen: &mut Vec<Vec<Vec<NodeId>>>,
        arc_load: &mut Vec<u64>,
        done: &mut bool,
    ) -> Result<(), OracleError> {
        self.tick()?;
        if i == segments.len() {
            return self.leaf(hosts, chosen, done);
        }
        let seg = &segments[i];
        let beta = self.req.chains[seg.chain].beta_req;
        for (score, route) in &seg.routes {
            if *done {
                return Ok(());
            }
            if !self.cfg.exhaustive {
                if let Some((best, _)) = &self.best {
                    if !beats(partial + score + suffix[i + 1], *best) {
                        // Routes are sorted by score, so the rest are no better.
                        return Ok(());
                    }
                }
            }
            let arcs: Vec<usize> = route_arcs(self.net, route)
                .map(|a| a.unwrap().index())
                .collect();
            let fits = arcs
                .iter()
                .all(|&a| arc_load[a] + beta <= self.state.residual_beta_all()[a]);
            if !fits {
                continue;
            }
            for &a in &arcs {
                arc_load[a] += beta;
            }
            chosen[seg.chain].push(route.clone());
            let chain_ok = !seg.last_of_chain || {
                let ce = ChainEmbedding {
                    hosts: hosts[seg.chain].clone(),
                    routes: chosen[seg.chain].clone(),
                };
                let c = &self.req.chains[seg.chain];
                chain_latency(
                    self.net,
                    c,
                    &ce,
                    self.state.residual_gamma_all(),
                    load,
                    self.params.delta,
                ) <= c.lambda_max
            };
            let result = if chain_ok {
                self.descend(
                    hosts,
                    load,
                    segments,
                    suffix,
                    i + 1,
                    partial + score,
                    chosen,
                    arc_load,
                    done,
                )
            } else {
                Ok(())
            };
            chosen[seg.chain].pop();
            for &a in &arcs {
                arc_load[a] -= beta;
            }
            result?;
        }
        Ok(())
    }

    fn leaf(
        &mut self,
        hosts: &[Vec<NodeId>],
        chosen: &[Vec<Vec<NodeId>>],
        done: &mut bool,
    ) -> Result<(), OracleError> {
        let emb = Embedding {
            chains: hosts
                .iter()
                .zip(chosen)
                .map(|(h, r)| ChainEmbedding {
                    hosts: h.clone(),
                    routes: r.clone(),
                })
                .collect(),
        };
        if check_embedding(self.state, self.net, self.req, &emb, self.params.delta).is_err() {
            return Ok(());
        }
        let score = objective_value(
            &emb,
            self.state,
            self.net,
            self.req,
            self.cfg.objective,
            self.params,
        );
        if self.cfg.exhaustive {
            self.scores.push(score);
        } else if self.cfg.objective == Objective::ActiveNodes {
            // Routes do not move the score and are visited in encoding
            // order, so the first feasible leaf settles this placement.
            *done = true;
        }
        let better = match &self.best {
            None => true,
            Some((s, e)) => score < *s || (score == *s && emb < *e),
        };
        if better {
            self.best = Some((score, emb));
        }
        Ok(())
    }
}

/// Optimal embedding of `req` under `cfg.objective`.
pub fn exact_embed(
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    cfg: &OracleConfig,
    params: &CostParams,
) -> Result<OracleSolution, OracleError> {
    req.validate(net)?;
    cfg.validate().map_err(OracleError::Config)?;
    params.validate().map_err(OracleError::Config)?;
    let slots = slots(req, net);
    if slots.iter().any(|s| s.domain.is_empty()) {
        return Err(OracleError::Infeasible);
    }
    let remotes: Vec<NodeId> = req.ep2.iter().copied().collect();
    let mut search = Search {
        state,
        net,
        req,
        cfg,
        params,
        max_hops: cfg
            .max_path_len
            .unwrap_or(net.node_count().saturating_sub(1))
            .max(1),
        paths: HashMap::new(),
        evaluated: 0,
        best: None,
        scores: Vec::new(),
    };

    // Odometer over one remote endpoint per chain, then one host per slot.
    let radices: Vec<usize> = std::iter::repeat_n(remotes.len(), req.chains.len())
        .chain(slots.iter().map(|s| s.domain.len()))
        .collect();
    let mut digits = vec![0usize; radices.len()];
    loop {
        let mut hosts: Vec<Vec<NodeId>> = req
            .chains
            .iter()
            .map(|c| vec![req.ep1; c.vsnfs.len() + 2])
            .collect();
        for (c, chain) in req.chains.iter().enumerate() {
            let remote = remotes[digits[c]];
            let h = &mut hosts[c];
            match chain.direction {
                crate::service::Direction::Upstream => *h.last_mut().unwrap() = remote,
                crate::service::Direction::Downstream => h[0] = remote,
            }
        }
        for (s, slot) in slots.iter().enumerate() {
            let node = slot.domain[digits[req.chains.len() + s]];
            for &(c, p) in &slot.members {
                hosts[c][p + 1] = node;
            }
        }
        search.try_placement(hosts)?;

        let mut i = radices.len();
        loop {
            if i == 0 {
                let evaluated = search.evaluated;
                let scores = std::mem::take(&mut search.scores);
                return match search.best {
                    Some((score, embedding)) => Ok(OracleSolution {
                        cost: embedding_cost(state, net, &embedding, req, params),
                        embedding,
                        score,
                        evaluated,
                        scores,
                    }),
                    None => Err(OracleError::Infeasible),
                };
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < radices[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}
