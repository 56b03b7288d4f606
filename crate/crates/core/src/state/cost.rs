//! Delay model, admission threshold and embedding cost.

use serde::{Deserialize, Serialize};

use super::embedding::{load_on, route_arcs, ChainEmbedding, Embedding, NodeLoad};
use super::NetworkState;
use crate::service::{Chain, ServiceRequest};
use crate::topology::{NodeId, PhysicalNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Weight of the CPU term against the bandwidth term.
    pub alpha: f64,
    /// Guard against division by zero in every cost and delay formula.
    pub delta: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            alpha: 1.0,
            delta: 1e-6,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(format!(
                "alpha must be a finite non-negative number, got {}",
                self.alpha
            ));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(format!(
                "delta must be a finite positive number, got {}",
                self.delta
            ));
        }
        Ok(())
    }
}

/// Time for one packet of `sigma` bits to traverse a VSNF needing `gamma_u`
/// cycles/bit on a node with `residual_gamma_i` cycles/s left, once `gamma_cu`
/// further cycles/s are taken by the chains being placed.
pub fn processing_delay(
    gamma_u: f64,
    sigma: f64,
    residual_gamma_i: f64,
    gamma_cu: f64,
    delta: f64,
) -> f64 {
    gamma_u * sigma / ((residual_gamma_i - gamma_cu) + delta)
}

/// Propagation plus queuing delay of segment `k`. A node's local network is
/// only crossed (and its queuing budget charged) where a VSNF of the chain
/// sits at the start or end of the segment.
pub fn segment_delay(net: &PhysicalNetwork, ce: &ChainEmbedding, k: usize) -> f64 {
    route_delay(
        net,
        &ce.routes[k],
        ce.segment_starts_at_vsnf(k),
        ce.segment_ends_at_vsnf(k),
    )
}

/// [`segment_delay`] for a bare route.
pub fn route_delay(net: &PhysicalNetwork, route: &[NodeId], from_vsnf: bool, to_vsnf: bool) -> f64 {
    if route.len() < 2 {
        return 0.0;
    }
    let mut delay: f64 = route_arcs(net, route)
        .map(|arc| net.arc_delay(arc.expect("route hops follow links")))
        .sum();
    if from_vsnf {
        delay += net.node(route[0]).departure_queuing();
    }
    if to_vsnf {
        delay += net.node(*route.last().unwrap()).arrival_queuing();
    }
    delay
}

/// Load-independent part of a chain's latency (links and queuing).
pub fn fixed_delay(net: &PhysicalNetwork, ce: &ChainEmbedding) -> f64 {
    (0..ce.routes.len())
        .map(|k| segment_delay(net, ce, k))
        .sum()
}

/// End-to-end latency of `chain`, with `residual_gamma` the current node
/// residuals and `extra` the CPU taken by embeddings not yet applied to them.
pub fn chain_latency(
    net: &PhysicalNetwork,
    chain: &Chain,
    ce: &ChainEmbedding,
    residual_gamma: &[u64],
    extra: &NodeLoad,
    delta: f64,
) -> f64 {
    let mut latency = chain.pi_external;
    for (vsnf, &node) in chain.vsnfs.iter().zip(ce.vsnf_hosts()) {
        latency += processing_delay(
            vsnf.gamma_u,
            chain.sigma,
            residual_gamma[node.index()] as f64,
            load_on(extra, node) as f64,
            delta,
        );
    }
    latency + fixed_delay(net, ce)
}

/// Minimum average residual CPU the chain's hosts must keep for its latency
/// bound to hold. `f64::INFINITY` when links and queuing alone already use
/// up the bound.
pub fn gamma_threshold(
    chain: &Chain,
    ce: &ChainEmbedding,
    net: &PhysicalNetwork,
    delta: f64,
) -> f64 {
    let budget = chain.lambda_max - chain.pi_external - fixed_delay(net, ce);
    if budget <= 0.0 {
        return f64::INFINITY;
    }
    let cycles: f64 = chain.vsnfs.iter().map(|v| v.gamma_u * chain.sigma).sum();
    cycles / budget - delta
}

/// Cost of one chain against the residuals in `state`.
pub fn chain_cost(
    state: &NetworkState,
    net: &PhysicalNetwork,
    chain: &Chain,
    ce: &ChainEmbedding,
    params: &CostParams,
) -> f64 {
    let beta = chain.beta_req as f64;
    let mut cost = 0.0;
    for route in &ce.routes {
        for arc in route_arcs(net, route) {
            let arc = arc.expect("route hops follow links");
            cost += beta / (state.residual_beta(arc) as f64 + params.delta);
        }
    }
    let mut cpu = 0.0;
    for (pos, &node) in ce.vsnf_hosts().iter().enumerate() {
        cpu += chain.cpu_demand(pos) as f64 / (state.residual_gamma(node) as f64 + params.delta);
    }
    cost + params.alpha * cpu
}

/// Resource cost of embedding `req`, pricing each unit by the inverse of
/// the residual capacity before the request is applied.
pub fn embedding_cost(
    state: &NetworkState,
    net: &PhysicalNetwork,
    emb: &Embedding,
    req: &ServiceRequest,
    params: &CostParams,
) -> f64 {
    req.chains
        .iter()
        .zip(&emb.chains)
        .map(|(chain, ce)| chain_cost(state, net, chain, ce, params))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service::{ChainId, Direction, VsnfSpec};
    use crate::topology::load_topology;

    #[test]
    fn processing_delay_vectors() {
        let d = processing_delay(9.5, 8000.0, 6.72e10, 9.5e8, 1e-6);
        assert!((d - 76000.0 / 6.625e10).abs() / d < 1e-12);
        assert!((d - 1.1472e-6).abs() / 1.1472e-6 < 1e-4);
        assert_eq!(processing_delay(0.0, 8000.0, 6.72e10, 0.0, 1e-6), 0.0);
        let pole = processing_delay(9.5, 8000.0, 9.5e8, 9.5e8, 1e-6);
        assert!((pole - 7.6e10).abs() / 7.6e10 < 1e-12);
    }

    #[test]
    fn processing_delay_falls_as_residual_grows() {
        let mut last = f64::INFINITY;
        for r in [1e9, 2e9, 1e10, 6.72e10] {
            let d = processing_delay(9.5, 8000.0, r, 9.5e8, 1e-6);
            assert!(d < last);
            last = d;
        }
    }

    fn two_node(distance: &str, queuing: f64) -> PhysicalNetwork {
        load_topology(&format!(
            "nodes = [{{ id = 0 }}, {{ id = 1 }}]\n\
             links = [{{ a = 0, b = 1, bandwidth = 1000000000, {distance} }}]\n\
             [defaults]\nqueuing_budget = {queuing:?}"
        ))
        .unwrap()
    }

    fn chain(vsnfs: Vec<VsnfSpec>, lambda: f64) -> Chain {
        Chain {
            id: ChainId(0),
            vsnfs,
            beta_req: 100_000_000,
            lambda_max: lambda,
            sigma: 8000.0,
            pi_external: 0.0,
            direction: Direction::Upstream,
        }
    }

    #[test]
    fn latency_of_plain_forwarding_chain() {
        let net = two_node("distance_km = 100", 9.6e-4);
        let c = chain(vec![], 1.0);
        let ce = ChainEmbedding {
            hosts: vec![NodeId(0), NodeId(1)],
            routes: vec![vec![NodeId(0), NodeId(1)]],
        };
        let residual = vec![67_200_000_000; 2];
        assert_eq!(chain_latency(&net, &c, &ce, &residual, &[], 1e-6), 5.0e-4);
    }

    #[test]
    fn latency_charges_departure_half_once() {
        let net = two_node("delay = 0.0", 3.2e-4);
        let c = chain(vec![VsnfSpec::new("snort", 9.5, true)], 1.0);
        let ce = ChainEmbedding {
            hosts: vec![NodeId(0), NodeId(0), NodeId(1)],
            routes: vec![vec![NodeId(0)], vec![NodeId(0), NodeId(1)]],
        };
        let residual = vec![67_200_000_000; 2];
        let load = [(NodeId(0), 950_000_000)];
        let lat = chain_latency(&net, &c, &ce, &residual, &load, 1e-6);
        let expected = processing_delay(9.5, 8000.0, 6.72e10, 9.5e8, 1e-6) + 1.6e-4;
        assert!((lat - expected).abs() < 1e-15, "{lat} vs {expected}");
    }

    #[test]
    fn latency_with_empty_route() {
        let net = two_node("distance_km = 100", 9.6e-4);
        let mut c = chain(vec![VsnfSpec::new("snort", 9.5, true)], 1.0);
        c.pi_external = 5e-3;
        let ce = ChainEmbedding {
            hosts: vec![NodeId(1), NodeId(1), NodeId(1)],
            routes: vec![vec![NodeId(1)], vec![NodeId(1)]],
        };
        let residual = vec![67_200_000_000; 2];
        let lat = chain_latency(&net, &c, &ce, &residual, &[(NodeId(1), 950_000_000)], 1e-6);
        assert_eq!(
            lat,
            5e-3 + processing_delay(9.5, 8000.0, 6.72e10, 9.5e8, 1e-6)
        );
    }

    #[test]
    fn threshold_vectors() {
        // 100 km link gives exactly 5e-4 s of fixed delay with no queuing.
        let net = two_node("distance_km = 100", 0.0);
        let c = chain(vec![VsnfSpec::new("snort", 9.5, true)], 1e-3);
        let ce = ChainEmbedding {
            hosts: vec![NodeId(0), NodeId(0), NodeId(1)],
            routes: vec![vec![NodeId(0)], vec![NodeId(0), NodeId(1)]],
        };
        let t = gamma_threshold(&c, &ce, &net, 1e-6);
        assert!((t - (76000.0 / 5e-4 - 1e-6)).abs() < 1e-6);
        assert!((t - 1.52e8).abs() / 1.52e8 < 1e-12);

        let empty = chain(vec![], 1e-3);
        let ce0 = ChainEmbedding {
            hosts: vec![NodeId(0), NodeId(1)],
            routes: vec![vec![NodeId(0), NodeId(1)]],
        };
        assert_eq!(gamma_threshold(&empty, &ce0, &net, 1e-6), -1e-6);

        let tight = chain(vec![VsnfSpec::new("snort", 9.5, true)], 5e-4);
        assert_eq!(gamma_threshold(&tight, &ce, &net, 1e-6), f64::INFINITY);
    }

    #[test]
    fn params_validation() {
        assert!(CostParams::default().validate().is_ok());
        assert!(CostParams {
            alpha: -1.0,
            delta: 1e-6
        }
        .validate()
        .is_err());
        assert!(CostParams {
            alpha: 1.0,
            delta: 0.0
        }
        .validate()
        .is_err());
    }
}
