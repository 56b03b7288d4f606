#![allow(dead_code)]

use pess_core::simulator::{RequestStream, WorkloadConfig};
use pess_core::state::check::{check_capacity, check_routing, check_security, check_structure};
use pess_core::topology::NodeProfile;
use pess_core::{
    builtin_catalog, check_embedding, BarabasiAlbert, Embedding, NetworkState, PhysicalNetwork,
    RequestGenConfig, ServiceRequest,
};

/// Small, contended Barabási-Albert instance: 5 to 8 nodes, m of 1 or 2,
/// CPU and bandwidth scarce enough for requests to compete.
pub fn micro_network(seed: u64) -> PhysicalNetwork {
    let nodes = 5 + (seed % 4) as usize;
    let attachment = 1 + ((seed / 4) % 2) as usize;
    BarabasiAlbert {
        bandwidth: [500_000_000, 2_000_000_000][(seed % 2) as usize],
        profile: NodeProfile {
            gamma: [2_000_000_000, 8_000_000_000, 67_200_000_000][(seed % 3) as usize],
            queuing_budget: 9.6e-4,
        },
        ..BarabasiAlbert::new(nodes, attachment)
    }
    .generate(seed)
    .expect("valid micro parameters")
}

/// Request mix bounded to 2 chains of at most 2 VSNFs.
pub fn micro_requests(seed: u64) -> RequestGenConfig {
    RequestGenConfig {
        chains: (1, 2),
        vsnfs_per_chain: (0, 2),
        bandwidth_bps: (1e6, 2e8),
        latency_menu: vec![2.5e-3, 5e-3, 0.1],
        region_bind_probability: if seed.is_multiple_of(5) { 0.3 } else { 0.0 },
        ep2_size: Some(1 + seed.is_multiple_of(3) as usize),
        ..Default::default()
    }
}

pub fn micro_stream(net: &PhysicalNetwork, seed: u64, arrivals: usize) -> RequestStream {
    let cfg = WorkloadConfig {
        load_erlang: 4.0,
        n_requests: arrivals,
        warmup: 0,
        seed,
        request_gen: micro_requests(seed),
        ..Default::default()
    };
    RequestStream::generate(net, &builtin_catalog(), &cfg).expect("valid micro workload")
}

/// Every constraint family, checked one by one against the pre-embedding
/// state. Returns the codes of all failing families.
pub fn battery(
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    emb: &Embedding,
    delta: f64,
) -> Vec<&'static str> {
    let mut failed = Vec::new();
    if let Err(v) = check_structure(net, req, emb) {
        failed.push(v.code());
        return failed;
    }
    for r in [
        check_routing(net, emb),
        check_security(emb, req, net),
        check_capacity(state, net, req, emb),
        check_embedding(state, net, req, emb, delta),
    ] {
        if let Err(v) = r {
            failed.push(v.code());
        }
    }
    failed
}

/// Independent re-derivation of every constraint, written against the raw
/// model rather than the library's checker. Returns a description of each
/// failure.
pub fn audit(
    state: &NetworkState,
    net: &PhysicalNetwork,
    req: &ServiceRequest,
    emb: &Embedding,
    delta: f64,
) -> Vec<String> {
    use pess_core::{Direction, RegionBinding};
    use std::collections::{BTreeMap, BTreeSet};

    let mut bad = Vec::new();
    if emb.chains.len() != req.chains.len() {
        return vec!["chain count".into()];
    }
    let mut cpu: BTreeMap<u32, u64> = BTreeMap::new();
    let mut bw: BTreeMap<u32, u64> = BTreeMap::new();
    for (chain, ce) in req.chains.iter().zip(&emb.chains) {
        let tag = format!("chain {}", chain.id.0);
        if ce.hosts.len() != chain.vsnfs.len() + 2 || ce.routes.len() + 1 != ce.hosts.len() {
            bad.push(format!("{tag}: shape"));
            continue;
        }
        let (user, remote) = match chain.direction {
            Direction::Upstream => (ce.hosts[0], *ce.hosts.last().unwrap()),
            Direction::Downstream => (*ce.hosts.last().unwrap(), ce.hosts[0]),
        };
        if user != req.ep1 || !req.ep2.contains(&remote) {
            bad.push(format!("{tag}: endpoints"));
        }
        for (k, route) in ce.routes.iter().enumerate() {
            if route.first() != Some(&ce.hosts[k]) || route.last() != Some(&ce.hosts[k + 1]) {
                bad.push(format!(
                    "{tag}: segment {k} does not join consecutive hosts"
                ));
            }
            let distinct: BTreeSet<_> = route.iter().collect();
            if distinct.len() != route.len() {
                bad.push(format!("{tag}: segment {k} is not simple"));
            }
            for w in route.windows(2) {
                match net.arc_between(w[0], w[1]) {
                    Some(a) => *bw.entry(a.0).or_default() += chain.beta_req,
                    None => bad.push(format!("{tag}: segment {k} hops without a link")),
                }
            }
        }
        for (p, (v, &h)) in chain
            .vsnfs
            .iter()
            .zip(&ce.hosts[1..ce.hosts.len() - 1])
            .enumerate()
        {
            *cpu.entry(h.0).or_default() += (v.gamma_u * chain.beta_req as f64).round() as u64;
            if req.veto.contains(&h) {
                bad.push(format!("{tag}: VSNF {p} on veto node"));
            }
            let ok = match &v.region {
                None => true,
                Some(RegionBinding::Ep1) => h == req.ep1,
                Some(RegionBinding::Ep2) => req.ep2.contains(&h),
                Some(RegionBinding::Named(r)) => net.region(r).is_some_and(|s| s.contains(&h)),
            };
            if !ok {
                bad.push(format!("{tag}: VSNF {p} outside its region"));
            }
        }
    }
    for g in &req.stateful_groups {
        let hosts: BTreeSet<_> = g
            .members
            .iter()
            .map(|m| emb.chains[m.chain.0 as usize].hosts[m.position + 1])
            .collect();
        if hosts.len() > 1 {
            bad.push(format!("stateful {} split", g.name));
        }
    }
    for (&n, &d) in &cpu {
        if d > state.residual_gamma(pess_core::NodeId(n)) {
            bad.push(format!("node {n} over capacity"));
        }
    }
    for (&a, &d) in &bw {
        if d > state.residual_beta(pess_core::ArcId(a)) {
            bad.push(format!("arc {a} over capacity"));
        }
    }
    if !bad.is_empty() {
        return bad;
    }
    for (chain, ce) in req.chains.iter().zip(&emb.chains) {
        let mut lat = chain.pi_external;
        for (v, &h) in chain.vsnfs.iter().zip(&ce.hosts[1..ce.hosts.len() - 1]) {
            let free = state.residual_gamma(h) as f64 - cpu[&h.0] as f64;
            lat += v.gamma_u * chain.sigma / (free + delta);
        }
        let last = ce.routes.len() - 1;
        for (k, route) in ce.routes.iter().enumerate() {
            if route.len() < 2 {
                continue;
            }
            for w in route.windows(2) {
                lat += net.arc_delay(net.arc_between(w[0], w[1]).unwrap());
            }
            if k > 0 {
                lat += net.node(route[0]).queuing_budget / 2.0;
            }
            if k < last {
                lat += net.node(*route.last().unwrap()).queuing_budget / 2.0;
            }
        }
        if lat > chain.lambda_max * (1.0 + 1e-12) {
            bad.push(format!(
                "chain {}: latency {lat} > {}",
                chain.id.0, chain.lambda_max
            ));
        }
    }
    bad
}
