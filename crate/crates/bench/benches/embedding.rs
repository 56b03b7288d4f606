use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pess_core::heuristic::{PathTree, PathWeights};
use pess_core::oracle::{exact_embed, OracleConfig};
use pess_core::simulator::{RequestStream, WorkloadConfig};
use pess_core::{
    builtin_catalog, generate_barabasi_albert, pess_embed, pess_plan, CostParams, NetworkState,
    PessOptions, PhysicalNetwork, RequestGenConfig, ServiceRequest,
};

/// A network with `warm` requests already embedded, plus the next request.
fn loaded(
    net: &PhysicalNetwork,
    gen: RequestGenConfig,
    warm: usize,
) -> (NetworkState, ServiceRequest) {
    let cfg = WorkloadConfig {
        n_requests: warm + 1,
        warmup: 0,
        seed: 11,
        request_gen: gen,
        ..Default::default()
    };
    let stream = RequestStream::generate(net, &builtin_catalog(), &cfg).unwrap();
    let mut state = NetworkState::new(net);
    for a in &stream.arrivals[..warm] {
        let _ = pess_embed(
            &mut state,
            net,
            &a.request,
            &CostParams::default(),
            &PessOptions::default(),
        );
    }
    (state, stream.arrivals[warm].request.clone())
}

fn heuristic(c: &mut Criterion) {
    let mut g = c.benchmark_group("pess_plan");
    for (nodes, m, ep2) in [(20, 2, None), (200, 3, Some(10)), (1000, 5, Some(100))] {
        let net = generate_barabasi_albert(nodes, m, 1, (10.0, 100.0)).unwrap();
        let gen = RequestGenConfig {
            ep2_size: ep2,
            ..Default::default()
        };
        let (state, req) = loaded(&net, gen, nodes / 2);
        g.bench_with_input(BenchmarkId::from_parameter(nodes), &req, |b, req| {
            b.iter(|| {
                pess_plan(
                    &state,
                    &net,
                    black_box(req),
                    &CostParams::default(),
                    &PessOptions::default(),
                )
            })
        });
    }
    g.finish();
}

fn dijkstra(c: &mut Criterion) {
    let net = generate_barabasi_albert(1000, 5, 1, (10.0, 100.0)).unwrap();
    let (state, req) = loaded(&net, RequestGenConfig::default(), 200);
    let weights = PathWeights::of(&req, 1e-6);
    c.bench_function("dijkstra_1000", |b| {
        b.iter(|| PathTree::build(&net, &state, &weights, black_box(req.ep1), false))
    });
}

fn oracle(c: &mut Criterion) {
    let net = generate_barabasi_albert(7, 2, 3, (10.0, 100.0)).unwrap();
    let gen = RequestGenConfig {
        chains: (2, 2),
        vsnfs_per_chain: (1, 2),
        ep2_size: Some(2),
        ..Default::default()
    };
    let (state, req) = loaded(&net, gen, 3);
    c.bench_function("oracle_7_nodes", |b| {
        b.iter(|| {
            exact_embed(
                &state,
                &net,
                black_box(&req),
                &OracleConfig::default(),
                &CostParams::default(),
            )
        })
    });
}

criterion_group!(benches, heuristic, dijkstra, oracle);
criterion_main!(benches);
