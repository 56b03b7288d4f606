mod common;

use pess_core::oracle::OracleConfig;
use pess_core::simulator::{
    run_heuristic_vs_oracle, run_simulation, run_twin_comparison, Metrics, Solver, WorkloadConfig,
};
use pess_core::topology::fixtures;
use pess_core::{generate_barabasi_albert, CostParams, PessOptions, RequestGenConfig};

fn strip_timing(mut m: Metrics) -> Metrics {
    m.embed_time = Default::default();
    m
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let net = generate_barabasi_albert(20, 2, 1, (10.0, 100.0)).unwrap();
    let cfg = WorkloadConfig {
        load_erlang: 800.0,
        n_requests: 2000,
        warmup: 500,
        seed: 9,
        verify_every: Some(500),
        ..Default::default()
    };
    let run = || {
        strip_timing(
            run_simulation(
                &net,
                &cfg,
                Solver::Pess,
                &CostParams::default(),
                &PessOptions::default(),
            )
            .unwrap(),
        )
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.bookkeeping_mismatches, 0);
    assert!(a.bookkeeping_checks > 0);

    let other = run_simulation(
        &net,
        &WorkloadConfig {
            seed: 10,
            ..cfg.clone()
        },
        Solver::Pess,
        &CostParams::default(),
        &PessOptions::default(),
    )
    .unwrap();
    assert_ne!(a.stream_checksum, other.stream_checksum);
}

#[test]
fn garr_with_regions_and_veto_keeps_its_books() {
    let net = fixtures::garr();
    let veto = ["BO1", "NA1"]
        .iter()
        .filter_map(|n| net.node_by_name(n))
        .collect();
    let cfg = WorkloadConfig {
        load_erlang: 2000.0,
        n_requests: 3000,
        warmup: 1000,
        seed: 4,
        verify_every: Some(700),
        request_gen: RequestGenConfig {
            region_bind_probability: 0.4,
            veto,
            ..Default::default()
        },
        ..Default::default()
    };
    let report =
        run_twin_comparison(&net, &cfg, &CostParams::default(), &PessOptions::default()).unwrap();
    for m in [&report.pess, &report.baseline] {
        assert_eq!(m.bookkeeping_mismatches, 0);
        assert_eq!(m.accepted + m.rejected, m.offered);
        assert!(m.consumed_cpu_fraction > 0.0 && m.consumed_cpu_fraction <= 1.0);
    }
    assert!(!report.pess.region_cpu_fraction.is_empty());
}

#[test]
fn stanford_gap_has_no_dominance_violations() {
    let net = fixtures::stanford();
    let cfg = WorkloadConfig {
        load_erlang: 50.0,
        n_requests: 60,
        warmup: 40,
        seed: 3,
        request_gen: RequestGenConfig {
            chains: (1, 2),
            vsnfs_per_chain: (0, 2),
            ep2_size: Some(2),
            ..Default::default()
        },
        ..Default::default()
    };
    let oracle = OracleConfig {
        max_path_len: Some(5),
        ..Default::default()
    };
    let gap = run_heuristic_vs_oracle(
        &net,
        &cfg,
        &oracle,
        &CostParams::default(),
        &PessOptions::default(),
    )
    .unwrap();
    assert_eq!(gap.dominance_violations, 0);
    assert_eq!(gap.infeasible_acceptances, 0);
    assert!(gap.compared > 0);
}
