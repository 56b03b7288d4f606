//! Poisson workload driver: arrivals and departures of service requests at a
//! given Erlang load, PESS against the application-agnostic baseline on a
//! shared request stream, heuristic-versus-oracle comparison and timing.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::heuristic::{pess_embed, pess_plan, PessOptions};
use crate::oracle::{exact_embed, OracleConfig, OracleError};
use crate::service::{
    baseline_request, builtin_catalog, ConfigError, RequestGenConfig, RequestGenerator, RequestId,
    ServiceRequest, VsnfCatalog,
};
use crate::state::check::{check_embedding, recheck_operational, LatencyGuard};
use crate::state::cost::{chain_latency, CostParams};
use crate::state::embedding::Embedding;
use crate::state::NetworkState;
use crate::topology::{BarabasiAlbert, PhysicalNetwork, TopologyError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid workload: {0}")]
    Config(String),
    #[error(transparent)]
    Generator(#[from] ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    /// Offered load: mean number of concurrently active services.
    pub load_erlang: f64,
    pub n_requests: usize,
    /// Arrivals before statistics start.
    pub warmup: usize,
    pub mean_holding: f64,
    pub seed: u64,
    pub request_gen: RequestGenConfig,
    /// Compare incremental state with a rebuild every this many events.
    pub verify_every: Option<u64>,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            load_erlang: 1000.0,
            n_requests: 100_000,
            warmup: 80_000,
            mean_holding: 1.0,
            seed: 0,
            request_gen: RequestGenConfig::default(),
            verify_every: None,
        }
    }
}

impl WorkloadConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if !(self.load_erlang > 0.0 && self.load_erlang.is_finite()) {
            return bad("load must be positive");
        }
        if !(self.mean_holding > 0.0 && self.mean_holding.is_finite()) {
            return bad("mean holding time must be positive");
        }
        if self.n_requests == 0 || self.warmup >= self.n_requests {
            return bad("warmup must be smaller than the number of requests");
        }
        if self.verify_every == Some(0) {
            return bad("verification interval must be positive");
        }
        Ok(())
    }
}

/// Which provisioning approach a run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Pess,
    /// Each request is first collapsed into one chain per direction.
    Baseline,
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Solver::Pess => "pess",
            Solver::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: f64,
    pub holding: f64,
    pub request: ServiceRequest,
}

/// Pre-drawn arrival sequence shared by every solver run on it.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestStream {
    pub arrivals: Vec<Arrival>,
}

impl RequestStream {
    pub fn generate(
        net: &PhysicalNetwork,
        catalog: &VsnfCatalog,
        cfg: &WorkloadConfig,
    ) -> Result<Self, SimError> {
        cfg.validate()?;
        let mut timing = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut req_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        req_rng.set_stream(1);
        let mut gen = RequestGenerator::new(catalog.clone(), cfg.request_gen.clone(), req_rng)?;
        let gap = Exp::new(cfg.load_erlang / cfg.mean_holding).expect("positive rate");
        let hold = Exp::new(1.0 / cfg.mean_holding).expect("positive rate");
        let mut time = 0.0;
        let mut arrivals = Vec::with_capacity(cfg.n_requests);
        for _ in 0..cfg.n_requests {
            time += gap.sample(&mut timing);
            let holding = hold.sample(&mut timing);
            arrivals.push(Arrival {
                time,
                holding,
                request: gen.next_request(net)?,
            });
        }
        Ok(RequestStream { arrivals })
    }

    /// SHA-256 over the serialized arrivals, hex encoded.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for a in &self.arrivals {
            h.update(a.time.to_le_bytes());
            h.update(a.holding.to_le_bytes());
            h.update(serde_json::to_vec(&a.request).expect("requests serialize"));
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    pub mean_s: f64,
    pub p50_s: f64,
    pub p95_s: f64,
    pub max_s: f64,
}

impl TimeStats {
    pub fn of(mut samples: Vec<f64>) -> Self {
        if samples.is_empty() {
            return TimeStats::default();
        }
        samples.sort_by(f64::total_cmp);
        let at = |q: f64| samples[((samples.len() - 1) as f64 * q).round() as usize];
        TimeStats {
            mean_s: samples.iter().sum::<f64>() / samples.len() as f64,
            p50_s: at(0.5),
            p95_s: at(0.95),
            max_s: *samples.last().unwrap(),
        }
    }
}

/// Statistics of one run, counted after warm-up.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub offered: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub blocking_probability: f64,
    /// Time-averaged share of network CPU in use.
    pub consumed_cpu_fraction: f64,
    /// Same, per named region.
    pub region_cpu_fraction: BTreeMap<String, f64>,
    /// Time-averaged number of active services.
    pub active_services: f64,
    /// Mean end-to-end latency of accepted chains, evaluated at acceptance.
    pub mean_chain_latency: f64,
    pub rejection_reasons: BTreeMap<String, u64>,
    /// Wall time per embedding attempt; varies between identical runs.
    pub embed_time: TimeStats,
    pub bookkeeping_checks: u64,
    pub bookkeeping_mismatches: u64,
    /// Checksum of the request stream this run consumed.
    pub stream_checksum: String,
}

struct Window {
    start: f64,
    last: f64,
    span: f64,
    cpu: f64,
    region_cpu: Vec<f64>,
    active: f64,
}

impl Window {
    fn advance(&mut self, to: f64, net: &PhysicalNetwork, state: &NetworkState) {
        let from = self.last.max(self.start);
        if to > from {
            let dt = to - from;
            self.span += dt;
            self.cpu += dt * state.consumed_cpu_fraction(net);
            for (acc, nodes) in self.region_cpu.iter_mut().zip(net.regions().values()) {
                *acc += dt * state.consumed_cpu_fraction_of(net, nodes);
            }
            self.active += dt * state.services().len() as f64;
        }
        self.last = self.last.max(to);
    }
}

fn verify(state: &NetworkState, net: &PhysicalNetwork, delta: f64) -> bool {
    let Ok(fresh) = state.rebuild(net, delta) else {
        return false;
    };
    fresh.residual_gamma_all() == state.residual_gamma_all()
        && fresh.residual_beta_all() == state.residual_beta_all()
        && fresh.guards() == state.guards()
        && state.brute_force_guards() == state.guards()
}

/// Plays `stream` against a fresh copy of `net`.
pub fn run_stream(
    net: &PhysicalNetwork,
    stream: &RequestStream,
    warmup: usize,
    solver: Solver,
    params: &CostParams,
    opts: &PessOptions,
    verify_every: Option<u64>,
) -> Metrics {
    let mut state = NetworkState::new(net);
    let mut departures: BinaryHeap<Reverse<(u64, RequestId)>> = BinaryHeap::new();
    let start = stream
        .arrivals
        .get(warmup)
        .map_or(f64::INFINITY, |a| a.time);
    let mut window = Window {
        start,
        last: 0.0,
        span: 0.0,
        cpu: 0.0,
        region_cpu: vec![0.0; net.regions().len()],
        active: 0.0,
    };
    let mut m = Metrics {
        stream_checksum: stream.checksum(),
        ..Default::default()
    };
    let (mut latency_sum, mut latency_n) = (0.0, 0u64);
    let mut times = Vec::new();
    let mut events = 0u64;
    let mut after_event = |state: &NetworkState, m: &mut Metrics| {
        events += 1;
        if verify_every.is_some_and(|k| events.is_multiple_of(k)) {
            m.bookkeeping_checks += 1;
            if !verify(state, net, params.delta) {
                m.bookkeeping_mismatches += 1;
            }
        }
    };

    for (i, arrival) in stream.arrivals.iter().enumerate() {
        // Departure times are non-negative, so their bit patterns sort like
        // the values.
        while let Some(&Reverse((bits, id))) = departures.peek() {
            let t = f64::from_bits(bits);
            if t > arrival.time {
                break;
            }
            departures.pop();
            window.advance(t, net, &state);
            state
                .release(net, id)
                .expect("departing services are active");
            after_event(&state, &mut m);
        }
        window.advance(arrival.time, net, &state);

        let req = match solver {
            Solver::Pess => arrival.request.clone(),
            Solver::Baseline => baseline_request(&arrival.request),
        };
        let counted = i >= warmup;
        let clock = Instant::now();
        let outcome = pess_embed(&mut state, net, &req, params, opts);
        if counted {
            times.push(clock.elapsed().as_secs_f64());
            m.offered += 1;
        }
        match outcome {
            Ok(plan) => {
                let t = arrival.time + arrival.holding;
                departures.push(Reverse((t.to_bits(), req.id)));
                if counted {
                    m.accepted += 1;
                    for (chain, ce) in req.chains.iter().zip(&plan.candidate.embedding.chains) {
                        latency_sum += chain_latency(
                            net,
                            chain,
                            ce,
                            state.residual_gamma_all(),
                            &[],
                            params.delta,
                        );
                        latency_n += 1;
                    }
                }
            }
            Err(rej) => {
                if counted {
                    m.rejected += 1;
                    *m.rejection_reasons
                        .entry(rej.code().to_string())
                        .or_default() += 1;
                }
            }
        }
        after_event(&state, &mut m);
    }

    if window.span > 0.0 {
        m.consumed_cpu_fraction = window.cpu / window.span;
        m.active_services = window.active / window.span;
        for (name, acc) in net.regions().keys().zip(&window.region_cpu) {
            m.region_cpu_fraction
                .insert(name.clone(), acc / window.span);
        }
    }
    if m.offered > 0 {
        m.blocking_probability = m.rejected as f64 / m.offered as f64;
    }
    if latency_n > 0 {
        m.mean_chain_latency = latency_sum / latency_n as f64;
    }
    m.embed_time = TimeStats::of(times);
    m
}

/// Generates the stream for `cfg` and plays it with `solver`.
pub fn run_simulation(
    net: &PhysicalNetwork,
    cfg: &WorkloadConfig,
    solver: Solver,
    params: &CostParams,
    opts: &PessOptions,
) -> Result<Metrics, SimError> {
    let stream = RequestStream::generate(net, &builtin_catalog(), cfg)?;
    Ok(run_stream(
        net,
        &stream,
        cfg.warmup,
        solver,
        params,
        opts,
        cfg.verify_every,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinReport {
    pub pess: Metrics,
    pub baseline: Metrics,
    /// Baseline mean chain latency over the PESS one.
    pub delay_ratio: f64,
}

/// PESS and baseline on twin copies of `net` fed the same stream.
pub fn run_twin_comparison(
    net: &PhysicalNetwork,
    cfg: &WorkloadConfig,
    params: &CostParams,
    opts: &PessOptions,
) -> Result<TwinReport, SimError> {
    let stream = RequestStream::generate(net, &builtin_catalog(), cfg)?;
    let (pess, baseline) = rayon::join(
        || {
            run_stream(
                net,
                &stream,
                cfg.warmup,
                Solver::Pess,
                params,
                opts,
                cfg.verify_every,
            )
        },
        || {
            run_stream(
                net,
                &stream,
                cfg.warmup,
                Solver::Baseline,
                params,
                opts,
                cfg.verify_every,
            )
        },
    );
    let delay_ratio = if pess.mean_chain_latency > 0.0 {
        baseline.mean_chain_latency / pess.mean_chain_latency
    } else {
        1.0
    };
    Ok(TwinReport {
        pess,
        baseline,
        delay_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub load_erlang: f64,
    pub seed: u64,
    pub report: TwinReport,
}

/// Twin comparison at every (load, seed) pair, run in parallel. Output
/// order follows `loads` then `seeds`.
pub fn run_load_sweep(
    net: &PhysicalNetwork,
    base: &WorkloadConfig,
    loads: &[f64],
    seeds: &[u64],
    params: &CostParams,
    opts: &PessOptions,
) -> Result<Vec<SweepPoint>, SimError> {
    let jobs: Vec<(f64, u64)> = loads
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();
    jobs.par_iter()
        .map(|&(load_erlang, seed)| {
            let cfg = WorkloadConfig {
                load_erlang,
                seed,
                ..base.clone()
            };
            Ok(SweepPoint {
                load_erlang,
                seed,
                report: run_twin_comparison(net, &cfg, params, opts)?,
            })
        })
        .collect()
}

/// Outcome of comparing the heuristic with the oracle request by request.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub pairs: u64,
    /// Pairs where both returned an embedding.
    pub compared: u64,
    pub both_rejected: u64,
    pub oracle_only: u64,
    /// Heuristic accepted but the oracle found nothing; never expected.
    pub heuristic_only: u64,
    pub budget_skipped: u64,
    /// Heuristic cheaper than the oracle beyond 1e-9 relative.
    pub dominance_violations: u64,
    /// Heuristic acceptances failing the constraint battery.
    pub infeasible_acceptances: u64,
    /// Accepted embeddings (either solver) that pass the guard-only check
    /// but break some operational chain under the exhaustive one.
    pub guard_divergence: u64,
    /// Relative overheads (cost_h - cost_o) / cost_o of compared pairs.
    pub overheads: Vec<f64>,
    pub mean_overhead: f64,
    pub median_overhead: f64,
    pub max_overhead: f64,
    pub heuristic_time: TimeStats,
    pub oracle_time: TimeStats,
}

/// Warms `net` with the heuristic for `cfg.warmup` arrivals, then solves
/// every later arrival both ways on the same state and keeps the
/// heuristic's embedding.
pub fn run_heuristic_vs_oracle(
    net: &PhysicalNetwork,
    cfg: &WorkloadConfig,
    oracle_cfg: &OracleConfig,
    params: &CostParams,
    opts: &PessOptions,
) -> Result<GapReport, SimError> {
    let stream = RequestStream::generate(net, &builtin_catalog(), cfg)?;
    Ok(compare_on_stream(
        net, &stream, cfg.warmup, oracle_cfg, params, opts,
    ))
}

pub fn compare_on_stream(
    net: &PhysicalNetwork,
    stream: &RequestStream,
    warmup: usize,
    oracle_cfg: &OracleConfig,
    params: &CostParams,
    opts: &PessOptions,
) -> GapReport {
    let mut state = NetworkState::new(net);
    let mut departures: BinaryHeap<Reverse<(u64, RequestId)>> = BinaryHeap::new();
    let mut r = GapReport::default();
    let (mut th, mut to) = (Vec::new(), Vec::new());
    let diverges = |state: &NetworkState, req: &ServiceRequest, emb: &Embedding| {
        recheck_operational(state, net, req, emb, LatencyGuard::Exhaustive, params.delta).is_err()
    };

    for (i, arrival) in stream.arrivals.iter().enumerate() {
        while let Some(&Reverse((bits, id))) = departures.peek() {
            if f64::from_bits(bits) > arrival.time {
                break;
            }
            departures.pop();
            state
                .release(net, id)
                .expect("departing services are active");
        }
        let req = &arrival.request;
        let clock = Instant::now();
        let heuristic = pess_plan(&state, net, req, params, opts);
        let h_time = clock.elapsed().as_secs_f64();

        if i >= warmup {
            r.pairs += 1;
            th.push(h_time);
            let clock = Instant::now();
            let oracle = exact_embed(&state, net, req, oracle_cfg, params);
            to.push(clock.elapsed().as_secs_f64());
            if let Ok(plan) = &heuristic {
                let emb = &plan.candidate.embedding;
                if check_embedding(&state, net, req, emb, params.delta).is_err() {
                    r.infeasible_acceptances += 1;
                }
                if diverges(&state, req, emb) {
                    r.guard_divergence += 1;
                }
            }
            if let Ok(sol) = &oracle {
                if diverges(&state, req, &sol.embedding) {
                    r.guard_divergence += 1;
                }
            }
            match (&heuristic, oracle) {
                (_, Err(OracleError::BudgetExceeded { .. })) => r.budget_skipped += 1,
                (Ok(plan), Ok(sol)) => {
                    r.compared += 1;
                    let (h, o) = (plan.candidate.cost, sol.cost);
                    if h < o * (1.0 - 1e-9) {
                        r.dominance_violations += 1;
                    }
                    r.overheads.push((h - o) / o);
                }
                (Ok(_), Err(_)) => r.heuristic_only += 1,
                (Err(_), Ok(_)) => r.oracle_only += 1,
                (Err(_), Err(_)) => r.both_rejected += 1,
            }
        }

        if let Ok(plan) = heuristic {
            state
                .register(net, req, &plan.candidate.embedding, params.delta)
                .expect("planned embeddings fit");
            let t = arrival.time + arrival.holding;
            departures.push(Reverse((t.to_bits(), req.id)));
        }
    }

    if !r.overheads.is_empty() {
        let mut sorted = r.overheads.clone();
        sorted.sort_by(f64::total_cmp);
        r.mean_overhead = sorted.iter().sum::<f64>() / sorted.len() as f64;
        r.median_overhead = sorted[sorted.len() / 2];
        r.max_overhead = *sorted.last().unwrap();
    }
    r.heuristic_time = TimeStats::of(th);
    r.oracle_time = TimeStats::of(to);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleCase {
    pub nodes: usize,
    pub attachment: usize,
    pub ep2_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub nodes: usize,
    pub attachment: usize,
    pub ep2_size: usize,
    pub links: usize,
    pub requests: usize,
    pub accepted: usize,
    pub mean_candidates: f64,
    pub embed_time: TimeStats,
}

/// Embeds `requests` random requests per case on a fresh Barabási-Albert
/// graph without departures and times each call.
pub fn run_scalability(
    cases: &[ScaleCase],
    requests: usize,
    seed: u64,
    gen: &RequestGenConfig,
    params: &CostParams,
    opts: &PessOptions,
) -> Result<Vec<ScaleRow>, SimError> {
    let mut rows = Vec::with_capacity(cases.len());
    for case in cases {
        let net = BarabasiAlbert::new(case.nodes, case.attachment).generate(seed)?;
        let cfg = RequestGenConfig {
            ep2_size: Some(case.ep2_size),
            ..gen.clone()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        let mut generator = RequestGenerator::new(builtin_catalog(), cfg, rng)?;
        let mut state = NetworkState::new(&net);
        let (mut times, mut accepted, mut candidates) = (Vec::with_capacity(requests), 0, 0usize);
        for _ in 0..requests {
            let req = generator.next_request(&net)?;
            let clock = Instant::now();
            let outcome = pess_embed(&mut state, &net, &req, params, opts);
            times.push(clock.elapsed().as_secs_f64());
            if let Ok(plan) = outcome {
                accepted += 1;
                candidates += plan.stats.candidates;
            }
        }
        rows.push(ScaleRow {
            nodes: case.nodes,
            attachment: case.attachment,
            ep2_size: case.ep2_size,
            links: net.link_count(),
            requests,
            accepted,
            mean_candidates: if accepted > 0 {
                candidates as f64 / accepted as f64
            } else {
                0.0
            },
            embed_time: TimeStats::of(times),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::generate_barabasi_albert;

    fn small_cfg(load: f64, seed: u64) -> WorkloadConfig {
        WorkloadConfig {
            load_erlang: load,
            n_requests: 600,
            warmup: 200,
            seed,
            ..Default::default()
        }
    }

    fn net20() -> PhysicalNetwork {
        generate_barabasi_albert(20, 2, 3, (10.0, 100.0)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(small_cfg(10.0, 0).validate().is_ok());
        assert!(small_cfg(0.0, 0).validate().is_err());
        let mut c = small_cfg(10.0, 0);
        c.warmup = c.n_requests;
        assert!(c.validate().is_err());
    }

    #[test]
    fn light_load_blocks_nothing() {
        let net = net20();
        let m = run_simulation(
            &net,
            &small_cfg(0.5, 1),
            Solver::Pess,
            &CostParams::default(),
            &PessOptions::default(),
        )
        .unwrap();
        assert_eq!(m.offered, 400);
        assert_eq!(m.blocking_probability, 0.0);
        assert_eq!(m.offered, m.accepted + m.rejected);
        assert!(m.consumed_cpu_fraction > 0.0 && m.consumed_cpu_fraction < 0.05);
    }

    #[test]
    fn identical_seeds_give_identical_metrics() {
        let net = net20();
        let p = CostParams::default();
        let o = PessOptions::default();
        let mut a = run_simulation(&net, &small_cfg(50.0, 9), Solver::Pess, &p, &o).unwrap();
        let mut b = run_simulation(&net, &small_cfg(50.0, 9), Solver::Pess, &p, &o).unwrap();
        a.embed_time = TimeStats::default();
        b.embed_time = TimeStats::default();
        assert_eq!(a, b);
    }

    #[test]
    fn twin_runs_share_the_stream_and_stay_consistent() {
        let net = net20();
        let mut cfg = small_cfg(200.0, 4);
        cfg.verify_every = Some(37);
        let r = run_twin_comparison(&net, &cfg, &CostParams::default(), &PessOptions::default())
            .unwrap();
        assert_eq!(r.pess.stream_checksum, r.baseline.stream_checksum);
        assert!(r.pess.bookkeeping_checks > 0);
        assert_eq!(r.pess.bookkeeping_mismatches, 0);
        assert_eq!(r.baseline.bookkeeping_mismatches, 0);
    }

    #[test]
    fn zero_vsnf_stream_gives_unit_delay_ratio() {
        let net = net20();
        let mut cfg = small_cfg(20.0, 5);
        cfg.request_gen.vsnfs_per_chain = (0, 0);
        cfg.request_gen.chains = (1, 1);
        let r = run_twin_comparison(&net, &cfg, &CostParams::default(), &PessOptions::default())
            .unwrap();
        assert_eq!(r.delay_ratio, 1.0);
        assert_eq!(r.pess.accepted, r.baseline.accepted);
    }

    #[test]
    fn oracle_gap_on_micro_graph() {
        let net = generate_barabasi_albert(6, 2, 11, (10.0, 100.0)).unwrap();
        let mut cfg = small_cfg(3.0, 2);
        cfg.n_requests = 30;
        cfg.warmup = 10;
        cfg.request_gen.chains = (1, 2);
        cfg.request_gen.vsnfs_per_chain = (0, 2);
        let r = run_heuristic_vs_oracle(
            &net,
            &cfg,
            &OracleConfig::default(),
            &CostParams::default(),
            &PessOptions::default(),
        )
        .unwrap();
        assert_eq!(r.pairs, 20);
        assert_eq!(r.dominance_violations, 0);
        assert_eq!(r.heuristic_only, 0);
        assert!(r.overheads.iter().all(|&o| o >= -1e-9));
    }

    #[test]
    fn scalability_rows() {
        let cases = [
            ScaleCase {
                nodes: 30,
                attachment: 2,
                ep2_size: 1,
            },
            ScaleCase {
                nodes: 30,
                attachment: 2,
                ep2_size: 5,
            },
        ];
        let rows = run_scalability(
            &cases,
            20,
            1,
            &RequestGenConfig::default(),
            &CostParams::default(),
            &PessOptions::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].links, 56);
        assert!(rows.iter().all(|r| r.accepted > 0));
    }
}
