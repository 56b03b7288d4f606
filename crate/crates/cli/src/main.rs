mod args;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use pess_core::oracle::{exact_embed, Objective, OracleConfig};
use pess_core::simulator::{
    run_heuristic_vs_oracle, run_load_sweep, run_scalability, run_simulation, ScaleCase, Solver,
    WorkloadConfig,
};
use pess_core::{
    chain_latency, pess_plan, CostParams, Embedding, NetworkState, NodeId, PessOptions,
    PhysicalNetwork, RequestGenConfig, ServiceRequest,
};

use args::{Cli, Command, SolverArg};
use config::{ExperimentConfig, FileConfig};
use output::{Table, GAP_COLUMNS, METRICS_COLUMNS, SCALE_COLUMNS, SCHEMA_VERSION};

const DEFAULT_SEED: u64 = 1;

/// Exit status of a command that ran to completion.
enum Status {
    Done,
    /// The request could not be embedded.
    Rejected,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Rejected) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Status> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match &cli.command {
        Command::Embed(a) => cmd_embed(cli, a),
        Command::Oracle(a) => cmd_oracle(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Compare(a) => cmd_compare(cli, a),
        Command::OracleGap(a) => cmd_oracle_gap(cli, a),
        Command::Scalability(a) => cmd_scalability(cli, a),
    }
}

fn seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(DEFAULT_SEED)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

fn label(net: &PhysicalNetwork, id: NodeId) -> String {
    net.node(id).name.clone().unwrap_or_else(|| id.to_string())
}

#[derive(Serialize)]
struct ChainReport {
    chain: u32,
    latency_s: f64,
    hosts: Vec<String>,
    routes: Vec<Vec<String>>,
}

fn chain_reports(
    net: &PhysicalNetwork,
    state: &NetworkState,
    req: &ServiceRequest,
    emb: &Embedding,
    params: &CostParams,
) -> Vec<ChainReport> {
    let load = emb.cpu_demands(req);
    req.chains
        .iter()
        .zip(&emb.chains)
        .map(|(c, ce)| ChainReport {
            chain: c.id.0,
            latency_s: chain_latency(net, c, ce, state.residual_gamma_all(), &load, params.delta),
            hosts: ce.hosts.iter().map(|&n| label(net, n)).collect(),
            routes: ce
                .routes
                .iter()
                .map(|r| r.iter().map(|&n| label(net, n)).collect())
                .collect(),
        })
        .collect()
}

fn print_chains(chains: &[ChainReport]) {
    for c in chains {
        println!(
            "chain {} latency {:.5e} hosts {}",
            c.chain,
            c.latency_s,
            c.hosts.join(" ")
        );
        for r in &c.routes {
            println!("  route {}", r.join(" "));
        }
    }
}

#[derive(Serialize)]
struct Rejected<'a> {
    status: &'static str,
    request: u64,
    reason: &'a str,
    detail: String,
}

fn reject(
    cli: &Cli,
    json: bool,
    name: &str,
    req: &ServiceRequest,
    reason: &str,
    detail: String,
) -> Result<Status> {
    let doc = Rejected {
        status: "rejected",
        request: req.id.0,
        reason,
        detail,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("rejected {reason}");
        eprintln!("{}", doc.detail);
    }
    if let Some(out) = &cli.out {
        output::write_json(&out.join(name), &doc)?;
    }
    Ok(Status::Rejected)
}

#[derive(Serialize)]
struct EmbedDoc<'a> {
    status: &'static str,
    request: u64,
    cost: f64,
    chosen_ep2: String,
    path: Vec<String>,
    chains: Vec<ChainReport>,
    stats: &'a pess_core::PlanStats,
    embedding: &'a Embedding,
}

fn cmd_embed(cli: &Cli, a: &args::EmbedArgs) -> Result<Status> {
    let params = config::cost_params(cli, &FileConfig::default())?;
    let (net, _) = config::topology(&a.solve.topology, seed(cli))?;
    let req = config::request(&a.solve.request)?;
    let opts = PessOptions {
        scan: a.scan.into(),
        expand_all_ep2: a.expand_all_ep2,
        ..Default::default()
    };
    let state = NetworkState::new(&net);
    let plan = match pess_plan(&state, &net, &req, &params, &opts) {
        Ok(plan) => plan,
        Err(r) => {
            return reject(
                cli,
                a.solve.json,
                "embedding.json",
                &req,
                r.code(),
                r.to_string(),
            )
        }
    };
    let c = &plan.candidate;
    let doc = EmbedDoc {
        status: "accepted",
        request: req.id.0,
        cost: c.cost,
        chosen_ep2: label(&net, c.chosen_ep2),
        path: c.path.iter().map(|&n| label(&net, n)).collect(),
        chains: chain_reports(&net, &state, &req, &c.embedding, &params),
        stats: &plan.stats,
        embedding: &c.embedding,
    };
    if a.solve.json {
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("accepted {}", req.id);
        println!("cost {:.5e}", doc.cost);
        println!("ep2 {} path {}", doc.chosen_ep2, doc.path.join(" "));
        print_chains(&doc.chains);
    }
    if let Some(out) = &cli.out {
        output::write_json(&out.join("embedding.json"), &doc)?;
    }
    Ok(Status::Done)
}

#[derive(Serialize)]
struct OracleDoc<'a> {
    status: &'static str,
    request: u64,
    objective: Objective,
    score: f64,
    cost: f64,
    evaluated: u64,
    chains: Vec<ChainReport>,
    embedding: &'a Embedding,
}

fn score_text(objective: Objective, score: f64) -> String {
    match objective {
        Objective::ActiveNodes => format!("{score}"),
        _ => format!("{score:.5e}"),
    }
}

fn cmd_oracle(cli: &Cli, a: &args::OracleArgs) -> Result<Status> {
    let params = config::cost_params(cli, &FileConfig::default())?;
    let (net, _) = config::topology(&a.solve.topology, seed(cli))?;
    let req = config::request(&a.solve.request)?;
    let cfg = OracleConfig {
        objective: a.objective.into(),
        ..config::oracle(OracleConfig::default(), &a.limits)?
    };
    let state = NetworkState::new(&net);
    let sol = match exact_embed(&state, &net, &req, &cfg, &params) {
        Ok(sol) => sol,
        Err(e) => {
            return reject(
                cli,
                a.solve.json,
                "oracle.json",
                &req,
                e.code(),
                e.to_string(),
            )
        }
    };
    let doc = OracleDoc {
        status: "optimal",
        request: req.id.0,
        objective: cfg.objective,
        score: sol.score,
        cost: sol.cost,
        evaluated: sol.evaluated,
        chains: chain_reports(&net, &state, &req, &sol.embedding, &params),
        embedding: &sol.embedding,
    };
    if a.solve.json {
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("optimal {}", req.id);
        println!("{} {}", cfg.objective, score_text(cfg.objective, doc.score));
        println!("cost {:.5e}", doc.cost);
        println!("evaluated {}", doc.evaluated);
        print_chains(&doc.chains);
    }
    if let Some(out) = &cli.out {
        output::write_json(&out.join("oracle.json"), &doc)?;
    }
    Ok(Status::Done)
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    schema_version: u32,
    config: &'a ExperimentConfig,
    results: T,
}

fn finish(
    cfg: &ExperimentConfig,
    stem: &str,
    table: &Table,
    results: impl Serialize,
) -> Result<Status> {
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        results,
    };
    for p in output::write_artifacts(&cfg.out, stem, table, &summary)? {
        println!("wrote {}", p.display());
    }
    Ok(Status::Done)
}

fn base_config(cli: &Cli, command: &'static str, file: &FileConfig) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        command,
        seed: seed(cli),
        topology: None,
        cost: config::cost_params(cli, file)?,
        pess: file.pess,
        workload: None,
        loads: Vec::new(),
        seeds: Vec::new(),
        oracle: None,
        threads: cli.threads,
        out: out_dir(cli),
    })
}

#[derive(Serialize)]
struct RunResult {
    load_erlang: f64,
    solver: Solver,
    metrics: pess_core::simulator::Metrics,
}

fn cmd_simulate(cli: &Cli, a: &args::SimulateArgs) -> Result<Status> {
    let file = FileConfig::load(a.workload.config.as_deref())?;
    let mut cfg = base_config(cli, "simulate", &file)?;
    let workload = config::workload(&a.workload, &file, cfg.seed, WorkloadConfig::default())?;
    let (net, spec) = config::topology(&a.topology, cfg.seed)?;
    cfg.loads = config::loads(&a.loads)?;
    cfg.topology = Some(spec);
    cfg.workload = Some(workload.clone());
    let solvers = match a.solver {
        SolverArg::Pess => vec![Solver::Pess],
        SolverArg::Baseline => vec![Solver::Baseline],
        SolverArg::Both => vec![Solver::Pess, Solver::Baseline],
    };
    let jobs: Vec<(f64, Solver)> = cfg
        .loads
        .iter()
        .flat_map(|&l| solvers.iter().map(move |&s| (l, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(load_erlang, solver)| {
            let w = WorkloadConfig {
                load_erlang,
                ..workload.clone()
            };
            let metrics = run_simulation(&net, &w, solver, &cfg.cost, &cfg.pess)?;
            Ok(RunResult {
                load_erlang,
                solver,
                metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("simulate", METRICS_COLUMNS);
    for r in &runs {
        table.push(output::metrics_row(
            r.load_erlang,
            cfg.seed,
            &r.solver.to_string(),
            &r.metrics,
        ));
        println!(
            "load {} {}: blocking {:.4} cpu {:.4} latency {:.5e}",
            r.load_erlang,
            r.solver,
            r.metrics.blocking_probability,
            r.metrics.consumed_cpu_fraction,
            r.metrics.mean_chain_latency
        );
    }
    finish(&cfg, "simulate", &table, runs)
}

fn cmd_compare(cli: &Cli, a: &args::CompareArgs) -> Result<Status> {
    let file = FileConfig::load(a.workload.config.as_deref())?;
    let mut cfg = base_config(cli, "compare", &file)?;
    let workload = config::workload(&a.workload, &file, cfg.seed, WorkloadConfig::default())?;
    let (net, spec) = config::topology(&a.topology, cfg.seed)?;
    cfg.loads = config::loads(&a.loads)?;
    cfg.seeds = if a.seeds.is_empty() {
        vec![cfg.seed]
    } else {
        a.seeds.clone()
    };
    cfg.topology = Some(spec);
    cfg.workload = Some(workload.clone());
    let points = run_load_sweep(
        &net, &workload, &cfg.loads, &cfg.seeds, &cfg.cost, &cfg.pess,
    )?;
    let mut columns = METRICS_COLUMNS.to_vec();
    columns.push("delay_ratio");
    let mut table = Table::new("compare", &columns);
    for p in &points {
        for (solver, m) in [
            (Solver::Pess, &p.report.pess),
            (Solver::Baseline, &p.report.baseline),
        ] {
            let mut row = output::metrics_row(p.load_erlang, p.seed, &solver.to_string(), m);
            row.push(p.report.delay_ratio.to_string());
            table.push(row);
        }
        let (ps, b) = (&p.report.pess, &p.report.baseline);
        println!(
            "load {} seed {}: blocking {:.4}/{:.4} cpu {:.4}/{:.4} delay ratio {:.3}",
            p.load_erlang,
            p.seed,
            ps.blocking_probability,
            b.blocking_probability,
            ps.consumed_cpu_fraction,
            b.consumed_cpu_fraction,
            p.report.delay_ratio
        );
    }
    finish(&cfg, "compare", &table, points)
}

fn cmd_oracle_gap(cli: &Cli, a: &args::OracleGapArgs) -> Result<Status> {
    let file = FileConfig::load(a.workload.config.as_deref())?;
    let mut cfg = base_config(cli, "oracle-gap", &file)?;
    let fallback = WorkloadConfig {
        load_erlang: 50.0,
        n_requests: 200,
        warmup: 100,
        request_gen: RequestGenConfig {
            chains: (1, 2),
            vsnfs_per_chain: (0, 2),
            ..Default::default()
        },
        ..Default::default()
    };
    let mut workload = config::workload(&a.workload, &file, cfg.seed, fallback)?;
    if let Some(l) = a.load {
        workload.load_erlang = config::loads(&[l])?[0];
    }
    let oracle = OracleConfig {
        objective: Objective::ResourceCost,
        ..config::oracle(file.oracle, &a.limits)?
    };
    let (net, spec) = config::topology(&a.topology, cfg.seed)?;
    cfg.topology = Some(spec);
    cfg.workload = Some(workload.clone());
    cfg.oracle = Some(oracle);
    let gap = run_heuristic_vs_oracle(&net, &workload, &oracle, &cfg.cost, &cfg.pess)?;
    let mut table = Table::new("oracle-gap", GAP_COLUMNS);
    table.push(output::gap_row(&gap));
    println!(
        "{} compared, overhead mean {:.3e} median {:.3e} max {:.3e}, {} dominance violations, {} over budget",
        gap.compared,
        gap.mean_overhead,
        gap.median_overhead,
        gap.max_overhead,
        gap.dominance_violations,
        gap.budget_skipped
    );
    finish(&cfg, "oracle_gap", &table, gap)
}

fn cmd_scalability(cli: &Cli, a: &args::ScalabilityArgs) -> Result<Status> {
    let cfg = base_config(cli, "scalability", &FileConfig::default())?;
    let cases: Vec<ScaleCase> = a
        .nodes
        .iter()
        .flat_map(|&nodes| {
            a.ep2_sizes.iter().map(move |&ep2_size| ScaleCase {
                nodes,
                attachment: a.attachment,
                ep2_size,
            })
        })
        .collect();
    if a.requests == 0 {
        anyhow::bail!("--requests must be positive");
    }
    let rows = run_scalability(
        &cases,
        a.requests,
        cfg.seed,
        &RequestGenConfig::default(),
        &cfg.cost,
        &cfg.pess,
    )?;
    let mut table = Table::new("scalability", SCALE_COLUMNS);
    for r in &rows {
        table.push(output::scale_row(r));
        println!(
            "{} nodes |EP2| {}: mean {:.3} ms, max {:.3} ms, {}/{} accepted",
            r.nodes,
            r.ep2_size,
            r.embed_time.mean_s * 1e3,
            r.embed_time.max_s * 1e3,
            r.accepted,
            r.requests
        );
    }
    #[derive(Serialize)]
    struct Scale<'a> {
        cases: &'a [ScaleCase],
        requests: usize,
        rows: Vec<pess_core::simulator::ScaleRow>,
    }
    finish(
        &cfg,
        "scalability",
        &table,
        Scale {
            cases: &cases,
            requests: a.requests,
            rows,
        },
    )
}
