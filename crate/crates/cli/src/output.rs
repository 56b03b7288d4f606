//! CSV tables with frozen, versioned columns and atomic file writes.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use pess_core::simulator::{GapReport, Metrics, ScaleRow};

/// Bump whenever a column is added, removed or reordered.
pub const SCHEMA_VERSION: u32 = 1;

pub const METRICS_COLUMNS: &[&str] = &[
    "load_erlang",
    "seed",
    "solver",
    "offered",
    "accepted",
    "rejected",
    "blocking_probability",
    "consumed_cpu_fraction",
    "active_services",
    "mean_chain_latency_s",
    "region_cpu_fraction",
    "rejection_reasons",
    "bookkeeping_checks",
    "bookkeeping_mismatches",
    "stream_checksum",
];

pub const GAP_COLUMNS: &[&str] = &[
    "pairs",
    "compared",
    "both_rejected",
    "oracle_only",
    "heuristic_only",
    "budget_skipped",
    "dominance_violations",
    "infeasible_acceptances",
    "guard_divergence",
    "mean_overhead",
    "median_overhead",
    "max_overhead",
];

pub const SCALE_COLUMNS: &[&str] = &[
    "nodes",
    "attachment",
    "ep2_size",
    "links",
    "requests",
    "accepted",
    "mean_candidates",
    "embed_mean_s",
    "embed_p50_s",
    "embed_p95_s",
    "embed_max_s",
];

/// A CSV table preceded by a `# table vN` comment line.
pub struct Table {
    name: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> Result<Vec<u8>> {
        let mut buf = format!("# pess {} v{SCHEMA_VERSION}\n", self.name).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.columns)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

fn s(v: impl Display) -> String {
    v.to_string()
}

/// `key=value` pairs joined by `;`, in key order.
fn pairs<V: Display>(m: &BTreeMap<String, V>) -> String {
    m.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Wall times are left out so identical runs give identical rows.
pub fn metrics_row(load: f64, seed: u64, solver: &str, m: &Metrics) -> Vec<String> {
    vec![
        s(load),
        s(seed),
        solver.to_string(),
        s(m.offered),
        s(m.accepted),
        s(m.rejected),
        s(m.blocking_probability),
        s(m.consumed_cpu_fraction),
        s(m.active_services),
        s(m.mean_chain_latency),
        pairs(&m.region_cpu_fraction),
        pairs(&m.rejection_reasons),
        s(m.bookkeeping_checks),
        s(m.bookkeeping_mismatches),
        m.stream_checksum.clone(),
    ]
}

pub fn gap_row(g: &GapReport) -> Vec<String> {
    vec![
        s(g.pairs),
        s(g.compared),
        s(g.both_rejected),
        s(g.oracle_only),
        s(g.heuristic_only),
        s(g.budget_skipped),
        s(g.dominance_violations),
        s(g.infeasible_acceptances),
        s(g.guard_divergence),
        s(g.mean_overhead),
        s(g.median_overhead),
        s(g.max_overhead),
    ]
}

pub fn scale_row(r: &ScaleRow) -> Vec<String> {
    vec![
        s(r.nodes),
        s(r.attachment),
        s(r.ep2_size),
        s(r.links),
        s(r.requests),
        s(r.accepted),
        s(r.mean_candidates),
        s(r.embed_time.mean_s),
        s(r.embed_time.p50_s),
        s(r.embed_time.p95_s),
        s(r.embed_time.max_s),
    ]
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Writes `<out>/<stem>.csv` and `<out>/<stem>.json`, returning both paths.
pub fn write_artifacts(
    out: &Path,
    stem: &str,
    table: &Table,
    summary: &impl Serialize,
) -> Result<[PathBuf; 2]> {
    let csv = out.join(format!("{stem}.csv"));
    let json = out.join(format!("{stem}.json"));
    write_atomic(&csv, &table.render()?)?;
    write_json(&json, summary)?;
    Ok([csv, json])
}
