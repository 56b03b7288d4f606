//! Turns flags and an optional config file into one fully resolved
//! configuration, validated before anything runs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use pess_core::oracle::OracleConfig;
use pess_core::simulator::WorkloadConfig;
use pess_core::{
    builtin_catalog, generate_barabasi_albert, load_topology, topology::fixtures, CostParams,
    PessOptions, PhysicalNetwork, ServiceRequest,
};

use crate::args::{Cli, OracleLimits, TopologyArgs, TopologyKind, WorkloadArgs};

/// Contents of a --config file. Every table is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub workload: Option<WorkloadConfig>,
    pub cost: Option<CostParams>,
    pub pess: PessOptions,
    pub oracle: OracleConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = read(path)?;
        toml::from_str(&text).with_context(|| format!("{}", path.display()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attachment: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub node_count: usize,
    pub link_count: usize,
}

/// Everything a run used, defaults included, as recorded in its summary.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: &'static str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySpec>,
    pub cost: CostParams,
    pub pess: PessOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workload: Option<WorkloadConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub loads: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub out: PathBuf,
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn cost_params(cli: &Cli, file: &FileConfig) -> Result<CostParams> {
    let mut p = file.cost.unwrap_or_default();
    if let Some(a) = cli.alpha {
        p.alpha = a;
    }
    if let Some(d) = cli.delta {
        p.delta = d;
    }
    p.validate().map_err(anyhow::Error::msg)?;
    Ok(p)
}

pub fn topology(args: &TopologyArgs, seed: u64) -> Result<(PhysicalNetwork, TopologySpec)> {
    let kind = args.topology.unwrap_or(if args.topology_file.is_some() {
        TopologyKind::File
    } else {
        TopologyKind::Ba
    });
    let (net, nodes, attachment, file) = match kind {
        TopologyKind::Ba => {
            let net = generate_barabasi_albert(args.nodes, args.attachment, seed, (10.0, 100.0))?;
            (net, Some(args.nodes), Some(args.attachment), None)
        }
        TopologyKind::File => {
            let Some(path) = &args.topology_file else {
                bail!("--topology file needs --topology-file PATH");
            };
            let net = load_topology(&read(path)?).with_context(|| format!("{}", path.display()))?;
            (net, None, None, Some(path.clone()))
        }
        TopologyKind::Garr => (fixtures::garr(), None, None, None),
        TopologyKind::Stanford => (fixtures::stanford(), None, None, None),
    };
    let spec = TopologySpec {
        kind,
        nodes,
        attachment,
        file,
        node_count: net.node_count(),
        link_count: net.link_count(),
    };
    Ok((net, spec))
}

pub fn request(path: &Path) -> Result<ServiceRequest> {
    let text = read(path)?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(anyhow::Error::from)
    } else {
        toml::from_str(&text).map_err(anyhow::Error::from)
    };
    parsed.with_context(|| format!("{}", path.display()))
}

/// Workload from the config file (or `fallback`), then flag overrides.
pub fn workload(
    args: &WorkloadArgs,
    file: &FileConfig,
    seed: u64,
    fallback: WorkloadConfig,
) -> Result<WorkloadConfig> {
    let mut w = file.workload.clone().unwrap_or(fallback);
    w.seed = seed;
    if let Some(n) = args.requests {
        w.n_requests = n;
    }
    if let Some(n) = args.warmup {
        w.warmup = n;
    }
    if let Some(h) = args.mean_holding {
        w.mean_holding = h;
    }
    if args.verify_every.is_some() {
        w.verify_every = args.verify_every;
    }
    let g = &mut w.request_gen;
    if args.ep2_size.is_some() {
        g.ep2_size = args.ep2_size;
    }
    if let Some(p) = args.region_bind_probability {
        g.region_bind_probability = p;
    }
    if let Some(b) = args.border_bias {
        g.border_bias = b;
    }
    w.validate()?;
    w.request_gen.validate(&builtin_catalog())?;
    Ok(w)
}

pub fn loads(loads: &[f64]) -> Result<Vec<f64>> {
    if loads.is_empty() || loads.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        bail!("loads must be positive numbers, got {loads:?}");
    }
    Ok(loads.to_vec())
}

pub fn oracle(base: OracleConfig, limits: &OracleLimits) -> Result<OracleConfig> {
    let mut cfg = base;
    if limits.max_path_len.is_some() {
        cfg.max_path_len = limits.max_path_len;
    }
    if let Some(m) = limits.max_enumeration {
        cfg.max_enumeration = m;
    }
    cfg.validate().map_err(anyhow::Error::msg)?;
    Ok(cfg)
}
