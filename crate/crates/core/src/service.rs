//! Security service requests, the VSNF catalog and the random request
//! generator used by the simulator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::{index, IndexedRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{NodeId, PhysicalNetwork, BORDER_REGION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub u64);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Index of a chain within its request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChainId(pub u32);

/// Where a region-bound VSNF must be placed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionBinding {
    /// The user's attachment node.
    Ep1,
    /// The remote endpoint set of the request.
    Ep2,
    /// A named region of the physical network.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VsnfSpec {
    pub name: String,
    /// CPU cycles needed to process one bit.
    pub gamma_u: f64,
    pub stateful: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionBinding>,
}

impl VsnfSpec {
    pub fn new(name: impl Into<String>, gamma_u: f64, stateful: bool) -> Self {
        VsnfSpec {
            name: name.into(),
            gamma_u,
            stateful,
            region: None,
        }
    }

    pub fn bound_to(mut self, region: RegionBinding) -> Self {
        self.region = Some(region);
        self
    }

    /// CPU cycles/s this function needs to process `beta` bits/s, rounded to
    /// whole cycles so resource accounting stays exact.
    pub fn cpu_demand(&self, beta: u64) -> u64 {
        (self.gamma_u * beta as f64).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// From the user (ep1) towards the remote endpoint.
    Upstream,
    /// From the remote endpoint towards the user.
    Downstream,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub id: ChainId,
    /// VSNFs in traversal order.
    pub vsnfs: Vec<VsnfSpec>,
    /// Minimum bandwidth, bits/s.
    pub beta_req: u64,
    /// Maximum end-to-end latency, seconds.
    pub lambda_max: f64,
    /// Average packet size, bits.
    pub sigma: f64,
    /// Latency between the network edge and the remote endpoint, seconds.
    pub pi_external: f64,
    pub direction: Direction,
}

impl Chain {
    pub fn cpu_demand(&self, position: usize) -> u64 {
        self.vsnfs[position].cpu_demand(self.beta_req)
    }

    pub fn total_cpu_demand(&self) -> u64 {
        (0..self.vsnfs.len()).map(|p| self.cpu_demand(p)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VsnfRef {
    pub chain: ChainId,
    pub position: usize,
}

/// VSNF occurrences in different chains that must share one stateful instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatefulGroup {
    pub name: String,
    pub members: Vec<VsnfRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceRequest {
    pub id: RequestId,
    pub ep1: NodeId,
    pub ep2: BTreeSet<NodeId>,
    pub chains: Vec<Chain>,
    #[serde(default)]
    pub stateful_groups: Vec<StatefulGroup>,
    #[serde(default)]
    pub veto: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RequestError {
    #[error("request {0}: remote endpoint set is empty")]
    EmptyEp2(RequestId),
    #[error("request {request}: unknown node {node}")]
    UnknownNode { request: RequestId, node: NodeId },
    #[error("request {request}: chain at index {index} has id {found}")]
    ChainIndex {
        request: RequestId,
        index: usize,
        found: u32,
    },
    #[error("request {request}, chain {chain}: {message}")]
    Chain {
        request: RequestId,
        chain: u32,
        message: String,
    },
    #[error("request {request}, stateful group {group:?}: {message}")]
    Group {
        request: RequestId,
        group: String,
        message: String,
    },
}

impl ServiceRequest {
    pub fn vsnf(&self, r: VsnfRef) -> Option<&VsnfSpec> {
        self.chains.get(r.chain.0 as usize)?.vsnfs.get(r.position)
    }

    pub fn vsnf_count(&self) -> usize {
        self.chains.iter().map(|c| c.vsnfs.len()).sum()
    }

    pub fn total_bandwidth(&self) -> u64 {
        self.chains.iter().map(|c| c.beta_req).sum()
    }

    pub fn total_cpu_demand(&self) -> u64 {
        self.chains.iter().map(Chain::total_cpu_demand).sum()
    }

    pub fn validate(&self, net: &PhysicalNetwork) -> Result<(), RequestError> {
        let id = self.id;
        let n = net.node_count();
        if self.ep2.is_empty() {
            return Err(RequestError::EmptyEp2(id));
        }
        for &node in std::iter::once(&self.ep1)
            .chain(&self.ep2)
            .chain(&self.veto)
        {
            if node.index() >= n {
                return Err(RequestError::UnknownNode { request: id, node });
            }
        }
        for (index, chain) in self.chains.iter().enumerate() {
            if chain.id.0 as usize != index {
                return Err(RequestError::ChainIndex {
                    request: id,
                    index,
                    found: chain.id.0,
                });
            }
            let bad = |message: &str| RequestError::Chain {
                request: id,
                chain: chain.id.0,
                message: message.to_string(),
            };
            if chain.beta_req == 0 {
                return Err(bad("bandwidth must be positive"));
            }
            if !(chain.lambda_max > 0.0) {
                return Err(bad("latency bound must be positive"));
            }
            if !(chain.sigma > 0.0) {
                return Err(bad("packet size must be positive"));
            }
            if !(chain.pi_external >= 0.0) {
                return Err(bad("external latency must be non-negative"));
            }
            for v in &chain.vsnfs {
                if !(v.gamma_u > 0.0) || !v.gamma_u.is_finite() {
                    return Err(bad(&format!("VSNF {} needs positive cycles/bit", v.name)));
                }
                if let Some(RegionBinding::Named(r)) = &v.region {
                    if net.region(r).is_none() {
                        return Err(bad(&format!("unknown region {r:?}")));
                    }
                }
            }
        }
        let mut grouped = BTreeSet::new();
        for group in &self.stateful_groups {
            let bad = |message: String| RequestError::Group {
                request: id,
                group: group.name.clone(),
                message,
            };
            if group.members.is_empty() {
                return Err(bad("group has no members".into()));
            }
            for m in &group.members {
                let Some(v) = self.vsnf(*m) else {
                    return Err(bad(format!(
                        "member chain {} position {} does not exist",
                        m.chain.0, m.position
                    )));
                };
                if v.name != group.name {
                    return Err(bad(format!("member names VSNF {}", v.name)));
                }
                if !grouped.insert(*m) {
                    return Err(bad("VSNF belongs to more than one group".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VsnfCatalog {
    entries: Vec<VsnfSpec>,
}

impl VsnfCatalog {
    pub fn new(entries: Vec<VsnfSpec>) -> Self {
        VsnfCatalog { entries }
    }

    pub fn entries(&self) -> &[VsnfSpec] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&VsnfSpec> {
        self.entries.iter().find(|v| v.name == name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Measured cycles/bit of common security function implementations.
/// IDS/IPS and firewall entries are stateful, VPN and monitoring stateless.
pub fn builtin_catalog() -> VsnfCatalog {
    VsnfCatalog::new(vec![
        VsnfSpec::new("snort", 9.5, true),
        VsnfSpec::new("suricata", 8.2, true),
        VsnfSpec::new("openvpn-aesni", 31.0, false),
        VsnfSpec::new("strongswan-aesni", 16.0, false),
        VsnfSpec::new("fortigate-ngfw", 9.0, true),
        VsnfSpec::new("fortigate-sslvpn", 13.6, false),
        VsnfSpec::new("fortigate-ipsecvpn", 14.5, false),
        VsnfSpec::new("fortigate-threat", 11.3, true),
        VsnfSpec::new("cisco-asav-ids", 4.2, true),
        VsnfSpec::new("cisco-asav-vpn", 6.9, false),
        VsnfSpec::new("juniper-vsrx-fw", 2.3, true),
        VsnfSpec::new("juniper-vsrx-ips", 2.4, true),
        VsnfSpec::new("juniper-vsrx-appmon", 1.5, false),
    ])
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("VSNF catalog is empty")]
    EmptyCatalog,
    #[error("latency menu is empty")]
    EmptyLatencyMenu,
    #[error("invalid request generator setting: {0}")]
    Invalid(String),
}

/// Knobs of the random request generator. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RequestGenConfig {
    pub chains: (u32, u32),
    pub vsnfs_per_chain: (u32, u32),
    /// Bandwidth range in bits/s, sampled log-uniformly.
    pub bandwidth_bps: (f64, f64),
    /// Latency bounds in seconds, picked uniformly.
    pub latency_menu: Vec<f64>,
    /// Probability that the remote endpoint is the border region, when the
    /// network has one.
    pub border_bias: f64,
    pub border_region: String,
    pub sigma_bits: f64,
    /// External latency of chains leaving through the border region, seconds.
    pub pi_border: f64,
    /// Probability that a VSNF is pinned to ep1 or EP2.
    pub region_bind_probability: f64,
    /// Draw EP2 as this many random nodes instead of border/single-node.
    pub ep2_size: Option<usize>,
    pub veto: Vec<NodeId>,
}

impl Default for RequestGenConfig {
    fn default() -> Self {
        RequestGenConfig {
            chains: (1, 5),
            vsnfs_per_chain: (0, 3),
            bandwidth_bps: (1e6, 1e8),
            latency_menu: vec![0.100, 0.150, 0.200, 0.400],
            border_bias: 0.8,
            border_region: BORDER_REGION.to_string(),
            sigma_bits: 8000.0,
            pi_border: 5e-3,
            region_bind_probability: 0.0,
            ep2_size: None,
            veto: Vec::new(),
        }
    }
}

impl RequestGenConfig {
    pub fn validate(&self, catalog: &VsnfCatalog) -> Result<(), ConfigError> {
        if catalog.is_empty() {
            return Err(ConfigError::EmptyCatalog);
        }
        if self.latency_menu.is_empty() {
            return Err(ConfigError::EmptyLatencyMenu);
        }
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.chains.0 < 1 || self.chains.0 > self.chains.1 {
            return invalid("chain count range must satisfy 1 <= min <= max");
        }
        if self.vsnfs_per_chain.0 > self.vsnfs_per_chain.1 {
            return invalid("VSNF count range must satisfy min <= max");
        }
        let (lo, hi) = self.bandwidth_bps;
        if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
            return invalid("bandwidth range must satisfy 1 <= min <= max");
        }
        if self.latency_menu.iter().any(|l| !(*l > 0.0)) {
            return invalid("latency bounds must be positive");
        }
        for p in [self.border_bias, self.region_bind_probability] {
            if !(0.0..=1.0).contains(&p) {
                return invalid("probabilities must lie in [0, 1]");
            }
        }
        if !(self.sigma_bits > 0.0) || !(self.pi_border >= 0.0) {
            return invalid("packet size must be positive and external latency non-negative");
        }
        if self.ep2_size == Some(0) {
            return invalid("EP2 size must be at least 1");
        }
        Ok(())
    }
}

/// Draws one random request with id `id`.
pub fn generate_request<R: Rng + ?Sized>(
    net: &PhysicalNetwork,
    catalog: &VsnfCatalog,
    cfg: &RequestGenConfig,
    rng: &mut R,
    id: RequestId,
) -> Result<ServiceRequest, ConfigError> {
    cfg.validate(catalog)?;
    let n = net.node_count();
    if n < 2 {
        return Err(ConfigError::Invalid(
            "network needs at least two nodes".into(),
        ));
    }
    let ep1 = NodeId(rng.random_range(0..n as u32));

    let border = net.region(&cfg.border_region);
    let (ep2, external) = if let Some(size) = cfg.ep2_size {
        let size = size.min(n - 1);
        let others: Vec<NodeId> = net.node_ids().filter(|&x| x != ep1).collect();
        let picked = index::sample(rng, others.len(), size);
        (picked.iter().map(|i| others[i]).collect(), false)
    } else if let Some(b) = border.filter(|_| rng.random_bool(cfg.border_bias)) {
        (b.clone(), true)
    } else {
        let mut other = NodeId(rng.random_range(0..n as u32 - 1));
        if other >= ep1 {
            other.0 += 1;
        }
        (BTreeSet::from([other]), false)
    };
    let pi_external = if external { cfg.pi_border } else { 0.0 };

    let max_vsnfs = (cfg.vsnfs_per_chain.1 as usize).min(catalog.len());
    let min_vsnfs = (cfg.vsnfs_per_chain.0 as usize).min(max_vsnfs);
    let n_chains = rng.random_range(cfg.chains.0..=cfg.chains.1);
    let (bw_lo, bw_hi) = (cfg.bandwidth_bps.0.ln(), cfg.bandwidth_bps.1.ln());

    let mut bindings: BTreeMap<String, Option<RegionBinding>> = BTreeMap::new();
    let mut chains = Vec::with_capacity(n_chains as usize);
    for c in 0..n_chains {
        let k = rng.random_range(min_vsnfs..=max_vsnfs);
        let mut vsnfs = Vec::with_capacity(k);
        for i in index::sample(rng, catalog.len(), k).iter() {
            let mut spec = catalog.entries()[i].clone();
            let binding = match bindings.get(&spec.name) {
                Some(b) => b.clone(),
                None => {
                    let b = if rng.random_bool(cfg.region_bind_probability) {
                        Some(if rng.random_bool(0.5) {
                            RegionBinding::Ep1
                        } else {
                            RegionBinding::Ep2
                        })
                    } else {
                        spec.region.clone()
                    };
                    bindings.insert(spec.name.clone(), b.clone());
                    b
                }
            };
            spec.region = binding;
            vsnfs.push(spec);
        }
        let beta = if bw_hi > bw_lo {
            rng.random_range(bw_lo..bw_hi).exp()
        } else {
            cfg.bandwidth_bps.0
        };
        chains.push(Chain {
            id: ChainId(c),
            vsnfs,
            beta_req: beta.round().max(1.0) as u64,
            lambda_max: *cfg.latency_menu.choose(rng).expect("menu is non-empty"),
            sigma: cfg.sigma_bits,
            pi_external,
            direction: if rng.random_bool(0.5) {
                Direction::Upstream
            } else {
                Direction::Downstream
            },
        });
    }

    let stateful_groups = stateful_groups_of(&chains);
    let veto = cfg.veto.iter().copied().filter(|v| v.index() < n).collect();
    Ok(ServiceRequest {
        id,
        ep1,
        ep2,
        chains,
        stateful_groups,
        veto,
    })
}

/// Stateful VSNFs named in two or more chains share one instance.
pub fn stateful_groups_of(chains: &[Chain]) -> Vec<StatefulGroup> {
    let mut by_name: BTreeMap<&str, Vec<VsnfRef>> = BTreeMap::new();
    for chain in chains {
        for (position, v) in chain.vsnfs.iter().enumerate() {
            if v.stateful {
                by_name.entry(&v.name).or_default().push(VsnfRef {
                    chain: chain.id,
                    position,
                });
            }
        }
    }
    by_name
        .into_iter()
        .filter(|(_, members)| {
            members
                .iter()
                .map(|m| m.chain)
                .collect::<BTreeSet<_>>()
                .len()
                >= 2
        })
        .map(|(name, members)| StatefulGroup {
            name: name.to_string(),
            members,
        })
        .collect()
}

/// Stateful random request source with its own id counter.
pub struct RequestGenerator<R> {
    pub catalog: VsnfCatalog,
    pub cfg: RequestGenConfig,
    rng: R,
    next_id: u64,
}

impl<R: Rng> RequestGenerator<R> {
    pub fn new(catalog: VsnfCatalog, cfg: RequestGenConfig, rng: R) -> Result<Self, ConfigError> {
        cfg.validate(&catalog)?;
        Ok(RequestGenerator {
            catalog,
            cfg,
            rng,
            next_id: 0,
        })
    }

    pub fn next_request(&mut self, net: &PhysicalNetwork) -> Result<ServiceRequest, ConfigError> {
        let id = RequestId(self.next_id);
        self.next_id += 1;
        generate_request(net, &self.catalog, &self.cfg, &mut self.rng, id)
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}

/// Application-agnostic transform: one chain per traffic direction carrying
/// the union of every VSNF requested in that direction.
pub fn baseline_request(req: &ServiceRequest) -> ServiceRequest {
    let mut chains = Vec::with_capacity(2);
    for direction in [Direction::Upstream, Direction::Downstream] {
        let members: Vec<&Chain> = req
            .chains
            .iter()
            .filter(|c| c.direction == direction)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut vsnfs: Vec<VsnfSpec> = Vec::new();
        for v in members.iter().flat_map(|c| &c.vsnfs) {
            if !vsnfs.iter().any(|x| x.name == v.name) {
                vsnfs.push(v.clone());
            }
        }
        let beta_req: u64 = members.iter().map(|c| c.beta_req).sum();
        let sigma = if let [only] = members.as_slice() {
            only.sigma
        } else {
            members
                .iter()
                .map(|c| c.beta_req as f64 * c.sigma)
                .sum::<f64>()
                / beta_req as f64
        };
        chains.push(Chain {
            id: ChainId(chains.len() as u32),
            vsnfs,
            beta_req,
            lambda_max: members
                .iter()
                .map(|c| c.lambda_max)
                .fold(f64::INFINITY, f64::min),
            sigma,
            pi_external: members.iter().map(|c| c.pi_external).fold(0.0, f64::max),
            direction,
        });
    }
    ServiceRequest {
        id: req.id,
        ep1: req.ep1,
        ep2: req.ep2.clone(),
        stateful_groups: stateful_groups_of(&chains),
        chains,
        veto: req.veto.clone(),
    }
}
