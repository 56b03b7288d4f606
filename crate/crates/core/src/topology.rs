//! Physical network model: NFVI-POP nodes, capacitated links, named regions.
//!
//! Links are stored undirected but every link exposes two directed arcs.
//! Arc `2 * link` runs from the first endpoint to the second, arc
//! `2 * link + 1` runs the other way, so `arc ^ 1` is always the reverse arc.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Refractive index of optical fibre used for propagation delays.
pub const REFRACTIVE_INDEX: f64 = 1.5;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 3e8;
/// Queuing delay of one 10 Gbps switch port with a 100 KB buffer, seconds.
pub const PORT_QUEUING_DELAY: f64 = 80e-6;
/// Default link capacity for generated topologies, bits/s.
pub const DEFAULT_LINK_BANDWIDTH: u64 = 10_000_000_000;
/// Name of the region holding the egress nodes of a network.
pub const BORDER_REGION: &str = "border";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One direction of a physical link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcId(pub u32);

impl ArcId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn link(self) -> LinkId {
        LinkId(self.0 / 2)
    }

    pub fn reverse(self) -> ArcId {
        ArcId(self.0 ^ 1)
    }
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("distance must be a non-negative number of kilometres, got {0}")]
    NegativeDistance(f64),
    #[error(transparent)]
    Parse(#[from] toml::de::Error),
    #[error("{location}: {message}")]
    Validation { location: String, message: String },
    #[error("network is disconnected: node {0} is unreachable from node 0")]
    Disconnected(NodeId),
}

impl TopologyError {
    fn at(location: impl Into<String>, message: impl Into<String>) -> Self {
        TopologyError::Validation {
            location: location.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalNode {
    pub id: NodeId,
    pub name: Option<String>,
    /// Nominal compute capacity, CPU cycles/s.
    pub gamma_nominal: u64,
    /// Total local-network queuing delay charged to traffic visiting a VSNF here, seconds.
    pub queuing_budget: f64,
}

impl PhysicalNode {
    /// Queuing delay on the way in to the servers of this node.
    pub fn arrival_queuing(&self) -> f64 {
        self.queuing_budget / 2.0
    }

    /// Queuing delay on the way out of this node.
    pub fn departure_queuing(&self) -> f64 {
        self.queuing_budget / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalLink {
    pub id: LinkId,
    pub endpoints: (NodeId, NodeId),
    /// Nominal bandwidth per direction, bits/s.
    pub beta_nominal: u64,
    /// Propagation delay, seconds.
    pub lambda_prop: f64,
}

/// Compute capacity and queuing budget shared by every node of a topology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeProfile {
    pub gamma: u64,
    pub queuing_budget: f64,
}

impl NodeProfile {
    /// One 32-core 2.1 GHz server behind a three-tier local network
    /// (six ports in, six ports out).
    pub fn three_tier() -> Self {
        NodeProfile {
            gamma: 32 * 2_100_000_000,
            queuing_budget: 12.0 * PORT_QUEUING_DELAY,
        }
    }

    /// Same server behind a single campus switch (two ports in, two out).
    pub fn campus() -> Self {
        NodeProfile {
            queuing_budget: 4.0 * PORT_QUEUING_DELAY,
            ..Self::three_tier()
        }
    }
}

impl Default for NodeProfile {
    fn default() -> Self {
        Self::three_tier()
    }
}

pub fn default_node_profile() -> NodeProfile {
    NodeProfile::three_tier()
}

/// Propagation delay in seconds over `distance_km` of optical fibre.
pub fn propagation_delay(distance_km: f64) -> Result<f64, TopologyError> {
    if !(distance_km >= 0.0) || !distance_km.is_finite() {
        return Err(TopologyError::NegativeDistance(distance_km));
    }
    Ok(distance_km * 1000.0 * REFRACTIVE_INDEX / SPEED_OF_LIGHT)
}

#[derive(Debug, Clone)]
pub struct PhysicalNetwork {
    nodes: Vec<PhysicalNode>,
    links: Vec<PhysicalLink>,
    regions: BTreeMap<String, BTreeSet<NodeId>>,
    adjacency: Vec<Vec<(NodeId, ArcId)>>,
    arc_index: HashMap<(NodeId, NodeId), ArcId>,
}

impl PartialEq for PhysicalNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.links == other.links && self.regions == other.regions
    }
}

impl PhysicalNetwork {
    /// Validates and indexes a network. Node ids must be dense and match
    /// their position, link ids likewise.
    pub fn new(
        nodes: Vec<PhysicalNode>,
        links: Vec<PhysicalLink>,
        regions: BTreeMap<String, BTreeSet<NodeId>>,
    ) -> Result<Self, TopologyError> {
        if nodes.is_empty() {
            return Err(TopologyError::at("nodes", "network has no nodes"));
        }
        for (pos, node) in nodes.iter().enumerate() {
            let loc = format!("nodes[{pos}]");
            if node.id.index() != pos {
                return Err(TopologyError::at(
                    loc,
                    format!("id {} out of order", node.id.0),
                ));
            }
            if node.gamma_nominal == 0 {
                return Err(TopologyError::at(loc, "compute capacity must be positive"));
            }
            if !(node.queuing_budget >= 0.0) || !node.queuing_budget.is_finite() {
                return Err(TopologyError::at(
                    loc,
                    "queuing budget must be non-negative",
                ));
            }
        }

        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut arc_index = HashMap::with_capacity(links.len() * 2);
        for (pos, link) in links.iter().enumerate() {
            let loc = format!("links[{pos}]");
            if link.id.index() != pos {
                return Err(TopologyError::at(
                    loc,
                    format!("id {} out of order", link.id.0),
                ));
            }
            let (a, b) = link.endpoints;
            for end in [a, b] {
                if end.index() >= n {
                    return Err(TopologyError::at(loc, format!("unknown node {}", end.0)));
                }
            }
            if a == b {
                return Err(TopologyError::at(loc, "self-loop"));
            }
            if link.beta_nominal == 0 {
                return Err(TopologyError::at(loc, "bandwidth must be positive"));
            }
            if !(link.lambda_prop >= 0.0) || !link.lambda_prop.is_finite() {
                return Err(TopologyError::at(
                    loc,
                    "propagation delay must be non-negative",
                ));
            }
            let forward = ArcId(2 * link.id.0);
            let backward = forward.reverse();
            if arc_index.insert((a, b), forward).is_some() {
                return Err(TopologyError::at(
                    loc,
                    format!("duplicate link {}-{}", a.0, b.0),
                ));
            }
            arc_index.insert((b, a), backward);
            adjacency[a.index()].push((b, forward));
            adjacency[b.index()].push((a, backward));
        }
        for arcs in &mut adjacency {
            arcs.sort();
        }

        for (name, members) in &regions {
            let loc = format!("regions.{name}");
            if members.is_empty() {
                return Err(TopologyError::at(loc, "region is empty"));
            }
            if let Some(bad) = members.iter().find(|m| m.index() >= n) {
                return Err(TopologyError::at(loc, format!("unknown node {}", bad.0)));
            }
        }

        let net = PhysicalNetwork {
            nodes,
            links,
            regions,
            adjacency,
            arc_index,
        };
        if let Some(unreached) = net.first_unreachable() {
            return Err(TopologyError::Disconnected(unreached));
        }
        Ok(net)
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([NodeId(0)]);
        seen[0] = true;
        while let Some(node) = queue.pop_front() {
            for &(next, _) in &self.adjacency[node.index()] {
                if !seen[next.index()] {
                    seen[next.index()] = true;
                    queue.push_back(next);
                }
            }
        }
        seen.iter().position(|s| !s).map(|i| NodeId(i as u32))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn arc_count(&self) -> usize {
        self.links.len() * 2
    }

    pub fn nodes(&self) -> &[PhysicalNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[PhysicalLink] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> &PhysicalNode {
        &self.nodes[id.index()]
    }

    pub fn link(&self, id: LinkId) -> &PhysicalLink {
        &self.links[id.index()]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn regions(&self) -> &BTreeMap<String, BTreeSet<NodeId>> {
        &self.regions
    }

    pub fn region(&self, name: &str) -> Option<&BTreeSet<NodeId>> {
        self.regions.get(name)
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.name.as_deref() == Some(name))
            .map(|n| n.id)
    }

    /// Outgoing arcs of `node` as `(neighbour, arc)` pairs, sorted by neighbour.
    pub fn outgoing(&self, node: NodeId) -> &[(NodeId, ArcId)] {
        &self.adjacency[node.index()]
    }

    pub fn arc_between(&self, from: NodeId, to: NodeId) -> Option<ArcId> {
        self.arc_index.get(&(from, to)).copied()
    }

    /// `(tail, head)` of a directed arc.
    pub fn arc_endpoints(&self, arc: ArcId) -> (NodeId, NodeId) {
        let (a, b) = self.links[arc.link().index()].endpoints;
        if arc.0.is_multiple_of(2) {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn arc_capacity(&self, arc: ArcId) -> u64 {
        self.links[arc.link().index()].beta_nominal
    }

    pub fn arc_delay(&self, arc: ArcId) -> f64 {
        self.links[arc.link().index()].lambda_prop
    }

    pub fn total_gamma(&self) -> u64 {
        self.nodes.iter().map(|n| n.gamma_nominal).sum()
    }

    /// Canonical document form: explicit ids, capacities and delays.
    pub fn to_document(&self) -> TopologyDocument {
        TopologyDocument {
            defaults: None,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeEntry {
                    id: n.id.0,
                    name: n.name.clone(),
                    gamma: Some(Capacity(n.gamma_nominal)),
                    queuing_budget: Some(n.queuing_budget),
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkEntry {
                    a: NodeRef::Id(l.endpoints.0 .0),
                    b: NodeRef::Id(l.endpoints.1 .0),
                    bandwidth: Capacity(l.beta_nominal),
                    distance_km: None,
                    delay: Some(l.lambda_prop),
                })
                .collect(),
            regions: self
                .regions
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|n| NodeRef::Id(n.0)).collect()))
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_document()).expect("topology documents always serialize")
    }
}

/// Capacity value read from either an integer or an integral float (`6.72e10`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capacity(pub u64);

impl Serialize for Capacity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        // TOML integers are signed 64-bit.
        if self.0 <= i64::MAX as u64 {
            s.serialize_i64(self.0 as i64)
        } else {
            s.serialize_f64(self.0 as f64)
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) if v > 0 => Ok(Capacity(v as u64)),
            Raw::Float(v) if v >= 1.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(Capacity(v as u64)),
            Raw::Int(v) => Err(serde::de::Error::custom(format!(
                "capacity must be a positive integer, got {v}"
            ))),
            Raw::Float(v) => Err(serde::de::Error::custom(format!(
                "capacity must be a positive integer, got {v}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeRef {
    Id(u32),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDefaults {
    pub gamma: Option<Capacity>,
    pub queuing_budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Capacity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queuing_budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub a: NodeRef,
    pub b: NodeRef,
    pub bandwidth: Capacity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_km: Option<f64>,
    /// Explicit propagation delay in seconds; overrides `distance_km`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<f64>,
}

/// On-disk topology format (TOML).
///
/// ```toml
/// [defaults]
/// gamma = 6.72e10
/// queuing_budget = 9.6e-4
///
/// [[nodes]]
/// id = 0
/// name = "MI1"
///
/// [[links]]
/// a = "MI1"
/// b = 1
/// bandwidth = 1e10
/// distance_km = 120.0
///
/// [regions]
/// border = ["MI1"]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defaults: Option<NodeDefaults>,
    pub nodes: Vec<NodeEntry>,
    #[serde(default)]
    pub links: Vec<LinkEntry>,
    #[serde(default)]
    pub regions: BTreeMap<String, Vec<NodeRef>>,
}

impl TopologyDocument {
    pub fn into_network(self) -> Result<PhysicalNetwork, TopologyError> {
        let profile = NodeProfile::default();
        let default_gamma = self
            .defaults
            .as_ref()
            .and_then(|d| d.gamma)
            .map_or(profile.gamma, |c| c.0);
        let default_queuing = self
            .defaults
            .as_ref()
            .and_then(|d| d.queuing_budget)
            .unwrap_or(profile.queuing_budget);

        let n = self.nodes.len();
        let mut slots: Vec<Option<PhysicalNode>> = vec![None; n];
        let mut names: HashMap<String, NodeId> = HashMap::new();
        for (pos, entry) in self.nodes.into_iter().enumerate() {
            let loc = format!("nodes[{pos}]");
            let idx = entry.id as usize;
            if idx >= n {
                return Err(TopologyError::at(
                    loc,
                    format!("id {} outside 0..{n}; ids must be dense", entry.id),
                ));
            }
            if slots[idx].is_some() {
                return Err(TopologyError::at(
                    loc,
                    format!("duplicate node id {}", entry.id),
                ));
            }
            if let Some(name) = &entry.name {
                if names.insert(name.clone(), NodeId(entry.id)).is_some() {
                    return Err(TopologyError::at(
                        loc,
                        format!("duplicate node name {name:?}"),
                    ));
                }
            }
            slots[idx] = Some(PhysicalNode {
                id: NodeId(entry.id),
                name: entry.name,
                gamma_nominal: entry.gamma.map_or(default_gamma, |c| c.0),
                queuing_budget: entry.queuing_budget.unwrap_or(default_queuing),
            });
        }
        let nodes: Vec<PhysicalNode> = slots.into_iter().map(|s| s.expect("dense ids")).collect();

        let resolve = |r: &NodeRef, loc: &str| -> Result<NodeId, TopologyError> {
            match r {
                NodeRef::Id(id) if (*id as usize) < n => Ok(NodeId(*id)),
                NodeRef::Id(id) => Err(TopologyError::at(loc, format!("unknown node {id}"))),
                NodeRef::Name(name) => names
                    .get(name)
                    .copied()
                    .ok_or_else(|| TopologyError::at(loc, format!("unknown node {name:?}"))),
            }
        };

        let mut links = Vec::with_capacity(self.links.len());
        for (pos, entry) in self.links.iter().enumerate() {
            let loc = format!("links[{pos}]");
            let a = resolve(&entry.a, &loc)?;
            let b = resolve(&entry.b, &loc)?;
            let lambda_prop = match (entry.delay, entry.distance_km) {
                (Some(delay), _) => delay,
                (None, Some(km)) => propagation_delay(km)
                    .map_err(|e| TopologyError::at(loc.clone(), e.to_string()))?,
                (None, None) => 0.0,
            };
            links.push(PhysicalLink {
                id: LinkId(pos as u32),
                endpoints: (a, b),
                beta_nominal: entry.bandwidth.0,
                lambda_prop,
            });
        }

        let mut regions = BTreeMap::new();
        for (name, members) in &self.regions {
            let loc = format!("regions.{name}");
            let mut set = BTreeSet::new();
            for m in members {
                set.insert(resolve(m, &loc)?);
            }
            regions.insert(name.clone(), set);
        }

        PhysicalNetwork::new(nodes, links, regions)
    }
}

/// Parses and validates a TOML topology document.
pub fn load_topology(source: &str) -> Result<PhysicalNetwork, TopologyError> {
    let doc: TopologyDocument = toml::from_str(source)?;
    doc.into_network()
}

/// Barabási-Albert preferential-attachment generator.
///
/// Starts from `attachment` isolated nodes; every later node attaches to
/// `attachment` distinct existing nodes picked proportionally to degree,
/// which yields `m·|N| − m²` links and a connected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarabasiAlbert {
    pub nodes: usize,
    pub attachment: usize,
    pub distance_km: (f64, f64),
    pub bandwidth: u64,
    pub profile: NodeProfile,
}

impl BarabasiAlbert {
    pub fn new(nodes: usize, attachment: usize) -> Self {
        BarabasiAlbert {
            nodes,
            attachment,
            distance_km: (10.0, 100.0),
            bandwidth: DEFAULT_LINK_BANDWIDTH,
            profile: NodeProfile::default(),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<PhysicalNetwork, TopologyError> {
        let (n, m) = (self.nodes, self.attachment);
        if m < 1 || n <= m {
            return Err(TopologyError::InvalidParameter(format!(
                "need nodes > attachment >= 1, got nodes={n} attachment={m}"
            )));
        }
        let (lo, hi) = self.distance_km;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(TopologyError::InvalidParameter(format!(
                "invalid distance range [{lo}, {hi}]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m * n);
        let mut repeated: Vec<u32> = Vec::with_capacity(2 * m * n);
        let mut targets: Vec<u32> = (0..m as u32).collect();
        for source in m as u32..n as u32 {
            for &t in &targets {
                edges.push((t, source));
            }
            repeated.extend_from_slice(&targets);
            repeated.extend(std::iter::repeat_n(source, m));

            targets.clear();
            while targets.len() < m {
                let pick = repeated[rng.random_range(0..repeated.len())];
                if !targets.contains(&pick) {
                    targets.push(pick);
                }
            }
        }

        let nodes = (0..n as u32)
            .map(|i| PhysicalNode {
                id: NodeId(i),
                name: None,
                gamma_nominal: self.profile.gamma,
                queuing_budget: self.profile.queuing_budget,
            })
            .collect();
        let mut links = Vec::with_capacity(edges.len());
        for (i, (a, b)) in edges.into_iter().enumerate() {
            let km = if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            };
            links.push(PhysicalLink {
                id: LinkId(i as u32),
                endpoints: (NodeId(a), NodeId(b)),
                beta_nominal: self.bandwidth,
                lambda_prop: propagation_delay(km)?,
            });
        }
        PhysicalNetwork::new(nodes, links, BTreeMap::new())
    }
}

/// Generates a Barabási-Albert network with the default node profile and
/// 10 Gbps links.
pub fn generate_barabasi_albert(
    n_nodes: usize,
    m: usize,
    seed: u64,
    dist_range: (f64, f64),
) -> Result<PhysicalNetwork, TopologyError> {
    BarabasiAlbert {
        distance_km: dist_range,
        ..BarabasiAlbert::new(n_nodes, m)
    }
    .generate(seed)
}

/// Bundled approximations of the GARR and Stanford backbones.
pub mod fixtures {
    use super::{load_topology, PhysicalNetwork};

    pub const GARR_TOML: &str = include_str!("../fixtures/garr.toml");
    pub const STANFORD_TOML: &str = include_str!("../fixtures/stanford.toml");

    /// Italian research network, 46 nodes and 83 links. Node coordinates,
    /// hence link distances, are approximate.
    pub fn garr() -> PhysicalNetwork {
        load_topology(GARR_TOML).expect("bundled GARR fixture is valid")
    }

    /// Stanford campus backbone, 26 nodes and 46 links, no propagation delay.
    pub fn stanford() -> PhysicalNetwork {
        load_topology(STANFORD_TOML).expect("bundled Stanford fixture is valid")
    }
}
