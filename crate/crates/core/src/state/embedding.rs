use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::service::ServiceRequest;
use crate::topology::{ArcId, NodeId, PhysicalNetwork};

/// Placement and routing of one chain.
///
/// `hosts` lists the node of every entity in traversal order: the source
/// endpoint, each VSNF, then the sink endpoint. `routes[k]` is the node path
/// carrying the chain from `hosts[k]` to `hosts[k + 1]`; a single-node route
/// means both entities sit on the same node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChainEmbedding {
    pub hosts: Vec<NodeId>,
    pub routes: Vec<Vec<NodeId>>,
}

impl ChainEmbedding {
    pub fn source(&self) -> NodeId {
        self.hosts[0]
    }

    pub fn sink(&self) -> NodeId {
        *self.hosts.last().expect("hosts are never empty")
    }

    /// Nodes hosting the chain's VSNFs, in chain order.
    pub fn vsnf_hosts(&self) -> &[NodeId] {
        &self.hosts[1..self.hosts.len() - 1]
    }

    /// Whether the entity at the start of segment `k` is a VSNF.
    pub fn segment_starts_at_vsnf(&self, k: usize) -> bool {
        k >= 1
    }

    /// Whether the entity at the end of segment `k` is a VSNF.
    pub fn segment_ends_at_vsnf(&self, k: usize) -> bool {
        k + 2 < self.hosts.len()
    }
}

/// Decision-variable assignment for a whole request, indexed like
/// `ServiceRequest::chains`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Embedding {
    pub chains: Vec<ChainEmbedding>,
}

impl Embedding {
    /// CPU demand per hosting node, sorted by node.
    pub fn cpu_demands(&self, req: &ServiceRequest) -> Vec<(NodeId, u64)> {
        let mut load: BTreeMap<NodeId, u64> = BTreeMap::new();
        for (chain, ce) in req.chains.iter().zip(&self.chains) {
            for (pos, &node) in ce.vsnf_hosts().iter().enumerate() {
                *load.entry(node).or_default() += chain.cpu_demand(pos);
            }
        }
        load.into_iter().collect()
    }

    /// Bandwidth demand per directed arc. Routes must be arc-connected.
    pub fn arc_demands(&self, req: &ServiceRequest, net: &PhysicalNetwork) -> Vec<(ArcId, u64)> {
        let mut load: BTreeMap<ArcId, u64> = BTreeMap::new();
        for (chain, ce) in req.chains.iter().zip(&self.chains) {
            for route in &ce.routes {
                for arc in route_arcs(net, route) {
                    *load
                        .entry(arc.expect("route hops follow links"))
                        .or_default() += chain.beta_req;
                }
            }
        }
        load.into_iter().collect()
    }

    /// Distinct nodes hosting at least one VSNF.
    pub fn active_nodes(&self) -> usize {
        let mut nodes: Vec<NodeId> = self
            .chains
            .iter()
            .flat_map(|c| c.vsnf_hosts().iter().copied())
            .collect();
        nodes.sort();
        nodes.dedup();
        nodes.len()
    }
}

/// Directed arcs along a node path; `None` for a hop without a link.
pub fn route_arcs<'a>(
    net: &'a PhysicalNetwork,
    route: &'a [NodeId],
) -> impl Iterator<Item = Option<ArcId>> + 'a {
    route.windows(2).map(|w| net.arc_between(w[0], w[1]))
}

/// Extra CPU load per node, sorted by node; small enough for linear lookup.
pub type NodeLoad = [(NodeId, u64)];

pub(crate) fn load_on(load: &NodeLoad, node: NodeId) -> u64 {
    load.iter().find(|(n, _)| *n == node).map_or(0, |(_, l)| *l)
}
