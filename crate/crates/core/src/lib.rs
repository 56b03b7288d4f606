//! Embedding of chains of virtual security network functions (VSNFs) onto a
//! capacitated physical network.
//!
//! [`heuristic`] holds the online embedding algorithm, [`oracle`] an
//! exhaustive exact solver for small instances, and [`simulator`] a Poisson
//! workload driver that compares both against a single-chain baseline.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod heuristic;
pub mod oracle;
pub mod service;
pub mod simulator;
pub mod state;
pub mod topology;

pub use heuristic::{
    pess_embed, pess_plan, place_on_path, register_operational, CandidateSolution, PessOptions,
    Plan, PlanStats, Rejection, ScanOrder,
};
pub use service::{
    baseline_request, builtin_catalog, generate_request, Chain, ChainId, Direction, RegionBinding,
    RequestGenConfig, RequestGenerator, RequestId, ServiceRequest, StatefulGroup, VsnfCatalog,
    VsnfRef, VsnfSpec,
};
pub use state::check::{check_embedding, recheck_operational, LatencyGuard, Violation};
pub use state::cost::{
    chain_latency, embedding_cost, gamma_threshold, processing_delay, CostParams,
};
pub use state::embedding::{ChainEmbedding, Embedding};
pub use state::{ChainKey, NetworkState, StateError};
pub use topology::{
    generate_barabasi_albert, load_topology, propagation_delay, ArcId, BarabasiAlbert, LinkId,
    NodeId, NodeProfile, PhysicalNetwork, TopologyError,
};
