use thiserror::Error;

use crate::ingest::{IngestError, RawNetwork};
use crate::routing::{build_next_hop_tables, derive_traffic_graph, GraphParams, RoutingError};
use crate::sim::Network;
use crate::topology::{build_topology, TopologyError};

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("ingest: {0}")]
    Ingest(#[from] IngestError),
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("routing: {0}")]
    Routing(#[from] RoutingError),
    #[error("io: {0}")]
    Io(String),
}

/// Raw polylines to a routable network with static next-hop tables.
pub fn build_network(raw: &RawNetwork, eps: f64, params: &GraphParams) -> Result<Network, BuildError> {
    let topo = build_topology(raw, eps)?;
    let graph = derive_traffic_graph(&topo, &raw.attributes, params)?;
    let table = build_next_hop_tables(&graph)?;
    Ok(Network::new(graph, table))
}
