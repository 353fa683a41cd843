//! Deterministic multi-agent urban traffic microsimulation.

pub mod behaviors;
pub mod fmt;
pub mod geom;
pub mod ingest;
pub mod metrics;
pub mod routing;
pub mod scenario;
pub mod sim;
pub mod topology;
pub mod transporters;
