//! Scenario configuration, scripted events, headless runs and the live
//! steering service.

mod command;
mod config;
mod network;
mod run;
mod serve;
mod snapshot;

pub use command::{parse_client_message, ClientCommand, Command, ScriptedEvent};
pub use config::{ConfigError, CrisisDefaults, NetworkFiles, NetworkSource, ScenarioConfig};
pub use network::{build_network, BuildError};
pub use run::{
    apply_command, load_scenario_network, run_headless, run_session, write_network_cache, ApplyError, RunError, RunReport,
    Session,
};
pub use serve::{start_server, ServeError, ServeOptions, ServerHandle};
pub use snapshot::{Counts, EdgeShape, EdgeView, EventView, NetworkView, ServerMessage, Snapshot, VehicleView, VertexView};
