use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use urbsim::scenario::{
    load_scenario_network, run_headless, start_server, write_network_cache, RunError, ScenarioConfig, ServeOptions, Session,
};

#[derive(Parser)]
#[command(name = "urbsim", version, about = "Deterministic urban traffic microsimulation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario headless and export metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Threads for the perceive phase; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Serve the live simulation over WebSocket.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Simulated seconds per wall-clock second.
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        #[arg(long)]
        paused: bool,
    },
    /// Build the network and its next-hop tables into a cache directory.
    BuildNetwork {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, ExitCode> {
    ScenarioConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config, seed, out, workers } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.sim.workers = w;
            }
            match run_headless(&cfg, out.as_deref()) {
                Ok(report) => {
                    println!("ticks: {}", report.ticks);
                    println!("spawned: {}", report.summary.spawned);
                    println!("arrived: {}", report.summary.arrived);
                    println!("world hash: {:016x}", report.hash);
                    for v in &report.violations {
                        eprintln!("invariant violated: {v}");
                    }
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Serve {
            config,
            port,
            host,
            speed,
            paused,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let addr: SocketAddr = match format!("{host}:{port}").parse() {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("error: bad address: {e}");
                    return ExitCode::from(2);
                }
            };
            if !(speed.is_finite() && speed > 0.0) {
                eprintln!("error: speed must be positive");
                return ExitCode::from(2);
            }
            let session = match Session::new(&cfg) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let opts = ServeOptions {
                snapshot_every: cfg.snapshot_every,
                max_vehicles: cfg.snapshot_max_vehicles,
                speed,
                start_paused: paused,
            };
            match start_server(session, addr, opts) {
                Ok(h) => {
                    log::info!("listening on ws://{}/ws", h.local_addr());
                    h.wait();
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::BuildNetwork { config, out } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let built = load_scenario_network(&cfg).and_then(|net| {
                write_network_cache(&net, &out)?;
                Ok(net)
            });
            match built {
                Ok(net) => {
                    println!(
                        "vertices: {} edges: {} table bytes: {}",
                        net.graph.vertex_count(),
                        net.graph.edges.len(),
                        net.table.byte_size()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
