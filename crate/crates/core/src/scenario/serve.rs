use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError, TryRecvError};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse};
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use thiserror::Error;
use tokio::sync::{broadcast, mpsc as tmpsc, oneshot};

use super::command::{parse_client_message, ClientCommand, Command};
use super::run::{apply_command, Session};
use super::snapshot::{NetworkView, ServerMessage, Snapshot};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {addr}: {msg}")]
    PortBusy { addr: SocketAddr, msg: String },
    #[error("runtime: {0}")]
    Runtime(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServeOptions {
    /// Broadcast a snapshot every this many ticks.
    pub snapshot_every: u64,
    pub max_vehicles: usize,
    /// Simulated seconds per wall-clock second.
    pub speed: f64,
    pub start_paused: bool,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            snapshot_every: 4,
            max_vehicles: 20_000,
            speed: 1.0,
            start_paused: false,
        }
    }
}

struct Incoming {
    cmd: ClientCommand,
    reply: tmpsc::UnboundedSender<String>,
}

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<Incoming>,
    snapshots: broadcast::Sender<Arc<str>>,
    latest: Arc<RwLock<Arc<str>>>,
    network: Arc<str>,
}

/// A running service; dropping it without [`ServerHandle::shutdown`] leaves
/// it running until the process exits.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    shutdown: Option<oneshot::Sender<()>>,
    sim: Option<JoinHandle<()>>,
    runtime: Option<tokio::runtime::Runtime>,
    server: Option<tokio::task::JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_all();
    }

    /// Block until the service stops.
    pub fn wait(mut self) {
        if let (Some(rt), Some(server)) = (self.runtime.as_ref(), self.server.take()) {
            let _ = rt.block_on(server);
        }
        self.stop_all();
    }

    fn stop_all(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(h) = self.sim.take() {
            let _ = h.join();
        }
        if let Some(rt) = self.runtime.take() {
            rt.shutdown_timeout(Duration::from_secs(1));
        }
    }
}

const INDEX: &str = "<!doctype html><title>urbsim</title><p>Simulation service. Connect a client to <code>/ws</code>.</p>";

/// Start the simulation loop and the WebSocket endpoint on `addr`.
pub fn start_server(session: Session, addr: SocketAddr, opts: ServeOptions) -> Result<ServerHandle, ServeError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(|e| ServeError::Runtime(e.to_string()))?;
    let listener = runtime
        .block_on(tokio::net::TcpListener::bind(addr))
        .map_err(|e| ServeError::PortBusy { addr, msg: e.to_string() })?;
    let local = listener.local_addr().map_err(|e| ServeError::Runtime(e.to_string()))?;

    let network: Arc<str> = ServerMessage::Network(NetworkView::of(session.world.network())).to_json().into();
    let first: Arc<str> = snapshot_json(&session, &opts, opts.start_paused).into();
    let (snap_tx, _) = broadcast::channel(16);
    let (cmd_tx, cmd_rx) = mpsc::channel();
    let state = AppState {
        commands: cmd_tx,
        snapshots: snap_tx.clone(),
        latest: Arc::new(RwLock::new(first)),
        network,
    };
    let stop = Arc::new(AtomicBool::new(false));
    let sim = {
        let stop = stop.clone();
        let latest = state.latest.clone();
        std::thread::Builder::new()
            .name("sim-loop".into())
            .spawn(move || sim_loop(session, cmd_rx, snap_tx, latest, stop, opts))
            .map_err(|e| ServeError::Runtime(e.to_string()))?
    };
    let app = Router::new()
        .route("/", get(|| async { Html(INDEX) }))
        .route("/ws", get(ws_handler))
        .with_state(state);
    let (tx, rx) = oneshot::channel::<()>();
    let server = runtime.spawn(async move {
        let _ = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await;
    });
    Ok(ServerHandle {
        addr: local,
        stop,
        shutdown: Some(tx),
        sim: Some(sim),
        runtime: Some(runtime),
        server: Some(server),
    })
}

fn snapshot_json(s: &Session, opts: &ServeOptions, paused: bool) -> String {
    ServerMessage::Snapshot(Box::new(Snapshot::capture(&s.world, opts.max_vehicles, paused))).to_json()
}

fn sim_loop(
    mut s: Session,
    rx: mpsc::Receiver<Incoming>,
    snaps: broadcast::Sender<Arc<str>>,
    latest: Arc<RwLock<Arc<str>>>,
    stop: Arc<AtomicBool>,
    opts: ServeOptions,
) {
    let dt = s.world.config().sim.dt;
    let mut paused = opts.start_paused;
    let mut speed = opts.speed;
    let publish = |s: &Session, paused: bool| {
        let msg: Arc<str> = snapshot_json(s, &opts, paused).into();
        *latest.write().expect("snapshot lock") = msg.clone();
        let _ = snaps.send(msg);
    };
    let handle = |s: &mut Session, m: Incoming, paused: &mut bool, speed: &mut f64| {
        let tick = s.world.tick();
        let result = match &m.cmd.command {
            Command::Pause => {
                *paused = true;
                Ok(())
            }
            Command::Resume => {
                *paused = false;
                Ok(())
            }
            Command::Speed { mult } => {
                *speed = *mult;
                Ok(())
            }
            c => apply_command(&mut s.world, c, &s.crisis).map_err(|e| e.to_string()),
        };
        let reply = match result {
            Ok(()) => ServerMessage::Ack {
                cmd_id: m.cmd.cmd_id,
                tick,
            },
            Err(msg) => ServerMessage::Error {
                cmd_id: m.cmd.cmd_id,
                msg,
            },
        };
        let _ = m.reply.send(reply.to_json());
    };
    let mut next_due = Instant::now();
    while !stop.load(Ordering::SeqCst) {
        loop {
            match rx.try_recv() {
                Ok(m) => handle(&mut s, m, &mut paused, &mut speed),
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => return,
            }
        }
        let period = Duration::from_secs_f64(dt / speed);
        if !paused && !s.finished() {
            s.advance();
            if s.world.tick() % opts.snapshot_every == 0 || s.finished() {
                publish(&s, paused);
            }
            next_due += period;
            let now = Instant::now();
            if next_due > now {
                std::thread::sleep(next_due - now);
            } else if now - next_due > Duration::from_secs(1) {
                next_due = now;
            }
        } else {
            let idle = (period * opts.snapshot_every as u32).clamp(Duration::from_millis(20), Duration::from_secs(2));
            match rx.recv_timeout(idle) {
                Ok(m) => handle(&mut s, m, &mut paused, &mut speed),
                Err(RecvTimeoutError::Timeout) => publish(&s, paused),
                Err(RecvTimeoutError::Disconnected) => return,
            }
            next_due = Instant::now();
        }
    }
}

async fn ws_handler(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, state))
}

async fn client(socket: WebSocket, state: AppState) {
    let (mut sink, mut stream) = socket.split();
    let mut snaps = state.snapshots.subscribe();
    let (reply_tx, mut reply_rx) = tmpsc::unbounded_channel::<String>();
    let latest = state.latest.read().expect("snapshot lock").clone();
    for first in [state.network.to_string(), latest.to_string()] {
        if sink.send(Message::Text(first.into())).await.is_err() {
            return;
        }
    }
    let writer = tokio::spawn(async move {
        loop {
            let text: String = tokio::select! {
                r = reply_rx.recv() => match r {
                    Some(t) => t,
                    None => break,
                },
                s = snaps.recv() => match s {
                    Ok(t) => t.to_string(),
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => break,
                },
            };
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        match parse_client_message(&text) {
            Ok(cmd) => {
                let inc = Incoming {
                    cmd,
                    reply: reply_tx.clone(),
                };
                if state.commands.send(inc).is_err() {
                    break;
                }
            }
            Err((cmd_id, msg)) => {
                let _ = reply_tx.send(ServerMessage::Error { cmd_id, msg }.to_json());
            }
        }
    }
    drop(reply_tx);
    writer.abort();
}
