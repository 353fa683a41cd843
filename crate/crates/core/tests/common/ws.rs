//! Blocking WebSocket client for the steering service.

use std::net::SocketAddr;
use std::time::{Duration, Instant};

use futures::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio::runtime::Runtime;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};
use urbsim::scenario::{ServerMessage, Snapshot};

pub struct Client {
    rt: Runtime,
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl Client {
    pub fn connect(addr: SocketAddr) -> Self {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        let (ws, _) = rt.block_on(tokio_tungstenite::connect_async(format!("ws://{addr}/ws"))).unwrap();
        Self { rt, ws }
    }

    pub fn send(&mut self, text: &str) {
        self.rt.block_on(self.ws.send(Message::Text(text.into()))).unwrap();
    }

    pub fn next(&mut self) -> ServerMessage {
        loop {
            let ws = &mut self.ws;
            let msg = self
                .rt
                .block_on(async { tokio::time::timeout(Duration::from_secs(10), ws.next()).await })
                .expect("server went quiet")
                .expect("stream ended")
                .unwrap();
            if let Message::Text(t) = msg {
                return serde_json::from_str(&t).unwrap();
            }
        }
    }

    /// Skip broadcasts until a reply arrives.
    pub fn reply(&mut self) -> ServerMessage {
        loop {
            match self.next() {
                ServerMessage::Snapshot(_) | ServerMessage::Network(_) => continue,
                m => return m,
            }
        }
    }

    /// Send a command and return the tick it was applied at.
    pub fn command(&mut self, text: &str) -> u64 {
        self.send(text);
        match self.reply() {
            ServerMessage::Ack { tick, .. } => tick,
            m => panic!("{text}: {m:?}"),
        }
    }

    pub fn snapshot_where(&mut self, pred: impl Fn(&Snapshot) -> bool) -> Snapshot {
        let t0 = Instant::now();
        loop {
            assert!(t0.elapsed() < Duration::from_secs(60), "no matching snapshot");
            if let ServerMessage::Snapshot(s) = self.next() {
                if pred(&s) {
                    return *s;
                }
            }
        }
    }

    pub fn close(mut self) {
        let _ = self.rt.block_on(self.ws.close(None));
    }
}
