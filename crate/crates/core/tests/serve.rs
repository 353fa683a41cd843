mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::ws::Client;
use serde_json::Value;
use urbsim::behaviors::Mode;
use urbsim::ingest::SyntheticSpec;
use urbsim::scenario::{
    run_headless, start_server, Command, NetworkSource, ScenarioConfig, ScriptedEvent, ServeOptions, ServerHandle,
    ServerMessage, Session,
};

fn config() -> ScenarioConfig {
    ScenarioConfig {
        network: NetworkSource::Synthetic(SyntheticSpec::grid(6, 6, 200.0)),
        spawn_rate: 2.0,
        duration_s: 300.0,
        seed: 21,
        ..ScenarioConfig::default()
    }
}

fn serve(cfg: &ScenarioConfig, speed: f64, paused: bool) -> ServerHandle {
    let opts = ServeOptions { snapshot_every: 4, speed, start_paused: paused, ..ServeOptions::default() };
    start_server(Session::new(cfg).unwrap(), "127.0.0.1:0".parse().unwrap(), opts).unwrap()
}

#[test]
fn network_then_snapshot_on_connect() {
    let h = serve(&config(), 1.0, true);
    let mut c = Client::connect(h.local_addr());
    match c.next() {
        ServerMessage::Network(n) => {
            assert_eq!(n.vertices.len(), 36);
            assert_eq!(n.edges.len(), 120);
            assert!(n.edges.iter().all(|e| e.geometry.len() >= 2));
        }
        m => panic!("{m:?}"),
    }
    match c.next() {
        ServerMessage::Snapshot(s) => {
            assert_eq!(s.tick, 0);
            assert!(s.paused);
            assert_eq!(s.edges.len(), 120);
        }
        m => panic!("{m:?}"),
    }
    c.close();
    h.shutdown();
}

#[test]
fn pause_freezes_and_resume_continues() {
    let h = serve(&config(), 20.0, false);
    let mut c = Client::connect(h.local_addr());
    c.snapshot_where(|s| s.tick >= 8);
    let t = c.command(r#"{"type":"pause","cmd_id":1}"#);
    let t0 = Instant::now();
    while t0.elapsed() < Duration::from_millis(400) {
        if let ServerMessage::Snapshot(s) = c.next() {
            assert!(s.tick <= t);
            if s.paused {
                assert_eq!(s.tick, t);
            }
        }
    }
    c.command(r#"{"type":"resume"}"#);
    c.snapshot_where(|s| s.tick > t + 8 && !s.paused);
    c.command(r#"{"type":"speed","mult":50}"#);
    c.close();
    h.shutdown();
}

#[test]
fn explosion_shows_up_in_snapshots() {
    let h = serve(&config(), 20.0, false);
    let mut c = Client::connect(h.local_addr());
    c.snapshot_where(|s| s.counts.in_network >= 5);
    // explosions leave later trips alone
    c.command(r#"{"type":"spawn_rate","rate":0}"#);
    let t = c.command(
        r#"{"type":"explosion","x":500,"y":500,"radius":5000,"intensity":1,"inside":{"chicken":1},"cmd_id":"boom"}"#,
    );
    let s = c.snapshot_where(|s| s.tick > t);
    assert_eq!(s.events.len(), 1);
    assert_eq!(s.events[0].start_tick, t);
    assert_eq!(s.counts.modes[&Mode::Normal], 0);
    assert!(s.counts.modes[&Mode::Chicken] > 0);
    assert!(s.vehicles.iter().all(|v| v.mode != Mode::Normal));
    c.close();
    h.shutdown();
}

#[test]
fn bad_commands_get_errors_with_their_id() {
    let h = serve(&config(), 1.0, true);
    let mut c = Client::connect(h.local_addr());
    for (text, id) in [
        (r#"{"type":"bar_edge","edge":"x","cmd_id":"abc"}"#, Some(Value::from("abc"))),
        (r#"{"type":"bar_edge","edge":5000,"cmd_id":7}"#, Some(Value::from(7))),
        (r#"{"type":"explosion","x":0,"y":0,"radius":10,"intensity":2,"cmd_id":[1]}"#, Some(serde_json::json!([1]))),
        (r#"{"type":"warp","cmd_id":8}"#, Some(Value::from(8))),
        ("{{", None),
    ] {
        c.send(text);
        match c.reply() {
            ServerMessage::Error { cmd_id, msg } => {
                assert_eq!(cmd_id, id, "{text}");
                assert!(!msg.is_empty());
            }
            m => panic!("{text}: {m:?}"),
        }
    }
    // the connection survives
    c.command(r#"{"type":"bar_edge","edge":3}"#);
    c.close();
    h.shutdown();
}

#[test]
fn clients_see_the_same_stream() {
    let h = serve(&config(), 10.0, true);
    let mut a = Client::connect(h.local_addr());
    let mut b = Client::connect(h.local_addr());
    a.command(r#"{"type":"resume"}"#);
    let collect = |c: &mut Client| {
        let mut seen = BTreeMap::new();
        loop {
            if let ServerMessage::Snapshot(s) = c.next() {
                let t = s.tick;
                seen.insert(t, serde_json::to_string(&s).unwrap());
                if t >= 120 {
                    return seen;
                }
            }
        }
    };
    let sa = collect(&mut a);
    let sb = collect(&mut b);
    let common: Vec<_> = sa.keys().filter(|t| sb.contains_key(t) && **t > 0).collect();
    assert!(common.len() >= 10, "{}", common.len());
    for t in common {
        assert_eq!(sa[t], sb[t], "tick {t}");
    }
    a.close();
    b.close();
    h.shutdown();
}

#[test]
fn live_commands_replay_as_a_script() {
    let cfg = config();
    let h = serve(&cfg, 40.0, false);
    let mut c = Client::connect(h.local_addr());
    let mut script = Vec::new();
    let mut at = |c: &mut Client, after: u64, cmd: Command| {
        c.snapshot_where(|s| s.tick >= after);
        let tick = c.command(&serde_json::to_string(&cmd).unwrap());
        script.push(ScriptedEvent { at_tick: tick, cmd_id: None, event: cmd });
    };
    at(&mut c, 60, Command::BarEdge { edge: 14 });
    at(&mut c, 150, Command::Explosion { x: 400.0, y: 600.0, radius: 300.0, intensity: 0.7, inside: None, outside: None });
    at(&mut c, 300, Command::SpawnRate { rate: 4.0 });
    at(&mut c, 420, Command::UnbarEdge { edge: 14 });
    let end = cfg.duration_ticks();
    let last = c.snapshot_where(|s| s.tick == end);
    c.close();
    h.shutdown();

    let replay = run_headless(&ScenarioConfig { events: script, ..cfg }, None).unwrap();
    assert_eq!(last.hash, format!("{:016x}", replay.hash));
}
