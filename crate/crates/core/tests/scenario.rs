mod common;

use std::process::Command as Proc;

use urbsim::ingest::SyntheticSpec;
use urbsim::scenario::{
    apply_command, load_scenario_network, run_headless, write_network_cache, ApplyError, Command, ConfigError,
    CrisisDefaults, NetworkSource, ScenarioConfig, ScriptedEvent,
};
use urbsim::sim::World;

#[test]
fn empty_config_takes_defaults() {
    let cfg = ScenarioConfig::from_json("{}").unwrap();
    assert_eq!(cfg, ScenarioConfig::default());
    assert_eq!(cfg.duration_ticks(), 7200);
    let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    for (text, needle) in [
        (r#"{"spawn_rat": 1}"#, "spawn_rat"),
        (r#"{"sim": {"dtt": 0.5}}"#, "dtt"),
        (r#"{"transporters": {"budget": 3}}"#, "budget"),
    ] {
        match ScenarioConfig::from_json(text) {
            Err(ConfigError::Parse(m)) => assert!(m.contains(needle), "{m}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(ScenarioConfig::from_json(r#"{"sim": {"dt": 0}}"#), Err(ConfigError::Invalid { .. })));
    let late = r#"{"duration_s": 10, "events": [{"at_tick": 100, "event": {"type": "spawn_rate", "rate": 1}}]}"#;
    assert!(matches!(ScenarioConfig::from_json(late), Err(ConfigError::Invalid { .. })));
    let live_only = r#"{"events": [{"at_tick": 1, "event": {"type": "pause"}}]}"#;
    assert!(matches!(ScenarioConfig::from_json(live_only), Err(ConfigError::Invalid { .. })));
}

#[test]
fn default_hour_runs_clean() {
    let report = run_headless(&ScenarioConfig::default(), None).unwrap();
    assert_eq!(report.ticks, 7200);
    assert!(report.summary.arrived > 0);
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn scripted_events_land_on_their_tick() {
    let cfg = ScenarioConfig {
        duration_s: 300.0,
        events: vec![
            ScriptedEvent { at_tick: 100, cmd_id: None, event: Command::BarEdge { edge: 3 } },
            ScriptedEvent { at_tick: 200, cmd_id: None, event: Command::UnbarEdge { edge: 3 } },
        ],
        ..ScenarioConfig::default()
    };
    let mut s = urbsim::scenario::Session::new(&cfg).unwrap();
    while s.world.tick() < 100 {
        s.advance();
        assert!(!s.world.field().is_barred(3));
    }
    s.apply_due();
    assert!(s.world.field().is_barred(3));
    while s.world.tick() < 200 {
        s.advance();
    }
    s.apply_due();
    assert!(!s.world.field().is_barred(3));

    let bad = ScenarioConfig {
        events: vec![ScriptedEvent { at_tick: 1, cmd_id: None, event: Command::BarEdge { edge: 99_999 } }],
        ..ScenarioConfig::default()
    };
    assert!(urbsim::scenario::Session::new(&bad).is_err());
}

#[test]
fn command_errors() {
    let net = common::grid(3, 3, 100.0, 1);
    let mut w = World::new(net, Default::default()).unwrap();
    let d = CrisisDefaults::default();
    assert_eq!(apply_command(&mut w, &Command::BarEdge { edge: 500 }, &d), Err(ApplyError::UnknownEdge(500)));
    let boom = Command::Explosion { x: 0.0, y: 0.0, radius: -3.0, intensity: 1.0, inside: None, outside: None };
    assert!(matches!(apply_command(&mut w, &boom, &d), Err(ApplyError::MalformedEvent(_))));
    let boom = Command::Explosion { x: 0.0, y: 0.0, radius: 30.0, intensity: 0.0, inside: None, outside: None };
    assert!(matches!(apply_command(&mut w, &boom, &d), Err(ApplyError::MalformedEvent(_))));
    assert!(apply_command(&mut w, &Command::SpawnRate { rate: -1.0 }, &d).is_err());
    assert!(apply_command(&mut w, &Command::Pause, &d).is_err());
    assert_eq!(apply_command(&mut w, &Command::BarEdge { edge: 2 }, &d), Ok(()));
    assert!(w.field().is_barred(2));
}

#[test]
fn cached_network_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        network: NetworkSource::Synthetic(SyntheticSpec::grid(6, 6, 200.0)),
        duration_s: 600.0,
        spawn_rate: 2.0,
        ..ScenarioConfig::default()
    };
    let net = load_scenario_network(&cfg).unwrap();
    write_network_cache(&net, dir.path()).unwrap();
    let cached = ScenarioConfig { network: NetworkSource::Cache(dir.path().into()), ..cfg.clone() };
    let back = load_scenario_network(&cached).unwrap();
    assert_eq!(back.graph, net.graph);
    assert_eq!(back.table, net.table);
    assert_eq!(run_headless(&cfg, None).unwrap().hash, run_headless(&cached, None).unwrap().hash);

    std::fs::write(dir.path().join("next_hop.bin"), b"NHT1\x01\0\0\0\xff").unwrap();
    assert!(load_scenario_network(&cached).is_err());
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Proc::new(env!("CARGO_BIN_EXE_urbsim")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"duration_s": 60, "spawn_rate": 2}"#).unwrap();
    let out = dir.path().join("out");
    let (code, stdout, _) = cli(&["run", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("world hash"));
    for f in ["fd_samples.csv", "transitions.csv", "encumbrance.csv", "summary.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    // same seed, same hash, whatever the worker count
    let (_, again, _) = cli(&["run", "--config", good.to_str().unwrap(), "--workers", "3"]);
    let hash = |s: &str| s.lines().find(|l| l.contains("world hash")).map(String::from);
    assert_eq!(hash(&stdout), hash(&again));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"duration": 60}"#).unwrap();
    let (code, _, stderr) = cli(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("duration"), "{stderr}");

    let (code, _, _) = cli(&["run", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);

    let files = dir.path().join("files.json");
    std::fs::write(&files, r#"{"network": {"files": {"shp": "nope.shp", "dbf": "nope.dbf"}}}"#).unwrap();
    let (code, _, _) = cli(&["run", "--config", files.to_str().unwrap()]);
    assert_eq!(code, 3);

    let cache = dir.path().join("cache");
    let (code, _, _) = cli(&["build-network", "--config", good.to_str().unwrap(), "--out", cache.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(cache.join("next_hop.bin").exists() && cache.join("weights.csv").exists());
}
