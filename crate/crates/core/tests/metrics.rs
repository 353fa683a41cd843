mod common;

use proptest::prelude::*;
use urbsim::behaviors::Mode;
use urbsim::metrics::{encumbrance_csv, fd_samples_csv, summary_csv, transitions_csv, Recorder, FD_HEADER};
use urbsim::sim::{DriverDistributions, DriverParams, World, WorldConfig};

#[test]
fn ring_samples_obey_flow_equals_density_times_speed() {
    let p = DriverParams::default();
    let net = common::ring(20, 2000.0);
    let cfg = WorldConfig { drivers: DriverDistributions::homogeneous(&p), ..WorldConfig::default() };
    let mut w = World::new(net, cfg).unwrap();
    common::fill_ring(&mut w, 60, &p, 0.0, Mode::Wandering);
    for _ in 0..4800 {
        w.step();
    }
    let late: Vec<_> = w.recorder().samples.iter().filter(|s| s.window_start_s >= 1200.0).collect();
    assert!(!late.is_empty());
    for s in late {
        let q = s.density * s.speed * 3.6;
        assert!((s.flow - q).abs() <= 0.15 * q, "{s:?} vs {q}");
    }
}

#[test]
fn grid_run_is_conserved_and_shares_add_up() {
    let net = common::grid(6, 6, 200.0, 2);
    let mut w = World::new(net, WorldConfig { spawn_rate: 3.0, seed: 4, ..WorldConfig::default() }).unwrap();
    for _ in 0..1800 {
        w.step();
    }
    assert!(w.recorder().breaches.is_empty());
    assert!(w.recorder().samples.len() > 100);
    let s = w.summary();
    let total: f64 = s.mode_shares.iter().map(|m| m.1).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(s.mode_shares.iter().map(|m| m.0).collect::<Vec<_>>(), Mode::ALL.to_vec());
    assert!(s.arrived > 0 && s.mean_travel_time_s > 0.0);
    assert!(s.peak_concurrent as usize >= w.vehicle_count());
}

#[test]
fn csv_files_have_fixed_headers() {
    let net = common::grid(5, 5, 200.0, 1);
    let mut w = World::new(net, WorldConfig { spawn_rate: 2.0, seed: 9, ..WorldConfig::default() }).unwrap();
    for _ in 0..1200 {
        w.step();
    }
    let read = |body: String| {
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let head: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        let rows = r.records().map(|x| x.unwrap().len()).collect::<Vec<_>>();
        assert!(rows.iter().all(|&n| n == head.len()));
        (head, rows.len())
    };
    let (h, n) = read(fd_samples_csv(&w.recorder().samples));
    assert_eq!(h, FD_HEADER);
    assert_eq!(n, w.recorder().samples.len());
    assert_eq!(read(transitions_csv(w.transitions())).0, ["tick", "agent", "from", "to", "reason"]);
    assert_eq!(read(encumbrance_csv(&w.field().log)).0, ["tick", "element", "event"]);
    let (h, n) = read(summary_csv(&w.summary()));
    assert_eq!(h, ["metric", "value"]);
    assert_eq!(n, 7 + Mode::ALL.len());
}

proptest! {
    /// Random single-edge histories: window statistics against direct sums.
    #[test]
    fn window_statistics_match_direct_sums(
        length in 20.0..500.0f64,
        lanes in 1u8..4,
        events in prop::collection::vec((0u8..3, 0.0..20.0f64), 1..300),
    ) {
        let dt = 0.5;
        let mut r = Recorder::new(&[length], &[lanes], dt, 1e9);
        let (mut pop, mut vs, mut ss, mut xs) = (0i64, 0.0, 0.0, 0u32);
        for (t, &(kind, v)) in events.iter().enumerate() {
            match kind {
                0 => { r.on_entry(0); pop += 1; }
                1 if pop > 0 => { r.on_crossing(0); pop -= 1; xs += 1; }
                _ => {}
            }
            for _ in 0..pop {
                r.on_vehicle(0, v, Mode::Normal);
                vs += dt;
                ss += v * dt;
            }
            r.end_tick(t as u64);
        }
        r.close_window(events.len() as u64);
        prop_assert!(r.breaches.is_empty());
        let w = events.len() as f64 * dt;
        match r.samples.first() {
            None => prop_assert_eq!(vs, 0.0),
            Some(s) => {
                prop_assert!((s.density - vs / (w * length / 1000.0 * lanes as f64)).abs() < 1e-9 * s.density.max(1.0));
                prop_assert!((s.flow - xs as f64 * 3600.0 / w).abs() < 1e-9);
                prop_assert!((s.speed - ss / vs).abs() < 1e-9);
            }
        }
    }
}
