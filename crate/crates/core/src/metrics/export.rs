use std::path::Path;

use super::{EdgeWindowSample, MetricsError, RunSummary};
use crate::behaviors::Transition;
use crate::fmt::g6;
use crate::transporters::EncumbranceRecord;

pub const FD_HEADER: [&str; 5] = ["edge_id", "window_start_s", "density_veh_km_lane", "flow_veh_h", "speed_ms"];

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

pub fn fd_samples_csv(samples: &[EdgeWindowSample]) -> String {
    let mut w = writer();
    w.write_record(FD_HEADER).expect("in-memory");
    for s in samples {
        w.write_record([s.edge.to_string(), g6(s.window_start_s), g6(s.density), g6(s.flow), g6(s.speed)])
            .expect("in-memory");
    }
    finish(w)
}

pub fn transitions_csv(transitions: &[Transition]) -> String {
    let mut w = writer();
    w.write_record(["tick", "agent", "from", "to", "reason"]).expect("in-memory");
    for t in transitions {
        w.write_record([t.tick.to_string(), t.agent.to_string(), t.from.as_str().into(), t.to.as_str().into(), t.reason.into()])
            .expect("in-memory");
    }
    finish(w)
}

pub fn encumbrance_csv(log: &[EncumbranceRecord]) -> String {
    let mut w = writer();
    w.write_record(["tick", "element", "event"]).expect("in-memory");
    for r in log {
        w.write_record([r.tick.to_string(), r.element.to_string(), r.event.as_str().into()]).expect("in-memory");
    }
    finish(w)
}

pub fn summary_csv(s: &RunSummary) -> String {
    let mut w = writer();
    w.write_record(["metric", "value"]).expect("in-memory");
    let mut row = |k: &str, v: String| w.write_record([k, v.as_str()]).expect("in-memory");
    row("spawned", s.spawned.to_string());
    row("arrived", s.arrived.to_string());
    row("exited", s.exited.to_string());
    row("stranded", s.stranded.to_string());
    row("stranded_at_source", s.stranded_at_source.to_string());
    row("mean_travel_time_s", g6(s.mean_travel_time_s));
    row("peak_concurrent", s.peak_concurrent.to_string());
    for (m, share) in &s.mode_shares {
        row(&format!("share_{}", m.as_str()), g6(*share));
    }
    finish(w)
}

/// Write the four analysis files into `dir`.
pub fn write_all(
    dir: &Path,
    samples: &[EdgeWindowSample],
    transitions: &[Transition],
    encumbrance: &[EncumbranceRecord],
    summary: &RunSummary,
) -> Result<(), MetricsError> {
    let io = |path: &Path, source| MetricsError::IoFailure {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, body) in [
        ("fd_samples.csv", fd_samples_csv(samples)),
        ("transitions.csv", transitions_csv(transitions)),
        ("encumbrance.csv", encumbrance_csv(encumbrance)),
        ("summary.csv", summary_csv(summary)),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| io(&path, e))?;
    }
    Ok(())
}
