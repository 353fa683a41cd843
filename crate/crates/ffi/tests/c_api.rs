use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use urbsim::scenario::{run_headless, ScenarioConfig};
use urbsim_ffi::*;

const CONFIG: &str = r#"{"network":{"synthetic":{"shape":{"grid":{"rows":5,"cols":5}},"edge_length":200}},"duration_s":120,"spawn_rate":2,"seed":3}"#;

fn new(json: &str) -> Result<*mut UrbsimSim, (UrbsimStatus, String)> {
    let c = CString::new(json).unwrap();
    let mut h = ptr::null_mut();
    let s = unsafe { urbsim_sim_new(c.as_ptr(), &mut h) };
    if s == UrbsimStatus::Ok {
        Ok(h)
    } else {
        assert!(h.is_null());
        Err((s, last_error()))
    }
}

fn last_error() -> String {
    let p = urbsim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn stats(h: *const UrbsimSim) -> UrbsimStats {
    let mut st = UrbsimStats::default();
    assert_eq!(unsafe { urbsim_sim_stats(h, &mut st) }, UrbsimStatus::Ok);
    st
}

#[test]
fn full_run_matches_the_library() {
    let h = new(CONFIG).unwrap();
    let mut n = 0;
    let mut total = 0;
    loop {
        assert_eq!(unsafe { urbsim_sim_step(h, 37, &mut n) }, UrbsimStatus::Ok);
        total += n;
        if n < 37 {
            break;
        }
    }
    let st = stats(h);
    assert_eq!(st.tick, 240);
    assert_eq!(total, 240);
    assert_eq!(st.end_tick, 240);
    let direct = run_headless(&ScenarioConfig::from_json(CONFIG).unwrap(), None).unwrap();
    assert_eq!(st.hash, direct.hash);
    assert_eq!(st.arrived, direct.summary.arrived);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { urbsim_sim_snapshot_json(h, 10, &mut json) }, UrbsimStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    unsafe { urbsim_string_free(json) };
    assert!(text.starts_with(r#"{"type":"snapshot""#));
    assert!(text.contains(&format!("{:016x}", st.hash)));
    unsafe { urbsim_sim_free(h) };
}

#[test]
fn status_codes() {
    let (s, msg) = new(r#"{"durationn": 5}"#).unwrap_err();
    assert_eq!(s, UrbsimStatus::Config);
    assert!(msg.contains("durationn"));
    let (s, _) = new(r#"{"network":{"files":{"shp":"/nonexistent.shp","dbf":"/nonexistent.dbf"}}}"#).unwrap_err();
    assert_eq!(s, UrbsimStatus::Build);

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { urbsim_sim_new(ptr::null(), &mut h) }, UrbsimStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { urbsim_sim_new(bad.as_ptr().cast(), &mut h) }, UrbsimStatus::InvalidUtf8);
    assert_eq!(unsafe { urbsim_sim_step(ptr::null_mut(), 1, ptr::null_mut()) }, UrbsimStatus::NullPointer);

    let h = new(CONFIG).unwrap();
    for (cmd, ok) in [
        (r#"{"type":"bar_edge","edge":3}"#, true),
        (r#"{"type":"bar_edge","edge":100000}"#, false),
        (r#"{"type":"pause"}"#, false),
        (r#"{"type":"explosion","x":0,"y":0,"radius":0,"intensity":1}"#, false),
        ("nonsense", false),
    ] {
        let c = CString::new(cmd).unwrap();
        let s = unsafe { urbsim_sim_apply(h, c.as_ptr()) };
        assert_eq!(s == UrbsimStatus::Ok, ok, "{cmd}");
        if !ok {
            assert_eq!(s, UrbsimStatus::Command);
            assert!(!last_error().is_empty());
        }
    }
    unsafe { urbsim_sim_free(h) };
    unsafe { urbsim_sim_free(ptr::null_mut()) };
}

/// `<target>/<profile>`: the test binary lives in its `deps` directory.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = profile_dir().join("liburbsim_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        format!(
            r#"#include <stdio.h>
#include "urbsim.h"
int main(void) {{
    UrbsimSim *sim = NULL;
    if (urbsim_sim_new("{cfg}", &sim) != URBSIM_STATUS_OK) return 1;
    uint64_t n = 0;
    if (urbsim_sim_step(sim, 1000, &n) != URBSIM_STATUS_OK) return 2;
    UrbsimStats st;
    if (urbsim_sim_stats(sim, &st) != URBSIM_STATUS_OK) return 3;
    if (urbsim_sim_apply(sim, "{{\"type\":\"warp\"}}") != URBSIM_STATUS_COMMAND) return 4;
    if (urbsim_last_error() == NULL) return 5;
    printf("%llu %016llx\n", (unsigned long long)n, (unsigned long long)st.hash);
    urbsim_sim_free(sim);
    return 0;
}}
"#,
            cfg = CONFIG.replace('"', "\\\"")
        ),
    )
    .unwrap();
    let exe = dir.path().join("main");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let direct = run_headless(&ScenarioConfig::from_json(CONFIG).unwrap(), None).unwrap();
    assert_eq!(String::from_utf8(run.stdout).unwrap().trim(), format!("240 {:016x}", direct.hash));
}
