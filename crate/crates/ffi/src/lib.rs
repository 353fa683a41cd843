//! C interface: build a simulation from a JSON config, step it, steer it and
//! read back its hash, counters and snapshots.
//!
//! Every call returns a [`UrbsimStatus`]. On failure the message is kept per
//! thread and can be read with [`urbsim_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use urbsim::scenario::{apply_command, parse_client_message, RunError, ScenarioConfig, ServerMessage, Session, Snapshot};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UrbsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The config was rejected.
    Config = 3,
    /// The network could not be built or loaded.
    Build = 4,
    /// A command was malformed or named something that does not exist.
    Command = 5,
    Panic = 6,
}

/// Opaque simulation handle.
pub struct UrbsimSim {
    session: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: UrbsimStatus, msg: impl Into<String>) -> UrbsimStatus {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
    status
}

fn guard(f: impl FnOnce() -> UrbsimStatus) -> UrbsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(UrbsimStatus::Panic, msg)
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, UrbsimStatus> {
    if p.is_null() {
        return Err(fail(UrbsimStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(UrbsimStatus::InvalidUtf8, e.to_string()))
}

unsafe fn sim<'a>(p: *mut UrbsimSim) -> Result<&'a mut UrbsimSim, UrbsimStatus> {
    p.as_mut().ok_or_else(|| fail(UrbsimStatus::NullPointer, "null handle"))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn urbsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Build a simulation from a JSON scenario config. Relative network paths
/// resolve against the working directory.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn urbsim_sim_new(config_json: *const c_char, out: *mut *mut UrbsimSim) -> UrbsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(UrbsimStatus::NullPointer, "null out pointer");
        }
        *out = ptr::null_mut();
        let cfg = tri!(ScenarioConfig::from_json(tri!(text(config_json))).map_err(|e| fail(UrbsimStatus::Config, e.to_string())));
        let session = tri!(Session::new(&cfg).map_err(|e| {
            let status = match e {
                RunError::Config(_) => UrbsimStatus::Config,
                _ => UrbsimStatus::Build,
            };
            fail(status, e.to_string())
        }));
        *out = Box::into_raw(Box::new(UrbsimSim { session }));
        UrbsimStatus::Ok
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `sim` must come from [`urbsim_sim_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn urbsim_sim_free(sim: *mut UrbsimSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advance up to `ticks` ticks, stopping at the configured duration.
/// Scripted events fire on their tick. `advanced` may be null.
///
/// # Safety
/// `sim` must be a live handle; `advanced` null or writable.
#[no_mangle]
pub unsafe extern "C" fn urbsim_sim_step(sim: *mut UrbsimSim, ticks: u64, advanced: *mut u64) -> UrbsimStatus {
    guard(|| {
        let s = &mut tri!(self::sim(sim)).session;
        let mut n = 0;
        while n < ticks && !s.finished() {
            s.advance();
            n += 1;
        }
        if s.finished() {
            s.apply_due();
        }
        if !advanced.is_null() {
            *advanced = n;
        }
        UrbsimStatus::Ok
    })
}

/// Apply a command given in the wire format, for example
/// `{"type":"bar_edge","edge":3}`. Pacing commands are rejected.
///
/// # Safety
/// `sim` must be a live handle and `command_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn urbsim_sim_apply(sim: *mut UrbsimSim, command_json: *const c_char) -> UrbsimStatus {
    guard(|| {
        let s = &mut tri!(self::sim(sim)).session;
        let cmd = tri!(parse_client_message(tri!(text(command_json))).map_err(|(_, m)| fail(UrbsimStatus::Command, m)));
        tri!(apply_command(&mut s.world, &cmd.command, &s.crisis).map_err(|e| fail(UrbsimStatus::Command, e.to_string())));
        UrbsimStatus::Ok
    })
}

/// Counters readable through [`urbsim_sim_stats`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UrbsimStats {
    pub tick: u64,
    /// Tick at which the configured duration is reached.
    pub end_tick: u64,
    pub in_network: u64,
    pub queued: u64,
    pub spawned: u64,
    pub arrived: u64,
    pub exited: u64,
    pub stranded: u64,
    pub hash: u64,
}

/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn urbsim_sim_stats(sim: *const UrbsimSim, out: *mut UrbsimStats) -> UrbsimStatus {
    guard(|| {
        let s = &tri!(self::sim(sim as *mut UrbsimSim)).session;
        if out.is_null() {
            return fail(UrbsimStatus::NullPointer, "null out pointer");
        }
        let w = &s.world;
        let c = w.counters();
        *out = UrbsimStats {
            tick: w.tick(),
            end_tick: s.end_tick,
            in_network: w.vehicle_count() as u64,
            queued: w.queued_trips() as u64,
            spawned: c.spawned,
            arrived: c.arrived,
            exited: c.exited,
            stranded: w.stranded_count() as u64,
            hash: w.hash(),
        };
        UrbsimStatus::Ok
    })
}

/// Current state as a snapshot message, the same JSON the live service
/// broadcasts. Free the result with [`urbsim_string_free`].
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn urbsim_sim_snapshot_json(sim: *const UrbsimSim, max_vehicles: u64, out: *mut *mut c_char) -> UrbsimStatus {
    guard(|| {
        let s = &tri!(self::sim(sim as *mut UrbsimSim)).session;
        if out.is_null() {
            return fail(UrbsimStatus::NullPointer, "null out pointer");
        }
        let snap = Snapshot::capture(&s.world, max_vehicles as usize, false);
        let json = ServerMessage::Snapshot(Box::new(snap)).to_json();
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        UrbsimStatus::Ok
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn urbsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
