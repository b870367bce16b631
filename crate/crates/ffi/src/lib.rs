//! C interface to the streaming engine.
//!
//! A session is an opaque `EpSession*`. Feed it PCM16 with
//! `ep_session_push_pcm`, end it with `ep_session_finish`, and drain the
//! finished event-log lines with `ep_session_next_event`. Every call
//! returns an `EpStatus`; on failure `ep_last_error` describes the cause
//! for the calling thread.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use earpace_core::audio::pcm_to_f32;
use earpace_core::eventlog::EventLogRecord;
use earpace_core::pace::swallow_predicate;
use earpace_core::{Pipeline, SessionConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    InvalidArgument = 3,
    Pipeline = 4,
    AlreadyFinished = 5,
    NoEvent = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque session handle.
pub struct EpSession {
    pipeline: Pipeline,
    queue: VecDeque<CString>,
    finished: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl ToString) {
    let msg = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: EpStatus, msg: impl ToString) -> EpStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> EpStatus) -> EpStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(EpStatus::Panic, "internal panic"))
}

fn enqueue(queue: &mut VecDeque<CString>, records: Vec<EventLogRecord>) {
    for r in records {
        queue.push_back(CString::new(r.render()).expect("rendered JSON has no NUL"));
    }
}

/// Create a session. `config_text` is an optional `key = value` config
/// (NULL for defaults); `seed` always overrides its `rng_seed`.
///
/// # Safety
/// `config_text` must be NULL or a valid NUL-terminated string; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_session_new(config_text: *const c_char, seed: u64, out: *mut *mut EpSession) -> EpStatus {
    guard(|| {
        if out.is_null() {
            return fail(EpStatus::NullPointer, "out is NULL");
        }
        *out = ptr::null_mut();
        let mut config = if config_text.is_null() {
            SessionConfig::default()
        } else {
            let text = match CStr::from_ptr(config_text).to_str() {
                Ok(t) => t,
                Err(_) => return fail(EpStatus::InvalidArgument, "config is not UTF-8"),
            };
            match SessionConfig::parse_str(text) {
                Ok(c) => c,
                Err(e) => return fail(EpStatus::InvalidConfig, e),
            }
        };
        config.rng_seed = seed;
        let pipeline = match Pipeline::with_defaults(config) {
            Ok(p) => p,
            Err(e) => return fail(EpStatus::InvalidConfig, e),
        };
        let session = Box::new(EpSession { pipeline, queue: VecDeque::new(), finished: false });
        *out = Box::into_raw(session);
        EpStatus::Ok
    })
}

/// Push `len` mono 16 kHz PCM16 samples.
///
/// # Safety
/// `session` must come from `ep_session_new`; `samples` must point to
/// `len` readable values (may be NULL when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn ep_session_push_pcm(session: *mut EpSession, samples: *const i16, len: usize) -> EpStatus {
    guard(|| {
        let Some(s) = session.as_mut() else {
            return fail(EpStatus::NullPointer, "session is NULL");
        };
        if s.finished {
            return fail(EpStatus::AlreadyFinished, "session already finished");
        }
        if len == 0 {
            return EpStatus::Ok;
        }
        if samples.is_null() {
            return fail(EpStatus::NullPointer, "samples is NULL");
        }
        let floats: Vec<f32> = std::slice::from_raw_parts(samples, len).iter().map(|&x| pcm_to_f32(x)).collect();
        match s.pipeline.push_samples(&floats) {
            Ok(records) => {
                enqueue(&mut s.queue, records);
                EpStatus::Ok
            }
            Err(e) => fail(EpStatus::Pipeline, e),
        }
    })
}

/// End of stream: flushes the last window and queues the summary.
///
/// # Safety
/// `session` must come from `ep_session_new`.
#[no_mangle]
pub unsafe extern "C" fn ep_session_finish(session: *mut EpSession) -> EpStatus {
    guard(|| {
        let Some(s) = session.as_mut() else {
            return fail(EpStatus::NullPointer, "session is NULL");
        };
        if s.finished {
            return fail(EpStatus::AlreadyFinished, "session already finished");
        }
        s.finished = true;
        match s.pipeline.finish() {
            Ok((records, _)) => {
                enqueue(&mut s.queue, records);
                EpStatus::Ok
            }
            Err(e) => fail(EpStatus::Pipeline, e),
        }
    })
}

/// Number of event-log lines waiting to be read.
///
/// # Safety
/// `session` must be NULL or come from `ep_session_new`.
#[no_mangle]
pub unsafe extern "C" fn ep_session_pending_events(session: *const EpSession) -> usize {
    session.as_ref().map_or(0, |s| s.queue.len())
}

/// Copy the next event-log line (JSON, NUL-terminated, no newline) into
/// `buf`. `*needed` receives the required size including the NUL. When
/// `cap` is too small nothing is consumed and `EP_STATUS_BUFFER_TOO_SMALL`
/// is returned.
///
/// # Safety
/// `session` must come from `ep_session_new`; `buf` must hold `cap` bytes
/// (may be NULL when `cap` is 0); `needed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ep_session_next_event(
    session: *mut EpSession,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> EpStatus {
    guard(|| {
        let Some(s) = session.as_mut() else {
            return fail(EpStatus::NullPointer, "session is NULL");
        };
        let Some(line) = s.queue.front() else {
            return EpStatus::NoEvent;
        };
        let bytes = line.as_bytes_with_nul();
        if !needed.is_null() {
            *needed = bytes.len();
        }
        if buf.is_null() || cap < bytes.len() {
            return EpStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
        s.queue.pop_front();
        EpStatus::Ok
    })
}

/// Release a session. NULL is ignored.
///
/// # Safety
/// `session` must be NULL or come from `ep_session_new` and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn ep_session_free(session: *mut EpSession) {
    if !session.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(session))));
    }
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Swallow test for one inter-chew gap under the default thresholds.
/// Pass a negative or NaN `mean_gap_s` when no gap history exists.
/// Returns 1 for a swallow, 0 otherwise.
#[no_mangle]
pub extern "C" fn ep_swallow_predicate(gap_s: f64, mean_gap_s: f64) -> i32 {
    let mean = (mean_gap_s >= 0.0).then_some(mean_gap_s);
    swallow_predicate(gap_s, mean, &SessionConfig::default()) as i32
}

/// Library version, static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
