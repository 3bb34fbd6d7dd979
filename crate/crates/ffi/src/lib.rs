//! C ABI over the experiment runner.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free`. Every fallible call returns a status code and, on
//! failure, stores a message readable through [`pamdp_last_error`] on the
//! same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use pamdp::harness::{self, ExperimentConfig, ExperimentRecord, SeedRunner};
use pamdp::Error;

pub const PAMDP_OK: i32 = 0;
pub const PAMDP_ERR_NULL: i32 = 1;
pub const PAMDP_ERR_UTF8: i32 = 2;
pub const PAMDP_ERR_CONFIG: i32 = 3;
pub const PAMDP_ERR_CONTRACT: i32 = 4;
pub const PAMDP_ERR_SOLVER: i32 = 5;
pub const PAMDP_ERR_IO: i32 = 6;
pub const PAMDP_ERR_JSON: i32 = 7;
pub const PAMDP_ERR_RANGE: i32 = 8;
pub const PAMDP_ERR_PANIC: i32 = 9;
/// Returned by `pamdp_session_step` once every episode has been played.
pub const PAMDP_DONE: i32 = 10;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Config(_) => PAMDP_ERR_CONFIG,
        Error::Contract(_) => PAMDP_ERR_CONTRACT,
        Error::Solver { .. } => PAMDP_ERR_SOLVER,
        Error::Io(_) => PAMDP_ERR_IO,
        Error::Json(_) => PAMDP_ERR_JSON,
    }
}

struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(code_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<i32, Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(code)) => code,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            set_error(format!("panic: {}", msg.unwrap_or_else(|| "unknown".into())));
            PAMDP_ERR_PANIC
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PAMDP_ERR_NULL, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(PAMDP_ERR_UTF8, format!("{what}: {e}")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pamdp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// One episode of a session, 1-based `k`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PamdpEpisode {
    pub k: usize,
    pub learner_value: f64,
    pub sampled_loss: f64,
    pub cum_loss: f64,
    pub benchmark_cum: f64,
    pub regret: f64,
}

/// A single seed's episode loop.
pub struct PamdpSession {
    runner: SeedRunner,
}

/// The finished runs of every seed in a config.
pub struct PamdpRecord {
    rec: ExperimentRecord,
}

/// Builds a session from experiment JSON; the config's seed list is ignored
/// in favour of `seed`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pamdp_session_new(config_json: *const c_char, seed: u64, out: *mut *mut PamdpSession) -> i32 {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let out = out_arg(out, "out")?;
        let cfg = ExperimentConfig::parse(text)?;
        let runner = SeedRunner::new(&cfg, seed)?;
        *out = Box::into_raw(Box::new(PamdpSession { runner }));
        Ok(PAMDP_OK)
    })
}

/// Plays one episode. Returns `PAMDP_DONE` without touching `out` when the
/// session is exhausted.
///
/// # Safety
/// `session` must come from `pamdp_session_new`; `out` may be null.
#[no_mangle]
pub unsafe extern "C" fn pamdp_session_step(session: *mut PamdpSession, out: *mut PamdpEpisode) -> i32 {
    guard(|| {
        let s = session.as_mut().ok_or_else(|| null("session"))?;
        match s.runner.step()? {
            None => Ok(PAMDP_DONE),
            Some(r) => {
                if let Some(o) = out.as_mut() {
                    *o = PamdpEpisode {
                        k: r.k,
                        learner_value: r.learner_value,
                        sampled_loss: r.sampled_loss,
                        cum_loss: r.cum_loss,
                        benchmark_cum: r.benchmark_cum,
                        regret: r.regret,
                    };
                }
                Ok(PAMDP_OK)
            }
        }
    })
}

/// Episodes played so far.
///
/// # Safety
/// `session` must come from `pamdp_session_new`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pamdp_session_episodes(session: *const PamdpSession, out: *mut usize) -> i32 {
    guard(|| {
        let s = session.as_ref().ok_or_else(|| null("session"))?;
        *out_arg(out, "out")? = s.runner.done();
        Ok(PAMDP_OK)
    })
}

/// # Safety
/// `session` must come from `pamdp_session_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pamdp_session_free(session: *mut PamdpSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Runs every seed of an experiment config.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pamdp_run(config_json: *const c_char, out: *mut *mut PamdpRecord) -> i32 {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let out = out_arg(out, "out")?;
        let cfg = ExperimentConfig::parse(text)?;
        let rec = harness::run(&cfg)?;
        *out = Box::into_raw(Box::new(PamdpRecord { rec }));
        Ok(PAMDP_OK)
    })
}

/// Number of seeds and episodes per seed.
///
/// # Safety
/// `record` must come from `pamdp_run`; `seeds` and `episodes` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pamdp_record_dims(record: *const PamdpRecord, seeds: *mut usize, episodes: *mut usize) -> i32 {
    guard(|| {
        let r = record.as_ref().ok_or_else(|| null("record"))?;
        *out_arg(seeds, "seeds")? = r.rec.seeds.len();
        *out_arg(episodes, "episodes")? = r.rec.config.k;
        Ok(PAMDP_OK)
    })
}

/// Copies `R_1..R_K` of seed number `seed_index` into `buf[0..len]`;
/// `len` must be at least `K`.
///
/// # Safety
/// `record` must come from `pamdp_run`; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pamdp_record_regret(record: *const PamdpRecord, seed_index: usize, buf: *mut f64, len: usize) -> i32 {
    guard(|| {
        let r = record.as_ref().ok_or_else(|| null("record"))?;
        let Some(s) = r.rec.seeds.get(seed_index) else {
            return Err(Fail(PAMDP_ERR_RANGE, format!("seed index {seed_index} out of range")));
        };
        if len < s.rows.len() {
            return Err(Fail(PAMDP_ERR_RANGE, format!("buffer holds {len} values, need {}", s.rows.len())));
        }
        if buf.is_null() && !s.rows.is_empty() {
            return Err(null("buf"));
        }
        for (i, row) in s.rows.iter().enumerate() {
            *buf.add(i) = row.regret;
        }
        Ok(PAMDP_OK)
    })
}

/// Mean final regret over seeds and its 95% half-width.
///
/// # Safety
/// `record` must come from `pamdp_run`; `mean` and `ci95` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pamdp_record_final_regret(record: *const PamdpRecord, mean: *mut f64, ci95: *mut f64) -> i32 {
    guard(|| {
        let r = record.as_ref().ok_or_else(|| null("record"))?;
        *out_arg(mean, "mean")? = r.rec.summary.mean_final_regret;
        *out_arg(ci95, "ci95")? = r.rec.summary.ci95;
        Ok(PAMDP_OK)
    })
}

/// Writes the run CSV to `path`.
///
/// # Safety
/// `record` must come from `pamdp_run`; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pamdp_record_write_csv(record: *const PamdpRecord, path: *const c_char) -> i32 {
    guard(|| {
        let r = record.as_ref().ok_or_else(|| null("record"))?;
        let p = str_arg(path, "path")?;
        let f = std::fs::File::create(Path::new(p)).map_err(Error::from)?;
        r.rec.write_csv(std::io::BufWriter::new(f))?;
        Ok(PAMDP_OK)
    })
}

/// # Safety
/// `record` must come from `pamdp_run` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pamdp_record_free(record: *mut PamdpRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Log-log slope of `regret[i] = R_{i+1}` over `k >= kmin`.
///
/// # Safety
/// `regret` must hold `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pamdp_slope(regret: *const f64, n: usize, kmin: usize, out: *mut f64) -> i32 {
    guard(|| {
        if regret.is_null() && n > 0 {
            return Err(null("regret"));
        }
        let vals = if n == 0 { &[][..] } else { std::slice::from_raw_parts(regret, n) };
        let pts: Vec<(usize, f64)> = vals.iter().enumerate().map(|(i, &r)| (i + 1, r)).collect();
        *out_arg(out, "out")? = harness::slope(&pts, kmin)?;
        Ok(PAMDP_OK)
    })
}
