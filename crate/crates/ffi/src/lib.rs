//! C interface to `eprsim`.
//!
//! Objects are opaque and heap-allocated: every `*_new`/`*_load`/`*_compute`
//! has a matching `*_free`. Functions return an [`EprsimStatus`]; on failure
//! a message is kept per thread and can be copied out with
//! [`eprsim_last_error_message`]. Panics never cross the boundary; they
//! come back as [`EprsimStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use eprsim::cli::{cmd_compare, cmd_marginals, cmd_run, CliError, RunSpec, StateFixture};
use eprsim::experiment::{parse_config, sweep_pattern, AliceSetting, ExperimentConfig, SpdcState};
use eprsim::measurement::MeasurementRule;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprsimStatus {
    Ok = 0,
    NullPointer = 1,
    /// Unreadable or malformed config.
    Config = 2,
    InvalidParameter = 3,
    InvalidRun = 4,
    Io = 5,
    Internal = 6,
    BufferTooSmall = 7,
    Utf8 = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprsimAlice {
    Focal = 0,
    OffFocalL = 1,
    OffFocalM = 2,
    OffFocalSum = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprsimRule {
    VonNeumannOffFocal = 0,
    LuedersFocal = 1,
    CoherentFocal = 2,
}

/// Opaque experiment configuration.
pub struct EprsimConfig {
    inner: ExperimentConfig,
}

/// Opaque screen pattern.
pub struct EprsimPattern {
    positions: Vec<f64>,
    values: Vec<f64>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EprsimMarginals {
    pub trace_dist: f64,
    pub helstrom_success: f64,
    pub trace_dist_lueders: f64,
    pub rho_f_largest_eigenvalue: f64,
    pub rho_g_largest_eigenvalue: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EprsimComparison {
    pub n_bins: usize,
    pub max_rel_dev_coherent: f64,
    pub lueders_spread: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EprsimRunSummary {
    pub trials: u64,
    pub ones: u64,
    pub intended_bit: u8,
    pub bit_error_rate: f64,
    pub mean_visibility: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: EprsimStatus, msg: impl Into<String>) -> EprsimStatus {
    set_error(msg);
    status
}

fn from_cli(e: CliError) -> EprsimStatus {
    let status = match e.exit_code() {
        2 => EprsimStatus::Config,
        3 => EprsimStatus::InvalidParameter,
        4 => EprsimStatus::InvalidRun,
        _ => match e {
            CliError::Io(_) => EprsimStatus::Io,
            _ => EprsimStatus::Internal,
        },
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into [`EprsimStatus::Panic`].
fn guard(f: impl FnOnce() -> EprsimStatus) -> EprsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == EprsimStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(EprsimStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, EprsimStatus> {
    if p.is_null() {
        return Err(fail(EprsimStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EprsimStatus::Utf8, "string argument is not UTF-8"))
}

/// Copies `s` NUL-terminated into `buf`; the needed size (with NUL) goes to
/// `needed` when non-null.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> EprsimStatus {
    if !needed.is_null() {
        *needed = s.len() + 1;
    }
    if buf.is_null() || len < s.len() + 1 {
        return EprsimStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, s.len());
    *buf.add(s.len()) = 0;
    EprsimStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eprsim_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf`.
///
/// # Safety
/// `buf` must point to `len` writable bytes or be null; `needed` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn eprsim_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> EprsimStatus {
    LAST_ERROR.with(|e| copy_out(&e.borrow(), buf, len, needed))
}

/// Default configuration. Never null.
#[no_mangle]
pub extern "C" fn eprsim_config_new() -> *mut EprsimConfig {
    Box::into_raw(Box::new(EprsimConfig {
        inner: ExperimentConfig::default(),
    }))
}

/// Parses config text (`key = value` lines) and validates it.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eprsim_config_parse(source: *const c_char, out: *mut *mut EprsimConfig) -> EprsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(EprsimStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let t = match text(source) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cfg = match parse_config(t) {
            Ok(c) => c,
            Err(e) => return from_cli(e.into()),
        };
        if let Err(e) = cfg.validate() {
            return from_cli(e.into());
        }
        *out = Box::into_raw(Box::new(EprsimConfig { inner: cfg }));
        EprsimStatus::Ok
    })
}

/// Reads and validates a config file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eprsim_config_load(path: *const c_char, out: *mut *mut EprsimConfig) -> EprsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(EprsimStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let p = match text(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let cfg = match eprsim::experiment::load_config(Path::new(p)) {
            Ok(c) => c,
            Err(e) => return from_cli(e.into()),
        };
        if let Err(e) = cfg.validate() {
            return from_cli(e.into());
        }
        *out = Box::into_raw(Box::new(EprsimConfig { inner: cfg }));
        EprsimStatus::Ok
    })
}

/// Sets one key. The config is left unchanged if the result would not
/// validate.
///
/// # Safety
/// `cfg` must come from this library; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn eprsim_config_set(
    cfg: *mut EprsimConfig,
    key: *const c_char,
    value: *const c_char,
) -> EprsimStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(EprsimStatus::NullPointer, "null config");
        };
        let (k, v) = match (text(key), text(value)) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let mut candidate = cfg.inner.clone();
        let set = if k == "epsilon" {
            v.trim()
                .parse()
                .map(|e| candidate.epsilon = e)
                .map_err(|_| format!("not a number: {v:?}"))
        } else {
            candidate.geometry.set(k, v.trim())
        };
        if let Err(m) = set {
            return fail(EprsimStatus::Config, format!("{k}: {m}"));
        }
        if let Err(e) = candidate.validate() {
            return from_cli(e.into());
        }
        cfg.inner = candidate;
        EprsimStatus::Ok
    })
}

/// Canonical config text, as accepted by [`eprsim_config_parse`].
///
/// # Safety
/// `cfg` must come from this library; see [`eprsim_last_error_message`]
/// for the buffer contract.
#[no_mangle]
pub unsafe extern "C" fn eprsim_config_text(
    cfg: *const EprsimConfig,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> EprsimStatus {
    guard(|| match cfg.as_ref() {
        Some(c) => copy_out(&c.inner.to_config_text(), buf, len, needed),
        None => fail(EprsimStatus::NullPointer, "null config"),
    })
}

/// 16 hex digits identifying the config.
///
/// # Safety
/// As for [`eprsim_config_text`].
#[no_mangle]
pub unsafe extern "C" fn eprsim_config_hash(
    cfg: *const EprsimConfig,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> EprsimStatus {
    guard(|| match cfg.as_ref() {
        Some(c) => copy_out(&c.inner.hash(), buf, len, needed),
        None => fail(EprsimStatus::NullPointer, "null config"),
    })
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn eprsim_config_free(cfg: *mut EprsimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

fn alice(a: EprsimAlice) -> AliceSetting {
    match a {
        EprsimAlice::Focal => AliceSetting::Focal,
        EprsimAlice::OffFocalL => AliceSetting::OffFocalL,
        EprsimAlice::OffFocalM => AliceSetting::OffFocalM,
        EprsimAlice::OffFocalSum => AliceSetting::OffFocalSum,
    }
}

fn rule(r: EprsimRule) -> MeasurementRule {
    match r {
        EprsimRule::VonNeumannOffFocal => MeasurementRule::VonNeumannOffFocal,
        EprsimRule::LuedersFocal => MeasurementRule::LuedersFocal,
        EprsimRule::CoherentFocal => MeasurementRule::CoherentFocal,
    }
}

/// Raw analytic coincidence pattern on the configured screen grid.
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eprsim_pattern_compute(
    cfg: *const EprsimConfig,
    setting: EprsimAlice,
    out: *mut *mut EprsimPattern,
) -> EprsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(EprsimStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(cfg) = cfg.as_ref() else {
            return fail(EprsimStatus::NullPointer, "null config");
        };
        let result = SpdcState::new(cfg.inner.epsilon)
            .and_then(|s| sweep_pattern(&s, &cfg.inner.geometry, alice(setting)));
        match result {
            Ok(p) => {
                *out = Box::into_raw(Box::new(EprsimPattern {
                    positions: p.positions().to_vec(),
                    values: p.values().to_vec(),
                }));
                EprsimStatus::Ok
            }
            Err(e) => from_cli(e.into()),
        }
    })
}

/// Number of screen points; 0 for null.
///
/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn eprsim_pattern_len(p: *const EprsimPattern) -> usize {
    p.as_ref().map_or(0, |p| p.values.len())
}

/// Screen positions in meters, `eprsim_pattern_len` entries, owned by the
/// pattern. Null for a null pattern.
///
/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn eprsim_pattern_positions(p: *const EprsimPattern) -> *const f64 {
    p.as_ref().map_or(ptr::null(), |p| p.positions.as_ptr())
}

/// Rates, `eprsim_pattern_len` entries, owned by the pattern.
///
/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn eprsim_pattern_values(p: *const EprsimPattern) -> *const f64 {
    p.as_ref().map_or(ptr::null(), |p| p.values.as_ptr())
}

/// # Safety
/// `p` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn eprsim_pattern_free(p: *mut EprsimPattern) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn summary(r: &eprsim::cli::Report, key: &str) -> f64 {
    r.summary_value(key).and_then(|c| c.as_f64()).unwrap_or(f64::NAN)
}

/// Bob's marginals for the entangled pair (`product == 0`) or for `|HH⟩`.
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eprsim_marginals(
    cfg: *const EprsimConfig,
    product: bool,
    out: *mut EprsimMarginals,
) -> EprsimStatus {
    guard(|| {
        let (Some(cfg), Some(out)) = (cfg.as_ref(), out.as_mut()) else {
            return fail(EprsimStatus::NullPointer, "null argument");
        };
        let fixture = if product { StateFixture::Product } else { StateFixture::Singlet };
        match cmd_marginals(&cfg.inner, fixture) {
            Ok(r) => {
                *out = EprsimMarginals {
                    trace_dist: summary(&r, "trace_dist"),
                    helstrom_success: summary(&r, "helstrom_success"),
                    trace_dist_lueders: summary(&r, "trace_dist_lueders"),
                    rho_f_largest_eigenvalue: summary(&r, "rho_f_largest_eigenvalue"),
                    rho_g_largest_eigenvalue: summary(&r, "rho_g_largest_eigenvalue"),
                };
                EprsimStatus::Ok
            }
            Err(e) => from_cli(e),
        }
    })
}

/// Field route against the measurement route on the screen grid.
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eprsim_compare(cfg: *const EprsimConfig, out: *mut EprsimComparison) -> EprsimStatus {
    guard(|| {
        let (Some(cfg), Some(out)) = (cfg.as_ref(), out.as_mut()) else {
            return fail(EprsimStatus::NullPointer, "null argument");
        };
        match cmd_compare(&cfg.inner) {
            Ok(r) => {
                *out = EprsimComparison {
                    n_bins: cfg.inner.geometry.n_bins,
                    max_rel_dev_coherent: summary(&r, "max_rel_dev_coherent"),
                    lueders_spread: summary(&r, "lueders_spread"),
                };
                EprsimStatus::Ok
            }
            Err(e) => from_cli(e),
        }
    })
}

/// Seeded Monte Carlo trials with the default decoder window.
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eprsim_run(
    cfg: *const EprsimConfig,
    measurement_rule: EprsimRule,
    n_events: u64,
    seed: u64,
    trials: u64,
    threshold: f64,
    out: *mut EprsimRunSummary,
) -> EprsimStatus {
    guard(|| {
        let (Some(cfg), Some(out)) = (cfg.as_ref(), out.as_mut()) else {
            return fail(EprsimStatus::NullPointer, "null argument");
        };
        let mut spec = RunSpec::new(rule(measurement_rule), n_events, seed, trials);
        spec.threshold = threshold;
        match cmd_run(&cfg.inner, &spec, None) {
            Ok(r) => {
                *out = EprsimRunSummary {
                    trials: summary(&r, "trials") as u64,
                    ones: summary(&r, "ones") as u64,
                    intended_bit: summary(&r, "intended_bit") as u8,
                    bit_error_rate: summary(&r, "bit_error_rate"),
                    mean_visibility: summary(&r, "mean_visibility"),
                };
                EprsimStatus::Ok
            }
            Err(e) => from_cli(e),
        }
    })
}
