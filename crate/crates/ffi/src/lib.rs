//! C ABI for the nssar simulator.
//!
//! Objects are opaque handles created and destroyed through this interface.
//! Every fallible call returns an [`NssarStatus`]; on failure a message is
//! kept per thread and can be copied out with
//! [`nssar_last_error_message`]. Panics never cross the boundary.
//!
//! # Safety
//!
//! Pointer arguments must be null or point to valid memory of the stated
//! type and length. Strings are NUL-terminated UTF-8. Handles must come from
//! the matching `_new`/`_parse` call and must not be used after `_free`.

#![allow(clippy::missing_safety_doc)]

use nssar::analytic::precision;
use nssar::config::{parse_config, RunConfig};
use nssar::experiment::{prepared_state, simulate};
use nssar::modulator::{ntf_probe, ModulatorState};
use nssar::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NssarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParam = 2,
    Config = 3,
    Domain = 4,
    Analysis = 5,
    Io = 6,
    Utf8 = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Run configuration handle.
pub struct NssarConfig(RunConfig);

/// Modulator channel handle.
pub struct NssarModulator(ModulatorState);

/// Analytic noise budget, powers in V².
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NssarBudget {
    pub snp: f64,
    pub qnp: f64,
    pub mnp: f64,
    pub sndr_db: f64,
    pub enob_bits: f64,
}

/// Metrics of one simulated trial. Fields that do not apply are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NssarMetrics {
    pub sndr_db: f64,
    pub sfdr_db: f64,
    pub enob_bits: f64,
    pub fom_s_db: f64,
    pub decimated_sndr_db: f64,
    pub residual_mismatch_std: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> NssarStatus {
    match e {
        Error::InvalidParam { .. } => NssarStatus::InvalidParam,
        Error::Domain(_) | Error::NothingToSweep => NssarStatus::Domain,
        Error::Config { .. } => NssarStatus::Config,
        Error::Analysis(_) => NssarStatus::Analysis,
        Error::Io(_) => NssarStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (NssarStatus, String)>) -> NssarStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NssarStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NssarStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (NssarStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NssarStatus, String) {
    (NssarStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NssarStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NssarStatus::Utf8, format!("{what} is not UTF-8")))
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string. Returns the buffer size needed, including the NUL;
/// nothing is written when `buf` is null or `len` is too small.
#[no_mangle]
pub unsafe extern "C" fn nssar_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let need = msg.len() + 1;
        if !buf.is_null() && len >= need {
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, msg.len());
            *buf.add(msg.len()) = 0;
        }
        need
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nssar_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// New configuration holding the defaults. Free with [`nssar_config_free`].
#[no_mangle]
pub extern "C" fn nssar_config_new() -> *mut NssarConfig {
    Box::into_raw(Box::new(NssarConfig(RunConfig::default())))
}

/// Parses `section.key = value` text into a new configuration.
#[no_mangle]
pub unsafe extern "C" fn nssar_config_parse(text: *const c_char, out: *mut *mut NssarConfig) -> NssarStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = as_str(text, "text")?;
        let cfg = parse_config(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NssarConfig(cfg)));
        Ok(())
    })
}

/// Sets one key. The configuration is validated as a whole on use.
#[no_mangle]
pub unsafe extern "C" fn nssar_config_set(
    cfg: *mut NssarConfig,
    key: *const c_char,
    value: *const c_char,
) -> NssarStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let key = as_str(key, "key")?;
        let value = as_str(value, "value")?;
        cfg.0.set(key, value).map_err(lib_err)
    })
}

/// Copies the 16-digit configuration hash into `buf` (17 bytes with NUL).
#[no_mangle]
pub unsafe extern "C" fn nssar_config_hash(cfg: *const NssarConfig, buf: *mut c_char, len: usize) -> NssarStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let h = cfg.0.hash();
        if len < h.len() + 1 {
            return Err((NssarStatus::BufferTooSmall, format!("need {} bytes", h.len() + 1)));
        }
        ptr::copy_nonoverlapping(h.as_ptr(), buf as *mut u8, h.len());
        *buf.add(h.len()) = 0;
        Ok(())
    })
}

/// Frees a configuration; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nssar_config_free(cfg: *mut NssarConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Analytic noise budget of the configured design.
#[no_mangle]
pub unsafe extern "C" fn nssar_precision(cfg: *const NssarConfig, out: *mut NssarBudget) -> NssarStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        cfg.0.design.validate().map_err(lib_err)?;
        let b = precision(&cfg.0.design);
        *out = NssarBudget { snp: b.snp, qnp: b.qnp, mnp: b.mnp, sndr_db: b.sndr_db, enob_bits: b.enob_bits };
        Ok(())
    })
}

/// Runs one full trial (calibration, conversion, analysis) with `seed`.
#[no_mangle]
pub unsafe extern "C" fn nssar_simulate(cfg: *const NssarConfig, seed: u64, out: *mut NssarMetrics) -> NssarStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let o = simulate(&cfg.0, seed).map_err(lib_err)?;
        let m = o.metrics.as_ref();
        *out = NssarMetrics {
            sndr_db: m.map_or(f64::NAN, |m| m.sndr_db),
            sfdr_db: m.map_or(f64::NAN, |m| m.sfdr_db),
            enob_bits: m.map_or(f64::NAN, |m| m.enob_bits),
            fom_s_db: m.and_then(|m| m.fom_s_db).unwrap_or(f64::NAN),
            decimated_sndr_db: o.decimated.as_ref().map_or(f64::NAN, |d| d.sndr_db),
            residual_mismatch_std: o.calibration.as_ref().map_or(f64::NAN, |c| c.residual_std),
        };
        Ok(())
    })
}

/// New modulator for the configuration and seed, calibrated or loaded with
/// trims as configured. Free with [`nssar_modulator_free`].
#[no_mangle]
pub unsafe extern "C" fn nssar_modulator_new(
    cfg: *const NssarConfig,
    seed: u64,
    out: *mut *mut NssarModulator,
) -> NssarStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        cfg.0.validate().map_err(lib_err)?;
        let (state, _) = prepared_state(&cfg.0, seed).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NssarModulator(state)));
        Ok(())
    })
}

/// Converts one input sample in volts; writes the output code (signed LSBs).
#[no_mangle]
pub unsafe extern "C" fn nssar_modulator_convert(m: *mut NssarModulator, v_in: f64, code: *mut i64) -> NssarStatus {
    guard(|| {
        let m = m.as_mut().ok_or_else(|| null("modulator"))?;
        let code = code.as_mut().ok_or_else(|| null("code"))?;
        if !v_in.is_finite() {
            return Err((NssarStatus::InvalidParam, "v_in must be finite".into()));
        }
        *code = m.0.convert_sample(v_in).output_code;
        Ok(())
    })
}

/// Converts `n` samples from `input` into `codes`.
#[no_mangle]
pub unsafe extern "C" fn nssar_modulator_convert_block(
    m: *mut NssarModulator,
    input: *const f64,
    codes: *mut i64,
    n: usize,
) -> NssarStatus {
    guard(|| {
        let m = m.as_mut().ok_or_else(|| null("modulator"))?;
        if n == 0 {
            return Ok(());
        }
        if input.is_null() || codes.is_null() {
            return Err(null("buffer"));
        }
        let input = std::slice::from_raw_parts(input, n);
        let codes = std::slice::from_raw_parts_mut(codes, n);
        if input.iter().any(|v| !v.is_finite()) {
            return Err((NssarStatus::InvalidParam, "input samples must be finite".into()));
        }
        for (c, &v) in codes.iter_mut().zip(input) {
            *c = m.0.convert_sample(v).output_code;
        }
        Ok(())
    })
}

/// Quantiser LSB of the modulator, V; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nssar_modulator_lsb(m: *const NssarModulator) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.0.lsb())
}

/// Writes the first `len` taps of the loop's error-transfer impulse response.
#[no_mangle]
pub unsafe extern "C" fn nssar_modulator_ntf(m: *const NssarModulator, taps: *mut f64, len: usize) -> NssarStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("modulator"))?;
        if len == 0 {
            return Ok(());
        }
        if taps.is_null() {
            return Err(null("taps"));
        }
        let h = ntf_probe(&m.0, len);
        std::slice::from_raw_parts_mut(taps, len).copy_from_slice(&h);
        Ok(())
    })
}

/// Frees a modulator; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nssar_modulator_free(m: *mut NssarModulator) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
