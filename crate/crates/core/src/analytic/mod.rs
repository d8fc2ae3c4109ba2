//! Closed-form noise budget of the noise-shaping SAR converter.
//!
//! Three in-band noise powers are modelled, all in V² over the signal band
//! `fs/(2·OSR)`:
//!
//! * sampling noise, `kT/C_T · 2.4/OSR`;
//! * SAR settling plus quantisation error shaped by an order-`M` loop,
//!   `(V²·e^(−3τ) + V²/2^(2N)) · π^(2M) / (12·(1+2M)·OSR^(1+2M))`;
//! * capacitor mismatch of the DWA-driven MSB array (calibrated to `D` bits)
//!   and the MES-driven LSB arrays (shaping order `E`),
//!   `(π²·2^(−2D)/(3·2^K·OSR³) + π^(2E)·2^(−2K)/((1+2E)·OSR^(1+2E))) · σ²V²/3`.
//!
//! Signal power is the full-scale single-ended sine, `V_DD²/8`.

mod optimize;
mod sweep;

pub use optimize::{optimize_config, Candidate, OptimizeOutcome, PowerModel, SearchSpace};
pub use sweep::{sweep, sweep_terms, ParamOverride, SweepCurve, SweepPreset, Variant};

use crate::error::{Error, Result};
use crate::units::{enob, power_ratio_db, BOLTZMANN, DEFAULT_TEMPERATURE};
use std::f64::consts::PI;

/// Thermal-noise correction factor of the switched-capacitor integrator.
pub const SAMPLING_NOISE_FACTOR: f64 = 2.4;

/// Full analytic parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignParams {
    /// Total sampling capacitance, F.
    pub c_total: f64,
    pub osr: u32,
    /// SAR quantiser resolution.
    pub sar_bits: u32,
    /// Loop-filter (noise-shaping) order.
    pub ns_order: u32,
    /// DAC settling time in time constants per bit trial.
    pub settle_tau: f64,
    /// Thermometer-coded MSB bits.
    pub msb_bits: u32,
    /// Effective calibration accuracy of each MSB element, bits.
    pub cal_bits: u32,
    /// Mismatch-error-shaping order of the LSB arrays, 0..=2.
    pub mes_order: u32,
    /// Relative standard deviation of a unit capacitor.
    pub cap_sigma: f64,
    /// Reference / supply voltage, V.
    pub vdd: f64,
    /// Absolute temperature, K.
    pub temperature: f64,
    /// Internal conversion rate, Hz.
    pub fs: f64,
}

impl Default for DesignParams {
    /// The proposed configuration with a 4-bit (15-element) MSB array, which
    /// is what the calibration hardware trims.
    fn default() -> Self {
        Self {
            msb_bits: 4,
            ..Self::proposed()
        }
    }
}

impl DesignParams {
    /// The configuration chosen for an 18-bit target: 50 pF, second-order
    /// loop, τ = 5, K = 5, D = 4, E = 2, OSR = 16.
    pub fn proposed() -> Self {
        Self {
            c_total: 50e-12,
            osr: 16,
            sar_bits: 10,
            ns_order: 2,
            settle_tau: 5.0,
            msb_bits: 5,
            cal_bits: 4,
            mes_order: 2,
            cap_sigma: 0.005,
            vdd: 1.8,
            temperature: DEFAULT_TEMPERATURE,
            fs: 500e3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and > 0, got {v}")))
            }
        }
        fn non_negative(name: &'static str, v: f64) -> Result<()> {
            // settle_tau may be +inf (ideal settling)
            if v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be >= 0, got {v}")))
            }
        }
        positive("c_total", self.c_total)?;
        positive("vdd", self.vdd)?;
        positive("temperature", self.temperature)?;
        positive("fs", self.fs)?;
        non_negative("settle_tau", self.settle_tau)?;
        if !(self.cap_sigma.is_finite() && self.cap_sigma >= 0.0) {
            return Err(Error::param("cap_sigma", format!("must be >= 0, got {}", self.cap_sigma)));
        }
        if self.osr < 1 {
            return Err(Error::param("osr", "must be >= 1"));
        }
        if self.sar_bits < 1 || self.sar_bits > 30 {
            return Err(Error::param("sar_bits", format!("must be in 1..=30, got {}", self.sar_bits)));
        }
        if self.msb_bits > self.sar_bits {
            return Err(Error::param(
                "msb_bits",
                format!("{} exceeds sar_bits {}", self.msb_bits, self.sar_bits),
            ));
        }
        if self.mes_order > 2 {
            return Err(Error::param("mes_order", format!("must be 0, 1 or 2, got {}", self.mes_order)));
        }
        Ok(())
    }

    /// Full-scale single-ended sine power, `V_DD²/8`.
    pub fn signal_power(&self) -> f64 {
        self.vdd * self.vdd / 8.0
    }

    /// Signal bandwidth `fs/(2·OSR)`.
    pub fn bandwidth(&self) -> f64 {
        self.fs / (2.0 * self.osr as f64)
    }
}

/// Selection of noise terms entering a precision estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseTerms {
    pub sampling: bool,
    pub quantisation: bool,
    pub mismatch: bool,
}

impl NoiseTerms {
    pub const ALL: Self = Self { sampling: true, quantisation: true, mismatch: true };
    pub const SAMPLING: Self = Self { sampling: true, quantisation: false, mismatch: false };
    pub const QUANTISATION: Self = Self { sampling: false, quantisation: true, mismatch: false };
    pub const MISMATCH: Self = Self { sampling: false, quantisation: false, mismatch: true };
}

/// In-band noise powers of a configuration and the precision they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget {
    pub snp: f64,
    pub qnp: f64,
    pub mnp: f64,
    pub signal_power: f64,
    /// `+inf` when the selected noise is exactly zero.
    pub sndr_db: f64,
    pub enob_bits: f64,
}

impl NoiseBudget {
    pub fn total_noise(&self) -> f64 {
        self.snp + self.qnp + self.mnp
    }
}

/// In-band sampling (kT/C) noise power.
pub fn snp_eval(p: &DesignParams) -> f64 {
    BOLTZMANN * p.temperature / p.c_total * SAMPLING_NOISE_FACTOR / p.osr as f64
}

/// Shaping gain `π^(2m) / ((1+2m)·OSR^(1+2m))` of an order-`m` difference
/// kernel integrated over the signal band.
pub(crate) fn shaping_factor(order: u32, osr: u32) -> f64 {
    let two_m = 2 * order as i32;
    PI.powi(two_m) / ((1 + two_m) as f64 * (osr as f64).powi(1 + two_m))
}

/// In-band SAR settling plus quantisation noise power.
pub fn qnp_eval(p: &DesignParams) -> f64 {
    let v2 = p.vdd * p.vdd;
    let settling = v2 * (-3.0 * p.settle_tau).exp();
    let quantisation = v2 * 0.25f64.powi(p.sar_bits as i32);
    (settling + quantisation) * shaping_factor(p.ns_order, p.osr) / 12.0
}

/// In-band capacitor mismatch noise power.
pub fn mnp_eval(p: &DesignParams) -> f64 {
    if p.cap_sigma == 0.0 {
        return 0.0;
    }
    let osr = p.osr as f64;
    let msb = PI * PI * 0.25f64.powi(p.cal_bits as i32) / (3.0 * 2f64.powi(p.msb_bits as i32) * osr.powi(3));
    let lsb = shaping_factor(p.mes_order, p.osr) * 0.25f64.powi(p.msb_bits as i32);
    (msb + lsb) * p.cap_sigma * p.cap_sigma * p.vdd * p.vdd / 3.0
}

pub fn precision(p: &DesignParams) -> NoiseBudget {
    precision_terms(p, NoiseTerms::ALL)
}

/// Precision with only the selected noise terms; unselected terms read 0.
pub fn precision_terms(p: &DesignParams, terms: NoiseTerms) -> NoiseBudget {
    let snp = if terms.sampling { snp_eval(p) } else { 0.0 };
    let qnp = if terms.quantisation { qnp_eval(p) } else { 0.0 };
    let mnp = if terms.mismatch { mnp_eval(p) } else { 0.0 };
    let signal_power = p.signal_power();
    let sndr_db = power_ratio_db(signal_power, snp + qnp + mnp);
    NoiseBudget {
        snp,
        qnp,
        mnp,
        signal_power,
        sndr_db,
        enob_bits: enob(sndr_db),
    }
}

/// Schreier figure of merit, `SNDR + 10·log10(BW/P)`.
pub fn fom_s(sndr_db: f64, bw_hz: f64, power_w: f64) -> Result<f64> {
    if bw_hz.is_nan() || bw_hz <= 0.0 {
        return Err(Error::Domain(format!("bandwidth must be > 0, got {bw_hz}")));
    }
    if power_w.is_nan() || power_w <= 0.0 {
        return Err(Error::Domain(format!("power must be > 0, got {power_w}")));
    }
    Ok(sndr_db + 10.0 * (bw_hz / power_w).log10())
}
