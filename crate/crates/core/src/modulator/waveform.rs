use super::state::{Diagnostics, ModulatorState};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Input stimulus.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    /// Sine of the given amplitude relative to full scale and frequency, Hz.
    Sine { amplitude_dbfs: f64, freq_hz: f64 },
    /// Constant level, V.
    Dc { level: f64 },
    /// A single sample of `amplitude` volts at index 0.
    Impulse { amplitude: f64 },
    /// Externally supplied samples, V.
    Samples(Vec<f64>),
}

impl Waveform {
    pub fn validate(&self, fs: f64, n_samples: usize) -> Result<()> {
        match self {
            Waveform::Sine { amplitude_dbfs, freq_hz } => {
                if !amplitude_dbfs.is_finite() {
                    return Err(Error::config("waveform.amplitude_dbfs", "must be finite"));
                }
                if !(*freq_hz >= 0.0 && *freq_hz < fs / 2.0) {
                    return Err(Error::config(
                        "waveform.freq_hz",
                        format!("{freq_hz} Hz must lie in [0, fs/2 = {} Hz)", fs / 2.0),
                    ));
                }
            }
            Waveform::Dc { level } | Waveform::Impulse { amplitude: level } => {
                if !level.is_finite() {
                    return Err(Error::config("waveform.level", "must be finite"));
                }
            }
            Waveform::Samples(s) => {
                if s.len() < n_samples {
                    return Err(Error::config(
                        "waveform.samples",
                        format!("{} samples supplied, {n_samples} requested", s.len()),
                    ));
                }
                if s.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("waveform.samples", "non-finite sample"));
                }
            }
        }
        Ok(())
    }

    /// Value at sample index `n`, V.
    pub fn sample(&self, n: usize, fs: f64, full_scale: f64) -> f64 {
        match self {
            Waveform::Sine { amplitude_dbfs, freq_hz } => {
                let a = full_scale * 10f64.powf(amplitude_dbfs / 20.0);
                a * (2.0 * PI * freq_hz * n as f64 / fs).sin()
            }
            Waveform::Dc { level } => *level,
            Waveform::Impulse { amplitude } => {
                if n == 0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            Waveform::Samples(s) => s[n],
        }
    }
}

/// Result of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Reconstructed output, signed LSB codes.
    pub output_codes: Vec<i64>,
    /// Raw SAR codes.
    pub raw_codes: Vec<u32>,
    pub diagnostics: Option<Vec<Diagnostics>>,
    pub overload_count: u64,
    pub saturation_count: u64,
    pub lsb: f64,
}

impl RunOutput {
    pub fn output_volts(&self) -> Vec<f64> {
        self.output_codes.iter().map(|&c| c as f64 * self.lsb).collect()
    }

    /// Newline-delimited output codes.
    pub fn codes_text(&self) -> String {
        let mut s = String::with_capacity(self.output_codes.len() * 6);
        for c in &self.output_codes {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }
}

/// Converts `n_samples` of `waveform` starting at the state's current
/// position. Waveform time restarts at 0 on every call.
pub fn run(
    state: &mut ModulatorState,
    waveform: &Waveform,
    n_samples: usize,
    trace: bool,
) -> Result<RunOutput> {
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be >= 1"));
    }
    let fs = state.design.fs;
    waveform.validate(fs, n_samples)?;
    let fsv = state.full_scale();
    let mut out = RunOutput {
        output_codes: Vec::with_capacity(n_samples),
        raw_codes: Vec::with_capacity(n_samples),
        diagnostics: trace.then(|| Vec::with_capacity(n_samples)),
        overload_count: 0,
        saturation_count: 0,
        lsb: state.lsb(),
    };
    for n in 0..n_samples {
        let r = state.convert_sample(waveform.sample(n, fs, fsv));
        out.output_codes.push(r.output_code);
        out.raw_codes.push(r.code);
        out.overload_count += r.diagnostics.overload as u64;
        out.saturation_count += r.diagnostics.saturated as u64;
        if let Some(d) = out.diagnostics.as_mut() {
            d.push(r.diagnostics);
        }
    }
    Ok(out)
}

/// Error-transfer impulse response of the state's loop filter.
///
/// A unit error is injected at the quantiser on the first cycle with the
/// signal held at zero; the returned sequence is the output error `y − v`.
pub fn ntf_probe(state: &ModulatorState, len: usize) -> Vec<f64> {
    let mut lf = state.filter.clone();
    lf.reset();
    lf.rail = f64::INFINITY;
    (0..len)
        .map(|n| {
            let e = if n == 0 { 1.0 } else { 0.0 };
            let ff = lf.feedforward();
            lf.update(-ff - e);
            ff + e
        })
        .collect()
}
