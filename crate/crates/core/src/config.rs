//! Flat `section.key = value` run configuration.
//!
//! Lines starting with `#` and text after a ` #` are comments. Every key has
//! a default; unknown keys, unparsable values and out-of-range values are
//! errors that name the key. Optional values accept `auto`.

use crate::analysis::Window;
use crate::analytic::{DesignParams, PowerModel, SweepPreset};
use crate::error::{Error, Result};
use crate::modulator::{kt_c_rms, NonIdealities};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::str::FromStr;

/// Non-ideality switches; `None` fields are derived from the design.
#[derive(Debug, Clone, PartialEq)]
pub struct NonidealConfig {
    pub settling: bool,
    pub settle_tau: Option<f64>,
    pub cmp_offset: f64,
    pub cmp_noise_rms: Option<f64>,
    pub thermal_noise: bool,
    pub mismatch: bool,
    pub dwa: bool,
    pub mes_order: Option<u32>,
    pub amp_finite_gain: Option<f64>,
    pub gain_mismatch: f64,
    pub amp_rail: Option<f64>,
}

impl Default for NonidealConfig {
    fn default() -> Self {
        Self {
            settling: true,
            settle_tau: None,
            cmp_offset: 0.0,
            cmp_noise_rms: None,
            thermal_noise: true,
            mismatch: true,
            dwa: true,
            mes_order: None,
            amp_finite_gain: None,
            gain_mismatch: 0.0,
            amp_rail: None,
        }
    }
}

impl NonidealConfig {
    pub fn resolve(&self, d: &DesignParams) -> NonIdealities {
        NonIdealities {
            settle_tau: if self.settling { self.settle_tau.unwrap_or(d.settle_tau) } else { f64::INFINITY },
            cmp_offset: self.cmp_offset,
            cmp_noise_rms: self.cmp_noise_rms.unwrap_or(0.5 * kt_c_rms(d)),
            thermal_noise: self.thermal_noise,
            mismatch_enabled: self.mismatch,
            dwa_enabled: self.dwa,
            mes_order: self.mes_order.unwrap_or(d.mes_order),
            amp_finite_gain: self.amp_finite_gain,
            gain_mismatch: self.gain_mismatch,
            amp_rail: self.amp_rail.unwrap_or(d.vdd / 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Sine,
    Dc,
    Impulse,
    File,
}

impl WaveKind {
    fn name(self) -> &'static str {
        match self {
            WaveKind::Sine => "sine",
            WaveKind::Dc => "dc",
            WaveKind::Impulse => "impulse",
            WaveKind::File => "file",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_samples: usize,
    /// Conversions run and discarded before the recorded samples.
    pub warmup: usize,
    pub waveform: WaveKind,
    pub amplitude_dbfs: f64,
    pub freq_hz: f64,
    /// Snap the sine to an odd FFT bin of the decimated record.
    pub coherent: bool,
    pub dc_level: f64,
    pub impulse_amplitude: f64,
    /// Newline-delimited input samples in volts, for `waveform = file`.
    pub samples_file: Option<PathBuf>,
    /// Write one diagnostics record per conversion.
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_samples: 65536,
            warmup: 1024,
            waveform: WaveKind::Sine,
            amplitude_dbfs: -3.0,
            freq_hz: 6500.0,
            coherent: true,
            dc_level: 0.0,
            impulse_amplitude: 0.1,
            samples_file: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalConfig {
    pub enabled: bool,
    pub cycles: u64,
    pub range_frac: f64,
    pub threshold: i32,
    /// Convert the configured waveform while calibrating.
    pub concurrent_input: bool,
    /// Warm-start trims from an `index,code` file; skips calibration.
    pub trims_file: Option<PathBuf>,
}

impl Default for CalConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            cycles: 20_000,
            range_frac: crate::calibration::DEFAULT_TRIM_RANGE,
            threshold: crate::calibration::DEFAULT_TRIM_THRESHOLD,
            concurrent_input: false,
            trims_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub window: Window,
    /// Defaults to `sim.n_samples`.
    pub n_fft: Option<usize>,
    /// Comb order of the decimator; defaults to `M + 2`.
    pub decim_order: Option<u32>,
    /// Code stream analysed by the `analyze` command.
    pub input: Option<PathBuf>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { window: Window::Hann, n_fft: None, decim_order: None, input: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// `None` runs every preset.
    pub preset: Option<SweepPreset>,
    pub optimize: bool,
    pub target_bits: f64,
    /// Rows written to the optimiser ranking.
    pub top: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { preset: None, optimize: true, target_bits: 16.5, top: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub design: DesignParams,
    pub nonideal: NonidealConfig,
    pub sim: SimConfig,
    pub cal: CalConfig,
    pub analysis: AnalysisConfig,
    /// Power for FoM_S; `None` uses `power_model`.
    pub power_watts: Option<f64>,
    pub power_model: PowerModel,
    pub sweep: SweepConfig,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            design: DesignParams::default(),
            nonideal: NonidealConfig::default(),
            sim: SimConfig::default(),
            cal: CalConfig::default(),
            analysis: AnalysisConfig::default(),
            power_watts: None,
            power_model: PowerModel::default(),
            sweep: SweepConfig::default(),
            trials: 10,
            seed: 1,
            out: PathBuf::from("."),
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{v}` as {}", std::any::type_name::<T>())))
}

fn parse_opt<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    if v == "auto" {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

fn parse_path(v: &str) -> Option<PathBuf> {
    (v != "auto" && !v.is_empty()).then(|| PathBuf::from(v))
}

fn show_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

fn show_path(v: &Option<PathBuf>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), |p| p.display().to_string())
}

/// Keys excluded from the config hash because they only steer orchestration.
const UNHASHED: [&str; 2] = ["run.out", "montecarlo.trials"];

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let d = &mut self.design;
        match key {
            "design.c_total" => d.c_total = parse(key, v)?,
            "design.osr" => d.osr = parse(key, v)?,
            "design.sar_bits" => d.sar_bits = parse(key, v)?,
            "design.ns_order" => d.ns_order = parse(key, v)?,
            "design.settle_tau" => d.settle_tau = parse(key, v)?,
            "design.msb_bits" => d.msb_bits = parse(key, v)?,
            "design.cal_bits" => d.cal_bits = parse(key, v)?,
            "design.mes_order" => d.mes_order = parse(key, v)?,
            "design.cap_sigma" => d.cap_sigma = parse(key, v)?,
            "design.vdd" => d.vdd = parse(key, v)?,
            "design.temperature" => d.temperature = parse(key, v)?,
            "design.fs" => d.fs = parse(key, v)?,
            "nonideal.settling" => self.nonideal.settling = parse(key, v)?,
            "nonideal.settle_tau" => self.nonideal.settle_tau = parse_opt(key, v)?,
            "nonideal.cmp_offset" => self.nonideal.cmp_offset = parse(key, v)?,
            "nonideal.cmp_noise_rms" => self.nonideal.cmp_noise_rms = parse_opt(key, v)?,
            "nonideal.thermal_noise" => self.nonideal.thermal_noise = parse(key, v)?,
            "nonideal.mismatch" => self.nonideal.mismatch = parse(key, v)?,
            "nonideal.dwa" => self.nonideal.dwa = parse(key, v)?,
            "nonideal.mes_order" => self.nonideal.mes_order = parse_opt(key, v)?,
            "nonideal.amp_finite_gain" => self.nonideal.amp_finite_gain = parse_opt(key, v)?,
            "nonideal.gain_mismatch" => self.nonideal.gain_mismatch = parse(key, v)?,
            "nonideal.amp_rail" => self.nonideal.amp_rail = parse_opt(key, v)?,
            "sim.n_samples" => self.sim.n_samples = parse(key, v)?,
            "sim.warmup" => self.sim.warmup = parse(key, v)?,
            "sim.waveform" => {
                self.sim.waveform = match v {
                    "sine" => WaveKind::Sine,
                    "dc" => WaveKind::Dc,
                    "impulse" => WaveKind::Impulse,
                    "file" => WaveKind::File,
                    _ => return Err(Error::config(key, format!("`{v}` is not sine, dc, impulse or file"))),
                }
            }
            "sim.amplitude_dbfs" => self.sim.amplitude_dbfs = parse(key, v)?,
            "sim.freq_hz" => self.sim.freq_hz = parse(key, v)?,
            "sim.coherent" => self.sim.coherent = parse(key, v)?,
            "sim.dc_level" => self.sim.dc_level = parse(key, v)?,
            "sim.impulse_amplitude" => self.sim.impulse_amplitude = parse(key, v)?,
            "sim.samples_file" => self.sim.samples_file = parse_path(v),
            "sim.trace" => self.sim.trace = parse(key, v)?,
            "cal.enabled" => self.cal.enabled = parse(key, v)?,
            "cal.cycles" => self.cal.cycles = parse(key, v)?,
            "cal.range_frac" => self.cal.range_frac = parse(key, v)?,
            "cal.threshold" => self.cal.threshold = parse(key, v)?,
            "cal.concurrent_input" => self.cal.concurrent_input = parse(key, v)?,
            "cal.trims_file" => self.cal.trims_file = parse_path(v),
            "analysis.window" => {
                self.analysis.window = Window::from_name(v)
                    .ok_or_else(|| Error::config(key, format!("`{v}` is not hann or rectangular")))?
            }
            "analysis.n_fft" => self.analysis.n_fft = parse_opt(key, v)?,
            "analysis.decim_order" => self.analysis.decim_order = parse_opt(key, v)?,
            "analysis.input" => self.analysis.input = parse_path(v),
            "power.watts" => self.power_watts = parse_opt(key, v)?,
            "power.alpha" => self.power_model.alpha = parse(key, v)?,
            "power.beta" => self.power_model.beta = parse(key, v)?,
            "power.i_bias" => self.power_model.i_bias = parse(key, v)?,
            "power.a1_share" => self.power_model.a1_share = parse(key, v)?,
            "sweep.preset" => {
                self.sweep.preset = match v {
                    "all" => None,
                    _ => Some(SweepPreset::from_name(v).ok_or_else(|| {
                        Error::config(key, format!("`{v}` is not all, sampling, settling or mismatch"))
                    })?),
                }
            }
            "sweep.optimize" => self.sweep.optimize = parse(key, v)?,
            "sweep.target_bits" => self.sweep.target_bits = parse(key, v)?,
            "sweep.top" => self.sweep.top = parse(key, v)?,
            "montecarlo.trials" => self.trials = parse(key, v)?,
            "run.seed" => self.seed = parse(key, v)?,
            "run.out" => self.out = PathBuf::from(v),
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let d = &self.design;
        let n = &self.nonideal;
        vec![
            ("design.c_total", d.c_total.to_string()),
            ("design.osr", d.osr.to_string()),
            ("design.sar_bits", d.sar_bits.to_string()),
            ("design.ns_order", d.ns_order.to_string()),
            ("design.settle_tau", d.settle_tau.to_string()),
            ("design.msb_bits", d.msb_bits.to_string()),
            ("design.cal_bits", d.cal_bits.to_string()),
            ("design.mes_order", d.mes_order.to_string()),
            ("design.cap_sigma", d.cap_sigma.to_string()),
            ("design.vdd", d.vdd.to_string()),
            ("design.temperature", d.temperature.to_string()),
            ("design.fs", d.fs.to_string()),
            ("nonideal.settling", n.settling.to_string()),
            ("nonideal.settle_tau", show_opt(&n.settle_tau)),
            ("nonideal.cmp_offset", n.cmp_offset.to_string()),
            ("nonideal.cmp_noise_rms", show_opt(&n.cmp_noise_rms)),
            ("nonideal.thermal_noise", n.thermal_noise.to_string()),
            ("nonideal.mismatch", n.mismatch.to_string()),
            ("nonideal.dwa", n.dwa.to_string()),
            ("nonideal.mes_order", show_opt(&n.mes_order)),
            ("nonideal.amp_finite_gain", show_opt(&n.amp_finite_gain)),
            ("nonideal.gain_mismatch", n.gain_mismatch.to_string()),
            ("nonideal.amp_rail", show_opt(&n.amp_rail)),
            ("sim.n_samples", self.sim.n_samples.to_string()),
            ("sim.warmup", self.sim.warmup.to_string()),
            ("sim.waveform", self.sim.waveform.name().to_string()),
            ("sim.amplitude_dbfs", self.sim.amplitude_dbfs.to_string()),
            ("sim.freq_hz", self.sim.freq_hz.to_string()),
            ("sim.coherent", self.sim.coherent.to_string()),
            ("sim.dc_level", self.sim.dc_level.to_string()),
            ("sim.impulse_amplitude", self.sim.impulse_amplitude.to_string()),
            ("sim.samples_file", show_path(&self.sim.samples_file)),
            ("sim.trace", self.sim.trace.to_string()),
            ("cal.enabled", self.cal.enabled.to_string()),
            ("cal.cycles", self.cal.cycles.to_string()),
            ("cal.range_frac", self.cal.range_frac.to_string()),
            ("cal.threshold", self.cal.threshold.to_string()),
            ("cal.concurrent_input", self.cal.concurrent_input.to_string()),
            ("cal.trims_file", show_path(&self.cal.trims_file)),
            ("analysis.window", self.analysis.window.name().to_string()),
            ("analysis.n_fft", show_opt(&self.analysis.n_fft)),
            ("analysis.decim_order", show_opt(&self.analysis.decim_order)),
            ("analysis.input", show_path(&self.analysis.input)),
            ("power.watts", show_opt(&self.power_watts)),
            ("power.alpha", self.power_model.alpha.to_string()),
            ("power.beta", self.power_model.beta.to_string()),
            ("power.i_bias", self.power_model.i_bias.to_string()),
            ("power.a1_share", self.power_model.a1_share.to_string()),
            ("sweep.preset", self.sweep.preset.map_or("all", SweepPreset::name).to_string()),
            ("sweep.optimize", self.sweep.optimize.to_string()),
            ("sweep.target_bits", self.sweep.target_bits.to_string()),
            ("sweep.top", self.sweep.top.to_string()),
            ("montecarlo.trials", self.trials.to_string()),
            ("run.seed", self.seed.to_string()),
            ("run.out", self.out.display().to_string()),
        ]
    }

    /// Canonical `key = value` text of every key.
    pub fn to_text(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical text, leaving out
    /// the output directory and the trial count.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.entries() {
            if !UNHASHED.contains(&k) {
                h.update(format!("{k} = {v}\n").as_bytes());
            }
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Comment line that opens every emitted file.
    pub fn header(&self, seed: u64) -> String {
        format!("# config_hash={} seed={seed}\n", self.hash())
    }

    pub fn n_fft(&self) -> usize {
        self.analysis.n_fft.unwrap_or(self.sim.n_samples)
    }

    pub fn decim_order(&self) -> u32 {
        self.analysis.decim_order.unwrap_or(self.design.ns_order + 2)
    }

    /// Range checks that cannot be expressed by the value types.
    pub fn validate(&self) -> Result<()> {
        self.design.validate().map_err(|e| match e {
            Error::InvalidParam { name, reason } => Error::config(format!("design.{name}"), reason),
            other => other,
        })?;
        let ni = self.nonideal.resolve(&self.design);
        let nonneg = |k: &str, v: f64| {
            if v.is_nan() || v < 0.0 {
                Err(Error::config(k, format!("must be >= 0, got {v}")))
            } else {
                Ok(())
            }
        };
        nonneg("nonideal.settle_tau", ni.settle_tau)?;
        nonneg("nonideal.cmp_noise_rms", ni.cmp_noise_rms)?;
        if ni.mes_order > 2 {
            return Err(Error::config("nonideal.mes_order", "must be 0, 1 or 2"));
        }
        if ni.amp_rail.is_nan() || ni.amp_rail <= 0.0 {
            return Err(Error::config("nonideal.amp_rail", "must be > 0"));
        }
        if let Some(a) = ni.amp_finite_gain {
            if a.is_nan() || a <= 1.0 {
                return Err(Error::config("nonideal.amp_finite_gain", "must be > 1"));
            }
        }
        if !(ni.gain_mismatch > -1.0 && ni.gain_mismatch.is_finite()) {
            return Err(Error::config("nonideal.gain_mismatch", "must be finite and > -1"));
        }
        if self.sim.n_samples == 0 {
            return Err(Error::config("sim.n_samples", "must be >= 1"));
        }
        let n_fft = self.n_fft();
        if !n_fft.is_power_of_two() || n_fft < 2 || n_fft > self.sim.n_samples {
            return Err(Error::config(
                "analysis.n_fft",
                format!("{n_fft} must be a power of two in 2..=sim.n_samples"),
            ));
        }
        if self.decim_order() == 0 {
            return Err(Error::config("analysis.decim_order", "must be >= 1"));
        }
        if self.sim.waveform == WaveKind::File && self.sim.samples_file.is_none() {
            return Err(Error::config("sim.samples_file", "required when sim.waveform = file"));
        }
        if self.sim.waveform == WaveKind::Sine
            && !(self.sim.freq_hz > 0.0 && self.sim.freq_hz < self.design.fs / 2.0)
        {
            return Err(Error::config("sim.freq_hz", "must lie in (0, fs/2)"));
        }
        if self.cal.cycles == 0 {
            return Err(Error::config("cal.cycles", "must be >= 1"));
        }
        if !(self.cal.range_frac > 0.0 && self.cal.range_frac.is_finite()) {
            return Err(Error::config("cal.range_frac", "must be > 0"));
        }
        if self.cal.threshold < 1 {
            return Err(Error::config("cal.threshold", "must be >= 1"));
        }
        if let Some(w) = self.power_watts {
            if w.is_nan() || w <= 0.0 {
                return Err(Error::config("power.watts", "must be > 0"));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("montecarlo.trials", "must be >= 1"));
        }
        Ok(())
    }
}

/// Parses configuration text on top of the defaults and validates it.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    apply_text(&mut cfg, text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Applies configuration text to `cfg` without validating.
pub fn apply_text(cfg: &mut RunConfig, text: &str) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find(" #") {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", i + 1), "expected `section.key = value`"))?;
        cfg.set(k.trim(), v)?;
    }
    Ok(())
}

/// Applies a `key=value` override given on the command line.
pub fn apply_override(cfg: &mut RunConfig, kv: &str) -> Result<()> {
    let (k, v) = kv
        .split_once('=')
        .ok_or_else(|| Error::config(kv, "override must be key=value"))?;
    cfg.set(k.trim(), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.design.c_total, 50e-12);
        assert_eq!((c.design.ns_order, c.design.msb_bits, c.design.cal_bits), (2, 4, 4));
        assert_eq!((c.design.mes_order, c.design.osr, c.design.sar_bits), (2, 16, 10));
        assert_eq!((c.design.vdd, c.design.fs, c.design.settle_tau), (1.8, 500e3, 5.0));
    }

    #[test]
    fn osr_zero_names_key() {
        match parse_config("design.osr = 0") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "design.osr"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_bad_values_name_key() {
        for (text, want) in [
            ("design.bogus = 1", "design.bogus"),
            ("sim.n_samples = lots", "sim.n_samples"),
            ("nonideal.dwa = maybe", "nonideal.dwa"),
            ("analysis.window = flat", "analysis.window"),
            ("analysis.n_fft = 1000", "analysis.n_fft"),
        ] {
            match parse_config(text) {
                Err(Error::Config { key, .. }) => assert_eq!(key, want),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_spacing() {
        let c = parse_config("# header\n\n  run.seed=7   # trailing\ndesign.osr = 32\n").unwrap();
        assert_eq!((c.seed, c.design.osr), (7, 32));
    }

    #[test]
    fn every_entry_roundtrips() {
        let c = RunConfig::default();
        let back = parse_config(&c.to_text()).unwrap();
        assert_eq!(back, c);
        let mut c2 = RunConfig::default();
        for (k, v) in c.entries() {
            c2.set(k, &v).unwrap();
        }
        assert_eq!(c2, c);
    }

    #[test]
    fn hash_tracks_seed_but_not_out() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.out = PathBuf::from("/elsewhere");
        b.trials = 3;
        assert_eq!(a.hash(), b.hash());
        apply_override(&mut b, "run.seed=2").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        assert!(a.header(5).starts_with("# config_hash="));
    }

    #[test]
    fn resolve_defaults_follow_design() {
        let c = RunConfig::default();
        let ni = c.nonideal.resolve(&c.design);
        assert_eq!(ni.settle_tau, 5.0);
        assert_eq!(ni.mes_order, 2);
        assert_eq!(ni.amp_rail, 0.9);
        assert!(ni.cmp_noise_rms > 0.0);
        let mut c = c;
        c.set("nonideal.settling", "false").unwrap();
        assert!(c.nonideal.resolve(&c.design).settle_tau.is_infinite());
    }
}
