//! End-to-end experiments driven by a [`RunConfig`].

use crate::analysis::{
    coherent_frequency, compensate_droop, decimate, in_band_power, periodogram, sndr, Metrics, Spectrum,
};
use crate::calibration::{run_calibration_with_input, CalibrationReport, TrimTable};
use crate::config::{RunConfig, WaveKind};
use crate::error::{Error, Result};
use crate::modulator::{run, ModulatorState, RunOutput, Waveform};
use crate::units::power_ratio_db;
use rayon::prelude::*;

/// Everything produced by one simulated trial.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub seed: u64,
    /// Recorded conversions; warm-up samples are dropped.
    pub run: RunOutput,
    pub spectrum: Spectrum,
    /// In-band metrics; present for sine and file inputs.
    pub metrics: Option<Metrics>,
    /// Metrics of the decimated stream, when the record is long enough.
    pub decimated: Option<Metrics>,
    /// In-band power outside DC, dBFS.
    pub in_band_dbfs: f64,
    pub trims: TrimTable,
    pub calibration: Option<CalibrationReport>,
    pub signal_freq: f64,
    pub power_w: f64,
}

/// Length of the decimated record analysed, or 0 if too short.
pub fn decimated_len(cfg: &RunConfig) -> usize {
    let per = cfg.n_fft() / cfg.design.osr as usize;
    if per < 16 {
        0
    } else {
        1 << per.ilog2()
    }
}

/// Tone frequency actually used: the configured one, or the nearest odd
/// bin of the decimated record (or of the full record when there is none).
pub fn signal_frequency(cfg: &RunConfig) -> f64 {
    if !(cfg.sim.coherent && cfg.sim.waveform == WaveKind::Sine) {
        return cfg.sim.freq_hz;
    }
    let n = match decimated_len(cfg) {
        0 => cfg.n_fft(),
        n => n,
    };
    let fs = match decimated_len(cfg) {
        0 => cfg.design.fs,
        _ => cfg.design.fs / cfg.design.osr as f64,
    };
    coherent_frequency(cfg.sim.freq_hz, fs, n)
}

fn read_samples(path: &std::path::Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| Error::Io(format!("{}: bad sample `{l}`", path.display())))
        })
        .collect()
}

pub fn build_waveform(cfg: &RunConfig) -> Result<Waveform> {
    Ok(match cfg.sim.waveform {
        WaveKind::Sine => Waveform::Sine {
            amplitude_dbfs: cfg.sim.amplitude_dbfs,
            freq_hz: signal_frequency(cfg),
        },
        WaveKind::Dc => Waveform::Dc { level: cfg.sim.dc_level },
        WaveKind::Impulse => Waveform::Impulse { amplitude: cfg.sim.impulse_amplitude },
        WaveKind::File => {
            let path = cfg
                .sim
                .samples_file
                .as_ref()
                .ok_or_else(|| Error::config("sim.samples_file", "required when sim.waveform = file"))?;
            Waveform::Samples(read_samples(path)?)
        }
    })
}

/// A fresh modulator for `seed` with trims loaded or calibrated per `cfg`.
pub fn prepared_state(cfg: &RunConfig, seed: u64) -> Result<(ModulatorState, Option<CalibrationReport>)> {
    let ni = cfg.nonideal.resolve(&cfg.design);
    let mut state = ModulatorState::new(cfg.design, ni, seed)?;
    let n = state.arrays.n_msb();
    state.arrays.trim = TrimTable::with_params(n, cfg.cal.range_frac, cfg.cal.threshold);
    if let Some(path) = &cfg.cal.trims_file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut t = TrimTable::from_csv(&text, n)?;
        t.range_frac = cfg.cal.range_frac;
        t.threshold = cfg.cal.threshold;
        state.arrays.trim = t;
        return Ok((state, None));
    }
    if !cfg.cal.enabled {
        return Ok((state, None));
    }
    let input = if cfg.cal.concurrent_input { Some(build_waveform(cfg)?) } else { None };
    let report = run_calibration_with_input(&mut state, cfg.cal.cycles, seed, input.as_ref())?;
    Ok((state, Some(report)))
}

/// Calibration alone.
pub fn calibrate(cfg: &RunConfig, seed: u64) -> Result<CalibrationReport> {
    let mut c = cfg.clone();
    c.cal.enabled = true;
    c.cal.trims_file = None;
    prepared_state(&c, seed)?
        .1
        .ok_or_else(|| Error::Domain("calibration did not run".into()))
}

pub fn power_w(cfg: &RunConfig) -> f64 {
    cfg.power_watts.unwrap_or_else(|| cfg.power_model.power(&cfg.design))
}

/// Spectrum and metrics of an output stream in volts. `full` may include
/// warm-up samples; only its last `n_fft` samples are transformed.
pub fn analyze_stream(
    cfg: &RunConfig,
    full: &[f64],
    signal_freq: Option<f64>,
) -> Result<(Spectrum, Option<Metrics>, Option<Metrics>, f64)> {
    let d = &cfg.design;
    let fsv = d.vdd / 2.0;
    let spectrum = periodogram(full, cfg.analysis.window, cfg.n_fft(), d.fs, fsv)?;
    let in_band = power_ratio_db(in_band_power(&spectrum, d.osr), 1.0);
    let Some(f) = signal_freq else {
        return Ok((spectrum, None, None, in_band));
    };
    let metrics = sndr(&spectrum, f, d.osr)?.with_power(power_w(cfg))?;
    let osr = d.osr as usize;
    let n_dec = decimated_len(cfg);
    let decimated = if n_dec > 0 && osr > 1 {
        let order = cfg.decim_order();
        let y = decimate(full, osr, order)?;
        if y.len() >= n_dec {
            let sp = periodogram(&y, cfg.analysis.window, n_dec, d.fs / osr as f64, fsv)?;
            Some(sndr(&compensate_droop(&sp, d.fs, osr, order), f, 1)?)
        } else {
            None
        }
    } else {
        None
    };
    Ok((spectrum, Some(metrics), decimated, in_band))
}

/// One full trial: calibrate (if configured), convert, analyse.
pub fn simulate(cfg: &RunConfig, seed: u64) -> Result<SimulationOutcome> {
    cfg.validate()?;
    let (mut state, calibration) = prepared_state(cfg, seed)?;
    let waveform = build_waveform(cfg)?;
    let warm = cfg.sim.warmup;
    let total = warm + cfg.sim.n_samples;
    let mut out = run(&mut state, &waveform, total, cfg.sim.trace)?;
    let volts = out.output_volts();
    let tone = matches!(cfg.sim.waveform, WaveKind::Sine | WaveKind::File).then(|| signal_frequency(cfg));
    let (spectrum, metrics, decimated, in_band_dbfs) = analyze_stream(cfg, &volts, tone)?;
    out.output_codes.drain(..warm);
    out.raw_codes.drain(..warm);
    if let Some(d) = out.diagnostics.as_mut() {
        d.drain(..warm);
    }
    Ok(SimulationOutcome {
        seed,
        run: out,
        spectrum,
        metrics,
        decimated,
        in_band_dbfs,
        trims: state.arrays.trim.clone(),
        calibration,
        signal_freq: tone.unwrap_or(0.0),
        power_w: power_w(cfg),
    })
}

/// `trials` independent trials with seeds `seed, seed + 1, …`, in order.
pub fn monte_carlo(cfg: &RunConfig, trials: usize) -> Result<Vec<SimulationOutcome>> {
    if trials == 0 {
        return Err(Error::config("montecarlo.trials", "must be >= 1"));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|i| simulate(cfg, cfg.seed.wrapping_add(i)))
        .collect()
}

/// Median of a list; NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
