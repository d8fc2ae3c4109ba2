#![allow(dead_code)]

use nssar::analysis::{periodogram, Window};
use nssar::analytic::DesignParams;
use nssar::modulator::{run, ModulatorState, NonIdealities, Waveform};
use rand::{Rng, SeedableRng};

/// Averaged Hann periodogram over consecutive non-overlapping segments.
pub fn welch(x: &[f64], seg: usize, fs: f64) -> Vec<f64> {
    let nseg = x.len() / seg;
    let mut acc = vec![0.0; seg / 2 + 1];
    for s in 0..nseg {
        let sp = periodogram(&x[s * seg..(s + 1) * seg], Window::Hann, seg, fs, 1.0).unwrap();
        for (a, p) in acc.iter_mut().zip(&sp.power) {
            *a += p / nseg as f64;
        }
    }
    acc
}

/// Least-squares slope of `10·log10(p)` against `log10(k)` over bins
/// `k0..=10·k0`, in dB per decade.
pub fn decade_slope(p: &[f64], k0: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (k0..=10 * k0)
        .map(|k| ((k as f64).log10(), 10.0 * p[k].log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub const SLOPE_SEGMENT: usize = 16384;
pub const SLOPE_K0: usize = 8;

/// Uniform white input spanning ±0.4 of full scale.
pub fn busy_input(n: usize, full_scale: f64, seed: u64) -> Waveform {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Waveform::Samples((0..n).map(|_| full_scale * rng.random_range(-0.4..0.4)).collect())
}

/// Mismatch-only modulator with the given shaping order, driven by a busy
/// input. Returns the per-conversion LSB and MSB mismatch error traces.
pub fn mismatch_traces(mes_order: u32, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let d = DesignParams::default();
    let mut ni = NonIdealities::ideal(&d);
    ni.mismatch_enabled = true;
    ni.mes_order = mes_order;
    let mut s = ModulatorState::new(d, ni, seed).unwrap();
    let w = busy_input(n, s.full_scale(), seed);
    let out = run(&mut s, &w, n, true).unwrap();
    let dg = out.diagnostics.unwrap();
    (
        dg.iter().map(|d| d.lsb_mismatch_error).collect(),
        dg.iter().map(|d| d.msb_mismatch_error).collect(),
    )
}

/// Output minus input of an ideal modulator driven by a −3 dBFS tone.
pub fn quantisation_error(d: &DesignParams, n: usize, freq_hz: f64) -> Vec<f64> {
    let mut s = ModulatorState::new(*d, NonIdealities::ideal(d), 1).unwrap();
    let fsv = s.full_scale();
    let w = Waveform::Sine { amplitude_dbfs: -3.0, freq_hz };
    let out = run(&mut s, &w, n, false).unwrap();
    out.output_volts()
        .iter()
        .enumerate()
        .map(|(i, y)| y - w.sample(i, d.fs, fsv))
        .collect()
}
