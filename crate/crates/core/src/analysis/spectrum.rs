use crate::error::{Error, Result};
use crate::units::{power_ratio_db, DB_FLOOR};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "rectangular" | "rect" => Some(Window::Rectangular),
            "hann" => Some(Window::Hann),
            _ => None,
        }
    }

    /// Periodic window coefficients.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }

    /// Half-width, in bins, of the main lobe of a coherent tone.
    pub fn guard_bins(self) -> usize {
        match self {
            Window::Rectangular => 0,
            Window::Hann => 3,
        }
    }
}

/// Single-sided power spectrum relative to full scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Power of each bin `0..=n_fft/2` divided by the full-scale sine power.
    pub power: Vec<f64>,
    pub n_fft: usize,
    pub window: Window,
    pub fs: f64,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.fs / self.n_fft as f64
    }

    pub fn freq(&self, k: usize) -> f64 {
        k as f64 * self.bin_width()
    }

    pub fn db(&self, k: usize) -> f64 {
        to_db(self.power[k])
    }

    /// `(frequency, dBFS)` for every bin.
    pub fn bins(&self) -> Vec<(f64, f64)> {
        (0..self.power.len()).map(|k| (self.freq(k), self.db(k))).collect()
    }

    /// `freq_hz,power_dbfs` lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.power.len() * 28);
        s.push_str("freq_hz,power_dbfs\n");
        for (f, p) in self.bins() {
            s.push_str(&format!("{f:.4},{p:.4}\n"));
        }
        s
    }

    /// Sum of all bins, relative to full scale.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

fn to_db(p: f64) -> f64 {
    if p > 0.0 {
        power_ratio_db(p, 1.0)
    } else {
        DB_FLOOR
    }
}

/// Periodogram of the last `n_fft` samples of `x`.
///
/// Bins are scaled so that their sum equals the mean-square value of the
/// windowed record relative to `full_scale²/2`, which puts a full-scale sine
/// at 0 dBFS for either window.
pub fn periodogram(x: &[f64], window: Window, n_fft: usize, fs: f64, full_scale: f64) -> Result<Spectrum> {
    if n_fft < 2 || !n_fft.is_power_of_two() {
        return Err(Error::Analysis(format!("n_fft {n_fft} must be a power of two >= 2")));
    }
    if n_fft > x.len() {
        return Err(Error::Analysis(format!("n_fft {n_fft} exceeds {} samples", x.len())));
    }
    if !(fs > 0.0 && full_scale > 0.0) {
        return Err(Error::Analysis("fs and full scale must be positive".into()));
    }
    let w = window.coefficients(n_fft);
    let tail = &x[x.len() - n_fft..];
    let mut buf: Vec<Complex<f64>> = tail.iter().zip(&w).map(|(v, w)| Complex::new(v * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    let w2: f64 = w.iter().map(|v| v * v).sum();
    let norm = n_fft as f64 * w2 * full_scale * full_scale / 2.0;
    let half = n_fft / 2;
    let power = (0..=half)
        .map(|k| {
            let c = if k == 0 || k == half { 1.0 } else { 2.0 };
            c * buf[k].norm_sqr() / norm
        })
        .collect();
    Ok(Spectrum { power, n_fft, window, fs })
}

/// Frequency of the odd FFT bin of an `n`-point record closest to `freq`.
pub fn coherent_frequency(freq: f64, fs: f64, n: usize) -> f64 {
    let k0 = freq * n as f64 / fs;
    let k = (2.0 * ((k0 - 1.0) / 2.0).round() + 1.0).max(1.0);
    k * fs / n as f64
}
