use crate::calibration::TrimTable;
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};
use rand_distr::{Distribution, Normal};

/// Capacitor-array mismatch state.
///
/// The MSB section is thermometer coded with `2^K − 1` unit elements of
/// `2^(N−K)` LSBs each; the two ping-pong LSB arrays are binary weighted
/// with `N − K` bits. All errors are relative to the nominal capacitor
/// value. MSB weights are ratiometric: the DAC sees each element relative to
/// the mean of the trimmed array, so a common-mode shift of all units is a
/// reference-gain change and not a mismatch.
#[derive(Debug, Clone, PartialEq)]
pub struct CapArrayState {
    pub sar_bits: u32,
    pub msb_bits: u32,
    /// As-fabricated relative error of each MSB unit element.
    pub msb_units: Vec<f64>,
    /// Relative error of each binary LSB capacitor (index 0 = 1 LSB) for the
    /// two ping-pong arrays.
    pub lsb_weights: [Vec<f64>; 2],
    /// Next DWA start element, always `< msb_units.len()` (or 0 when empty).
    pub dwa_pointer: usize,
    pub trim: TrimTable,
}

impl CapArrayState {
    pub fn n_msb(&self) -> usize {
        self.msb_units.len()
    }

    pub fn lsb_bits(&self) -> u32 {
        self.sar_bits - self.msb_bits
    }

    /// LSB codes spanned by one MSB element.
    pub fn msb_unit_codes(&self) -> u64 {
        1u64 << self.lsb_bits()
    }

    /// Trimmed relative error of every MSB element (not mean-removed).
    pub fn effective_msb_errors(&self) -> Vec<f64> {
        self.msb_units
            .iter()
            .enumerate()
            .map(|(i, e)| e - self.trim.correction(i))
            .collect()
    }

    /// Trimmed MSB errors with the array mean removed; these are the weights
    /// the DAC actually realises.
    pub fn centered_msb_errors(&self) -> Vec<f64> {
        let mut e = self.effective_msb_errors();
        if !e.is_empty() {
            let mean = e.iter().sum::<f64>() / e.len() as f64;
            e.iter_mut().for_each(|x| *x -= mean);
        }
        e
    }

    /// Sample standard deviation of the trimmed MSB errors.
    pub fn msb_mismatch_std(&self) -> f64 {
        sample_std(&self.effective_msb_errors())
    }

    /// Mismatch error, in LSB codes, of LSB code `code` on array `array`.
    pub fn lsb_error_codes(&self, array: usize, code: u64) -> f64 {
        self.lsb_weights[array]
            .iter()
            .enumerate()
            .filter(|(b, _)| code >> b & 1 == 1)
            .map(|(b, e)| (1u64 << b) as f64 * e)
            .sum()
    }
}

pub(crate) fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Draws a capacitor array with Gaussian relative errors of standard
/// deviation `sigma`. Deterministic in `seed`; the DWA pointer starts at 0
/// and all trims at mid-code.
pub fn build_array(msb_bits: u32, sar_bits: u32, sigma: f64, seed: u64) -> Result<CapArrayState> {
    if msb_bits > sar_bits {
        return Err(Error::param(
            "msb_bits",
            format!("{msb_bits} exceeds sar_bits {sar_bits}"),
        ));
    }
    if sar_bits == 0 || sar_bits > 30 {
        return Err(Error::param("sar_bits", format!("must be in 1..=30, got {sar_bits}")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", format!("must be >= 0, got {sigma}")));
    }
    let n_msb = (1usize << msb_bits) - 1;
    let lsb_bits = (sar_bits - msb_bits) as usize;
    let draw = |tag: u64, n: usize| -> Vec<f64> {
        if sigma == 0.0 {
            return vec![0.0; n];
        }
        let normal = Normal::new(0.0, sigma).expect("sigma validated");
        let mut rng = stream_rng(seed, tag);
        (0..n).map(|_| normal.sample(&mut rng)).collect()
    };
    Ok(CapArrayState {
        sar_bits,
        msb_bits,
        msb_units: draw(stream::MSB_ARRAY, n_msb),
        lsb_weights: [draw(stream::LSB_ARRAY_1, lsb_bits), draw(stream::LSB_ARRAY_2, lsb_bits)],
        dwa_pointer: 0,
        trim: TrimTable::new(n_msb),
    })
}

/// Data-weighted-averaging selection: `code` consecutive elements starting
/// at `pointer`, wrapping modulo `n_elems`.
///
/// Returns the selected indices and the advanced pointer.
pub fn dwa_select(pointer: usize, code: usize, n_elems: usize) -> Result<(Vec<usize>, usize)> {
    if code > n_elems {
        return Err(Error::param("code", format!("{code} exceeds element count {n_elems}")));
    }
    if n_elems == 0 {
        return Ok((Vec::new(), 0));
    }
    if pointer >= n_elems {
        return Err(Error::param("pointer", format!("{pointer} out of range 0..{n_elems}")));
    }
    let sel = (0..code).map(|k| (pointer + k) % n_elems).collect();
    Ok((sel, (pointer + code) % n_elems))
}
