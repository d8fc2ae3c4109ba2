use super::spectrum::Spectrum;
use crate::error::{Error, Result};

/// Impulse response of an `order`-stage comb of length `r`, integer taps
/// summing to `r^order`.
fn comb_taps(r: usize, order: u32) -> Vec<u64> {
    let mut taps = vec![1u64];
    for _ in 0..order {
        let mut next = vec![0u64; taps.len() + r - 1];
        for (i, t) in taps.iter().enumerate() {
            for v in &mut next[i..i + r] {
                *v += t;
            }
        }
        taps = next;
    }
    taps
}

/// sinc^`order` filter followed by keeping every `osr`-th sample.
///
/// Output sample `m` is the filter output at input index `m·osr + osr − 1`
/// with zero initial history; the DC gain is exactly one.
pub fn decimate(x: &[f64], osr: usize, order: u32) -> Result<Vec<f64>> {
    if osr == 0 {
        return Err(Error::Analysis("decimation factor must be >= 1".into()));
    }
    if osr == 1 {
        return Ok(x.to_vec());
    }
    let taps = comb_taps(osr, order);
    let gain = (osr as f64).powi(order as i32);
    let h: Vec<f64> = taps.iter().map(|&t| t as f64 / gain).collect();
    Ok((0..x.len() / osr)
        .map(|m| {
            let n = m * osr + osr - 1;
            h.iter()
                .enumerate()
                .take(n + 1)
                .map(|(j, hj)| hj * x[n - j])
                .sum()
        })
        .collect())
}

/// Magnitude response of the sinc^`order` decimator at `freq`, input rate `fs`.
pub fn comb_response(freq: f64, fs: f64, osr: usize, order: u32) -> f64 {
    let x = std::f64::consts::PI * freq / fs;
    if osr <= 1 || x.sin().abs() < 1e-300 {
        return 1.0;
    }
    ((osr as f64 * x).sin() / (osr as f64 * x.sin())).abs().powi(order as i32)
}

/// Spectrum of a decimated stream with the comb's passband droop divided
/// out. `fs_in` is the rate before decimation.
pub fn compensate_droop(sp: &Spectrum, fs_in: f64, osr: usize, order: u32) -> Spectrum {
    let mut out = sp.clone();
    for (k, p) in out.power.iter_mut().enumerate() {
        let h = comb_response(sp.freq(k), fs_in, osr, order);
        if h > 0.0 {
            *p /= h * h;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_at_one() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(decimate(&x, 1, 3).unwrap(), x);
    }

    #[test]
    fn zero_rejected() {
        assert!(decimate(&[1.0], 0, 3).is_err());
    }

    #[test]
    fn unity_dc_gain_after_transient() {
        let y = decimate(&[0.37; 1600], 16, 3).unwrap();
        assert_eq!(y.len(), 100);
        for v in &y[3..] {
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn taps_are_binomial_like() {
        assert_eq!(comb_taps(2, 2), vec![1, 2, 1]);
        assert_eq!(comb_taps(3, 1), vec![1, 1, 1]);
        assert_eq!(comb_taps(16, 3).iter().sum::<u64>(), 4096);
    }

    #[test]
    fn droop_matches_measured_tone_gain() {
        let fs = 500e3;
        let f = 53.0 * fs / 4096.0;
        let x: Vec<f64> = (0..65536)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin())
            .collect();
        let y = decimate(&x, 16, 3).unwrap();
        let peak = y[100..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - comb_response(f, fs, 16, 3)).abs() < 1e-3);
        assert_eq!(comb_response(0.0, fs, 16, 3), 1.0);
    }

    proptest! {
        #[test]
        fn superposition(
            a in prop::collection::vec(-1.0f64..1.0, 96),
            b in prop::collection::vec(-1.0f64..1.0, 96),
            k in -3.0f64..3.0,
        ) {
            let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + k * y).collect();
            let ya = decimate(&a, 8, 3).unwrap();
            let yb = decimate(&b, 8, 3).unwrap();
            let ys = decimate(&s, 8, 3).unwrap();
            for i in 0..ys.len() {
                prop_assert!((ys[i] - ya[i] - k * yb[i]).abs() < 1e-9);
            }
        }
    }
}
