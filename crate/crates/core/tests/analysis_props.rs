use nssar::analysis::*;
use nssar::analytic::DesignParams;
use nssar::modulator::{run, ModulatorState, NonIdealities, Waveform};
use nssar::rng::stream_rng;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

const FS: f64 = 500e3;

fn tone(n: usize, bin: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|i| amp * (2.0 * PI * bin as f64 * i as f64 / n as f64).sin()).collect()
}

#[test]
fn full_scale_tone_reads_zero_dbfs() {
    let n = 4096;
    let sp = periodogram(&tone(n, 101, 0.9), Window::Rectangular, n, FS, 0.9).unwrap();
    assert!(sp.db(101).abs() < 0.01, "{}", sp.db(101));
}

#[test]
fn parseval_holds_for_rectangular_window() {
    let mut rng = stream_rng(1, 1);
    let x: Vec<f64> = (0..8192).map(|_| rng.random_range(-0.5..0.5)).collect();
    let sp = periodogram(&x, Window::Rectangular, 8192, FS, 1.0).unwrap();
    let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let rel = (sp.total_power() * 0.5 / ms - 1.0).abs();
    assert!(rel < 1e-6, "{rel:e}");
}

#[test]
fn known_snr_is_recovered() {
    let n = 65536;
    let amp = 0.5;
    let noise_rms = amp / 2f64.sqrt() * 10f64.powf(-60.0 / 20.0);
    let mut rng = stream_rng(2, 2);
    let x: Vec<f64> = tone(n, 1001, amp)
        .into_iter()
        .map(|v| v + noise_rms * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let sp = periodogram(&x, Window::Hann, n, FS, 1.0).unwrap();
    let m = sndr(&sp, sp.freq(1001), 1).unwrap();
    assert!((m.sndr_db - 60.0).abs() < 0.5, "{}", m.sndr_db);
}

#[test]
fn quantised_tone_meets_classical_bound() {
    let n = 65536;
    let bits = 10u32;
    let lsb = 2.0 / (1u64 << bits) as f64;
    let x: Vec<f64> = tone(n, 1001, 1.0 - lsb).into_iter().map(|v| (v / lsb).round() * lsb).collect();
    let sp = periodogram(&x, Window::Hann, n, FS, 1.0).unwrap();
    let m = sndr(&sp, sp.freq(1001), 1).unwrap();
    let want = 6.02 * bits as f64 + 1.76;
    assert!((m.sndr_db - want).abs() < 0.5, "{} vs {want}", m.sndr_db);
}

#[test]
fn tone_outside_band_is_rejected() {
    let sp = periodogram(&tone(4096, 1000, 0.5), Window::Hann, 4096, FS, 1.0).unwrap();
    assert!(sndr(&sp, sp.freq(1000), 16).is_err());
}

#[test]
fn oversized_fft_is_rejected() {
    assert!(periodogram(&[0.0; 100], Window::Hann, 128, FS, 1.0).is_err());
}

#[test]
fn sndr_is_stable_across_fft_lengths() {
    let d = DesignParams::default();
    let mut s = ModulatorState::new(d, NonIdealities::realistic(&d), 3).unwrap();
    let f = coherent_frequency(6500.0, d.fs, 1 << 14);
    let out = run(&mut s, &Waveform::Sine { amplitude_dbfs: -3.0, freq_hz: f }, (1 << 16) + 1024, false).unwrap();
    let v = out.output_volts();
    let tail = &v[v.len() - (1 << 16)..];
    let fsv = d.vdd / 2.0;
    let long = sndr(&periodogram(tail, Window::Hann, 1 << 16, d.fs, fsv).unwrap(), f, d.osr).unwrap().sndr_db;
    let short: f64 = tail
        .chunks(1 << 14)
        .map(|c| {
            let sp = periodogram(c, Window::Hann, 1 << 14, d.fs, fsv).unwrap();
            10f64.powf(-sndr(&sp, f, d.osr).unwrap().sndr_db / 10.0)
        })
        .sum::<f64>()
        / 4.0;
    let short = -10.0 * short.log10();
    assert!((long - short).abs() <= 0.2, "2^16: {long:.3} dB, 2^14: {short:.3} dB");
}

#[test]
fn decimator_has_unity_dc_gain_and_identity_at_osr_one() {
    let x = vec![0.37; 400];
    let y = decimate(&x, 16, 4).unwrap();
    assert!((y.last().unwrap() - 0.37).abs() < 1e-12);
    let z: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
    assert_eq!(decimate(&z, 1, 3).unwrap(), z);
    assert!(decimate(&z, 0, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decimator_is_linear(
        a in prop::collection::vec(-1.0f64..1.0, 256),
        b in prop::collection::vec(-1.0f64..1.0, 256),
        ka in -3.0f64..3.0,
        kb in -3.0f64..3.0,
        osr in 1usize..20,
        order in 1u32..5,
    ) {
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| ka * x + kb * y).collect();
        let ya = decimate(&a, osr, order).unwrap();
        let yb = decimate(&b, osr, order).unwrap();
        let ym = decimate(&mix, osr, order).unwrap();
        for ((m, x), y) in ym.iter().zip(&ya).zip(&yb) {
            prop_assert!((m - (ka * x + kb * y)).abs() < 1e-9);
        }
    }

    #[test]
    fn decimator_is_shift_invariant(x in prop::collection::vec(-1.0f64..1.0, 256), osr in 1usize..12, order in 1u32..5) {
        let mut shifted = vec![0.0; osr];
        shifted.extend_from_slice(&x);
        let y = decimate(&x, osr, order).unwrap();
        let ys = decimate(&shifted, osr, order).unwrap();
        for (a, b) in y.iter().zip(&ys[1..]) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn band_edge_is_exact(osr in 1u32..512, bin in 1usize..8) {
        let n = 4096;
        let sp = periodogram(&tone(n, bin, 0.5), Window::Hann, n, FS, 1.0).unwrap();
        let m = sndr(&sp, sp.freq(bin), osr);
        if let Ok(m) = m {
            prop_assert_eq!(m.in_band_edge_hz, FS / (2.0 * osr as f64));
        }
    }

    #[test]
    fn enob_follows_sndr(bin in 20usize..200, amp in 0.01f64..1.0) {
        let n = 8192;
        let mut rng = stream_rng(bin as u64, 0);
        let x: Vec<f64> = tone(n, bin, amp).into_iter().map(|v| v + 1e-4 * rng.sample::<f64, _>(StandardNormal)).collect();
        let sp = periodogram(&x, Window::Hann, n, FS, 1.0).unwrap();
        let m = sndr(&sp, sp.freq(bin), 1).unwrap();
        prop_assert!((m.enob_bits - (m.sndr_db - 1.76) / 6.02).abs() < 1e-12);
    }

    #[test]
    fn spectrum_frequencies_ascend_to_nyquist(log_n in 4u32..13) {
        let n = 1usize << log_n;
        let sp = periodogram(&vec![0.1; n], Window::Hann, n, FS, 1.0).unwrap();
        let bins = sp.bins();
        prop_assert_eq!(bins.len(), n / 2 + 1);
        prop_assert!(bins.windows(2).all(|w| w[1].0 > w[0].0));
        prop_assert_eq!(bins.last().unwrap().0, FS / 2.0);
        prop_assert!(bins.iter().all(|b| b.1.is_finite()));
    }
}
