//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use common::*;
use nssar::analysis::{in_band_power, periodogram, Window};
use nssar::analytic::{precision, snp_eval, DesignParams, SweepPreset};
use nssar::calibration::{run_calibration, run_calibration_with_input};
use nssar::config::RunConfig;
use nssar::experiment::{median, simulate, SimulationOutcome};
use nssar::modulator::{ntf_probe, run, ModulatorState, NonIdealities, Waveform};
use std::process::ExitCode;
use std::time::{Duration, Instant};

const PROPOSED_SNDR_DB: f64 = 102.673_776_014_649_67;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: u32, ok: bool, what: &str) {
        if ok {
            println!("PASS criterion {id}: {what}");
        } else {
            println!("FAIL criterion {id}: {what}");
            self.failures += 1;
        }
    }
}

fn sndr_of(o: &SimulationOutcome) -> f64 {
    o.metrics.as_ref().expect("tone metrics").sndr_db
}

fn peak_sndr(r: &mut Report) -> SimulationOutcome {
    let cfg = RunConfig::default();
    let t = Instant::now();
    let o = simulate(&cfg, cfg.seed).unwrap();
    let dt = t.elapsed();
    let s = sndr_of(&o);
    r.check(1, (99.0..=105.0).contains(&s), &format!("peak SNDR {s:.2} dB, expected 102 ± 3 dB"));
    r.check(1, dt < Duration::from_secs(10), &format!("trial runtime {dt:.2?}, limit 10 s"));
    o
}

fn analytic_consistency(r: &mut Report) {
    let b = precision(&DesignParams::proposed());
    let err = (b.sndr_db - PROPOSED_SNDR_DB).abs();
    r.check(2, err <= 0.01, &format!("proposed precision {:.4} dB, oracle {PROPOSED_SNDR_DB:.4} dB", b.sndr_db));
    for preset in SweepPreset::ALL {
        let curve = preset.run(&DesignParams::default()).unwrap();
        let monotone = curve.series.iter().all(|(_, v)| v.windows(2).all(|w| w[1] >= w[0]));
        let ordered = curve.series.windows(2).all(|pair| {
            pair[0].1.iter().zip(&pair[1].1).all(|(lo, hi)| hi > lo)
        });
        r.check(
            2,
            monotone && ordered,
            &format!("{} sweep monotone in OSR ({monotone}) and ordered across variants ({ordered})", preset.name()),
        );
    }
}

fn ntf_property(r: &mut Report) {
    let d = DesignParams::default();
    let s = ModulatorState::new(d, NonIdealities::ideal(&d), 1).unwrap();
    let h = ntf_probe(&s, 6);
    let want = [1.0, -2.0, 1.0, 0.0, 0.0, 0.0];
    let dev = h.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    r.check(3, dev <= 1e-9, &format!("M=2 impulse response {h:?}, max deviation {dev:.1e}"));
    let e = quantisation_error(&d, 1 << 18, 6492.6);
    let slope = decade_slope(&welch(&e, SLOPE_SEGMENT, d.fs), SLOPE_K0);
    r.check(3, (36.0..=44.0).contains(&slope), &format!("quantisation-noise slope {slope:.2} dB/dec, expected 40 ± 4"));
}

fn mismatch_shaping(r: &mut Report) {
    let mut on = RunConfig::default();
    on.cal.enabled = false;
    let mut off = on.clone();
    off.nonideal.dwa = false;
    off.nonideal.mes_order = Some(0);
    let seeds: Vec<u64> = (1..=10).collect();
    let run_all = |cfg: &RunConfig| -> Vec<f64> {
        seeds.iter().map(|&s| sndr_of(&simulate(cfg, s).unwrap())).collect()
    };
    let (m_on, m_off) = (median(&run_all(&on)), median(&run_all(&off)));
    r.check(
        4,
        m_on - m_off >= 15.0,
        &format!("DWA+MES(E=2) median SNDR {m_on:.2} dB vs {m_off:.2} dB disabled, gain {:.2} dB", m_on - m_off),
    );
    let fs = DesignParams::default().fs;
    for (order, lo, hi) in [(2u32, 34.0, 46.0), (1, 16.0, 24.0)] {
        let (lsb, _) = mismatch_traces(order, 1 << 18, 2);
        let slope = decade_slope(&welch(&lsb, SLOPE_SEGMENT, fs), SLOPE_K0);
        r.check(
            4,
            (lo..=hi).contains(&slope),
            &format!("LSB-mismatch slope with E={order}: {slope:.2} dB/dec, expected {}", if order == 2 { "40 ± 6" } else { "20 ± 4" }),
        );
    }
}

fn calibration(r: &mut Report, peak: &SimulationOutcome) {
    let d = DesignParams::default();
    let mut s = ModulatorState::new(d, NonIdealities::realistic(&d), 1).unwrap();
    let rep = run_calibration(&mut s, 20_000, 1).unwrap();
    r.check(
        5,
        rep.residual_std <= 5e-4,
        &format!("residual mismatch std {:.3e} (from {:.3e}), limit 5e-4", rep.residual_std, rep.initial_std),
    );
    let s_db = sndr_of(peak);
    r.check(5, s_db >= 98.0, &format!("post-calibration SNDR {s_db:.2} dB, limit 98 dB"));
    let mut s = ModulatorState::new(d, NonIdealities::realistic(&d), 1).unwrap();
    let w = Waveform::Sine { amplitude_dbfs: 0.0, freq_hz: 6492.6 };
    let rep = run_calibration_with_input(&mut s, 20_000, 1, Some(&w)).unwrap();
    r.check(
        5,
        rep.residual_std <= 5e-4,
        &format!("residual std with concurrent full-scale input {:.3e}, limit 5e-4", rep.residual_std),
    );
}

fn thermal_floor(r: &mut Report) {
    let d = DesignParams { sar_bits: 16, ..DesignParams::default() };
    let n = 65536;
    let mut acc = 0.0;
    let seeds = 8;
    for seed in 1..=seeds {
        let mut ni = NonIdealities::ideal(&d);
        ni.thermal_noise = true;
        let mut s = ModulatorState::new(d, ni, seed).unwrap();
        let fsv = s.full_scale();
        let out = run(&mut s, &Waveform::Dc { level: 0.0 }, n + 1024, false).unwrap();
        let sp = periodogram(&out.output_volts(), Window::Hann, n, d.fs, fsv).unwrap();
        acc += in_band_power(&sp, d.osr) * d.signal_power() / seeds as f64;
    }
    let diff = 10.0 * (acc / snp_eval(&d)).log10();
    r.check(6, diff.abs() <= 1.0, &format!("thermal in-band noise {acc:.4e} V², {diff:+.2} dB from prediction"));
}

fn decimation(r: &mut Report, peak: &SimulationOutcome) {
    let full = sndr_of(peak);
    let dec = peak.decimated.as_ref().expect("decimated metrics").sndr_db;
    r.check(
        7,
        (dec - full).abs() <= 1.0,
        &format!("decimated SNDR {dec:.2} dB vs undecimated {full:.2} dB at 31.25 kS/s"),
    );
}

fn determinism(r: &mut Report) {
    let mut cfg = RunConfig::default();
    cfg.sim.n_samples = 16384;
    let a = simulate(&cfg, 7).unwrap();
    let b = simulate(&cfg, 7).unwrap();
    let same = a.spectrum.to_csv() == b.spectrum.to_csv()
        && a.metrics.as_ref().unwrap().to_kv() == b.metrics.as_ref().unwrap().to_kv()
        && a.trims.to_csv() == b.trims.to_csv()
        && a.run.codes_text() == b.run.codes_text();
    r.check(8, same, "identical config and seed give identical spectra, metrics, trims and codes");
}

fn main() -> ExitCode {
    let mut r = Report { failures: 0 };
    let peak = peak_sndr(&mut r);
    analytic_consistency(&mut r);
    ntf_property(&mut r);
    mismatch_shaping(&mut r);
    calibration(&mut r, &peak);
    thermal_floor(&mut r);
    decimation(&mut r, &peak);
    determinism(&mut r);
    if r.failures == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} acceptance check(s) failed", r.failures);
        ExitCode::FAILURE
    }
}
