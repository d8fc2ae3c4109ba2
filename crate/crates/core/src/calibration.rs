//! Background calibration of the MSB unit capacitors.
//!
//! Two disjoint, equally sized sets of MSB elements are compared through the
//! residue amplifier and the comparator. The sign of each comparison is
//! accumulated per element and, once an accumulator reaches the threshold,
//! the element's 8-bit trim code moves one step.

use crate::error::{Error, Result};
use crate::modulator::{sample_std, CapArrayState, ModulatorState, Waveform, DEFAULT_A1_GAIN};
use crate::rng::{stream, stream_rng, SimRng};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

pub const TRIM_MID_CODE: u8 = 128;
pub const DEFAULT_TRIM_RANGE: f64 = 0.05;
pub const DEFAULT_TRIM_THRESHOLD: i32 = 4;

/// Per-element trim codes of the 8-bit sub-DAC.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimTable {
    pub codes: Vec<u8>,
    pub accumulators: Vec<i32>,
    /// Full trim span as a fraction of one unit capacitor.
    pub range_frac: f64,
    pub threshold: i32,
}

impl TrimTable {
    pub fn new(n: usize) -> Self {
        Self::with_params(n, DEFAULT_TRIM_RANGE, DEFAULT_TRIM_THRESHOLD)
    }

    pub fn with_params(n: usize, range_frac: f64, threshold: i32) -> Self {
        Self {
            codes: vec![TRIM_MID_CODE; n],
            accumulators: vec![0; n],
            range_frac,
            threshold: threshold.max(1),
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Relative capacitance of one trim code.
    pub fn step(&self) -> f64 {
        self.range_frac / 256.0
    }

    /// Amount subtracted from element `i`'s relative error.
    pub fn correction(&self, i: usize) -> f64 {
        (self.codes[i] as f64 - TRIM_MID_CODE as f64) * self.step()
    }

    /// `index,code` lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,code\n");
        for (i, c) in self.codes.iter().enumerate() {
            s.push_str(&format!("{i},{c}\n"));
        }
        s
    }

    /// Parses `index,code` lines; `#` comments and a header line are skipped.
    /// Indices must cover `0..n` exactly once.
    pub fn from_csv(text: &str, n: usize) -> Result<Self> {
        let mut t = Self::new(n);
        let mut seen = vec![false; n];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "index,code" {
                continue;
            }
            let bad = |why: &str| Error::config(format!("trims line {}", lineno + 1), why.to_string());
            let (i, c) = line.split_once(',').ok_or_else(|| bad("expected index,code"))?;
            let i: usize = i.trim().parse().map_err(|_| bad("bad index"))?;
            let c: u8 = c.trim().parse().map_err(|_| bad("code must be 0..=255"))?;
            if i >= n {
                return Err(bad("index out of range"));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(bad("duplicate index"));
            }
            t.codes[i] = c;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::config("trims", format!("missing index {i}")));
        }
        Ok(t)
    }
}

/// One comparison between two balanced element sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ShuffleMeasurement {
    pub set_plus: Vec<usize>,
    pub set_minus: Vec<usize>,
    pub sign: i8,
    /// Amplified residual seen by the comparator, V.
    pub raw_residual: f64,
}

impl ShuffleMeasurement {
    fn sets(set_plus: Vec<usize>, set_minus: Vec<usize>) -> Self {
        Self { set_plus, set_minus, sign: 0, raw_residual: 0.0 }
    }
}

/// Random balanced partition of `⌊n/2⌋` against `⌊n/2⌋` elements.
pub fn shuffle_pair(array: &CapArrayState, seed: u64) -> Result<ShuffleMeasurement> {
    shuffle_sets(array.n_msb(), &mut stream_rng(seed, stream::SHUFFLE))
}

pub(crate) fn shuffle_sets(n: usize, rng: &mut SimRng) -> Result<ShuffleMeasurement> {
    if n < 2 {
        return Err(Error::param("msb_elements", format!("need at least 2, got {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let half = n / 2;
    let minus = idx[half..2 * half].to_vec();
    idx.truncate(half);
    Ok(ShuffleMeasurement::sets(idx, minus))
}

/// Balanced `⌊n/2⌋` against `⌊n/2⌋` partition of the element ring as seen
/// from a conversion's DWA start, so the live pointer decides which physical
/// elements land in each set.
fn sets_from_selection(dwa_start: usize, n: usize, rng: &mut SimRng) -> Result<ShuffleMeasurement> {
    let mut m = shuffle_sets(n, rng)?;
    for i in m.set_plus.iter_mut().chain(m.set_minus.iter_mut()) {
        *i = (*i + dwa_start) % n;
    }
    Ok(m)
}

/// How a set difference becomes a comparator input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensing {
    /// Residue-amplifier gain.
    pub gain: f64,
    /// Voltage of one unit MSB element, V.
    pub unit_volts: f64,
    pub cmp_noise_rms: f64,
}

impl Sensing {
    pub fn for_state(state: &ModulatorState) -> Self {
        Self {
            gain: DEFAULT_A1_GAIN,
            unit_volts: state.arrays.msb_unit_codes() as f64 * state.lsb(),
            cmp_noise_rms: state.nonideal.cmp_noise_rms,
        }
    }
}

/// Compares the trimmed capacitance of `set_plus` against `set_minus`.
pub fn measure_mismatch(
    array: &CapArrayState,
    sets: &ShuffleMeasurement,
    sensing: &Sensing,
    rng: &mut SimRng,
) -> ShuffleMeasurement {
    let e = array.effective_msb_errors();
    let sum = |s: &[usize]| s.iter().map(|&i| e[i]).sum::<f64>();
    let raw = sensing.gain * sensing.unit_volts * (sum(&sets.set_plus) - sum(&sets.set_minus));
    let noise = if sensing.cmp_noise_rms > 0.0 {
        sensing.cmp_noise_rms * rng.sample::<f64, _>(StandardNormal)
    } else {
        0.0
    };
    let v = raw + noise;
    ShuffleMeasurement {
        set_plus: sets.set_plus.clone(),
        set_minus: sets.set_minus.clone(),
        sign: if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        },
        raw_residual: raw,
    }
}

/// Accumulates one measurement into `t`.
pub fn update_trims(t: &mut TrimTable, m: &ShuffleMeasurement) {
    if m.sign == 0 {
        return;
    }
    let s = m.sign as i32;
    for &i in &m.set_plus {
        t.accumulators[i] -= s;
    }
    for &i in &m.set_minus {
        t.accumulators[i] += s;
    }
    for i in m.set_plus.iter().chain(&m.set_minus) {
        let acc = &mut t.accumulators[*i];
        let code = &mut t.codes[*i];
        if *acc <= -t.threshold {
            *code = code.saturating_add(1);
            *acc = 0;
        } else if *acc >= t.threshold {
            *code = code.saturating_sub(1);
            *acc = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub trims: TrimTable,
    /// Sample std of the MSB errors before and after, relative to a unit.
    pub initial_std: f64,
    pub residual_std: f64,
    /// `log2(initial_std / residual_std)`.
    pub effective_bits: f64,
    /// Residual std after every `trace_every` cycles.
    pub std_trace: Vec<f64>,
    pub cycles_used: u64,
}

pub const TRACE_EVERY: u64 = 1000;

/// Runs `n_cycles` of shuffle → measure → update on `state`'s MSB array.
pub fn run_calibration(state: &mut ModulatorState, n_cycles: u64, seed: u64) -> Result<CalibrationReport> {
    run_calibration_with_input(state, n_cycles, seed, None)
}

/// As [`run_calibration`], optionally converting `input` concurrently. With
/// an input, each cycle's partition is anchored at that conversion's DWA
/// start.
pub fn run_calibration_with_input(
    state: &mut ModulatorState,
    n_cycles: u64,
    seed: u64,
    input: Option<&Waveform>,
) -> Result<CalibrationReport> {
    if n_cycles == 0 {
        return Err(Error::param("n_cycles", "must be >= 1"));
    }
    let n = state.arrays.n_msb();
    if n < 2 {
        return Err(Error::param("msb_elements", format!("need at least 2, got {n}")));
    }
    let fs = state.design.fs;
    if let Some(w) = input {
        w.validate(fs, usize::try_from(n_cycles).unwrap_or(usize::MAX))?;
    }
    let sensing = Sensing::for_state(state);
    let mut rng = stream_rng(seed, stream::CALIBRATION);
    let initial_std = state.arrays.msb_mismatch_std();
    let mut std_trace = Vec::new();
    for cycle in 0..n_cycles {
        let sets = match input {
            None => shuffle_sets(n, &mut rng)?,
            Some(w) => {
                let v = w.sample(cycle as usize, fs, state.full_scale());
                let d = state.convert_sample(v).diagnostics;
                sets_from_selection(d.dwa_start, n, &mut rng)?
            }
        };
        let m = measure_mismatch(&state.arrays, &sets, &sensing, &mut rng);
        update_trims(&mut state.arrays.trim, &m);
        if (cycle + 1) % TRACE_EVERY == 0 {
            std_trace.push(state.arrays.msb_mismatch_std());
        }
    }
    let residual_std = state.arrays.msb_mismatch_std();
    Ok(CalibrationReport {
        trims: state.arrays.trim.clone(),
        initial_std,
        residual_std,
        effective_bits: (initial_std / residual_std).log2(),
        std_trace,
        cycles_used: n_cycles,
    })
}

/// Std of the trimmed errors, relative to a unit.
pub fn residual_std(array: &CapArrayState) -> f64 {
    sample_std(&array.effective_msb_errors())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::DesignParams;
    use crate::modulator::{build_array, NonIdealities};
    use proptest::prelude::*;

    fn sensing() -> Sensing {
        Sensing { gain: 30.0, unit_volts: 0.1125, cmp_noise_rms: 0.0 }
    }

    #[test]
    fn two_element_pair() {
        let m = shuffle_sets(2, &mut stream_rng(3, 3)).unwrap();
        let mut all = [m.set_plus[0], m.set_minus[0]];
        all.sort();
        assert_eq!(all, [0, 1]);
    }

    #[test]
    fn shuffle_is_seeded() {
        let a = build_array(4, 10, 0.0, 0).unwrap();
        assert_eq!(shuffle_pair(&a, 5).unwrap(), shuffle_pair(&a, 5).unwrap());
        assert_ne!(shuffle_pair(&a, 5).unwrap(), shuffle_pair(&a, 6).unwrap());
    }

    #[test]
    fn single_heavy_capacitor_reads_positive() {
        let mut a = build_array(4, 10, 0.0, 0).unwrap();
        a.msb_units[3] = 0.01;
        let sets = ShuffleMeasurement::sets(vec![3, 4], vec![0, 1]);
        let m = measure_mismatch(&a, &sets, &sensing(), &mut stream_rng(0, 0));
        assert_eq!(m.sign, 1);
        let m = measure_mismatch(&build_array(4, 10, 0.0, 0).unwrap(), &sets, &sensing(), &mut stream_rng(0, 0));
        assert_eq!(m.sign, 0);
    }

    #[test]
    fn threshold_positive_results_step_once() {
        let mut t = TrimTable::new(15);
        let m = ShuffleMeasurement { sign: 1, ..ShuffleMeasurement::sets(vec![2], vec![7]) };
        for k in 0..DEFAULT_TRIM_THRESHOLD {
            assert_eq!(t.codes[2], 128, "after {k}");
            update_trims(&mut t, &m);
        }
        assert_eq!(t.codes[2], 129);
        assert_eq!(t.codes[7], 127);
        assert_eq!(t.accumulators[2], 0);
    }

    #[test]
    fn zero_sign_is_noop() {
        let mut t = TrimTable::new(15);
        let before = t.clone();
        update_trims(&mut t, &ShuffleMeasurement::sets(vec![0], vec![1]));
        assert_eq!(t, before);
    }

    #[test]
    fn trim_subtracts_steps() {
        let mut a = build_array(4, 10, 0.005, 2).unwrap();
        a.trim.codes[0] = 140;
        a.trim.codes[1] = 100;
        let e = a.effective_msb_errors();
        let step = 0.05 / 256.0;
        assert_eq!(e[0], a.msb_units[0] - 12.0 * step);
        assert_eq!(e[1], a.msb_units[1] + 28.0 * step);
        assert_eq!(e[2], a.msb_units[2]);
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let mut t = TrimTable::new(3);
        t.codes = vec![0, 128, 255];
        let back = TrimTable::from_csv(&format!("# h\n{}", t.to_csv()), 3).unwrap();
        assert_eq!(back.codes, t.codes);
        assert!(TrimTable::from_csv("0,1\n1,2\n", 3).is_err());
        assert!(TrimTable::from_csv("0,1\n1,2\n2,256\n", 3).is_err());
        assert!(TrimTable::from_csv("0,1\n0,2\n2,3\n", 3).is_err());
    }

    #[test]
    fn zero_mismatch_trims_stay_put() {
        let d = DesignParams { cap_sigma: 0.0, ..DesignParams::default() };
        let mut s = ModulatorState::new(d, NonIdealities::ideal(&d), 1).unwrap();
        let r = run_calibration(&mut s, 2000, 1).unwrap();
        assert!(r.trims.codes.iter().all(|&c| (127..=129).contains(&c)));
    }

    #[test]
    fn selection_sets_are_balanced_and_disjoint() {
        let mut rng = stream_rng(1, 1);
        for start in 0..15 {
            let s = sets_from_selection(start, 15, &mut rng).unwrap();
            assert_eq!((s.set_plus.len(), s.set_minus.len()), (7, 7));
            assert!(s.set_plus.iter().chain(&s.set_minus).all(|&i| i < 15));
            assert!(s.set_plus.iter().all(|i| !s.set_minus.contains(i)));
        }
    }

    proptest! {
        #[test]
        fn codes_follow_clamped_walk(signs in prop::collection::vec(prop_oneof![Just(-1i8), Just(0), Just(1), Just(1), Just(1)], 0..600)) {
            let mut t = TrimTable::with_params(4, 0.05, 1);
            let (mut plus, mut minus) = (128i32, 128i32);
            for s in signs {
                update_trims(&mut t, &ShuffleMeasurement { sign: s, ..ShuffleMeasurement::sets(vec![0, 1], vec![2, 3]) });
                plus = (plus + s as i32).clamp(0, 255);
                minus = (minus - s as i32).clamp(0, 255);
            }
            prop_assert_eq!(t.codes[0] as i32, plus);
            prop_assert_eq!(t.codes[2] as i32, minus);
            prop_assert!(t.accumulators.iter().all(|a| *a == 0));
        }
    }
}
