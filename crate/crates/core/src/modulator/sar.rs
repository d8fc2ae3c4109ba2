use super::array::CapArrayState;
use crate::analytic::DesignParams;
use crate::rng::SimRng;
use crate::units::BOLTZMANN;
use rand::Rng;
use rand_distr::StandardNormal;

/// Non-ideal effects applied during a conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonIdealities {
    /// DAC settling per bit trial in time constants; `inf` settles fully.
    pub settle_tau: f64,
    /// Comparator offset, V.
    pub cmp_offset: f64,
    /// Comparator input-referred noise, V rms.
    pub cmp_noise_rms: f64,
    /// Inject kT/C_T noise in the sampling and residue-sampling phases.
    pub thermal_noise: bool,
    /// Draw capacitor mismatch from the design's `cap_sigma`.
    pub mismatch_enabled: bool,
    pub dwa_enabled: bool,
    /// Mismatch-error-shaping order for the LSB arrays, 0..=2.
    pub mes_order: u32,
    /// Open-loop gain of the loop-filter amplifiers; `None` is ideal.
    pub amp_finite_gain: Option<f64>,
    /// Relative error of the feedforward attenuation against `1/G1`.
    pub gain_mismatch: f64,
    /// Amplifier output swing, ±V.
    pub amp_rail: f64,
}

impl NonIdealities {
    /// Everything off; DWA and MES structurally present at the design's
    /// shaping order.
    pub fn ideal(design: &DesignParams) -> Self {
        Self {
            settle_tau: f64::INFINITY,
            cmp_offset: 0.0,
            cmp_noise_rms: 0.0,
            thermal_noise: false,
            mismatch_enabled: false,
            dwa_enabled: true,
            mes_order: design.mes_order,
            amp_finite_gain: None,
            gain_mismatch: 0.0,
            amp_rail: design.vdd / 2.0,
        }
    }

    /// Every modelled non-ideality on at the design values. Comparator noise
    /// is half the kT/C_T rms.
    pub fn realistic(design: &DesignParams) -> Self {
        Self {
            settle_tau: design.settle_tau,
            cmp_noise_rms: 0.5 * kt_c_rms(design),
            thermal_noise: true,
            mismatch_enabled: true,
            ..Self::ideal(design)
        }
    }
}

/// `sqrt(kT/C_T)`, V.
pub fn kt_c_rms(design: &DesignParams) -> f64 {
    (BOLTZMANN * design.temperature / design.c_total).sqrt()
}

/// Per-conversion view of the array: DWA start element and active LSB array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SarSelection {
    pub dwa_start: usize,
    pub lsb_array: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SarOutcome {
    /// Raw unsigned N-bit code.
    pub code: u32,
    /// Voltage left on the DAC node, V; includes the feedforward.
    pub residue: f64,
    /// DAC value realised for `code`, V (signed about mid-scale).
    pub dac_value: f64,
    /// Input outside the quantiser range; the code saturated.
    pub overload: bool,
    /// RMS of the settling errors injected into the bit trials, V.
    pub settling_rms: f64,
}

/// Realised DAC levels for one conversion.
pub(crate) struct DacLevels<'a> {
    arrays: &'a CapArrayState,
    lsb_array: usize,
    /// prefix[m] = sum of the first `m` DWA-ordered centred MSB errors
    prefix: Vec<f64>,
    unit: f64,
    half_range: f64,
    lsb_mask: u64,
}

impl<'a> DacLevels<'a> {
    pub(crate) fn new(arrays: &'a CapArrayState, sel: SarSelection) -> Self {
        let w = arrays.centered_msb_errors();
        let n = w.len();
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for j in 0..n {
            let e = w[(sel.dwa_start + j) % n];
            prefix.push(prefix[j] + e);
        }
        Self {
            arrays,
            lsb_array: sel.lsb_array,
            prefix,
            unit: arrays.msb_unit_codes() as f64,
            half_range: (1u64 << (arrays.sar_bits - 1)) as f64,
            lsb_mask: arrays.msb_unit_codes() - 1,
        }
    }

    /// Realised level of `code` in LSB units, signed about mid-scale.
    pub(crate) fn level(&self, code: u64) -> f64 {
        let m = (code >> self.arrays.lsb_bits()) as usize;
        let l = code & self.lsb_mask;
        let msb = self.unit * (m as f64 + self.prefix[m]);
        let lsb = l as f64 + self.arrays.lsb_error_codes(self.lsb_array, l);
        msb + lsb - self.half_range
    }

    /// MSB mismatch of `code` in LSB units.
    pub(crate) fn msb_error(&self, code: u64) -> f64 {
        let m = (code >> self.arrays.lsb_bits()) as usize;
        self.unit * self.prefix[m]
    }

    /// LSB-array mismatch of `code` in LSB units.
    pub(crate) fn lsb_error(&self, code: u64) -> f64 {
        self.arrays.lsb_error_codes(self.lsb_array, code & self.lsb_mask)
    }
}

/// Asynchronous binary search over the N-bit DAC.
///
/// Each bit trial compares the DAC node (sampled input plus `filter_ff`
/// minus the trial level, offset by half an LSB so the search rounds) after
/// adding the comparator offset, a comparator noise draw and a settling
/// error of `step · e^(−τ) · u`, `u ~ U[−1, 1]`. The residue is the fully
/// settled node voltage after the last trial.
pub fn sar_convert(
    arrays: &CapArrayState,
    sel: SarSelection,
    filter_ff: f64,
    v_sampled: f64,
    nonideal: &NonIdealities,
    lsb: f64,
    rng: &mut SimRng,
) -> SarOutcome {
    let dac = DacLevels::new(arrays, sel);
    convert_with(&dac, arrays.sar_bits, filter_ff, v_sampled, nonideal, lsb, rng)
}

pub(crate) fn convert_with(
    dac: &DacLevels<'_>,
    sar_bits: u32,
    filter_ff: f64,
    v_sampled: f64,
    nonideal: &NonIdealities,
    lsb: f64,
    rng: &mut SimRng,
) -> SarOutcome {
    let x = (v_sampled + filter_ff) / lsb;
    let settle = if nonideal.settle_tau.is_finite() {
        (-nonideal.settle_tau).exp()
    } else {
        0.0
    };
    let mut code: u64 = 0;
    let mut settle_energy = 0.0;
    for bit in (0..sar_bits).rev() {
        let trial = code | 1 << bit;
        let node = (x - dac.level(trial) + 0.5) * lsb;
        let mut decision = node + nonideal.cmp_offset;
        if settle > 0.0 {
            let step = (1u64 << bit) as f64 * lsb;
            let e = step * settle * rng.random_range(-1.0..=1.0);
            settle_energy += e * e;
            decision += e;
        }
        if nonideal.cmp_noise_rms > 0.0 {
            let n: f64 = rng.sample(StandardNormal);
            decision += nonideal.cmp_noise_rms * n;
        }
        if decision >= 0.0 {
            code = trial;
        }
    }
    let max = (1u64 << sar_bits) - 1;
    let overload = x > dac.level(max) + 0.5 || x < dac.level(0) - 0.5;
    let level = dac.level(code);
    SarOutcome {
        code: code as u32,
        residue: (x - level) * lsb,
        dac_value: level * lsb,
        overload,
        settling_rms: (settle_energy / sar_bits as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulator::array::build_array;
    use crate::rng::stream_rng;

    fn ideal_setup() -> (CapArrayState, NonIdealities, f64) {
        let d = DesignParams::default();
        (build_array(4, 10, 0.0, 0).unwrap(), NonIdealities::ideal(&d), d.vdd / 1024.0)
    }

    const SEL: SarSelection = SarSelection { dwa_start: 0, lsb_array: 0 };

    #[test]
    fn zero_input_lands_mid_code() {
        let (a, ni, lsb) = ideal_setup();
        let mut rng = stream_rng(0, 0);
        let o = sar_convert(&a, SEL, 0.0, 0.0, &ni, lsb, &mut rng);
        assert_eq!(o.code, 512);
        assert!(o.residue.abs() <= lsb / 2.0);
        assert!(!o.overload);
    }

    #[test]
    fn three_eighths_full_scale() {
        let (a, ni, lsb) = ideal_setup();
        let mut rng = stream_rng(0, 0);
        let v = 0.375 * 0.9;
        let o = sar_convert(&a, SEL, 0.0, v, &ni, lsb, &mut rng);
        let signed = o.code as i64 - 512;
        assert!((signed - (v / lsb).round() as i64).abs() <= 1);
        assert!((o.residue - (v - signed as f64 * lsb)).abs() < 1e-15);
    }

    #[test]
    fn rounding_matches_arithmetic_oracle() {
        let (a, ni, lsb) = ideal_setup();
        let mut rng = stream_rng(0, 0);
        for i in -2000..2000 {
            let v = i as f64 * 0.000_437;
            let o = sar_convert(&a, SEL, 0.0, v, &ni, lsb, &mut rng);
            let expect = ((v / lsb + 0.5).floor() as i64).clamp(-512, 511);
            assert_eq!(o.code as i64 - 512, expect, "v={v}");
            assert!(o.residue.abs() <= lsb / 2.0 + 1e-12);
        }
    }

    #[test]
    fn feedforward_adds_to_the_node() {
        let (a, ni, lsb) = ideal_setup();
        let mut rng = stream_rng(0, 0);
        let o1 = sar_convert(&a, SEL, 10.0 * lsb, 0.1, &ni, lsb, &mut rng);
        let o2 = sar_convert(&a, SEL, 0.0, 0.1 + 10.0 * lsb, &ni, lsb, &mut rng);
        assert_eq!(o1.code, o2.code);
    }

    #[test]
    fn overload_saturates_and_flags() {
        let (a, ni, lsb) = ideal_setup();
        let mut rng = stream_rng(0, 0);
        let o = sar_convert(&a, SEL, 0.0, 1.2, &ni, lsb, &mut rng);
        assert_eq!(o.code, 1023);
        assert!(o.overload);
        let o = sar_convert(&a, SEL, 0.0, -1.2, &ni, lsb, &mut rng);
        assert_eq!(o.code, 0);
        assert!(o.overload);
    }

    #[test]
    fn mismatch_moves_levels() {
        let a = build_array(4, 10, 0.01, 5).unwrap();
        let dac = DacLevels::new(&a, SEL);
        let w = a.centered_msb_errors();
        let code = (3u64 << 6) | 5;
        let expect = 64.0 * (3.0 + w[0] + w[1] + w[2]) + 5.0 + a.lsb_error_codes(0, 5) - 512.0;
        assert!((dac.level(code) - expect).abs() < 1e-12);
        // full MSB set sums to zero mismatch
        assert!(dac.msb_error(15 << 6).abs() < 1e-12);
    }
}
