use super::array::{build_array, CapArrayState};
use super::loop_filter::{LoopFilterState, DEFAULT_A1_GAIN};
use super::mes::{mes_offset, mes_offset_error, MesState};
use super::sar::{convert_with, kt_c_rms, DacLevels, NonIdealities, SarSelection};
use crate::analytic::DesignParams;
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng, SimRng};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;

/// Number of loop-filter states recorded per conversion.
pub const TRACED_STATES: usize = 4;

/// Per-conversion trace of the three phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub index: u64,
    pub msb_code: u32,
    /// First MSB element selected; the code selects `msb_code` consecutive
    /// elements from here.
    pub dwa_start: usize,
    pub lsb_array: u8,
    pub mes_offset_code: i64,
    pub feedforward: f64,
    /// Thermal noise added in the sampling phase, V.
    pub sampling_noise: f64,
    /// Thermal noise added to the residue in the QNF phase, V.
    pub residue_noise: f64,
    pub settling_rms: f64,
    /// Input of the residue amplifier, V.
    pub filter_input: f64,
    pub integrators: [f64; TRACED_STATES],
    /// Output error caused by MSB-element mismatch, V.
    pub msb_mismatch_error: f64,
    /// Output error caused by LSB-array mismatch after MES, V.
    pub lsb_mismatch_error: f64,
    pub overload: bool,
    pub saturated: bool,
}

impl Diagnostics {
    /// One-line `key=value` record.
    pub fn to_record(&self) -> String {
        let mut s = format!(
            "n={} msb={} dwa_start={} lsb_array={} mes={} ff={:e} smp_noise={:e} qnf_noise={:e} settle_rms={:e} filter_in={:e}",
            self.index,
            self.msb_code,
            self.dwa_start,
            self.lsb_array,
            self.mes_offset_code,
            self.feedforward,
            self.sampling_noise,
            self.residue_noise,
            self.settling_rms,
            self.filter_input,
        );
        for (i, v) in self.integrators.iter().enumerate() {
            let _ = write!(s, " int{}={:e}", i + 1, v);
        }
        let _ = write!(
            s,
            " msb_err={:e} lsb_err={:e} overload={} saturated={}",
            self.msb_mismatch_error, self.lsb_mismatch_error, self.overload as u8, self.saturated as u8
        );
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionResult {
    /// Raw unsigned N-bit SAR code.
    pub code: u32,
    /// Reconstructed output in signed LSB codes, MES offset removed.
    pub output_code: i64,
    /// `output_code` in volts.
    pub output: f64,
    /// Residue left on the DAC node, V.
    pub residue: f64,
    pub diagnostics: Diagnostics,
}

/// Complete state of one modulator channel.
#[derive(Debug, Clone)]
pub struct ModulatorState {
    pub design: DesignParams,
    pub nonideal: NonIdealities,
    pub arrays: CapArrayState,
    pub filter: LoopFilterState,
    pub mes: MesState,
    pub conversions: u64,
    pub seed: u64,
    rng: SimRng,
    lsb: f64,
    kt_rms: f64,
}

impl ModulatorState {
    pub fn new(design: DesignParams, nonideal: NonIdealities, seed: u64) -> Result<Self> {
        design.validate()?;
        validate_nonideal(&nonideal, &design)?;
        let sigma = if nonideal.mismatch_enabled { design.cap_sigma } else { 0.0 };
        let arrays = build_array(design.msb_bits, design.sar_bits, sigma, seed)?;
        let mut filter = LoopFilterState::new(
            design.ns_order,
            DEFAULT_A1_GAIN,
            nonideal.gain_mismatch,
            nonideal.amp_rail,
        );
        if let Some(a) = nonideal.amp_finite_gain {
            filter = filter.with_finite_gain(a);
        }
        Ok(Self {
            mes: MesState::new(arrays.lsb_bits()),
            arrays,
            filter,
            conversions: 0,
            seed,
            rng: stream_rng(seed, stream::CONVERSION_NOISE),
            lsb: design.vdd / (1u64 << design.sar_bits) as f64,
            kt_rms: kt_c_rms(&design),
            design,
            nonideal,
        })
    }

    /// Quantiser LSB, V.
    pub fn lsb(&self) -> f64 {
        self.lsb
    }

    /// Peak of a full-scale sine, V.
    pub fn full_scale(&self) -> f64 {
        self.design.vdd / 2.0
    }

    /// One SMP → SAR → QNF cycle.
    pub fn convert_sample(&mut self, v_in: f64) -> ConversionResult {
        let order = self.nonideal.mes_order;
        let lsb_bits = self.arrays.lsb_bits();
        let n_msb = self.arrays.n_msb();

        // SMP
        let sampling_noise = self.thermal_draw();
        let mes_code = mes_offset(&self.mes, order, lsb_bits);
        let mes_err = mes_offset_error(&self.mes, order, &self.arrays);
        let v_sampled = v_in + sampling_noise + (mes_code as f64 + mes_err) * self.lsb;
        let sel = SarSelection {
            dwa_start: if self.nonideal.dwa_enabled { self.arrays.dwa_pointer } else { 0 },
            lsb_array: self.mes.active_array(order),
        };
        let ff = self.filter.feedforward();

        // SAR
        let dac = DacLevels::new(&self.arrays, sel);
        let out = convert_with(
            &dac,
            self.design.sar_bits,
            ff,
            v_sampled,
            &self.nonideal,
            self.lsb,
            &mut self.rng,
        );
        let code = out.code as u64;
        let msb_err = dac.msb_error(code);
        let lsb_err = dac.lsb_error(code);

        // QNF
        let residue_noise = self.thermal_draw();
        let filter_input = out.residue - ff + residue_noise;
        let saturated = self.filter.update(filter_input);

        let m = (code >> lsb_bits) as usize;
        let l = code & ((1u64 << lsb_bits) - 1);
        if self.nonideal.dwa_enabled && n_msb > 0 {
            self.arrays.dwa_pointer = (self.arrays.dwa_pointer + m) % n_msb;
        }
        self.mes.push(l, order);

        let half = 1i64 << (self.design.sar_bits - 1);
        let output_code = code as i64 - half - mes_code;
        let mut integrators = [0.0; TRACED_STATES];
        for (d, s) in integrators.iter_mut().zip(&self.filter.states) {
            *d = *s;
        }
        let diagnostics = Diagnostics {
            index: self.conversions,
            msb_code: m as u32,
            dwa_start: sel.dwa_start,
            lsb_array: sel.lsb_array as u8,
            mes_offset_code: mes_code,
            feedforward: ff,
            sampling_noise,
            residue_noise,
            settling_rms: out.settling_rms,
            filter_input,
            integrators,
            msb_mismatch_error: -msb_err * self.lsb,
            lsb_mismatch_error: (mes_err - lsb_err) * self.lsb,
            overload: out.overload,
            saturated,
        };
        self.conversions += 1;
        ConversionResult {
            code: out.code,
            output_code,
            output: output_code as f64 * self.lsb,
            residue: out.residue,
            diagnostics,
        }
    }

    fn thermal_draw(&mut self) -> f64 {
        if self.nonideal.thermal_noise {
            let n: f64 = self.rng.sample(StandardNormal);
            self.kt_rms * n
        } else {
            0.0
        }
    }
}

fn validate_nonideal(ni: &NonIdealities, d: &DesignParams) -> Result<()> {
    let nonneg = |name: &'static str, v: f64| {
        if v.is_nan() || v < 0.0 {
            Err(Error::param(name, format!("must be >= 0, got {v}")))
        } else {
            Ok(())
        }
    };
    nonneg("settle_tau", ni.settle_tau)?;
    nonneg("cmp_noise_rms", ni.cmp_noise_rms)?;
    if !ni.cmp_offset.is_finite() {
        return Err(Error::param("cmp_offset", "must be finite"));
    }
    if ni.mes_order > 2 {
        return Err(Error::param("mes_order", format!("must be 0, 1 or 2, got {}", ni.mes_order)));
    }
    if ni.mes_order > 0 && d.msb_bits >= d.sar_bits {
        return Err(Error::param("mes_order", "mismatch shaping needs at least one LSB bit"));
    }
    if ni.amp_rail.is_nan() || ni.amp_rail <= 0.0 {
        return Err(Error::param("amp_rail", format!("must be > 0, got {}", ni.amp_rail)));
    }
    if !(ni.gain_mismatch.is_finite() && ni.gain_mismatch > -1.0) {
        return Err(Error::param("gain_mismatch", "must be finite and > -1"));
    }
    if let Some(a) = ni.amp_finite_gain {
        if a.is_nan() || a <= 1.0 {
            return Err(Error::param("amp_finite_gain", format!("must be > 1, got {a}")));
        }
    }
    Ok(())
}
