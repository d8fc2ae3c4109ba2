use super::{precision_terms, DesignParams, NoiseTerms};
use crate::error::{Error, Result};
use crate::units::fmt_value;
use rayon::prelude::*;
use std::fmt::Write as _;

/// A single field replaced on top of a base configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamOverride {
    CTotal(f64),
    SettleTau(f64),
    NsOrder(u32),
    SarBits(u32),
    MsbBits(u32),
    CalBits(u32),
    MesOrder(u32),
    CapSigma(f64),
}

impl ParamOverride {
    fn apply(self, p: &mut DesignParams) {
        match self {
            Self::CTotal(v) => p.c_total = v,
            Self::SettleTau(v) => p.settle_tau = v,
            Self::NsOrder(v) => p.ns_order = v,
            Self::SarBits(v) => p.sar_bits = v,
            Self::MsbBits(v) => p.msb_bits = v,
            Self::CalBits(v) => p.cal_bits = v,
            Self::MesOrder(v) => p.mes_order = v,
            Self::CapSigma(v) => p.cap_sigma = v,
        }
    }
}

/// A named parameter variant of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub overrides: Vec<ParamOverride>,
}

impl Variant {
    pub fn new(name: impl Into<String>, overrides: impl Into<Vec<ParamOverride>>) -> Self {
        Self {
            name: name.into(),
            overrides: overrides.into(),
        }
    }

    pub fn apply(&self, base: &DesignParams) -> DesignParams {
        let mut p = *base;
        for o in &self.overrides {
            o.apply(&mut p);
        }
        p
    }
}

/// Precision in bits against OSR, one series per variant.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub axis: Vec<u32>,
    pub series: Vec<(String, Vec<f64>)>,
}

impl SweepCurve {
    /// `osr,<series>...` header followed by one row per OSR, bits to 4
    /// decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("osr");
        for (name, _) in &self.series {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, osr) in self.axis.iter().enumerate() {
            let _ = write!(out, "{osr}");
            for (_, bits) in &self.series {
                let _ = write!(out, ",{}", fmt_value(bits[i], 4));
            }
            out.push('\n');
        }
        out
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// Sweeps total precision (all three noise terms) over `osr_list`.
pub fn sweep(base: &DesignParams, osr_list: &[u32], variants: &[Variant]) -> Result<SweepCurve> {
    sweep_terms(base, osr_list, variants, NoiseTerms::ALL)
}

pub fn sweep_terms(
    base: &DesignParams,
    osr_list: &[u32],
    variants: &[Variant],
    terms: NoiseTerms,
) -> Result<SweepCurve> {
    if variants.is_empty() {
        return Err(Error::NothingToSweep);
    }
    if osr_list.is_empty() {
        return Err(Error::param("osr_list", "must not be empty"));
    }
    if osr_list[0] < 1 || osr_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("osr_list", "must be strictly ascending and >= 1"));
    }
    let series = variants
        .par_iter()
        .map(|v| {
            let p = v.apply(base);
            p.validate()?;
            let bits = osr_list
                .iter()
                .map(|&osr| precision_terms(&DesignParams { osr, ..p }, terms).enob_bits)
                .collect();
            Ok((v.name.clone(), bits))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepCurve {
        axis: osr_list.to_vec(),
        series,
    })
}

/// Canned sweeps, one per trade-off figure: precision limited by sampling
/// noise, by quantisation noise and by mismatch noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepPreset {
    /// SNP only, `C_T ∈ {5, 50, 500} pF`, OSR 1..=256.
    SamplingCap,
    /// QNP only, `(τ, M)` pairs, OSR 4..=256.
    Settling,
    /// MNP only with σ = 0.5 %, K = 4, `(D, E)` pairs, OSR 4..=256.
    Mismatch,
}

impl SweepPreset {
    pub const ALL: [SweepPreset; 3] = [Self::SamplingCap, Self::Settling, Self::Mismatch];

    pub fn name(self) -> &'static str {
        match self {
            Self::SamplingCap => "sampling",
            Self::Settling => "settling",
            Self::Mismatch => "mismatch",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn terms(self) -> NoiseTerms {
        match self {
            Self::SamplingCap => NoiseTerms::SAMPLING,
            Self::Settling => NoiseTerms::QUANTISATION,
            Self::Mismatch => NoiseTerms::MISMATCH,
        }
    }

    /// Shaping orders only pay off above OSR ≈ 2.4, so the shaping presets
    /// start at 4.
    pub fn osr_axis(self) -> Vec<u32> {
        match self {
            Self::SamplingCap => (1..=256).collect(),
            Self::Settling | Self::Mismatch => (4..=256).collect(),
        }
    }

    /// Variants ordered from lowest to highest expected precision.
    pub fn variants(self) -> Vec<Variant> {
        use ParamOverride::*;
        match self {
            Self::SamplingCap => vec![
                Variant::new("ct_5p", [CTotal(5e-12)]),
                Variant::new("ct_50p", [CTotal(50e-12)]),
                Variant::new("ct_500p", [CTotal(500e-12)]),
            ],
            Self::Settling => vec![
                Variant::new("tau3_m1", [SettleTau(3.0), NsOrder(1)]),
                Variant::new("tau5_m1", [SettleTau(5.0), NsOrder(1)]),
                Variant::new("tau5_m2", [SettleTau(5.0), NsOrder(2)]),
                Variant::new("tau7_m2", [SettleTau(7.0), NsOrder(2)]),
            ],
            Self::Mismatch => vec![
                Variant::new("d0_e0", [CalBits(0), MesOrder(0)]),
                Variant::new("d0_e1", [CalBits(0), MesOrder(1)]),
                Variant::new("d0_e2", [CalBits(0), MesOrder(2)]),
                Variant::new("d4_e2", [CalBits(4), MesOrder(2)]),
            ],
        }
    }

    pub fn run(self, base: &DesignParams) -> Result<SweepCurve> {
        let base = match self {
            Self::Mismatch => DesignParams {
                cap_sigma: 0.005,
                msb_bits: 4,
                ..*base
            },
            _ => *base,
        };
        sweep_terms(&base, &self.osr_axis(), &self.variants(), self.terms())
    }
}
