use super::{fom_s, precision, DesignParams, NoiseBudget};
use crate::error::{Error, Result};
use rayon::prelude::*;
use std::cmp::Ordering;

/// Parametric power estimator used to rank configurations:
/// `α·C_T·V²·fs + β·(M+1)·(I_bias/a1_share)·V`.
///
/// The first term is array switching plus reference drive; the second is
/// the residue amplifier and `M` integrators, with the amplifier bias
/// referred to the share taken by the residue amplifier. The default
/// coefficients put the proposed design near 68 µW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub alpha: f64,
    pub beta: f64,
    /// Bias current reference, A.
    pub i_bias: f64,
    /// Fraction of the amplifier power taken by the residue amplifier.
    pub a1_share: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 4.0,
            i_bias: 1e-6,
            a1_share: 0.8,
        }
    }
}

impl PowerModel {
    pub fn power(&self, p: &DesignParams) -> f64 {
        let switching = self.alpha * p.c_total * p.vdd * p.vdd * p.fs;
        let amplifiers = self.beta * (p.ns_order + 1) as f64 * (self.i_bias / self.a1_share) * p.vdd;
        switching + amplifiers
    }
}

/// Discrete search grid. Fields not listed are taken from the base
/// configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub c_total: Vec<f64>,
    pub osr: Vec<u32>,
    pub ns_order: Vec<u32>,
    pub settle_tau: Vec<f64>,
    pub msb_bits: Vec<u32>,
    pub cal_bits: Vec<u32>,
    pub mes_order: Vec<u32>,
}

impl SearchSpace {
    /// A grid that contains the proposed configuration.
    pub fn default_grid() -> Self {
        Self {
            c_total: vec![5e-12, 10e-12, 20e-12, 50e-12, 100e-12, 200e-12],
            osr: vec![4, 8, 16, 32, 64],
            ns_order: vec![0, 1, 2, 3],
            settle_tau: vec![3.0, 5.0, 7.0],
            msb_bits: vec![3, 4, 5],
            cal_bits: vec![0, 2, 4],
            mes_order: vec![0, 1, 2],
        }
    }

    /// A grid holding exactly one point, `p`.
    pub fn single(p: &DesignParams) -> Self {
        Self {
            c_total: vec![p.c_total],
            osr: vec![p.osr],
            ns_order: vec![p.ns_order],
            settle_tau: vec![p.settle_tau],
            msb_bits: vec![p.msb_bits],
            cal_bits: vec![p.cal_bits],
            mes_order: vec![p.mes_order],
        }
    }

    pub fn len(&self) -> usize {
        self.c_total.len()
            * self.osr.len()
            * self.ns_order.len()
            * self.settle_tau.len()
            * self.msb_bits.len()
            * self.cal_bits.len()
            * self.mes_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in row-major order (last field varies fastest).
    pub fn points(&self, base: &DesignParams) -> Vec<DesignParams> {
        let mut out = Vec::with_capacity(self.len());
        for &c_total in &self.c_total {
            for &osr in &self.osr {
                for &ns_order in &self.ns_order {
                    for &settle_tau in &self.settle_tau {
                        for &msb_bits in &self.msb_bits {
                            for &cal_bits in &self.cal_bits {
                                for &mes_order in &self.mes_order {
                                    out.push(DesignParams {
                                        c_total,
                                        osr,
                                        ns_order,
                                        settle_tau,
                                        msb_bits,
                                        cal_bits,
                                        mes_order,
                                        ..*base
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub params: DesignParams,
    pub budget: NoiseBudget,
    pub power_w: f64,
    pub fom_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizeOutcome {
    /// Feasible configurations, best first.
    Ranked(Vec<Candidate>),
    NoFeasibleConfiguration,
}

impl OptimizeOutcome {
    pub fn candidates(&self) -> &[Candidate] {
        match self {
            Self::Ranked(c) => c,
            Self::NoFeasibleConfiguration => &[],
        }
    }
}

/// Exhaustive grid search for configurations reaching `target_bits`, ranked
/// by estimated FoM_S (descending). Ties fall back to smaller `C_T`, smaller
/// OSR, smaller `M`, then grid order.
pub fn optimize_config(
    base: &DesignParams,
    space: &SearchSpace,
    power: &PowerModel,
    target_bits: f64,
) -> Result<OptimizeOutcome> {
    if space.is_empty() {
        return Err(Error::param("space", "search grid is empty"));
    }
    let points = space.points(base);
    let evaluated = points
        .par_iter()
        .map(|p| -> Result<Option<Candidate>> {
            if p.validate().is_err() {
                // K > N and similar combinations are simply outside the space
                return Ok(None);
            }
            let budget = precision(p);
            if budget.enob_bits < target_bits {
                return Ok(None);
            }
            let power_w = power.power(p);
            let fom_db = fom_s(budget.sndr_db, p.bandwidth(), power_w)?;
            Ok(Some(Candidate {
                params: *p,
                budget,
                power_w,
                fom_db,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ranked: Vec<Candidate> = evaluated.into_iter().flatten().collect();
    if ranked.is_empty() {
        return Ok(OptimizeOutcome::NoFeasibleConfiguration);
    }
    // stable sort keeps grid order for full ties
    ranked.sort_by(|a, b| {
        b.fom_db
            .total_cmp(&a.fom_db)
            .then_with(|| a.params.c_total.total_cmp(&b.params.c_total))
            .then_with(|| a.params.osr.cmp(&b.params.osr))
            .then_with(|| a.params.ns_order.cmp(&b.params.ns_order))
            .then(Ordering::Equal)
    });
    Ok(OptimizeOutcome::Ranked(ranked))
}
