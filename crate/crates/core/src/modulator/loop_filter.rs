/// Cascaded feed-forward integrator loop filter.
///
/// The residue amplifier scales the residue by `gain_a1`; a chain of `M`
/// integrators follows, the first accumulating the amplified residue
/// directly and each later one accumulating the previous stage's value
/// from the prior cycle. The feedforward injected on the next conversion is
/// `atten · Σ C(M,k)·state_k`, which makes the noise transfer function
/// exactly `(1 − z⁻¹)^M` when `atten = 1/gain_a1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopFilterState {
    /// Integrator outputs, V (amplified domain). `states[0]` is the first
    /// integrator.
    pub states: Vec<f64>,
    /// Amplified residue from the last QNF phase, V.
    pub last_residue: f64,
    pub gain_a1: f64,
    /// Feedforward attenuation onto the sampling node.
    pub atten: f64,
    /// Amplifier output swing; states are clipped to `±rail`.
    pub rail: f64,
    /// Per-cycle integrator retention, `1 − 1/A` for open-loop gain `A`.
    pub leak: f64,
    pub saturated: bool,
    pub saturation_count: u64,
    weights: Vec<f64>,
}

/// Default residue-amplifier gain, `C_T/C_1`.
pub const DEFAULT_A1_GAIN: f64 = 30.0;

impl LoopFilterState {
    pub fn new(order: u32, gain_a1: f64, gain_mismatch: f64, rail: f64) -> Self {
        let m = order as usize;
        let mut weights = Vec::with_capacity(m);
        let mut c = 1.0;
        for k in 1..=m {
            c = c * (m + 1 - k) as f64 / k as f64;
            weights.push(c);
        }
        Self {
            states: vec![0.0; m],
            last_residue: 0.0,
            gain_a1,
            atten: (1.0 + gain_mismatch) / gain_a1,
            rail,
            leak: 1.0,
            saturated: false,
            saturation_count: 0,
            weights,
        }
    }

    /// Models finite open-loop gain of the amplifiers.
    pub fn with_finite_gain(mut self, open_loop_gain: f64) -> Self {
        self.leak = 1.0 - 1.0 / open_loop_gain;
        self.gain_a1 /= 1.0 + (1.0 + self.gain_a1) / open_loop_gain;
        self
    }

    pub fn order(&self) -> u32 {
        self.states.len() as u32
    }

    /// Feedforward weights `C(M,k)`, `k = 1..=M`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Input-referred feedforward for the next conversion, V.
    pub fn feedforward(&self) -> f64 {
        self.atten
            * self
                .weights
                .iter()
                .zip(&self.states)
                .map(|(w, s)| w * s)
                .sum::<f64>()
    }

    /// QNF update with the residue seen by the residue amplifier, V.
    /// Returns true if any amplifier clipped this cycle.
    pub fn update(&mut self, residue: f64) -> bool {
        let mut clipped = false;
        let mut clip = |v: f64| -> f64 {
            if v.abs() > self.rail {
                clipped = true;
                v.clamp(-self.rail, self.rail)
            } else {
                v
            }
        };
        let x1 = clip(self.gain_a1 * residue);
        // first stage takes this cycle's residue, later stages the previous
        // stage's value from before this update
        let mut feed = x1;
        for s in self.states.iter_mut() {
            let old = *s;
            *s = clip(self.leak * old + feed);
            feed = old;
        }
        self.last_residue = x1;
        self.saturated = clipped;
        if clipped {
            self.saturation_count += 1;
        }
        clipped
    }

    pub fn reset(&mut self) {
        self.states.iter_mut().for_each(|s| *s = 0.0);
        self.last_residue = 0.0;
        self.saturated = false;
    }
}

/// Functional form of [`LoopFilterState::update`].
pub fn loop_update(lf: &LoopFilterState, residue: f64) -> LoopFilterState {
    let mut next = lf.clone();
    next.update(residue);
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_filter() -> LoopFilterState {
        LoopFilterState::new(2, 1.0, 0.0, f64::INFINITY)
    }

    #[test]
    fn zero_residue_keeps_zero_state() {
        let mut lf = LoopFilterState::new(2, 30.0, 0.0, 0.9);
        for _ in 0..100 {
            lf.update(0.0);
        }
        assert_eq!(lf.states, vec![0.0, 0.0]);
        assert_eq!(lf.feedforward(), 0.0);
    }

    #[test]
    fn impulse_feedforward_sequence() {
        let mut lf = unit_filter();
        let mut seq = Vec::new();
        lf = loop_update(&lf, 1.0);
        seq.push(lf.feedforward());
        for _ in 0..4 {
            lf = loop_update(&lf, 0.0);
            seq.push(lf.feedforward());
        }
        assert_eq!(seq, vec![2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn binomial_weights() {
        assert_eq!(LoopFilterState::new(2, 30.0, 0.0, 1.0).weights(), &[2.0, 1.0]);
        assert_eq!(LoopFilterState::new(3, 30.0, 0.0, 1.0).weights(), &[3.0, 3.0, 1.0]);
        assert!(LoopFilterState::new(0, 30.0, 0.0, 1.0).weights().is_empty());
    }

    #[test]
    fn gain_and_attenuation_cancel() {
        let mut lf = LoopFilterState::new(2, 30.0, 0.0, 10.0);
        lf.update(1e-3);
        assert!((lf.feedforward() - 2e-3).abs() < 1e-15);
        let mut off = LoopFilterState::new(2, 30.0, 0.01, 10.0);
        off.update(1e-3);
        assert!((off.feedforward() - 2.02e-3).abs() < 1e-15);
    }

    #[test]
    fn clipping_sets_flag() {
        let mut lf = LoopFilterState::new(2, 30.0, 0.0, 0.9);
        assert!(lf.update(0.1));
        assert_eq!(lf.states[0], 0.9);
        assert_eq!(lf.saturation_count, 1);
    }
}
