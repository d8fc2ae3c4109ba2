//! Mismatch error shaping for the LSB arrays.
//!
//! Past LSB codes are re-applied to the sampled input so that the LSB-DAC
//! mismatch error `w(n)` reaches the output as `(1 − z⁻¹)^E · w(n)`. Each
//! history code is held on the array that converted it: with `E = 2` the two
//! arrays alternate, the converting array also carries the code it produced
//! two conversions ago and the other array carries the previous code.

use super::array::CapArrayState;

/// History of LSB codes for mismatch error shaping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MesState {
    /// LSB code of the previous conversion.
    pub d1: u64,
    /// LSB code two conversions ago.
    pub d2: u64,
    /// Array that converts next (0 = L1, 1 = L2).
    pub pingpong: u8,
}

impl MesState {
    /// Starts with both history codes at mid-range so the first offsets are 0.
    pub fn new(lsb_bits: u32) -> Self {
        let mid = mid_code(lsb_bits);
        Self { d1: mid, d2: mid, pingpong: 0 }
    }

    /// Array converting this cycle for the given shaping order.
    pub fn active_array(&self, order: u32) -> usize {
        if order >= 2 {
            self.pingpong as usize
        } else {
            0
        }
    }

    /// Shifts in the LSB code just converted and flips the ping-pong arrays.
    pub fn push(&mut self, lsb_code: u64, order: u32) {
        self.d2 = self.d1;
        self.d1 = lsb_code;
        if order >= 2 {
            self.pingpong ^= 1;
        }
    }

    /// Arrays that hold `d1` and `d2` this cycle.
    fn history_arrays(&self, order: u32) -> (usize, usize) {
        if order >= 2 {
            let now = self.pingpong as usize;
            (now ^ 1, now)
        } else {
            (0, 0)
        }
    }
}

pub(crate) fn mid_code(lsb_bits: u32) -> u64 {
    if lsb_bits == 0 {
        0
    } else {
        1 << (lsb_bits - 1)
    }
}

/// Feedback taps `(c1, c2)` such that `1 − c1·z⁻¹ − c2·z⁻² = (1 − z⁻¹)^E`.
fn taps(order: u32) -> (i64, i64) {
    match order {
        0 => (0, 0),
        1 => (1, 0),
        _ => (2, -1),
    }
}

/// Digital MES offset, in LSB codes, added to the sampled input.
///
/// `E = 0` gives 0, `E = 1` gives `d1`, `E = 2` gives `2·d1 − d2`, all taken
/// relative to the mid-range LSB code.
pub fn mes_offset(m: &MesState, order: u32, lsb_bits: u32) -> i64 {
    let mid = mid_code(lsb_bits) as i64;
    let (c1, c2) = taps(order);
    c1 * (m.d1 as i64 - mid) + c2 * (m.d2 as i64 - mid)
}

/// Analog mismatch carried by the MES offset, in LSB codes: the difference
/// between the charge the held arrays actually inject and `mes_offset`.
pub fn mes_offset_error(m: &MesState, order: u32, arrays: &CapArrayState) -> f64 {
    let (c1, c2) = taps(order);
    if c1 == 0 && c2 == 0 {
        return 0.0;
    }
    let (a1, a2) = m.history_arrays(order);
    c1 as f64 * arrays.lsb_error_codes(a1, m.d1) + c2 as f64 * arrays.lsb_error_codes(a2, m.d2)
}
