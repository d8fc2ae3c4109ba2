//! Physical constants and decibel helpers shared across modules.

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Default absolute temperature, kelvin.
pub const DEFAULT_TEMPERATURE: f64 = 300.0;

/// Floor reported for spectral bins with zero power, in dBFS.
pub const DB_FLOOR: f64 = -400.0;

/// `10·log10(num/den)` for non-negative powers.
///
/// A zero numerator maps to `-inf` and a zero denominator to `+inf`; both are
/// unbounded sentinels rather than overflowed numbers. `0/0` is `NaN`.
pub fn power_ratio_db(num: f64, den: f64) -> f64 {
    match (num == 0.0, den == 0.0) {
        (true, true) => f64::NAN,
        (true, false) => f64::NEG_INFINITY,
        (false, true) => f64::INFINITY,
        (false, false) => 10.0 * (num / den).log10(),
    }
}

/// Effective number of bits from an SNDR in dB.
pub fn enob(sndr_db: f64) -> f64 {
    (sndr_db - 1.76) / 6.02
}

/// Formats a float for text exports; infinities become `inf`/`-inf`.
pub fn fmt_value(x: f64, decimals: usize) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.decimals$}")
    }
}
