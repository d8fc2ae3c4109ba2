//! Spectra, in-band metrics and decimation.

mod decimate;
mod metrics;
mod spectrum;

pub use decimate::{comb_response, compensate_droop, decimate};
pub use metrics::{in_band_power, sndr, Metrics};
pub use spectrum::{coherent_frequency, periodogram, Spectrum, Window};
