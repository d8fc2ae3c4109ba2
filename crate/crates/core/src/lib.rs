//! Behavioural simulator and analytic design explorer for a noise-shaping
//! SAR ADC with capacitor mismatch shaping and background calibration.

pub mod analysis;
pub mod analytic;
pub mod app;
pub mod calibration;
pub mod config;
pub mod error;
pub mod experiment;
pub mod modulator;
pub mod rng;
pub mod units;

pub use error::{Error, Result};
