//! Behavioural model of one noise-shaping SAR conversion channel.

mod array;
mod loop_filter;
mod mes;
mod sar;
mod state;
mod waveform;

pub use array::{build_array, dwa_select, CapArrayState};
pub(crate) use array::sample_std;
pub use loop_filter::{loop_update, LoopFilterState, DEFAULT_A1_GAIN};
pub use mes::{mes_offset, mes_offset_error, MesState};
pub use sar::{kt_c_rms, sar_convert, NonIdealities, SarOutcome, SarSelection};
pub use state::{ConversionResult, Diagnostics, ModulatorState, TRACED_STATES};
pub use waveform::{ntf_probe, run, RunOutput, Waveform};
