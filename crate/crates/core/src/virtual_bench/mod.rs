//! Simulated optical bench: lamp, binary modulator, transmissive object,
//! bucket photodiode and normalisation photodiode.
//!
//! Noise enters as additive Gaussian read noise on each bucket read and on
//! each normalisation read, plus constant stray-light backgrounds. Signal
//! scales linearly with integration time while read noise does not.

mod noise;
mod protocol;
mod target;

pub use noise::{
    bucket_read, derive_seed, lamp_intensity, normalization_read, pattern_stream, Method,
    NoiseModel, ProtocolConfig,
};
pub use protocol::{
    acquisition_counts, run_basis_protocol, run_basis_protocol_with, run_post_protocol,
    run_post_protocol_with, CoefficientRecord, MeasurementPlan,
};
pub use target::{default_background_rect, synth_bar_target, SceneObject};
