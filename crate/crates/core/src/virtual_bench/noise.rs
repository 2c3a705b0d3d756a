use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::target::SceneObject;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Image};

/// Lamp, detector and stray-light parameters of the bench.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Lamp power per millisecond of integration, `A0`.
    pub lamp_base: f64,
    /// Relative amplitude of the slow sinusoidal lamp drift.
    pub lamp_drift_amplitude: f64,
    /// Drift period in measurement steps.
    pub lamp_drift_period: f64,
    /// Read-noise std of every bucket (PD2) read.
    pub detector_sigma: f64,
    /// Read-noise std of every normalisation (PD1) read.
    pub normalization_sigma: f64,
    /// Stray light on the bucket detector, `B_m`.
    pub background_measure: f64,
    /// Stray light on the normalisation detector, `B_n`.
    pub background_norm: f64,
    pub seed: u64,
}

impl NoiseModel {
    /// Bench defaults for a grid: normalisation noise dominates detector
    /// noise, drift period of `10 N^2` steps.
    pub fn for_grid(grid: GridSpec) -> Self {
        Self {
            lamp_base: 1.0,
            lamp_drift_amplitude: 0.05,
            lamp_drift_period: 10.0 * grid.pixel_count() as f64,
            detector_sigma: 2.8,
            normalization_sigma: 3.5,
            background_measure: 0.5,
            background_norm: 0.5,
            seed: 0,
        }
    }

    /// Every noise source and background switched off; lamp drift kept.
    pub fn noiseless(grid: GridSpec) -> Self {
        Self {
            detector_sigma: 0.0,
            normalization_sigma: 0.0,
            background_measure: 0.0,
            background_norm: 0.0,
            ..Self::for_grid(grid)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.lamp_base,
            self.lamp_drift_amplitude,
            self.lamp_drift_period,
            self.detector_sigma,
            self.normalization_sigma,
            self.background_measure,
            self.background_norm,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("noise parameters must be finite".into()));
        }
        if self.lamp_base <= 0.0 {
            return Err(Error::Config("lamp_base must be positive".into()));
        }
        if self.lamp_drift_period <= 0.0 {
            return Err(Error::Config("lamp_drift_period must be positive".into()));
        }
        if self.lamp_drift_amplitude < 0.0 {
            return Err(Error::Config("lamp_drift_amplitude must be non-negative".into()));
        }
        if self.detector_sigma < 0.0 || self.normalization_sigma < 0.0 {
            return Err(Error::Config("noise standard deviations must be non-negative".into()));
        }
        if self.background_measure < 0.0 || self.background_norm < 0.0 {
            return Err(Error::Config("backgrounds must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Plain basis projected, filter applied to the reconstruction.
    PostProcessed,
    /// Filter compiled into the projected patterns.
    BasisProcessed,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::BasisProcessed, Method::PostProcessed];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::PostProcessed => "post-processed",
            Method::BasisProcessed => "basis-processed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "post-processed" | "post" => Ok(Method::PostProcessed),
            "basis-processed" | "basis" => Ok(Method::BasisProcessed),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub integration_time_ms: f64,
    pub repeats_per_pattern: usize,
    pub method: Method,
}

impl ProtocolConfig {
    pub fn new(integration_time_ms: f64, method: Method) -> Self {
        Self {
            integration_time_ms,
            repeats_per_pattern: 2,
            method,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.integration_time_ms > 0.0 && self.integration_time_ms.is_finite()) {
            return Err(Error::Config("integration time must be positive".into()));
        }
        if self.repeats_per_pattern == 0 {
            return Err(Error::Config("repeats_per_pattern must be at least 1".into()));
        }
        Ok(())
    }
}

/// Lamp level at measurement `step`:
/// `t * A0 * (1 + a * sin(2 pi step / period))`.
pub fn lamp_intensity(step: usize, noise: &NoiseModel, protocol: &ProtocolConfig) -> Result<f64> {
    let phase = 2.0 * PI * step as f64 / noise.lamp_drift_period;
    let a = protocol.integration_time_ms
        * noise.lamp_base
        * (1.0 + noise.lamp_drift_amplitude * phase.sin());
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Config(format!(
            "lamp intensity {a} at step {step} is not positive"
        )));
    }
    Ok(a)
}

/// One bucket-detector read: `A <pattern, O> + B_m + N(0, sigma^2)`.
pub fn bucket_read<R: Rng + ?Sized>(
    pattern: &Image,
    object: &SceneObject,
    lamp: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<f64> {
    let overlap = pattern.dot(object.transmission())?;
    Ok(read_with_overlap(overlap, lamp, noise, rng))
}

pub(crate) fn read_with_overlap<R: Rng + ?Sized>(
    overlap: f64,
    lamp: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    lamp * overlap + noise.background_measure + noise.detector_sigma * z
}

/// One normalisation-detector read: `A + B_n + N(0, sigma_3^2)`.
pub fn normalization_read<R: Rng + ?Sized>(lamp: f64, noise: &NoiseModel, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    lamp + noise.background_norm + noise.normalization_sigma * z
}

/// Random stream for one pattern, keyed by `(seed, pattern_index)` so that
/// acquisition order cannot change the draws.
pub fn pattern_stream(seed: u64, pattern_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pattern_index as u64);
    rng
}

/// Derives an independent seed for a sub-experiment identified by `tag`.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(tag.wrapping_add(1 << 63));
    rng.next_u64()
}
