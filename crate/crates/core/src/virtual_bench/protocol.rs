//! Acquisition protocols.
//!
//! Both protocols share one lamp value and one normalisation read per
//! pattern. The post-processing protocol projects each binary pattern
//! `repeats_per_pattern` times and averages; the basis-processing protocol
//! projects every binary part of a decomposed pattern once and combines the
//! reads with the part weights.

use super::noise::{
    lamp_intensity, normalization_read, pattern_stream, read_with_overlap, NoiseModel,
    ProtocolConfig,
};
use super::target::SceneObject;
use crate::basis::PatternBasis;
use crate::decompose::{binary_decompose, is_binary, SubPatternSet};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRecord {
    pub pattern_index: usize,
    pub coefficient: f64,
    pub raw_reads: Vec<f64>,
    pub normalization_read: f64,
}

/// Total `(bucket reads, normalisation reads)` issued for a record stream.
pub fn acquisition_counts(records: &[CoefficientRecord]) -> (usize, usize) {
    let bucket = records.iter().map(|r| r.raw_reads.len()).sum();
    (bucket, records.len())
}

#[derive(Debug, Clone, PartialEq)]
struct PlannedPattern {
    /// `(weight, <part, O>)` per binary part.
    parts: Vec<(f64, f64)>,
}

/// Noise-independent half of an acquisition: the overlap of every binary
/// part with the object. Building the plan costs one pass over the basis;
/// each [`MeasurementPlan::acquire`] afterwards only draws noise, so sweeps
/// reuse one plan across all integration times and repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    grid: GridSpec,
    patterns: Vec<PlannedPattern>,
}

impl MeasurementPlan {
    /// Plan for projecting `basis` as-is; every pattern must be binary.
    pub fn binary(object: &SceneObject, basis: &PatternBasis, exec: Exec) -> Result<Self> {
        check_grid(object, basis)?;
        let patterns = exec.try_map_range(basis.len(), |j| {
            let pattern = basis.pattern(j)?;
            if !is_binary(&pattern) {
                return Err(Error::Protocol(format!(
                    "pattern {j} of {} basis is not binary; decompose it first",
                    basis.label()
                )));
            }
            Ok(PlannedPattern {
                parts: vec![(1.0, pattern.dot(object.transmission())?)],
            })
        })?;
        Ok(Self {
            grid: basis.grid(),
            patterns,
        })
    }

    /// Plan for projecting the binary decomposition of every pattern of
    /// `basis`.
    pub fn decomposed(object: &SceneObject, basis: &PatternBasis, exec: Exec) -> Result<Self> {
        check_grid(object, basis)?;
        let patterns = exec.try_map_range(basis.len(), |j| {
            plan_parts(object, &binary_decompose(j, &basis.pattern(j)?))
        })?;
        Ok(Self {
            grid: basis.grid(),
            patterns,
        })
    }

    /// Plan from explicit sub-pattern sets, which must cover indices
    /// `0..N^2` in order and contain only binary parts.
    pub fn from_sub_patterns(object: &SceneObject, sets: &[SubPatternSet]) -> Result<Self> {
        let grid = object.grid();
        if sets.len() != grid.pixel_count() {
            return Err(Error::Protocol(format!(
                "expected {} sub-pattern sets, got {}",
                grid.pixel_count(),
                sets.len()
            )));
        }
        let patterns = sets
            .iter()
            .enumerate()
            .map(|(j, set)| {
                if set.parent_index != j {
                    return Err(Error::Protocol(format!(
                        "sub-pattern set {j} belongs to pattern {}",
                        set.parent_index
                    )));
                }
                plan_parts(object, set)
            })
            .collect::<Result<_>>()?;
        Ok(Self { grid, patterns })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Noiseless coefficient of pattern `j`: `sum_i w_i <part_i, O>`.
    pub fn ideal_coefficient(&self, j: usize) -> f64 {
        self.patterns[j].parts.iter().map(|(w, o)| w * o).sum()
    }

    /// Simulates the measurement of every pattern. Pattern `j` uses lamp
    /// step `j` and the random stream keyed by `(noise.seed, j)`.
    pub fn acquire(
        &self,
        noise: &NoiseModel,
        protocol: &ProtocolConfig,
        exec: Exec,
    ) -> Result<Vec<CoefficientRecord>> {
        noise.validate()?;
        protocol.validate()?;
        let repeats = protocol.repeats_per_pattern;
        exec.try_map_range(self.patterns.len(), |j| {
            let lamp = lamp_intensity(j, noise, protocol)?;
            let mut rng = pattern_stream(noise.seed, j);
            let planned = &self.patterns[j];
            let mut raw_reads = Vec::with_capacity(planned.parts.len().max(repeats));
            let mut combined = 0.0;
            if let [(weight, overlap)] = planned.parts[..] {
                for _ in 0..repeats {
                    let read = read_with_overlap(overlap, lamp, noise, &mut rng);
                    combined += weight * read;
                    raw_reads.push(read);
                }
                combined /= repeats as f64;
            } else {
                for &(weight, overlap) in &planned.parts {
                    let read = read_with_overlap(overlap, lamp, noise, &mut rng);
                    combined += weight * read;
                    raw_reads.push(read);
                }
            }
            let norm = normalization_read(lamp, noise, &mut rng);
            let coefficient = combined / norm;
            if !coefficient.is_finite() {
                return Err(Error::Protocol(format!(
                    "pattern {j}: normalisation read {norm} gives a non-finite coefficient"
                )));
            }
            Ok(CoefficientRecord {
                pattern_index: j,
                coefficient,
                raw_reads,
                normalization_read: norm,
            })
        })
    }
}

fn check_grid(object: &SceneObject, basis: &PatternBasis) -> Result<()> {
    if object.grid() != basis.grid() {
        return Err(Error::Dimension(format!(
            "object is {}x{} but basis is {}x{}",
            object.grid().side(),
            object.grid().side(),
            basis.grid().side(),
            basis.grid().side()
        )));
    }
    Ok(())
}

fn plan_parts(object: &SceneObject, set: &SubPatternSet) -> Result<PlannedPattern> {
    if set.parts.is_empty() {
        return Err(Error::Protocol(format!(
            "pattern {} has no sub-patterns",
            set.parent_index
        )));
    }
    let parts = set
        .parts
        .iter()
        .map(|part| {
            if !is_binary(&part.mask) {
                return Err(Error::Protocol(format!(
                    "pattern {} has a non-binary part",
                    set.parent_index
                )));
            }
            Ok((part.weight, part.mask.dot(object.transmission())?))
        })
        .collect::<Result<_>>()?;
    Ok(PlannedPattern { parts })
}

/// Raster-style acquisition of a binary basis: each pattern read
/// `repeats_per_pattern` times, reads averaged, divided by one shared
/// normalisation read.
pub fn run_post_protocol(
    object: &SceneObject,
    basis: &PatternBasis,
    noise: &NoiseModel,
    protocol: &ProtocolConfig,
) -> Result<Vec<CoefficientRecord>> {
    run_post_protocol_with(Exec::default(), object, basis, noise, protocol)
}

pub fn run_post_protocol_with(
    exec: Exec,
    object: &SceneObject,
    basis: &PatternBasis,
    noise: &NoiseModel,
    protocol: &ProtocolConfig,
) -> Result<Vec<CoefficientRecord>> {
    MeasurementPlan::binary(object, basis, exec)?.acquire(noise, protocol, exec)
}

/// Acquisition of a (typically filter-modified) basis through its binary
/// decomposition: one read per part, combined with the part weights.
pub fn run_basis_protocol(
    object: &SceneObject,
    basis: &PatternBasis,
    noise: &NoiseModel,
    protocol: &ProtocolConfig,
) -> Result<Vec<CoefficientRecord>> {
    run_basis_protocol_with(Exec::default(), object, basis, noise, protocol)
}

pub fn run_basis_protocol_with(
    exec: Exec,
    object: &SceneObject,
    basis: &PatternBasis,
    noise: &NoiseModel,
    protocol: &ProtocolConfig,
) -> Result<Vec<CoefficientRecord>> {
    MeasurementPlan::decomposed(object, basis, exec)?.acquire(noise, protocol, exec)
}
