//! SNR versus integration time for both pipelines.

use super::{align_polarity, compute_snr, select_peak_mask, RegionMask, SnrReport};
use crate::basis::{canonical_basis, modify_basis, PatternBasis};
use crate::error::{Error, Result};
use crate::grid::Image;
use crate::kernel::Kernel;
use crate::par::Exec;
use crate::reconstruction::{post_process, reconstruct_normalized};
use crate::virtual_bench::{
    derive_seed, MeasurementPlan, Method, NoiseModel, ProtocolConfig, SceneObject,
};

#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Unmodified reconstruction basis.
    pub basis: PatternBasis,
    pub kernel: Kernel,
    /// Noise model; its seed is the base seed of the sweep.
    pub noise: NoiseModel,
    pub times_ms: Vec<f64>,
    pub repeats: usize,
    pub repeats_per_pattern: usize,
    pub peak_fraction: f64,
    pub peak_border: usize,
    pub background: RegionMask,
}

impl SweepSpec {
    /// Canonical basis, paired raster reads, top 10 % peak mask with a
    /// two-pixel border.
    pub fn new(
        kernel: Kernel,
        noise: NoiseModel,
        times_ms: Vec<f64>,
        repeats: usize,
        background: RegionMask,
    ) -> Self {
        Self {
            basis: canonical_basis(background.grid()),
            kernel,
            noise,
            times_ms,
            repeats,
            repeats_per_pattern: 2,
            peak_fraction: 0.1,
            peak_border: 2,
            background,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub method: Method,
    pub time_index: usize,
    pub integration_time_ms: f64,
    pub repeat: usize,
    pub seed: u64,
    pub image: Image,
    pub report: SnrReport,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Noiseless filtered object both pipelines aim at.
    pub reference: Image,
    pub peak: RegionMask,
    pub cells: Vec<SweepCell>,
}

impl SweepOutcome {
    pub fn table(&self) -> SweepTable {
        SweepTable {
            rows: self
                .cells
                .iter()
                .map(|c| SweepRow {
                    method: c.method,
                    integration_time_ms: c.integration_time_ms,
                    repeat: c.repeat,
                    snr: c.report.snr,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub integration_time_ms: f64,
    pub repeat: usize,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Mean SNR of one `(method, time)` cell.
    pub fn mean_snr(&self, method: Method, time_ms: f64) -> Option<f64> {
        let snrs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.integration_time_ms == time_ms)
            .map(|r| r.snr)
            .collect();
        (!snrs.is_empty()).then(|| snrs.iter().sum::<f64>() / snrs.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummaryRow {
    pub method: Method,
    pub integration_time_ms: f64,
    pub mean_snr: f64,
    /// Sample standard deviation over repeats; zero for a single repeat.
    pub std_snr: f64,
    pub repeats: usize,
}

/// Per-(method, time) mean and spread, in first-appearance order.
pub fn summarize(table: &SweepTable) -> Vec<SweepSummaryRow> {
    let mut keys: Vec<(Method, f64)> = Vec::new();
    for r in &table.rows {
        if !keys.contains(&(r.method, r.integration_time_ms)) {
            keys.push((r.method, r.integration_time_ms));
        }
    }
    keys.into_iter()
        .map(|(method, t)| {
            let snrs: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.method == method && r.integration_time_ms == t)
                .map(|r| r.snr)
                .collect();
            let n = snrs.len();
            let mean = snrs.iter().sum::<f64>() / n as f64;
            let std_snr = if n > 1 {
                (snrs.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            SweepSummaryRow {
                method,
                integration_time_ms: t,
                mean_snr: mean,
                std_snr,
                repeats: n,
            }
        })
        .collect()
}

pub fn snr_sweep(object: &SceneObject, spec: &SweepSpec) -> Result<SweepTable> {
    Ok(run_sweep(object, spec)?.table())
}

pub fn run_sweep(object: &SceneObject, spec: &SweepSpec) -> Result<SweepOutcome> {
    run_sweep_with(Exec::default(), object, spec)
}

/// Runs both pipelines for every `(method, time, repeat)` cell. Each cell
/// draws from its own seed derived from the base seed, so the outcome does
/// not depend on `exec`.
pub fn run_sweep_with(exec: Exec, object: &SceneObject, spec: &SweepSpec) -> Result<SweepOutcome> {
    if spec.repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    if spec.times_ms.is_empty() {
        return Err(Error::Config("at least one integration time is required".into()));
    }
    if object.grid() != spec.basis.grid() || spec.background.grid() != spec.basis.grid() {
        return Err(Error::Dimension("object, basis and background grids differ".into()));
    }
    spec.noise.validate()?;

    let reference = post_process(object.transmission(), &spec.kernel)?;
    let peak = select_peak_mask(&reference, spec.peak_fraction, spec.peak_border)?;
    if !peak.is_disjoint(&spec.background) {
        return Err(Error::Mask("peak mask overlaps the background region".into()));
    }

    let modified = modify_basis(&spec.basis, &spec.kernel)?;
    let post_plan = if spec.basis.is_canonical() {
        MeasurementPlan::binary(object, &spec.basis, exec)?
    } else {
        MeasurementPlan::decomposed(object, &spec.basis, exec)?
    };
    let basis_plan = MeasurementPlan::decomposed(object, &modified, exec)?;

    let mut keys = Vec::new();
    for (m, method) in Method::ALL.into_iter().enumerate() {
        for (t, &time) in spec.times_ms.iter().enumerate() {
            for repeat in 0..spec.repeats {
                let tag = ((m as u64) << 48) | ((t as u64) << 24) | repeat as u64;
                keys.push((method, t, time, repeat, derive_seed(spec.noise.seed, tag)));
            }
        }
    }

    let cells = exec.try_map_range(keys.len(), |i| {
        let (method, time_index, time, repeat, seed) = keys[i];
        let noise = spec.noise.clone().with_seed(seed);
        let protocol = ProtocolConfig {
            integration_time_ms: time,
            repeats_per_pattern: spec.repeats_per_pattern,
            method,
        };
        let image = match method {
            Method::PostProcessed => {
                let records = post_plan.acquire(&noise, &protocol, exec)?;
                post_process(&reconstruct_normalized(&records, &spec.basis)?, &spec.kernel)?
            }
            Method::BasisProcessed => {
                let records = basis_plan.acquire(&noise, &protocol, exec)?;
                reconstruct_normalized(&records, &spec.basis)?
            }
        };
        let report = compute_snr(&align_polarity(&image, &reference)?, &peak, &spec.background)?;
        Ok::<_, Error>(SweepCell {
            method,
            time_index,
            integration_time_ms: time,
            repeat,
            seed,
            image,
            report,
        })
    })?;

    Ok(SweepOutcome {
        reference,
        peak,
        cells,
    })
}
