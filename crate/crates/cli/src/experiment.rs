use std::fs;
use std::path::PathBuf;

use ghost_core::analysis::{run_sweep_with, summarize, SweepOutcome, SweepSpec};
use ghost_core::basis::modify_basis;
use ghost_core::io::{encode_grid_csv, encode_summary_csv, encode_sweep_csv, write_atomic, write_image_pgm};
use ghost_core::{Exec, Image, Result};

use crate::config::ExperimentConfig;

/// Files written by one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub images: Vec<PathBuf>,
    pub sweep_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub manifest: PathBuf,
}

pub fn sweep_spec(config: &ExperimentConfig) -> Result<SweepSpec> {
    let mut spec = SweepSpec::new(
        config.kernel(),
        config.noise_model(),
        config.times.clone(),
        config.repeats,
        config.background()?,
    );
    spec.basis = config.basis();
    spec.repeats_per_pattern = config.repeats_per_pattern;
    spec.peak_fraction = config.peak_fraction;
    spec.peak_border = config.peak_border;
    Ok(spec)
}

/// Runs the sweep without touching the filesystem.
pub fn simulate(config: &ExperimentConfig, exec: Exec) -> Result<SweepOutcome> {
    let object = config.scene_object()?;
    run_sweep_with(exec, &object, &sweep_spec(config)?)
}

pub fn image_stem(method: &str, time_ms: f64, repeat: usize) -> String {
    format!("{method}_t{time_ms}_r{repeat}")
}

/// Computes every cell first, then writes images, CSVs and the manifest.
/// Each file goes through a temporary name, so a failure leaves no
/// truncated output.
pub fn run_experiment(config: &ExperimentConfig, exec: Exec) -> Result<RunReport> {
    let outcome = simulate(config, exec)?;
    let table = outcome.table();
    let sweep = encode_sweep_csv(&table)?;
    let summary = encode_summary_csv(&summarize(&table))?;

    let out = &config.output_dir;
    let image_dir = out.join("images");
    fs::create_dir_all(&image_dir)?;
    let grid_dir = out.join("grids");
    if config.write_grids {
        fs::create_dir_all(&grid_dir)?;
    }

    let mut images = Vec::with_capacity(outcome.cells.len());
    for cell in &outcome.cells {
        let stem = image_stem(cell.method.as_str(), cell.integration_time_ms, cell.repeat);
        let path = image_dir.join(format!("{stem}.pgm"));
        write_image_pgm(&path, &cell.image)?;
        if config.write_grids {
            write_atomic(&grid_dir.join(format!("{stem}.csv")), encode_grid_csv(&cell.image)?.as_bytes())?;
        }
        images.push(path);
    }

    let sweep_csv = out.join("sweep.csv");
    let summary_csv = out.join("summary.csv");
    let manifest = out.join("manifest.toml");
    write_atomic(&sweep_csv, sweep.as_bytes())?;
    write_atomic(&summary_csv, summary.as_bytes())?;
    write_atomic(&manifest, config.to_manifest().as_bytes())?;

    Ok(RunReport {
        output_dir: out.clone(),
        images,
        sweep_csv,
        summary_csv,
        manifest,
    })
}

/// Original and filter-modified patterns at `gallery_indices`, as
/// `gallery/original_<j>.pgm` and `gallery/modified_<j>.pgm`.
pub fn emit_pattern_gallery(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let basis = config.basis();
    let modified = modify_basis(&basis, &config.kernel())?;
    let pairs: Vec<(usize, Image, Image)> = config
        .gallery_indices
        .iter()
        .map(|&j| Ok((j, basis.pattern(j)?, modified.pattern(j)?)))
        .collect::<Result<_>>()?;

    let dir = config.output_dir.join("gallery");
    fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    for (j, original, filtered) in pairs {
        for (prefix, image) in [("original", original), ("modified", filtered)] {
            let path = dir.join(format!("{prefix}_{j}.pgm"));
            write_image_pgm(&path, &image)?;
            written.push(path);
        }
    }
    Ok(written)
}
