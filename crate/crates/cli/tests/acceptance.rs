//! Acceptance checks, one PASS/FAIL line each. Exits nonzero if any fail.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ghost_cli::{run_experiment, ExperimentConfig};
use ghost_core::analysis::{pooled_autocorrelation, run_sweep, MaskRole, RegionMask, SweepSpec, SweepTable};
use ghost_core::basis::{canonical_basis, hadamard_basis, hadamard_entry, modify_basis};
use ghost_core::conv::cyclic_convolve;
use ghost_core::decompose::{binary_decompose, is_binary};
use ghost_core::grid::relative_error;
use ghost_core::kernel::{filter_energy, kernel_autocorrelation};
use ghost_core::operator::build_operator_matrix;
use ghost_core::reconstruction::{post_process, reconstruct_normalized};
use ghost_core::virtual_bench::{
    acquisition_counts, default_background_rect, derive_seed, synth_bar_target, MeasurementPlan, Method,
    NoiseModel, ProtocolConfig, SceneObject,
};
use ghost_core::{Exec, GridSpec, Image, Kernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, name: &str, limit: Option<Duration>, check: impl FnOnce() -> Check) {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match (result, limit) {
            (Ok(detail), Some(limit)) if elapsed > limit => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
            }
            (other, _) => other,
        };
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

fn protocol(time: f64, method: Method) -> ProtocolConfig {
    ProtocolConfig::new(time, method)
}

fn operator_equivalence() -> Check {
    let g = grid(8);
    let k = Kernel::edge();
    let b = build_operator_matrix(&k, g).map_err(err)?;
    let canon = canonical_basis(g);
    let modified = modify_basis(&canon, &k).map_err(err)?;
    let noise = NoiseModel::noiseless(g);
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let object = SceneObject::new(Image::from_fn(g, |_, _| rng.random_range(0.0..1.0)));
        let dense = Image::unflatten(&b.apply_transpose(&object.transmission().flatten()).map_err(err)?, g).map_err(err)?;

        let noise = noise.clone().with_seed(trial);
        let basis_records = MeasurementPlan::decomposed(&object, &modified, Exec::Sequential)
            .and_then(|p| p.acquire(&noise, &protocol(20.0, Method::BasisProcessed), Exec::Sequential))
            .map_err(err)?;
        let basis_image = reconstruct_normalized(&basis_records, &canon).map_err(err)?;
        let post_records = MeasurementPlan::binary(&object, &canon, Exec::Sequential)
            .and_then(|p| p.acquire(&noise, &protocol(20.0, Method::PostProcessed), Exec::Sequential))
            .map_err(err)?;
        let post_image = post_process(&reconstruct_normalized(&post_records, &canon).map_err(err)?, &k).map_err(err)?;

        worst = worst
            .max(relative_error(basis_image.values(), dense.values()))
            .max(relative_error(basis_image.values(), post_image.values()));
    }
    ensure(worst <= 1e-10, || format!("worst relative error {worst:e} > 1e-10"))?;
    Ok(format!("50 objects, worst relative error {worst:.2e}"))
}

fn energy_and_amplification() -> Check {
    let k = Kernel::edge();
    let e = filter_energy(&k);
    ensure(e == 4.0, || format!("filter energy {e}, expected exactly 4"))?;
    let g = grid(128);
    let mut ratios = Vec::new();
    for trial in 0..12u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(2, trial));
        let field = Image::from_fn(g, |_, _| rng.sample(StandardNormal));
        let filtered = cyclic_convolve(&field, &k).map_err(err)?;
        ratios.push(filtered.std() / field.std());
    }
    let worst = ratios.iter().map(|r| (r - 2.0).abs() / 2.0).fold(0.0, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let deviation = (mean - 2.0).abs() / 2.0;
    ensure(deviation <= 0.02, || format!("mean ratio {mean:.4} deviates {:.2}% from 2.0", deviation * 100.0))?;
    Ok(format!(
        "E_K = 4, 12 trials, mean ratio {mean:.4} ({:.2}% off), worst single trial {:.2}% off",
        deviation * 100.0,
        worst * 100.0
    ))
}

fn measurement_parity() -> Check {
    let g = grid(64);
    let object = synth_bar_target(g, 3).map_err(err)?;
    let canon = canonical_basis(g);
    let modified = modify_basis(&canon, &Kernel::edge()).map_err(err)?;
    let noise = NoiseModel::for_grid(g).with_seed(3);
    let post = MeasurementPlan::binary(&object, &canon, Exec::default())
        .and_then(|p| p.acquire(&noise, &protocol(20.0, Method::PostProcessed), Exec::default()))
        .map_err(err)?;
    let basis = MeasurementPlan::decomposed(&object, &modified, Exec::default())
        .and_then(|p| p.acquire(&noise, &protocol(20.0, Method::BasisProcessed), Exec::default()))
        .map_err(err)?;
    let expected = (2 * 64 * 64, 64 * 64);
    let (p, b) = (acquisition_counts(&post), acquisition_counts(&basis));
    ensure(p == expected && b == expected, || format!("post {p:?}, basis {b:?}, expected {expected:?}"))?;
    Ok(format!("both protocols: {} bucket reads, {} normalisation reads", expected.0, expected.1))
}

fn noise_character() -> Check {
    let g = grid(64);
    let k = Kernel::edge();
    let canon = canonical_basis(g);
    let modified = modify_basis(&canon, &k).map_err(err)?;
    // an opaque object leaves only detector, stray-light and lamp noise
    let object = SceneObject::new(Image::zeros(g));
    let basis_plan = MeasurementPlan::decomposed(&object, &modified, Exec::default()).map_err(err)?;
    let post_plan = MeasurementPlan::binary(&object, &canon, Exec::default()).map_err(err)?;
    const REALISATIONS: u64 = 8;
    let mut basis_images = Vec::new();
    let mut post_images = Vec::new();
    for r in 0..REALISATIONS {
        let noise = NoiseModel::for_grid(g).with_seed(derive_seed(4, r));
        let records = basis_plan
            .acquire(&noise, &protocol(20.0, Method::BasisProcessed), Exec::default())
            .map_err(err)?;
        basis_images.push(reconstruct_normalized(&records, &canon).map_err(err)?);
        let records = post_plan
            .acquire(&noise, &protocol(20.0, Method::PostProcessed), Exec::default())
            .map_err(err)?;
        post_images.push(post_process(&reconstruct_normalized(&records, &canon).map_err(err)?, &k).map_err(err)?);
    }
    let basis_r = pooled_autocorrelation(&basis_images, Exec::default()).map_err(err)?;
    let post_r = pooled_autocorrelation(&post_images, Exec::default()).map_err(err)?;
    let max_basis = basis_r.max_abs_off_peak();
    ensure(max_basis <= 0.05, || format!("basis-processed max |R| {max_basis:.4} > 0.05"))?;

    let kr = kernel_autocorrelation(&k).map_err(err)?;
    let mut detail = Vec::new();
    for (dr, dc, expected) in [(1, 1, -0.5), (1, -1, 0.5), (0, 2, -0.25)] {
        let oracle = kr.at(dr, dc);
        ensure(oracle == expected, || format!("kernel autocorrelation at ({dr},{dc}) is {oracle}"))?;
        let got = post_r.at(dr, dc);
        ensure((got - expected).abs() <= 0.05, || format!("post-processed R({dr},{dc}) = {got:.4}, expected {expected}"))?;
        detail.push(format!("R({dr},{dc})={got:.3}"));
    }
    Ok(format!(
        "{REALISATIONS} pooled realisations; basis max |R| {max_basis:.4}; post {}",
        detail.join(" ")
    ))
}

fn bar_spec(noise: NoiseModel) -> Result<(SceneObject, SweepSpec), String> {
    let g = grid(64);
    let object = synth_bar_target(g, 3).map_err(err)?;
    let bg = RegionMask::from_rect(g, default_background_rect(g), MaskRole::Background).map_err(err)?;
    let spec = SweepSpec::new(Kernel::edge(), noise, vec![20.0, 100.0, 220.0], 3, bg);
    Ok((object, spec))
}

fn means(table: &SweepTable, method: Method, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| table.mean_snr(method, t).unwrap()).collect()
}

fn fmt(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join("/")
}

fn snr_comparison(default_table: &SweepTable) -> Check {
    let times = [20.0, 100.0, 220.0];
    let g = grid(64);
    let read_noise_only = NoiseModel {
        normalization_sigma: 0.0,
        background_measure: 0.0,
        background_norm: 0.0,
        ..NoiseModel::for_grid(g).with_seed(51)
    };
    let (object, spec) = bar_spec(read_noise_only)?;
    let table = run_sweep(&object, &spec).map_err(err)?.table();
    let b = means(&table, Method::BasisProcessed, &times);
    let p = means(&table, Method::PostProcessed, &times);
    for i in 0..times.len() {
        let rel = (b[i] - p[i]).abs() / p[i];
        ensure(rel <= 0.10, || format!("(a) t={}: basis {:.3} vs post {:.3} differ by {:.1}%", times[i], b[i], p[i], rel * 100.0))?;
    }

    let bd = means(default_table, Method::BasisProcessed, &times);
    let pd = means(default_table, Method::PostProcessed, &times);
    let ratios: Vec<f64> = bd.iter().zip(&pd).map(|(b, p)| b / p).collect();
    for i in 0..times.len() {
        ensure(bd[i] > pd[i], || format!("(b) t={}: basis {:.3} <= post {:.3}", times[i], bd[i], pd[i]))?;
        ensure((1.5..=3.0).contains(&ratios[i]), || format!("(b) t={}: ratio {:.3} outside [1.5, 3.0]", times[i], ratios[i]))?;
    }
    Ok(format!(
        "(a) basis {} vs post {}; (b) basis {} vs post {}, ratios {}",
        fmt(&b),
        fmt(&p),
        fmt(&bd),
        fmt(&pd),
        fmt(&ratios)
    ))
}

fn monotonicity(default_table: &SweepTable) -> Check {
    let times = [20.0, 100.0, 220.0];
    let mut detail = Vec::new();
    for method in Method::ALL {
        let m = means(default_table, method, &times);
        ensure(m.windows(2).all(|w| w[1] > w[0]), || format!("{method}: {}", fmt(&m)))?;
        detail.push(format!("{method} {}", fmt(&m)));
    }
    Ok(detail.join("; "))
}

fn structural_exactness() -> Check {
    for n in [2usize, 4, 8] {
        let dim = n * n;
        for a in 0..dim {
            for b in 0..dim {
                let dot: i64 = (0..dim)
                    .map(|p| hadamard_entry(a, p) as i64 * hadamard_entry(b, p) as i64)
                    .sum();
                let expected = if a == b { dim as i64 } else { 0 };
                ensure(dot == expected, || format!("N={n}: row {a} . row {b} = {dot}"))?;
            }
        }
        hadamard_basis(grid(n)).map_err(err)?;
    }

    let modified = modify_basis(&canonical_basis(grid(16)), &Kernel::edge()).map_err(err)?;
    for (j, pattern) in modified.patterns().enumerate() {
        let set = binary_decompose(j, &pattern);
        ensure(set.parts.iter().all(|p| is_binary(&p.mask)), || format!("pattern {j}: non-binary part"))?;
        ensure(set.recombine() == pattern, || format!("pattern {j}: recombination differs"))?;
    }

    let root = tempfile::tempdir().map_err(err)?;
    let mut csvs = Vec::new();
    for (name, exec) in [("a", Exec::Sequential), ("b", Exec::Parallel)] {
        let config = ExperimentConfig {
            output_dir: root.path().join(name),
            seed: 7,
            ..ExperimentConfig::default()
        };
        run_experiment(&config, exec).map_err(err)?;
        let read = |f: &str| fs::read(config.output_dir.join(f)).map_err(err);
        csvs.push((read("sweep.csv")?, read("summary.csv")?));
    }
    ensure(csvs[0] == csvs[1], || "sweep or summary CSV differs between runs".into())?;
    Ok("Hadamard Gram matrices exact for N=2,4,8; 256 modified patterns recombine exactly; CSVs byte-identical (sequential vs parallel)".into())
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    suite.run("1 operator equivalence", Some(Duration::from_secs(5)), operator_equivalence);
    suite.run("2 filter energy and amplification", None, energy_and_amplification);
    suite.run("3 measurement parity", None, measurement_parity);
    suite.run("4 noise character", Some(Duration::from_secs(30)), noise_character);

    let start = Instant::now();
    let default_table = bar_spec(NoiseModel::for_grid(grid(64)).with_seed(5))
        .and_then(|(object, spec)| run_sweep(&object, &spec).map_err(err))
        .map(|o| o.table());
    let sweep_time = start.elapsed();
    match default_table {
        Ok(table) => {
            suite.run("5 SNR comparison", Some(Duration::from_secs(120).saturating_sub(sweep_time)), || {
                snr_comparison(&table)
            });
            suite.run("6 monotonicity", None, || monotonicity(&table));
        }
        Err(e) => {
            suite.run("5 SNR comparison", None, || Err(e.clone()));
            suite.run("6 monotonicity", None, || Err(e));
        }
    }
    suite.run("7 structural exactness", None, structural_exactness);

    if suite.failures == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} acceptance criteria failed", suite.failures);
        ExitCode::FAILURE
    }
}
