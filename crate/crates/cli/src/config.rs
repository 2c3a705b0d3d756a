//! Experiment configuration: TOML text, environment overrides, validation.

use std::path::{Path, PathBuf};

use ghost_core::analysis::{MaskRole, Rect, RegionMask};
use ghost_core::basis::{canonical_basis, hadamard_basis, PatternBasis};
use ghost_core::io::read_scene_object;
use ghost_core::virtual_bench::{default_background_rect, synth_bar_target, NoiseModel, SceneObject};
use ghost_core::{GridSpec, Kernel};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Prefix of environment variables overriding config keys, e.g.
/// `GHOSTPROC_GRID=32`.
pub const ENV_PREFIX: &str = "GHOSTPROC_";

pub const BAR_TARGET: &str = "bar-target";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Grid side `N`.
    pub grid: usize,
    /// `canonical` or `hadamard`.
    pub basis: String,
    /// Kernel preset name; mutually exclusive with `kernel_taps`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    /// Inline kernel, one inner list per row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_taps: Option<Vec<Vec<f64>>>,
    pub lamp_base: f64,
    pub lamp_drift_amplitude: f64,
    /// Defaults to `10 N^2` steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lamp_drift_period: Option<f64>,
    pub detector_sigma: f64,
    pub normalization_sigma: f64,
    pub background_measure: f64,
    pub background_norm: f64,
    pub repeats_per_pattern: usize,
    pub times: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// `bar-target` or the path of a graymap.
    pub object: String,
    /// Bar groups of the synthetic target; the most that fit, up to three,
    /// when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bar_groups: Option<usize>,
    pub peak_fraction: f64,
    pub peak_border: usize,
    /// `[top, left, bottom, right]`, half-open.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_rect: Option<[usize; 4]>,
    /// Graymap whose nonzero pixels form the background region.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_mask: Option<PathBuf>,
    pub gallery_indices: Vec<usize>,
    /// Also write every reconstruction as a lossless CSV grid.
    pub write_grids: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let noise = NoiseModel::for_grid(GridSpec::new(64).expect("nonzero side"));
        Self {
            grid: 64,
            basis: "canonical".into(),
            kernel: None,
            kernel_taps: None,
            lamp_base: noise.lamp_base,
            lamp_drift_amplitude: noise.lamp_drift_amplitude,
            lamp_drift_period: None,
            detector_sigma: noise.detector_sigma,
            normalization_sigma: noise.normalization_sigma,
            background_measure: noise.background_measure,
            background_norm: noise.background_norm,
            repeats_per_pattern: 2,
            times: vec![20.0, 100.0, 220.0],
            repeats: 3,
            seed: 1,
            output_dir: PathBuf::from("ghostproc-out"),
            object: BAR_TARGET.into(),
            bar_groups: None,
            peak_fraction: 0.1,
            peak_border: 2,
            background_rect: None,
            background_mask: None,
            gallery_indices: vec![85],
            write_grids: false,
        }
    }
}

/// Parses and validates config text without consulting the environment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with_env(text, std::iter::empty::<(String, String)>())
}

/// Parses config text, then applies `GHOSTPROC_<KEY>` overrides from `env`.
/// Override values are read as TOML values, falling back to plain strings.
pub fn parse_config_with_env<I, K, V>(text: &str, env: I) -> Result<ExperimentConfig, ConfigError>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;

    let overrides: Vec<(String, String)> = env
        .into_iter()
        .filter_map(|(k, v)| {
            let key = k.as_ref().strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
            Some((key, v.as_ref().to_string()))
        })
        .collect();
    if !overrides.is_empty() {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
        for (key, raw) in overrides {
            table.insert(key, env_value(&raw));
        }
        config = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
            line: None,
            message: format!("environment override: {}", e.message()),
        })?;
    }

    config.validate()?;
    Ok(config)
}

fn env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn parse_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let line = e
        .span()
        .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1);
    ConfigError::Parse {
        line,
        message: e.message().to_string(),
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = GridSpec::new(self.grid).map_err(|_| invalid("grid", "must be positive"))?;
        match self.basis.as_str() {
            "canonical" => {}
            "hadamard" => {
                hadamard_basis(grid).map_err(|e| invalid("basis", e.to_string()))?;
            }
            other => return Err(invalid("basis", format!("unknown basis `{other}`"))),
        }

        let kernel = self.resolve_kernel()?;
        kernel
            .ensure_fits(grid)
            .map_err(|e| invalid("kernel", e.to_string()))?;

        for (field, value) in [
            ("lamp_base", self.lamp_base),
            ("lamp_drift_amplitude", self.lamp_drift_amplitude),
            ("detector_sigma", self.detector_sigma),
            ("normalization_sigma", self.normalization_sigma),
            ("background_measure", self.background_measure),
            ("background_norm", self.background_norm),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(invalid(field, "must be finite and non-negative"));
            }
        }
        if self.lamp_base == 0.0 {
            return Err(invalid("lamp_base", "must be positive"));
        }
        if self.lamp_drift_amplitude >= 1.0 {
            return Err(invalid("lamp_drift_amplitude", "must be below 1 to keep the lamp positive"));
        }
        if let Some(p) = self.lamp_drift_period {
            if !(p.is_finite() && p > 0.0) {
                return Err(invalid("lamp_drift_period", "must be positive"));
            }
        }

        if self.repeats_per_pattern == 0 {
            return Err(invalid("repeats_per_pattern", "must be at least 1"));
        }
        if self.times.is_empty() {
            return Err(invalid("times", "at least one integration time is required"));
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("times", "integration times must be positive"));
        }
        if self.repeats == 0 {
            return Err(invalid("repeats", "must be at least 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(invalid("seed", "must fit in a signed 64-bit integer"));
        }

        if self.object == BAR_TARGET {
            self.bar_target(grid).map_err(|e| invalid("bar_groups", e.to_string()))?;
        } else if self.object.is_empty() {
            return Err(invalid("object", "must be `bar-target` or a graymap path"));
        }
        if !(self.peak_fraction > 0.0 && self.peak_fraction < 1.0) {
            return Err(invalid("peak_fraction", "must lie strictly between 0 and 1"));
        }
        if 2 * self.peak_border >= self.grid {
            return Err(invalid("peak_border", "leaves no candidate pixels"));
        }
        match (&self.background_rect, &self.background_mask) {
            (Some(_), Some(_)) => {
                return Err(invalid("background_mask", "conflicts with background_rect"));
            }
            (Some([top, left, bottom, right]), None) => {
                let rect = Rect {
                    top: *top,
                    left: *left,
                    bottom: *bottom,
                    right: *right,
                };
                RegionMask::from_rect(grid, rect, MaskRole::Background)
                    .map_err(|e| invalid("background_rect", e.to_string()))?;
            }
            _ => {}
        }
        if let Some(&bad) = self.gallery_indices.iter().find(|&&j| j >= grid.pixel_count()) {
            return Err(invalid("gallery_indices", format!("index {bad} outside a {0}x{0} basis", self.grid)));
        }
        Ok(())
    }

    fn bar_target(&self, grid: GridSpec) -> ghost_core::Result<SceneObject> {
        match self.bar_groups {
            Some(groups) => synth_bar_target(grid, groups),
            None => (2..=3)
                .rev()
                .find_map(|g| synth_bar_target(grid, g).ok())
                .map_or_else(|| synth_bar_target(grid, 1), Ok),
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.grid).expect("validated grid")
    }

    fn resolve_kernel(&self) -> Result<Kernel, ConfigError> {
        match (&self.kernel, &self.kernel_taps) {
            (Some(_), Some(_)) => Err(invalid("kernel_taps", "conflicts with kernel")),
            (None, Some(rows)) => {
                let width = rows.first().map_or(0, Vec::len);
                if rows.is_empty() || rows.iter().any(|r| r.len() != width) {
                    return Err(invalid("kernel_taps", "rows must be non-empty and equally long"));
                }
                Kernel::from_rows("custom", rows).map_err(|e| invalid("kernel_taps", e.to_string()))
            }
            (name, None) => {
                let name = name.as_deref().unwrap_or("edge-eq3");
                Kernel::preset(name).ok_or_else(|| invalid("kernel", format!("unknown preset `{name}`")))
            }
        }
    }

    pub fn kernel(&self) -> Kernel {
        self.resolve_kernel().expect("validated kernel")
    }

    pub fn basis(&self) -> PatternBasis {
        let grid = self.grid_spec();
        match self.basis.as_str() {
            "hadamard" => hadamard_basis(grid).expect("validated basis"),
            _ => canonical_basis(grid),
        }
    }

    pub fn noise_model(&self) -> NoiseModel {
        let grid = self.grid_spec();
        NoiseModel {
            lamp_base: self.lamp_base,
            lamp_drift_amplitude: self.lamp_drift_amplitude,
            lamp_drift_period: self
                .lamp_drift_period
                .unwrap_or(10.0 * grid.pixel_count() as f64),
            detector_sigma: self.detector_sigma,
            normalization_sigma: self.normalization_sigma,
            background_measure: self.background_measure,
            background_norm: self.background_norm,
            seed: self.seed,
        }
    }

    /// Loads or synthesises the scene object.
    pub fn scene_object(&self) -> ghost_core::Result<SceneObject> {
        let grid = self.grid_spec();
        if self.object == BAR_TARGET {
            return self.bar_target(grid);
        }
        let object = read_scene_object(Path::new(&self.object))?;
        if object.grid() != grid {
            return Err(ghost_core::Error::Dimension(format!(
                "object is {0}x{0}, config grid is {1}x{1}",
                object.grid().side(),
                self.grid
            )));
        }
        Ok(object)
    }

    pub fn background(&self) -> ghost_core::Result<RegionMask> {
        let grid = self.grid_spec();
        if let Some(path) = &self.background_mask {
            let mask = read_scene_object(path)?;
            if mask.grid() != grid {
                return Err(ghost_core::Error::Dimension("background mask size differs from grid".into()));
            }
            return RegionMask::from_image(mask.transmission(), MaskRole::Background);
        }
        let rect = match self.background_rect {
            Some([top, left, bottom, right]) => Rect {
                top,
                left,
                bottom,
                right,
            },
            None => default_background_rect(grid),
        };
        RegionMask::from_rect(grid, rect, MaskRole::Background)
    }

    /// TOML echo of this config, preceded by comment lines. Parsing it back
    /// yields an equal config.
    pub fn to_manifest(&self) -> String {
        let body = toml::to_string(self).expect("config serialises");
        format!(
            "# ghostproc {}\n# ghost-core {}\n# seed = {}\n{body}",
            env!("CARGO_PKG_VERSION"),
            env!("CARGO_PKG_VERSION"),
            self.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("grid = 16\nkernel = \"edge-eq3\"\n").unwrap();
        assert_eq!(c.grid, 16);
        assert_eq!(c.times, vec![20.0, 100.0, 220.0]);
        assert_eq!(c.repeats, 3);
        assert_eq!(c.bar_groups, None);
        assert!(c.scene_object().is_ok());
        assert_eq!(c.kernel().id(), "edge-eq3");
        assert_eq!(c.noise_model().lamp_drift_period, 2560.0);
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn even_kernel_rejected_by_field() {
        let err = parse_config("grid = 16\nkernel_taps = [[1.0, -1.0], [1.0, -1.0]]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field: "kernel_taps", .. }), "{err}");
    }

    #[test]
    fn unknown_key_named() {
        let err = parse_config("grid = 16\nsigma4 = 2.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sigma4"), "{msg}");
        assert!(matches!(err, ConfigError::Parse { line: Some(2), .. }), "{err:?}");
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_config("grid = 16\n\ntimes = [20, \n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: Some(_), .. }), "{err:?}");
    }

    #[test]
    fn semantic_errors_name_fields() {
        for (text, field) in [
            ("grid = 12\nbasis = \"hadamard\"", "basis"),
            ("basis = \"fourier\"", "basis"),
            ("kernel = \"sobel\"", "kernel"),
            ("times = []", "times"),
            ("times = [20.0, -1.0]", "times"),
            ("repeats = 0", "repeats"),
            ("peak_fraction = 1.5", "peak_fraction"),
            ("detector_sigma = -1.0", "detector_sigma"),
            ("grid = 16\ngallery_indices = [300]", "gallery_indices"),
            ("grid = 8", "bar_groups"),
            ("background_rect = [0, 0, 0, 4]", "background_rect"),
        ] {
            match parse_config(text) {
                Err(ConfigError::Invalid { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn inline_taps_accepted() {
        let c = parse_config("kernel_taps = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]").unwrap();
        assert_eq!(c.kernel().taps()[4], 1.0);
    }

    #[test]
    fn env_overrides() {
        let env = [
            ("GHOSTPROC_GRID", "32"),
            ("GHOSTPROC_TIMES", "[5, 10]"),
            ("GHOSTPROC_OUTPUT_DIR", "/tmp/somewhere"),
            ("UNRELATED", "x"),
        ];
        let c = parse_config_with_env("grid = 16\nrepeats = 2\n", env).unwrap();
        assert_eq!(c.grid, 32);
        assert_eq!(c.times, vec![5.0, 10.0]);
        assert_eq!(c.repeats, 2);
        assert_eq!(c.output_dir, PathBuf::from("/tmp/somewhere"));
    }

    #[test]
    fn unknown_env_key_rejected() {
        let err = parse_config_with_env("", [("GHOSTPROC_SIGMA4", "1")]).unwrap_err();
        assert!(err.to_string().contains("sigma4"), "{err}");
    }

    #[test]
    fn manifest_round_trip() {
        let c = parse_config(
            "grid = 32\nbar_groups = 2\nkernel = \"edge\"\ntimes = [20.0, 57.25]\nlamp_drift_period = 333.3\nbackground_rect = [20, 2, 30, 30]\nseed = 99\n",
        )
        .unwrap();
        let manifest = c.to_manifest();
        assert!(manifest.starts_with("# ghostproc "));
        assert_eq!(parse_config(&manifest).unwrap(), c);
        let d = ExperimentConfig::default();
        assert_eq!(parse_config(&d.to_manifest()).unwrap(), d);
    }
}
