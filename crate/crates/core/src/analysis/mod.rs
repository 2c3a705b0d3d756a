//! Image-quality metrics: region masks, the peak/background SNR, noise
//! amplification and spatial noise correlation.

mod sweep;

pub use sweep::{
    run_sweep, run_sweep_with, snr_sweep, summarize, SweepCell, SweepOutcome, SweepRow, SweepSpec,
    SweepSummaryRow, SweepTable,
};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Image};
use crate::kernel::{filter_energy, Kernel};
use crate::par::Exec;

/// Half-open pixel rectangle `[top, bottom) x [left, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub bottom: usize,
    pub right: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskRole {
    Peak,
    Background,
}

/// Non-empty set of pixels (flattened indices, ascending, unique).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    grid: GridSpec,
    members: Vec<usize>,
    role: MaskRole,
}

impl RegionMask {
    pub fn new(grid: GridSpec, mut members: Vec<usize>, role: MaskRole) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::Mask("mask has no pixels".into()));
        }
        if members.last().is_some_and(|&m| m >= grid.pixel_count()) {
            return Err(Error::Mask("mask pixel outside the grid".into()));
        }
        Ok(Self { grid, members, role })
    }

    pub fn from_rect(grid: GridSpec, rect: Rect, role: MaskRole) -> Result<Self> {
        let n = grid.side();
        if rect.top >= rect.bottom || rect.left >= rect.right || rect.bottom > n || rect.right > n {
            return Err(Error::Mask(format!("rectangle {rect:?} is empty or outside a {n}x{n} grid")));
        }
        let members = (rect.top..rect.bottom)
            .flat_map(|r| (rect.left..rect.right).map(move |c| grid.index(r, c)))
            .collect();
        Self::new(grid, members, role)
    }

    /// Every pixel with a nonzero value in `image`.
    pub fn from_image(image: &Image, role: MaskRole) -> Result<Self> {
        let members = image
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        Self::new(image.grid(), members, role)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn role(&self) -> MaskRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_disjoint(&self, other: &RegionMask) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.members.len() && j < other.members.len() {
            match self.members[i].cmp(&other.members[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

/// Pixels holding the top `fraction` of `|value|` among those at least
/// `border` pixels from every edge. Ties go to the lower flattened index.
pub fn select_peak_mask(reference: &Image, fraction: f64, border: usize) -> Result<RegionMask> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Mask(format!("peak fraction {fraction} must lie in (0, 1)")));
    }
    let grid = reference.grid();
    let n = grid.side();
    let mut candidates: Vec<usize> = (0..grid.pixel_count())
        .filter(|&i| {
            let (r, c) = grid.coords(i);
            r >= border && c >= border && r + border < n && c + border < n
        })
        .collect();
    let count = (fraction * candidates.len() as f64).ceil() as usize;
    if count == 0 {
        return Err(Error::Mask("peak fraction selects no pixels".into()));
    }
    let v = reference.values();
    candidates.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    candidates.truncate(count);
    RegionMask::new(grid, candidates, MaskRole::Peak)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub peak_mean: f64,
    pub background_mean: f64,
    pub background_std: f64,
    pub snr: f64,
}

/// `(<I_P> - <I_B>) / sigma_B` with the population standard deviation of
/// the background region.
pub fn compute_snr(image: &Image, peak: &RegionMask, background: &RegionMask) -> Result<SnrReport> {
    if peak.grid() != image.grid() || background.grid() != image.grid() {
        return Err(Error::Mask("mask grid does not match image".into()));
    }
    if !peak.is_disjoint(background) {
        return Err(Error::Mask("peak and background regions overlap".into()));
    }
    let v = image.values();
    let mean = |m: &RegionMask| m.members().iter().map(|&i| v[i]).sum::<f64>() / m.len() as f64;
    let peak_mean = mean(peak);
    let background_mean = mean(background);
    let var = background
        .members()
        .iter()
        .map(|&i| (v[i] - background_mean).powi(2))
        .sum::<f64>()
        / background.len() as f64;
    let background_std = var.sqrt();
    if background_std == 0.0 {
        return Err(Error::DegenerateBackground);
    }
    Ok(SnrReport {
        peak_mean,
        background_mean,
        background_std,
        snr: (peak_mean - background_mean) / background_std,
    })
}

/// Flips the sign of every pixel where `reference` is negative so that
/// edges of both polarities add up in the peak mean.
pub fn align_polarity(image: &Image, reference: &Image) -> Result<Image> {
    image.ensure_same_grid(reference)?;
    let values = image
        .values()
        .iter()
        .zip(reference.values())
        .map(|(&v, &r)| if r < 0.0 { -v } else { v })
        .collect();
    Image::from_vec(image.grid(), values)
}

/// White-noise standard-deviation gain of a kernel, `sqrt(E_K)`.
pub fn predicted_amplification(kernel: &Kernel) -> f64 {
    filter_energy(kernel).sqrt()
}

/// Cyclic normalised autocorrelation over every lag of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Autocorrelation {
    /// `R` at lag `(dr, dc)`; lags wrap modulo `N`.
    pub fn at(&self, dr: isize, dc: isize) -> f64 {
        self.values[self.grid.wrapped(0, 0, dr, dc)]
    }

    /// Largest `|R|` over all nonzero lags.
    pub fn max_abs_off_peak(&self) -> f64 {
        self.values[1..].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }
}

/// `R(l) = sum_p z(p) z(p + l) / sum_p z(p)^2` with `z` the mean-subtracted
/// image.
pub fn noise_autocorrelation(image: &Image) -> Result<Autocorrelation> {
    pooled_autocorrelation(std::slice::from_ref(image), Exec::default())
}

/// Autocorrelation pooled over independent realisations: lag sums and
/// variances are accumulated across images before normalising.
pub fn pooled_autocorrelation(images: &[Image], exec: Exec) -> Result<Autocorrelation> {
    let first = images
        .first()
        .ok_or_else(|| Error::Dimension("no images to correlate".into()))?;
    let grid = first.grid();
    for img in images {
        img.ensure_same_grid(first)?;
    }
    let centred: Vec<Vec<f64>> = images
        .iter()
        .map(|img| {
            let mean = img.mean();
            img.values().iter().map(|v| v - mean).collect()
        })
        .collect();
    let energy: f64 = centred.iter().flatten().map(|z| z * z).sum();
    if energy == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let n = grid.side();
    let values = exec.map_range(grid.pixel_count(), |lag| {
        let (dr, dc) = grid.coords(lag);
        let mut acc = 0.0;
        for z in &centred {
            for r in 0..n {
                let rs = (r + dr) % n;
                let row = &z[r * n..(r + 1) * n];
                let shifted = &z[rs * n..(rs + 1) * n];
                for c in 0..n {
                    acc += row[c] * shifted[(c + dc) % n];
                }
            }
        }
        acc / energy
    });
    Ok(Autocorrelation { grid, values })
}
