//! Small odd-sized filter stencils and their scalar noise properties.

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Odd-sized real stencil, row-major, centred at `((h-1)/2, (w-1)/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    height: usize,
    width: usize,
    taps: Vec<f64>,
    id: String,
}

impl Kernel {
    pub fn new(height: usize, width: usize, taps: Vec<f64>) -> Result<Self> {
        Self::named("custom", height, width, taps)
    }

    pub fn named(id: impl Into<String>, height: usize, width: usize, taps: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || height.is_multiple_of(2) || width.is_multiple_of(2) {
            return Err(Error::InvalidKernel(format!(
                "dimensions must be odd and positive, got {height}x{width}"
            )));
        }
        if taps.len() != height * width {
            return Err(Error::InvalidKernel(format!(
                "expected {} taps for {height}x{width}, got {}",
                height * width,
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidKernel("taps must be finite".into()));
        }
        Ok(Self {
            height,
            width,
            taps,
            id: id.into(),
        })
    }

    /// Builds a kernel from nested rows.
    pub fn from_rows<R: AsRef<[f64]>>(id: impl Into<String>, rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::InvalidKernel("rows have unequal lengths".into()));
        }
        let taps = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::named(id, height, width, taps)
    }

    /// The 3x3 first-difference edge detector
    /// `[[0,-1,0],[-1,0,1],[0,1,0]]`.
    pub fn edge() -> Self {
        Self::from_rows(
            "edge-eq3",
            &[[0.0, -1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
        )
        .expect("static kernel")
    }

    pub fn identity() -> Self {
        Self::named("identity", 1, 1, vec![1.0]).expect("static kernel")
    }

    /// 3x3 all-ones box filter.
    pub fn box3() -> Self {
        Self::named("box3", 3, 3, vec![1.0; 9]).expect("static kernel")
    }

    /// Looks up a named preset (`edge-eq3`, `identity`, `box3`).
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "edge-eq3" | "edge" => Some(Self::edge()),
            "identity" => Some(Self::identity()),
            "box3" => Some(Self::box3()),
            _ => None,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn half_height(&self) -> usize {
        (self.height - 1) / 2
    }

    pub fn half_width(&self) -> usize {
        (self.width - 1) / 2
    }

    /// Tap at signed offset `(dr, dc)` from the centre, zero outside the support.
    pub fn at(&self, dr: isize, dc: isize) -> f64 {
        let r = dr + self.half_height() as isize;
        let c = dc + self.half_width() as isize;
        if r < 0 || c < 0 || r >= self.height as isize || c >= self.width as isize {
            return 0.0;
        }
        self.taps[r as usize * self.width + c as usize]
    }

    /// Iterates `(dr, dc, tap)` over nonzero taps.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let hh = self.half_height() as isize;
        let hw = self.half_width() as isize;
        let w = self.width;
        self.taps.iter().enumerate().filter(|(_, t)| **t != 0.0).map(move |(i, &t)| {
            ((i / w) as isize - hh, (i % w) as isize - hw, t)
        })
    }

    /// Kernel rotated by 180 degrees.
    pub fn rot180(&self) -> Kernel {
        let mut taps = self.taps.clone();
        taps.reverse();
        Kernel {
            height: self.height,
            width: self.width,
            taps,
            id: format!("rot180({})", self.id),
        }
    }

    pub fn tap_sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn ensure_fits(&self, grid: GridSpec) -> Result<()> {
        if self.height > grid.side() || self.width > grid.side() {
            return Err(Error::Dimension(format!(
                "kernel {}x{} does not fit a {}x{} grid",
                self.height,
                self.width,
                grid.side(),
                grid.side()
            )));
        }
        Ok(())
    }
}

/// Filter energy `E_K`: the sum of squared taps. White noise passed through
/// the kernel has its standard deviation multiplied by `sqrt(E_K)`.
pub fn filter_energy(kernel: &Kernel) -> f64 {
    kernel.taps().iter().map(|t| t * t).sum()
}

/// Normalised kernel autocorrelation `R(l) = sum_q K(q) K(q + l) / E_K`.
///
/// This is the correlation structure that white noise acquires after the
/// kernel is applied, so it is the prediction for post-filtered noise.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelAutocorrelation {
    half_height: isize,
    half_width: isize,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl KernelAutocorrelation {
    /// `R` at lag `(dr, dc)`, zero beyond the kernel's reach.
    pub fn at(&self, dr: isize, dc: isize) -> f64 {
        let reach_r = 2 * self.half_height;
        let reach_c = 2 * self.half_width;
        if dr.abs() > reach_r || dc.abs() > reach_c {
            return 0.0;
        }
        let r = (dr + reach_r) as usize;
        let c = (dc + reach_c) as usize;
        self.values[r * self.cols + c]
    }

    /// Iterates `(dr, dc, R)` over every lag in the support.
    pub fn lags(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let reach_r = 2 * self.half_height;
        let reach_c = 2 * self.half_width;
        let cols = self.cols;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| ((i / cols) as isize - reach_r, (i % cols) as isize - reach_c, v))
    }

    pub fn extent(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

pub fn kernel_autocorrelation(kernel: &Kernel) -> Result<KernelAutocorrelation> {
    let energy = filter_energy(kernel);
    if energy == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let hh = kernel.half_height() as isize;
    let hw = kernel.half_width() as isize;
    let rows = 4 * kernel.half_height() + 1;
    let cols = 4 * kernel.half_width() + 1;
    let mut values = Vec::with_capacity(rows * cols);
    for dr in -2 * hh..=2 * hh {
        for dc in -2 * hw..=2 * hw {
            let s: f64 = kernel
                .offsets()
                .map(|(qr, qc, t)| t * kernel.at(qr + dr, qc + dc))
                .sum();
            values.push(s / energy);
        }
    }
    Ok(KernelAutocorrelation {
        half_height: hh,
        half_width: hw,
        rows,
        cols,
        values,
    })
}
