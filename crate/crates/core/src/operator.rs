//! Dense basis-change operator built from a kernel.
//!
//! The matrix is block-circulant with circulant blocks: row `p` holds the
//! kernel taps at columns `(p - q) mod N`. It is an equivalence oracle for
//! the stencil routines in [`crate::conv`]; pipelines use the stencils.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Image};
use crate::kernel::Kernel;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    grid: GridSpec,
    dim: usize,
    entries: Vec<f64>,
}

impl OperatorMatrix {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Side length `N^2`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    /// `B x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok((0..self.dim)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `B^T x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = vec![0.0; self.dim];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(r)) {
                *o += b * xr;
            }
        }
        Ok(out)
    }

    pub fn apply_image(&self, image: &Image) -> Result<Image> {
        Image::unflatten(&self.apply(image.values())?, self.grid)
    }

    pub fn apply_transpose_image(&self, image: &Image) -> Result<Image> {
        Image::unflatten(&self.apply_transpose(image.values())?, self.grid)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "operator of side {} applied to vector of length {}",
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }
}

/// Compiles `kernel` into the dense `N^2 x N^2` cyclic convolution matrix.
/// Taps that wrap onto the same pixel (tiny grids) accumulate.
pub fn build_operator_matrix(kernel: &Kernel, grid: GridSpec) -> Result<OperatorMatrix> {
    kernel.ensure_fits(grid)?;
    let n = grid.side();
    let dim = grid.pixel_count();
    let mut entries = vec![0.0; dim * dim];
    for r in 0..n {
        for c in 0..n {
            let row = grid.index(r, c);
            for (dr, dc, t) in kernel.offsets() {
                entries[row * dim + grid.wrapped(r, c, -dr, -dc)] += t;
            }
        }
    }
    Ok(OperatorMatrix { grid, dim, entries })
}
