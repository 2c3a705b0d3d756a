//! Square pixel grids and the images that live on them.
//!
//! Every image is stored flattened in row-major order, which is also the
//! column-vector layout used by the dense operator matrices.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Side length `N` of an `N x N` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    side: usize,
}

impl GridSpec {
    pub fn new(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::UnsupportedSize {
                side,
                reason: "grid side must be at least 1",
            });
        }
        Ok(Self { side })
    }

    #[inline]
    pub fn side(self) -> usize {
        self.side
    }

    #[inline]
    pub fn pixel_count(self) -> usize {
        self.side * self.side
    }

    #[inline]
    pub fn index(self, row: usize, col: usize) -> usize {
        row * self.side + col
    }

    #[inline]
    pub fn coords(self, index: usize) -> (usize, usize) {
        (index / self.side, index % self.side)
    }

    /// Row-major index of `(row + dr, col + dc)` with cyclic wrap-around.
    #[inline]
    pub fn wrapped(self, row: usize, col: usize, dr: isize, dc: isize) -> usize {
        let n = self.side as isize;
        let r = (row as isize + dr).rem_euclid(n) as usize;
        let c = (col as isize + dc).rem_euclid(n) as usize;
        self.index(r, c)
    }
}

/// Real-valued image on a square grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Image {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::filled(grid, 0.0)
    }

    pub fn filled(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.pixel_count()],
        }
    }

    /// Builds an image from row-major values, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.pixel_count() {
            return Err(Error::Dimension(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.pixel_count(),
                grid.side(),
                grid.side(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dimension(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Builds an image from nested rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let grid = GridSpec::new(rows.len())?;
        let mut values = Vec::with_capacity(grid.pixel_count());
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != grid.side() {
                return Err(Error::Dimension(format!(
                    "row {r} has {} values, expected {}",
                    row.len(),
                    grid.side()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_vec(grid, values)
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = grid.side();
        let values = (0..grid.pixel_count()).map(|i| f(i / n, i % n)).collect();
        Self { grid, values }
    }

    /// One-hot image with a single unit pixel at flattened index `index`.
    pub fn one_hot(grid: GridSpec, index: usize) -> Self {
        let mut img = Self::zeros(grid);
        img.values[index] = 1.0;
        img
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.grid.side()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.grid.index(row, col)]
    }

    /// Row-major column vector of length `N^2`.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Inverse of [`Image::flatten`].
    pub fn unflatten(vector: &[f64], grid: GridSpec) -> Result<Self> {
        Self::from_vec(grid, vector.to_vec())
    }

    pub fn dot(&self, other: &Image) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Image {
        self.map(|v| v * factor)
    }

    /// `self + factor * other`, in place.
    pub fn add_scaled(&mut self, other: &Image, factor: f64) -> Result<()> {
        self.ensure_same_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    /// Population standard deviation over all pixels.
    pub fn std(&self) -> f64 {
        let mean = self.mean();
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / self.values.len() as f64;
        var.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub(crate) fn ensure_same_grid(&self, other: &Image) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension(format!(
                "grid {}x{} does not match {}x{}",
                self.side(),
                self.side(),
                other.side(),
                other.side()
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Image {
    type Output = f64;

    fn index(&self, (row, col): (usize, usize)) -> &f64 {
        &self.values[self.grid.index(row, col)]
    }
}

impl IndexMut<(usize, usize)> for Image {
    fn index_mut(&mut self, (row, col): (usize, usize)) -> &mut f64 {
        let i = self.grid.index(row, col);
        &mut self.values[i]
    }
}

/// Maximum absolute difference scaled by the larger of the two peak
/// magnitudes; `0` when both images are identically zero.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "relative_error on unequal lengths");
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = a
        .iter()
        .chain(b)
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_side_rejected() {
        assert!(GridSpec::new(0).is_err());
    }

    #[test]
    fn flatten_is_row_major() {
        let img = Image::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(img.flatten(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(img[(1, 0)], 3.0);
    }

    #[test]
    fn flatten_single_pixel() {
        let img = Image::from_rows(&[[7.0]]).unwrap();
        assert_eq!(img.flatten(), vec![7.0]);
    }

    #[test]
    fn unflatten_length_mismatch() {
        let grid = GridSpec::new(3).unwrap();
        assert!(matches!(
            Image::unflatten(&[1.0; 8], grid),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let grid = GridSpec::new(1).unwrap();
        assert!(Image::from_vec(grid, vec![f64::NAN]).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(Image::from_rows(&rows).is_err());
    }

    #[test]
    fn wrapped_index() {
        let g = GridSpec::new(4).unwrap();
        assert_eq!(g.wrapped(0, 0, -1, -1), g.index(3, 3));
        assert_eq!(g.wrapped(3, 2, 1, 2), g.index(0, 0));
    }

    #[test]
    fn population_std() {
        let img = Image::from_rows(&[[1.0, 3.0], [1.0, 3.0]]).unwrap();
        assert_eq!(img.std(), 1.0);
    }
}
