//! Image formation from measured coefficients, `I = sum_j c_j psi_j`, and
//! the post-processing filter path.

use crate::basis::{hadamard_entry, BasisLabel, PatternBasis};
use crate::conv::cyclic_correlate;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Image};
use crate::kernel::Kernel;
use crate::virtual_bench::{CoefficientRecord, Method};

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub basis: BasisLabel,
    pub kernel_id: String,
    pub noise_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub image: Image,
    pub method: Method,
    pub provenance: Provenance,
}

/// Weighted sum of the reconstruction basis patterns. Canonical bases are a
/// reshape and Hadamard bases use a fast Walsh-Hadamard transform; other
/// bases fall back to the explicit sum.
pub fn reconstruct(coefficients: &[CoefficientRecord], basis: &PatternBasis) -> Result<Image> {
    if coefficients.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for a basis of {} patterns",
            coefficients.len(),
            basis.len()
        )));
    }
    let mut c = vec![0.0; basis.len()];
    for rec in coefficients {
        let slot = c.get_mut(rec.pattern_index).ok_or_else(|| {
            Error::Dimension(format!("pattern index {} out of range", rec.pattern_index))
        })?;
        *slot = rec.coefficient;
    }
    reconstruct_from_values(c, basis)
}

pub fn reconstruct_from_values(mut c: Vec<f64>, basis: &PatternBasis) -> Result<Image> {
    let grid = basis.grid();
    if c.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients for a basis of {} patterns",
            c.len(),
            basis.len()
        )));
    }
    if basis.is_canonical() {
        return Image::from_vec(grid, c);
    }
    if basis.is_hadamard() {
        // Sylvester H is symmetric, so sum_j c_j row_j = H c
        fwht(&mut c);
        return Image::from_vec(grid, c);
    }
    let mut out = Image::zeros(grid);
    for (j, &cj) in c.iter().enumerate() {
        if cj != 0.0 {
            out.add_scaled(&basis.pattern(j)?, cj)?;
        }
    }
    Ok(out)
}

/// In-place fast Walsh-Hadamard transform in Sylvester (natural) order.
pub fn fwht(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Applies the filter after reconstruction. Uses cyclic correlation, which
/// is the operator (`B^T`) that the modified basis realises during
/// measurement, so both pipelines target the same filtered image.
pub fn post_process(image: &Image, kernel: &Kernel) -> Result<Image> {
    cyclic_correlate(image, kernel)
}

/// Divides by `N^2`, undoing the completeness factor of a +-1 basis.
pub fn hadamard_inverse_scale(image: &Image, grid: GridSpec) -> Result<Image> {
    if image.grid() != grid {
        return Err(Error::Dimension("image does not match grid".into()));
    }
    Ok(image.scale(1.0 / grid.pixel_count() as f64))
}

/// Reconstruction normalised so that a noiseless acquisition returns the
/// object (or its filtered version) at unit scale.
pub fn reconstruct_normalized(
    coefficients: &[CoefficientRecord],
    basis: &PatternBasis,
) -> Result<Image> {
    let image = reconstruct(coefficients, basis)?;
    if basis.is_hadamard() {
        hadamard_inverse_scale(&image, basis.grid())
    } else {
        Ok(image)
    }
}

/// Dense explicit sum `sum_j c_j psi_j` for the Hadamard basis; kept for
/// checking the fast transform.
pub fn hadamard_sum_reference(c: &[f64]) -> Vec<f64> {
    let dim = c.len();
    (0..dim)
        .map(|k| {
            c.iter()
                .enumerate()
                .map(|(j, cj)| cj * hadamard_entry(j, k) as f64)
                .sum()
        })
        .collect()
}
