//! Cyclic (wrap-around) convolution and correlation on square grids.

use crate::error::Result;
use crate::grid::Image;
use crate::kernel::Kernel;

/// `out(p) = sum_q K(q) * image((p - q) mod N)`.
pub fn cyclic_convolve(image: &Image, kernel: &Kernel) -> Result<Image> {
    apply_stencil(image, kernel, -1)
}

/// `out(p) = sum_q K(q) * image((p + q) mod N)`; equal to convolution with
/// the 180-degree rotated kernel, and to applying the transpose of the
/// convolution operator.
pub fn cyclic_correlate(image: &Image, kernel: &Kernel) -> Result<Image> {
    apply_stencil(image, kernel, 1)
}

fn apply_stencil(image: &Image, kernel: &Kernel, sign: isize) -> Result<Image> {
    let grid = image.grid();
    kernel.ensure_fits(grid)?;
    let n = grid.side();
    let src = image.values();
    let taps: Vec<_> = kernel.offsets().collect();
    let mut out = Image::zeros(grid);
    let dst = out.values_mut();
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for &(dr, dc, t) in &taps {
                acc += t * src[grid.wrapped(r, c, sign * dr, sign * dc)];
            }
            dst[grid.index(r, c)] = acc;
        }
    }
    Ok(out)
}
