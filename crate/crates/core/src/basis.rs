//! Illumination bases: canonical (raster), Sylvester Hadamard, and bases
//! with a filter kernel compiled into every pattern.
//!
//! A [`PatternBasis`] is a recipe rather than a stored list of `N^2` images;
//! pattern `j` is materialised on demand. A 64x64 modified basis would
//! otherwise occupy 128 MiB per copy.

use std::fmt;

use crate::conv::cyclic_convolve;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Image};
use crate::kernel::Kernel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisLabel {
    Canonical,
    Hadamard,
    Modified { parent: Box<BasisLabel>, kernel_id: String },
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Canonical => f.write_str("canonical"),
            BasisLabel::Hadamard => f.write_str("hadamard"),
            BasisLabel::Modified { parent, kernel_id } => {
                write!(f, "modified({parent},{kernel_id})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Canonical,
    Hadamard,
    Modified { parent: Box<PatternBasis>, kernel: Kernel },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternBasis {
    grid: GridSpec,
    source: Source,
}

impl PatternBasis {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Number of patterns, always `N^2`.
    pub fn len(&self) -> usize {
        self.grid.pixel_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self) -> BasisLabel {
        match &self.source {
            Source::Canonical => BasisLabel::Canonical,
            Source::Hadamard => BasisLabel::Hadamard,
            Source::Modified { parent, kernel } => BasisLabel::Modified {
                parent: Box::new(parent.label()),
                kernel_id: kernel.id().to_string(),
            },
        }
    }

    /// The unmodified basis at the root of any modification chain.
    pub fn root(&self) -> &PatternBasis {
        match &self.source {
            Source::Modified { parent, .. } => parent.root(),
            _ => self,
        }
    }

    pub fn parent(&self) -> Option<&PatternBasis> {
        match &self.source {
            Source::Modified { parent, .. } => Some(parent),
            _ => None,
        }
    }

    pub fn is_canonical(&self) -> bool {
        matches!(self.source, Source::Canonical)
    }

    pub fn is_hadamard(&self) -> bool {
        matches!(self.source, Source::Hadamard)
    }

    /// Materialises pattern `j`.
    pub fn pattern(&self, j: usize) -> Result<Image> {
        if j >= self.len() {
            return Err(Error::Dimension(format!(
                "pattern index {j} out of range for {} patterns",
                self.len()
            )));
        }
        Ok(match &self.source {
            Source::Canonical => Image::one_hot(self.grid, j),
            Source::Hadamard => {
                let dim = self.len();
                let values = (0..dim).map(|k| hadamard_entry(j, k) as f64).collect();
                Image::from_vec(self.grid, values)?
            }
            Source::Modified { parent, kernel } => cyclic_convolve(&parent.pattern(j)?, kernel)?,
        })
    }

    pub fn patterns(&self) -> impl Iterator<Item = Image> + '_ {
        (0..self.len()).map(move |j| self.pattern(j).expect("index in range"))
    }
}

/// Entry `(row, col)` of the Sylvester-ordered Hadamard matrix.
#[inline]
pub fn hadamard_entry(row: usize, col: usize) -> i8 {
    if (row & col).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn canonical_basis(grid: GridSpec) -> PatternBasis {
    PatternBasis {
        grid,
        source: Source::Canonical,
    }
}

/// Sylvester Hadamard basis; pattern `j` is row `j` of `H_{N^2}` reshaped
/// row-major. Requires `N` to be a power of two.
pub fn hadamard_basis(grid: GridSpec) -> Result<PatternBasis> {
    if !grid.side().is_power_of_two() {
        return Err(Error::UnsupportedSize {
            side: grid.side(),
            reason: "Hadamard bases need a power-of-two side",
        });
    }
    Ok(PatternBasis {
        grid,
        source: Source::Hadamard,
    })
}

/// Compiles `kernel` into every pattern: output pattern `j` is
/// `cyclic_convolve(pattern_j, kernel)`, i.e. `B psi_j`.
pub fn modify_basis(basis: &PatternBasis, kernel: &Kernel) -> Result<PatternBasis> {
    kernel.ensure_fits(basis.grid)?;
    Ok(PatternBasis {
        grid: basis.grid,
        source: Source::Modified {
            parent: Box::new(basis.clone()),
            kernel: kernel.clone(),
        },
    })
}
