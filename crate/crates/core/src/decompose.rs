//! Splitting multi-level patterns into weighted binary sub-patterns that a
//! binary amplitude modulator can display.

use crate::basis::PatternBasis;
use crate::error::Result;
use crate::grid::Image;
use crate::par::Exec;

/// One binary part: a `{0,1}` image and the weight it contributes with.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPattern {
    pub mask: Image,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubPatternSet {
    pub parent_index: usize,
    pub parts: Vec<SubPattern>,
}

impl SubPatternSet {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `sum_i weight_i * part_i`.
    pub fn recombine(&self) -> Image {
        let grid = self.parts[0].mask.grid();
        let mut out = Image::zeros(grid);
        for part in &self.parts {
            out.add_scaled(&part.mask, part.weight)
                .expect("parts share a grid");
        }
        out
    }
}

pub fn is_binary(image: &Image) -> bool {
    image.values().iter().all(|&v| v == 0.0 || v == 1.0)
}

/// One binary part per distinct nonzero level, weighted by that level.
/// Positive levels come first (ascending), then negative levels by
/// increasing magnitude. An all-zero pattern yields one all-zero part with
/// weight zero.
pub fn binary_decompose(parent_index: usize, pattern: &Image) -> SubPatternSet {
    let mut levels: Vec<f64> = pattern
        .values()
        .iter()
        .copied()
        .filter(|&v| v != 0.0)
        .collect();
    // positives ascending, then negatives ordered -1, -2, ...
    levels.sort_by(|a, b| (*a < 0.0).cmp(&(*b < 0.0)).then(a.abs().total_cmp(&b.abs())));
    levels.dedup();

    if levels.is_empty() {
        return SubPatternSet {
            parent_index,
            parts: vec![SubPattern {
                mask: Image::zeros(pattern.grid()),
                weight: 0.0,
            }],
        };
    }

    let parts = levels
        .into_iter()
        .map(|level| SubPattern {
            mask: pattern.map(|v| if v == level { 1.0 } else { 0.0 }),
            weight: level,
        })
        .collect();
    SubPatternSet {
        parent_index,
        parts,
    }
}

/// Number of binary projections needed for the whole basis. Single-part
/// patterns are shown `repeats_per_pattern` times; multi-part patterns are
/// shown once per part.
pub fn projection_count(basis: &PatternBasis, repeats_per_pattern: usize) -> Result<usize> {
    projection_count_with(Exec::default(), basis, repeats_per_pattern)
}

pub fn projection_count_with(
    exec: Exec,
    basis: &PatternBasis,
    repeats_per_pattern: usize,
) -> Result<usize> {
    let counts = exec.try_map_range(basis.len(), |j| {
        let parts = binary_decompose(j, &basis.pattern(j)?).len();
        Ok::<_, crate::Error>(if parts == 1 { repeats_per_pattern } else { parts })
    })?;
    Ok(counts.into_iter().sum())
}
