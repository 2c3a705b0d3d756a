use crate::analysis::Rect;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Image};

/// Transmissive object with values clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    transmission: Image,
}

impl SceneObject {
    pub fn new(image: Image) -> Self {
        Self {
            transmission: image.map(|v| v.clamp(0.0, 1.0)),
        }
    }

    pub fn transmission(&self) -> &Image {
        &self.transmission
    }

    pub fn grid(&self) -> GridSpec {
        self.transmission.grid()
    }
}

fn margin(grid: GridSpec) -> usize {
    (grid.side() / 16).max(2)
}

/// Binary resolution target: a clear field with `bar_groups` groups of three
/// opaque vertical bars, bar width shrinking group by group. The bars sit in
/// the upper half; the lower half is left clear for background statistics,
/// and a clear margin keeps the cyclic wrap seamless.
pub fn synth_bar_target(grid: GridSpec, bar_groups: usize) -> Result<SceneObject> {
    let n = grid.side();
    if n < 16 {
        return Err(Error::UnsupportedSize {
            side: n,
            reason: "bar target needs a grid of at least 16",
        });
    }
    if bar_groups == 0 {
        return Err(Error::Config("bar_groups must be at least 1".into()));
    }
    let m = margin(grid);
    let usable = n - 2 * m;
    // widths are unit * (groups - g); each group spans five widths, groups
    // are separated by two units
    let span_units: usize = (1..=bar_groups).map(|w| 5 * w).sum::<usize>() + 2 * (bar_groups - 1);
    let unit = usable / span_units;
    if unit == 0 {
        return Err(Error::UnsupportedSize {
            side: n,
            reason: "grid too small for the requested bar groups",
        });
    }

    let mut image = Image::filled(grid, 1.0);
    let (top, bottom) = (m, n / 2);
    let mut col = m + (usable - span_units * unit) / 2;
    for g in 0..bar_groups {
        let width = unit * (bar_groups - g);
        for bar in 0..3 {
            let left = col + 2 * bar * width;
            for r in top..bottom {
                for c in left..left + width {
                    image[(r, c)] = 0.0;
                }
            }
        }
        col += 5 * width + 2 * unit;
    }
    Ok(SceneObject::new(image))
}

/// Clear rectangle below the bars of [`synth_bar_target`], at least two
/// pixels from any bar edge.
pub fn default_background_rect(grid: GridSpec) -> Rect {
    let n = grid.side();
    let m = margin(grid);
    Rect {
        top: n / 2 + m,
        left: m,
        bottom: n - m,
        right: n - m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::cyclic_correlate;
    use crate::kernel::Kernel;

    fn g(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    #[test]
    fn bar_target_is_binary_and_nondegenerate() {
        let t = synth_bar_target(g(64), 3).unwrap();
        let v = t.transmission().values();
        assert!(v.iter().all(|&x| x == 0.0 || x == 1.0));
        let bars = v.iter().filter(|&&x| x == 0.0).count();
        assert!(bars > 0 && bars < 64 * 64);
    }

    #[test]
    fn bar_target_deterministic() {
        assert_eq!(synth_bar_target(g(64), 3).unwrap(), synth_bar_target(g(64), 3).unwrap());
    }

    #[test]
    fn three_bars_per_group() {
        let t = synth_bar_target(g(64), 3).unwrap();
        let row = 20;
        let mut runs = 0;
        let mut prev = 1.0;
        for c in 0..64 {
            let v = t.transmission()[(row, c)];
            if v == 0.0 && prev == 1.0 {
                runs += 1;
            }
            prev = v;
        }
        assert_eq!(runs, 9);
    }

    #[test]
    fn too_small_grid() {
        assert!(synth_bar_target(g(15), 1).is_err());
        assert!(synth_bar_target(g(16), 3).is_err());
        assert!(synth_bar_target(g(16), 1).is_ok());
        assert!(synth_bar_target(g(32), 0).is_err());
    }

    #[test]
    fn background_rect_is_flat_after_filtering() {
        for n in [32, 64, 128] {
            let grid = g(n);
            let t = synth_bar_target(grid, if n < 64 { 2 } else { 3 }).unwrap();
            let filtered = cyclic_correlate(t.transmission(), &Kernel::edge()).unwrap();
            let rect = default_background_rect(grid);
            for r in rect.top..rect.bottom {
                for c in rect.left..rect.right {
                    assert_eq!(filtered[(r, c)], 0.0);
                    assert_eq!(t.transmission()[(r, c)], 1.0);
                }
            }
        }
    }

    #[test]
    fn scene_object_clamps() {
        let img = Image::from_rows(&[[-0.5, 0.5], [1.5, 1.0]]).unwrap();
        assert_eq!(SceneObject::new(img).transmission().values(), &[0.0, 0.5, 1.0, 1.0]);
    }
}
