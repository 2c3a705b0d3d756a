//! Computational ghost imaging with filters compiled into the illumination
//! basis.
//!
//! A linear filter applied to an image can be moved into the measurement:
//! projecting `B psi_j` instead of `psi_j` and reconstructing with the
//! original basis yields `B^T O` directly. This crate simulates both that
//! "basis-processed" pipeline and the conventional "post-processed" one on a
//! virtual optical bench with read noise, lamp drift and normalisation
//! noise, and measures the resulting image SNR.
//!
//! Module map:
//!
//! - [`grid`], [`kernel`], [`conv`], [`operator`]: images, stencils, cyclic
//!   convolution and the dense basis-change matrix.
//! - [`basis`], [`decompose`]: canonical, Hadamard and filter-modified
//!   bases, and their binary sub-pattern decomposition.
//! - [`virtual_bench`]: scene objects, the noise model and both
//!   acquisition protocols.
//! - [`reconstruction`]: coefficient-weighted pattern sums and the
//!   post-processing filter.
//! - [`analysis`]: masks, SNR, noise correlation and integration-time sweeps.
//! - [`io`]: graymaps, CSV grids, coefficient and sweep tables.
//!
//! Data-parallel loops go through [`par::Exec`]; the `parallel` feature
//! (on by default) runs them on rayon.

pub mod analysis;
pub mod basis;
pub mod conv;
pub mod decompose;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod operator;
pub mod par;
pub mod reconstruction;
pub mod virtual_bench;

pub use error::{Error, Result};
pub use grid::{GridSpec, Image};
pub use kernel::Kernel;
pub use par::Exec;
