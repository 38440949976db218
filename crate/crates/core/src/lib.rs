//! Numerical toolkit for even and odd Calderón–Zygmund operators applied to
//! characteristic functions of C^{1+σ} domains.

pub mod error;
pub mod geometry;
pub mod holder;
pub mod kernels;
pub mod normalcoords;
pub mod quadrature;
pub mod sboundary;
pub mod svolume;

pub use error::{Error, Result};
