//! Homogeneous Calderón–Zygmund kernels: evaluation, parity, the mean-zero
//! check, harmonic decomposition of numerators, Fourier multiplier constants
//! and the divergence-form antiderivative used by the boundary reduction.

pub mod catalog;
mod kernel;
mod multiplier;
pub mod polynomial;
mod radial;

pub use catalog::{catalog_kernel, catalog_names, resolve_kernel};
pub use kernel::{sphere_area, sphere_integral, HomogeneousKernel, MultiplierPlan, Parity, MEAN_ZERO_TOL};
pub use multiplier::{cz_multiplier_constant, multiplier_constant};
pub use polynomial::{rat, HomogeneousPolynomial, Rational};
pub use radial::{radial_profile_g, radial_profile_g_dr};
