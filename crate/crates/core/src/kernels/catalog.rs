//! Named kernels shipped with the library.
//!
//! | name | n | kernel |
//! |------|---|--------|
//! | `riesz2_jk` | 3 | (3/4π)(x_j x_k − δ_jk|x|²/3)/|x|⁵, the pv part of ∂_j∂_k(−Δ)⁻¹ |
//! | `riesz4_123` | 3 | x2 x3 (x2² + x3² − 4x1²)/|x|⁷ = ∂_1(x1x2x3/|x|⁵) |
//! | `riesz4_1123` | 3 | (15/8π)(x1²x2x3 − |x|²x2x3/7)/|x|⁷, multiplier h(ξ)/|ξ|⁴ |
//! | `odd_x1` | 3 | x1/|x|⁴ |
//! | `beurling_re` | 2 | (1/2π)(x1² − x2²)/|x|⁴ |
//! | `beurling_im` | 2 | (1/2π)·2x1x2/|x|⁴ |
//! | `odd2_x1` | 2 | x1/|x|³ |

use std::f64::consts::PI;

use super::kernel::HomogeneousKernel;
use super::polynomial::HomogeneousPolynomial;
use crate::error::{Error, Result};

const NAMES: [&str; 12] = [
    "riesz2_11",
    "riesz2_22",
    "riesz2_33",
    "riesz2_12",
    "riesz2_13",
    "riesz2_23",
    "riesz4_123",
    "riesz4_1123",
    "odd_x1",
    "beurling_re",
    "beurling_im",
    "odd2_x1",
];

pub fn catalog_names() -> &'static [&'static str] {
    &NAMES
}

fn build(name: &str, poly: &str, n: usize, power: u32, scale: f64) -> Result<HomogeneousKernel> {
    HomogeneousKernel::new(name, HomogeneousPolynomial::parse(poly, n)?, power, scale)
}

pub fn catalog_kernel(name: &str) -> Result<HomogeneousKernel> {
    let riesz2 = 3.0 / (4.0 * PI);
    match name {
        "riesz2_11" => build(name, "2/3*x1^2 - 1/3*x2^2 - 1/3*x3^2", 3, 5, riesz2),
        "riesz2_22" => build(name, "2/3*x2^2 - 1/3*x1^2 - 1/3*x3^2", 3, 5, riesz2),
        "riesz2_33" => build(name, "2/3*x3^2 - 1/3*x1^2 - 1/3*x2^2", 3, 5, riesz2),
        "riesz2_12" => build(name, "x1*x2", 3, 5, riesz2),
        "riesz2_13" => build(name, "x1*x3", 3, 5, riesz2),
        "riesz2_23" => build(name, "x2*x3", 3, 5, riesz2),
        "riesz4_123" => build(name, "x2*x3*(x2^2 + x3^2 - 4*x1^2)", 3, 7, 1.0),
        "riesz4_1123" => build(name, "x1^2*x2*x3 - 1/7*(x1^2 + x2^2 + x3^2)*x2*x3", 3, 7, 15.0 / (8.0 * PI)),
        "odd_x1" => build(name, "x1", 3, 4, 1.0),
        "beurling_re" => build(name, "x1^2 - x2^2", 2, 4, 1.0 / (2.0 * PI)),
        "beurling_im" => build(name, "2*x1*x2", 2, 4, 1.0 / (2.0 * PI)),
        "odd2_x1" => build(name, "x1", 2, 3, 1.0),
        _ => Err(Error::Kernel(format!("unknown catalog kernel `{name}`; known: {}", NAMES.join(", ")))),
    }
}

/// Resolves a catalog name or a `poly: …; power: …; n: …` specification.
pub fn resolve_kernel(spec: &str) -> Result<HomogeneousKernel> {
    if spec.contains("poly:") {
        HomogeneousKernel::parse_spec(spec)
    } else {
        catalog_kernel(spec.trim())
    }
}
