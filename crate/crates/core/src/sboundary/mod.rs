//! Boundary operators S(f)(x) = pv ∫_∂D k(x − y) f(y) dS(y) for odd kernels
//! of degree 1 − n, and T(1_D) = Σ_j S_{A_j}(N_j) through the divergence
//! antiderivative of an even kernel.

pub mod panels;
pub mod pv;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use panels::{base_panels, surface_integral, BoundaryQuadrature, SurfacePoint};
pub use pv::{cutoff, PvValue};

use crate::error::{Error, Result};
use crate::geometry::{Atlas, Side, Vec3};
use crate::kernels::{HomogeneousKernel, Parity};

/// Boundary density f.
#[derive(Clone)]
pub enum Density {
    Constant(f64),
    /// Component j of the inward unit normal.
    NormalComponent(usize),
    Custom(Arc<dyn Fn(&SurfacePoint) -> f64 + Send + Sync>),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Constant(c) => write!(f, "Constant({c})"),
            Density::NormalComponent(j) => write!(f, "NormalComponent({j})"),
            Density::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Density {
    pub fn eval(&self, p: &SurfacePoint) -> f64 {
        match self {
            Density::Constant(c) => *c,
            Density::NormalComponent(j) => p.normal[*j],
            Density::Custom(f) => f(p),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Density::Constant(c) if *c == 0.0)
    }
}

/// Value of S(f)(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SValue {
    pub value: f64,
    pub error: f64,
    pub distance: f64,
    pub side: Option<Side>,
    /// On-boundary evaluations only.
    pub pv: Option<PvValue>,
}

/// Checks that `k` is odd and homogeneous of degree 1 − n.
pub fn require_boundary_kernel(k: &HomogeneousKernel, dim: usize) -> Result<()> {
    if k.dim() != dim {
        return Err(Error::Kernel(format!("{} acts in dimension {}, boundary lives in {dim}", k.name(), k.dim())));
    }
    if k.parity() != Parity::Odd {
        return Err(Error::Kernel(format!("{}: boundary operator needs an odd kernel", k.name())));
    }
    if k.singularity_order() != 1 - dim as i64 {
        return Err(Error::Kernel(format!("{}: boundary kernel must be homogeneous of degree {}", k.name(), 1 - dim as i64)));
    }
    Ok(())
}

fn scale_of(atlas: &Atlas) -> f64 {
    atlas.shape.map_or(1.0, |s| 2.0 * s.outer_radius())
}

/// Relative distance below which a point counts as lying on the boundary.
const ON_BOUNDARY: f64 = 1e-12;

fn terms_integrand<'a>(terms: &'a [(HomogeneousKernel, Density)]) -> impl Fn(&SurfacePoint, &Vec3, &mut [f64]) + 'a {
    move |sp, z, out| {
        let zz = [z.x, z.y, z.z];
        for (o, (k, d)) in out.iter_mut().zip(terms) {
            let dv = d.eval(sp);
            if dv != 0.0 {
                *o += k.eval_point(&zz) * dv;
            }
        }
    }
}

/// S(f)(x) for several (kernel, density) pairs at once.
pub fn s_eval_multi(
    terms: &[(HomogeneousKernel, Density)],
    atlas: &Atlas,
    x: &Vec3,
    quad: &BoundaryQuadrature,
) -> Result<Vec<SValue>> {
    quad.validate()?;
    for (k, _) in terms {
        require_boundary_kernel(k, atlas.dim)?;
    }
    let foot = atlas.foot_point(x)?;
    let side = atlas.side_of(x);
    let width = terms.len();
    if foot.distance <= ON_BOUNDARY * scale_of(atlas) {
        let eta = quad.pv_eta * scale_of(atlas);
        let pv = pv::pv_general(atlas, foot.chart, &foot.alpha, quad, eta, 7, width, terms_integrand(terms))?;
        return Ok(pv
            .into_iter()
            .zip(terms)
            .map(|(p, (_, d))| {
                let zero = d.is_zero();
                SValue {
                    value: if zero { 0.0 } else { p.value },
                    error: p.error,
                    distance: 0.0,
                    side: Some(Side::Boundary),
                    pv: Some(p),
                }
            })
            .collect());
    }
    let vals = surface_integral(atlas, x, quad, width, 0.0, terms_integrand(terms));
    Ok(vals
        .into_iter()
        .map(|v| SValue { value: v, error: quad.rel_tol * v.abs() + quad.abs_tol, distance: foot.distance, side, pv: None })
        .collect())
}

/// S(f)(x) for one kernel and density.
pub fn s_eval(k: &HomogeneousKernel, atlas: &Atlas, f: &Density, x: &Vec3, quad: &BoundaryQuadrature) -> Result<SValue> {
    Ok(s_eval_multi(&[(k.clone(), f.clone())], atlas, x, quad)?.remove(0))
}

/// Principal value at the boundary point Z_c(α) with an explicit cutoff
/// radius η and `eps_count` exclusion radii ε_k = η/4·2^{−k}.
pub fn pv_on_boundary(
    k: &HomogeneousKernel,
    atlas: &Atlas,
    f: &Density,
    chart: usize,
    alpha: &[f64; 2],
    eta: f64,
    eps_count: usize,
    quad: &BoundaryQuadrature,
) -> Result<PvValue> {
    require_boundary_kernel(k, atlas.dim)?;
    if !(eta > 0.0) {
        return Err(Error::Parameter("cutoff radius must be positive".into()));
    }
    let terms = [(k.clone(), f.clone())];
    Ok(pv::pv_general(atlas, chart, alpha, quad, eta, eps_count, 1, terms_integrand(&terms))?.remove(0))
}

/// Components A_j of the divergence antiderivative of an even CZ kernel.
pub fn antiderivative(k: &HomogeneousKernel) -> Result<Vec<HomogeneousKernel>> {
    k.require_calderon_zygmund()?;
    if k.parity() != Parity::Even {
        return Err(Error::Kernel(format!("{}: the boundary reduction needs an even kernel", k.name())));
    }
    k.divergence_antiderivative_decomposed()
}

/// The individual terms S_{A_j}(N_j)(x), j = 1..n, for one even kernel.
pub fn s_normal_terms(k: &HomogeneousKernel, atlas: &Atlas, x: &Vec3, quad: &BoundaryQuadrature) -> Result<Vec<SValue>> {
    let a = antiderivative(k)?;
    let terms: Vec<(HomogeneousKernel, Density)> =
        a.into_iter().enumerate().map(|(j, aj)| (aj, Density::NormalComponent(j))).collect();
    s_eval_multi(&terms, atlas, x, quad)
}

/// T(1_D)(x) = Σ_j S_{A_j}(N_j)(x) with N the inward unit normal, for points
/// off the boundary; one value per kernel.
pub fn t_from_boundary(kernels: &[HomogeneousKernel], atlas: &Atlas, x: &Vec3, quad: &BoundaryQuadrature) -> Result<Vec<f64>> {
    quad.validate()?;
    if atlas.shape.is_none() {
        return Err(Error::Parameter("the boundary reduction needs a closed atlas".into()));
    }
    let n = atlas.dim;
    let mut parts = Vec::with_capacity(kernels.len());
    for k in kernels {
        if k.dim() != n {
            return Err(Error::Kernel(format!("{} acts in dimension {}, domain has {n}", k.name(), k.dim())));
        }
        parts.push(antiderivative(k)?);
    }
    let foot = atlas.foot_point(x)?;
    if foot.distance <= ON_BOUNDARY * scale_of(atlas) {
        return Err(Error::Parameter("T(1_D) jumps across the boundary; evaluate off the boundary".into()));
    }
    let vals = surface_integral(atlas, x, quad, kernels.len(), 0.0, |sp, z, out| {
        let zz = [z.x, z.y, z.z];
        for (o, a) in out.iter_mut().zip(&parts) {
            *o += a.iter().enumerate().map(|(j, aj)| aj.eval_point(&zz) * sp.normal[j]).sum::<f64>();
        }
    });
    Ok(vals)
}
