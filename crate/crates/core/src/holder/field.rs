//! Scalar fields whose Hölder regularity is sampled.

use crate::error::{Error, Result};
use crate::geometry::{Atlas, Vec3};
use crate::kernels::{HomogeneousKernel, Parity};
use crate::sboundary::{require_boundary_kernel, s_eval, t_from_boundary, BoundaryQuadrature, Density};
use crate::svolume::{t_boundary_traces, t_volume_pv, PvSchedule, VolumeQuadrature};

/// One-sided values at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValues {
    pub interior: f64,
    pub exterior: f64,
}

/// A deterministic scalar field on ℝⁿ with one-sided boundary values.
pub trait Evaluator: Sync {
    /// Value at a point off the boundary.
    fn value(&self, x: &Vec3) -> Result<f64>;

    /// Values attached to the boundary point `y` with inward unit normal
    /// `normal`, one per side.
    fn boundary(&self, y: &Vec3, normal: &Vec3) -> Result<BoundaryValues> {
        let _ = normal;
        let v = self.value(y)?;
        Ok(BoundaryValues { interior: v, exterior: v })
    }
}

/// Wraps a closure as an evaluator that is continuous across the boundary.
pub struct PlainField<F>(pub F);

impl<F: Fn(&Vec3) -> f64 + Sync> Evaluator for PlainField<F> {
    fn value(&self, x: &Vec3) -> Result<f64> {
        Ok((self.0)(x))
    }
}

/// The operators studied here.
#[derive(Debug, Clone)]
pub enum Field {
    /// T(1_D) for a CZ kernel.
    Patch(HomogeneousKernel),
    /// S(f) for an odd kernel of degree 1 − n.
    Boundary(HomogeneousKernel, Density),
}

/// A field bound to a domain and quadrature settings.
///
/// Even T(1_D) is evaluated through the boundary reduction off ∂D and through
/// the volume traces on ∂D; odd T(1_D) through the volume route; S(f) through
/// the boundary panels, with the principal value on ∂D for both sides.
#[derive(Debug, Clone)]
pub struct FieldEvaluator<'a> {
    pub field: Field,
    pub atlas: &'a Atlas,
    pub boundary: BoundaryQuadrature,
    pub volume: VolumeQuadrature,
    pub schedule: PvSchedule,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(field: Field, atlas: &'a Atlas) -> Result<Self> {
        match &field {
            Field::Patch(k) => {
                k.require_calderon_zygmund()?;
                if k.dim() != atlas.dim {
                    return Err(Error::Kernel(format!("{} acts in dimension {}, domain has {}", k.name(), k.dim(), atlas.dim)));
                }
            }
            Field::Boundary(k, _) => require_boundary_kernel(k, atlas.dim)?,
        }
        Ok(Self {
            field,
            atlas,
            boundary: BoundaryQuadrature::default(),
            volume: VolumeQuadrature { rel_tol: 1e-6, ..VolumeQuadrature::default() },
            schedule: PvSchedule::default(),
        })
    }

    /// Finer boundary panels and tighter volume tolerances.
    pub fn refined(&self) -> Self {
        Self { boundary: self.boundary.refined(), volume: self.volume.refined(3.0), ..self.clone() }
    }
}

impl Evaluator for FieldEvaluator<'_> {
    fn value(&self, x: &Vec3) -> Result<f64> {
        match &self.field {
            Field::Patch(k) if k.parity() == Parity::Even => {
                Ok(t_from_boundary(std::slice::from_ref(k), self.atlas, x, &self.boundary)?[0])
            }
            Field::Patch(k) => Ok(t_volume_pv(k, self.atlas, x, &self.schedule, &self.volume)?.value),
            Field::Boundary(k, f) => Ok(s_eval(k, self.atlas, f, x, &self.boundary)?.value),
        }
    }

    fn boundary(&self, y: &Vec3, normal: &Vec3) -> Result<BoundaryValues> {
        match &self.field {
            Field::Patch(k) => {
                let t = t_boundary_traces(std::slice::from_ref(k), self.atlas, y, normal, &self.volume)?;
                Ok(BoundaryValues { interior: t[0].interior, exterior: t[0].exterior })
            }
            Field::Boundary(k, f) => {
                let v = s_eval(k, self.atlas, f, y, &self.boundary)?.value;
                Ok(BoundaryValues { interior: v, exterior: v })
            }
        }
    }
}
