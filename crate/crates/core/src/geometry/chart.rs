use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Matrix3x2, Vector3};

use super::shape::RadialShape;
use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Jacobian = Matrix3x2<f64>;

/// Closed parameter rectangle; for curves (`dim == 1`) only the first
/// coordinate is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub dim: usize,
}

impl ParamRect {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self { lo: [lo, lo], hi: [hi, hi], dim: 2 }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self { lo: [lo, 0.0], hi: [hi, 0.0], dim: 1 }
    }

    pub fn contains(&self, alpha: &[f64; 2]) -> bool {
        self.contains_with(alpha, 1e-12)
    }

    pub fn contains_with(&self, alpha: &[f64; 2], slack: f64) -> bool {
        (0..self.dim).all(|i| alpha[i] >= self.lo[i] - slack && alpha[i] <= self.hi[i] + slack)
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    /// Maps a point of the unit cube to the rectangle.
    pub fn from_unit(&self, u: &[f64]) -> [f64; 2] {
        let mut a = [0.0; 2];
        for i in 0..self.dim {
            a[i] = self.lo[i] + u[i] * self.width(i);
        }
        a
    }

    /// Euclidean distance from `alpha` to the complement of the rectangle
    /// (0 when outside).
    pub fn inner_distance(&self, alpha: &[f64; 2]) -> f64 {
        (0..self.dim).map(|i| (alpha[i] - self.lo[i]).min(self.hi[i] - alpha[i])).fold(f64::INFINITY, f64::min).max(0.0)
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|i| self.width(i)).product()
    }
}

/// Parametrisation of the unit sphere (or circle) used by radial charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereParam {
    /// Equiangular cube face `face ∈ 0..6`; α ∈ [−π/4, π/4]² on the core.
    CubeFace(usize),
    /// α = (azimuth φ, polar θ); the order makes N point inward.
    Spherical,
    /// α = angle t on the unit circle, counter-clockwise.
    Arc,
}

/// Rotations taking the +z face to each cube face (all with determinant +1).
fn face_rotation(face: usize) -> Matrix3<f64> {
    match face {
        0 => Matrix3::identity(),
        1 => Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0),
        2 => Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0),
        3 => Matrix3::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0),
        4 => Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0),
        5 => Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0),
        _ => panic!("cube face index {face} out of range"),
    }
}

impl SphereParam {
    /// Unit direction ω(α) and its two parameter derivatives.
    pub fn eval(&self, alpha: &[f64; 2]) -> (Vec3, [Vec3; 2]) {
        match *self {
            SphereParam::CubeFace(face) => {
                let r = face_rotation(face);
                let (t1, t2) = (alpha[0].tan(), alpha[1].tan());
                let p = r * Vec3::new(t2, t1, 1.0);
                let norm = p.norm();
                let w = p / norm;
                let dp1 = r.column(1) * (1.0 + t1 * t1);
                let dp2 = r.column(0) * (1.0 + t2 * t2);
                let proj = |v: Vec3| (v - w * w.dot(&v)) / norm;
                (w, [proj(dp1.into()), proj(dp2.into())])
            }
            SphereParam::Spherical => {
                let (phi, theta) = (alpha[0], alpha[1]);
                let (sp, cp) = phi.sin_cos();
                let (st, ct) = theta.sin_cos();
                (Vec3::new(st * cp, st * sp, ct), [Vec3::new(-st * sp, st * cp, 0.0), Vec3::new(ct * cp, ct * sp, -st)])
            }
            SphereParam::Arc => {
                let (s, c) = alpha[0].sin_cos();
                (Vec3::new(c, s, 0.0), [Vec3::new(-s, c, 0.0), Vec3::zeros()])
            }
        }
    }

    /// Parameters of a unit direction, when it lies in this chart's range.
    pub fn invert(&self, w: &Vec3) -> Option<[f64; 2]> {
        match *self {
            SphereParam::CubeFace(face) => {
                let q = face_rotation(face).transpose() * w;
                if q.z <= 0.0 {
                    return None;
                }
                Some([(q.y / q.z).atan(), (q.x / q.z).atan()])
            }
            SphereParam::Spherical => Some([w.y.atan2(w.x), w.z.clamp(-1.0, 1.0).acos()]),
            SphereParam::Arc => Some([w.y.atan2(w.x), 0.0]),
        }
    }
}

type PointFn = dyn Fn(&[f64; 2]) -> Vec3 + Send + Sync;

/// The map α ↦ Z(α) of a chart.
#[derive(Clone)]
pub enum ChartMap {
    /// Z(α) = M α + b.
    Affine { matrix: Jacobian, offset: Vec3 },
    /// Z(α) = S(ω(α)) for a radial shape S.
    Radial { shape: RadialShape, param: SphereParam },
    /// User supplied map; derivatives by 4th-order central differences.
    Custom { f: Arc<PointFn>, step: f64 },
}

impl fmt::Debug for ChartMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartMap::Affine { matrix, offset } => write!(f, "Affine({matrix:?}, {offset:?})"),
            ChartMap::Radial { shape, param } => write!(f, "Radial({shape:?}, {param:?})"),
            ChartMap::Custom { step, .. } => write!(f, "Custom(step = {step})"),
        }
    }
}

/// One chart of an atlas: a parametrisation over `domain`, whose `core`
/// sub-rectangles partition the boundary across the atlas.
#[derive(Debug, Clone)]
pub struct Chart {
    pub id: usize,
    pub map: ChartMap,
    pub domain: ParamRect,
    pub core: ParamRect,
}

impl Chart {
    pub fn new(id: usize, map: ChartMap, domain: ParamRect, core: ParamRect) -> Self {
        Self { id, map, domain, core }
    }

    /// Chart on its own domain with the whole domain as core.
    pub fn single(map: ChartMap, domain: ParamRect) -> Self {
        Self { id: 0, map, domain, core: domain }
    }

    pub fn flat_graph() -> Self {
        let matrix = Jacobian::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        Self::single(ChartMap::Affine { matrix, offset: Vec3::zeros() }, ParamRect::square(-1.0, 1.0))
    }

    pub fn affine(matrix: Jacobian, offset: Vec3, domain: ParamRect) -> Self {
        Self::single(ChartMap::Affine { matrix, offset }, domain)
    }

    pub fn custom(f: impl Fn(&[f64; 2]) -> Vec3 + Send + Sync + 'static, domain: ParamRect) -> Self {
        let scale = (0..domain.dim).map(|i| domain.width(i)).fold(0.0, f64::max);
        Self::single(ChartMap::Custom { f: Arc::new(f), step: 1e-5 * scale.max(1e-300) }, domain)
    }

    /// The standard spherical chart α = (φ, θ) on a sphere of radius `radius`,
    /// restricted to polar angles in [θ_min, π − θ_min].
    pub fn spherical(radius: f64, theta_min: f64) -> Self {
        let domain = ParamRect {
            lo: [-std::f64::consts::PI + 0.1, theta_min],
            hi: [std::f64::consts::PI - 0.1, std::f64::consts::PI - theta_min],
            dim: 2,
        };
        Self::single(ChartMap::Radial { shape: RadialShape::sphere(radius), param: SphereParam::Spherical }, domain)
    }

    /// Parameter dimension (1 for curves, 2 for surfaces).
    pub fn param_dim(&self) -> usize {
        self.domain.dim
    }

    /// Ambient dimension n.
    pub fn ambient_dim(&self) -> usize {
        self.param_dim() + 1
    }

    fn check(&self, alpha: &[f64; 2]) -> Result<()> {
        if self.domain.contains(alpha) {
            Ok(())
        } else {
            Err(Error::OutsideChart { chart: self.id, alpha: *alpha })
        }
    }

    pub fn z(&self, alpha: &[f64; 2]) -> Result<Vec3> {
        self.check(alpha)?;
        Ok(self.z_unchecked(alpha))
    }

    pub fn dz(&self, alpha: &[f64; 2]) -> Result<Jacobian> {
        self.check(alpha)?;
        Ok(self.eval_unchecked(alpha).1)
    }

    pub fn z_unchecked(&self, alpha: &[f64; 2]) -> Vec3 {
        match &self.map {
            ChartMap::Affine { matrix, offset } => matrix * nalgebra::Vector2::new(alpha[0], alpha[1]) + offset,
            ChartMap::Radial { shape, param } => shape.point(&param.eval(alpha).0),
            ChartMap::Custom { f, .. } => f(alpha),
        }
    }

    /// Z(α) and ∂_αZ(α) without the domain check; usable slightly outside the
    /// domain (Gauss–Newton iterates, finite differences).
    pub fn eval_unchecked(&self, alpha: &[f64; 2]) -> (Vec3, Jacobian) {
        match &self.map {
            ChartMap::Affine { matrix, offset } => (matrix * nalgebra::Vector2::new(alpha[0], alpha[1]) + offset, *matrix),
            ChartMap::Radial { shape, param } => {
                let (w, dw) = param.eval(alpha);
                let (p, d1) = shape.point_and_derivative(&w, &dw[0]);
                let d2 = if self.domain.dim == 2 { shape.point_and_derivative(&w, &dw[1]).1 } else { Vec3::zeros() };
                (p, Jacobian::from_columns(&[d1, d2]))
            }
            ChartMap::Custom { f, step } => {
                let p = f(alpha);
                let mut jac = Jacobian::zeros();
                for i in 0..self.domain.dim {
                    let shifted = |s: f64| {
                        let mut a = *alpha;
                        a[i] += s;
                        f(&a)
                    };
                    let h = *step;
                    let d = (shifted(-2.0 * h) - shifted(2.0 * h) + (shifted(h) - shifted(-h)) * 8.0) / (12.0 * h);
                    jac.set_column(i, &d);
                }
                (p, jac)
            }
        }
    }

    /// N = ∂_{α1}Z ∧ ∂_{α2}Z; for curves the tangent rotated by +π/2.
    pub fn normal(&self, alpha: &[f64; 2]) -> Result<Vec3> {
        let jac = self.dz(alpha)?;
        Ok(normal_from_jacobian(&jac, self.param_dim()))
    }

    /// Ñ = N/√|N|.
    pub fn normal_tilde(&self, alpha: &[f64; 2]) -> Result<Vec3> {
        let n = self.normal(alpha)?;
        let len = n.norm();
        if len == 0.0 || !len.is_finite() {
            return Err(Error::Geometry { chart: self.id, reason: format!("N vanishes at {alpha:?}") });
        }
        Ok(n / len.sqrt())
    }
}

pub fn normal_from_jacobian(jac: &Jacobian, param_dim: usize) -> Vec3 {
    let d1: Vec3 = jac.column(0).into();
    if param_dim == 1 {
        Vec3::new(-d1.y, d1.x, 0.0)
    } else {
        let d2: Vec3 = jac.column(1).into();
        d1.cross(&d2)
    }
}

/// Ñ from a Jacobian; zero normal yields a zero vector.
pub fn normal_tilde_from_jacobian(jac: &Jacobian, param_dim: usize) -> Vec3 {
    let n = normal_from_jacobian(jac, param_dim);
    let len = n.norm();
    if len == 0.0 {
        n
    } else {
        n / len.sqrt()
    }
}

/// Extended domain and core of the equiangular cube-face charts.
pub fn cube_face_rects(overlap: f64) -> (ParamRect, ParamRect) {
    (ParamRect::square(-FRAC_PI_4 - overlap, FRAC_PI_4 + overlap), ParamRect::square(-FRAC_PI_4, FRAC_PI_4))
}
