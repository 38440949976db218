use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::chart::{cube_face_rects, normal_from_jacobian, Chart, ChartMap, ParamRect, SphereParam, Vec3};
use super::shape::{DomainFamily, RadialShape};
use crate::error::{Error, Result};
use crate::quadrature::{halton, GaussLegendre};

/// Default parameter overlap between neighbouring charts (radians).
pub const DEFAULT_OVERLAP: f64 = 0.1;

/// Position of a point relative to the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Interior,
    Exterior,
    Boundary,
}

/// Nearest boundary point of an ambient point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootPoint {
    pub chart: usize,
    pub alpha: [f64; 2],
    pub point: Vec3,
    /// Unsigned distance from the query point to `point`.
    pub distance: f64,
    /// Inward unit normal at `point`.
    pub normal: Vec3,
    pub side: Side,
}

/// Collection of charts covering the boundary; N points into the domain on
/// every chart and the chart cores partition the boundary.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub dim: usize,
    pub charts: Vec<Chart>,
    pub shape: Option<RadialShape>,
    pub label: String,
}

impl Atlas {
    pub fn from_family(family: &DomainFamily) -> Result<Self> {
        Self::from_family_with_overlap(family, DEFAULT_OVERLAP)
    }

    pub fn from_family_with_overlap(family: &DomainFamily, overlap: f64) -> Result<Self> {
        let mut atlas = Self::from_shape(family.shape()?, overlap)?;
        atlas.label = family.label();
        Ok(atlas)
    }

    /// Cube-face atlas (six charts) in 3D, four circle arcs in 2D.
    pub fn from_shape(shape: RadialShape, overlap: f64) -> Result<Self> {
        shape.validate()?;
        if !(overlap > 0.0 && overlap < FRAC_PI_4) {
            return Err(Error::config("domain.overlap", "overlap must lie in (0, π/4)"));
        }
        let charts = if shape.dim == 3 {
            let (domain, core) = cube_face_rects(overlap);
            (0..6).map(|f| Chart::new(f, ChartMap::Radial { shape, param: SphereParam::CubeFace(f) }, domain, core)).collect()
        } else {
            (0..4)
                .map(|k| {
                    let c = k as f64 * FRAC_PI_2;
                    Chart::new(
                        k,
                        ChartMap::Radial { shape, param: SphereParam::Arc },
                        ParamRect::interval(c - FRAC_PI_4 - overlap, c + FRAC_PI_4 + overlap),
                        ParamRect::interval(c - FRAC_PI_4, c + FRAC_PI_4),
                    )
                })
                .collect()
        };
        let atlas = Self { dim: shape.dim, charts, shape: Some(shape), label: format!("{shape:?}") };
        atlas.validate_orientation()?;
        Ok(atlas)
    }

    /// Atlas made of a single chart (open patches, flat test charts).
    pub fn single(chart: Chart) -> Self {
        let dim = chart.ambient_dim();
        Self { dim, charts: vec![Chart { id: 0, ..chart }], shape: None, label: "single chart".into() }
    }

    pub fn chart(&self, id: usize) -> &Chart {
        &self.charts[id]
    }

    /// Volume enclosed by the atlas via the divergence theorem,
    /// |D| = −(1/n) Σ ∫_core Z·N dα with N inward.
    pub fn divergence_volume(&self) -> f64 {
        let gl = GaussLegendre::new(12);
        let panels = 6;
        let mut total = 0.0;
        for chart in &self.charts {
            total += integrate_core(chart, &gl, panels, |z, jac| -z.dot(&normal_from_jacobian(jac, chart.param_dim())));
        }
        total / self.dim as f64
    }

    fn validate_orientation(&self) -> Result<()> {
        let v = self.divergence_volume();
        if v > 0.0 {
            Ok(())
        } else {
            Err(Error::Geometry { chart: 0, reason: format!("atlas orientation inconsistent (volume {v})") })
        }
    }

    /// Surface measure of the boundary (sum over chart cores).
    pub fn area(&self) -> f64 {
        let gl = GaussLegendre::new(12);
        self.charts.iter().map(|c| integrate_core(c, &gl, 6, |_, jac| normal_from_jacobian(jac, c.param_dim()).norm())).sum()
    }

    pub fn side_of(&self, x: &Vec3) -> Option<Side> {
        self.shape.map(|s| {
            let l = s.level(x);
            if l.abs() < 1e-14 {
                Side::Boundary
            } else if l < 0.0 {
                Side::Interior
            } else {
                Side::Exterior
            }
        })
    }

    pub fn contains(&self, x: &Vec3) -> Result<bool> {
        match self.shape {
            Some(s) => Ok(s.contains(x)),
            None => Err(Error::Parameter("inside test needs a closed atlas".into())),
        }
    }

    /// Chart whose core contains the boundary point `y`, with its parameters.
    pub fn locate(&self, y: &Vec3) -> Result<(usize, [f64; 2])> {
        if let Some(shape) = self.shape {
            let w = shape.direction_of(y).ok_or_else(|| Error::Parameter("cannot locate the origin on the boundary".into()))?;
            let mut best: Option<(usize, [f64; 2], f64)> = None;
            for chart in &self.charts {
                if let ChartMap::Radial { param, .. } = &chart.map {
                    if let Some(mut a) = param.invert(&w) {
                        if chart.param_dim() == 1 {
                            a[0] = wrap_angle(a[0], chart.core.lo[0]);
                        }
                        let depth = chart.core.inner_distance(&a) - outside_distance(&chart.core, &a);
                        if best.map_or(true, |b| depth > b.2) {
                            best = Some((chart.id, a, depth));
                        }
                    }
                }
            }
            return best.map(|(c, a, _)| (c, a)).ok_or_else(|| Error::Parameter("point not covered".into()));
        }
        let chart = &self.charts[0];
        let alpha = nearest_on_chart(chart, y, centre(&chart.domain), 60);
        Ok((0, alpha))
    }

    /// Nearest boundary point by damped Gauss–Newton, seeded by radial
    /// projection and switching charts when the iterate leaves a core.
    pub fn foot_point(&self, x: &Vec3) -> Result<FootPoint> {
        let (mut chart_id, mut alpha) = match self.shape {
            Some(shape) if shape.direction_of(x).is_some() => {
                let w = shape.direction_of(x).unwrap();
                self.locate(&shape.point(&w))?
            }
            Some(shape) => self.locate(&shape.point(&Vec3::new(1.0, 0.0, 0.0)))?,
            None => self.locate(x)?,
        };
        for _ in 0..4 {
            let chart = &self.charts[chart_id];
            alpha = nearest_on_chart(chart, x, alpha, 60);
            if self.shape.is_none() || chart.core.contains_with(&alpha, 1e-9) {
                break;
            }
            let (c, a) = self.locate(&chart.z_unchecked(&alpha))?;
            chart_id = c;
            alpha = a;
        }
        let chart = &self.charts[chart_id];
        let (point, jac) = chart.eval_unchecked(&alpha);
        let normal = normal_from_jacobian(&jac, chart.param_dim()).normalize();
        let distance = (x - point).norm();
        let side = match self.side_of(x) {
            Some(s) => s,
            None => {
                let s = (x - point).dot(&normal);
                if distance < 1e-14 {
                    Side::Boundary
                } else if s > 0.0 {
                    Side::Interior
                } else {
                    Side::Exterior
                }
            }
        };
        Ok(FootPoint { chart: chart_id, alpha, point, distance, normal, side })
    }

    /// Quasi-random points on the boundary, spread over chart cores in
    /// proportion to the parameter measure.
    pub fn surface_samples(&self, count: usize) -> Vec<(usize, [f64; 2])> {
        let per = count.div_ceil(self.charts.len()).max(1);
        let mut out = Vec::with_capacity(per * self.charts.len());
        for chart in &self.charts {
            for i in 0..per {
                let u = halton(i as u64, chart.param_dim());
                out.push((chart.id, chart.core.from_unit(&u)));
            }
        }
        out
    }

    /// Checks that every sampled boundary point lies in the core of some chart
    /// and that the chart reproduces it.
    pub fn check_coverage(&self, samples: usize) -> Result<()> {
        for (c, a) in self.surface_samples(samples) {
            let y = self.charts[c].z_unchecked(&a);
            let (c2, a2) = self.locate(&y)?;
            let y2 = self.charts[c2].z(&a2)?;
            if (y - y2).norm() > 1e-10 * (1.0 + y.norm()) {
                return Err(Error::Geometry { chart: c2, reason: format!("coverage failure at {y:?}") });
            }
        }
        Ok(())
    }
}

fn centre(r: &ParamRect) -> [f64; 2] {
    [0.5 * (r.lo[0] + r.hi[0]), 0.5 * (r.lo[1] + r.hi[1])]
}

fn outside_distance(r: &ParamRect, a: &[f64; 2]) -> f64 {
    (0..r.dim).map(|i| (r.lo[i] - a[i]).max(a[i] - r.hi[i]).max(0.0)).fold(0.0, f64::max)
}

/// Representative of angle `t` in [lo, lo + 2π).
fn wrap_angle(t: f64, lo: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    lo + (t - lo).rem_euclid(tau)
}

/// Damped Gauss–Newton for min |Z(α) − x|², clamped to the chart domain.
pub fn nearest_on_chart(chart: &Chart, x: &Vec3, start: [f64; 2], iters: usize) -> [f64; 2] {
    let dim = chart.param_dim();
    let clamp = |a: [f64; 2]| {
        let mut b = a;
        for i in 0..dim {
            b[i] = b[i].clamp(chart.domain.lo[i], chart.domain.hi[i]);
        }
        b
    };
    let mut alpha = clamp(start);
    let cost = |a: &[f64; 2]| (chart.z_unchecked(a) - x).norm_squared();
    let mut current = cost(&alpha);
    for _ in 0..iters {
        let (z, jac) = chart.eval_unchecked(&alpha);
        let r = z - x;
        let step = if dim == 1 {
            let d: Vec3 = jac.column(0).into();
            let g = d.norm_squared();
            if g == 0.0 {
                break;
            }
            [-d.dot(&r) / g, 0.0]
        } else {
            let jtj: Matrix2<f64> = jac.transpose() * jac;
            let jtr: Vector2<f64> = jac.transpose() * r;
            match jtj.try_inverse() {
                Some(inv) => {
                    let s = -(inv * jtr);
                    [s[0], s[1]]
                }
                None => break,
            }
        };
        let step_len = (step[0] * step[0] + step[1] * step[1]).sqrt();
        if step_len < 1e-7 {
            // Close to the minimiser the cost no longer resolves progress;
            // take plain Gauss–Newton steps.
            let trial = clamp([alpha[0] + step[0], alpha[1] + step[1]]);
            let moved = ((trial[0] - alpha[0]).powi(2) + (trial[1] - alpha[1]).powi(2)).sqrt();
            alpha = trial;
            current = cost(&alpha);
            if moved < 1e-15 {
                break;
            }
            continue;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = clamp([alpha[0] + t * step[0], alpha[1] + t * step[1]]);
            let c = cost(&trial);
            if c <= current {
                let moved = ((trial[0] - alpha[0]).powi(2) + (trial[1] - alpha[1]).powi(2)).sqrt();
                alpha = trial;
                current = c;
                accepted = moved > 0.0;
                if moved < 1e-15 {
                    accepted = false;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    alpha
}

/// ∫ over the chart core of `f(Z, ∂Z)` by composite Gauss–Legendre.
pub fn integrate_core<F>(chart: &Chart, gl: &GaussLegendre, panels: usize, mut f: F) -> f64
where
    F: FnMut(&Vec3, &super::chart::Jacobian) -> f64,
{
    let core = chart.core;
    let h: Vec<f64> = (0..2).map(|i| core.width(i) / panels as f64).collect();
    let mut total = 0.0;
    if chart.param_dim() == 1 {
        for p in 0..panels {
            let a = core.lo[0] + p as f64 * h[0];
            for (t, w) in gl.mapped(a, a + h[0]) {
                let (z, jac) = chart.eval_unchecked(&[t, 0.0]);
                total += w * f(&z, &jac);
            }
        }
        return total;
    }
    for p in 0..panels {
        let a = core.lo[0] + p as f64 * h[0];
        for q in 0..panels {
            let b = core.lo[1] + q as f64 * h[1];
            for (s, ws) in gl.mapped(a, a + h[0]) {
                for (t, wt) in gl.mapped(b, b + h[1]) {
                    let (z, jac) = chart.eval_unchecked(&[s, t]);
                    total += ws * wt * f(&z, &jac);
                }
            }
        }
    }
    total
}
