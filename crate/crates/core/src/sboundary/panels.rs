//! Surface integrals over the chart cores of an atlas with panels refined
//! toward a target point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normal_from_jacobian, Atlas, Chart, ParamRect, Vec3};
use crate::quadrature::GaussLegendre;

/// A quadrature node on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub chart: usize,
    pub alpha: [f64; 2],
    pub point: Vec3,
    /// Inward unit normal.
    pub normal: Vec3,
    /// Area element |N(α)|.
    pub area: f64,
}

impl SurfacePoint {
    pub fn at(chart: &Chart, alpha: &[f64; 2]) -> Self {
        let (point, jac) = chart.eval_unchecked(alpha);
        let n = normal_from_jacobian(&jac, chart.param_dim());
        let area = n.norm();
        Self { chart: chart.id, alpha: *alpha, point, normal: n / area, area }
    }
}

/// Panel quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryQuadrature {
    /// Panels per parameter axis of every chart core before refinement.
    pub base_panels: usize,
    /// Gauss–Legendre order per axis and panel.
    pub order: usize,
    /// A panel of ambient diameter d at distance r from the target is split
    /// while d > `refine_ratio`·r.
    pub refine_ratio: f64,
    pub max_depth: usize,
    /// Radius of the smooth cutoff around an on-boundary target, as a
    /// fraction of the domain diameter.
    pub pv_eta: f64,
    /// Angular nodes of the polar rule around an on-boundary target (even).
    pub pv_angles: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for BoundaryQuadrature {
    fn default() -> Self {
        Self {
            base_panels: 4,
            order: 8,
            refine_ratio: 1.0,
            max_depth: 40,
            pv_eta: 0.05,
            pv_angles: 64,
            abs_tol: 1e-11,
            rel_tol: 1e-9,
        }
    }
}

impl BoundaryQuadrature {
    /// Halves the panel size and tightens the tolerances.
    pub fn refined(&self) -> Self {
        Self {
            base_panels: 2 * self.base_panels,
            refine_ratio: 0.5 * self.refine_ratio,
            pv_angles: 2 * self.pv_angles,
            abs_tol: 0.1 * self.abs_tol,
            rel_tol: 0.1 * self.rel_tol,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_panels == 0 || self.order == 0 {
            return Err(Error::config("boundary.order", "panel counts and order must be positive"));
        }
        if !(self.refine_ratio > 0.0) {
            return Err(Error::config("boundary.refine_ratio", "must be positive"));
        }
        if self.pv_angles < 4 || self.pv_angles % 2 != 0 {
            return Err(Error::config("boundary.pv_angles", "must be an even number ≥ 4"));
        }
        if !(self.pv_eta > 0.0 && self.pv_eta < 0.5) {
            return Err(Error::config("boundary.pv_eta", "must lie in (0, 0.5)"));
        }
        Ok(())
    }
}

fn split(rect: &ParamRect) -> Vec<ParamRect> {
    let mid = [0.5 * (rect.lo[0] + rect.hi[0]), 0.5 * (rect.lo[1] + rect.hi[1])];
    if rect.dim == 1 {
        return vec![ParamRect::interval(rect.lo[0], mid[0]), ParamRect::interval(mid[0], rect.hi[0])];
    }
    let mut out = Vec::with_capacity(4);
    for (a, b) in [(rect.lo[0], mid[0]), (mid[0], rect.hi[0])] {
        for (c, d) in [(rect.lo[1], mid[1]), (mid[1], rect.hi[1])] {
            out.push(ParamRect { lo: [a, c], hi: [b, d], dim: 2 });
        }
    }
    out
}

/// Ambient centre and radius of a panel (over corners and edge midpoints).
fn panel_extent(chart: &Chart, rect: &ParamRect) -> (Vec3, f64) {
    let c = [0.5 * (rect.lo[0] + rect.hi[0]), 0.5 * (rect.lo[1] + rect.hi[1])];
    let zc = chart.z_unchecked(&c);
    let mut r: f64 = 0.0;
    if rect.dim == 1 {
        for a in [rect.lo[0], rect.hi[0]] {
            r = r.max((chart.z_unchecked(&[a, 0.0]) - zc).norm());
        }
    } else {
        for a in [rect.lo[0], c[0], rect.hi[0]] {
            for b in [rect.lo[1], c[1], rect.hi[1]] {
                r = r.max((chart.z_unchecked(&[a, b]) - zc).norm());
            }
        }
    }
    (zc, r)
}

/// Base panels of every chart core.
pub fn base_panels(atlas: &Atlas, per_axis: usize) -> Vec<(usize, ParamRect)> {
    let mut out = Vec::new();
    for chart in &atlas.charts {
        let core = chart.core;
        let h = [core.width(0) / per_axis as f64, core.width(1) / per_axis as f64];
        if core.dim == 1 {
            for i in 0..per_axis {
                let a = core.lo[0] + h[0] * i as f64;
                out.push((chart.id, ParamRect::interval(a, a + h[0])));
            }
        } else {
            for i in 0..per_axis {
                for j in 0..per_axis {
                    let lo = [core.lo[0] + h[0] * i as f64, core.lo[1] + h[1] * j as f64];
                    out.push((chart.id, ParamRect { lo, hi: [lo[0] + h[0], lo[1] + h[1]], dim: 2 }));
                }
            }
        }
    }
    out
}

/// Σ over chart cores of ∫ f(y, x − y)·|N| dα with distance-based refinement.
/// Panels lying inside B(x, `skip`) are dropped (the integrand must vanish
/// there) and panels meeting B(x, 2·`skip`) are kept below `skip`/4.
pub fn surface_integral<F>(atlas: &Atlas, x: &Vec3, quad: &BoundaryQuadrature, width: usize, skip: f64, f: F) -> Vec<f64>
where
    F: Fn(&SurfacePoint, &Vec3, &mut [f64]),
{
    let gl = GaussLegendre::new(quad.order);
    let mut total = vec![0.0; width];
    let mut buf = vec![0.0; width];
    let mut stack: Vec<(usize, ParamRect, usize)> =
        base_panels(atlas, quad.base_panels).into_iter().map(|(c, r)| (c, r, 0)).collect();
    while let Some((cid, rect, depth)) = stack.pop() {
        let chart = &atlas.charts[cid];
        let (zc, r) = panel_extent(chart, &rect);
        let centre_dist = (x - zc).norm();
        if centre_dist + r < skip {
            continue;
        }
        let dist = (centre_dist - r).max(0.0);
        // The cutoff transition band [skip, 2·skip] has width `skip`.
        let band = skip > 0.0 && dist < 2.0 * skip && 2.0 * r > 0.25 * quad.refine_ratio * skip;
        if depth < quad.max_depth && (2.0 * r > quad.refine_ratio * dist || band) {
            stack.extend(split(&rect).into_iter().map(|p| (cid, p, depth + 1)));
            continue;
        }
        let mut node = |alpha: [f64; 2], w: f64| {
            let sp = SurfacePoint::at(chart, &alpha);
            let z = x - sp.point;
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(&sp, &z, &mut buf);
            for (t, b) in total.iter_mut().zip(&buf) {
                *t += w * sp.area * b;
            }
        };
        if rect.dim == 1 {
            for (s, ws) in gl.mapped(rect.lo[0], rect.hi[0]) {
                node([s, 0.0], ws);
            }
        } else {
            for (s, ws) in gl.mapped(rect.lo[0], rect.hi[0]) {
                for (t, wt) in gl.mapped(rect.lo[1], rect.hi[1]) {
                    node([s, t], ws * wt);
                }
            }
        }
    }
    total
}
