//! Principal-value volume integrals in polar coordinates centred at x.
//!
//! With y = x + rω the truncated integral over D ∖ B(x, ε) becomes
//! ∫_S Ω(−ω) Σ_i log(b_i/a_i) dω, where (a_i, b_i) are the chords of the ray
//! inside D beyond ε. The log ε term of the first chord multiplies ∫_S Ω = 0,
//! so the ε → 0 limit is ∫_S Ω(−ω) Λ(x, ω) dω with ε dropped.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::domain::VolumeDomain;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::kernels::{sphere_integral, HomogeneousKernel};
use crate::quadrature::{adaptive_vec, richardson, AdaptiveOptions};

/// Shrinking exclusion radii ε_k = ε₀·2^{−k}, ε₀ = `eps0_factor`·dist(x, ∂D).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvSchedule {
    pub eps0_factor: f64,
    pub count: usize,
    pub order: usize,
}

impl Default for PvSchedule {
    fn default() -> Self {
        Self { eps0_factor: 0.1, count: 7, order: 2 }
    }
}

impl PvSchedule {
    pub fn radii(&self, dist: f64) -> Vec<f64> {
        let e0 = self.eps0_factor * dist;
        (0..self.count).map(|k| e0 * 0.5f64.powi(k as i32)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0_factor > 0.0 && self.eps0_factor < 1.0) {
            return Err(Error::config("pv.eps0_factor", "must lie in (0, 1)"));
        }
        if self.count < 2 {
            return Err(Error::config("pv.count", "need at least two radii"));
        }
        Ok(())
    }
}

/// Accuracy controls for the polar quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolumeQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum subintervals of each inner adaptive integral.
    pub max_intervals: usize,
    /// Initial pieces and maximum subintervals of the azimuthal integral (3D).
    pub azimuth_pieces: usize,
    pub azimuth_max_intervals: usize,
    /// Angular samples per inner integral used to find silhouettes of
    /// non-convex bodies.
    pub silhouette_samples: usize,
}

impl Default for VolumeQuadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-7,
            max_intervals: 300,
            azimuth_pieces: 8,
            azimuth_max_intervals: 300,
            silhouette_samples: 48,
        }
    }
}

impl VolumeQuadrature {
    /// Tolerances divided by `factor` (refinement studies).
    pub fn refined(&self, factor: f64) -> Self {
        Self { abs_tol: self.abs_tol / factor, rel_tol: self.rel_tol / factor, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::config("volume.abs_tol", "tolerances must be positive"));
        }
        if self.max_intervals == 0 || self.azimuth_pieces == 0 || self.azimuth_max_intervals < self.azimuth_pieces {
            return Err(Error::config(
                "volume.max_intervals",
                "need positive interval counts with azimuth_max_intervals ≥ azimuth_pieces",
            ));
        }
        if self.silhouette_samples < 4 {
            return Err(Error::config("volume.silhouette_samples", "need at least four samples"));
        }
        Ok(())
    }

    /// Options of an inner angular integral whose result is integrated
    /// once more over the azimuth.
    fn inner(&self, target: f64) -> AdaptiveOptions {
        AdaptiveOptions {
            abs_tol: target / (8.0 * PI),
            rel_tol: 0.1 * self.rel_tol,
            max_intervals: self.max_intervals,
            initial_pieces: 2,
        }
    }
}

/// Result of a volume principal-value evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeValue {
    pub value: f64,
    pub error: f64,
    /// Truncated integrals over D ∖ B(x, ε_k).
    pub eps_series: Vec<(f64, f64)>,
}

/// Position of the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Interior,
    Exterior,
    Boundary,
}

/// Sum of log(b/a) over the chords of a ray; a chord starting at the origin
/// contributes log b.
fn log_chords(crossings: &[f64], inside_at_start: bool) -> f64 {
    let mut s = 0.0;
    let mut i = 0;
    if inside_at_start {
        match crossings.first() {
            Some(c) => s += c.ln(),
            None => return 0.0,
        }
        i = 1;
    }
    while i + 1 < crossings.len() {
        s += (crossings[i + 1] / crossings[i]).ln();
        i += 2;
    }
    s
}

/// Whether a ray starts inside D.
#[derive(Debug, Clone, Copy)]
enum Start {
    Fixed(bool),
    /// Boundary point: inside iff the ray points into the inward normal's
    /// half-space; log(ω·ν) is removed from Λ there.
    HalfSpace(Vec3),
}

struct Setup<'a, D: VolumeDomain + ?Sized> {
    domain: &'a D,
    kernels: &'a [HomogeneousKernel],
    x: Vec3,
    t_min: f64,
    start: Start,
    /// Absolute accuracy goal of the final integrals.
    target: f64,
    /// Extra components integrating Ω(−ω) alone (for the ε-series).
    with_mean: bool,
}

impl<'a, D: VolumeDomain + ?Sized> Setup<'a, D> {
    fn width(&self) -> usize {
        self.kernels.len() * if self.with_mean { 2 } else { 1 }
    }

    fn lambda(&self, w: &Vec3) -> f64 {
        let cs = self.domain.crossings(&self.x, w, self.t_min);
        match self.start {
            Start::Fixed(b) => log_chords(&cs, b),
            Start::HalfSpace(n) => {
                let c = w.dot(&n);
                if c > 0.0 {
                    // The first chord has length ~ c/curvature; log c is
                    // integrated in closed form by the caller.
                    log_chords(&cs, true) - c.ln()
                } else {
                    log_chords(&cs, false)
                }
            }
        }
    }

    /// Adds weight·Ω(−ω)·Λ (and weight·Ω(−ω)) into `out`.
    fn accumulate(&self, w: &Vec3, weight: f64, lambda: f64, out: &mut [f64]) {
        let neg = [-w.x, -w.y, -w.z];
        let k = self.kernels.len();
        for (i, kern) in self.kernels.iter().enumerate() {
            let om = kern.eval_point(&neg);
            out[i] += weight * om * lambda;
            if self.with_mean {
                out[k + i] += weight * om;
            }
        }
    }
}

fn frame_from_axis(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.6 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let e1 = (helper - axis * axis.dot(&helper)).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

fn direction(axis: &Vec3, e1: &Vec3, e2: &Vec3, theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    e1 * (st * cp) + e2 * (st * sp) + axis * ct
}

/// Largest angle from the axis at which a ray from an exterior point still
/// meets the body (bisection on the hit predicate).
fn hit_limit<F: Fn(f64) -> bool>(hit: F, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    if hit(hi) {
        return hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if hit(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    lo
}

/// Splits [a, b] at angles where the crossing count of the ray changes
/// (silhouettes). Pieces touching such an angle are flagged for the
/// smoothstep substitution, which absorbs the square-root edge.
fn pieces<F: Fn(f64) -> usize>(count: &F, a: f64, b: f64, samples: usize) -> Vec<(f64, f64, bool)> {
    let mut events = Vec::new();
    let step = (b - a) / samples as f64;
    let mut prev = count(a);
    for i in 1..=samples {
        let t = a + step * i as f64;
        let c = count(t);
        if c != prev {
            let (mut lo, mut hi) = (t - step, t);
            while hi - lo > 1e-14 * (1.0 + hi.abs()) {
                let mid = 0.5 * (lo + hi);
                if count(mid) == prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            events.push(0.5 * (lo + hi));
        }
        prev = c;
    }
    let mut out = Vec::with_capacity(events.len() + 1);
    let mut start = a;
    let mut start_event = false;
    for e in events {
        if e - start > 1e-13 {
            out.push((start, e, true));
        }
        start = e;
        start_event = true;
    }
    out.push((start, b, start_event));
    out
}

/// θ = p + (q − p)·w²(3 − 2w) and its derivative.
fn smoothstep(p: f64, q: f64, w: f64) -> (f64, f64) {
    (p + (q - p) * w * w * (3.0 - 2.0 * w), (q - p) * 6.0 * w * (1.0 - w))
}

/// Azimuthal integral by adaptive Gauss–Kronrod; `f` returns the error of
/// its inner integral.
fn azimuthal<F>(f: F, width: usize, quad: &VolumeQuadrature, target: f64) -> Result<(Vec<f64>, f64)>
where
    F: Fn(f64, &mut [f64]) -> f64,
{
    let mut inner_err = 0.0f64;
    let opts = AdaptiveOptions {
        abs_tol: target,
        rel_tol: quad.rel_tol,
        max_intervals: quad.azimuth_max_intervals,
        initial_pieces: quad.azimuth_pieces,
    };
    let r = adaptive_vec(
        |p, v: &mut [f64]| {
            v.iter_mut().for_each(|c| *c = 0.0);
            inner_err = inner_err.max(f(p, v));
        },
        0.0,
        TAU,
        width,
        opts,
    );
    let scale = r.value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !r.converged && r.error > 1e3 * target.max(quad.rel_tol * scale) {
        return Err(Error::Convergence {
            reason: format!("azimuthal integral error {:.3e} above tolerance", r.error),
            series: vec![(r.evaluations as f64, r.value[0])],
        });
    }
    Ok((r.value, r.error + TAU * inner_err))
}

fn integrate_3d<D: VolumeDomain + ?Sized>(
    setup: &Setup<'_, D>,
    mode: Mode,
    axis: Vec3,
    quad: &VolumeQuadrature,
) -> Result<(Vec<f64>, f64)> {
    let (e1, e2) = frame_from_axis(&axis);
    let width = setup.width();
    let opts = quad.inner(setup.target);
    let convex = setup.domain.is_convex_body();
    let inner = |phi: f64, out: &mut [f64]| -> f64 {
        let mut err = 0.0;
        let mut run = |a: f64, b: f64, sub: &dyn Fn(f64) -> (f64, f64)| {
            let r = adaptive_vec(
                |s, v: &mut [f64]| {
                    v.iter_mut().for_each(|c| *c = 0.0);
                    let (theta, jac) = sub(s);
                    let w = direction(&axis, &e1, &e2, theta, phi);
                    let lam = setup.lambda(&w);
                    setup.accumulate(&w, jac * theta.sin(), lam, v);
                },
                a,
                b,
                width,
                opts,
            );
            for (o, v) in out.iter_mut().zip(&r.value) {
                *o += v;
            }
            err += r.error;
        };
        match mode {
            Mode::Exterior if convex => {
                let hit = |t: f64| !setup.domain.crossings(&setup.x, &direction(&axis, &e1, &e2, t, phi), 0.0).is_empty();
                let tmax = hit_limit(hit, 0.0, PI);
                // θ = θmax(1 − w²) removes the square-root edge of the chords.
                run(0.0, 1.0, &|w: f64| (tmax * (1.0 - w * w), 2.0 * tmax * w));
            }
            _ if convex => {
                run(0.0, FRAC_PI_2, &|t: f64| (t, 1.0));
                run(FRAC_PI_2, PI, &|t: f64| (t, 1.0));
            }
            _ => {
                let count = |t: f64| setup.domain.crossings(&setup.x, &direction(&axis, &e1, &e2, t, phi), setup.t_min).len();
                for (a, b) in [(0.0, FRAC_PI_2), (FRAC_PI_2, PI)] {
                    for (p, q, smooth) in pieces(&count, a, b, quad.silhouette_samples) {
                        if smooth {
                            run(0.0, 1.0, &|w: f64| smoothstep(p, q, w));
                        } else {
                            run(p, q, &|t: f64| (t, 1.0));
                        }
                    }
                }
            }
        }
        err
    };
    azimuthal(inner, width, quad, setup.target)
}

fn integrate_2d<D: VolumeDomain + ?Sized>(
    setup: &Setup<'_, D>,
    mode: Mode,
    axis: Vec3,
    quad: &VolumeQuadrature,
) -> Result<(Vec<f64>, f64)> {
    let width = setup.width();
    let phi_a = axis.y.atan2(axis.x);
    let opts =
        AdaptiveOptions { abs_tol: setup.target, rel_tol: quad.rel_tol, max_intervals: quad.max_intervals, initial_pieces: 4 };
    let mut total = vec![0.0; width];
    let mut err = 0.0;
    let mut run = |a: f64, b: f64, sub: &dyn Fn(f64) -> (f64, f64)| {
        let r = adaptive_vec(
            |s, v: &mut [f64]| {
                v.iter_mut().for_each(|c| *c = 0.0);
                let (phi, jac) = sub(s);
                let w = Vec3::new(phi.cos(), phi.sin(), 0.0);
                let lam = setup.lambda(&w);
                setup.accumulate(&w, jac, lam, v);
            },
            a,
            b,
            width,
            opts,
        );
        for (o, v) in total.iter_mut().zip(&r.value) {
            *o += v;
        }
        err += r.error;
    };
    match mode {
        Mode::Exterior if setup.domain.is_convex_body() => {
            let hit = |d: f64| {
                let w = Vec3::new(d.cos(), d.sin(), 0.0);
                !setup.domain.crossings(&setup.x, &w, 0.0).is_empty()
            };
            let up = hit_limit(|b| hit(phi_a + b), 0.0, PI);
            let down = hit_limit(|b| hit(phi_a - b), 0.0, PI);
            run(0.0, 1.0, &|w: f64| (phi_a + up * (1.0 - w * w), 2.0 * up * w));
            run(0.0, 1.0, &|w: f64| (phi_a - down * (1.0 - w * w), 2.0 * down * w));
        }
        _ => {
            let convex = setup.domain.is_convex_body();
            let count = |p: f64| setup.domain.crossings(&setup.x, &Vec3::new(p.cos(), p.sin(), 0.0), setup.t_min).len();
            for k in 0..4 {
                let a = phi_a - FRAC_PI_2 + k as f64 * FRAC_PI_2;
                if convex {
                    run(a, a + FRAC_PI_2, &|t: f64| (t, 1.0));
                    continue;
                }
                for (p, q, smooth) in pieces(&count, a, a + FRAC_PI_2, 2 * quad.silhouette_samples) {
                    if smooth {
                        run(0.0, 1.0, &|w: f64| smoothstep(p, q, w));
                    } else {
                        run(p, q, &|t: f64| (t, 1.0));
                    }
                }
            }
        }
    }
    Ok((total, err))
}

/// Absolute accuracy goal: the relative tolerance applied to max_k ∫_S |Ω_k|.
fn accuracy_target(kernels: &[HomogeneousKernel], quad: &VolumeQuadrature) -> f64 {
    let scale = kernels.iter().map(|k| sphere_integral(k.dim(), |w| k.eval_point(w).abs())).fold(0.0, f64::max);
    quad.abs_tol.max(quad.rel_tol * scale)
}

fn check_kernels(kernels: &[HomogeneousKernel], dim: usize) -> Result<()> {
    if kernels.is_empty() {
        return Err(Error::Parameter("no kernels given".into()));
    }
    for k in kernels {
        if k.dim() != dim {
            return Err(Error::Kernel(format!("{} acts in dimension {}, domain has {dim}", k.name(), k.dim())));
        }
        k.require_calderon_zygmund()?;
    }
    Ok(())
}

/// T(1_D)(x) for several kernels at a point off the boundary.
pub fn t_volume_multi<D: VolumeDomain + ?Sized>(
    kernels: &[HomogeneousKernel],
    domain: &D,
    x: &Vec3,
    schedule: &PvSchedule,
    quad: &VolumeQuadrature,
) -> Result<Vec<VolumeValue>> {
    let dim = domain.dim();
    check_kernels(kernels, dim)?;
    schedule.validate()?;
    let level = domain.level(x);
    let (foot, dist, _) = domain.nearest(x)?;
    if dist <= 1e-12 * domain.bounding_radius() {
        return Err(Error::Parameter(format!(
            "point {:?} lies on the boundary; use the one-sided traces instead",
            [x.x, x.y, x.z]
        )));
    }
    let mode = if level < 0.0 { Mode::Interior } else { Mode::Exterior };
    let axis = (foot - x).normalize();
    let setup = Setup {
        domain,
        kernels,
        x: *x,
        t_min: 0.0,
        start: Start::Fixed(mode == Mode::Interior),
        target: accuracy_target(kernels, quad),
        with_mean: mode == Mode::Interior,
    };
    let (vals, err) = if dim == 3 { integrate_3d(&setup, mode, axis, quad)? } else { integrate_2d(&setup, mode, axis, quad)? };
    let k = kernels.len();
    let radii = schedule.radii(dist);
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mean = if setup.with_mean { vals[k + i] } else { 0.0 };
        // ∫_{D∖B_ε} = ∫_S Ω(−ω)(Λ − log ε) dω for ε below dist(x, ∂D).
        let series: Vec<(f64, f64)> = radii.iter().map(|&e| (e, vals[i] - mean * e.ln())).collect();
        let values: Vec<f64> = series.iter().map(|s| s.1).collect();
        let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let floor = 1e-9 * (1.0 + vals[i].abs());
        if diffs.windows(2).any(|d| d[1] > d[0].max(floor) * 1.5) {
            return Err(Error::Convergence { reason: "ε-series not settling".into(), series });
        }
        let (extrap, corr) = richardson(&values, 1, schedule.order);
        out.push(VolumeValue { value: extrap, error: err + corr + mean.abs() * 1e-3, eps_series: series });
    }
    Ok(out)
}

/// T(1_D)(x) for a single kernel.
pub fn t_volume_pv<D: VolumeDomain + ?Sized>(
    kernel: &HomogeneousKernel,
    domain: &D,
    x: &Vec3,
    schedule: &PvSchedule,
    quad: &VolumeQuadrature,
) -> Result<VolumeValue> {
    Ok(t_volume_multi(std::slice::from_ref(kernel), domain, x, schedule, quad)?.remove(0))
}

/// Boundary principal value of T(1_D) at a boundary point with inward unit
/// normal `normal`, for even kernels.
pub fn t_boundary_pv<D: VolumeDomain + ?Sized>(
    kernels: &[HomogeneousKernel],
    domain: &D,
    y: &Vec3,
    normal: &Vec3,
    quad: &VolumeQuadrature,
) -> Result<Vec<f64>> {
    let dim = domain.dim();
    check_kernels(kernels, dim)?;
    if let Some(k) = kernels.iter().find(|k| k.parity() != crate::kernels::Parity::Even) {
        return Err(Error::Kernel(format!("{}: boundary principal value needs an even kernel", k.name())));
    }
    let t_min = 1e-10 * domain.bounding_radius();
    let setup = Setup {
        domain,
        kernels,
        x: *y,
        t_min,
        start: Start::HalfSpace(normal.normalize()),
        target: accuracy_target(kernels, quad),
        with_mean: false,
    };
    let (vals, _) = if dim == 3 {
        integrate_3d(&setup, Mode::Boundary, *normal, quad)?
    } else {
        integrate_2d(&setup, Mode::Boundary, *normal, quad)?
    };
    // For even Ω, ∫_{ω·ν>0} Ω(−ω) log(ω·ν) dω = ½∫_S Ω log|ω·ν| = −c(ν).
    Ok(kernels.iter().zip(vals).map(|(k, v)| v - jump_constant(k, normal)).collect())
}

/// c(ν) = −½ ∫_S Ω(ω) log|ω·ν| dω; the interior trace of T(1_D) at a boundary
/// point is the boundary principal value plus c(ν), the exterior trace the
/// principal value minus c(ν).
pub fn jump_constant(kernel: &HomogeneousKernel, normal: &Vec3) -> f64 {
    let opts = AdaptiveOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 400, initial_pieces: 1 };
    let nu = normal.normalize();
    if kernel.dim() == 2 {
        let pa = nu.y.atan2(nu.x);
        let mut s = 0.0;
        for k in 0..4 {
            let a = pa - FRAC_PI_2 + k as f64 * FRAC_PI_2;
            let r = adaptive_vec(
                |p, v: &mut [f64]| {
                    let w = [p.cos(), p.sin(), 0.0];
                    v[0] = kernel.eval_point(&w) * (p - pa).cos().abs().ln();
                },
                a,
                a + FRAC_PI_2,
                1,
                opts,
            );
            s += r.value[0];
        }
        return -0.5 * s;
    }
    let (e1, e2) = frame_from_axis(&nu);
    let n = 64;
    let mut s = 0.0;
    for i in 0..n {
        let phi = TAU * i as f64 / n as f64;
        for (a, b) in [(0.0, FRAC_PI_2), (FRAC_PI_2, PI)] {
            let r = adaptive_vec(
                |t, v: &mut [f64]| {
                    let w = direction(&nu, &e1, &e2, t, phi);
                    v[0] = kernel.eval_point(&[w.x, w.y, w.z]) * t.cos().abs().ln() * t.sin();
                },
                a,
                b,
                1,
                opts,
            );
            s += r.value[0] * TAU / n as f64;
        }
    }
    -0.5 * s
}

/// One-sided traces of T(1_D) at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTraces {
    pub pv: f64,
    pub interior: f64,
    pub exterior: f64,
}

pub fn t_boundary_traces<D: VolumeDomain + ?Sized>(
    kernels: &[HomogeneousKernel],
    domain: &D,
    y: &Vec3,
    normal: &Vec3,
    quad: &VolumeQuadrature,
) -> Result<Vec<BoundaryTraces>> {
    let pv = t_boundary_pv(kernels, domain, y, normal, quad)?;
    Ok(kernels
        .iter()
        .zip(pv)
        .map(|(k, p)| {
            let c = jump_constant(k, normal);
            BoundaryTraces { pv: p, interior: p + c, exterior: p - c }
        })
        .collect())
}
