//! Principal values of odd boundary integrals at boundary points.
//!
//! With a smooth cutoff χ_η(y) = χ(|x − y|/η) the integral splits into a far
//! part with (1 − χ_η), which is regular, and a near part supported in
//! A_η = {|x − y| < η}. The near part is written in polar coordinates
//! α = α₀ + ρ(cos ψ, sin ψ) of the foot chart; an even number of equally
//! spaced angles pairs ψ with ψ + π, so the odd ρ⁻¹ term cancels node by node
//! and the radial integrand stays bounded.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::panels::{surface_integral, BoundaryQuadrature, SurfacePoint};
use crate::error::{Error, Result};
use crate::geometry::{Atlas, Chart, Vec3};
use crate::quadrature::{adaptive_vec, bracketed_root, richardson, AdaptiveOptions};

/// Smooth cutoff: 1 on [0, ½], 0 on [1, ∞).
pub fn cutoff(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let bump = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let a = bump(1.0 - t);
    let b = bump(t - 0.5);
    a / (a + b)
}

/// On-boundary principal value with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvValue {
    /// Symmetric polar limit plus far part.
    pub value: f64,
    /// Quadrature error estimate (angular halving plus adaptive estimates).
    pub error: f64,
    pub eta: f64,
    pub near: f64,
    pub far: f64,
    /// Truncated integrals over ∂D ∖ A_ε.
    pub eps_series: Vec<(f64, f64)>,
    /// Richardson limit of the ε-series.
    pub extrapolated: f64,
}

/// Unit direction of angle index `i` in the parameter plane.
fn param_direction(dim: usize, i: usize, count: usize) -> [f64; 2] {
    if dim == 1 {
        return if i == 0 { [1.0, 0.0] } else { [-1.0, 0.0] };
    }
    let psi = TAU * i as f64 / count as f64;
    [psi.cos(), psi.sin()]
}

fn offset(alpha: &[f64; 2], dir: &[f64; 2], rho: f64) -> [f64; 2] {
    [alpha[0] + rho * dir[0], alpha[1] + rho * dir[1]]
}

/// Radius ρ at which |x − Z(α₀ + ρ·dir)| reaches `r` (monotone for r below
/// the chart's local injectivity scale); `None` if the ray leaves the chart.
fn radius_for_distance(chart: &Chart, alpha: &[f64; 2], dir: &[f64; 2], x: &Vec3, r: f64) -> Option<f64> {
    let g = |rho: f64| (x - chart.z_unchecked(&offset(alpha, dir, rho))).norm() - r;
    let (_, jac) = chart.eval_unchecked(alpha);
    let speed = (jac.column(0) * dir[0] + jac.column(1) * dir[1]).norm();
    let mut hi = 0.5 * r / speed.max(1e-300);
    let mut lo = 0.0;
    for _ in 0..60 {
        if !chart.domain.contains(&offset(alpha, dir, hi)) {
            return None;
        }
        if g(hi) >= 0.0 {
            return Some(bracketed_root(&g, lo, hi, 1e-15 * (1.0 + hi)));
        }
        lo = hi;
        hi *= 1.5;
    }
    None
}

/// Inner radial cut, relative to the polar radius.
const RHO_FLOOR: f64 = 1e-4;

struct PolarSetup {
    eta: f64,
    count: usize,
    dirs: Vec<[f64; 2]>,
    rho_eta: Vec<f64>,
    rho_max: f64,
}

fn polar_setup(chart: &Chart, alpha: &[f64; 2], x: &Vec3, eta0: f64, angles: usize) -> Result<PolarSetup> {
    let dim = chart.param_dim();
    let count = if dim == 1 { 2 } else { angles };
    let dirs: Vec<[f64; 2]> = (0..count).map(|i| param_direction(dim, i, count)).collect();
    let mut eta = eta0;
    for _ in 0..12 {
        let radii: Option<Vec<f64>> = dirs.iter().map(|d| radius_for_distance(chart, alpha, d, x, eta)).collect();
        if let Some(rho_eta) = radii {
            let rho_max = rho_eta.iter().cloned().fold(0.0, f64::max);
            let inside = dirs.iter().all(|d| chart.domain.contains(&offset(alpha, d, rho_max)));
            if inside {
                return Ok(PolarSetup { eta, count, dirs, rho_eta, rho_max });
            }
        }
        eta *= 0.5;
    }
    Err(Error::Geometry { chart: chart.id, reason: format!("no cutoff radius fits the chart at {alpha:?}") })
}

/// Principal value at the boundary point Z_c(α₀) of ∫ f(y, x − y) dS(y),
/// where f is odd in x − y to leading order. Returns one report per
/// component.
pub(crate) fn pv_general<F>(
    atlas: &Atlas,
    chart_id: usize,
    alpha: &[f64; 2],
    quad: &BoundaryQuadrature,
    eta: f64,
    eps_count: usize,
    width: usize,
    f: F,
) -> Result<Vec<PvValue>>
where
    F: Fn(&SurfacePoint, &Vec3, &mut [f64]),
{
    quad.validate()?;
    let chart = atlas.charts.get(chart_id).ok_or_else(|| Error::Parameter(format!("no chart {chart_id}")))?;
    if !chart.domain.contains(alpha) {
        return Err(Error::OutsideChart { chart: chart_id, alpha: *alpha });
    }
    let x = chart.z_unchecked(alpha);
    let setup = polar_setup(chart, alpha, &x, eta, quad.pv_angles)?;
    let eta = setup.eta;
    let dim = chart.param_dim();
    let weight = if dim == 1 { 1.0 } else { TAU / setup.count as f64 };

    let mut buf = vec![0.0; width];
    let mut sample = |rho: f64, dir: &[f64; 2], out: &mut [f64], scale: f64| {
        let sp = SurfacePoint::at(chart, &offset(alpha, dir, rho));
        let z = x - sp.point;
        let chi = cutoff(z.norm() / eta);
        if chi == 0.0 || z.norm() == 0.0 {
            return;
        }
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(&sp, &z, &mut buf);
        let jac = if dim == 1 { 1.0 } else { rho };
        for (o, b) in out.iter_mut().zip(&buf) {
            *o += scale * chi * sp.area * jac * b;
        }
    };

    let opts = AdaptiveOptions { abs_tol: quad.abs_tol, rel_tol: quad.rel_tol, max_intervals: 2000, initial_pieces: 8 };
    // Components [0, width) use every angle, [width, 2·width) every other one.
    let mut radial = |rho: f64, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, d) in setup.dirs.iter().enumerate() {
            let (full, half) = out.split_at_mut(width);
            sample(rho, d, full, weight);
            if dim == 2 && i % 2 == 0 {
                sample(rho, d, half, 2.0 * weight);
            }
        }
    };
    // Below `floor` the chord x − Z(α₀ + ρω) is dominated by rounding; the
    // paired integrand is bounded there, so one midpoint node suffices.
    let floor = RHO_FLOOR * setup.rho_max;
    let mut near = adaptive_vec(&mut radial, floor, setup.rho_max, 2 * width, opts);
    let mut inner = vec![0.0; 2 * width];
    radial(0.5 * floor, &mut inner);
    for (v, i) in near.value.iter_mut().zip(&inner) {
        *v += floor * i;
    }
    if dim == 1 {
        let (a, b) = near.value.split_at_mut(width);
        b.copy_from_slice(a);
    }

    let far = surface_integral(atlas, &x, quad, width, 0.5 * eta, |sp, z, out| {
        let chi = cutoff(z.norm() / eta);
        if chi < 1.0 {
            f(sp, z, out);
            out.iter_mut().for_each(|v| *v *= 1.0 - chi);
        }
    });

    let eps: Vec<f64> = (0..eps_count).map(|k| 0.25 * eta * 0.5f64.powi(k as i32)).collect();
    let mut series = vec![vec![0.0; eps_count]; width];
    let radial_opts = AdaptiveOptions { initial_pieces: 4, ..opts };
    for (i, d) in setup.dirs.iter().enumerate() {
        for (k, &e) in eps.iter().enumerate() {
            let Some(lo) = radius_for_distance(chart, alpha, d, &x, e) else { continue };
            if lo >= setup.rho_eta[i] {
                continue;
            }
            let r = adaptive_vec(
                |rho, out: &mut [f64]| {
                    out.iter_mut().for_each(|v| *v = 0.0);
                    sample(rho, d, out, weight);
                },
                lo,
                setup.rho_eta[i],
                width,
                radial_opts,
            );
            for c in 0..width {
                series[c][k] += r.value[c];
            }
        }
    }

    Ok((0..width)
        .map(|c| {
            let near_c = near.value[c];
            let angular = (near.value[c] - near.value[width + c]).abs();
            let values: Vec<f64> = series[c].iter().map(|s| s + far[c]).collect();
            let (extrapolated, _) = richardson(&values, 1, 2);
            PvValue {
                value: near_c + far[c],
                error: angular + near.error,
                eta,
                near: near_c,
                far: far[c],
                eps_series: eps.iter().cloned().zip(values).collect(),
                extrapolated,
            }
        })
        .collect())
}
