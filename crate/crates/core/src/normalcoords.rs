//! Normal coordinates near the boundary.
//!
//! A point near the boundary is written x = Z(α) + δÑ(α) with Ñ = N/√|N|, and
//! a displaced point either in the frame at α,
//! x + h = Z(α) + (h_n + δ)Ñ(α) + h_τ1 ∂₁Z(α) + h_τ2 ∂₂Z(α),
//! or in moved normal coordinates x + h = Z(α + λ) + μÑ(α + λ). The latter is
//! found by the fixed-point iteration 𝛌 ← M̃⁻¹((M̃ − M(λ))𝛌 + h̃) with
//! 𝛌 = (λ₁, λ₂, μ) and the projected difference-quotient matrix M(λ).

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normal_tilde_from_jacobian, Atlas, Chart, DomainNorms, Jacobian, Side, Vec3};

/// Frame coefficients of an offset h at α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetDecomposition {
    pub h_n: f64,
    pub h_tau: [f64; 2],
}

impl OffsetDecomposition {
    pub fn h_tau_norm(&self) -> f64 {
        (self.h_tau[0] * self.h_tau[0] + self.h_tau[1] * self.h_tau[1]).sqrt()
    }
}

/// Frame (∂₁Z, ∂₂Z, Ñ) at α. Curves use (∂₁Z, Ñ) in the plane.
struct Frame {
    z: Vec3,
    d: [Vec3; 2],
    nt: Vec3,
}

fn frame(chart: &Chart, alpha: &[f64; 2]) -> Result<Frame> {
    let (z, jac) = chart.eval_unchecked(alpha);
    if !chart.domain.contains(alpha) {
        return Err(Error::OutsideChart { chart: chart.id, alpha: *alpha });
    }
    let nt = normal_tilde_from_jacobian(&jac, chart.param_dim());
    if nt.norm() == 0.0 {
        return Err(Error::Geometry { chart: chart.id, reason: format!("degenerate frame at {alpha:?}") });
    }
    Ok(Frame { z, d: [jac.column(0).into(), jac.column(1).into()], nt })
}

/// Solves h = h_τ1 ∂₁Z + h_τ2 ∂₂Z + h_n Ñ at α.
pub fn decompose_offset(chart: &Chart, alpha: &[f64; 2], h: &Vec3) -> Result<OffsetDecomposition> {
    let f = frame(chart, alpha)?;
    if chart.param_dim() == 1 {
        let m = Matrix2::new(f.d[0].x, f.nt.x, f.d[0].y, f.nt.y);
        let c = m
            .lu()
            .solve(&Vector2::new(h.x, h.y))
            .ok_or_else(|| Error::Geometry { chart: chart.id, reason: "degenerate frame".into() })?;
        return Ok(OffsetDecomposition { h_n: c[1], h_tau: [c[0], 0.0] });
    }
    let m = Matrix3::from_columns(&[f.d[0], f.d[1], f.nt]);
    let c = m.lu().solve(h).ok_or_else(|| Error::Geometry { chart: chart.id, reason: "degenerate frame".into() })?;
    Ok(OffsetDecomposition { h_n: c[2], h_tau: [c[0], c[1]] })
}

/// Point Z(α) + coef·Ñ(α) + h_τ·∂Z(α).
pub fn frame_point(chart: &Chart, alpha: &[f64; 2], coef: f64, h_tau: [f64; 2]) -> Result<Vec3> {
    let f = frame(chart, alpha)?;
    Ok(f.z + f.nt * coef + f.d[0] * h_tau[0] + f.d[1] * h_tau[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100 }
    }
}

/// Solution of x + h = Z(α + λ) + μÑ(α + λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalCoords {
    pub lambda: [f64; 2],
    pub mu: f64,
    pub residual: f64,
    pub iterations: usize,
    /// |𝛌| with 𝛌 = (λ₁, λ₂, μ).
    pub lambda_norm: f64,
    /// |𝐡| with 𝐡 = (h_τ1, h_τ2, h_n + δ).
    pub h_norm: f64,
    /// Largest ratio of successive iteration increments after the first step.
    pub contraction: f64,
    /// Iteration increments |𝛌_{k+1} − 𝛌_k|.
    pub increments: Vec<f64>,
}

/// Divided difference (Z(a + t e_i) − Z(a))/t, with the midpoint derivative
/// for tiny t.
fn divided(chart: &Chart, a: &[f64; 2], i: usize, t: f64) -> Vec3 {
    if t.abs() < 1e-7 {
        let mut m = *a;
        m[i] += 0.5 * t;
        let jac: Jacobian = chart.eval_unchecked(&m).1;
        return jac.column(i).into();
    }
    let mut b = *a;
    b[i] += t;
    (chart.z_unchecked(&b) - chart.z_unchecked(a)) / t
}

fn shifted(a: &[f64; 2], l: &[f64; 2]) -> [f64; 2] {
    [a[0] + l[0], a[1] + l[1]]
}

/// The projected difference-quotient matrix M(λ) at α.
fn m_matrix(chart: &Chart, alpha: &[f64; 2], f: &Frame, lam: &[f64; 2]) -> Matrix3<f64> {
    let full = shifted(alpha, lam);
    let nt_moved = normal_tilde_from_jacobian(&chart.eval_unchecked(&full).1, chart.param_dim());
    let p1 = f.d[0] / f.d[0].norm_squared();
    let p3 = f.nt / f.nt.norm_squared();
    if chart.param_dim() == 1 {
        let q = divided(chart, alpha, 0, lam[0]);
        return Matrix3::new(q.dot(&p1), 0.0, nt_moved.dot(&p1), 0.0, 1.0, 0.0, q.dot(&p3), 0.0, nt_moved.dot(&p3));
    }
    let p2 = f.d[1] / f.d[1].norm_squared();
    let a1 = [alpha[0] + lam[0], alpha[1]];
    let a2 = [alpha[0], alpha[1] + lam[1]];
    // Row 1 follows the path α → α + λ₁e₁ → α + λ; rows 2 and 3 follow
    // α → α + λ₂e₂ → α + λ.
    let r1c1 = divided(chart, alpha, 0, lam[0]);
    let r1c2 = divided(chart, &a1, 1, lam[1]);
    let r2c1 = divided(chart, &a2, 0, lam[0]);
    let r2c2 = divided(chart, alpha, 1, lam[1]);
    Matrix3::new(
        r1c1.dot(&p1),
        r1c2.dot(&p1),
        nt_moved.dot(&p1),
        r2c1.dot(&p2),
        r2c2.dot(&p2),
        nt_moved.dot(&p2),
        r2c1.dot(&p3),
        r2c2.dot(&p3),
        nt_moved.dot(&p3),
    )
}

/// Fixed-point solve of x + h = Z(α + λ) + μÑ(α + λ) for x = Z(α) + δÑ(α).
pub fn solve_normal_coords(chart: &Chart, alpha: &[f64; 2], delta: f64, h: &Vec3, opts: &SolverOptions) -> Result<NormalCoords> {
    let f = frame(chart, alpha)?;
    let dec = decompose_offset(chart, alpha, h)?;
    let curve = chart.param_dim() == 1;
    let g12 = if curve { 0.0 } else { f.d[0].dot(&f.d[1]) };
    let n1 = f.d[0].norm_squared();
    let n2 = if curve { 1.0 } else { f.d[1].norm_squared() };
    let m_tilde = Matrix3::new(1.0, g12 / n1, 0.0, g12 / n2, 1.0, 0.0, 0.0, 0.0, 1.0);
    let m_tilde_inv =
        m_tilde.try_inverse().ok_or_else(|| Error::Geometry { chart: chart.id, reason: "limit matrix singular".into() })?;
    let hv = Vector3::new(dec.h_tau[0], dec.h_tau[1], dec.h_n + delta);
    let h_tilde = Vector3::new(dec.h_tau[0] + dec.h_tau[1] * g12 / n1, dec.h_tau[1] + dec.h_tau[0] * g12 / n2, dec.h_n + delta);
    let h_norm = hv.norm();
    let target = f.z + f.nt * delta + h;
    let scale = 1.0 + h_norm;

    let mut lam = hv;
    let mut increments = Vec::new();
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        let l2 = [lam[0], lam[1]];
        if !chart.domain.contains(&shifted(alpha, &l2)) {
            return Err(Error::ChartTransition { chart: chart.id });
        }
        let m = m_matrix(chart, alpha, &f, &l2);
        let next = m_tilde_inv * ((m_tilde - m) * lam + h_tilde);
        let step = (next - lam).norm();
        iterations += 1;
        increments.push(step);
        lam = next;
        if !lam.iter().all(|v| v.is_finite()) || lam.norm() > 10.0 * h_norm.max(1e-300) + 1.0 {
            return Err(Error::Solver(format!("iterates diverge (|𝛌| = {:.3e}) for |𝐡| = {h_norm:.3e}", lam.norm())));
        }
        if step <= opts.tol * scale {
            break;
        }
    }
    let last = *increments.last().unwrap_or(&0.0);
    if last > opts.tol * scale * 1e3 {
        return Err(Error::Solver(format!(
            "no convergence after {} iterations (last increment {last:.3e}, |𝐡| = {h_norm:.3e})",
            opts.max_iter
        )));
    }
    let l2 = [lam[0], lam[1]];
    let moved = shifted(alpha, &l2);
    if !chart.domain.contains(&moved) {
        return Err(Error::ChartTransition { chart: chart.id });
    }
    let (zm, jm) = chart.eval_unchecked(&moved);
    let ntm = normal_tilde_from_jacobian(&jm, chart.param_dim());
    let residual = (zm + ntm * lam[2] - target).norm();
    let contraction =
        increments.windows(2).filter(|w| w[0] > 1e3 * f64::EPSILON * scale).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    Ok(NormalCoords { lambda: l2, mu: lam[2], residual, iterations, lambda_norm: lam.norm(), h_norm, contraction, increments })
}

/// Smallness threshold for |𝐡| used to declare a case admissible.
pub fn smallness_threshold(norms: &DomainNorms) -> f64 {
    0.1 * norms.delta_cut
}

/// Regime of a pair of points relative to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    OnBoundary,
    NearBoundaryNormalish,
    NearBoundaryTangentialish,
    Far,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::OnBoundary => "on_boundary",
            RegimeTag::NearBoundaryNormalish => "near_boundary_normalish",
            RegimeTag::NearBoundaryTangentialish => "near_boundary_tangentialish",
            RegimeTag::Far => "far",
        }
    }
}

/// Classification of a pair (x, x + h) with x the point closer to ∂D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRegime {
    pub tag: RegimeTag,
    /// Distance d(x, ∂D) of the closer point.
    pub delta: f64,
    /// Coefficient of Ñ in x = Z(α) ± δ_coef Ñ(α).
    pub delta_coef: f64,
    pub chart: usize,
    pub alpha: [f64; 2],
    /// Normal coefficient of h, oriented away from the boundary on x's side.
    pub h_n: f64,
    pub h_tau: [f64; 2],
    pub side: Side,
    /// True when the input order was exchanged to make x the closer point.
    pub swapped: bool,
}

/// Case test |h_τ| ≤ (1/4)(dz_inf/lip)·δ, with δ the Ñ coefficient.
pub fn is_normalish(h_tau_norm: f64, delta_coef: f64, norms: &DomainNorms, h_len: f64) -> bool {
    h_tau_norm <= 0.25 * norms.dz_inf / norms.lip * delta_coef + 1e-12 * h_len
}

/// Classifies a pair of points; `far_cut` is the distance beyond which both
/// points count as far from the boundary.
pub fn classify_regime(atlas: &Atlas, norms: &DomainNorms, p: &Vec3, q: &Vec3, far_cut: f64) -> Result<EvalRegime> {
    let fp = atlas.foot_point(p)?;
    let fq = atlas.foot_point(q)?;
    let opposite = matches!((fp.side, fq.side), (Side::Interior, Side::Exterior) | (Side::Exterior, Side::Interior));
    if opposite {
        return Err(Error::Classification("points lie on opposite sides of the boundary".into()));
    }
    let swapped = fq.distance < fp.distance;
    let (x, y, fx, fy) = if swapped { (q, p, fq, fp) } else { (p, q, fp, fq) };
    let side = if fx.side == Side::Boundary { fy.side } else { fx.side };
    let sign = if side == Side::Exterior { -1.0 } else { 1.0 };
    let chart = atlas.chart(fx.chart);
    let jac = chart.eval_unchecked(&fx.alpha).1;
    let nt_len = normal_tilde_from_jacobian(&jac, chart.param_dim()).norm();
    let delta_coef = fx.distance / nt_len;
    let h = y - x;
    let dec = decompose_offset(chart, &fx.alpha, &h)?;
    let h_n = sign * dec.h_n;
    let tag = if fx.distance >= far_cut {
        RegimeTag::Far
    } else if fx.side == Side::Boundary && fy.side == Side::Boundary {
        RegimeTag::OnBoundary
    } else if is_normalish(dec.h_tau_norm(), delta_coef, norms, h.norm()) {
        RegimeTag::NearBoundaryNormalish
    } else {
        RegimeTag::NearBoundaryTangentialish
    };
    Ok(EvalRegime { tag, delta: fx.distance, delta_coef, chart: fx.chart, alpha: fx.alpha, h_n, h_tau: dec.h_tau, side, swapped })
}

/// Result of checking h_n ≥ −δ/4 − |h_τ|/4 on a set of cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HnFloorReport {
    pub samples: usize,
    pub violations: usize,
    /// Minimum of h_n − (−δ/4 − |h_τ|/4).
    pub worst_margin: f64,
}

/// Checks the lower bound on h_n for cases (δ, h_n, |h_τ|).
pub fn hn_floor_check(cases: &[(f64, f64, f64)]) -> HnFloorReport {
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for &(delta, h_n, h_tau) in cases {
        let margin = h_n + 0.25 * delta + 0.25 * h_tau;
        if margin < -1e-15 * (delta + h_tau) {
            violations += 1;
        }
        worst = worst.min(margin);
    }
    HnFloorReport { samples: cases.len(), violations, worst_margin: worst }
}

/// Limits for randomly generated near-boundary cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseLimits {
    /// Largest Ñ coefficient δ of the base point.
    pub delta_max: f64,
    /// Largest |𝐡| = |(h_τ, h_n + δ)|.
    pub h_max: f64,
}

impl CaseLimits {
    /// The configured cutoffs: δ ≤ delta_cut and |𝐡| below the smallness threshold.
    pub fn from_norms(norms: &DomainNorms) -> Self {
        let t = smallness_threshold(norms);
        Self { delta_max: t.min(norms.delta_cut), h_max: t }
    }
}

/// One solved near-boundary case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedCase {
    pub chart: usize,
    pub alpha: [f64; 2],
    pub delta: f64,
    pub offset: OffsetDecomposition,
    pub coords: NormalCoords,
    /// μ|Ñ(α+λ)| − δ|Ñ(α)|, non-negative under the distance ordering.
    pub mu_margin: f64,
}

/// Random interior cases x = Z(α) + δÑ(α), x + h with the ordering
/// d(x + h, ∂D) ≥ d(x, ∂D) enforced by sampling h until it holds.
pub fn sample_cases(atlas: &Atlas, limits: &CaseLimits, count: usize, seed: u64) -> Result<Vec<SolvedCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let opts = SolverOptions::default();
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 50 * count + 1000 {
            return Err(Error::Solver("could not generate enough admissible cases".into()));
        }
        let chart = &atlas.charts[rng.gen_range(0..atlas.charts.len())];
        let dim = chart.param_dim();
        let mut alpha = [0.0; 2];
        for i in 0..dim {
            alpha[i] = rng.gen_range(chart.core.lo[i]..chart.core.hi[i]);
        }
        let delta = limits.delta_max * rng.gen_range(0.05..1.0);
        let jac = chart.eval_unchecked(&alpha).1;
        let nt = normal_tilde_from_jacobian(&jac, dim);
        let base = chart.z_unchecked(&alpha) + nt * delta;
        // h with |𝐡| ≤ h_max: draw the frame coefficients directly.
        let radius = limits.h_max * rng.gen_range(0.0f64..1.0).powf(1.0 / 3.0);
        let mut c = [0.0f64; 3];
        for v in c.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        if dim == 1 {
            c[1] = 0.0;
        }
        let cn = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if cn == 0.0 {
            continue;
        }
        let mut hv = [c[0] / cn * radius, c[1] / cn * radius, c[2] / cn * radius];
        // hv[2] is h_n + δ.
        if hv[2] <= 0.0 {
            hv[2] = -hv[2];
        }
        let h_n = hv[2] - delta;
        let h = jac.column(0) * hv[0] + jac.column(1) * hv[1] + nt * h_n;
        let h: Vec3 = h.into();
        let target = base + h;
        let (d_base, d_target) = if atlas.shape.is_some() {
            if !atlas.contains(&target)? {
                continue;
            }
            (atlas.foot_point(&base)?.distance, atlas.foot_point(&target)?.distance)
        } else {
            (delta * nt.norm(), (target - chart.z_unchecked(&alpha)).dot(&nt.normalize()))
        };
        if d_target < d_base {
            continue;
        }
        let coords = match solve_normal_coords(chart, &alpha, delta, &h, &opts) {
            Ok(c) => c,
            Err(Error::ChartTransition { .. }) => continue,
            Err(e) => return Err(e),
        };
        let moved = shifted(&alpha, &coords.lambda);
        let ntm = normal_tilde_from_jacobian(&chart.eval_unchecked(&moved).1, dim).norm();
        let mu_margin = coords.mu * ntm - delta * nt.norm();
        out.push(SolvedCase {
            chart: chart.id,
            alpha,
            delta,
            offset: OffsetDecomposition { h_n, h_tau: [hv[0], hv[1]] },
            coords,
            mu_margin,
        });
    }
    Ok(out)
}
