use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::atlas::Atlas;
use super::chart::{normal_tilde_from_jacobian, Chart, Jacobian, Vec3};
use crate::error::{Error, Result};
use crate::quadrature::halton;

/// Sample sizes for the norm estimators (per chart).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Quasi-random parameter points for derivative sups/infs.
    pub points: usize,
    /// Quasi-random parameter pairs at all separations.
    pub pairs: usize,
    /// Additional pairs at log-uniform separations down to 1e-4·diam.
    pub short_pairs: usize,
    /// Per-axis size of the regular derivative grid.
    pub grid: usize,
    /// Boundary points used for the reach and diameter estimates.
    pub surface_points: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { points: 4096, pairs: 65536, short_pairs: 16384, grid: 33, surface_points: 1200 }
    }
}

impl SamplingConfig {
    /// Every count multiplied by `factor` (grid by its square root).
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |n: usize| ((n as f64) * factor).round().max(2.0) as usize;
        Self {
            points: s(self.points),
            pairs: s(self.pairs),
            short_pairs: s(self.short_pairs),
            grid: ((self.grid as f64) * factor.sqrt()).round().max(2.0) as usize,
            surface_points: s(self.surface_points),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 || self.pairs < 2 || self.grid < 2 || self.surface_points < 8 {
            return Err(Error::config("sampling", "sample counts too small (need ≥ 2 points and pairs)"));
        }
        Ok(())
    }
}

/// Geometric norms of a domain and the cutoffs derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainNorms {
    /// Arc-chord constant, the reciprocal of `dz_inf`.
    pub star: f64,
    /// Lipschitz constant of the charts (sup of |∂Z v|/|v| and chord quotients).
    pub lip: f64,
    /// Hölder seminorm of order `sigma` of the chart Jacobians.
    pub holder_1s: f64,
    pub sigma: f64,
    /// Infimum of chord quotients and per-direction derivative lengths.
    pub dz_inf: f64,
    /// Surface measure of the boundary.
    pub area: f64,
    pub eta: f64,
    pub eta_bar: f64,
    pub delta_cut: f64,
    pub far_cut: f64,
    pub reach: f64,
    pub diameter: f64,
}

impl DomainNorms {
    /// Recomputes the derived cutoffs for a different η.
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self.eta_bar = eta_bar(eta, self.star, self.lip);
        self
    }
}

pub fn eta_bar(eta: f64, star: f64, lip: f64) -> f64 {
    eta / (4.0 * (1.0 + star) * (1.0 + lip))
}

/// Normal-distance cutoff (1/6)(dz_inf/(18 holder))^{1/σ} (dz_inf/lip)^{1/2}.
pub fn delta_cutoff(dz_inf: f64, lip: f64, holder: f64, sigma: f64) -> f64 {
    if holder == 0.0 {
        return f64::INFINITY;
    }
    (dz_inf / (18.0 * holder)).powf(1.0 / sigma) * (dz_inf / lip).sqrt() / 6.0
}

/// Far-field cutoff (1/6)(dz_inf/(18 holder))^{1/σ} (lip/dz_inf)^{1/2}.
pub fn far_cutoff(dz_inf: f64, lip: f64, holder: f64, sigma: f64) -> f64 {
    if holder == 0.0 {
        return f64::INFINITY;
    }
    (dz_inf / (18.0 * holder)).powf(1.0 / sigma) * (lip / dz_inf).sqrt() / 6.0
}

/// Per-chart sampled extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartExtremes {
    pub chart: usize,
    pub arc_chord_min: f64,
    pub direction_inf: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub chord_max: f64,
    pub holder: f64,
}

impl ChartExtremes {
    pub fn dz_inf(&self) -> f64 {
        self.arc_chord_min.min(self.direction_inf).min(self.sigma_min)
    }

    pub fn lip(&self) -> f64 {
        self.sigma_max.max(self.chord_max)
    }
}

fn singular_values(jac: &Jacobian, param_dim: usize) -> (f64, f64) {
    if param_dim == 1 {
        let n = jac.column(0).norm();
        return (n, n);
    }
    let g = jac.transpose() * jac;
    let (a, b, c) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    ((mean - rad).max(0.0).sqrt(), (mean + rad).sqrt())
}

/// Parameter pairs: quasi-random over the full domain, then short pairs at
/// log-uniform separations around quasi-random base points.
fn sample_pairs(chart: &Chart, sampling: &SamplingConfig) -> Vec<([f64; 2], [f64; 2])> {
    let dim = chart.param_dim();
    let dom = chart.domain;
    let diam = (0..dim).map(|i| dom.width(i).powi(2)).sum::<f64>().sqrt();
    let mut out = Vec::with_capacity(sampling.pairs + sampling.short_pairs);
    for i in 0..sampling.pairs {
        let u = halton(i as u64, 2 * dim);
        let a = dom.from_unit(&u[..dim]);
        let b = dom.from_unit(&u[dim..]);
        out.push((a, b));
    }
    for i in 0..sampling.short_pairs {
        let u = halton(i as u64, 4);
        let a = dom.from_unit(&u[..dim]);
        let r = diam * 10f64.powf(-4.0 * u[3]);
        let b = if dim == 1 {
            [a[0] + if u[2] < 0.5 { r } else { -r }, 0.0]
        } else {
            let th = std::f64::consts::TAU * u[2];
            [a[0] + r * th.cos(), a[1] + r * th.sin()]
        };
        if dom.contains(&b) {
            out.push((a, b));
        }
    }
    out
}

fn param_points(chart: &Chart, sampling: &SamplingConfig) -> Vec<[f64; 2]> {
    let dim = chart.param_dim();
    let dom = chart.domain;
    let mut pts: Vec<[f64; 2]> = (0..sampling.points).map(|i| dom.from_unit(&halton(i as u64, dim))).collect();
    let g = sampling.grid;
    let step = |k: usize| k as f64 / (g - 1) as f64;
    if dim == 1 {
        pts.extend((0..g).map(|k| dom.from_unit(&[step(k)])));
    } else {
        for k in 0..g {
            for l in 0..g {
                pts.push(dom.from_unit(&[step(k), step(l)]));
            }
        }
    }
    pts
}

/// Minimum of |Z(α) − Z(β)|/|α − β| over the pairs together with the
/// per-direction infima inf_α |∂_{α_i}Z(α)| over the points.
pub fn arc_chord_min(chart: &Chart, pairs: &[([f64; 2], [f64; 2])], points: &[[f64; 2]]) -> Result<f64> {
    if pairs.is_empty() && points.len() < 2 {
        return Err(Error::config("sampling", "need at least two sample points"));
    }
    let mut m = f64::INFINITY;
    for (a, b) in pairs {
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        if d > 0.0 {
            m = m.min((chart.z_unchecked(a) - chart.z_unchecked(b)).norm() / d);
        }
    }
    for a in points {
        let jac = chart.eval_unchecked(a).1;
        for i in 0..chart.param_dim() {
            m = m.min(jac.column(i).norm());
        }
    }
    Ok(m)
}

/// Sampled extremes of one chart.
pub fn chart_extremes(chart: &Chart, sigma: f64, sampling: &SamplingConfig) -> ChartExtremes {
    let dim = chart.param_dim();
    let points = param_points(chart, sampling);
    let mut direction_inf = f64::INFINITY;
    let mut sigma_min = f64::INFINITY;
    let mut sigma_max: f64 = 0.0;
    for a in &points {
        let jac = chart.eval_unchecked(a).1;
        for i in 0..dim {
            direction_inf = direction_inf.min(jac.column(i).norm());
        }
        let (lo, hi) = singular_values(&jac, dim);
        sigma_min = sigma_min.min(lo);
        sigma_max = sigma_max.max(hi);
    }
    let pairs = sample_pairs(chart, sampling);
    let mut arc_chord = f64::INFINITY;
    let mut chord_max: f64 = 0.0;
    let mut holder: f64 = 0.0;
    for (a, b) in &pairs {
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        if d == 0.0 {
            continue;
        }
        let (za, ja) = chart.eval_unchecked(a);
        let (zb, jb) = chart.eval_unchecked(b);
        let q = (za - zb).norm() / d;
        arc_chord = arc_chord.min(q);
        chord_max = chord_max.max(q);
        holder = holder.max((ja - jb).norm() / d.powf(sigma));
    }
    ChartExtremes { chart: chart.id, arc_chord_min: arc_chord, direction_inf, sigma_min, sigma_max, chord_max, holder }
}

/// Reach (normal injectivity radius) and diameter estimates from boundary
/// samples: reach ≈ min |q − p|² / (2 |ν_p·(q − p)|).
pub fn reach_and_diameter(atlas: &Atlas, samples: usize) -> (f64, f64) {
    let pts: Vec<(Vec3, Vec3)> = atlas
        .surface_samples(samples)
        .into_iter()
        .map(|(c, a)| {
            let chart = atlas.chart(c);
            let (z, jac) = chart.eval_unchecked(&a);
            (z, super::chart::normal_from_jacobian(&jac, chart.param_dim()).normalize())
        })
        .collect();
    let (reach, diam) = pts
        .par_iter()
        .map(|(p, nu)| {
            let mut r = f64::INFINITY;
            let mut d: f64 = 0.0;
            for (q, _) in &pts {
                let v = q - p;
                let n2 = v.norm_squared();
                if n2 == 0.0 {
                    continue;
                }
                d = d.max(n2.sqrt());
                let s = nu.dot(&v).abs();
                if s > 0.0 {
                    r = r.min(n2 / (2.0 * s));
                }
            }
            (r, d)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    (reach, diam)
}

/// Default η = min(0.25·reach, 0.2·diameter).
pub fn default_eta(reach: f64, diameter: f64) -> f64 {
    (0.25 * reach).min(0.2 * diameter)
}

/// All norms of the atlas; `eta` overrides the default boundary cutoff.
pub fn norms(atlas: &Atlas, sigma: f64, sampling: &SamplingConfig, eta: Option<f64>) -> Result<DomainNorms> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::config("sigma", "Hölder exponent must lie in (0, 1)"));
    }
    sampling.validate()?;
    let per_chart: Vec<ChartExtremes> = atlas.charts.par_iter().map(|c| chart_extremes(c, sigma, sampling)).collect();
    let mut dz_inf = f64::INFINITY;
    let mut lip: f64 = 0.0;
    let mut holder: f64 = 0.0;
    for e in &per_chart {
        let d = e.dz_inf();
        if !(d > 1e-12) {
            return Err(Error::Geometry { chart: e.chart, reason: format!("degenerate chart, |∂Z|_inf = {d:e}") });
        }
        dz_inf = dz_inf.min(d);
        lip = lip.max(e.lip());
        holder = holder.max(e.holder);
    }
    let star = 1.0 / dz_inf;
    let area = atlas.area();
    let (reach, diameter) = reach_and_diameter(atlas, sampling.surface_points);
    let eta = match eta {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(_) => return Err(Error::config("eta", "η must be positive and finite")),
        None => default_eta(reach, diameter),
    };
    Ok(DomainNorms {
        star,
        lip,
        holder_1s: holder,
        sigma,
        dz_inf,
        area,
        eta,
        eta_bar: eta_bar(eta, star, lip),
        delta_cut: delta_cutoff(dz_inf, lip, holder, sigma),
        far_cut: far_cutoff(dz_inf, lip, holder, sigma),
        reach,
        diameter,
    })
}

/// Result of sampling the denominator lower bound
/// |∂Z(ξ)(α − γ)| ≥ |α − γ| / (star²·lip).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenominatorReport {
    pub samples: usize,
    pub violations: usize,
    /// Minimum of lhs/rhs over the samples (≥ 1 when the bound holds).
    pub worst_margin: f64,
    pub witness: Option<([f64; 2], [f64; 2], [f64; 2])>,
}

/// Samples triples (ξ, α, γ) quasi-randomly over the chart domain.
pub fn check_denominator_bound(chart: &Chart, norms: &DomainNorms, samples: usize) -> DenominatorReport {
    let dim = chart.param_dim();
    let dom = chart.domain;
    let bound = 1.0 / (norms.star * norms.star * norms.lip);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut violations = 0;
    for i in 0..samples {
        let u = halton(i as u64, 3 * dim);
        let xi = dom.from_unit(&u[..dim]);
        let a = dom.from_unit(&u[dim..2 * dim]);
        let g = dom.from_unit(&u[2 * dim..]);
        let v = nalgebra::Vector2::new(a[0] - g[0], a[1] - g[1]);
        let len = v.norm();
        if len == 0.0 {
            continue;
        }
        let jac = chart.eval_unchecked(&xi).1;
        let lhs = (jac * v).norm();
        let margin = lhs / (bound * len);
        if margin < 1.0 {
            violations += 1;
        }
        if margin < worst {
            worst = margin;
            if margin < 1.0 {
                witness = Some((xi, a, g));
            }
        }
    }
    DenominatorReport { samples, violations, worst_margin: worst, witness }
}

/// Checks lip ≥ |Ñ(α)| ≥ star^{-3/2}·lip^{-1/2} at quasi-random parameters;
/// returns the number of violations and the extreme values of |Ñ|.
pub fn check_normal_tilde_bounds(chart: &Chart, norms: &DomainNorms, samples: usize) -> (usize, f64, f64) {
    let lower = norms.star.powf(-1.5) * norms.lip.powf(-0.5);
    let mut bad = 0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..samples {
        let a = chart.domain.from_unit(&halton(i as u64, chart.param_dim()));
        let jac = chart.eval_unchecked(&a).1;
        let n = normal_tilde_from_jacobian(&jac, chart.param_dim()).norm();
        lo = lo.min(n);
        hi = hi.max(n);
        if n > norms.lip * (1.0 + 1e-12) || n < lower * (1.0 - 1e-12) {
            bad += 1;
        }
    }
    (bad, lo, hi)
}
