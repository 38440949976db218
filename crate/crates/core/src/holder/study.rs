//! Structural bound factors, the linearity study and normal-ray profiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{Evaluator, Field, FieldEvaluator};
use super::pairs::{holder_scan, PairConfig, RegimeReport};
use crate::error::{Error, Result};
use crate::geometry::{norms, Atlas, DomainFamily, DomainNorms, SamplingConfig, Side};
use crate::kernels::HomogeneousKernel;
use crate::quadrature::halton;
use crate::sboundary::{Density, SurfacePoint};

/// Sampled norms of a boundary density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityNorms {
    pub sup: f64,
    pub seminorm: f64,
    /// sup + seminorm.
    pub c_sigma: f64,
}

/// ‖f‖_∞ and the Ċ^σ seminorm of `f` over boundary pairs: all pairs among
/// `points` quasi-random nodes plus a short neighbour of every node.
pub fn density_norms(atlas: &Atlas, f: &Density, sigma: f64, points: usize) -> DensityNorms {
    let nodes: Vec<SurfacePoint> =
        atlas.surface_samples(points).into_iter().map(|(c, a)| SurfacePoint::at(atlas.chart(c), &a)).collect();
    let vals: Vec<f64> = nodes.iter().map(|p| f.eval(p)).collect();
    let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut semi = 0.0f64;
    for i in 0..nodes.len() {
        for j in 0..i {
            let d = (nodes[i].point - nodes[j].point).norm();
            if d > 0.0 {
                semi = semi.max((vals[i] - vals[j]).abs() / d.powf(sigma));
            }
        }
    }
    for (k, p) in nodes.iter().enumerate() {
        let chart = atlas.chart(p.chart);
        let u = halton(k as u64, 2);
        let step = 1e-3 * (1.0 + 99.0 * u[0]);
        let t = std::f64::consts::TAU * u[1];
        let alpha = [p.alpha[0] + step * t.cos(), p.alpha[1] + if chart.param_dim() == 2 { step * t.sin() } else { 0.0 }];
        if !chart.domain.contains(&alpha) {
            continue;
        }
        let q = SurfacePoint::at(chart, &alpha);
        let d = (q.point - p.point).norm();
        if d > 0.0 {
            semi = semi.max((f.eval(&q) - vals[k]).abs() / d.powf(sigma));
        }
    }
    DensityNorms { sup, seminorm: semi, c_sigma: sup + semi }
}

/// Which right-hand side the bound factor refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BoundMode {
    /// S(f) with the density's C^σ and sup norms.
    S { c_sigma: f64, sup: f64 },
    /// T(1_D).
    T,
}

/// (1 + |∂D|)(‖f‖_{C^σ} + ‖f‖_∞‖D‖_{Ċ^{1+σ}}), with f ≡ 1 for T(1_D). The
/// unspecified constant multiplying it is not included.
pub fn bound_factor(norms: &DomainNorms, mode: BoundMode) -> f64 {
    let (c_sigma, sup) = match mode {
        BoundMode::S { c_sigma, sup } => (c_sigma, sup),
        BoundMode::T => (1.0, 1.0),
    };
    (1.0 + norms.area) * (c_sigma + sup * norms.holder_1s)
}

/// One member of the linearity study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityRow {
    pub amplitude: f64,
    pub holder_1s: f64,
    pub area: f64,
    pub factor: f64,
    /// Maximum over regimes and sides.
    pub seminorm: f64,
    pub ratio: f64,
    pub regimes: Vec<RegimeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityTable {
    pub kernel: String,
    pub sigma: f64,
    pub rows: Vec<LinearityRow>,
    /// Least-squares fit seminorm ≈ intercept + slope·‖D‖_{Ċ^{1+σ}}.
    pub slope: f64,
    pub intercept: f64,
    /// max ratio / min ratio.
    pub band: f64,
}

/// Least-squares line through (x, y); returns (slope, intercept, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Quadrature settings shared by the studies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StudyQuadrature {
    pub refined: bool,
}

/// T(1_D) seminorms over the bumped-sphere family of the given amplitudes.
pub fn linearity_study(
    kernel: &HomogeneousKernel,
    radius: f64,
    frequency: f64,
    amplitudes: &[f64],
    pairs: &PairConfig,
    sampling: &SamplingConfig,
    quad: StudyQuadrature,
) -> Result<LinearityTable> {
    if amplitudes.len() < 2 {
        return Err(Error::config("study.amplitudes", "need at least two family members"));
    }
    let mut rows = Vec::with_capacity(amplitudes.len());
    for &amplitude in amplitudes {
        let atlas = Atlas::from_family(&DomainFamily::BumpedSphere { radius, amplitude, frequency })?;
        let dn = norms(&atlas, pairs.sigma, sampling, None)?;
        let mut u = FieldEvaluator::new(Field::Patch(kernel.clone()), &atlas)?;
        if quad.refined {
            u = u.refined();
        }
        let regimes = holder_scan(&u, &atlas, &dn, pairs)?;
        let seminorm = regimes.iter().map(|r| r.max).fold(0.0, f64::max);
        let factor = bound_factor(&dn, BoundMode::T);
        rows.push(LinearityRow {
            amplitude,
            holder_1s: dn.holder_1s,
            area: dn.area,
            factor,
            seminorm,
            ratio: seminorm / factor,
            regimes,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.holder_1s).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.seminorm).collect();
    let (slope, intercept, _) = linear_fit(&xs, &ys);
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let band = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Ok(LinearityTable { kernel: kernel.name().to_string(), sigma: pairs.sigma, rows, slope, intercept, band })
}

/// Boundedness verdict of a normal-ray profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileClass {
    Bounded,
    LogDivergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub side: Side,
    pub points: Vec<(f64, f64)>,
    /// Fit value ≈ c1 + c2·log(1/δ).
    pub c1: f64,
    pub c2: f64,
    pub r2: f64,
    /// 0.02·|c1| + 0.01.
    pub threshold: f64,
    pub class: ProfileClass,
}

/// Values along x = Z(α) ± δN(α) with N the inward unit normal, and the log fit.
pub fn linf_profile<E: Evaluator + ?Sized>(
    u: &E,
    atlas: &Atlas,
    chart: usize,
    alpha: &[f64; 2],
    side: Side,
    deltas: &[f64],
) -> Result<Profile> {
    if deltas.len() < 2 || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::config("profile.deltas", "need at least two positive distances"));
    }
    let sign = match side {
        Side::Interior => 1.0,
        Side::Exterior => -1.0,
        Side::Boundary => return Err(Error::Parameter("profiles run into the interior or the exterior".into())),
    };
    let c = atlas.charts.get(chart).ok_or_else(|| Error::Parameter(format!("no chart {chart}")))?;
    let p = SurfacePoint::at(c, alpha);
    let points: Vec<(f64, f64)> =
        deltas.par_iter().map(|&d| Ok((d, u.value(&(p.point + p.normal * (sign * d)))?))).collect::<Result<_>>()?;
    let xs: Vec<f64> = points.iter().map(|(d, _)| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
    let (c2, c1, r2) = linear_fit(&xs, &ys);
    let threshold = 0.02 * c1.abs() + 0.01;
    let class = if c2.abs() <= threshold { ProfileClass::Bounded } else { ProfileClass::LogDivergent };
    Ok(Profile { side, points, c1, c2, r2, threshold, class })
}

/// `count` log-spaced distances in [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect()
}
