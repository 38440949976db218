//! One-sided point pairs in the three regimes and the empirical seminorm.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{BoundaryValues, Evaluator};
use crate::error::{Error, Result};
use crate::geometry::{Atlas, DomainNorms, RadialShape, Side, Vec3};
use crate::normalcoords::{classify_regime, RegimeTag};
use crate::quadrature::halton;

/// Regime of a pair study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Both points on ∂D, one-sided boundary values.
    OnBoundary,
    /// Closer point within the far cutoff of ∂D.
    Near,
    /// Both points at least the far cutoff away from ∂D.
    Far,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::OnBoundary, Regime::Near, Regime::Far];

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::OnBoundary => "on_boundary",
            Regime::Near => "near",
            Regime::Far => "far",
        }
    }
}

/// Sampling controls of a seminorm estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairConfig {
    pub sigma: f64,
    /// Pairs per regime and side.
    pub pairs: usize,
    pub h_min: f64,
    pub h_max: f64,
    /// Smallest distance to ∂D of a near-regime base point.
    pub delta_min: f64,
    /// Far cutoff; `None` uses 0.1·diameter.
    pub far_cut: Option<f64>,
    pub seed: u64,
    /// Largest quotients of each |h| band refined by compass search.
    pub polish: usize,
    /// Same for on-boundary pairs, whose traces are costlier.
    pub boundary_polish: usize,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            sigma: 0.5,
            pairs: 64,
            h_min: 1e-3,
            h_max: 1e-1,
            delta_min: 1e-3,
            far_cut: None,
            seed: 7,
            polish: 2,
            boundary_polish: 0,
        }
    }
}

impl PairConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::config("holder.sigma", "must lie in (0, 1)"));
        }
        if self.pairs == 0 {
            return Err(Error::config("holder.pairs", "must be positive"));
        }
        if !(self.h_min > 0.0 && self.h_min < self.h_max) {
            return Err(Error::config("holder.h_min", "need 0 < h_min < h_max"));
        }
        if !(self.delta_min > 0.0) {
            return Err(Error::config("holder.delta_min", "must be positive"));
        }
        if let Some(l) = self.far_cut {
            if !(l > 0.0) {
                return Err(Error::config("holder.far_cut", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn far_cut_for(&self, norms: &DomainNorms) -> f64 {
        self.far_cut.unwrap_or(0.1 * norms.diameter)
    }
}

/// A generated pair; `x` is the point closer to ∂D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPoints {
    pub tag: RegimeTag,
    pub x: Vec3,
    pub y: Vec3,
    /// Inward unit normals at x and y (on-boundary pairs).
    pub normals: Option<(Vec3, Vec3)>,
}

/// An evaluated pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub tag: RegimeTag,
    pub side: Side,
    pub x: Vec3,
    pub y: Vec3,
    pub h: f64,
    pub ux: f64,
    pub uy: f64,
    pub quotient: f64,
}

/// Empirical seminorm of one regime and side (a lower bound on the true
/// seminorm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub side: Side,
    pub pairs: usize,
    pub normalish: usize,
    pub tangentialish: usize,
    /// Maximum quotient.
    pub max: f64,
    /// 90th percentile of the quotients.
    pub top_decile: f64,
    /// Maximum over pairs with |h| ≤ 1e-2.
    pub small_band_max: f64,
    /// Maximum over pairs with 1e-2 < |h| ≤ 1e-1.
    pub large_band_max: f64,
    pub argmax: Option<PairSample>,
}

impl RegimeReport {
    /// small_band_max / large_band_max (0 when both vanish).
    pub fn growth(&self) -> f64 {
        if self.small_band_max == 0.0 {
            0.0
        } else {
            self.small_band_max / self.large_band_max
        }
    }
}

/// Cranley–Patterson rotation of the Halton sequence; nested in `count`.
fn shifted_halton(index: u64, dim: usize, shift: &[f64]) -> Vec<f64> {
    halton(index, dim).into_iter().zip(shift).map(|(u, s)| (u + s).fract()).collect()
}

fn unit_direction(dim: usize, a: f64, b: f64) -> Vec3 {
    if dim == 2 {
        let t = TAU * a;
        return Vec3::new(t.cos(), t.sin(), 0.0);
    }
    let z = 2.0 * a - 1.0;
    let s = (1.0 - z * z).max(0.0).sqrt();
    let t = TAU * b;
    Vec3::new(s * t.cos(), s * t.sin(), z)
}

fn log_uniform(lo: f64, hi: f64, u: f64) -> f64 {
    lo * (hi / lo).powf(u)
}

fn radial_projection(shape: &RadialShape, p: &Vec3) -> Option<Vec3> {
    shape.direction_of(p).map(|w| shape.point(&w))
}

/// Maps points of [0, 1)^6 to admissible pairs of one regime and side.
struct PairGenerator<'a> {
    atlas: &'a Atlas,
    norms: &'a DomainNorms,
    shape: RadialShape,
    regime: Regime,
    side: Side,
    config: PairConfig,
    far_cut: f64,
}

impl<'a> PairGenerator<'a> {
    fn new(atlas: &'a Atlas, norms: &'a DomainNorms, regime: Regime, side: Side, config: &PairConfig) -> Result<Self> {
        config.validate()?;
        let shape = atlas.shape.ok_or_else(|| Error::Parameter("pair sampling needs a closed atlas".into()))?;
        if side == Side::Boundary {
            return Err(Error::Parameter("pairs lie on the interior or the exterior side".into()));
        }
        let mut config = *config;
        if regime == Regime::OnBoundary {
            config.polish = config.boundary_polish;
        }
        Ok(Self { atlas, norms, shape, regime, side, config, far_cut: config.far_cut_for(norms) })
    }

    /// Coordinates: boundary location (2), direction of h (2), log|h| (1),
    /// distance to ∂D (1).
    fn pair(&self, u: &[f64; 6]) -> Result<Option<PairPoints>> {
        let (atlas, far_cut) = (self.atlas, self.far_cut);
        let sign = if self.side == Side::Interior { 1.0 } else { -1.0 };
        let y0 = self.shape.point(&unit_direction(atlas.dim, u[0], u[1]));
        let foot = atlas.foot_point(&y0)?;
        let normal = foot.normal;
        let d = unit_direction(atlas.dim, u[2], u[3]);
        let h = log_uniform(self.config.h_min, self.config.h_max, u[4]);
        if self.regime == Regime::OnBoundary {
            let t = d - normal * d.dot(&normal);
            if t.norm() < 1e-3 {
                return Ok(None);
            }
            let Some(y1) = radial_projection(&self.shape, &(foot.point + t.normalize() * h)) else { return Ok(None) };
            let f1 = atlas.foot_point(&y1)?;
            return Ok(Some(PairPoints {
                tag: RegimeTag::OnBoundary,
                x: foot.point,
                y: f1.point,
                normals: Some((normal, f1.normal)),
            }));
        }
        let dist = if self.regime == Regime::Near {
            log_uniform(self.config.delta_min, 0.5 * far_cut, u[5])
        } else {
            let reach = if self.side == Side::Interior { 0.4 } else { 0.5 } * self.norms.diameter;
            far_cut + u[5] * (reach - far_cut).max(0.0)
        };
        let x = foot.point + normal * (sign * dist);
        // Steer h away from the boundary when it points towards it.
        let away = normal * sign;
        let d = if d.dot(&away) < 0.0 { d - away * (2.0 * d.dot(&away)) } else { d };
        let y = x + d * h;
        let (fx, fy) = (atlas.foot_point(&x)?, atlas.foot_point(&y)?);
        if fx.side != self.side || fy.side != self.side {
            return Ok(None);
        }
        let closer = fx.distance.min(fy.distance);
        let admissible = match self.regime {
            Regime::Near => fx.distance.max(fy.distance) < far_cut,
            _ => closer >= far_cut,
        };
        if !admissible {
            return Ok(None);
        }
        let tag =
            if self.regime == Regime::Far { RegimeTag::Far } else { classify_regime(atlas, self.norms, &x, &y, far_cut)?.tag };
        let (x, y) = if fy.distance < fx.distance { (y, x) } else { (x, y) };
        Ok(Some(PairPoints { tag, x, y, normals: None }))
    }

    fn generate(&self) -> Result<Vec<([f64; 6], PairPoints)>> {
        let c = &self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed ^ (self.regime as u64) << 8 ^ (self.side as u64) << 16);
        let shift: Vec<f64> = (0..6).map(|_| rng.gen::<f64>()).collect();
        let mut out = Vec::with_capacity(c.pairs);
        let limit = 200 * c.pairs as u64 + 1000;
        let mut index = 0u64;
        while out.len() < c.pairs {
            if index > limit {
                return Err(Error::Parameter(format!(
                    "could not place {} {} pairs (far cutoff {})",
                    c.pairs,
                    self.regime.as_str(),
                    self.far_cut
                )));
            }
            let v = shifted_halton(index, 6, &shift);
            index += 1;
            let u = [v[0], v[1], v[2], v[3], v[4], v[5]];
            if let Some(p) = self.pair(&u)? {
                out.push((u, p));
            }
        }
        Ok(out)
    }
}

/// Deterministic pairs of one regime and side, nested in `config.pairs`.
/// On-boundary pairs serve both sides.
pub fn generate_pairs(
    atlas: &Atlas,
    norms: &DomainNorms,
    regime: Regime,
    side: Side,
    config: &PairConfig,
) -> Result<Vec<PairPoints>> {
    Ok(PairGenerator::new(atlas, norms, regime, side, config)?.generate()?.into_iter().map(|(_, p)| p).collect())
}

fn sample_of(p: &PairPoints, side: Side, ux: f64, uy: f64, sigma: f64) -> PairSample {
    let h = (p.y - p.x).norm();
    PairSample { tag: p.tag, side, x: p.x, y: p.y, h, ux, uy, quotient: (ux - uy).abs() / h.powf(sigma) }
}

fn evaluate_one<E: Evaluator + ?Sized>(u: &E, p: &PairPoints, side: Side, sigma: f64) -> Result<PairSample> {
    let pick = |b: BoundaryValues| if side == Side::Interior { b.interior } else { b.exterior };
    let (ux, uy) = match p.normals {
        Some((nx, ny)) => (pick(u.boundary(&p.x, &nx)?), pick(u.boundary(&p.y, &ny)?)),
        None => (u.value(&p.x)?, u.value(&p.y)?),
    };
    Ok(sample_of(p, side, ux, uy, sigma))
}

/// Compass search in generator coordinates from `start`, keeping log|h|
/// inside [lo, hi].
fn polish_one<E: Evaluator + ?Sized>(
    u: &E,
    generator: &PairGenerator,
    start: ([f64; 6], PairSample),
    lo: f64,
    hi: f64,
) -> Result<PairSample> {
    let (mut best_u, mut best) = start;
    let mut step = 1.0 / 32.0;
    for _ in 0..4 {
        for _ in 0..8 {
            let mut improved = false;
            for d in 0..6 {
                for s in [1.0, -1.0] {
                    let mut v = best_u;
                    v[d] += s * step;
                    v[d] = if d == 4 { v[d].clamp(lo, hi) } else { v[d].clamp(0.0, 1.0 - 1e-12) };
                    if v == best_u {
                        continue;
                    }
                    let Some(p) = generator.pair(&v)? else { continue };
                    let c = evaluate_one(u, &p, generator.side, generator.config.sigma)?;
                    if c.quotient > best.quotient {
                        best = c;
                        best_u = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step *= 0.5;
    }
    Ok(best)
}

/// Polishes the `config.polish` largest quotients of each |h| band.
fn polish<E: Evaluator + ?Sized>(
    u: &E,
    generator: &PairGenerator,
    coords: &[[f64; 6]],
    samples: &[PairSample],
) -> Result<Vec<PairSample>> {
    let c = &generator.config;
    if c.polish == 0 {
        return Ok(Vec::new());
    }
    // u[4] of |h| = 1e-2 splits the two bands.
    let split = ((1e-2 / c.h_min).ln() / (c.h_max / c.h_min).ln()).clamp(0.0, 1.0);
    let mut starts = Vec::new();
    for (lo, hi) in [(0.0, split), (split, 1.0 - 1e-12)] {
        let mut idx: Vec<usize> = (0..samples.len()).filter(|&i| coords[i][4] >= lo && coords[i][4] <= hi).collect();
        idx.sort_by(|&a, &b| samples[b].quotient.total_cmp(&samples[a].quotient));
        starts.extend(idx.into_iter().take(c.polish).map(|i| (i, lo, hi)));
    }
    starts.par_iter().map(|&(i, lo, hi)| polish_one(u, generator, (coords[i], samples[i]), lo, hi)).collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// Summarises evaluated pairs.
pub fn summarize(regime: Regime, side: Side, samples: &[PairSample]) -> RegimeReport {
    let mut q: Vec<f64> = samples.iter().map(|s| s.quotient).collect();
    q.sort_by(f64::total_cmp);
    let band = |lo: f64, hi: f64| samples.iter().filter(|s| s.h > lo && s.h <= hi).map(|s| s.quotient).fold(0.0, f64::max);
    let argmax = samples.iter().copied().max_by(|a, b| a.quotient.total_cmp(&b.quotient));
    RegimeReport {
        regime,
        side,
        pairs: samples.len(),
        normalish: samples.iter().filter(|s| s.tag == RegimeTag::NearBoundaryNormalish).count(),
        tangentialish: samples.iter().filter(|s| s.tag == RegimeTag::NearBoundaryTangentialish).count(),
        max: q.last().copied().unwrap_or(0.0),
        top_decile: percentile(&q, 0.9),
        small_band_max: band(0.0, 1e-2),
        large_band_max: band(1e-2, f64::INFINITY),
        argmax,
    }
}

/// Evaluates pairs of one side; on-boundary pairs use the side's one-sided
/// values.
pub fn evaluate_pairs<E: Evaluator + ?Sized>(u: &E, pairs: &[PairPoints], side: Side, sigma: f64) -> Result<Vec<PairSample>> {
    pairs.par_iter().map(|p| evaluate_one(u, p, side, sigma)).collect()
}

/// Empirical Ċ^σ seminorm of `u` over one regime and side.
pub fn empirical_seminorm<E: Evaluator + ?Sized>(
    u: &E,
    atlas: &Atlas,
    norms: &DomainNorms,
    regime: Regime,
    side: Side,
    config: &PairConfig,
) -> Result<RegimeReport> {
    let generator = PairGenerator::new(atlas, norms, regime, side, config)?;
    let (coords, pairs): (Vec<[f64; 6]>, Vec<PairPoints>) = generator.generate()?.into_iter().unzip();
    let mut samples = evaluate_pairs(u, &pairs, side, config.sigma)?;
    let polished = polish(u, &generator, &coords, &samples)?;
    samples.extend(polished);
    Ok(summarize(regime, side, &samples))
}

/// All three regimes on both sides. On-boundary pairs are evaluated once for
/// both sides.
pub fn holder_scan<E: Evaluator + ?Sized>(
    u: &E,
    atlas: &Atlas,
    norms: &DomainNorms,
    config: &PairConfig,
) -> Result<Vec<RegimeReport>> {
    let mut out = Vec::with_capacity(6);
    for regime in Regime::ALL {
        if regime != Regime::OnBoundary {
            for side in [Side::Interior, Side::Exterior] {
                out.push(empirical_seminorm(u, atlas, norms, regime, side, config)?);
            }
            continue;
        }
        let generator = PairGenerator::new(atlas, norms, regime, Side::Interior, config)?;
        let (coords, pairs): (Vec<[f64; 6]>, Vec<PairPoints>) = generator.generate()?.into_iter().unzip();
        let values: Vec<(BoundaryValues, BoundaryValues)> = pairs
            .par_iter()
            .map(|p| {
                let (nx, ny) = p.normals.expect("on-boundary pairs carry normals");
                Ok((u.boundary(&p.x, &nx)?, u.boundary(&p.y, &ny)?))
            })
            .collect::<Result<_>>()?;
        for side in [Side::Interior, Side::Exterior] {
            let mut samples: Vec<PairSample> = pairs
                .iter()
                .zip(&values)
                .map(|(p, (a, b))| match side {
                    Side::Interior => sample_of(p, side, a.interior, b.interior, config.sigma),
                    _ => sample_of(p, side, a.exterior, b.exterior, config.sigma),
                })
                .collect();
            let g = PairGenerator { side, ..PairGenerator::new(atlas, norms, regime, Side::Interior, config)? };
            let polished = polish(u, &g, &coords, &samples)?;
            samples.extend(polished);
            out.push(summarize(regime, side, &samples));
        }
    }
    Ok(out)
}
