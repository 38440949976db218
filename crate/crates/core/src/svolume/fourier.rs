//! Periodic FFT evaluation of T(1_D) through the kernel's Fourier multiplier.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::domain::VolumeDomain;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::kernels::{HomogeneousKernel, MultiplierPlan};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOracleConfig {
    /// Box side; `None` uses four times the bounding radius.
    pub box_side: Option<f64>,
    pub resolution_3d: usize,
    pub resolution_2d: usize,
    /// Gaussian smoothing width of the indicator in grid cells (0 = sharp).
    pub smoothing_cells: f64,
    /// Subsamples per axis for cells cut by the boundary.
    pub subsamples: usize,
    /// Truncate the kernel at half the box side instead of periodizing it.
    /// Values are then free-space values at nodes x with
    /// |x| ≤ box_side/2 − bounding radius.
    pub free_space: bool,
}

impl Default for GridOracleConfig {
    fn default() -> Self {
        Self { box_side: None, resolution_3d: 96, resolution_2d: 128, smoothing_cells: 0.0, subsamples: 4, free_space: false }
    }
}

impl GridOracleConfig {
    pub fn resolution(&self, dim: usize) -> usize {
        if dim == 3 {
            self.resolution_3d
        } else {
            self.resolution_2d
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, n) in [("grid.resolution_3d", self.resolution_3d), ("grid.resolution_2d", self.resolution_2d)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::config(field, "must be an even number ≥ 8"));
            }
        }
        if self.subsamples == 0 {
            return Err(Error::config("grid.subsamples", "must be positive"));
        }
        if !(self.smoothing_cells >= 0.0) {
            return Err(Error::config("grid.smoothing_cells", "must be non-negative"));
        }
        if let Some(b) = self.box_side {
            if !(b > 0.0) {
                return Err(Error::config("grid.box_side", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Node values on a cube (square) grid centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierGrid {
    pub dim: usize,
    pub n: usize,
    pub spacing: f64,
    pub origin: f64,
    pub values: Vec<f64>,
}

#[derive(Serialize)]
struct GridHeader<'a> {
    dims: Vec<usize>,
    spacing: f64,
    origin: Vec<f64>,
    dtype: &'a str,
    order: &'a str,
}

impl FourierGrid {
    fn index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn node(&self, idx: &[usize]) -> Vec3 {
        let mut p = Vec3::zeros();
        for (a, &i) in idx.iter().enumerate() {
            p[a] = self.origin + self.spacing * i as f64;
        }
        p
    }

    /// Nearest node to `x`, its coordinates and its value.
    pub fn snap(&self, x: &Vec3) -> Result<(Vec3, f64)> {
        let mut idx = Vec::with_capacity(self.dim);
        for a in 0..self.dim {
            let i = ((x[a] - self.origin) / self.spacing).round();
            if i < 0.0 || i >= self.n as f64 {
                return Err(Error::Parameter(format!("probe {:?} outside the grid", [x.x, x.y, x.z])));
            }
            idx.push(i as usize);
        }
        Ok((self.node(&idx), self.values[self.index(&idx)]))
    }

    /// Writes `<stem>.bin` (little-endian f64, row-major, last axis fastest)
    /// and `<stem>.json` (dims, spacing, origin).
    pub fn dump(&self, dir: &Path, stem: &str) -> Result<()> {
        let io = |e: std::io::Error| Error::Parameter(format!("writing grid: {e}"));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}.bin"))).map_err(io)?);
        for v in &self.values {
            f.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        f.flush().map_err(io)?;
        let header = GridHeader {
            dims: vec![self.n; self.dim],
            spacing: self.spacing,
            origin: vec![self.origin; self.dim],
            dtype: "f64le",
            order: "row-major",
        };
        let text = serde_json::to_string_pretty(&header).map_err(|e| Error::Parameter(e.to_string()))?;
        std::fs::write(dir.join(format!("{stem}.json")), text).map_err(io)
    }
}

/// Volume fraction of each grid cell, with boundary cells subsampled.
fn rasterize<D: VolumeDomain + ?Sized>(domain: &D, n: usize, h: f64, origin: f64, sub: usize) -> Vec<f64> {
    let dim = domain.dim();
    let total = n.pow(dim as u32);
    let margin = 3.0 * h;
    let offsets: Vec<f64> = (0..sub).map(|k| ((k as f64 + 0.5) / sub as f64 - 0.5) * h).collect();
    let mut out = vec![0.0; total];
    for (lin, slot) in out.iter_mut().enumerate() {
        let mut p = Vec3::zeros();
        let mut rest = lin;
        for a in (0..dim).rev() {
            p[a] = origin + h * (rest % n) as f64;
            rest /= n;
        }
        let l = domain.level(&p);
        if l < -margin {
            *slot = 1.0;
        } else if l > margin {
            *slot = 0.0;
        } else {
            let mut inside = 0usize;
            let mut count = 0usize;
            let zs: &[f64] = if dim == 3 { &offsets } else { &[0.0] };
            for dx in &offsets {
                for dy in &offsets {
                    for dz in zs {
                        count += 1;
                        if domain.level(&(p + Vec3::new(*dx, *dy, *dz))) < 0.0 {
                            inside += 1;
                        }
                    }
                }
            }
            *slot = inside as f64 / count as f64;
        }
    }
    out
}

/// In-place multi-dimensional FFT along every axis.
fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, fft: &dyn Fft<f64>) {
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let outer = data.len() / (n * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (k, c) in line.iter_mut().enumerate() {
                    *c = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, c) in line.iter().enumerate() {
                    data[base + k * stride] = *c;
                }
            }
        }
    }
}

fn frequency(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Evaluates T(1_D) at every grid node: u = IDFT(m(ξ)·DFT(1_D)), m(0) = 0.
pub fn t_fourier_oracle<D: VolumeDomain + ?Sized>(
    kernel: &HomogeneousKernel,
    domain: &D,
    config: &GridOracleConfig,
) -> Result<FourierGrid> {
    config.validate()?;
    let dim = domain.dim();
    if kernel.dim() != dim {
        return Err(Error::Kernel(format!("{} acts in dimension {}, domain has {dim}", kernel.name(), kernel.dim())));
    }
    let plan = MultiplierPlan::new(kernel)?;
    let radius = domain.bounding_radius();
    let side = config.box_side.unwrap_or(4.0 * radius);
    if radius > 0.25 * side {
        return Err(Error::config("grid.box_side", format!("domain radius {radius} exceeds a quarter of the box side {side}")));
    }
    let n = config.resolution(dim);
    let h = side / n as f64;
    let origin = -0.5 * side;
    let chi = rasterize(domain, n, h, origin, config.subsamples);
    let values = if config.free_space {
        let tables = truncation_tables(&plan, dim, n)?;
        apply_multiplier(&chi, n, dim, h, config.smoothing_cells, |xi| {
            let q = (xi.iter().map(|v| v * v).sum::<f64>() * side * side).round() as usize;
            plan.eval_weighted(xi, |m| tables.iter().find(|(d, _)| *d == m).map_or(1.0, |(_, t)| t[q]))
        })
    } else {
        apply_multiplier(&chi, n, dim, h, config.smoothing_cells, |xi| plan.eval(xi))
    };
    Ok(FourierGrid { dim, n, spacing: h, origin, values })
}

/// s^{−μ}J_μ(s) from Poisson's integral
/// 2^{−μ}/(√π Γ(μ + 1/2)) ∫_0^π cos(s cos θ) sin^{2μ}θ dθ.
fn bessel_over_power(mu: f64, s: f64) -> f64 {
    let front = 2f64.powf(-mu) / (std::f64::consts::PI.sqrt() * gamma(mu + 0.5));
    let f = |t: f64| {
        let w = t.sin();
        (s * t.cos()).cos() * if mu.fract() == 0.0 { w.powi(2 * mu as i32) } else { w.powf(2.0 * mu) }
    };
    let pi = std::f64::consts::PI;
    let integral = if mu.fract() == 0.0 {
        // Smooth periodic integrand: the trapezoid rule converges geometrically.
        let m = (0.5 * s + 2.0 * mu) as usize + 24;
        let h = pi / m as f64;
        (1..m).map(|i| f(i as f64 * h)).sum::<f64>() * h
    } else {
        let gl = GaussLegendre::new(16);
        let panels = (s / 3.0) as usize + 2;
        let w = pi / panels as f64;
        (0..panels).map(|i| gl.integrate(i as f64 * w, (i + 1) as f64 * w, &f)).sum()
    };
    front * integral
}

/// ∫_0^t s^{−μ}J_{μ+k}(s) ds for odd k, reduced to k = 1 by
/// J_ν = 2(ν − 1)J_{ν−1}/s − J_{ν−2}.
fn bessel_moment(mu: f64, k: u32, t: f64) -> f64 {
    if k == 1 {
        return bessel_over_power(mu, 0.0) - bessel_over_power(mu, t);
    }
    2.0 * (mu + k as f64 - 1.0) * bessel_moment(mu + 1.0, k - 2, t) - bessel_moment(mu, k - 2, t)
}

/// Ratio of the multiplier of P_m(x)|x|^{−n−m}·1{|x| < R} to that of the full
/// kernel at t = 2π|ξ|R, for even m.
pub fn truncation_factor(n: usize, m: u32, t: f64) -> f64 {
    let mu = n as f64 / 2.0;
    let k = m - 1;
    let full = 2f64.powf(-mu) * gamma((k + 1) as f64 / 2.0) / gamma(mu + (k + 1) as f64 / 2.0);
    bessel_moment(mu, k, t) / full
}

/// Truncation factors per harmonic degree, indexed by the integer |k|² of the
/// grid frequency; with R = side/2, t = π|k|.
fn truncation_tables(plan: &MultiplierPlan, dim: usize, n: usize) -> Result<Vec<(u32, Vec<f64>)>> {
    let top = dim * (n / 2) * (n / 2);
    let mut out = Vec::new();
    for m in plan.degrees() {
        if m % 2 == 1 {
            return Err(Error::config("grid.free_space", "needs harmonic pieces of even degree"));
        }
        if out.iter().any(|(d, _)| *d == m) {
            continue;
        }
        let table: Vec<f64> =
            (0..=top).into_par_iter().map(|q| truncation_factor(dim, m, std::f64::consts::PI * (q as f64).sqrt())).collect();
        out.push((m, table));
    }
    Ok(out)
}

/// Applies a degree-zero multiplier to node data on a periodic grid.
pub fn apply_multiplier<M: Fn(&[f64; 3]) -> Complex64>(
    input: &[f64],
    n: usize,
    dim: usize,
    spacing: f64,
    smoothing_cells: f64,
    multiplier: M,
) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut data: Vec<Complex64> = input.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, n, dim, forward.as_ref());
    let side = spacing * n as f64;
    let width = smoothing_cells * spacing;
    for (lin, c) in data.iter_mut().enumerate() {
        let mut xi = [0.0; 3];
        let mut rest = lin;
        for a in (0..dim).rev() {
            xi[a] = frequency(rest % n, n) / side;
            rest /= n;
        }
        let mut m = multiplier(&xi);
        if width > 0.0 {
            let r2 = xi.iter().map(|v| v * v).sum::<f64>();
            m *= (-2.0 * std::f64::consts::PI.powi(2) * width * width * r2).exp();
        }
        *c *= m;
    }
    fft_nd(&mut data, n, dim, inverse.as_ref());
    let norm = (n as f64).powi(dim as i32);
    data.iter().map(|c| c.re / norm).collect()
}
