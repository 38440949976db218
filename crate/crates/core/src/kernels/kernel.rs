use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::multiplier::cz_multiplier_constant;
use super::polynomial::{rat, HomogeneousPolynomial};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Residual tolerance for the mean-zero condition on the unit sphere.
pub const MEAN_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Monomial compiled for fast floating-point evaluation.
#[derive(Debug, Clone, Copy)]
struct Monomial {
    coeff: f64,
    exps: [u8; 3],
}

/// Kernel `scale · P(x) / |x|^power` with P homogeneous.
#[derive(Debug, Clone)]
pub struct HomogeneousKernel {
    name: String,
    numerator: HomogeneousPolynomial,
    power: u32,
    scale: f64,
    compiled: Vec<Monomial>,
}

impl HomogeneousKernel {
    pub fn new(name: impl Into<String>, numerator: HomogeneousPolynomial, power: u32, scale: f64) -> Result<Self> {
        let n = numerator.dim();
        if !(2..=3).contains(&n) {
            return Err(Error::Kernel(format!("dimension {n} is not supported (n = 2 or 3)")));
        }
        if !scale.is_finite() {
            return Err(Error::Kernel("scale must be finite".into()));
        }
        let compiled = numerator
            .terms()
            .map(|(idx, c)| {
                let mut exps = [0u8; 3];
                for (e, &v) in exps.iter_mut().zip(idx.iter()) {
                    *e = v as u8;
                }
                Monomial { coeff: c.to_f64().unwrap_or(f64::NAN) * scale, exps }
            })
            .collect();
        Ok(Self { name: name.into(), numerator, power, scale, compiled })
    }

    /// Parses `"poly: x1*x2*x3; power: 5; n: 3"` with an optional `scale: <float>`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let mut poly = None;
        let mut power = None;
        let mut n = None;
        let mut scale = 1.0;
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) =
                part.split_once(':').ok_or_else(|| Error::Parse(format!("expected `key: value`, got `{part}`")))?;
            let value = value.trim();
            match key.trim() {
                "poly" => poly = Some(value.to_string()),
                "power" => power = Some(value.parse::<u32>().map_err(|_| Error::Parse(format!("bad power `{value}`")))?),
                "n" => n = Some(value.parse::<usize>().map_err(|_| Error::Parse(format!("bad dimension `{value}`")))?),
                "scale" => scale = value.parse::<f64>().map_err(|_| Error::Parse(format!("bad scale `{value}`")))?,
                other => return Err(Error::Parse(format!("unknown kernel key `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("kernel spec is missing `n`".into()))?;
        let poly = poly.ok_or_else(|| Error::Parse("kernel spec is missing `poly`".into()))?;
        let power = power.ok_or_else(|| Error::Parse("kernel spec is missing `power`".into()))?;
        let numerator = HomogeneousPolynomial::parse(&poly, n)?;
        Self::new(spec.trim(), numerator, power, scale)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.numerator.dim()
    }

    pub fn numerator(&self) -> &HomogeneousPolynomial {
        &self.numerator
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Degree of homogeneity m - s.
    pub fn singularity_order(&self) -> i64 {
        self.numerator.degree() as i64 - self.power as i64
    }

    pub fn parity(&self) -> Parity {
        if self.numerator.is_even() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let n = self.dim();
        if x.len() < n {
            return Err(Error::Parameter(format!("point has {} coordinates, kernel needs {n}", x.len())));
        }
        let mut p = [0.0; 3];
        p[..n].copy_from_slice(&x[..n]);
        if p.iter().all(|v| *v == 0.0) {
            return Err(Error::Singularity);
        }
        Ok(self.eval_point(&p))
    }

    /// Evaluation without the singularity check; `x` holds n coordinates
    /// padded with zeros.
    #[inline]
    pub fn eval_point(&self, x: &[f64; 3]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        self.numerator_value(x) / radial_power(r2, self.power)
    }

    /// scale·P(x).
    #[inline]
    pub fn numerator_value(&self, x: &[f64; 3]) -> f64 {
        let mut pw = [[1.0f64; 8]; 3];
        for d in 0..3 {
            for k in 1..8 {
                pw[d][k] = pw[d][k - 1] * x[d];
            }
        }
        let mut acc = 0.0;
        for m in &self.compiled {
            let e = m.exps;
            if e.iter().all(|&v| v < 8) {
                acc += m.coeff * pw[0][e[0] as usize] * pw[1][e[1] as usize] * pw[2][e[2] as usize];
            } else {
                acc += m.coeff * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32);
            }
        }
        acc
    }

    /// ∫_{S^{n-1}} Ω dσ by product Gauss–Legendre × trapezoid (64 × 128) in
    /// 3D and the 128-point trapezoid rule on the circle; returns |integral|.
    pub fn mean_zero_residual(&self) -> f64 {
        sphere_integral(self.dim(), |w| self.eval_point(w)).abs()
    }

    /// Homogeneous of degree −n with vanishing sphere mean.
    pub fn is_calderon_zygmund(&self) -> bool {
        self.singularity_order() == -(self.dim() as i64) && self.mean_zero_residual() <= MEAN_ZERO_TOL
    }

    pub fn require_calderon_zygmund(&self) -> Result<()> {
        if self.singularity_order() != -(self.dim() as i64) {
            return Err(Error::Kernel(format!(
                "{}: homogeneity degree {} is not -n = -{}",
                self.name,
                self.singularity_order(),
                self.dim()
            )));
        }
        let r = self.mean_zero_residual();
        if r > MEAN_ZERO_TOL {
            return Err(Error::Kernel(format!(
                "{}: sphere mean {r:.3e} is not zero; the principal value need not exist",
                self.name
            )));
        }
        Ok(())
    }

    /// Components A_j of the field with div A = K for a harmonic numerator:
    /// A = −∇(P|x|^{−a}) / (k a), a = n + k − 2, k = deg P ≥ 1, with
    /// numerators ∂_jP·|x|² − a x_j P over |x|^{n+k}.
    pub fn divergence_antiderivative(&self) -> Result<Vec<HomogeneousKernel>> {
        let n = self.dim();
        let k = self.numerator.degree() as i64;
        if self.singularity_order() != -(n as i64) {
            return Err(Error::Kernel(format!("{}: not homogeneous of degree -n", self.name)));
        }
        if !self.numerator.is_harmonic() {
            return Err(Error::Kernel(format!(
                "{}: numerator is not harmonic; decompose it first (see divergence_antiderivative_decomposed)",
                self.name
            )));
        }
        if k < 1 {
            return Err(Error::Kernel(format!("{}: numerator degree must be at least 1", self.name)));
        }
        let a = n as i64 + k - 2;
        let factor = rat(-1, k * a);
        let p = &self.numerator;
        (0..n)
            .map(|j| {
                let num = p.derivative(j).mul_norm_squared().sub(&p.mul_variable(j).scale(&rat(a, 1)))?.scale(&factor);
                HomogeneousKernel::new(format!("A{}[{}]", j + 1, self.name), num, (n as i64 + k) as u32, self.scale)
            })
            .collect()
    }

    /// Antiderivative for a general mean-zero numerator: each harmonic piece
    /// |x|^{2i} h_{k−2i} is handled separately and the pieces are recombined
    /// over the common denominator |x|^{n+k}.
    pub fn divergence_antiderivative_decomposed(&self) -> Result<Vec<HomogeneousKernel>> {
        let n = self.dim();
        let k = self.numerator.degree();
        if self.singularity_order() != -(n as i64) {
            return Err(Error::Kernel(format!("{}: not homogeneous of degree -n", self.name)));
        }
        let parts = self.numerator.harmonic_expansion();
        let mut totals: Vec<HomogeneousPolynomial> = (0..n).map(|_| HomogeneousPolynomial::zero(n, k + 1)).collect();
        let mut lift = HomogeneousPolynomial::constant(n, rat(1, 1));
        for (i, h) in parts.iter().enumerate() {
            let deg = k - 2 * i as u32;
            if !h.is_zero() {
                if deg == 0 {
                    return Err(Error::Kernel(format!(
                        "{}: numerator has a radial component, the kernel is not mean-zero",
                        self.name
                    )));
                }
                let piece = HomogeneousKernel::new("piece", h.clone(), n as u32 + deg, 1.0)?;
                for (j, a) in piece.divergence_antiderivative()?.iter().enumerate() {
                    totals[j] = totals[j].add(&a.numerator.mul(&lift))?;
                }
            }
            lift = lift.mul_norm_squared();
        }
        totals
            .into_iter()
            .enumerate()
            .map(|(j, num)| HomogeneousKernel::new(format!("A{}[{}]", j + 1, self.name), num, n as u32 + k, self.scale))
            .collect()
    }

    /// Fourier multiplier of the principal-value operator at frequency ξ
    /// (convention e^{−2πi x·ξ}); zero at ξ = 0. Each harmonic piece
    /// h_m/|x|^{n+m} contributes c_{m,0,n} h_m(ξ)/|ξ|^m.
    pub fn multiplier(&self, xi: &[f64; 3]) -> Result<Complex64> {
        let plan = MultiplierPlan::new(self)?;
        Ok(plan.eval(xi))
    }
}

/// Precomputed harmonic pieces of a kernel for repeated multiplier evaluation.
#[derive(Debug, Clone)]
pub struct MultiplierPlan {
    pieces: Vec<(HomogeneousKernel, u32, Complex64)>,
}

impl MultiplierPlan {
    pub fn new(kernel: &HomogeneousKernel) -> Result<Self> {
        kernel.require_calderon_zygmund()?;
        let n = kernel.dim();
        let k = kernel.numerator.degree();
        let mut pieces = Vec::new();
        for (i, h) in kernel.numerator.harmonic_expansion().into_iter().enumerate() {
            let m = k - 2 * i as u32;
            if h.is_zero() {
                continue;
            }
            if m == 0 {
                return Err(Error::Kernel(format!("{}: radial component present", kernel.name)));
            }
            let c = cz_multiplier_constant(m, n)?;
            pieces.push((HomogeneousKernel::new("symbol", h, m, kernel.scale)?, m, c));
        }
        Ok(Self { pieces })
    }

    pub fn eval(&self, xi: &[f64; 3]) -> Complex64 {
        self.eval_weighted(xi, |_| 1.0)
    }

    /// Degrees of the harmonic pieces.
    pub fn degrees(&self) -> Vec<u32> {
        self.pieces.iter().map(|(_, m, _)| *m).collect()
    }

    /// Multiplier with the piece of harmonic degree m scaled by `weight(m)`.
    pub fn eval_weighted(&self, xi: &[f64; 3], weight: impl Fn(u32) -> f64) -> Complex64 {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if r2 == 0.0 {
            return Complex64::zero();
        }
        self.pieces.iter().map(|(sym, m, c)| c * sym.eval_point(xi) * weight(*m)).sum()
    }
}

#[inline]
pub(crate) fn radial_power(r2: f64, power: u32) -> f64 {
    if power % 2 == 0 {
        r2.powi((power / 2) as i32)
    } else {
        r2.powi((power / 2) as i32) * r2.sqrt()
    }
}

/// Integral of `f` over the unit sphere S^{n−1} (n = 2 or 3).
pub fn sphere_integral(n: usize, mut f: impl FnMut(&[f64; 3]) -> f64) -> f64 {
    const NPHI: usize = 128;
    let dphi = 2.0 * PI / NPHI as f64;
    if n == 2 {
        return (0..NPHI)
            .map(|i| {
                let t = i as f64 * dphi;
                f(&[t.cos(), t.sin(), 0.0]) * dphi
            })
            .sum();
    }
    let gl = GaussLegendre::new(64);
    let mut total = 0.0;
    for (u, w) in gl.mapped(-1.0, 1.0) {
        let s = (1.0 - u * u).sqrt();
        for i in 0..NPHI {
            let t = i as f64 * dphi;
            total += w * dphi * f(&[s * t.cos(), s * t.sin(), u]);
        }
    }
    total
}

/// |S^{n−1}|.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}
