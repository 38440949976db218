use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chart::Vec3;
use crate::error::{Error, Result};
use crate::quadrature::bracketed_root;

/// Star-shaped test domain with boundary S(ω) = A (1 + ε b(ω)) ω, where A is
/// the diagonal matrix of `radii` and b a smooth bump on the unit sphere.
///
/// In three dimensions b(ω) = cos(kω₁)cos(kω₂)cos(kω₃); in two dimensions
/// b(ω) = Re (ω₁ + iω₂)^k with k rounded to an integer, i.e. cos(kθ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialShape {
    pub dim: usize,
    pub radii: [f64; 3],
    pub amplitude: f64,
    pub frequency: f64,
}

impl RadialShape {
    pub fn sphere(radius: f64) -> Self {
        Self { dim: 3, radii: [radius; 3], amplitude: 0.0, frequency: 3.0 }
    }

    pub fn ellipsoid(radii: [f64; 3]) -> Self {
        Self { dim: 3, radii, amplitude: 0.0, frequency: 3.0 }
    }

    pub fn bumped_sphere(radius: f64, amplitude: f64, frequency: f64) -> Self {
        Self { dim: 3, radii: [radius; 3], amplitude, frequency }
    }

    pub fn disk(radius: f64) -> Self {
        Self { dim: 2, radii: [radius, radius, 1.0], amplitude: 0.0, frequency: 3.0 }
    }

    pub fn ellipse(radii: [f64; 2]) -> Self {
        Self { dim: 2, radii: [radii[0], radii[1], 1.0], amplitude: 0.0, frequency: 3.0 }
    }

    pub fn bumped_circle(radius: f64, amplitude: f64, frequency: f64) -> Self {
        Self { dim: 2, radii: [radius, radius, 1.0], amplitude, frequency }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::config("domain.dim", "must be 2 or 3"));
        }
        if self.radii[..self.dim].iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::config("domain.radii", "radii must be positive and finite"));
        }
        if !(self.amplitude.is_finite() && self.amplitude.abs() < 0.5) {
            return Err(Error::config("domain.amplitude", "bump amplitude must satisfy |ε_b| < 0.5"));
        }
        if !(self.frequency.is_finite() && self.frequency >= 0.0) {
            return Err(Error::config("domain.frequency", "bump frequency must be non-negative"));
        }
        Ok(())
    }

    pub fn is_ellipsoidal(&self) -> bool {
        self.amplitude == 0.0
    }

    fn circle_power(&self) -> i32 {
        self.frequency.round() as i32
    }

    /// Bump b(ω) and its ambient gradient.
    pub fn bump(&self, w: &Vec3) -> (f64, Vec3) {
        if self.dim == 3 {
            let k = self.frequency;
            let (s1, c1) = (k * w.x).sin_cos();
            let (s2, c2) = (k * w.y).sin_cos();
            let (s3, c3) = (k * w.z).sin_cos();
            (c1 * c2 * c3, Vec3::new(-k * s1 * c2 * c3, -k * c1 * s2 * c3, -k * c1 * c2 * s3))
        } else {
            let k = self.circle_power();
            let z = Complex64::new(w.x, w.y);
            let value = z.powi(k).re;
            if k == 0 {
                return (value, Vec3::zeros());
            }
            let d = z.powi(k - 1) * k as f64;
            (value, Vec3::new(d.re, -d.im, 0.0))
        }
    }

    /// Radial profile ρ(ω) = 1 + ε b(ω).
    pub fn rho(&self, w: &Vec3) -> f64 {
        if self.amplitude == 0.0 {
            1.0
        } else {
            1.0 + self.amplitude * self.bump(w).0
        }
    }

    fn scale(&self, v: &Vec3) -> Vec3 {
        Vec3::new(v.x * self.radii[0], v.y * self.radii[1], if self.dim == 3 { v.z * self.radii[2] } else { 0.0 })
    }

    fn unscale(&self, y: &Vec3) -> Vec3 {
        Vec3::new(y.x / self.radii[0], y.y / self.radii[1], if self.dim == 3 { y.z / self.radii[2] } else { 0.0 })
    }

    /// Boundary point S(ω) for a unit direction ω.
    pub fn point(&self, w: &Vec3) -> Vec3 {
        self.scale(&(w * self.rho(w)))
    }

    /// S(ω) and its derivative along the tangent vector `dw`.
    pub fn point_and_derivative(&self, w: &Vec3, dw: &Vec3) -> (Vec3, Vec3) {
        if self.amplitude == 0.0 {
            return (self.scale(w), self.scale(dw));
        }
        let (b, grad) = self.bump(w);
        let rho = 1.0 + self.amplitude * b;
        let d = dw * rho + w * (self.amplitude * grad.dot(dw));
        (self.scale(&(w * rho)), self.scale(&d))
    }

    /// Unit direction ω with S(ω) on the ray from the origin through `y`.
    pub fn direction_of(&self, y: &Vec3) -> Option<Vec3> {
        let u = self.unscale(y);
        let n = u.norm();
        (n > 0.0).then(|| u / n)
    }

    /// Level function, negative inside the domain and zero on its boundary.
    pub fn level(&self, y: &Vec3) -> f64 {
        let u = self.unscale(y);
        let n = u.norm();
        if n == 0.0 {
            return -1.0;
        }
        n - self.rho(&(u / n))
    }

    pub fn contains(&self, y: &Vec3) -> bool {
        self.level(y) < 0.0
    }

    /// Bounding radius of the domain.
    pub fn outer_radius(&self) -> f64 {
        let rmax = self.radii[..self.dim].iter().cloned().fold(0.0, f64::max);
        rmax * (1.0 + self.amplitude.abs())
    }

    /// Sorted parameters t > `t_min` at which the ray x + t·d crosses the
    /// boundary (d need not be normalised).
    pub fn ray_crossings(&self, x: &Vec3, d: &Vec3, t_min: f64) -> Vec<f64> {
        let u0 = self.unscale(x);
        let du = self.unscale(d);
        let a = du.norm_squared();
        if a == 0.0 {
            return Vec::new();
        }
        let ball = |r: f64| -> Option<(f64, f64)> {
            let b = u0.dot(&du);
            let c = u0.norm_squared() - r * r;
            let disc = b * b - a * c;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            // Numerically stable pair of roots.
            let q = -(b + b.signum() * sq);
            let (t1, t2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
            Some((t1.min(t2), t1.max(t2)))
        };
        let eps = self.amplitude.abs();
        let mut out = Vec::new();
        if eps == 0.0 {
            if let Some((t1, t2)) = ball(1.0) {
                out.extend([t1, t2].into_iter().filter(|t| *t > t_min));
            }
            return out;
        }
        let Some((o1, o2)) = ball(1.0 + eps) else { return out };
        let windows: Vec<(f64, f64)> = match ball(1.0 - eps) {
            Some((i1, i2)) => vec![(o1, i1), (i2, o2)],
            None => vec![(o1, o2)],
        };
        let f = |t: f64| self.level(&(x + d * t));
        for (lo, hi) in windows {
            let lo = lo.max(t_min);
            if hi <= lo {
                continue;
            }
            let m = 32;
            let step = (hi - lo) / m as f64;
            let mut ts = Vec::with_capacity(m + 24);
            ts.push(lo);
            // Geometric samples resolve short chords of near-tangent rays
            // leaving a boundary point.
            let mut g = lo.max(1e-12) * 4.0;
            while g < step && t_min > 0.0 && lo == t_min {
                ts.push(lo + g);
                g *= 4.0;
            }
            ts.extend((1..=m).map(|i| lo + step * i as f64));
            let m = ts.len() - 1;
            let fs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
            for i in 0..m {
                if fs[i] == 0.0 && ts[i] > t_min {
                    out.push(ts[i]);
                } else if fs[i] * fs[i + 1] < 0.0 {
                    out.push(bracketed_root(&f, ts[i], ts[i + 1], 1e-15 * (1.0 + ts[i + 1].abs())));
                }
            }
            // A chord shorter than the sample spacing shows up only as a
            // positive local minimum of the samples; refine it.
            for i in 0..=m {
                let left = if i == 0 { f64::INFINITY } else { fs[i - 1] };
                let right = if i == m { f64::INFINITY } else { fs[i + 1] };
                if fs[i] > 0.0 && fs[i] <= left && fs[i] <= right {
                    let a = ts[i.saturating_sub(1)];
                    let b = ts[(i + 1).min(m)];
                    let (tm, fm) = golden_min(&f, a, b);
                    if fm < 0.0 {
                        out.push(bracketed_root(&f, a, tm, 1e-15 * (1.0 + tm.abs())));
                        out.push(bracketed_root(&f, tm, b, 1e-15 * (1.0 + b.abs())));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        out
    }
}

/// Golden-section search for the minimum of a unimodal function on [a, b].
fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < 0.0 {
            return (c, fc);
        }
        if fd < 0.0 {
            return (d, fd);
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn one() -> f64 {
    1.0
}

fn three() -> f64 {
    3.0
}

fn default_ellipsoid() -> [f64; 3] {
    [1.0, 1.0, 2.0]
}

fn default_ellipse() -> [f64; 2] {
    [1.0, 0.6]
}

/// Shipped test domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainFamily {
    Sphere {
        #[serde(default = "one")]
        radius: f64,
    },
    Ellipsoid {
        #[serde(default = "default_ellipsoid")]
        radii: [f64; 3],
    },
    BumpedSphere {
        #[serde(default = "one")]
        radius: f64,
        amplitude: f64,
        #[serde(default = "three")]
        frequency: f64,
    },
    Disk {
        #[serde(default = "one")]
        radius: f64,
    },
    Ellipse {
        #[serde(default = "default_ellipse")]
        radii: [f64; 2],
    },
    BumpedCircle {
        #[serde(default = "one")]
        radius: f64,
        amplitude: f64,
        #[serde(default = "three")]
        frequency: f64,
    },
}

impl Default for DomainFamily {
    fn default() -> Self {
        DomainFamily::Sphere { radius: 1.0 }
    }
}

impl DomainFamily {
    pub fn shape(&self) -> Result<RadialShape> {
        let s = match *self {
            DomainFamily::Sphere { radius } => RadialShape::sphere(radius),
            DomainFamily::Ellipsoid { radii } => RadialShape::ellipsoid(radii),
            DomainFamily::BumpedSphere { radius, amplitude, frequency } => {
                RadialShape::bumped_sphere(radius, amplitude, frequency)
            }
            DomainFamily::Disk { radius } => RadialShape::disk(radius),
            DomainFamily::Ellipse { radii } => RadialShape::ellipse(radii),
            DomainFamily::BumpedCircle { radius, amplitude, frequency } => {
                RadialShape::bumped_circle(radius, amplitude, frequency)
            }
        };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainFamily::Sphere { .. } | DomainFamily::Ellipsoid { .. } | DomainFamily::BumpedSphere { .. } => 3,
            _ => 2,
        }
    }

    /// Short human readable identifier, stable across runs.
    pub fn label(&self) -> String {
        match self {
            DomainFamily::Sphere { radius } => format!("sphere(r={radius})"),
            DomainFamily::Ellipsoid { radii } => format!("ellipsoid({},{},{})", radii[0], radii[1], radii[2]),
            DomainFamily::BumpedSphere { radius, amplitude, frequency } => {
                format!("bumped_sphere(r={radius},eps={amplitude},k={frequency})")
            }
            DomainFamily::Disk { radius } => format!("disk(r={radius})"),
            DomainFamily::Ellipse { radii } => format!("ellipse({},{})", radii[0], radii[1]),
            DomainFamily::BumpedCircle { radius, amplitude, frequency } => {
                format!("bumped_circle(r={radius},eps={amplitude},k={frequency})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_bump_is_the_sphere() {
        let a = RadialShape::bumped_sphere(1.0, 0.0, 3.0);
        let s = RadialShape::sphere(1.0);
        for w in [Vec3::new(0.6, 0.0, 0.8), Vec3::new(0.0, -1.0, 0.0)] {
            assert_eq!(a.point(&w), s.point(&w));
        }
    }

    #[test]
    fn bump_gradient_matches_differences() {
        for shape in [RadialShape::bumped_sphere(1.0, 0.05, 3.0), RadialShape::bumped_circle(1.0, 0.1, 5.0)] {
            let w = if shape.dim == 3 { Vec3::new(0.3, -0.5, 0.4) } else { Vec3::new(0.3, -0.5, 0.0) };
            let (_, g) = shape.bump(&w);
            let h = 1e-6;
            for i in 0..shape.dim {
                let mut e = Vec3::zeros();
                e[i] = h;
                let fd = (shape.bump(&(w + e)).0 - shape.bump(&(w - e)).0) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-7, "component {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn ray_crossings_land_on_boundary() {
        let shape = RadialShape::bumped_sphere(1.0, 0.05, 3.0);
        let x = Vec3::new(0.1, 0.2, -0.3);
        let d = Vec3::new(0.3, 0.9, 0.2).normalize();
        let ts = shape.ray_crossings(&x, &d, 0.0);
        assert_eq!(ts.len(), 1);
        assert!(shape.level(&(x + d * ts[0])).abs() < 1e-12);

        let outside = Vec3::new(3.0, 0.0, 0.0);
        let ts = shape.ray_crossings(&outside, &Vec3::new(-1.0, 0.0, 0.0), 0.0);
        assert_eq!(ts.len(), 2);
    }

    #[test]
    fn ellipsoid_crossing_is_exact() {
        let shape = RadialShape::ellipsoid([1.0, 1.0, 2.0]);
        let ts = shape.ray_crossings(&Vec3::zeros(), &Vec3::new(0.0, 0.0, 1.0), 0.0);
        assert_eq!(ts, vec![2.0]);
    }
}
