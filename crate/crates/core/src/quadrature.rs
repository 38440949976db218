//! One-dimensional quadrature rules, adaptive integration, low-discrepancy
//! sequences and Richardson extrapolation shared by the evaluators.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Kronrod 15-point abscissae and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances and limits for adaptive Gauss–Kronrod integration.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Number of equal pieces the range is split into before adapting.
    pub initial_pieces: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 400, initial_pieces: 1 }
    }
}

/// Result of an adaptive integration with a vector-valued integrand.
#[derive(Debug, Clone)]
pub struct Integral {
    pub value: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    f(c, buf);
    for d in 0..dim {
        kron[d] = WGK[7] * buf[d];
        gauss[d] = WG[3] * buf[d];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        for &x in &[c - dx, c + dx] {
            f(x, buf);
            for d in 0..dim {
                kron[d] += WGK[j] * buf[d];
                if j % 2 == 1 {
                    gauss[d] += WG[j / 2] * buf[d];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= h;
        gauss[d] *= h;
        err = err.max((kron[d] - gauss[d]).abs());
    }
    (kron, err)
}

/// Globally adaptive Gauss–Kronrod (7, 15) integration of a vector-valued
/// integrand `f(x, out)`. The error is the max-norm of the Kronrod–Gauss
/// difference summed over pieces; the first component drives the relative
/// tolerance.
pub fn adaptive_vec<F>(mut f: F, a: f64, b: f64, dim: usize, opts: AdaptiveOptions) -> Integral
where
    F: FnMut(f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    let pieces = opts.initial_pieces.max(1);
    let step = (b - a) / pieces as f64;
    let mut evaluations = 0;
    for i in 0..pieces {
        let lo = a + step * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + step };
        let (value, error) = gk15(&mut f, lo, hi, dim, &mut buf);
        evaluations += 15;
        heap.push(Piece { a: lo, b: hi, value, error });
    }
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in heap.iter() {
            for d in 0..dim {
                total[d] += p.value[d];
            }
            err += p.error;
        }
        let scale = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let target = opts.abs_tol.max(opts.rel_tol * scale);
        if err <= target || heap.len() >= opts.max_intervals {
            return Integral { value: total, error: err, evaluations, converged: err <= target };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted in floating point; keep it and stop refining it
            heap.push(Piece { error: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid, dim, &mut buf);
        let (v2, e2) = gk15(&mut f, mid, worst.b, dim, &mut buf);
        evaluations += 30;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Scalar convenience wrapper around [`adaptive_vec`].
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> (f64, f64) {
    let r = adaptive_vec(|x, out| out[0] = f(x), a, b, 1, opts);
    (r.value[0], r.error)
}

/// Radical inverse of `index` in the given prime base.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Point `index` of the Halton sequence in `[0,1)^dim` (dim ≤ 12). Prefixes are
/// nested, so doubling a sample keeps every earlier point.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len());
    (0..dim).map(|d| radical_inverse(index + 1, PRIMES[d])).collect()
}

/// Richardson extrapolation of a sequence computed at step ratio 2 with
/// error expansion in powers `p, p+1, …`. Returns the extrapolated value and
/// the magnitude of the last correction as an error estimate.
pub fn richardson(values: &[f64], first_power: u32, order: usize) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::INFINITY);
    }
    if values.len() == 1 {
        return (values[0], f64::INFINITY);
    }
    let mut table = values.to_vec();
    let mut last_correction = (table[table.len() - 1] - table[table.len() - 2]).abs();
    let order = order.min(values.len() - 1);
    for k in 0..order {
        let factor = 2f64.powi((first_power + k as u32) as i32);
        let next: Vec<f64> = table.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        last_correction = (next[next.len() - 1] - table[table.len() - 1]).abs();
        table = next;
    }
    (table[table.len() - 1], last_correction)
}

/// Root of `f` in `[a, b]` where `f(a)` and `f(b)` have opposite signs.
/// Falls back to the midpoint of the last bracket if Brent's method fails.
pub fn bracketed_root<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let mut conv = roots::SimpleConvergency { eps: tol, max_iter: 200 };
    match roots::find_root_brent(a, b, f, &mut conv) {
        Ok(t) => t,
        Err(_) => {
            let (mut lo, mut hi) = (a, b);
            let flo = f(lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) < 0.0) == (flo < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(6);
        // degree 11 is the highest exact degree for 6 nodes
        let v = gl.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let w: f64 = gl.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_high_order_nodes_symmetric() {
        let gl = GaussLegendre::new(64);
        for i in 0..32 {
            assert!((gl.nodes[i] + gl.nodes[63 - i]).abs() < 1e-15);
        }
        let v = gl.integrate(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularities() {
        let (v, _) = adaptive(
            |x| x.ln(),
            0.0,
            1.0,
            AdaptiveOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 2000, initial_pieces: 1 },
        );
        assert!((v + 1.0).abs() < 1e-10, "{v}");
        let (v, _) = adaptive(|x| (1.0 - x).sqrt(), 0.0, 1.0, AdaptiveOptions::default());
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn halton_prefix_is_nested_and_in_unit_cube() {
        let a = halton(10, 3);
        assert_eq!(a, halton(10, 3));
        assert!(a.iter().all(|&v| (0.0..1.0).contains(&v)));
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn richardson_removes_linear_and_quadratic_terms() {
        let vals: Vec<f64> = (0..5)
            .map(|k| {
                let e = 0.1 / 2f64.powi(k);
                3.0 + 2.0 * e - 5.0 * e * e
            })
            .collect();
        let (v, _) = richardson(&vals, 1, 2);
        assert!((v - 3.0).abs() < 1e-12);
    }
}
