//! Oracles shared by the integration tests, written independently of the library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Lanczos approximation (g = 7, 9 terms).
pub fn gamma_oracle(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_oracle(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Romberg integration of a smooth integrand, stopping once two diagonal
/// entries agree to `tol` relative.
pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut prev = vec![0.5 * (b - a) * (f(a) + f(b))];
    for level in 1..24 {
        let n = 1usize << level;
        let h = (b - a) / n as f64;
        let mid: f64 = (0..n / 2).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        let mut row = vec![0.5 * prev[0] + h * mid];
        for k in 1..=level {
            let w = 4f64.powi(k as i32);
            row.push((w * row[k - 1] - prev[k - 1]) / (w - 1.0));
        }
        let (new, old) = (row[level], prev[level - 1]);
        if level > 4 && (new - old).abs() <= tol * new.abs() {
            return new;
        }
        prev = row;
    }
    prev[prev.len() - 1]
}
