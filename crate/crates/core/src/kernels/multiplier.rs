use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// i^m as an exact complex unit.
fn i_pow(m: u32) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn is_pole(z: f64) -> bool {
    z <= 0.0 && z == z.round()
}

/// c_{m,α,n} = i^m π^{n/2−α} Γ((m+α)/2) / Γ((m+n−α)/2), the constant in the
/// Fourier transform of P_m(x)/|x|^{n+m−α} for harmonic P_m.
pub fn multiplier_constant(m: u32, alpha: f64, n: usize) -> Result<Complex64> {
    let nf = n as f64;
    if !(alpha > 0.0 && alpha <= nf) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0, {n}]")));
    }
    gamma_ratio_constant(m, alpha, n)
}

/// The α → 0 limit c_{m,0,n} used for Calderón–Zygmund kernels P_m/|x|^{n+m}
/// (m ≥ 1).
pub fn cz_multiplier_constant(m: u32, n: usize) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::Parameter("m = 0 has no principal-value multiplier".into()));
    }
    gamma_ratio_constant(m, 0.0, n)
}

fn gamma_ratio_constant(m: u32, alpha: f64, n: usize) -> Result<Complex64> {
    let nf = n as f64;
    let num_arg = (m as f64 + alpha) / 2.0;
    let den_arg = (m as f64 + nf - alpha) / 2.0;
    if is_pole(num_arg) {
        return Err(Error::Parameter(format!("Gamma pole at (m+alpha)/2 = {num_arg}")));
    }
    // 1/Γ vanishes at the poles of the denominator
    if is_pole(den_arg) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let real = PI.powf(nf / 2.0 - alpha) * gamma(num_arg) / gamma(den_arg);
    Ok(i_pow(m) * real)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        let c = multiplier_constant(2, 1.0, 2).unwrap();
        assert!((c - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let c = multiplier_constant(0, 1.0, 3).unwrap();
        assert!((c.re - PI).abs() < 1e-13 && c.im == 0.0);
        let c = multiplier_constant(4, 2.0, 3).unwrap();
        assert!((c.re - 8.0 / (3.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn rejects_alpha_out_of_range() {
        assert!(multiplier_constant(2, 0.0, 3).is_err());
        assert!(multiplier_constant(2, 3.5, 3).is_err());
        assert!(cz_multiplier_constant(0, 3).is_err());
    }

    #[test]
    fn odd_order_is_imaginary() {
        let c = cz_multiplier_constant(1, 3).unwrap();
        assert!(c.re == 0.0 && c.im > 0.0);
    }
}
