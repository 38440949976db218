/// G(r, a) = ∫_0^{1/r} ρ³ (a²ρ² + 1)^{−5/2} dρ.
///
/// The antiderivative −(2 + 3a²r⁻²)/(3a⁴(1 + a²r⁻²)^{3/2}) vanishes at
/// ρ = 1/r only up to its value −2/(3a⁴) at ρ = 0, so the definite integral
/// adds 2/(3a⁴) back. For small t = a/r the two terms cancel and a binomial
/// series in t is used instead; a = 0 gives r⁻⁴/4.
pub fn radial_profile_g(r: f64, a: f64) -> f64 {
    assert!(r > 0.0, "radial_profile_g needs r > 0");
    let a = a.abs();
    if r.is_infinite() {
        return 0.0;
    }
    if a == 0.0 {
        return 0.25 / r.powi(4);
    }
    let t = a / r;
    if t < 0.5 {
        // ∫_0^t s³(1+s²)^{-5/2} ds = Σ_k binom(-5/2, k) t^{4+2k}/(4+2k)
        let t2 = t * t;
        let mut binom = 1.0;
        let mut tp = t2 * t2;
        let mut sum = 0.0;
        for k in 0..60 {
            let term = binom * tp / (4.0 + 2.0 * k as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            binom *= (-2.5 - k as f64) / (k as f64 + 1.0);
            tp *= t2;
        }
        return sum / a.powi(4);
    }
    let u = 1.0 + t * t;
    (2.0 / 3.0 - (2.0 + 3.0 * t * t) / (3.0 * u.powf(1.5))) / a.powi(4)
}

/// dG/dr = −(a² + r²)^{−5/2}; bounded in magnitude by a⁻⁵.
pub fn radial_profile_g_dr(r: f64, a: f64) -> f64 {
    -(a * a + r * r).powf(-2.5)
}
