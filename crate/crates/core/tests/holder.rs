use std::f64::consts::PI;

use czpatch::geometry::{norms, Atlas, DomainFamily, DomainNorms, SamplingConfig, Side, Vec3};
use czpatch::holder::*;
use czpatch::kernels::HomogeneousKernel;
use czpatch::sboundary::Density;

fn atlas(f: DomainFamily) -> Atlas {
    Atlas::from_family(&f).unwrap()
}

fn sphere() -> Atlas {
    atlas(DomainFamily::Sphere { radius: 1.0 })
}

fn bumped(amplitude: f64) -> Atlas {
    atlas(DomainFamily::BumpedSphere { radius: 1.0, amplitude, frequency: 3.0 })
}

fn domain_norms(a: &Atlas) -> DomainNorms {
    norms(a, 0.5, &SamplingConfig::default(), None).unwrap()
}

fn odd3() -> HomogeneousKernel {
    HomogeneousKernel::parse_spec("poly: x1; power: 3; n: 3").unwrap()
}

fn quick() -> PairConfig {
    PairConfig { pairs: 48, ..PairConfig::default() }
}

#[test]
fn constant_field_has_zero_seminorm() {
    let a = sphere();
    let n = domain_norms(&a);
    let u = PlainField(|_: &Vec3| 2.5);
    for r in holder_scan(&u, &a, &n, &quick()).unwrap() {
        assert_eq!(r.max, 0.0, "{:?} {:?}", r.regime, r.side);
    }
}

#[test]
fn linear_field_quotient_is_bounded_by_the_step() {
    let a = sphere();
    let n = domain_norms(&a);
    let u = PlainField(|x: &Vec3| x.x);
    let c = PairConfig { pairs: 128, ..PairConfig::default() };
    let reports = holder_scan(&u, &a, &n, &c).unwrap();
    for r in &reports {
        // |h_1|/|h|^{1/2} ≤ |h|^{1/2} ≤ 0.1^{1/2}; on-boundary chords are shorter than the tangent step.
        assert!(r.max <= 0.1f64.sqrt() + 1e-12, "{:?} {:?}: {}", r.regime, r.side, r.max);
    }
    let far = reports.iter().filter(|r| r.regime == Regime::Far).map(|r| r.max).fold(0.0, f64::max);
    assert!(far >= 0.3, "{far}");
}

#[test]
fn bound_factor_examples() {
    let s = sphere();
    let ns = domain_norms(&s);
    let dn = density_norms(&s, &Density::Constant(1.0), 0.5, 200);
    assert_eq!((dn.sup, dn.seminorm, dn.c_sigma), (1.0, 0.0, 1.0));
    let fs = bound_factor(&ns, BoundMode::S { c_sigma: dn.c_sigma, sup: dn.sup });
    let expected = (1.0 + 4.0 * PI) * (1.0 + ns.holder_1s);
    assert!((fs - expected).abs() <= 1e-6 * expected, "{fs} vs {expected}");
    assert_eq!(bound_factor(&ns, BoundMode::T), (1.0 + ns.area) * (1.0 + ns.holder_1s));
    let nb = domain_norms(&bumped(0.05));
    assert!(nb.holder_1s > ns.holder_1s);
    assert!(bound_factor(&nb, BoundMode::T) > bound_factor(&ns, BoundMode::T));
}

#[test]
fn normal_component_density_norms() {
    let s = sphere();
    let dn = density_norms(&s, &Density::NormalComponent(2), 0.5, 300);
    assert!((dn.sup - 1.0).abs() < 1e-2, "{}", dn.sup);
    // N_3 = −x_3 on the unit sphere: |Δ| ≤ chord ≤ 2^{1/2}·chord^{1/2}.
    assert!(dn.seminorm > 1.0 && dn.seminorm <= 2f64.sqrt() + 1e-9, "{}", dn.seminorm);
}

#[test]
fn zero_density_profile_vanishes() {
    let b = bumped(0.05);
    let u = FieldEvaluator::new(Field::Boundary(odd3(), Density::Constant(0.0)), &b).unwrap();
    let deltas = log_spaced(1e-3, 1e-1, 5);
    for side in [Side::Interior, Side::Exterior] {
        let p = linf_profile(&u, &b, 0, &[0.1, 0.2], side, &deltas).unwrap();
        assert!(p.points.iter().all(|(_, v)| *v == 0.0));
        assert_eq!(p.class, ProfileClass::Bounded);
    }
}

#[test]
fn profile_classification_of_model_fields() {
    let s = sphere();
    let deltas = log_spaced(1e-3, 1e-1, 9);
    let log = PlainField(|x: &Vec3| 0.5 + 0.3 * (1.0 / (1.0 - x.norm()).abs()).ln());
    let p = linf_profile(&log, &s, 0, &[0.0, 0.0], Side::Interior, &deltas).unwrap();
    assert_eq!(p.class, ProfileClass::LogDivergent);
    assert!((p.c2 - 0.3).abs() < 1e-9 && (p.c1 - 0.5).abs() < 1e-9 && p.r2 > 0.999999);
    let flat = PlainField(|x: &Vec3| 2.0 + 0.001 * x.norm());
    let p = linf_profile(&flat, &s, 0, &[0.0, 0.0], Side::Exterior, &deltas).unwrap();
    assert_eq!(p.class, ProfileClass::Bounded);
    assert!(linf_profile(&flat, &s, 0, &[0.0, 0.0], Side::Boundary, &deltas).is_err());
    assert!(linf_profile(&flat, &s, 0, &[0.0, 0.0], Side::Interior, &[0.1]).is_err());
}

#[test]
fn linear_fit_recovers_a_line() {
    let x = [0.0, 1.0, 2.5, 4.0];
    let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
    let (slope, intercept, r2) = linear_fit(&x, &y);
    assert!((slope + 2.0).abs() < 1e-14 && (intercept - 3.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    let s = log_spaced(1e-3, 1e-1, 3);
    assert!((s[1] - 1e-2).abs() < 1e-16 && (s[2] - 1e-1).abs() < 1e-16);
}

#[test]
fn pairs_are_admissible_and_nested() {
    let a = bumped(0.05);
    let n = domain_norms(&a);
    let c = PairConfig { pairs: 64, ..PairConfig::default() };
    let far_cut = c.far_cut_for(&n);
    for side in [Side::Interior, Side::Exterior] {
        for regime in Regime::ALL {
            let big = generate_pairs(&a, &n, regime, side, &c).unwrap();
            let small = generate_pairs(&a, &n, regime, side, &PairConfig { pairs: 32, ..c }).unwrap();
            assert_eq!(&big[..32], &small[..]);
            for p in &big {
                let (fx, fy) = (a.foot_point(&p.x).unwrap(), a.foot_point(&p.y).unwrap());
                let h = (p.y - p.x).norm();
                match regime {
                    Regime::OnBoundary => {
                        assert!(fx.distance < 1e-9 && fy.distance < 1e-9);
                        assert!(p.normals.is_some() && h > 0.0 && h <= c.h_max);
                    }
                    Regime::Near => {
                        assert_eq!((fx.side, fy.side), (side, side));
                        assert!(fx.distance <= fy.distance && fy.distance < far_cut);
                        assert!(h >= c.h_min * (1.0 - 1e-12) && h <= c.h_max * (1.0 + 1e-12));
                    }
                    Regime::Far => {
                        assert_eq!((fx.side, fy.side), (side, side));
                        assert!(fx.distance >= far_cut && fy.distance >= far_cut);
                    }
                }
            }
        }
    }
    assert!(PairConfig { sigma: 1.0, ..c }.validate().is_err());
    assert!(PairConfig { h_min: 0.2, ..c }.validate().is_err());
}

#[test]
fn boundary_operator_quotients_do_not_grow_as_steps_halve() {
    let b = bumped(0.05);
    let n = domain_norms(&b);
    for j in 0..3 {
        let u = FieldEvaluator::new(Field::Boundary(odd3(), Density::NormalComponent(j)), &b).unwrap();
        let base = PairConfig { pairs: 24, h_min: 1e-2, h_max: 4e-2, ..PairConfig::default() };
        let half = PairConfig { h_min: 5e-3, h_max: 2e-2, ..base };
        let full = empirical_seminorm(&u, &b, &n, Regime::OnBoundary, Side::Interior, &base).unwrap();
        let halved = empirical_seminorm(&u, &b, &n, Regime::OnBoundary, Side::Interior, &half).unwrap();
        assert!(full.max > 0.0);
        assert!(halved.max <= 1.05 * full.max, "N_{}: {} vs {}", j + 1, halved.max, full.max);
    }
}

#[test]
fn report_summary_statistics() {
    let a = sphere();
    let n = domain_norms(&a);
    let u = PlainField(|x: &Vec3| x.x * x.x);
    let c = PairConfig { polish: 0, ..quick() };
    let pairs = generate_pairs(&a, &n, Regime::Far, Side::Exterior, &c).unwrap();
    let samples = evaluate_pairs(&u, &pairs, Side::Exterior, 0.5).unwrap();
    let r = summarize(Regime::Far, Side::Exterior, &samples);
    let best = samples.iter().map(|s| s.quotient).fold(0.0, f64::max);
    assert_eq!(r.max, best);
    assert_eq!(r.pairs, samples.len());
    assert!(r.top_decile <= r.max && r.small_band_max.max(r.large_band_max) == r.max);
    assert_eq!(r.argmax.unwrap().quotient, best);
    let e = empirical_seminorm(&u, &a, &n, Regime::Far, Side::Exterior, &c).unwrap();
    assert_eq!(e.max, r.max);
}
