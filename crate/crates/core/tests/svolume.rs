use std::f64::consts::PI;

use czpatch::geometry::{Atlas, DomainFamily, Vec3};
use czpatch::kernels::{catalog_kernel, HomogeneousKernel};
use czpatch::svolume::*;

fn ball() -> Atlas {
    Atlas::from_family(&DomainFamily::Sphere { radius: 1.0 }).unwrap()
}

fn kernels(names: &[&str]) -> Vec<HomogeneousKernel> {
    names.iter().map(|n| catalog_kernel(n).unwrap()).collect()
}

const RIESZ2: [&str; 6] = ["riesz2_11", "riesz2_22", "riesz2_33", "riesz2_12", "riesz2_13", "riesz2_23"];

/// (j, k) index pair of a second-order Riesz kernel name.
fn pair(name: &str) -> (usize, usize) {
    let b = name.as_bytes();
    ((b[b.len() - 2] - b'1') as usize, (b[b.len() - 1] - b'1') as usize)
}

/// Depolarization factor of a prolate spheroid with semi-axes (1, 1, c)
/// along its long axis.
fn prolate_axial_factor(c: f64) -> f64 {
    let e = (1.0 - 1.0 / (c * c)).sqrt();
    (1.0 - e * e) / (e * e) * (((1.0 + e) / (1.0 - e)).ln() / (2.0 * e) - 1.0)
}

#[test]
fn ball_interior_second_order_riesz_vanishes() {
    let b = ball();
    let ks = kernels(&RIESZ2);
    for x in [Vec3::new(0.3, 0.2, 0.1), Vec3::new(-0.1, 0.4, 0.2), Vec3::new(0.0, 0.0, 0.5), Vec3::new(0.6, 0.5, 0.4)] {
        let v = t_volume_multi(&ks, &b, &x, &PvSchedule::default(), &VolumeQuadrature::default()).unwrap();
        for (k, r) in ks.iter().zip(&v) {
            assert!(r.value.abs() < 1e-8, "{} at {x:?}: {}", k.name(), r.value);
        }
    }
}

#[test]
fn ball_exterior_matches_point_mass() {
    // Degree-two harmonic numerators over |x|^{n+2} are harmonic away from 0,
    // so outside the ball T(1_B)(x) = |B|·K(x) by the mean-value property.
    let b = ball();
    let ks = kernels(&RIESZ2);
    let vol = 4.0 * PI / 3.0;
    for x in [Vec3::new(2.0, 0.0, 0.0), Vec3::new(1.2, 0.8, 0.3), Vec3::new(-0.4, 1.1, -0.9)] {
        let v = t_volume_multi(&ks, &b, &x, &PvSchedule::default(), &VolumeQuadrature::default()).unwrap();
        for (k, r) in ks.iter().zip(&v) {
            let exact = vol * k.eval_point(&[x.x, x.y, x.z]);
            assert!((r.value - exact).abs() < 1e-8, "{} at {x:?}: {} vs {exact}", k.name(), r.value);
        }
    }
    let r12 = t_volume_pv(&ks[3], &b, &Vec3::new(1.2, 0.8, 0.3), &PvSchedule::default(), &VolumeQuadrature::default()).unwrap();
    let x = Vec3::new(1.2, 0.8, 0.3);
    assert!((r12.value - x.x * x.y / x.norm().powi(5)).abs() < 1e-8);
}

#[test]
fn disk_interior_and_exterior() {
    let d = Atlas::from_family(&DomainFamily::Disk { radius: 1.0 }).unwrap();
    let ks = kernels(&["beurling_re", "beurling_im"]);
    for x in [Vec3::new(0.3, -0.2, 0.0), Vec3::new(-0.5, 0.6, 0.0)] {
        let v = t_volume_multi(&ks, &d, &x, &PvSchedule::default(), &VolumeQuadrature::default()).unwrap();
        for r in &v {
            assert!(r.value.abs() < 1e-8, "{}", r.value);
        }
    }
    for x in [Vec3::new(1.5, 0.4, 0.0), Vec3::new(-0.9, -1.3, 0.0)] {
        let v = t_volume_multi(&ks, &d, &x, &PvSchedule::default(), &VolumeQuadrature::default()).unwrap();
        for (k, r) in ks.iter().zip(&v) {
            let exact = PI * k.eval_point(&[x.x, x.y, 0.0]);
            assert!((r.value - exact).abs() < 1e-8, "{}: {} vs {exact}", k.name(), r.value);
        }
    }
}

#[test]
fn ellipsoid_interior_values_are_depolarization_constants() {
    let e = Atlas::from_family(&DomainFamily::Ellipsoid { radii: [1.0, 1.0, 2.0] }).unwrap();
    let lz = prolate_axial_factor(2.0);
    let lx = 0.5 * (1.0 - lz);
    let ks = kernels(&RIESZ2);
    for x in [Vec3::new(0.1, 0.2, 0.3), Vec3::new(-0.4, 0.3, 1.0), Vec3::new(0.5, -0.5, -0.8)] {
        let v = t_volume_multi(&ks, &e, &x, &PvSchedule::default(), &VolumeQuadrature::default()).unwrap();
        for (name, r) in RIESZ2.iter().zip(&v) {
            let (j, k) = pair(name);
            let exact = if j != k {
                0.0
            } else if j == 2 {
                1.0 / 3.0 - lz
            } else {
                1.0 / 3.0 - lx
            };
            assert!((r.value - exact).abs() < 1e-8, "{name} at {x:?}: {} vs {exact}", r.value);
        }
    }
}

#[test]
fn reflection_odd_kernels_vanish_at_ball_centre() {
    let b = ball();
    let ks = kernels(&["riesz2_12", "riesz2_13", "riesz2_23", "riesz4_123", "riesz4_1123", "odd_x1"]);
    let v = t_volume_multi(&ks, &b, &Vec3::zeros(), &PvSchedule::default(), &VolumeQuadrature::default()).unwrap();
    for (k, r) in ks.iter().zip(&v) {
        assert!(r.value.abs() < 1e-8, "{}: {}", k.name(), r.value);
    }
}

#[test]
fn eps_series_is_flat_for_interior_points() {
    let b = Atlas::from_family(&DomainFamily::BumpedSphere { radius: 1.0, amplitude: 0.05, frequency: 3.0 }).unwrap();
    let k = catalog_kernel("riesz2_13").unwrap();
    let v = t_volume_pv(&k, &b, &Vec3::new(0.3, -0.2, 0.4), &PvSchedule::default(), &VolumeQuadrature::default()).unwrap();
    assert_eq!(v.eps_series.len(), 7);
    assert!(v.eps_series.windows(2).all(|w| w[1].0 < w[0].0 && w[1].0 > 0.0));
    for w in v.eps_series[2..].windows(2) {
        assert!((w[0].1 - w[1].1).abs() <= 1e-6, "{:?}", v.eps_series);
    }
}

#[test]
fn union_of_disjoint_bodies_is_additive() {
    let a = PlacedBody::new(ball(), Vec3::new(-1.5, 0.0, 0.0)).unwrap();
    let e = Atlas::from_family(&DomainFamily::Ellipsoid { radii: [0.6, 0.8, 1.0] }).unwrap();
    let b = PlacedBody::new(e, Vec3::new(1.5, 0.2, 0.0)).unwrap();
    let u = BodyUnion::new(vec![a.clone(), b.clone()]).unwrap();
    let ks = kernels(&["riesz2_11", "riesz2_23", "riesz4_1123"]);
    let q = VolumeQuadrature { silhouette_samples: 1024, ..VolumeQuadrature::default().refined(1e4) };
    let s = PvSchedule::default();
    for x in [Vec3::new(0.0, 0.3, 0.1), Vec3::new(-1.3, 0.2, 0.1), Vec3::new(1.6, 0.1, -0.3)] {
        let whole = t_volume_multi(&ks, &u, &x, &s, &q).unwrap();
        let pa = t_volume_multi(&ks, &a, &x, &s, &q).unwrap();
        let pb = t_volume_multi(&ks, &b, &x, &s, &q).unwrap();
        for i in 0..ks.len() {
            let sum = pa[i].value + pb[i].value;
            assert!((whole[i].value - sum).abs() < 1e-10, "{x:?} {i}: {} vs {sum}", whole[i].value);
        }
    }
}

#[test]
fn union_rejects_overlapping_parts() {
    let a = PlacedBody::new(ball(), Vec3::zeros()).unwrap();
    let b = PlacedBody::new(ball(), Vec3::new(1.5, 0.0, 0.0)).unwrap();
    assert!(BodyUnion::new(vec![a, b]).is_err());
}

#[test]
fn jump_constant_matches_ball_traces() {
    // On the unit ball the interior value is 0 and the exterior trace is
    // ν_jν_k − δ_jk/3, so c(ν) = −(ν_jν_k − δ_jk/3)/2.
    let k33 = catalog_kernel("riesz2_33").unwrap();
    assert!((jump_constant(&k33, &Vec3::new(0.0, 0.0, 1.0)) + 1.0 / 3.0).abs() < 1e-12);
    let nu = Vec3::new(0.48, -0.6, 0.64);
    for name in RIESZ2 {
        let (j, k) = pair(name);
        let kern = catalog_kernel(name).unwrap();
        let d = if j == k { 1.0 / 3.0 } else { 0.0 };
        let exact = -0.5 * (nu[j] * nu[k] - d);
        assert!((jump_constant(&kern, &nu) - exact).abs() < 1e-11, "{name}");
    }
}

#[test]
fn ball_boundary_traces() {
    let b = ball();
    let ks = kernels(&RIESZ2);
    let q = VolumeQuadrature::default();
    for y in [Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.48, -0.6, 0.64), Vec3::new(-0.6, 0.0, -0.8)] {
        let tr = t_boundary_traces(&ks, &b, &y, &(-y), &q).unwrap();
        for (name, t) in RIESZ2.iter().zip(&tr) {
            let (j, k) = pair(name);
            let d = if j == k { 1.0 / 3.0 } else { 0.0 };
            assert!(t.interior.abs() < 1e-7, "{name} at {y:?}: {}", t.interior);
            assert!((t.exterior - (y[j] * y[k] - d)).abs() < 1e-7, "{name}");
        }
    }
}

#[test]
fn traces_agree_with_nearby_values_on_bumped_sphere() {
    let b = Atlas::from_family(&DomainFamily::BumpedSphere { radius: 1.0, amplitude: 0.05, frequency: 3.0 }).unwrap();
    let k = catalog_kernel("riesz2_12").unwrap();
    let foot = b.foot_point(&Vec3::new(0.5, 0.5, 0.7)).unwrap();
    let q = VolumeQuadrature::default();
    let tr = t_boundary_traces(std::slice::from_ref(&k), &b, &foot.point, &foot.normal, &q).unwrap()[0];
    let s = PvSchedule::default();
    let mut prev_in = f64::INFINITY;
    let mut prev_out = f64::INFINITY;
    for delta in [1e-2, 1e-3, 1e-4] {
        let xin = foot.point + foot.normal * delta;
        let xout = foot.point - foot.normal * delta;
        let vin = t_volume_pv(&k, &b, &xin, &s, &q).unwrap().value;
        let vout = t_volume_pv(&k, &b, &xout, &s, &q).unwrap().value;
        let (din, dout) = ((vin - tr.interior).abs(), (vout - tr.exterior).abs());
        assert!(din < prev_in && dout < prev_out, "δ={delta}: {din} {dout}");
        prev_in = din;
        prev_out = dout;
    }
    assert!(prev_in < 5e-3 && prev_out < 5e-3, "{prev_in} {prev_out}");
}

#[test]
fn rejects_invalid_requests() {
    let b = ball();
    let q = VolumeQuadrature::default();
    let s = PvSchedule::default();
    let odd = catalog_kernel("odd_x1").unwrap();
    assert!(t_boundary_pv(&[odd], &b, &Vec3::new(0.0, 0.0, 1.0), &Vec3::new(0.0, 0.0, -1.0), &q).is_err());
    let k = catalog_kernel("riesz2_11").unwrap();
    assert!(t_volume_pv(&k, &b, &Vec3::new(0.0, 0.0, 1.0), &s, &q).is_err());
    let not_cz = HomogeneousKernel::parse_spec("poly: x1^2; power: 5; n: 3").unwrap();
    assert!(t_volume_pv(&not_cz, &b, &Vec3::new(0.1, 0.0, 0.0), &s, &q).is_err());
    let disk_kernel = catalog_kernel("beurling_re").unwrap();
    assert!(t_volume_pv(&disk_kernel, &b, &Vec3::new(0.1, 0.0, 0.0), &s, &q).is_err());
    let bad = PvSchedule { eps0_factor: 1.5, ..s };
    assert!(t_volume_pv(&k, &b, &Vec3::new(0.1, 0.0, 0.0), &bad, &q).unwrap_err().is_config());
}

#[test]
fn fourier_oracle_ball_interior() {
    let b = ball();
    let k = catalog_kernel("riesz2_12").unwrap();
    let g = t_fourier_oracle(&k, &b, &GridOracleConfig::default()).unwrap();
    assert_eq!(g.n, 96);
    for x in [Vec3::new(0.3, 0.2, 0.1), Vec3::new(-0.2, 0.4, 0.0), Vec3::new(0.1, -0.3, -0.3)] {
        let (_, v) = g.snap(&x).unwrap();
        assert!(v.abs() <= 5e-3, "{v}");
    }
}

#[test]
fn fourier_oracle_agrees_with_ellipsoid_constant() {
    let e = Atlas::from_family(&DomainFamily::Ellipsoid { radii: [1.0, 1.0, 2.0] }).unwrap();
    let k = catalog_kernel("riesz2_33").unwrap();
    let g = t_fourier_oracle(&k, &e, &GridOracleConfig::default()).unwrap();
    let exact = 1.0 / 3.0 - prolate_axial_factor(2.0);
    let (_, v) = g.snap(&Vec3::new(0.2, 0.1, 0.3)).unwrap();
    assert!((v - exact).abs() < 1e-2 * exact, "{v} vs {exact}");
}

#[test]
fn fourier_oracle_rejects_small_box() {
    let k = catalog_kernel("riesz2_12").unwrap();
    let cfg = GridOracleConfig { box_side: Some(3.0), ..Default::default() };
    assert!(t_fourier_oracle(&k, &ball(), &cfg).unwrap_err().is_config());
}

#[test]
fn fourier_grid_dump_round_trips() {
    let k = catalog_kernel("beurling_re").unwrap();
    let d = Atlas::from_family(&DomainFamily::Disk { radius: 1.0 }).unwrap();
    let cfg = GridOracleConfig { resolution_2d: 64, ..Default::default() };
    let g = t_fourier_oracle(&k, &d, &cfg).unwrap();
    let dir = std::env::temp_dir().join(format!("czpatch-grid-{}", std::process::id()));
    g.dump(&dir, "grid").unwrap();
    let bytes = std::fs::read(dir.join("grid.bin")).unwrap();
    assert_eq!(bytes.len(), 64 * 64 * 8);
    let first = f64::from_le_bytes(bytes[..8].try_into().unwrap());
    assert_eq!(first, g.values[0]);
    let header: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("grid.json")).unwrap()).unwrap();
    assert_eq!(header["dims"], serde_json::json!([64, 64]));
    std::fs::remove_dir_all(dir).ok();
}
