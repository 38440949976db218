use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_czpatch")).args(args).arg("--config").arg(&cfg).output().unwrap()
}

fn out_dir(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sphere_norms_report_the_area() {
    let t = TempDir::new().unwrap();
    let out = out_dir(t.path(), "norms");
    let o = run(t.path(), &["norms", "--out", out.to_str().unwrap()], "sigma = 0.5\n[domain]\nfamily = \"sphere\"\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let area = json(&out.join("norms.json"))["norms"]["area"].as_f64().unwrap();
    assert!((area - 4.0 * PI).abs() <= 1e-9 * 4.0 * PI, "{area}");
    assert_eq!(fs::read_to_string(out.join("config.toml")).unwrap(), fs::read_to_string(t.path().join("run.toml")).unwrap());
}

#[test]
fn malformed_config_names_the_field() {
    let t = TempDir::new().unwrap();
    let out = out_dir(t.path(), "bad");
    for (config, field) in [
        ("sigma = \"half\"\n", "sigma"),
        ("sigma = 1.5\n", "sigma"),
        ("sigmaa = 0.5\n", "sigmaa"),
        ("[holder]\npairs = 0\n", "holder.pairs"),
        ("[domain]\nfamily = \"sphere\"\nradiuss = 1.0\n", "radiuss"),
        ("kernels = [\"no_such_kernel\"]\n", "kernels"),
    ] {
        let o = run(t.path(), &["norms", "--out", out.to_str().unwrap()], config);
        assert_eq!(o.status.code(), Some(2), "{config}");
        assert!(stderr(&o).contains(field), "{config}: {}", stderr(&o));
    }
}

#[test]
fn sweep_writes_one_report_per_member() {
    let t = TempDir::new().unwrap();
    let out = out_dir(t.path(), "sweep");
    let config = "[domain]\nfamily = \"bumped_circle\"\namplitude = 0.0\n[sweep]\namplitudes = [0.0, 0.02, 0.05]\n";
    let o = run(t.path(), &["norms", "--out", out.to_str().unwrap()], config);
    assert!(o.status.success(), "{}", stderr(&o));
    let holders: Vec<f64> = (0..3)
        .map(|i| {
            let r = json(&out.join(format!("norms_{i:02}.json")));
            r["norms"]["holder_1s"].as_f64().unwrap()
        })
        .collect();
    assert!(!out.join("norms_03.json").exists());
    assert!(holders[0] < holders[1] && holders[1] < holders[2], "{holders:?}");
    let csv = fs::read_to_string(out.join("norms.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn odd_kernel_profile_is_flagged_log_divergent() {
    let t = TempDir::new().unwrap();
    let out = out_dir(t.path(), "profile");
    let config = "kernels = [\"odd_x1\"]\n[domain]\nfamily = \"bumped_sphere\"\namplitude = 0.05\n";
    let o = run(t.path(), &["profile", "--out", out.to_str().unwrap()], config);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&out.join("profile_odd_x1.json"));
    assert_eq!(r["class"], "log-divergent");
    for fit in r["fits"].as_array().unwrap() {
        assert_eq!(fit["class"], "log-divergent");
    }
    let csv = fs::read_to_string(out.join("profile_odd_x1.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "side,delta,value");
    assert_eq!(csv.lines().count(), 1 + 2 * 9);
}

#[test]
fn empty_points_file_is_a_config_error() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("pts.csv"), "x,y,z\n").unwrap();
    let out = out_dir(t.path(), "eval");
    let o = run(t.path(), &["eval", "--out", out.to_str().unwrap()], "kernels = [\"riesz2_33\"]\n[eval]\npoints = \"pts.csv\"\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("eval.points"), "{}", stderr(&o));
}

#[test]
fn eval_reports_every_point_and_kernel() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("pts.csv"), "x,y,z\n0.2,0.1,0.0\n-0.3,0.4,0.1\n1.0,0.0,0.0\n1.5,0.2,0.3\n").unwrap();
    let out = out_dir(t.path(), "eval");
    let config = "kernels = [\"riesz2_33\", \"odd_x1\"]\n[domain]\nfamily = \"sphere\"\n[eval]\npoints = \"pts.csv\"\n";
    let o = run(t.path(), &["eval", "--out", out.to_str().unwrap()], config);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("eval.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    // Second-order Riesz transforms of the ball are constant inside it.
    let (a, b): (f64, f64) = (rows[0][6].parse().unwrap(), rows[1][6].parse().unwrap());
    assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
    assert_eq!((rows[2][4], rows[2][5]), ("boundary", "boundary_pv"));
    assert_eq!((rows[3][4], rows[3][5]), ("exterior", "boundary"));
    assert_eq!((rows[4][4], rows[4][5]), ("interior", "volume"));
    assert_eq!(rows[6][5], "undefined_on_boundary");
}

#[test]
fn oracle_check_passes_on_the_ellipsoid() {
    let t = TempDir::new().unwrap();
    let out = out_dir(t.path(), "oracle");
    let config =
        "kernels = [\"riesz2_11\", \"riesz2_12\", \"riesz2_33\"]\n[domain]\nfamily = \"ellipsoid\"\nradii = [1.0, 1.0, 2.0]\n";
    let o = run(t.path(), &["oracle-check", "--out", out.to_str().unwrap()], config);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&out.join("oracle.json"));
    assert_eq!(r["pass"], true);
    for k in r["kernels"].as_array().unwrap() {
        assert!(k["boundary_max_rel"].as_f64().unwrap() <= 1e-3);
        assert!(k["fourier_max_rel"].as_f64().unwrap() <= 1e-2);
    }
}

#[test]
fn oracle_check_failure_exits_3() {
    let t = TempDir::new().unwrap();
    let out = out_dir(t.path(), "oracle");
    let config =
        "kernels = [\"beurling_re\"]\n[domain]\nfamily = \"disk\"\n[oracle]\nfourier = false\nboundary_tolerance = 1e-300\n";
    let o = run(t.path(), &["oracle-check", "--out", out.to_str().unwrap()], config);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(json(&out.join("oracle.json"))["pass"], false);
}

#[test]
fn convergence_failure_serializes_the_probe() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("pts.csv"), "x,y,z\n0.2,0.1,0.0\n1.5,0.2,0.3\n").unwrap();
    let out = out_dir(t.path(), "fail");
    let config = "kernels = [\"odd_x1\"]\n[eval]\npoints = \"pts.csv\"\n[volume]\nabs_tol = 1e-16\nrel_tol = 1e-16\n\
                  max_intervals = 1\nazimuth_pieces = 1\nazimuth_max_intervals = 1\n";
    let o = run(t.path(), &["eval", "--out", out.to_str().unwrap()], config);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let f = json(&out.join("failure.json"));
    assert_eq!(f["kernel"], "odd_x1");
    assert_eq!(f["point"], serde_json::json!([0.2, 0.1, 0.0]));
}

#[test]
fn classify_tags_pairs() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("pairs.csv"), "x1,y1,z1,x2,y2,z2\n0.0,0.0,0.0,0.1,0.0,0.0\n0.9,0,0,1.1,0,0\n").unwrap();
    let out = out_dir(t.path(), "classify");
    let o = run(t.path(), &["classify", "--out", out.to_str().unwrap()], "[classify]\npairs = \"pairs.csv\"\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("classify.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[1].starts_with("0,far,interior"), "{}", rows[1]);
    assert!(rows[2].starts_with("1,unclassified"), "{}", rows[2]);
}

#[test]
fn identical_runs_are_byte_identical() {
    let t = TempDir::new().unwrap();
    let config = "seed = 11\nkernels = [\"beurling_re\"]\n[domain]\nfamily = \"bumped_circle\"\namplitude = 0.05\n\
                  [holder]\npairs = 8\n";
    let dirs = [out_dir(t.path(), "a"), out_dir(t.path(), "b")];
    for (d, workers) in dirs.iter().zip(["1", "2"]) {
        let o = run(t.path(), &["holder-scan", "--workers", workers, "--out", d.to_str().unwrap()], config);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["holder_beurling_re.csv", "holder_beurling_re.json", "config.toml"] {
        assert_eq!(fs::read(dirs[0].join(name)).unwrap(), fs::read(dirs[1].join(name)).unwrap(), "{name}");
    }
    let other = out_dir(t.path(), "c");
    let o = run(t.path(), &["holder-scan", "--seed", "12", "--out", other.to_str().unwrap()], config);
    assert!(o.status.success());
    assert_ne!(
        fs::read(dirs[0].join("holder_beurling_re.csv")).unwrap(),
        fs::read(other.join("holder_beurling_re.csv")).unwrap()
    );
}
