//! Subcommand implementations.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use czpatch::geometry::{norms, reach_and_diameter, Atlas, DomainFamily, DomainNorms, Side, Vec3};
use czpatch::holder::{
    bound_factor, density_norms, holder_scan, linearity_study, linf_profile, log_spaced, BoundMode, Field, FieldEvaluator,
    LinearityTable, PairSample, Profile, ProfileClass, RegimeReport, StudyQuadrature,
};
use czpatch::kernels::{HomogeneousKernel, Parity};
use czpatch::normalcoords::classify_regime;
use czpatch::sboundary::{s_eval, t_from_boundary};
use czpatch::svolume::{t_boundary_traces, t_fourier_oracle, t_volume_multi};

use crate::config::{EvalMethod, Operator, RunConfig};
use crate::error::{CliError, FailedProbe};
use crate::output::{slug, OutDir};

pub struct Context {
    pub config: RunConfig,
    pub out: OutDir,
}

impl Context {
    fn atlas(&self, family: &DomainFamily) -> Result<Atlas, CliError> {
        Ok(Atlas::from_family(family)?)
    }

    fn norms(&self, atlas: &Atlas) -> Result<DomainNorms, CliError> {
        Ok(norms(atlas, self.config.sigma, &self.config.sampling, None)?)
    }

    /// T(1_D) or S(f) for `k`, with the configured quadrature.
    fn evaluator<'a>(&self, k: &HomogeneousKernel, atlas: &'a Atlas) -> Result<FieldEvaluator<'a>, CliError> {
        let field = match self.config.eval.operator {
            Operator::Patch => Field::Patch(k.clone()),
            Operator::Layer => Field::Boundary(k.clone(), self.config.density.density(atlas.dim)?),
        };
        let mut u = FieldEvaluator::new(field, atlas)?;
        u.boundary = self.config.boundary;
        u.volume = self.config.volume;
        u.schedule = self.config.pv;
        Ok(u)
    }

    /// Attaches the probe to a numerical failure.
    fn fail(&self, kernel: &str, atlas: &Atlas, x: &Vec3, e: czpatch::Error) -> CliError {
        if e.is_config() {
            return e.into();
        }
        CliError::Probe(Box::new(FailedProbe {
            kernel: kernel.to_string(),
            domain: atlas.label.clone(),
            point: coords(x, atlas.dim),
            error: e.to_string(),
        }))
    }
}

/// Values in input order, or the first failure in input order.
fn ordered<T>(results: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    results.into_iter().collect()
}

fn coords(x: &Vec3, dim: usize) -> Vec<f64> {
    x.iter().take(dim).copied().collect()
}

fn side_name(side: Option<Side>) -> &'static str {
    match side {
        Some(Side::Interior) => "interior",
        Some(Side::Exterior) => "exterior",
        Some(Side::Boundary) => "boundary",
        None => "unknown",
    }
}

#[derive(Debug, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
    #[serde(default)]
    z: f64,
}

#[derive(Debug, Deserialize)]
struct PairRow {
    x1: f64,
    y1: f64,
    #[serde(default)]
    z1: f64,
    x2: f64,
    y2: f64,
    #[serde(default)]
    z2: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, field: &str) -> Result<Vec<T>, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(field, format!("{}: {e}", path.display())))?;
    let rows: Vec<T> =
        r.deserialize().collect::<Result<_, _>>().map_err(|e| CliError::config(field, format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(CliError::config(field, format!("{} contains no rows", path.display())));
    }
    Ok(rows)
}

fn check_planar(points: &[Vec3], dim: usize, field: &str) -> Result<(), CliError> {
    if dim == 2 && points.iter().any(|p| p.z != 0.0) {
        return Err(CliError::config(field, "planar domains take points with z = 0"));
    }
    Ok(())
}

#[derive(Serialize)]
struct NormsReport<'a> {
    domain: String,
    family: &'a DomainFamily,
    sigma: f64,
    norms: DomainNorms,
}

#[derive(Serialize)]
struct NormsRow {
    member: usize,
    domain: String,
    area: f64,
    star: f64,
    lip: f64,
    holder_1s: f64,
    dz_inf: f64,
    reach: f64,
    diameter: f64,
    far_cut: f64,
}

pub fn cmd_norms(ctx: &Context) -> Result<(), CliError> {
    let families = ctx.config.domains();
    let mut rows = Vec::new();
    for (i, family) in families.iter().enumerate() {
        let atlas = ctx.atlas(family)?;
        let n = ctx.norms(&atlas)?;
        let report = NormsReport { domain: atlas.label.clone(), family, sigma: ctx.config.sigma, norms: n };
        let name = if ctx.config.sweep.is_some() { format!("norms_{i:02}.json") } else { "norms.json".to_string() };
        ctx.out.json(&name, &report)?;
        rows.push(NormsRow {
            member: i,
            domain: atlas.label.clone(),
            area: n.area,
            star: n.star,
            lip: n.lip,
            holder_1s: n.holder_1s,
            dz_inf: n.dz_inf,
            reach: n.reach,
            diameter: n.diameter,
            far_cut: n.far_cut,
        });
    }
    ctx.out.csv("norms.csv", &rows)
}

#[derive(Serialize)]
struct EvalRow {
    kernel: String,
    x: f64,
    y: f64,
    z: f64,
    side: &'static str,
    method: &'static str,
    value: f64,
    error_estimate: f64,
}

pub fn cmd_eval(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let path = c.eval.points.as_ref().ok_or_else(|| CliError::config("eval.points", "a points file is required"))?;
    let points: Vec<Vec3> = read_rows::<PointRow>(path, "eval.points")?.into_iter().map(|p| Vec3::new(p.x, p.y, p.z)).collect();
    let atlas = ctx.atlas(&c.domain)?;
    check_planar(&points, atlas.dim, "eval.points")?;
    let kernels = c.required_kernels()?;
    let density = match c.eval.operator {
        Operator::Layer => Some(c.density.density(atlas.dim)?),
        Operator::Patch => None,
    };
    let mut rows = Vec::new();
    for k in &kernels {
        let results: Vec<Result<EvalRow, CliError>> = points
            .par_iter()
            .map(|x| {
                let side = atlas.side_of(x);
                let row = |method, value, error_estimate| EvalRow {
                    kernel: k.name().to_string(),
                    x: x.x,
                    y: x.y,
                    z: x.z,
                    side: side_name(side),
                    method,
                    value,
                    error_estimate,
                };
                let fail = |e| ctx.fail(k.name(), &atlas, x, e);
                if let Some(f) = &density {
                    let v = s_eval(k, &atlas, f, x, &c.boundary).map_err(fail)?;
                    return Ok(row("layer", v.value, v.error));
                }
                if side == Some(Side::Boundary) {
                    if k.parity() == Parity::Odd {
                        return Ok(row("undefined_on_boundary", f64::NAN, f64::NAN));
                    }
                    let normal = atlas.foot_point(x).map_err(fail)?.normal;
                    let t = t_boundary_traces(std::slice::from_ref(k), &atlas, x, &normal, &c.volume).map_err(fail)?;
                    return Ok(row("boundary_pv", t[0].pv, f64::NAN));
                }
                let reduce = match c.eval.method {
                    EvalMethod::Auto => k.parity() == Parity::Even,
                    EvalMethod::Boundary => true,
                    EvalMethod::Volume => false,
                };
                if reduce {
                    let v = t_from_boundary(std::slice::from_ref(k), &atlas, x, &c.boundary).map_err(fail)?;
                    Ok(row("boundary", v[0], f64::NAN))
                } else {
                    let v = t_volume_multi(std::slice::from_ref(k), &atlas, x, &c.pv, &c.volume).map_err(fail)?;
                    Ok(row("volume", v[0].value, v[0].error))
                }
            })
            .collect();
        rows.extend(ordered(results)?);
    }
    ctx.out.csv("eval.csv", &rows)
}

#[derive(Serialize)]
struct ProfileRow {
    side: Side,
    delta: f64,
    value: f64,
}

#[derive(Serialize)]
struct ProfileFit {
    side: Side,
    c1: f64,
    c2: f64,
    r2: f64,
    threshold: f64,
    class: ProfileClass,
}

#[derive(Serialize)]
struct ProfileReport {
    kernel: String,
    domain: String,
    foot: Vec<f64>,
    normal: Vec<f64>,
    fits: Vec<ProfileFit>,
    /// "log-divergent" when any side diverges, "bounded" otherwise.
    class: ProfileClass,
}

pub fn cmd_profile(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let atlas = ctx.atlas(&c.domain)?;
    let p = &c.profile;
    let mut dir = Vec3::from(p.direction);
    if atlas.dim == 2 {
        dir.z = 0.0;
    }
    let foot = atlas.foot_point(&dir)?;
    let deltas = log_spaced(p.delta_min, p.delta_max, p.count);
    for k in &c.required_kernels()? {
        let u = ctx.evaluator(k, &atlas)?;
        let profiles: Vec<Profile> = p
            .sides
            .iter()
            .map(|&side| {
                linf_profile(&u, &atlas, foot.chart, &foot.alpha, side, &deltas)
                    .map_err(|e| ctx.fail(k.name(), &atlas, &foot.point, e))
            })
            .collect::<Result<_, _>>()?;
        let rows: Vec<ProfileRow> = profiles
            .iter()
            .flat_map(|pr| pr.points.iter().map(|&(delta, value)| ProfileRow { side: pr.side, delta, value }))
            .collect();
        let divergent = profiles.iter().any(|pr| pr.class == ProfileClass::LogDivergent);
        let report = ProfileReport {
            kernel: k.name().to_string(),
            domain: atlas.label.clone(),
            foot: coords(&foot.point, atlas.dim),
            normal: coords(&foot.normal, atlas.dim),
            fits: profiles
                .iter()
                .map(|pr| ProfileFit { side: pr.side, c1: pr.c1, c2: pr.c2, r2: pr.r2, threshold: pr.threshold, class: pr.class })
                .collect(),
            class: if divergent { ProfileClass::LogDivergent } else { ProfileClass::Bounded },
        };
        let stem = format!("profile_{}", slug(k.name()));
        ctx.out.csv(&format!("{stem}.csv"), &rows)?;
        ctx.out.json(&format!("{stem}.json"), &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct HolderRow {
    regime: &'static str,
    side: Side,
    pairs: usize,
    normalish: usize,
    tangentialish: usize,
    max: f64,
    top_decile: f64,
    small_band_max: f64,
    large_band_max: f64,
    growth: f64,
}

#[derive(Serialize)]
struct HolderReport {
    kernel: String,
    domain: String,
    sigma: f64,
    /// Largest sampled quotient: a lower bound for the seminorm.
    seminorm_lower_bound: f64,
    bound_factor: f64,
    ratio: f64,
    norms: DomainNorms,
    regimes: Vec<RegimeReport>,
    argmax: Option<PairSample>,
}

pub fn cmd_holder_scan(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let kernels = c.required_kernels()?;
    let pairs = c.pair_config();
    let sweep = c.sweep.is_some();
    for (i, family) in c.domains().iter().enumerate() {
        let atlas = ctx.atlas(family)?;
        let n = ctx.norms(&atlas)?;
        for k in &kernels {
            let u = ctx.evaluator(k, &atlas)?;
            let regimes = holder_scan(&u, &atlas, &n, &pairs)?;
            let mode = match &u.field {
                Field::Patch(_) => BoundMode::T,
                Field::Boundary(_, f) => {
                    let d = density_norms(&atlas, f, c.sigma, 400);
                    BoundMode::S { c_sigma: d.c_sigma, sup: d.sup }
                }
            };
            let factor = bound_factor(&n, mode);
            let best = regimes.iter().max_by(|a, b| a.max.total_cmp(&b.max));
            let seminorm = best.map_or(0.0, |r| r.max);
            let rows: Vec<HolderRow> = regimes
                .iter()
                .map(|r| HolderRow {
                    regime: r.regime.as_str(),
                    side: r.side,
                    pairs: r.pairs,
                    normalish: r.normalish,
                    tangentialish: r.tangentialish,
                    max: r.max,
                    top_decile: r.top_decile,
                    small_band_max: r.small_band_max,
                    large_band_max: r.large_band_max,
                    growth: r.growth(),
                })
                .collect();
            let report = HolderReport {
                kernel: k.name().to_string(),
                domain: atlas.label.clone(),
                sigma: c.sigma,
                seminorm_lower_bound: seminorm,
                bound_factor: factor,
                ratio: seminorm / factor,
                norms: n,
                argmax: best.and_then(|r| r.argmax),
                regimes,
            };
            let stem = if sweep { format!("holder_{i:02}_{}", slug(k.name())) } else { format!("holder_{}", slug(k.name())) };
            ctx.out.csv(&format!("{stem}.csv"), &rows)?;
            ctx.out.json(&format!("{stem}.json"), &report)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ScalingRow {
    amplitude: f64,
    holder_1s: f64,
    area: f64,
    factor: f64,
    seminorm: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct ScalingReport<'a> {
    #[serde(flatten)]
    table: &'a LinearityTable,
    within_3x_band: bool,
}

pub fn cmd_scaling_study(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let DomainFamily::BumpedSphere { radius, frequency, .. } = c.domain else {
        return Err(CliError::config("domain.family", "the scaling study runs over the bumped_sphere family"));
    };
    let amplitudes =
        &c.sweep.as_ref().ok_or_else(|| CliError::config("sweep.amplitudes", "the scaling study needs a sweep"))?.amplitudes;
    if c.eval.operator != Operator::Patch {
        return Err(CliError::config("eval.operator", "the scaling study measures T(1_D)"));
    }
    for k in &c.required_kernels()? {
        let table = linearity_study(k, radius, frequency, amplitudes, &c.pair_config(), &c.sampling, StudyQuadrature::default())?;
        let rows: Vec<ScalingRow> = table
            .rows
            .iter()
            .map(|r| ScalingRow {
                amplitude: r.amplitude,
                holder_1s: r.holder_1s,
                area: r.area,
                factor: r.factor,
                seminorm: r.seminorm,
                ratio: r.ratio,
            })
            .collect();
        let stem = format!("scaling_{}", slug(k.name()));
        ctx.out.csv(&format!("{stem}.csv"), &rows)?;
        ctx.out.json(&format!("{stem}.json"), &ScalingReport { table: &table, within_3x_band: table.band <= 3.0 })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    check: &'static str,
    kernel: String,
    side: &'static str,
    x: f64,
    y: f64,
    z: f64,
    approx: f64,
    reference: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct OracleSummary {
    kernel: String,
    boundary_max_rel: Option<f64>,
    fourier_max_rel: Option<f64>,
    note: Option<String>,
    pass: bool,
}

#[derive(Serialize)]
struct OracleReport {
    domain: String,
    boundary_tolerance: f64,
    fourier_tolerance: f64,
    floor: f64,
    kernels: Vec<OracleSummary>,
    pass: bool,
}

/// Random points on one side at distance ≥ `min_dist` from ∂D.
fn side_probes(
    a: &Atlas,
    side: Side,
    count: usize,
    min_dist: f64,
    reach: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec3>, CliError> {
    let mut out = Vec::new();
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 10_000 * count {
            return Err(CliError::config("oracle.min_distance", "no admissible probes found"));
        }
        let mut x = Vec3::zeros();
        for i in 0..a.dim {
            x[i] = rng.gen_range(-reach..reach);
        }
        if a.side_of(&x) == Some(side) && a.foot_point(&x)?.distance >= min_dist {
            out.push(x);
        }
    }
    Ok(out)
}

/// Grid nodes within `half` of the origin, at least three cells from ∂D.
fn grid_probes(a: &Atlas, spacing: f64, half: f64, per_side: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(Side, Vec3)>, CliError> {
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    let mut tries = 0usize;
    while inside.len() < per_side || outside.len() < per_side {
        tries += 1;
        if tries > 10_000 * per_side.max(1) {
            return Err(CliError::config("grid.box_side", "no grid probes three cells away from the boundary"));
        }
        let mut x = Vec3::zeros();
        for i in 0..a.dim {
            x[i] = (rng.gen_range(-half..half) / spacing).round() * spacing;
        }
        if x.norm() > half || a.foot_point(&x)?.distance < 3.0 * spacing {
            continue;
        }
        match a.side_of(&x) {
            Some(Side::Interior) if inside.len() < per_side => inside.push((Side::Interior, x)),
            Some(Side::Exterior) if outside.len() < per_side => outside.push((Side::Exterior, x)),
            _ => {}
        }
    }
    inside.extend(outside);
    Ok(inside)
}

pub fn cmd_oracle_check(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let o = &c.oracle;
    let atlas = ctx.atlas(&c.domain)?;
    let kernels = c.required_kernels()?;
    for k in &kernels {
        k.require_calderon_zygmund()?;
        if k.dim() != atlas.dim {
            return Err(CliError::config(
                "kernels",
                format!("{} acts in dimension {}, domain has {}", k.name(), k.dim(), atlas.dim),
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let (_, diam) = reach_and_diameter(&atlas, 1200);
    let mut probes: Vec<(Side, Vec3)> = Vec::new();
    for (side, reach) in [(Side::Interior, 0.5 * diam), (Side::Exterior, 1.5 * diam)] {
        probes
            .extend(side_probes(&atlas, side, o.probes, o.min_distance * diam, reach, &mut rng)?.into_iter().map(|x| (side, x)));
    }
    let volume = |pts: &[(Side, Vec3)]| -> Result<Vec<Vec<f64>>, CliError> {
        ordered(
            pts.par_iter()
                .map(|(_, x)| {
                    t_volume_multi(&kernels, &atlas, x, &c.pv, &c.volume)
                        .map(|v| v.into_iter().map(|r| r.value).collect())
                        .map_err(|e| ctx.fail("all", &atlas, x, e))
                })
                .collect(),
        )
    };
    let vol = volume(&probes)?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (ki, k) in kernels.iter().enumerate() {
        let mut s =
            OracleSummary { kernel: k.name().to_string(), boundary_max_rel: None, fourier_max_rel: None, note: None, pass: true };
        let mut notes = Vec::new();
        let scale = |refs: &[f64]| refs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if k.parity() == Parity::Even {
            let bnd = ordered(
                probes
                    .par_iter()
                    .map(|(_, x)| {
                        t_from_boundary(std::slice::from_ref(k), &atlas, x, &c.boundary)
                            .map(|v| v[0])
                            .map_err(|e| ctx.fail(k.name(), &atlas, x, e))
                    })
                    .collect(),
            )?;
            let refs: Vec<f64> = vol.iter().map(|v| v[ki]).collect();
            let floor = o.floor * scale(&refs);
            let mut worst = 0.0f64;
            for (((side, x), a), r) in probes.iter().zip(&bnd).zip(&refs) {
                let rel = (a - r).abs() / r.abs().max(floor).max(1e-300);
                worst = worst.max(rel);
                rows.push(OracleRow {
                    check: "boundary",
                    kernel: k.name().to_string(),
                    side: side_name(Some(*side)),
                    x: x.x,
                    y: x.y,
                    z: x.z,
                    approx: *a,
                    reference: *r,
                    rel_error: rel,
                });
            }
            s.boundary_max_rel = Some(worst);
            s.pass &= worst <= o.boundary_tolerance;
        } else {
            notes.push("boundary reduction applies to even kernels only");
        }
        if o.fourier {
            let even_degrees = k.parity() == Parity::Even;
            if c.grid.free_space && !even_degrees {
                notes.push("free-space grid supports even kernels only");
            } else {
                let grid = t_fourier_oracle(k, &atlas, &c.grid)?;
                if o.dump_grid {
                    grid.dump(&ctx.out.path("grids"), &slug(k.name()))?;
                }
                let side_len = grid.spacing * grid.n as f64;
                let pts = grid_probes(&atlas, grid.spacing, 0.25 * side_len, o.grid_probes, &mut rng)?;
                let refs = ordered(
                    pts.par_iter()
                        .map(|(_, x)| {
                            t_volume_multi(std::slice::from_ref(k), &atlas, x, &c.pv, &c.volume)
                                .map(|v| v[0].value)
                                .map_err(|e| ctx.fail(k.name(), &atlas, x, e))
                        })
                        .collect(),
                )?;
                let denom = scale(&refs).max(1e-300);
                let mut worst = 0.0f64;
                for ((side, x), r) in pts.iter().zip(&refs) {
                    let a = grid.snap(x)?.1;
                    let rel = (a - r).abs() / denom;
                    worst = worst.max(rel);
                    rows.push(OracleRow {
                        check: "fourier",
                        kernel: k.name().to_string(),
                        side: side_name(Some(*side)),
                        x: x.x,
                        y: x.y,
                        z: x.z,
                        approx: a,
                        reference: *r,
                        rel_error: rel,
                    });
                }
                s.fourier_max_rel = Some(worst);
                s.pass &= worst <= o.fourier_tolerance;
            }
        }
        if !notes.is_empty() {
            s.note = Some(notes.join("; "));
        }
        summaries.push(s);
    }
    let pass = summaries.iter().all(|s| s.pass);
    let report = OracleReport {
        domain: atlas.label.clone(),
        boundary_tolerance: o.boundary_tolerance,
        fourier_tolerance: o.fourier_tolerance,
        floor: o.floor,
        kernels: summaries,
        pass,
    };
    ctx.out.csv("oracle_probes.csv", &rows)?;
    ctx.out.json("oracle.json", &report)?;
    if !pass {
        let failing: Vec<&str> = report.kernels.iter().filter(|s| !s.pass).map(|s| s.kernel.as_str()).collect();
        return Err(CliError::OracleFailed(format!("tolerance exceeded for {}", failing.join(", "))));
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyRow {
    pair: usize,
    regime: &'static str,
    side: &'static str,
    delta: f64,
    h_n: f64,
    h_tau_1: f64,
    h_tau_2: f64,
    swapped: bool,
    error: String,
}

pub fn cmd_classify(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let path = c.classify.pairs.as_ref().ok_or_else(|| CliError::config("classify.pairs", "a pairs file is required"))?;
    let pairs: Vec<(Vec3, Vec3)> = read_rows::<PairRow>(path, "classify.pairs")?
        .into_iter()
        .map(|r| (Vec3::new(r.x1, r.y1, r.z1), Vec3::new(r.x2, r.y2, r.z2)))
        .collect();
    let atlas = ctx.atlas(&c.domain)?;
    let flat: Vec<Vec3> = pairs.iter().flat_map(|(p, q)| [*p, *q]).collect();
    check_planar(&flat, atlas.dim, "classify.pairs")?;
    let n = ctx.norms(&atlas)?;
    let far_cut = c.pair_config().far_cut_for(&n);
    let rows: Vec<ClassifyRow> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (p, q))| match classify_regime(&atlas, &n, p, q, far_cut) {
            Ok(r) => ClassifyRow {
                pair: i,
                regime: r.tag.as_str(),
                side: side_name(Some(r.side)),
                delta: r.delta,
                h_n: r.h_n,
                h_tau_1: r.h_tau[0],
                h_tau_2: r.h_tau[1],
                swapped: r.swapped,
                error: String::new(),
            },
            Err(e) => ClassifyRow {
                pair: i,
                regime: "unclassified",
                side: "",
                delta: f64::NAN,
                h_n: f64::NAN,
                h_tau_1: f64::NAN,
                h_tau_2: f64::NAN,
                swapped: false,
                error: e.to_string(),
            },
        })
        .collect();
    ctx.out.csv("classify.csv", &rows)
}
