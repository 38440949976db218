//! Run configuration read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use czpatch::geometry::{DomainFamily, SamplingConfig, Side};
use czpatch::holder::PairConfig;
use czpatch::kernels::{resolve_kernel, HomogeneousKernel};
use czpatch::sboundary::{BoundaryQuadrature, Density};
use czpatch::svolume::{GridOracleConfig, PvSchedule, VolumeQuadrature};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output: PathBuf,
    pub sigma: f64,
    /// Catalog names or inline kernel specs.
    pub kernels: Vec<String>,
    pub domain: DomainFamily,
    pub sweep: Option<Sweep>,
    pub sampling: SamplingConfig,
    pub boundary: BoundaryQuadrature,
    pub volume: VolumeQuadrature,
    pub pv: PvSchedule,
    pub grid: GridOracleConfig,
    pub holder: PairConfig,
    pub profile: ProfileConfig,
    pub eval: EvalConfig,
    pub oracle: OracleConfig,
    pub density: DensitySpec,
    pub classify: ClassifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output: PathBuf::from("czpatch-out"),
            sigma: 0.5,
            kernels: Vec::new(),
            domain: DomainFamily::default(),
            sweep: None,
            sampling: SamplingConfig::default(),
            boundary: BoundaryQuadrature::default(),
            volume: VolumeQuadrature::default(),
            pv: PvSchedule::default(),
            grid: GridOracleConfig {
                free_space: true,
                smoothing_cells: 1.0,
                subsamples: 8,
                resolution_2d: 512,
                ..GridOracleConfig::default()
            },
            holder: PairConfig::default(),
            profile: ProfileConfig::default(),
            eval: EvalConfig::default(),
            oracle: OracleConfig::default(),
            density: DensitySpec::default(),
            classify: ClassifyConfig::default(),
        }
    }
}

/// Amplitudes of a bumped family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub delta_min: f64,
    pub delta_max: f64,
    pub count: usize,
    /// The ray starts at the foot point of this point.
    pub direction: [f64; 3],
    pub sides: Vec<Side>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            delta_min: 1e-3,
            delta_max: 1e-1,
            count: 9,
            direction: [1.0, 0.3, 0.2],
            sides: vec![Side::Interior, Side::Exterior],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    /// Boundary reduction for even kernels off ∂D, volume route otherwise.
    Auto,
    Volume,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    /// T(1_D).
    Patch,
    /// S(f) with the configured density.
    Layer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// CSV with columns x, y and optionally z.
    pub points: Option<PathBuf>,
    pub method: EvalMethod,
    pub operator: Operator,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { points: None, method: EvalMethod::Auto, operator: Operator::Patch }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Probes per side for the boundary/volume comparison.
    pub probes: usize,
    /// Minimum probe distance to ∂D as a fraction of the diameter.
    pub min_distance: f64,
    /// Relative error floor as a fraction of the largest reference value.
    pub floor: f64,
    pub boundary_tolerance: f64,
    pub fourier: bool,
    /// Grid probes per side, at least three cells from ∂D.
    pub grid_probes: usize,
    /// Max-norm relative tolerance of the grid comparison.
    pub fourier_tolerance: f64,
    pub dump_grid: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            probes: 10,
            min_distance: 0.1,
            floor: 0.1,
            boundary_tolerance: 1e-3,
            fourier: true,
            grid_probes: 10,
            fourier_tolerance: 1e-2,
            dump_grid: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Constant { value: f64 },
    NormalComponent { index: usize },
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec::Constant { value: 1.0 }
    }
}

impl DensitySpec {
    pub fn density(&self, dim: usize) -> Result<Density, CliError> {
        match *self {
            DensitySpec::Constant { value } => Ok(Density::Constant(value)),
            DensitySpec::NormalComponent { index } if index < dim => Ok(Density::NormalComponent(index)),
            DensitySpec::NormalComponent { index } => {
                Err(CliError::config("density.index", format!("component {index} does not exist in dimension {dim}")))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// CSV with columns x1, y1, z1, x2, y2, z2.
    pub pairs: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Interprets relative input paths against `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        for p in [&mut self.eval.points, &mut self.classify.pairs].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(CliError::config("sigma", "Hölder exponent must lie in (0, 1)"));
        }
        self.domain.shape()?;
        self.sampling.validate()?;
        self.boundary.validate()?;
        self.volume.validate()?;
        self.pv.validate()?;
        self.grid.validate()?;
        PairConfig { sigma: self.sigma, ..self.holder }.validate()?;
        if let Some(s) = &self.sweep {
            if s.amplitudes.is_empty() {
                return Err(CliError::config("sweep.amplitudes", "empty sweep"));
            }
            if !matches!(self.domain, DomainFamily::BumpedSphere { .. } | DomainFamily::BumpedCircle { .. }) {
                return Err(CliError::config("sweep.amplitudes", "sweeps need a bumped_sphere or bumped_circle domain"));
            }
        }
        let p = &self.profile;
        if !(p.delta_min > 0.0 && p.delta_max > p.delta_min) || p.count < 2 {
            return Err(CliError::config("profile", "need 0 < delta_min < delta_max and count ≥ 2"));
        }
        if p.sides.iter().any(|s| *s == Side::Boundary) {
            return Err(CliError::config("profile.sides", "profiles run into the interior or the exterior"));
        }
        let o = &self.oracle;
        if o.probes == 0 || !(o.min_distance > 0.0) || !(o.floor > 0.0) {
            return Err(CliError::config("oracle", "probes, min_distance and floor must be positive"));
        }
        self.kernels()?;
        Ok(())
    }

    pub fn kernels(&self) -> Result<Vec<HomogeneousKernel>, CliError> {
        self.kernels.iter().map(|s| resolve_kernel(s).map_err(|e| CliError::config("kernels", format!("{s}: {e}")))).collect()
    }

    /// The configured kernels, failing when none is given.
    pub fn required_kernels(&self) -> Result<Vec<HomogeneousKernel>, CliError> {
        let ks = self.kernels()?;
        if ks.is_empty() {
            return Err(CliError::config("kernels", "at least one kernel is required"));
        }
        Ok(ks)
    }

    /// The domain, or one domain per sweep amplitude.
    pub fn domains(&self) -> Vec<DomainFamily> {
        let Some(sweep) = &self.sweep else {
            return vec![self.domain.clone()];
        };
        sweep
            .amplitudes
            .iter()
            .map(|&a| match self.domain.clone() {
                DomainFamily::BumpedSphere { radius, frequency, .. } => {
                    DomainFamily::BumpedSphere { radius, amplitude: a, frequency }
                }
                DomainFamily::BumpedCircle { radius, frequency, .. } => {
                    DomainFamily::BumpedCircle { radius, amplitude: a, frequency }
                }
                other => other,
            })
            .collect()
    }

    pub fn pair_config(&self) -> PairConfig {
        PairConfig { sigma: self.sigma, seed: self.seed, ..self.holder }
    }
}
