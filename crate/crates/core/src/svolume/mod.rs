//! Volume integrals T(1_D) for even Calderón–Zygmund kernels.

pub mod domain;
pub mod fourier;
pub mod polar;

pub use domain::{BodyUnion, PlacedBody, VolumeDomain};
pub use fourier::{apply_multiplier, t_fourier_oracle, truncation_factor, FourierGrid, GridOracleConfig};
pub use polar::{
    jump_constant, t_boundary_pv, t_boundary_traces, t_volume_multi, t_volume_pv, BoundaryTraces, PvSchedule, VolumeQuadrature,
    VolumeValue,
};
