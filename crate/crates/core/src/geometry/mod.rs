//! Boundary patches: charts, atlases of shipped test domains and the
//! geometric norms that control the operator estimates.

mod atlas;
mod chart;
mod norms;
mod shape;

pub use atlas::{integrate_core, nearest_on_chart, Atlas, FootPoint, Side, DEFAULT_OVERLAP};
pub use chart::{
    cube_face_rects, normal_from_jacobian, normal_tilde_from_jacobian, Chart, ChartMap, Jacobian, ParamRect, SphereParam, Vec3,
};
pub use norms::{
    arc_chord_min, chart_extremes, check_denominator_bound, check_normal_tilde_bounds, default_eta, delta_cutoff, eta_bar,
    far_cutoff, norms, reach_and_diameter, ChartExtremes, DenominatorReport, DomainNorms, SamplingConfig,
};
pub use shape::{DomainFamily, RadialShape};
