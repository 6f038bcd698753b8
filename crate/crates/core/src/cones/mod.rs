//! Tangent cones and exact polyhedral cone arithmetic.

mod exact;
mod polycone;
mod sampled;
mod tangent;

pub use exact::{int_from_f64, unit_f64, IntVec};
pub use polycone::{
    cone_diff, cone_diff_with_cap, cone_intersect, cone_intersect_with_cap, cone_sum, cone_sum_with_cap,
    is_dense_difference, polar, DensityCertificate, PolyCone, PolyConeRecord, DEFAULT_RAY_CAP,
};
pub(crate) use sampled::profile_by;
pub use sampled::{
    direction_net, tangent_cone_sampled, tangent_cone_sampled_with, DirectionProfile, Membership, SampledCone,
    SamplingOptions, DEFAULT_BUDGET, DEFAULT_CLASSIFY_TOL,
};
pub use tangent::{
    clarke_cone_convex, exact_convex_cone, tangent_cone, tangent_cone_polyhedral, tangent_cone_polyhedron,
    TangentCone, ACTIVITY_TOL,
};
