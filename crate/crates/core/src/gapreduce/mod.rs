//! Constructive gap reduction between two sets and the constructions built on it.

mod metric;
mod nonsep;
mod product;
mod solve;

pub use metric::{check_metric_form, check_metric_form_pairs, MetricFormReport, MetricSample};
pub use nonsep::{k_from_certificate, nonseparation_sequence, NonseparationPoint, NonseparationReport};
pub use product::{lower_product, product_unit_vectors, ProductVector};
pub use solve::{
    admissible_radius, gap_reduction_solve, gap_reduction_solve_with, initial_condition, GapParams, GapRecord,
    GapStatus, GapTrace, DEFAULT_MAX_ITERS,
};
