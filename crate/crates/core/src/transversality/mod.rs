//! Certifiers and estimators for transversality, tangential transversality
//! and subtransversality of two closed sets at a common point.

mod altproj;
mod estimate;
mod kruger;
mod massive;
mod prop44;
mod sampling;
mod step;
mod transfer;

pub use altproj::{altproj_rate, AltProjReport, GapKind};
pub use estimate::{
    estimate_subtransversality_constant, estimate_tangential_constants, validate_tangential_constants,
    SubtransversalityLevel, REFUTE_GROWTH,
};
pub use kruger::{certify_transversality_kruger, certify_transversality_kruger_with, KrugerOptions};
pub use massive::certify_massive_dense;
pub use prop44::{certify_prop44, net_resolution};
pub(crate) use sampling::nearest;
pub use sampling::{pair_samples, points_in_set, shell_points};
pub(crate) use step::find_step;
pub use step::{best_step_rate, step_grid, tangential_step_oracle, verify_step};
pub use transfer::{
    admissible_radius_exact, transfer_constants_tangential_to_sub, transfer_constants_transversal_to_tangential,
    ExactValue, SubtransversalConstants, TangentialConstants,
};

use serde::{Deserialize, Serialize};

use crate::numkernel::Vector;

/// Which property a certificate speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Transversal,
    TangentiallyTransversal,
    Subtransversal,
    Prop44Sufficient,
    MassiveDense,
}

/// Whether a verdict was proved by exact arithmetic or observed on samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Exact,
    Empirical,
}

/// Concrete data realizing a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Witness {
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub directions: Vec<Vector>,
    /// The quantity that violates (or realizes) the defining inequality.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// The bound it is compared against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Certified,
    Refuted { witness: Witness },
    Inconclusive { reason: String },
}

impl Status {
    pub fn is_certified(&self) -> bool {
        matches!(self, Status::Certified)
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Status::Refuted { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Status::Inconclusive { .. })
    }
}

/// Named constants; which ones are present depends on the notion.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
}

/// Verdict on one notion at one point, with constants and evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityCertificate {
    pub notion: Notion,
    pub x0: Vector,
    pub constants: Constants,
    #[serde(flatten)]
    pub status: Status,
    pub evidence: Evidence,
    /// Number of sample configurations examined.
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Best rate found per sampled pair (tangential estimator only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_pair_eta: Vec<f64>,
    /// Per-level sup ratios (subtransversality estimator only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<SubtransversalityLevel>,
    /// A second certificate checking this one empirically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<Box<TransversalityCertificate>>,
}

impl TransversalityCertificate {
    pub(crate) fn new(notion: Notion, x0: &Vector, status: Status, evidence: Evidence) -> Self {
        Self {
            notion,
            x0: x0.clone(),
            constants: Constants::default(),
            status,
            evidence,
            samples: 0,
            notes: Vec::new(),
            per_pair_eta: Vec::new(),
            levels: Vec::new(),
            cross_check: None,
        }
    }
}

/// Sample count and seed shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Target number of base samples (points, pairs or tuples).
    pub samples: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { samples: 48, seed: 0 }
    }
}

impl Budget {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed }
    }
}

/// A verified tangential step from a pair `(xA, xB)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPair {
    pub t: f64,
    #[serde(rename = "wA")]
    pub w_a: Vector,
    #[serde(rename = "wB")]
    pub w_b: Vector,
    pub gap_before: f64,
    pub gap_after: f64,
}

impl StepPair {
    /// `gap_before − gap_after`.
    pub fn decrease(&self) -> f64 {
        self.gap_before - self.gap_after
    }

    /// Achieved rate `(gap_before − gap_after) / t`.
    pub fn rate(&self) -> f64 {
        self.decrease() / self.t
    }
}
