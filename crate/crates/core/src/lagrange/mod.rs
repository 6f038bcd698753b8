//! Lagrange multipliers from cone separation, and qualification conditions
//! for sums of two functions.

mod problem;
mod qualification;
mod rule;
mod separate;

pub use problem::{OptProblem, StrongMinimum};
pub use qualification::{qualification_equivalences, QualificationReport};
pub use rule::{
    descent_direction, multiplier_rule, multiplier_rule_default, multiplier_rule_massive, verify_multiplier,
    ConditionChecks, DenseBranch, MassiveReport, MultiplierOutcome, MultiplierPair, MultiplierReport,
    CONDITION_SAMPLES, CONDITION_TOL,
};
pub use separate::{separate_cones, Separation, STRICT};
