//! Scenario files: parsing, validation and canonical form.

use std::path::Path;

use serde::{Deserialize, Serialize};
use transversal_core::numkernel::Vector;
use transversal_core::sets::{ScalarFn, SetSpec};
use transversal_core::transversality::Budget;

use crate::analysis::Analysis;
use crate::{CliError, Result};

pub const SCENARIO_VERSION: u32 = 1;

/// Sampling and iteration budgets shared by all analyses of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSpec {
    pub samples: usize,
    pub max_iters: usize,
}

impl Default for BudgetSpec {
    fn default() -> Self {
        Self { samples: Budget::default().samples, max_iters: transversal_core::gapreduce::DEFAULT_MAX_ITERS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetPair {
    pub a: SetSpec,
    pub b: SetSpec,
}

/// `objective → min` over `constraint`, with the candidate taken from the scenario point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub objective: ScalarFn,
    pub constraint: SetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionPair {
    pub f1: ScalarFn,
    pub f2: ScalarFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub seed: u64,
    /// The common point of the sets, or the candidate minimizer.
    pub x0: Vector,
    #[serde(default)]
    pub budget: BudgetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<SetPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualification: Option<FunctionPair>,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
}

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
}

impl Scenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let s: Scenario =
            toml::from_str(text).map_err(|e| CliError::Parse { path: origin.to_string(), message: e.to_string() })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Canonical TOML text; parsing it yields the same scenario.
    pub fn to_canonical(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(CliError::Config(format!("scenario {:?}: {m}", self.id)));
        if self.version != SCENARIO_VERSION {
            return cfg(format!("unsupported version {} (expected {SCENARIO_VERSION})", self.version));
        }
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return cfg("id must be nonempty and use only letters, digits, '-' and '_'".into());
        }
        if self.budget.samples == 0 || self.budget.max_iters == 0 {
            return cfg("budget.samples and budget.max_iters must be positive".into());
        }
        if self.x0.dim() == 0 || !self.x0.is_finite() {
            return cfg("x0 must be a nonempty finite vector".into());
        }
        let n = self.x0.dim();
        if let Some(p) = &self.sets {
            for (s, name) in [(&p.a, "a"), (&p.b, "b")] {
                s.validate().map_err(|e| CliError::Config(format!("scenario {:?}: set {name}: {e}", self.id)))?;
                if s.dim() != n {
                    return cfg(format!("set {name} has dimension {} but x0 has {n}", s.dim()));
                }
            }
        }
        if let Some(p) = &self.problem {
            p.objective.validate().map_err(|e| CliError::Config(format!("scenario {:?}: objective: {e}", self.id)))?;
            p.constraint
                .validate()
                .map_err(|e| CliError::Config(format!("scenario {:?}: constraint: {e}", self.id)))?;
            if p.objective.dim() != n || p.constraint.dim() != n {
                return cfg(format!("problem dimensions do not match x0 (dimension {n})"));
            }
        }
        if let Some(q) = &self.qualification {
            for (f, name) in [(&q.f1, "f1"), (&q.f2, "f2")] {
                f.validate().map_err(|e| CliError::Config(format!("scenario {:?}: {name}: {e}", self.id)))?;
                if f.dim() != n {
                    return cfg(format!("{name} has dimension {} but x0 has {n}", f.dim()));
                }
            }
        }
        for a in &self.analyses {
            a.validate(self).map_err(|m| CliError::Config(format!("scenario {:?}: {}: {m}", self.id, a.name())))?;
        }
        Ok(())
    }

    pub fn apply(&mut self, o: Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(s) = o.samples {
            if s == 0 {
                return Err(CliError::Config("--budget must be positive".into()));
            }
            self.budget.samples = s;
        }
        if let Some(tol) = o.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config("--tol must be positive".into()));
            }
            for a in &mut self.analyses {
                a.set_tol(tol);
            }
        }
        Ok(())
    }

    pub fn sampling_budget(&self) -> Budget {
        Budget::new(self.budget.samples, self.seed)
    }
}
