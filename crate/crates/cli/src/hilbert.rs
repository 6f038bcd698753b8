//! Dimension scaling of the subtransversality ratio for a truncated cube and a ray.
//!
//! In dimension `n` the cube is `{x : |x_i| ≤ 1/i}` and the ray is spanned by
//! `w_i = i^{-3/4}`. The two sets meet in the segment `[0, n^{-1/4}] w`,
//! which shrinks to a point as `n` grows, while past its end only the last
//! coordinate leaves the cube. The sampled ratio therefore grows with `n`.

use serde::{Deserialize, Serialize};
use transversal_core::numkernel::{Polyhedron, Vector};
use transversal_core::sets::SetSpec;
use transversal_core::transversality::{estimate_subtransversality_constant, Budget, Status};

use crate::{CliError, Result};

pub const MAX_DIM: usize = 12;
/// Radius of the sampling ball; large enough to reach past the end of the common segment.
pub const DEFAULT_DELTA: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertRow {
    pub n: usize,
    pub k_hat: Option<f64>,
    pub status: String,
    /// The estimator failed or ran out of budget.
    pub flagged: bool,
    /// `‖w‖ n^{3/4}`: the ratio along the ray just past the common segment.
    pub ray_ratio: f64,
}

pub fn ray_direction(n: usize) -> Vector {
    Vector::from_vec((1..=n).map(|i| (i as f64).powf(-0.75)).collect())
}

pub fn truncated_cube(n: usize) -> Result<SetSpec> {
    let hi: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    let lo: Vec<f64> = hi.iter().map(|h| -h).collect();
    Ok(SetSpec::Polyhedron(Polyhedron::boxed(&lo, &hi)?))
}

/// `{t w : t ≥ 0}` as `−w·x ≤ 0` and `w_1 x_i − w_i x_1 = 0`.
pub fn ray(w: &Vector) -> Result<SetSpec> {
    let n = w.dim();
    let neg: Vec<f64> = w.iter().map(|x| -x).collect();
    let mut p = Polyhedron::new(vec![neg], vec![0.0])?;
    if n > 1 {
        let rows: Vec<Vec<f64>> = (1..n)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[0] = -w[i];
                r[i] = w[0];
                r
            })
            .collect();
        p = p.with_equalities(rows, vec![0.0; n - 1])?;
    }
    Ok(SetSpec::Polyhedron(p))
}

/// One row per dimension `1..=nmax`.
pub fn hilbert_cube_scaling(nmax: usize, delta: f64, budget: Budget) -> Result<Vec<HilbertRow>> {
    if nmax == 0 || nmax > MAX_DIM {
        return Err(CliError::Config(format!("nmax must lie in 1..={MAX_DIM}, got {nmax}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CliError::Config("delta must be positive".into()));
    }
    (1..=nmax).map(|n| row(n, delta, budget)).collect()
}

fn row(n: usize, delta: f64, budget: Budget) -> Result<HilbertRow> {
    let w = ray_direction(n);
    let ray_ratio = w.norm() * (n as f64).powf(0.75);
    let (a, b) = (truncated_cube(n)?, ray(&w)?);
    Ok(match estimate_subtransversality_constant(&a, &b, &Vector::zeros(n), delta, budget) {
        Ok(c) => {
            let status = match &c.status {
                Status::Certified => "certified".to_string(),
                Status::Refuted { .. } => "refuted".to_string(),
                Status::Inconclusive { reason } => format!("inconclusive: {reason}"),
            };
            HilbertRow { n, k_hat: c.constants.k, flagged: c.status.is_inconclusive(), status, ray_ratio }
        }
        Err(e) => HilbertRow { n, k_hat: None, status: e.to_string(), flagged: true, ray_ratio },
    })
}

pub fn to_csv(rows: &[HilbertRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Serialize(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}
