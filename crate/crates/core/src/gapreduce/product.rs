//! Nearby unit vectors of `C1` and `C2 × (−∞, 0]` in `X × R` under the uniform norm.

use serde::{Deserialize, Serialize};

use crate::cones::{is_dense_difference, PolyCone};
use crate::error::{Error, Result};
use crate::numkernel::{lp_solve, LpProblem, Vector};

/// A pair `(x, r)` in `X × R` with norm `max{‖x‖, |r|}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductVector {
    pub x: Vector,
    pub r: f64,
}

impl ProductVector {
    pub fn new(x: Vector, r: f64) -> Self {
        Self { x, r }
    }

    /// Splits a vector of `R^{n+1}` into `(x, r)`.
    pub fn from_flat(v: &Vector) -> Self {
        let n = v.dim() - 1;
        Self { x: v.head(n), r: v[n] }
    }

    pub fn to_flat(&self) -> Vector {
        self.x.concat(&[self.r])
    }

    pub fn norm(&self) -> f64 {
        self.x.norm().max(self.r.abs())
    }

    pub fn dist(&self, other: &ProductVector) -> f64 {
        self.x.dist(&other.x).max((self.r - other.r).abs())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { x: self.x.scale(s), r: self.r * s }
    }
}

/// `C2 × (−∞, 0]`.
pub fn lower_product(c2: &PolyCone) -> Result<PolyCone> {
    c2.product(&PolyCone::ray(&Vector::from_slice(&[-1.0]))?)
}

/// Conic combinations `G1 λ − G2 μ` closest to `target` in the max-coordinate norm.
///
/// Returns `(G1 λ, G2 μ)`; among minimizers the one with the smallest
/// coefficient sum is chosen.
fn closest_difference(g1: &[Vector], g2: &[Vector], target: &Vector) -> Result<(Vector, Vector, f64)> {
    let (p, q, n) = (g1.len(), g2.len(), target.dim());
    let nv = p + q + 1;
    let build = |objective: Vec<f64>| {
        let mut lp = LpProblem::new(objective);
        for i in 0..n {
            let mut row: Vec<f64> = g1.iter().map(|g| g[i]).chain(g2.iter().map(|g| -g[i])).collect();
            row.push(-1.0);
            lp = lp.leq(row.clone(), target[i]);
            let mut neg: Vec<f64> = row[..p + q].iter().map(|c| -c).collect();
            neg.push(-1.0);
            lp = lp.leq(neg, -target[i]);
        }
        lp.all_nonneg()
    };
    let mut obj = vec![0.0; nv];
    obj[p + q] = 1.0;
    let first = lp_solve(&build(obj))?;
    if !first.is_optimal() {
        return Err(Error::Infeasible("approximation LP has no optimum".into()));
    }
    let s_star = first.x[p + q];
    let mut obj = vec![1.0; nv];
    obj[p + q] = 0.0;
    let second = lp_solve(&build(obj).bound(p + q, Some(0.0), Some(s_star + 1e-12)))?;
    let x = if second.is_optimal() { second.x } else { first.x };
    let comb = |gens: &[Vector], coef: &[f64]| {
        gens.iter().zip(coef).fold(Vector::zeros(n), |acc, (g, &c)| acc.axpy(c, g))
    };
    Ok((comb(g1, &x[..p]), comb(g2, &x[p..p + q]), x[p + q]))
}

/// Unit `w1 ∈ C1`, `w2 ∈ C2 × (−∞, 0]` with `‖w1 − w2‖ < ε`.
///
/// Approximates `(0, −1)` by `ṽ1 − ṽ2` to within `ε/2`, then normalizes
/// `ṽ1 = (v1, r1)` and `(v2, r2 − 1)`.
pub fn product_unit_vectors(c1: &PolyCone, c2_base: &PolyCone, epsilon: f64) -> Result<(ProductVector, ProductVector)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1)".into()));
    }
    if c1.dim() != c2_base.dim() + 1 {
        return Err(Error::DimensionMismatch { expected: c2_base.dim() + 1, found: c1.dim() });
    }
    let c2 = lower_product(c2_base)?;
    let density = is_dense_difference(c1, &c2)?;
    if !density.dense {
        return Err(Error::Precondition(format!(
            "C1 − C2 × (−∞, 0] is not dense; separated by {:?}",
            density.witness.map(|w| w.into_vec())
        )));
    }
    let n = c2_base.dim();
    let mut target = Vector::zeros(n + 1);
    target[n] = -1.0;
    let (v1, v2, _) = closest_difference(&c1.generators(), &c2.generators(), &target)?;
    let (p1, p2) = (ProductVector::from_flat(&v1), ProductVector::from_flat(&v2));
    let miss = ProductVector::from_flat(&target).dist(&ProductVector::from_flat(&(&v1 - &v2)));
    if miss >= epsilon / 2.0 {
        return Err(Error::NonConvergence { what: "approximation of (0, -1)", iterations: 1 });
    }
    let shifted = ProductVector::new(p2.x.clone(), p2.r - 1.0);
    let w1 = p1.scale(1.0 / p1.norm());
    let w2 = shifted.scale(1.0 / shifted.norm());
    debug_assert!(w1.dist(&w2) < epsilon);
    Ok((w1, w2))
}
