//! Extended-real scalar functions used for epigraphs and level sets.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numkernel::{dot, Polyhedron};

/// One affine piece `a·x + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub a: Vec<f64>,
    pub c: f64,
}

/// A user-supplied function given by closures.
///
/// `domain` describes the effective domain; points outside it have value
/// `+∞`, which is never materialized as a number.
#[derive(Clone)]
pub struct CustomFn {
    pub name: String,
    pub dim: usize,
    pub value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub grad: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    pub domain: Option<Arc<dyn Fn(&[f64]) -> bool + Send + Sync>>,
    pub convex: bool,
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFn")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("convex", &self.convex)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CustomFn {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.dim == other.dim && Arc::ptr_eq(&self.value, &other.value)
    }
}

/// A proper lower semicontinuous function `R^n → R ∪ {+∞}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFn {
    /// `max_i (a_i·x + c_i)` on a polyhedral domain (all of `R^n` if absent).
    MaxAffine {
        dim: usize,
        pieces: Vec<AffinePiece>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<Polyhedron>,
    },
    /// `½ xᵀQx + l·x + c`.
    Quadratic { q: Vec<Vec<f64>>, l: Vec<f64>, c: f64 },
    /// `base(x) + weight·‖x − center‖²`.
    Proximal { base: Box<ScalarFn>, center: Vec<f64>, weight: f64 },
    #[serde(skip)]
    Custom(CustomFn),
}

impl ScalarFn {
    /// `a·x + c` on all of `R^n`.
    pub fn affine(a: Vec<f64>, c: f64) -> Self {
        ScalarFn::MaxAffine { dim: a.len(), pieces: vec![AffinePiece { a, c }], domain: None }
    }

    /// `|x|` on `R`.
    pub fn abs() -> Self {
        ScalarFn::MaxAffine {
            dim: 1,
            pieces: vec![AffinePiece { a: vec![1.0], c: 0.0 }, AffinePiece { a: vec![-1.0], c: 0.0 }],
            domain: None,
        }
    }

    /// Indicator of a polyhedron: `0` on it, `+∞` elsewhere.
    pub fn indicator(domain: Polyhedron) -> Self {
        let dim = domain.dim;
        ScalarFn::MaxAffine {
            dim,
            pieces: vec![AffinePiece { a: vec![0.0; dim], c: 0.0 }],
            domain: Some(domain),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ScalarFn::MaxAffine { dim, .. } => *dim,
            ScalarFn::Quadratic { l, .. } => l.len(),
            ScalarFn::Proximal { base, .. } => base.dim(),
            ScalarFn::Custom(c) => c.dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarFn::MaxAffine { dim, pieces, domain } => {
                if *dim == 0 {
                    return Err(Error::InvalidArgument("function dimension must be positive".into()));
                }
                if pieces.is_empty() {
                    return Err(Error::InvalidArgument("max-affine function needs a piece".into()));
                }
                for p in pieces {
                    check_dim(*dim, p.a.len())?;
                    if !p.c.is_finite() || p.a.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidArgument("non-finite affine piece".into()));
                    }
                }
                if let Some(d) = domain {
                    check_dim(*dim, d.dim)?;
                    d.validate()?;
                }
                Ok(())
            }
            ScalarFn::Quadratic { q, l, c } => {
                let n = l.len();
                if n == 0 {
                    return Err(Error::InvalidArgument("function dimension must be positive".into()));
                }
                check_dim(n, q.len())?;
                for r in q {
                    check_dim(n, r.len())?;
                }
                if !c.is_finite() || q.iter().flatten().chain(l).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite quadratic data".into()));
                }
                Ok(())
            }
            ScalarFn::Proximal { base, center, weight } => {
                base.validate()?;
                check_dim(base.dim(), center.len())?;
                if !(*weight >= 0.0) || !weight.is_finite() {
                    return Err(Error::InvalidArgument("proximal weight must be nonnegative".into()));
                }
                Ok(())
            }
            ScalarFn::Custom(c) => {
                if c.dim == 0 {
                    return Err(Error::InvalidArgument("function dimension must be positive".into()));
                }
                Ok(())
            }
        }
    }

    /// Whether `x` lies in the effective domain.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        match self {
            ScalarFn::MaxAffine { domain, .. } => domain.as_ref().is_none_or(|d| d.residual(x) <= 0.0),
            ScalarFn::Quadratic { .. } => true,
            ScalarFn::Proximal { base, .. } => base.in_domain(x),
            ScalarFn::Custom(c) => c.domain.as_ref().is_none_or(|d| d(x)),
        }
    }

    /// Value at `x`, or `None` outside the effective domain.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        if !self.in_domain(x) {
            return None;
        }
        Some(self.eval_unchecked(x))
    }

    /// Value of the finite formula, ignoring the domain.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            ScalarFn::MaxAffine { pieces, .. } => pieces
                .iter()
                .map(|p| dot(&p.a, x) + p.c)
                .fold(f64::NEG_INFINITY, f64::max),
            ScalarFn::Quadratic { q, l, c } => {
                let mut v = *c + dot(l, x);
                for (i, row) in q.iter().enumerate() {
                    v += 0.5 * x[i] * dot(row, x);
                }
                v
            }
            ScalarFn::Proximal { base, center, weight } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                base.eval_unchecked(x) + weight * d2
            }
            ScalarFn::Custom(c) => (c.value)(x),
        }
    }

    /// A (sub)gradient of the finite formula at `x`.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ScalarFn::MaxAffine { pieces, .. } => {
                let best = pieces
                    .iter()
                    .max_by(|a, b| (dot(&a.a, x) + a.c).total_cmp(&(dot(&b.a, x) + b.c)))
                    .expect("validated nonempty");
                best.a.clone()
            }
            ScalarFn::Quadratic { q, l, .. } => {
                let n = l.len();
                (0..n)
                    .map(|i| l[i] + 0.5 * (0..n).map(|j| (q[i][j] + q[j][i]) * x[j]).sum::<f64>())
                    .collect()
            }
            ScalarFn::Proximal { base, center, weight } => base
                .grad(x)
                .into_iter()
                .zip(x.iter().zip(center))
                .map(|(g, (a, b))| g + 2.0 * weight * (a - b))
                .collect(),
            ScalarFn::Custom(c) => (c.grad)(x),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            ScalarFn::MaxAffine { .. } => true,
            ScalarFn::Quadratic { q, .. } => {
                let n = q.len();
                let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (q[i][j] + q[j][i]));
                SymmetricEigen::new(m).eigenvalues.iter().all(|e| *e >= -1e-12)
            }
            ScalarFn::Proximal { base, .. } => base.is_convex(),
            ScalarFn::Custom(c) => c.convex,
        }
    }

    /// Polyhedral epigraph `{(x, s) : a_i·x − s ≤ −c_i, x ∈ domain}` when available.
    pub fn epigraph_polyhedron(&self) -> Option<Polyhedron> {
        let ScalarFn::MaxAffine { dim, pieces, domain } = self else {
            return None;
        };
        let n = *dim;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for p in pieces {
            let mut r = p.a.clone();
            r.push(-1.0);
            a.push(r);
            b.push(-p.c);
        }
        let mut a_eq = Vec::new();
        let mut b_eq = Vec::new();
        if let Some(d) = domain {
            for (r, bi) in d.a.iter().zip(&d.b) {
                let mut r = r.clone();
                r.push(0.0);
                a.push(r);
                b.push(*bi);
            }
            for (r, bi) in d.a_eq.iter().zip(&d.b_eq) {
                let mut r = r.clone();
                r.push(0.0);
                a_eq.push(r);
                b_eq.push(*bi);
            }
        }
        Some(Polyhedron { dim: n + 1, a, b, a_eq, b_eq })
    }

    /// Polyhedral sublevel set `{x : f(x) ≤ 0}` when available.
    pub fn sublevel_polyhedron(&self) -> Option<Polyhedron> {
        let ScalarFn::MaxAffine { dim, pieces, domain } = self else {
            return None;
        };
        let mut a: Vec<Vec<f64>> = pieces.iter().map(|p| p.a.clone()).collect();
        let mut b: Vec<f64> = pieces.iter().map(|p| -p.c).collect();
        let (mut a_eq, mut b_eq) = (vec![], vec![]);
        if let Some(d) = domain {
            a.extend(d.a.iter().cloned());
            b.extend(d.b.iter().copied());
            a_eq = d.a_eq.clone();
            b_eq = d.b_eq.clone();
        }
        Some(Polyhedron { dim: *dim, a, b, a_eq, b_eq })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_value_and_subgradient() {
        let f = ScalarFn::abs();
        assert_eq!(f.eval(&[-2.0]), Some(2.0));
        assert_eq!(f.grad(&[-2.0]), vec![-1.0]);
    }

    #[test]
    fn indicator_is_infinite_outside() {
        let f = ScalarFn::indicator(Polyhedron::boxed(&[0.0], &[0.0]).unwrap());
        assert_eq!(f.eval(&[0.0]), Some(0.0));
        assert_eq!(f.eval(&[0.1]), None);
    }

    #[test]
    fn quadratic_convexity() {
        let bowl = ScalarFn::Quadratic { q: vec![vec![2.0, 0.0], vec![0.0, 2.0]], l: vec![0.0, 0.0], c: -1.0 };
        let saddle = ScalarFn::Quadratic { q: vec![vec![2.0, 0.0], vec![0.0, -2.0]], l: vec![0.0, 0.0], c: 0.0 };
        assert!(bowl.is_convex());
        assert!(!saddle.is_convex());
        assert_eq!(bowl.eval(&[1.0, 1.0]), Some(1.0));
        assert_eq!(bowl.grad(&[1.0, -1.0]), vec![2.0, -2.0]);
    }
}
