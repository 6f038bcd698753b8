//! Dense real vectors and the two norms used across the toolkit.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point or direction in R^n.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("vector must have positive dimension".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    /// Unchecked constructor for internal arithmetic results.
    pub fn from_vec(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self(coords.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[axis] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    /// Unit vector in the direction of `self`, or `None` for (near) zero input.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    /// Uniformly distributed unit vector.
    pub fn random_unit<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            if let Some(u) = Vector(v).normalized() {
                return u;
            }
        }
    }

    pub fn midpoint(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| 0.5 * (a + b)).collect())
    }

    /// Concatenates `self` with `tail`.
    pub fn concat(&self, tail: &[f64]) -> Vector {
        let mut c = self.0.clone();
        c.extend_from_slice(tail);
        Vector(c)
    }

    pub fn head(&self, n: usize) -> Vector {
        Vector(self.0[..n].to_vec())
    }

    pub fn tail(&self, from: usize) -> Vector {
        Vector(self.0[from..].to_vec())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Vector> for &Vector {
            type Output = Vector;
            fn $m(self, rhs: &Vector) -> Vector {
                debug_assert_eq!(self.dim(), rhs.dim());
                Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a $op b).collect())
            }
        }
        impl $tr<Vector> for Vector {
            type Output = Vector;
            fn $m(self, rhs: Vector) -> Vector {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Vector> for Vector {
            type Output = Vector;
            fn $m(self, rhs: &Vector) -> Vector {
                (&self).$m(rhs)
            }
        }
        impl $tr<Vector> for &Vector {
            type Output = Vector;
            fn $m(self, rhs: Vector) -> Vector {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl AddAssign<&Vector> for Vector {
    fn add_assign(&mut self, rhs: &Vector) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&Vector> for Vector {
    fn sub_assign(&mut self, rhs: &Vector) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scale(s)
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scale(s)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Overflow-safe Euclidean norm.
pub(crate) fn norm2(a: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = a.iter().map(|c| (c / scale) * (c / scale)).sum();
    scale * s.sqrt()
}

/// Which norm a computation is carried out in.
///
/// `MaxProduct { split }` treats the vector as a pair `(x, r)` with `x` the
/// first `split` coordinates and returns `max{‖x‖₂, ‖r‖₂}`; with a single
/// trailing coordinate this is the uniform norm `max{‖x‖, |r|}` on `X × R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    #[default]
    Euclidean,
    MaxProduct { split: usize },
}

impl NormKind {
    /// Uniform norm on `R^n × R`.
    pub fn product(base_dim: usize) -> Self {
        NormKind::MaxProduct { split: base_dim }
    }
}

/// Norm of `v` under `kind`.
pub fn norm(v: &Vector, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Euclidean => Ok(v.norm()),
        NormKind::MaxProduct { split } => {
            if split == 0 || split >= v.dim() {
                return Err(Error::DimensionMismatch {
                    expected: split + 1,
                    found: v.dim(),
                });
            }
            let s = v.as_slice();
            Ok(norm2(&s[..split]).max(norm2(&s[split..])))
        }
    }
}

/// Distance between two points under `kind`.
pub fn distance(a: &Vector, b: &Vector, kind: NormKind) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    norm(&(a - b), kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn euclidean_pythagorean() {
        assert_eq!(norm(&Vector::from([3.0, 4.0]), NormKind::Euclidean).unwrap(), 5.0);
    }

    #[test]
    fn zero_vector_has_zero_norm() {
        let z = Vector::zeros(3);
        assert_eq!(norm(&z, NormKind::Euclidean).unwrap(), 0.0);
        assert_eq!(norm(&z, NormKind::product(2)).unwrap(), 0.0);
    }

    #[test]
    fn max_product_norm() {
        let v = Vector::from([3.0, 4.0, -7.0]);
        assert_eq!(norm(&v, NormKind::product(2)).unwrap(), 7.0);
        let w = Vector::from([3.0, 4.0, -2.0]);
        assert_eq!(norm(&w, NormKind::product(2)).unwrap(), 5.0);
    }

    #[test]
    fn max_product_rejects_bad_split() {
        let v = Vector::from([1.0, 2.0]);
        assert!(matches!(
            norm(&v, NormKind::product(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructor_rejects_non_finite() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![]).is_err());
    }

    fn vec3() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-100.0..100.0_f64, 3).prop_map(Vector::from)
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in vec3(), b in vec3()) {
            for kind in [NormKind::Euclidean, NormKind::product(2)] {
                let lhs = norm(&(&a + &b), kind).unwrap();
                let rhs = norm(&a, kind).unwrap() + norm(&b, kind).unwrap();
                prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
            }
        }

        #[test]
        fn absolute_homogeneity(a in vec3(), s in -50.0..50.0_f64) {
            for kind in [NormKind::Euclidean, NormKind::product(2)] {
                let lhs = norm(&a.scale(s), kind).unwrap();
                let rhs = s.abs() * norm(&a, kind).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
            }
        }
    }
}
