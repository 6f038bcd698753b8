//! Constrained minimization problems and their tangent cones at a candidate.

use serde::{Deserialize, Serialize};

use crate::cones::{direction_net, exact_convex_cone, profile_by, Membership, PolyCone, SamplingOptions};
use crate::error::{check_dim, Error, Result};
use crate::intersection::net_size;
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::{ScalarFn, SetSpec};

/// Relative tolerance between the stated value and `f(x0)`.
const VALUE_TOL: f64 = 1e-9;

/// `f(x) → min` subject to `x ∈ S`, with candidate `x0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptProblem {
    /// Epigraph of `f` in `X × R`.
    pub objective: SetSpec,
    pub constraint: SetSpec,
    pub x0: Vector,
    /// `f(x0)`.
    pub value: f64,
}

impl OptProblem {
    pub fn new(objective: SetSpec, constraint: SetSpec, x0: Vector, value: f64) -> Result<Self> {
        let n = x0.dim();
        check_dim(n + 1, objective.dim())?;
        check_dim(n, constraint.dim())?;
        if !value.is_finite() {
            return Err(Error::InvalidArgument("f(x0) must be finite".into()));
        }
        let residual = constraint.distance(&x0)?;
        if residual > FEAS_TOL {
            return Err(Error::Precondition(format!("x0 is not feasible (distance {residual:e})")));
        }
        let p = Self { objective, constraint, x0, value };
        match &p.objective {
            SetSpec::Epigraph { f } => match f.eval(p.x0.as_slice()) {
                Some(v) if (v - value).abs() <= VALUE_TOL * (1.0 + v.abs()) => {}
                Some(v) => return Err(Error::InvalidArgument(format!("stated value {value} differs from f(x0) = {v}"))),
                None => return Err(Error::Precondition("x0 is outside the domain of f".into())),
            },
            other => {
                let residual = other.distance(&p.point())?;
                if residual > FEAS_TOL {
                    return Err(Error::Precondition("(x0, f(x0)) is not in the epigraph".into()));
                }
            }
        }
        Ok(p)
    }

    /// Problem with objective `f`; the value is evaluated at `x0`.
    pub fn from_function(f: ScalarFn, constraint: SetSpec, x0: Vector) -> Result<Self> {
        f.validate()?;
        let value = f.eval(x0.as_slice()).ok_or_else(|| Error::Precondition("x0 is outside the domain of f".into()))?;
        Self::new(SetSpec::Epigraph { f }, constraint, x0, value)
    }

    /// `(x0, f(x0))`.
    pub fn point(&self) -> Vector {
        self.x0.concat(&[self.value])
    }

    pub fn function(&self) -> Option<&ScalarFn> {
        match &self.objective {
            SetSpec::Epigraph { f } => Some(f),
            _ => None,
        }
    }

    /// Bouligand cones of `epi f` at `(x0, f(x0))` and of `S` at `x0`, where exactly computable.
    pub fn tangent_cones(&self) -> Result<(PolyCone, PolyCone)> {
        let cepi = match self.function() {
            Some(f) => epigraph_cone(f, &self.x0)?,
            None => convex_cone(&self.objective, &self.point())?,
        };
        Ok((cepi, convex_cone(&self.constraint, &self.x0)?))
    }

    /// Clarke cones; these coincide with [`OptProblem::tangent_cones`] when
    /// `f` is convex or smooth and `S` is convex.
    pub fn clarke_cones(&self) -> Result<(PolyCone, PolyCone)> {
        let regular = match self.function() {
            Some(f) => f.is_convex() || is_smooth(f),
            None => self.objective.is_convex(),
        };
        if !regular || !self.constraint.is_convex() {
            return Err(Error::Unsupported("Clarke cones need a convex or smooth objective and a convex constraint".into()));
        }
        self.tangent_cones()
    }

    /// Same problem with objective `f + ‖· − x0‖²`, for which `x0` is a strict minimizer
    /// whenever it is a minimizer of the original.
    ///
    /// The epigraph tangent cones at `(x0, f(x0))` are compared on a direction net.
    pub fn strong_minimum(&self) -> Result<StrongMinimum> {
        let f = self
            .function()
            .ok_or_else(|| Error::Unsupported("the transform needs an explicit objective function".into()))?;
        let g = ScalarFn::Proximal { base: Box::new(f.clone()), center: self.x0.as_slice().to_vec(), weight: 1.0 };
        let problem = OptProblem::new(SetSpec::Epigraph { f: g }, self.constraint.clone(), self.x0.clone(), self.value)?;
        let point = self.point();
        let options = SamplingOptions::default();
        let grid = options.grid();
        let n = point.dim();
        let (mut compared, mut agreeing) = (0, 0);
        let mut mismatches = Vec::new();
        for v in direction_net(n, net_size(n).max(64), options.seed) {
            let before = profile_by(|p| self.objective.distance(p), &point, &v, &grid, options.tolerance)?;
            let after = profile_by(|p| problem.objective.distance(p), &point, &v, &grid, options.tolerance)?;
            if before.bouligand == Membership::Undecided || after.bouligand == Membership::Undecided {
                continue;
            }
            compared += 1;
            if before.bouligand == after.bouligand {
                agreeing += 1;
            } else {
                mismatches.push(v);
            }
        }
        let exact_equal = match (self.tangent_cones(), problem.tangent_cones()) {
            (Ok((c1, _)), Ok((c2, _))) => Some(c1 == c2),
            _ => None,
        };
        Ok(StrongMinimum { problem, compared, agreeing, mismatches, exact_equal })
    }
}

/// Result of [`OptProblem::strong_minimum`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongMinimum {
    pub problem: OptProblem,
    /// Net directions decided for both epigraphs.
    pub compared: usize,
    pub agreeing: usize,
    pub mismatches: Vec<Vector>,
    /// Exact cone equality when both cones have closed forms.
    pub exact_equal: Option<bool>,
}

fn is_smooth(f: &ScalarFn) -> bool {
    match f {
        ScalarFn::Quadratic { .. } => true,
        ScalarFn::MaxAffine { pieces, domain, .. } => pieces.len() == 1 && domain.is_none(),
        ScalarFn::Proximal { base, .. } => is_smooth(base),
        ScalarFn::Custom(_) => false,
    }
}

fn convex_cone(s: &SetSpec, x: &Vector) -> Result<PolyCone> {
    if s.is_convex() {
        if let Some(c) = exact_convex_cone(s, x)? {
            return Ok(c);
        }
    }
    Err(Error::Unsupported("no closed-form tangent cone for this set".into()))
}

/// Tangent cone of `epi f` at `(x0, f(x0))`.
///
/// Smooth terms shear the cone: `T_{epi(h+g)} = {(w, s + ∇g(x0)·w) : (w, s) ∈ T_{epi h}}`.
pub(crate) fn epigraph_cone(f: &ScalarFn, x0: &Vector) -> Result<PolyCone> {
    let n = x0.dim();
    match f {
        ScalarFn::Quadratic { .. } => {
            let mut normal = f.grad(x0.as_slice());
            normal.push(-1.0);
            PolyCone::from_halfspaces(n + 1, &[Vector::from_vec(normal)])
        }
        ScalarFn::Proximal { base, center, weight } => {
            let inner = epigraph_cone(base, x0)?;
            let grad: Vec<f64> = x0.iter().zip(center).map(|(x, c)| 2.0 * weight * (x - c)).collect();
            if grad.iter().all(|g| *g == 0.0) {
                return Ok(inner);
            }
            let shear = |v: &Vector| {
                let s = v[n] + v.as_slice()[..n].iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
                v.head(n).concat(&[s])
            };
            let rays: Vec<Vector> = inner.generators().iter().map(shear).collect();
            PolyCone::from_generators(n + 1, &rays)
        }
        ScalarFn::MaxAffine { .. } => {
            let value = f.eval(x0.as_slice()).ok_or_else(|| Error::Precondition("x0 outside the domain".into()))?;
            convex_cone(&SetSpec::Epigraph { f: f.clone() }, &x0.concat(&[value]))
        }
        ScalarFn::Custom(_) => Err(Error::Unsupported("no closed-form epigraph cone for a custom function".into())),
    }
}
