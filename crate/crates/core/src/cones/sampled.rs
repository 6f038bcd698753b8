//! Tangent cones approximated from distance profiles along rays.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numkernel::{Vector, FEAS_TOL};
use crate::sets::SetSpec;

/// Default number of distance evaluations for a sampled cone.
pub const DEFAULT_BUDGET: usize = 20_000;
/// Default classification tolerance on `dist(x0 + t v, S) / t`.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-4;

const NET_2D: usize = 720;

/// Verdict on a single direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    In,
    Out,
    Undecided,
}

/// Parameters of the residual-profile sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    /// Largest step of the geometric grid.
    pub t0: f64,
    /// Smallest step; the grid halves from `t0` down to this floor.
    pub t_floor: f64,
    pub tolerance: f64,
    /// Seed for random direction nets in dimension four and above.
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self { t0: 1.0, t_floor: 1e-8, tolerance: DEFAULT_CLASSIFY_TOL, seed: 0 }
    }
}

impl SamplingOptions {
    /// Strictly decreasing grid `t0, t0/2, ...` ending at the last value `≥ t_floor`.
    pub fn grid(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = self.t0;
        while t >= self.t_floor {
            out.push(t);
            t *= 0.5;
        }
        out
    }
}

/// Residual profile `r(t) = dist(x0 + t v, S) / t` of one unit direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionProfile {
    pub direction: Vector,
    pub residuals: Vec<f64>,
    /// Sequential test: some grid step lands close to the set.
    pub bouligand: Membership,
    /// Curve test: every small step of the grid lands close to the set.
    pub derivable: Membership,
}

/// Sampled surrogate for the tangent cone of a set at a point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledCone {
    pub basepoint: Vector,
    pub set: SetSpec,
    pub t_grid: Vec<f64>,
    pub options: SamplingOptions,
    pub directions: Vec<DirectionProfile>,
}

impl SampledCone {
    /// Profiles and classifies an arbitrary direction (normalized first).
    pub fn classify(&self, v: &Vector) -> Result<DirectionProfile> {
        profile(&self.set, &self.basepoint, v, &self.t_grid, self.options.tolerance)
    }

    pub fn dim(&self) -> usize {
        self.basepoint.dim()
    }

    pub fn count(&self, m: Membership) -> usize {
        self.directions.iter().filter(|d| d.bouligand == m).count()
    }

    /// Net directions classified IN by the sequential test.
    pub fn inside(&self) -> impl Iterator<Item = &Vector> {
        self.directions.iter().filter(|d| d.bouligand == Membership::In).map(|d| &d.direction)
    }
}

fn profile(set: &SetSpec, x0: &Vector, v: &Vector, grid: &[f64], tol: f64) -> Result<DirectionProfile> {
    profile_by(|p| set.distance(p), x0, v, grid, tol)
}

/// Profile against an arbitrary distance oracle.
pub(crate) fn profile_by<F>(dist: F, x0: &Vector, v: &Vector, grid: &[f64], tol: f64) -> Result<DirectionProfile>
where
    F: Fn(&Vector) -> Result<f64>,
{
    check_dim(x0.dim(), v.dim())?;
    let u = v.normalized().ok_or_else(|| Error::InvalidArgument("zero direction".into()))?;
    let residuals: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let p = x0 + &(&u * t);
            // Oracle failures on smooth sets leave a NaN, which never classifies.
            dist(&p).map(|d| d / t).unwrap_or(f64::NAN)
        })
        .collect();
    let finite = |r: &&f64| r.is_finite();
    let min = residuals.iter().filter(finite).fold(f64::INFINITY, |a, &b| a.min(b));
    let all_finite = residuals.iter().all(|r| r.is_finite());
    let bouligand = if min <= tol {
        Membership::In
    } else if all_finite && min >= 10.0 * tol {
        Membership::Out
    } else {
        Membership::Undecided
    };
    let tail = &residuals[residuals.len() / 2..];
    let tail_max = tail.iter().fold(0.0f64, |a, &b| if b.is_nan() { f64::NAN } else { a.max(b) });
    let tail_min = tail.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let derivable = if tail_max <= tol {
        Membership::In
    } else if all_finite && tail_min >= 10.0 * tol {
        Membership::Out
    } else {
        Membership::Undecided
    };
    Ok(DirectionProfile { direction: u, residuals, bouligand, derivable })
}

/// Deterministic unit-direction net of roughly `count` directions.
///
/// Uniform angles in the plane, a Fibonacci lattice on the sphere, and seeded
/// Gaussian samples in higher dimensions. Coordinate axes are always included.
pub fn direction_net(dim: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for i in 0..dim {
        let e = Vector::unit(dim, i);
        out.push(-&e);
        out.push(e);
    }
    match dim {
        0 | 1 => {}
        2 => {
            for k in 0..count {
                let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                out.push(Vector::from_vec(vec![th.cos(), th.sin()]));
            }
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 0..count {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * k as f64;
                out.push(Vector::from_vec(vec![r * th.cos(), r * th.sin(), z]));
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                out.push(Vector::random_unit(&mut rng, dim));
            }
        }
    }
    out
}

/// Sampled tangent cone with default options.
pub fn tangent_cone_sampled(s: &SetSpec, x0: &Vector, budget: usize) -> Result<SampledCone> {
    tangent_cone_sampled_with(s, x0, budget, SamplingOptions::default())
}

/// Samples a direction net within `budget` distance evaluations.
pub fn tangent_cone_sampled_with(
    s: &SetSpec,
    x0: &Vector,
    budget: usize,
    options: SamplingOptions,
) -> Result<SampledCone> {
    check_dim(s.dim(), x0.dim())?;
    if !(options.t0 > options.t_floor && options.t_floor > 0.0 && options.tolerance > 0.0) {
        return Err(Error::InvalidArgument("sampling options need t0 > t_floor > 0 and tolerance > 0".into()));
    }
    let residual = s.distance(x0)?;
    if residual > FEAS_TOL {
        return Err(Error::NotMember { residual });
    }
    let grid = options.grid();
    let n = x0.dim();
    let per_dir = grid.len();
    let max_dirs = budget / per_dir;
    let wanted = if n == 2 { NET_2D } else { NET_2D.max(60 * n) };
    let mut net = direction_net(n, wanted.min(max_dirs.saturating_sub(2 * n)), options.seed);
    net.truncate(max_dirs);
    if net.is_empty() {
        return Err(Error::BudgetExhausted(format!("budget {budget} below one profile of {per_dir} steps")));
    }
    let directions = net
        .iter()
        .map(|v| profile(s, x0, v, &grid, options.tolerance))
        .collect::<Result<Vec<_>>>()?;
    if directions.iter().all(|d| d.bouligand == Membership::Undecided) {
        return Err(Error::BudgetExhausted("every sampled direction is undecided".into()));
    }
    Ok(SampledCone { basepoint: x0.clone(), set: s.clone(), t_grid: grid, options, directions })
}
