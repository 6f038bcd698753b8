//! Exact integer arithmetic for polyhedral cones.
//!
//! Cone vectors are scale-invariant, so every vector is stored as a
//! primitive integer vector. Finite `f64` values are dyadic rationals and
//! convert without rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type IntVec = Vec<BigInt>;

pub(crate) fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn is_zero(v: &[BigInt]) -> bool {
    v.iter().all(|c| c.is_zero())
}

/// Divides by the gcd of the entries (no-op on the zero vector).
pub(crate) fn primitive(mut v: IntVec) -> IntVec {
    let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in v.iter_mut() {
            *c /= &g;
        }
    }
    v
}

pub(crate) fn neg(v: &[BigInt]) -> IntVec {
    v.iter().map(|c| -c).collect()
}

/// `s·a + t·b`, reduced to primitive form.
fn combine(s: &BigInt, a: &[BigInt], t: &BigInt, b: &[BigInt]) -> IntVec {
    primitive(a.iter().zip(b).map(|(x, y)| s * x + t * y).collect())
}

/// Exact integer direction of a finite float vector.
pub fn int_from_f64(v: &[f64]) -> Result<IntVec> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("cone vectors must be finite".into()));
    }
    let decoded: Vec<(u64, i16, i8)> = v.iter().map(|c| c.integer_decode()).collect();
    let emin = decoded
        .iter()
        .filter(|(m, _, _)| *m != 0)
        .map(|(_, e, _)| *e)
        .min();
    let Some(emin) = emin else {
        return Ok(vec![BigInt::zero(); v.len()]);
    };
    Ok(primitive(
        decoded
            .iter()
            .map(|&(m, e, s)| {
                if m == 0 {
                    BigInt::zero()
                } else {
                    let mag = BigInt::from(m) << ((e - emin) as usize);
                    if s < 0 { -mag } else { mag }
                }
            })
            .collect(),
    ))
}

/// Float image of an integer vector scaled to unit Euclidean length.
pub fn unit_f64(v: &[BigInt]) -> Vec<f64> {
    // Scale down by a power of two first so huge entries do not overflow.
    let bits = v.iter().map(|c| c.bits()).max().unwrap_or(0);
    let shift = bits.saturating_sub(900);
    let f: Vec<f64> = v
        .iter()
        .map(|c| (c >> (shift as usize)).to_f64().unwrap_or(0.0))
        .collect();
    let n = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        f
    } else {
        f.iter().map(|x| x / n).collect()
    }
}

/// Output of the double-description method: `cone = span(lineality) + cone(rays)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Generators {
    pub lineality: Vec<IntVec>,
    pub rays: Vec<IntVec>,
}

struct Ray {
    v: IntVec,
    zeros: Vec<u64>,
}

fn bit_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Converts `{v : a·v ≤ 0 for a in halfspaces}` into generators.
///
/// Starts from the whole space as lineality. A halfspace not orthogonal to
/// the current lineality consumes one lineality direction; otherwise a
/// standard double-description step with the combinatorial adjacency test
/// updates the rays.
pub(crate) fn double_description(dim: usize, halfspaces: &[IntVec], cap: usize) -> Result<Generators> {
    let words = halfspaces.len().div_ceil(64).max(1);
    let mut lin: Vec<IntVec> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (i, a) in halfspaces.iter().enumerate() {
        if let Some(k) = lin.iter().position(|l| !idot(a, l).is_zero()) {
            let mut l0 = lin.remove(k);
            let mut al0 = idot(a, &l0);
            if al0.is_positive() {
                l0 = neg(&l0);
                al0 = -al0;
            }
            for l in lin.iter_mut() {
                let al = idot(a, l);
                if !al.is_zero() {
                    *l = combine(&al0, l, &(-al), &l0);
                }
            }
            for r in rays.iter_mut() {
                let ar = idot(a, &r.v);
                if !ar.is_zero() {
                    r.v = combine(&(-&al0), &r.v, &ar, &l0);
                }
                bit_set(&mut r.zeros, i);
            }
            let mut zeros = vec![0u64; words];
            for j in 0..i {
                bit_set(&mut zeros, j);
            }
            rays.push(Ray { v: l0, zeros });
            continue;
        }

        let signs: Vec<BigInt> = rays.iter().map(|r| idot(a, &r.v)).collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&k| signs[k].is_positive()).collect();
        if plus.is_empty() {
            for (r, s) in rays.iter_mut().zip(&signs) {
                if s.is_zero() {
                    bit_set(&mut r.zeros, i);
                }
            }
            continue;
        }
        let minus: Vec<usize> = (0..rays.len()).filter(|&k| signs[k].is_negative()).collect();
        let mut fresh: Vec<Ray> = Vec::new();
        for &p in &plus {
            for &q in &minus {
                let common: Vec<u64> = rays[p].zeros.iter().zip(&rays[q].zeros).map(|(x, y)| x & y).collect();
                let adjacent = !rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && subset(&common, &r.zeros));
                if !adjacent {
                    continue;
                }
                // (a·p) q − (a·q) p has positive weights and lies on a·v = 0.
                let v = combine(&signs[p], &rays[q].v, &(-&signs[q]), &rays[p].v);
                if is_zero(&v) {
                    continue;
                }
                let mut zeros = common;
                bit_set(&mut zeros, i);
                fresh.push(Ray { v, zeros });
            }
        }
        let mut next: Vec<Ray> = Vec::new();
        for (k, mut r) in rays.into_iter().enumerate() {
            if signs[k].is_zero() {
                bit_set(&mut r.zeros, i);
                next.push(r);
            } else if signs[k].is_negative() {
                next.push(r);
            }
        }
        next.extend(fresh);
        if next.len() > cap {
            return Err(Error::RepresentationBlowup { rays: next.len(), cap });
        }
        rays = next;
    }
    Ok(Generators { lineality: lin, rays: rays.into_iter().map(|r| r.v).collect() })
}

/// Reduced row echelon form over the rationals, rows rescaled to primitive
/// integers with positive pivots. Zero rows are dropped.
pub(crate) fn canonical_basis(rows: &[IntVec], dim: usize) -> Vec<IntVec> {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|c| BigRational::from_integer(c.clone())).collect())
        .collect();
    let mut pivot_row = 0;
    for col in 0..dim {
        if pivot_row >= m.len() {
            break;
        }
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].recip();
        for c in m[pivot_row].iter_mut() {
            *c *= &inv;
        }
        let prow = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let f = row[col].clone();
                for (c, pc) in row.iter_mut().zip(&prow) {
                    *c -= &f * pc;
                }
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m.into_iter().map(|r| clear_denominators(&r)).collect()
}

pub(crate) fn clear_denominators(r: &[BigRational]) -> IntVec {
    let l = r.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    primitive(r.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect())
}

/// Component of `v` orthogonal to `span(basis)`, as a primitive integer vector.
pub(crate) fn project_out(v: &[BigInt], basis: &[IntVec]) -> IntVec {
    if basis.is_empty() {
        return primitive(v.to_vec());
    }
    let k = basis.len();
    // Solve (B Bᵀ) c = B v exactly.
    let mut g: Vec<Vec<BigRational>> = (0..k)
        .map(|i| {
            let mut row: Vec<BigRational> =
                (0..k).map(|j| BigRational::from_integer(idot(&basis[i], &basis[j]))).collect();
            row.push(BigRational::from_integer(idot(&basis[i], v)));
            row
        })
        .collect();
    for col in 0..k {
        let p = (col..k).find(|&r| !g[r][col].is_zero()).expect("basis is independent");
        g.swap(col, p);
        let inv = g[col][col].recip();
        for c in g[col].iter_mut() {
            *c *= &inv;
        }
        let prow = g[col].clone();
        for (r, row) in g.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (c, pc) in row.iter_mut().zip(&prow) {
                    *c -= &f * pc;
                }
            }
        }
    }
    let coef: Vec<BigRational> = g.into_iter().map(|r| r[k].clone()).collect();
    let out: Vec<BigRational> = (0..v.len())
        .map(|j| {
            let mut x = BigRational::from_integer(v[j].clone());
            for (c, b) in coef.iter().zip(basis) {
                x -= c * BigRational::from_integer(b[j].clone());
            }
            x
        })
        .collect();
    clear_denominators(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(v: &[i64]) -> IntVec {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn dyadic_conversion_is_exact() {
        assert_eq!(int_from_f64(&[0.5, 0.25]).unwrap(), iv(&[2, 1]));
        assert_eq!(int_from_f64(&[-3.0, 6.0]).unwrap(), iv(&[-1, 2]));
        assert_eq!(int_from_f64(&[0.0, 0.0]).unwrap(), iv(&[0, 0]));
    }

    #[test]
    fn quadrant_from_halfspaces() {
        let g = double_description(2, &[iv(&[-1, 0]), iv(&[0, -1])], 256).unwrap();
        assert!(g.lineality.is_empty());
        let mut rays = g.rays.clone();
        rays.sort();
        assert_eq!(rays, vec![iv(&[0, 1]), iv(&[1, 0])]);
    }

    #[test]
    fn halfplane_keeps_lineality() {
        let g = double_description(2, &[iv(&[0, 1])], 256).unwrap();
        assert_eq!(g.lineality.len(), 1);
        assert_eq!(g.rays.len(), 1);
        assert!(idot(&g.lineality[0], &iv(&[0, 1])).is_zero());
    }

    #[test]
    fn square_pyramid_has_four_rays() {
        // x3 ≥ |x1|, x3 ≥ |x2|
        let h = [iv(&[1, 0, -1]), iv(&[-1, 0, -1]), iv(&[0, 1, -1]), iv(&[0, -1, -1])];
        let g = double_description(3, &h, 256).unwrap();
        assert!(g.lineality.is_empty());
        let mut rays = g.rays.clone();
        rays.sort();
        assert_eq!(rays, vec![iv(&[-1, -1, 1]), iv(&[-1, 1, 1]), iv(&[1, -1, 1]), iv(&[1, 1, 1])]);
    }

    #[test]
    fn canonical_basis_is_rref() {
        let b = canonical_basis(&[iv(&[2, 4, 0]), iv(&[1, 2, 1])], 3);
        assert_eq!(b, vec![iv(&[1, 2, 0]), iv(&[0, 0, 1])]);
    }

    #[test]
    fn project_out_line() {
        assert_eq!(project_out(&iv(&[1, 1]), &[iv(&[1, 0])]), iv(&[0, 1]));
    }
}
