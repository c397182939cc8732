//! Pointed rational polyhedral cones: generator/halfspace duality,
//! membership, and Hilbert bases of their lattice-point semigroups.

use crate::exactlin::{self, Constraint, IntegerMatrix, Rational, Rel};
use crate::polytope::{combinations, dot, primitive, LatticePoint};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("cone is not full-dimensional")]
    NotFullDimensional,
    #[error("cone is not pointed")]
    NotPointed,
    #[error("generator dimension mismatch")]
    DimensionMismatch,
}

/// A full-dimensional pointed cone, carrying both the extreme rays and the
/// irredundant facet normals (`<x, w> >= 0`). All vectors primitive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    dim: usize,
    generators: Vec<Vec<i64>>,
    facets: Vec<Vec<i64>>,
}

impl Cone {
    pub fn from_rays(dim: usize, rays: &[Vec<i64>]) -> Result<Cone, ConeError> {
        if rays.iter().any(|r| r.len() != dim) {
            return Err(ConeError::DimensionMismatch);
        }
        let rays: Vec<Vec<i64>> = rays
            .iter()
            .filter(|r| r.iter().any(|&v| v != 0))
            .map(|r| primitive(r))
            .collect();
        if IntegerMatrix::from_rows(&rays).rank() != dim {
            return Err(ConeError::NotFullDimensional);
        }
        let facets = facet_normals(dim, &rays);
        if IntegerMatrix::from_rows(&facets).rank() != dim {
            return Err(ConeError::NotPointed);
        }
        debug_assert!(rays
            .iter()
            .all(|r| facets.iter().all(|w| dot(w, r) >= 0)));
        let generators = extreme_rays(dim, &facets);
        Ok(Cone {
            dim,
            generators,
            facets,
        })
    }

    pub fn from_halfspaces(dim: usize, normals: &[Vec<i64>]) -> Result<Cone, ConeError> {
        if normals.iter().any(|r| r.len() != dim) {
            return Err(ConeError::DimensionMismatch);
        }
        let normals: Vec<Vec<i64>> = normals
            .iter()
            .filter(|r| r.iter().any(|&v| v != 0))
            .map(|r| primitive(r))
            .collect();
        if IntegerMatrix::from_rows(&normals).rank() != dim {
            return Err(ConeError::NotPointed);
        }
        // full-dimensional iff a strictly interior point exists
        let cons: Vec<Constraint> = normals
            .iter()
            .map(|w| Constraint::from_int(w, Rel::Gt, 0))
            .collect();
        if !exactlin::rational_feasible(dim, &cons).is_sat() {
            return Err(ConeError::NotFullDimensional);
        }
        let generators = extreme_rays(dim, &normals);
        // prune redundant halfspaces: w is a facet iff dropping it changes
        // the cone, i.e. {others >= 0, w < 0} is feasible
        let mut kept: Vec<Vec<i64>> = normals.clone();
        let mut i = 0;
        while i < kept.len() {
            let mut cons: Vec<Constraint> = Vec::with_capacity(kept.len());
            for (j, w) in kept.iter().enumerate() {
                if j != i {
                    cons.push(Constraint::from_int(w, Rel::Ge, 0));
                }
            }
            let neg: Vec<i64> = kept[i].iter().map(|&v| -v).collect();
            cons.push(Constraint::from_int(&neg, Rel::Gt, 0));
            if exactlin::rational_feasible(dim, &cons).is_sat() {
                i += 1;
            } else {
                kept.remove(i);
            }
        }
        Ok(Cone {
            dim,
            generators,
            facets: kept,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn facets(&self) -> &[Vec<i64>] {
        &self.facets
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.facets.iter().all(|w| dot(w, x) >= 0)
    }

    pub fn contains_rational(&self, x: &[Rational]) -> bool {
        self.facets.iter().all(|w| {
            let s: Rational = w
                .iter()
                .zip(x)
                .map(|(&a, b)| Rational::from_integer(a.into()) * b)
                .sum();
            !s.is_negative()
        })
    }

    /// Minimal generating set of the semigroup of lattice points.
    ///
    /// Candidates are collected from the closed fundamental parallelepipeds
    /// of the simplicial subcones spanned by independent extreme-ray subsets
    /// (these cover the cone), then reduced to the irreducible elements.
    pub fn hilbert_basis(&self) -> Vec<LatticePoint> {
        let d = self.dim;
        let mut candidates: BTreeSet<Vec<i64>> = BTreeSet::new();
        for subset in combinations(self.generators.len(), d) {
            let gens: Vec<Vec<i64>> = subset.iter().map(|&i| self.generators[i].clone()).collect();
            let cols = IntegerMatrix::from_rows(&gens).transpose();
            if cols.rank() != d {
                continue;
            }
            for p in parallelepiped_points(&cols) {
                candidates.insert(p);
            }
        }
        candidates.remove(&vec![0i64; d]);
        let cands: Vec<Vec<i64>> = candidates.into_iter().collect();
        let mut basis: Vec<LatticePoint> = Vec::new();
        'next: for x in &cands {
            for y in &cands {
                if y == x {
                    continue;
                }
                let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                if diff.iter().all(|&v| v == 0) {
                    continue;
                }
                if self.contains(&diff) {
                    continue 'next; // x = y + (x - y), both in the semigroup
                }
            }
            basis.push(LatticePoint::new(x.clone()));
        }
        basis
    }
}

/// Irredundant facet normals of a full-dimensional cone given by generators:
/// scan (d-1)-subsets whose span is a hyperplane and keep the supporting
/// orientations.
fn facet_normals(dim: usize, rays: &[Vec<i64>]) -> Vec<Vec<i64>> {
    if dim == 1 {
        // supporting normal exists only when all rays point the same way
        let pos = rays.iter().any(|r| r[0] > 0);
        let neg = rays.iter().any(|r| r[0] < 0);
        return match (pos, neg) {
            (true, false) => vec![vec![1]],
            (false, true) => vec![vec![-1]],
            _ => Vec::new(),
        };
    }
    let mut out: BTreeSet<Vec<i64>> = BTreeSet::new();
    for subset in combinations(rays.len(), dim - 1) {
        let rows: Vec<Vec<i64>> = subset.iter().map(|&i| rays[i].clone()).collect();
        let kernel = exactlin::integer_kernel(&IntegerMatrix::from_rows(&rows));
        if kernel.cols() != 1 {
            continue;
        }
        let w: Vec<i64> = kernel
            .column(0)
            .iter()
            .map(|v| v.to_i64().expect("normal overflow"))
            .collect();
        let w = primitive(&w);
        let mut nonneg = true;
        let mut nonpos = true;
        for r in rays {
            let v = dot(&w, r);
            if v < 0 {
                nonneg = false;
            }
            if v > 0 {
                nonpos = false;
            }
            if !nonneg && !nonpos {
                break;
            }
        }
        if nonneg {
            out.insert(w);
        } else if nonpos {
            out.insert(w.iter().map(|&v| -v).collect());
        }
    }
    out.into_iter().collect()
}

/// Extreme rays of a pointed full-dimensional cone given by facet normals.
fn extreme_rays(dim: usize, normals: &[Vec<i64>]) -> Vec<Vec<i64>> {
    if dim == 1 {
        // pointed half-line: single generator aligned with every normal
        let s = normals[0][0].signum();
        return vec![vec![s]];
    }
    let mut out: BTreeSet<Vec<i64>> = BTreeSet::new();
    for subset in combinations(normals.len(), dim - 1) {
        let rows: Vec<Vec<i64>> = subset.iter().map(|&i| normals[i].clone()).collect();
        let kernel = exactlin::integer_kernel(&IntegerMatrix::from_rows(&rows));
        if kernel.cols() != 1 {
            continue;
        }
        let g: Vec<i64> = kernel
            .column(0)
            .iter()
            .map(|v| v.to_i64().expect("ray overflow"))
            .collect();
        let g = primitive(&g);
        if normals.iter().all(|w| dot(w, &g) >= 0) {
            out.insert(g);
        } else {
            let neg: Vec<i64> = g.iter().map(|&v| -v).collect();
            if normals.iter().all(|w| dot(w, &neg) >= 0) {
                out.insert(neg);
            }
        }
    }
    out.into_iter().collect()
}

/// Lattice points of the closed parallelepiped `{ A t : t in [0,1]^d }`
/// where the columns of `a` are independent.
fn parallelepiped_points(a: &IntegerMatrix) -> Vec<Vec<i64>> {
    let d = a.rows();
    let det = a.determinant();
    debug_assert!(!det.is_zero());
    // w rows satisfy w_i . x = |det| * t_i for x = A t
    let (scale, w) = adjugate_rows(a, &det);
    // box from the 2^d vertex subset sums
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    for mask in 0..(1u32 << a.cols()) {
        let mut v = vec![0i64; d];
        for j in 0..a.cols() {
            if mask & (1 << j) != 0 {
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi += a.at(i, j).to_i64().expect("generator overflow");
                }
            }
        }
        for i in 0..d {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    let mut out = Vec::new();
    let mut current = vec![0i64; d];
    scan_box(&lo, &hi, 0, &mut current, &mut |x: &[i64]| {
        for row in &w {
            let v = dot(row, x);
            if v < 0 || v > scale {
                return false;
            }
        }
        true
    }, &mut out);
    out
}

/// Rows `w_i` with `w_i · (A e_j) = |det| δ_ij`, i.e. sign(det)·adj(A).
fn adjugate_rows(a: &IntegerMatrix, det: &BigInt) -> (i128, Vec<Vec<i64>>) {
    let d = a.rows();
    let inv_cols: Vec<Vec<Rational>> = (0..d)
        .map(|j| {
            let rhs: Vec<Rational> = (0..d)
                .map(|i| {
                    if i == j {
                        Rational::from_integer(1.into())
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            exactlin::solve_unique_rational(a, &rhs).expect("independent columns")
        })
        .collect();
    let scale = det.abs();
    let scale_rat = Rational::from_integer(scale.clone());
    let mut rows = vec![vec![0i64; d]; d];
    for (j, col) in inv_cols.iter().enumerate() {
        for i in 0..d {
            // row i of |det| * A^{-1}
            let v = &col[i] * &scale_rat;
            assert!(v.denom().to_i64() == Some(1), "adjugate must be integral");
            rows[i][j] = v.numer().to_i64().expect("adjugate overflow");
        }
    }
    (scale.to_i128().expect("determinant overflow"), rows)
}

fn scan_box(
    lo: &[i64],
    hi: &[i64],
    depth: usize,
    current: &mut Vec<i64>,
    keep: &mut impl FnMut(&[i64]) -> bool,
    out: &mut Vec<Vec<i64>>,
) {
    if depth == lo.len() {
        if keep(current) {
            out.push(current.clone());
        }
        return;
    }
    for x in lo[depth]..=hi[depth] {
        current[depth] = x;
        scan_box(lo, hi, depth + 1, current, keep, out);
    }
}

/// Hilbert basis of the cone spanned by arbitrary rays, handled within the
/// linear span when the cone is lower-dimensional.
pub fn hilbert_basis_of_rays(
    dim: usize,
    rays: &[Vec<i64>],
) -> Result<Vec<LatticePoint>, ConeError> {
    if rays.iter().any(|r| r.len() != dim) {
        return Err(ConeError::DimensionMismatch);
    }
    let nonzero: Vec<Vec<i64>> = rays
        .iter()
        .filter(|r| r.iter().any(|&v| v != 0))
        .map(|r| primitive(r))
        .collect();
    if nonzero.is_empty() {
        return Ok(Vec::new());
    }
    let rank = IntegerMatrix::from_rows(&nonzero).rank();
    if rank == dim {
        return Ok(Cone::from_rays(dim, &nonzero)?.hilbert_basis());
    }
    // project onto a saturated basis of the span, solve there, map back
    let ray_matrix = IntegerMatrix::from_rows(&nonzero);
    let orth = exactlin::integer_kernel(&ray_matrix).transpose(); // rows: normals
    let basis = exactlin::integer_kernel(&orth); // dim x rank, saturated
    debug_assert_eq!(basis.cols(), rank);
    let mut projected = Vec::with_capacity(nonzero.len());
    for r in &nonzero {
        let rhs: Vec<Rational> = r
            .iter()
            .map(|&v| Rational::from_integer(v.into()))
            .collect();
        let sol = exactlin::solve_unique_rational(&basis, &rhs).expect("ray lies in span");
        let y: Vec<i64> = sol
            .iter()
            .map(|q| {
                assert!(q.denom().to_i64() == Some(1));
                q.numer().to_i64().expect("span coordinate overflow")
            })
            .collect();
        projected.push(y);
    }
    let inner = Cone::from_rays(rank, &projected)?.hilbert_basis();
    Ok(inner
        .into_iter()
        .map(|y| {
            let x: Vec<i64> = (0..dim)
                .map(|i| {
                    (0..rank)
                        .map(|j| {
                            basis.at(i, j).to_i64().expect("basis overflow") * y.0[j]
                        })
                        .sum()
                })
                .collect();
            LatticePoint::new(x)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<Vec<i64>> {
        v.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn quadrant_hilbert_basis() {
        let c = Cone::from_rays(2, &pts(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(
            c.hilbert_basis(),
            vec![LatticePoint::new(vec![0, 1]), LatticePoint::new(vec![1, 0])]
        );
    }

    #[test]
    fn unimodular_cone_basis_is_generators() {
        let c = Cone::from_rays(2, &pts(&[&[1, 0], &[1, -1]])).unwrap();
        let hb = c.hilbert_basis();
        assert_eq!(
            hb,
            vec![LatticePoint::new(vec![1, -1]), LatticePoint::new(vec![1, 0])]
        );
    }

    #[test]
    fn singular_cone_needs_interior_generator() {
        let c = Cone::from_rays(2, &pts(&[&[1, 0], &[1, 2]])).unwrap();
        let hb = c.hilbert_basis();
        assert_eq!(
            hb,
            vec![
                LatticePoint::new(vec![1, 0]),
                LatticePoint::new(vec![1, 1]),
                LatticePoint::new(vec![1, 2])
            ]
        );
    }

    #[test]
    fn non_pointed_cone_rejected() {
        assert_eq!(
            Cone::from_rays(2, &pts(&[&[1, 0], &[-1, 0], &[0, 1]])).unwrap_err(),
            ConeError::NotPointed
        );
    }

    #[test]
    fn lower_dimensional_cone_rejected_by_constructor() {
        assert_eq!(
            Cone::from_rays(2, &pts(&[&[1, 0]])).unwrap_err(),
            ConeError::NotFullDimensional
        );
    }

    #[test]
    fn redundant_generator_dropped() {
        let c = Cone::from_rays(2, &pts(&[&[1, 0], &[1, 1], &[0, 1]])).unwrap();
        assert_eq!(c.generators(), &pts(&[&[0, 1], &[1, 0]])[..]);
    }

    #[test]
    fn halfspace_constructor_prunes_redundant() {
        let c = Cone::from_halfspaces(2, &pts(&[&[1, 0], &[0, 1], &[1, 1]])).unwrap();
        assert_eq!(c.facets().len(), 2);
        assert_eq!(c.generators(), &pts(&[&[0, 1], &[1, 0]])[..]);
    }

    #[test]
    fn three_dimensional_non_simplicial_cone() {
        // cone over the unit square at height 1
        let c = Cone::from_rays(
            3,
            &pts(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1]]),
        )
        .unwrap();
        assert_eq!(c.generators().len(), 4);
        assert_eq!(c.facets().len(), 4);
        let hb = c.hilbert_basis();
        assert_eq!(hb.len(), 4, "square cone semigroup is generated by its rays");
        let c2 = Cone::from_rays(3, &pts(&[&[0, 0, 1], &[1, 0, 1], &[1, 1, 2]])).unwrap();
        let hb2 = c2.hilbert_basis();
        assert!(hb2.contains(&LatticePoint::new(vec![1, 0, 1])));
        for h in &hb2 {
            assert!(c2.contains(h.coords()));
        }
    }

    #[test]
    fn hilbert_basis_membership_and_minimality_oracle() {
        // every lattice point of the cone decomposes over the basis, and no
        // basis element decomposes over the others
        let cones = [
            Cone::from_rays(2, &pts(&[&[2, 1], &[1, 3]])).unwrap(),
            Cone::from_rays(2, &pts(&[&[1, 0], &[3, 5]])).unwrap(),
            Cone::from_rays(2, &pts(&[&[-1, 2], &[2, 1]])).unwrap(),
        ];
        for c in &cones {
            let hb = c.hilbert_basis();
            let bound = 8i64;
            let mut memo: std::collections::HashMap<Vec<i64>, bool> = Default::default();
            fn decomposes(
                x: &[i64],
                hb: &[LatticePoint],
                c: &Cone,
                memo: &mut std::collections::HashMap<Vec<i64>, bool>,
            ) -> bool {
                if x.iter().all(|&v| v == 0) {
                    return true;
                }
                if let Some(&r) = memo.get(x) {
                    return r;
                }
                let mut ok = false;
                for b in hb {
                    let rest: Vec<i64> = x.iter().zip(b.coords()).map(|(a, v)| a - v).collect();
                    if c.contains(&rest) && decomposes(&rest, hb, c, memo) {
                        ok = true;
                        break;
                    }
                }
                memo.insert(x.to_vec(), ok);
                ok
            }
            for x in -bound..=bound {
                for y in -bound..=bound {
                    let p = [x, y];
                    if !c.contains(&p) {
                        continue;
                    }
                    assert!(decomposes(&p, &hb, c, &mut memo), "{:?} must decompose", p);
                }
            }
            for (i, b) in hb.iter().enumerate() {
                let others: Vec<LatticePoint> =
                    hb.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect();
                let mut memo2 = Default::default();
                assert!(
                    !decomposes(b.coords(), &others, c, &mut memo2),
                    "basis element {:?} is redundant",
                    b
                );
            }
        }
    }

    #[test]
    fn lower_dimensional_rays_handled_in_span() {
        // half-line inside Z^2 along (2, 4) -> primitive generator (1, 2)
        let hb = hilbert_basis_of_rays(2, &pts(&[&[2, 4]])).unwrap();
        assert_eq!(hb, vec![LatticePoint::new(vec![1, 2])]);
        // plane cone inside Z^3
        let hb3 = hilbert_basis_of_rays(3, &pts(&[&[1, 0, 1], &[0, 1, 1]])).unwrap();
        assert_eq!(hb3.len(), 2);
    }
}
