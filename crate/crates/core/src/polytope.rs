//! Lattice polytopes with exact hulls, Minkowski sums, lattice-point
//! enumeration, and the sumset-equality / integer-decomposition checks.
//!
//! A polytope carries both representations: vertices (V-rep) and primitive
//! inward facet normals with offsets (H-rep), plus an explicit affine-span
//! equality system so lower-dimensional polytopes work throughout.

use crate::exactlin::{self, IntegerMatrix, Rational};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("empty point set has no hull")]
    EmptyHull,
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dilation factor must be positive, got {0}")]
    InvalidDilation(i64),
}

/// A point of the lattice `M = Z^r`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.checked_add(*b).expect("lattice coordinate overflow"))
                .collect(),
        )
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.checked_sub(*b).expect("lattice coordinate overflow"))
                .collect(),
        )
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i64) -> LatticePoint {
        LatticePoint(
            self.0
                .iter()
                .map(|a| a.checked_mul(k).expect("lattice coordinate overflow"))
                .collect(),
        )
    }
}

impl std::fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub(crate) fn dot(a: &[i64], b: &[i64]) -> i128 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn primitive(v: &[i64]) -> Vec<i64> {
    let mut g: i64 = 0;
    for &x in v {
        g = gcd_i64(g, x);
    }
    if g <= 1 {
        return v.to_vec();
    }
    v.iter().map(|&x| x / g).collect()
}

/// Inward facet inequality `<m, normal> >= offset` with primitive normal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

/// A convex lattice polytope, possibly lower-dimensional or empty.
///
/// Constructors keep both representations consistent: vertices are exactly
/// the extreme points sorted lexicographically, every vertex satisfies all
/// facet inequalities and span equalities, and facets are irredundant within
/// the affine span with primitive normals.
#[derive(Clone, Serialize)]
#[serde(into = "PolytopeJson")]
pub struct LatticePolytope {
    dim: usize,
    vertices: Vec<LatticePoint>,
    facets: Vec<Facet>,
    /// affine-span equalities `<m, a> = b`
    span_eqs: Vec<(Vec<i64>, i64)>,
}

#[derive(Clone, Serialize, Deserialize)]
struct PolytopeJson {
    dim: usize,
    vertices: Vec<LatticePoint>,
}

impl From<LatticePolytope> for PolytopeJson {
    fn from(p: LatticePolytope) -> Self {
        PolytopeJson {
            dim: p.dim,
            vertices: p.vertices,
        }
    }
}

impl<'de> Deserialize<'de> for LatticePolytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolytopeJson::deserialize(d)?;
        if raw.vertices.is_empty() {
            return Ok(LatticePolytope::empty(raw.dim));
        }
        for v in &raw.vertices {
            if v.dim() != raw.dim {
                return Err(serde::de::Error::custom("vertex dimension mismatch"));
            }
        }
        hull(&raw.vertices).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for LatticePolytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

impl Eq for LatticePolytope {}

impl std::fmt::Debug for LatticePolytope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "LatticePolytope(dim={}, vertices={:?})",
            self.dim, self.vertices
        )
    }
}

impl LatticePolytope {
    pub fn empty(dim: usize) -> Self {
        LatticePolytope {
            dim,
            vertices: Vec::new(),
            facets: Vec::new(),
            span_eqs: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the affine span; `None` for the empty polytope.
    pub fn affine_dim(&self) -> Option<usize> {
        if self.is_empty() {
            None
        } else {
            Some(self.dim - self.span_eqs.len())
        }
    }

    pub fn is_full_dimensional(&self) -> bool {
        !self.is_empty() && self.span_eqs.is_empty()
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn span_equalities(&self) -> &[(Vec<i64>, i64)] {
        &self.span_eqs
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        if self.is_empty() || p.dim() != self.dim {
            return false;
        }
        self.span_eqs
            .iter()
            .all(|(a, b)| dot(a, p.coords()) == *b as i128)
            && self
                .facets
                .iter()
                .all(|f| dot(&f.normal, p.coords()) >= f.offset as i128)
    }

    /// Minimum of `<v, dir>` over the vertices.
    pub fn support_min(&self, dir: &[i64]) -> Option<i128> {
        self.vertices.iter().map(|v| dot(dir, v.coords())).min()
    }

    pub fn translate(&self, t: &LatticePoint) -> LatticePolytope {
        if self.is_empty() {
            return self.clone();
        }
        let vertices = self.vertices.iter().map(|v| v.add(t)).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: (f.offset as i128 + dot(&f.normal, t.coords()))
                    .to_i64()
                    .expect("offset overflow"),
            })
            .collect();
        let span_eqs = self
            .span_eqs
            .iter()
            .map(|(a, b)| {
                (
                    a.clone(),
                    (*b as i128 + dot(a, t.coords()))
                        .to_i64()
                        .expect("offset overflow"),
                )
            })
            .collect();
        LatticePolytope {
            dim: self.dim,
            vertices,
            facets,
            span_eqs,
        }
    }
}

/// Convex hull of a nonempty set of lattice points.
///
/// Lower-dimensional hulls are supported: the affine span is tracked as an
/// explicit equality system and facets are irredundant within the span.
pub fn hull(points: &[LatticePoint]) -> Result<LatticePolytope, PolytopeError> {
    if points.is_empty() {
        return Err(PolytopeError::EmptyHull);
    }
    let dim = points[0].dim();
    for p in points {
        if p.dim() != dim {
            return Err(PolytopeError::DimensionMismatch(dim, p.dim()));
        }
    }
    let mut pts: Vec<LatticePoint> = points.to_vec();
    pts.sort();
    pts.dedup();

    let p0 = pts[0].clone();
    let diffs: Vec<Vec<i64>> = pts[1..].iter().map(|p| p.sub(&p0).0).collect();
    // rows of `normals` span the saturated orthogonal complement of the
    // difference span, giving the affine-span equalities
    let normals = if diffs.is_empty() || diffs.iter().all(|d| d.iter().all(|&v| v == 0)) {
        IntegerMatrix::identity(dim)
    } else {
        exactlin::integer_kernel(&IntegerMatrix::from_rows(&diffs)).transpose()
    };
    let span_eqs: Vec<(Vec<i64>, i64)> = (0..normals.rows())
        .map(|i| {
            let a: Vec<i64> = normals
                .row(i)
                .iter()
                .map(|v| v.to_i64().expect("span normal overflow"))
                .collect();
            let b = dot(&a, p0.coords()).to_i64().expect("span offset overflow");
            (a, b)
        })
        .collect();
    let d = dim - span_eqs.len();

    if d == 0 {
        return Ok(LatticePolytope {
            dim,
            vertices: vec![p0],
            facets: Vec::new(),
            span_eqs,
        });
    }

    // coordinates in the saturated lattice of the span
    let (basis, ys) = if d == dim {
        (
            IntegerMatrix::identity(dim),
            pts.iter().map(|p| p.0.clone()).collect::<Vec<_>>(),
        )
    } else {
        let normal_matrix = IntegerMatrix::from_rows(
            &span_eqs.iter().map(|(a, _)| a.clone()).collect::<Vec<_>>(),
        );
        let basis = exactlin::integer_kernel(&normal_matrix); // dim x d, saturated
        debug_assert_eq!(basis.cols(), d);
        let mut ys = Vec::with_capacity(pts.len());
        for p in &pts {
            let rhs: Vec<Rational> = p
                .sub(&p0)
                .0
                .iter()
                .map(|&v| Rational::from_integer(v.into()))
                .collect();
            let sol = exactlin::solve_unique_rational(&basis, &rhs)
                .expect("point must lie in the affine span");
            let y: Vec<i64> = sol
                .iter()
                .map(|q| {
                    assert!(q.denom() == &BigInt::from(1), "saturated basis gives integer coords");
                    q.numer().to_i64().expect("span coordinate overflow")
                })
                .collect();
            ys.push(y);
        }
        (basis, ys)
    };

    let (y_vertices, y_facets) = hull_full_dim(d, &ys);

    let (vertices, facets) = if d == dim {
        (
            y_vertices.into_iter().map(LatticePoint).collect::<Vec<_>>(),
            y_facets,
        )
    } else {
        let vertices: Vec<LatticePoint> = y_vertices
            .iter()
            .map(|y| {
                let mut v = p0.0.clone();
                for (i, c) in v.iter_mut().enumerate() {
                    let inc: i128 = (0..d)
                        .map(|j| {
                            basis.at(i, j).to_i64().expect("basis overflow") as i128
                                * y[j] as i128
                        })
                        .sum();
                    *c = (*c as i128 + inc).to_i64().expect("vertex overflow");
                }
                LatticePoint(v)
            })
            .collect();
        let basis_t = basis.transpose();
        let facets = y_facets
            .iter()
            .map(|f| {
                let w: Vec<BigInt> = f.normal.iter().map(|&v| BigInt::from(v)).collect();
                let n = exactlin::solve_integer(&basis_t, &w)
                    .expect("saturated basis: dual vector lifts to an integer normal");
                let n: Vec<i64> = n
                    .iter()
                    .map(|v| v.to_i64().expect("normal overflow"))
                    .collect();
                let n = primitive(&n);
                let offset = vertices
                    .iter()
                    .map(|v| dot(&n, v.coords()))
                    .min()
                    .unwrap()
                    .to_i64()
                    .expect("offset overflow");
                Facet { normal: n, offset }
            })
            .collect();
        (vertices, facets)
    };

    let mut vertices = vertices;
    vertices.sort();
    Ok(LatticePolytope {
        dim,
        vertices,
        facets,
        span_eqs,
    })
}

/// Hull of a full-dimensional point set in `Z^d`, `d >= 1`, in span
/// coordinates. Returns (vertices, facets).
fn hull_full_dim(d: usize, pts: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Facet>) {
    match d {
        1 => {
            let lo = pts.iter().map(|p| p[0]).min().unwrap();
            let hi = pts.iter().map(|p| p[0]).max().unwrap();
            (
                vec![vec![lo], vec![hi]],
                vec![
                    Facet {
                        normal: vec![1],
                        offset: lo,
                    },
                    Facet {
                        normal: vec![-1],
                        offset: -hi,
                    },
                ],
            )
        }
        2 => hull_2d(pts),
        _ => hull_general(d, pts),
    }
}

/// Andrew monotone chain with exact i128 cross products.
fn hull_2d(pts: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Facet>) {
    let mut p: Vec<(i64, i64)> = pts.iter().map(|q| (q[0], q[1])).collect();
    p.sort();
    p.dedup();
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| -> i128 {
        (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
    };
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    let cycle: Vec<(i64, i64)> = lower.into_iter().chain(upper).collect(); // counterclockwise
    let n = cycle.len();
    let mut facets = Vec::with_capacity(n);
    for i in 0..n {
        let a = cycle[i];
        let b = cycle[(i + 1) % n];
        let e = (b.0 - a.0, b.1 - a.1);
        let normal = primitive(&[-e.1, e.0]); // interior on the left of each edge
        let offset = (normal[0] as i128 * a.0 as i128 + normal[1] as i128 * a.1 as i128)
            .to_i64()
            .expect("offset overflow");
        facets.push(Facet { normal, offset });
    }
    (cycle.into_iter().map(|(x, y)| vec![x, y]).collect(), facets)
}

/// Supporting-hyperplane enumeration for `d >= 3`: every facet hyperplane is
/// affinely spanned by d of the input points, so scanning d-subsets with
/// exact kernels yields the complete irredundant H-rep; vertices are the
/// points whose active normals reach full rank.
fn hull_general(d: usize, pts: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Facet>) {
    let n = pts.len();
    let mut facet_set: BTreeSet<(Vec<i64>, i64)> = BTreeSet::new();
    for subset in combinations(n, d) {
        let Some(normal) = hyperplane_normal(d, pts, &subset) else {
            continue;
        };
        let offset = dot(&normal, &pts[subset[0]]);
        let mut lo = true;
        let mut hi = true;
        for p in pts {
            let v = dot(&normal, p);
            if v < offset {
                lo = false;
            }
            if v > offset {
                hi = false;
            }
            if !lo && !hi {
                break;
            }
        }
        let offset = offset.to_i64().expect("offset overflow");
        if lo {
            facet_set.insert((normal, offset));
        } else if hi {
            facet_set.insert((normal.iter().map(|v| -v).collect(), -offset));
        }
    }
    let facets: Vec<Facet> = facet_set
        .into_iter()
        .map(|(normal, offset)| Facet { normal, offset })
        .collect();
    let vertices: Vec<Vec<i64>> = pts
        .iter()
        .filter(|p| {
            let active: Vec<Vec<i64>> = facets
                .iter()
                .filter(|f| dot(&f.normal, p) == f.offset as i128)
                .map(|f| f.normal.clone())
                .collect();
            active.len() >= d && IntegerMatrix::from_rows(&active).rank() == d
        })
        .cloned()
        .collect();
    (vertices, facets)
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] != i + n - k {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Primitive normal of the hyperplane through the given d points, if they
/// affinely span one. Sign is not normalized.
fn hyperplane_normal(d: usize, pts: &[Vec<i64>], subset: &[usize]) -> Option<Vec<i64>> {
    let base = &pts[subset[0]];
    if d == 3 {
        let u: Vec<i128> = (0..3)
            .map(|k| (pts[subset[1]][k] - base[k]) as i128)
            .collect();
        let v: Vec<i128> = (0..3)
            .map(|k| (pts[subset[2]][k] - base[k]) as i128)
            .collect();
        let c = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        if c.iter().all(|&x| x == 0) {
            return None;
        }
        let c: Vec<i64> = c
            .iter()
            .map(|&x| x.to_i64().expect("normal overflow"))
            .collect();
        return Some(primitive(&c));
    }
    let rows: Vec<Vec<i64>> = subset[1..]
        .iter()
        .map(|&i| (0..d).map(|k| pts[i][k] - base[k]).collect())
        .collect();
    let kernel = exactlin::integer_kernel(&IntegerMatrix::from_rows(&rows));
    if kernel.cols() != 1 {
        return None;
    }
    let n: Vec<i64> = kernel
        .column(0)
        .iter()
        .map(|v| v.to_i64().expect("normal overflow"))
        .collect();
    Some(primitive(&n))
}

/// Minkowski sum `P + Q`, the hull of all pairwise vertex sums.
pub fn minkowski_sum(
    p: &LatticePolytope,
    q: &LatticePolytope,
) -> Result<LatticePolytope, PolytopeError> {
    if p.dim != q.dim {
        return Err(PolytopeError::DimensionMismatch(p.dim, q.dim));
    }
    if p.is_empty() || q.is_empty() {
        return Ok(LatticePolytope::empty(p.dim));
    }
    let mut sums = Vec::with_capacity(p.vertices.len() * q.vertices.len());
    for a in &p.vertices {
        for b in &q.vertices {
            sums.push(a.add(b));
        }
    }
    hull(&sums)
}

/// Dilation `νP` for `ν >= 1`.
pub fn dilate(p: &LatticePolytope, nu: i64) -> Result<LatticePolytope, PolytopeError> {
    if nu < 1 {
        return Err(PolytopeError::InvalidDilation(nu));
    }
    if p.is_empty() {
        return Ok(p.clone());
    }
    let mut vertices: Vec<LatticePoint> = p.vertices.iter().map(|v| v.scale(nu)).collect();
    vertices.sort();
    let facets = p
        .facets
        .iter()
        .map(|f| Facet {
            normal: f.normal.clone(),
            offset: f.offset.checked_mul(nu).expect("offset overflow"),
        })
        .collect();
    let span_eqs = p
        .span_eqs
        .iter()
        .map(|(a, b)| (a.clone(), b.checked_mul(nu).expect("offset overflow")))
        .collect();
    Ok(LatticePolytope {
        dim: p.dim,
        vertices,
        facets,
        span_eqs,
    })
}

/// All lattice points of the polytope, sorted lexicographically.
///
/// Bounding-box scan; at the innermost (last) coordinate the facet and span
/// constraints are solved to an exact interval first, so only candidates are
/// visited.
pub fn lattice_points(p: &LatticePolytope) -> Vec<LatticePoint> {
    if p.is_empty() {
        return Vec::new();
    }
    if p.dim == 0 {
        return vec![LatticePoint::new(Vec::new())];
    }
    let r = p.dim;
    let lo: Vec<i64> = (0..r)
        .map(|k| p.vertices.iter().map(|v| v.0[k]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..r)
        .map(|k| p.vertices.iter().map(|v| v.0[k]).max().unwrap())
        .collect();
    let mut out = Vec::new();
    let mut current = vec![0i64; r];
    scan(p, &lo, &hi, 0, &mut current, &mut out);
    out
}

fn scan(
    p: &LatticePolytope,
    lo: &[i64],
    hi: &[i64],
    depth: usize,
    current: &mut Vec<i64>,
    out: &mut Vec<LatticePoint>,
) {
    let r = p.dim;
    if depth == r - 1 {
        let mut lb = lo[depth] as i128;
        let mut ub = hi[depth] as i128;
        for f in &p.facets {
            let partial: i128 = (0..depth)
                .map(|j| f.normal[j] as i128 * current[j] as i128)
                .sum();
            let c = f.normal[depth] as i128;
            let need = f.offset as i128 - partial;
            if c > 0 {
                lb = lb.max(div_ceil_i128(need, c));
            } else if c < 0 {
                ub = ub.min(div_floor_i128(need, c));
            } else if need > 0 {
                return;
            }
        }
        for (a, b) in &p.span_eqs {
            let partial: i128 = (0..depth).map(|j| a[j] as i128 * current[j] as i128).sum();
            let c = a[depth] as i128;
            let need = *b as i128 - partial;
            if c == 0 {
                if need != 0 {
                    return;
                }
            } else {
                if need % c != 0 {
                    return;
                }
                let v = need / c;
                lb = lb.max(v);
                ub = ub.min(v);
            }
        }
        let mut x = lb;
        while x <= ub {
            current[depth] = x as i64;
            out.push(LatticePoint(current.clone()));
            x += 1;
        }
        return;
    }
    for x in lo[depth]..=hi[depth] {
        current[depth] = x;
        scan(p, lo, hi, depth + 1, current, out);
    }
}

/// Lattice points of `{ m : <m, n_i> >= c_i }` inside the given box, sorted
/// lexicographically. Used where only an integral H-rep is available (the
/// vertices may be rational).
pub(crate) fn lattice_points_of_hrep(
    dim: usize,
    ineqs: &[(Vec<i64>, i64)],
    lo: &[i64],
    hi: &[i64],
) -> Vec<LatticePoint> {
    if dim == 0 {
        let origin = LatticePoint::new(Vec::new());
        return if ineqs.iter().all(|(_, c)| *c <= 0) {
            vec![origin]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    let mut current = vec![0i64; dim];
    fn rec(
        dim: usize,
        ineqs: &[(Vec<i64>, i64)],
        lo: &[i64],
        hi: &[i64],
        depth: usize,
        current: &mut Vec<i64>,
        out: &mut Vec<LatticePoint>,
    ) {
        if depth == dim - 1 {
            let mut lb = lo[depth] as i128;
            let mut ub = hi[depth] as i128;
            for (n, c) in ineqs {
                let partial: i128 = (0..depth)
                    .map(|j| n[j] as i128 * current[j] as i128)
                    .sum();
                let coef = n[depth] as i128;
                let need = *c as i128 - partial;
                if coef > 0 {
                    lb = lb.max(div_ceil_i128(need, coef));
                } else if coef < 0 {
                    ub = ub.min(div_floor_i128(need, coef));
                } else if need > 0 {
                    return;
                }
            }
            let mut x = lb;
            while x <= ub {
                current[depth] = x as i64;
                out.push(LatticePoint(current.clone()));
                x += 1;
            }
            return;
        }
        for x in lo[depth]..=hi[depth] {
            current[depth] = x;
            rec(dim, ineqs, lo, hi, depth + 1, current, out);
        }
    }
    rec(dim, ineqs, lo, hi, 0, &mut current, &mut out);
    out
}

fn div_floor_i128(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil_i128(a: i128, b: i128) -> i128 {
    -div_floor_i128(-a, b)
}

/// All pairwise sums of two point sets, deduplicated and sorted.
pub fn sumset(a: &[LatticePoint], b: &[LatticePoint]) -> Vec<LatticePoint> {
    let mut out: BTreeSet<LatticePoint> = BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(x.add(y));
        }
    }
    out.into_iter().collect()
}

/// Comparison of `(M ∩ P) + (M ∩ P')` against `M ∩ (P + P')`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SumsetReport {
    pub equal: bool,
    pub sumset_size: usize,
    pub target_size: usize,
    /// points of `M ∩ (P+P')` not realized as sums, lexicographic order
    pub missing: Vec<LatticePoint>,
}

/// Decide whether `(M ∩ P) + (M ∩ Q) = M ∩ (P + Q)`.
pub fn check_sumset_equality(
    p: &LatticePolytope,
    q: &LatticePolytope,
) -> Result<SumsetReport, PolytopeError> {
    if p.dim != q.dim {
        return Err(PolytopeError::DimensionMismatch(p.dim, q.dim));
    }
    let sum = minkowski_sum(p, q)?;
    let pa = lattice_points(p);
    let pb = lattice_points(q);
    Ok(sumset_report_against(&pa, &pb, &sum))
}

/// Report for the sumset of two explicit point sets against the lattice
/// points of a target polytope that is known to contain every sum.
pub(crate) fn sumset_report_against(
    pa: &[LatticePoint],
    pb: &[LatticePoint],
    target_poly: &LatticePolytope,
) -> SumsetReport {
    let target = lattice_points(target_poly);
    if target.is_empty() || pa.is_empty() || pb.is_empty() {
        return SumsetReport {
            equal: target.is_empty(),
            sumset_size: 0,
            target_size: target.len(),
            missing: target,
        };
    }
    let r = target_poly.dim;
    let lo: Vec<i64> = (0..r)
        .map(|k| target_poly.vertices.iter().map(|v| v.0[k]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..r)
        .map(|k| target_poly.vertices.iter().map(|v| v.0[k]).max().unwrap())
        .collect();
    let mut cells: usize = 1;
    let mut small = r > 0;
    for k in 0..r {
        match (hi[k] - lo[k] + 1)
            .to_usize()
            .and_then(|w| cells.checked_mul(w))
        {
            Some(c) if c <= 20_000_000 => cells = c,
            _ => {
                small = false;
                break;
            }
        }
    }
    let index = |pt: &LatticePoint| -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..pt.0.len() {
            if pt.0[k] < lo[k] || pt.0[k] > hi[k] {
                return None;
            }
            idx = idx * ((hi[k] - lo[k] + 1) as usize) + (pt.0[k] - lo[k]) as usize;
        }
        Some(idx)
    };
    let (sum_count, missing) = if small {
        // dense marking over the target bounding box
        let mut marked = vec![false; cells];
        let mut count = 0usize;
        for x in pa {
            for y in pb {
                let s = x.add(y);
                let i = index(&s).expect("sum must lie in the target box");
                if !marked[i] {
                    marked[i] = true;
                    count += 1;
                }
            }
        }
        let missing: Vec<LatticePoint> = target
            .iter()
            .filter(|t| !marked[index(t).unwrap()])
            .cloned()
            .collect();
        (count, missing)
    } else {
        let set: BTreeSet<LatticePoint> = sumset(pa, pb).into_iter().collect();
        let missing: Vec<LatticePoint> =
            target.iter().filter(|t| !set.contains(*t)).cloned().collect();
        (set.len(), missing)
    };
    debug_assert_eq!(sum_count + missing.len(), target.len());
    SumsetReport {
        equal: missing.is_empty(),
        sumset_size: sum_count,
        target_size: target.len(),
        missing,
    }
}

/// Default dilation range for the decomposition scan: `max(1, r - 1)`.
pub fn default_nu_max(dim: usize) -> i64 {
    (dim as i64 - 1).max(1)
}

/// Check `(M ∩ P) + (M ∩ νP) = M ∩ (ν+1)P` for each `ν = 1..=nu_max`.
pub fn idp_check(
    p: &LatticePolytope,
    nu_max: i64,
) -> Result<Vec<(i64, SumsetReport)>, PolytopeError> {
    if nu_max < 1 {
        return Err(PolytopeError::InvalidDilation(nu_max));
    }
    let base = lattice_points(p);
    let mut out = Vec::with_capacity(nu_max as usize);
    for nu in 1..=nu_max {
        let scaled = dilate(p, nu)?;
        let target = dilate(p, nu + 1)?;
        let pts_scaled = lattice_points(&scaled);
        out.push((nu, sumset_report_against(&base, &pts_scaled, &target)));
    }
    Ok(out)
}
