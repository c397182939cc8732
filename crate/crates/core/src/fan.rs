//! Complete fans, normal fans, torus-invariant divisors, divisor polytopes,
//! and nef/ample certificates.
//!
//! A `Fan` is validated on construction: primitive distinct rays, pointed
//! full-dimensional maximal cones whose listed rays are exactly their
//! extreme rays, and completeness via the closed-surface condition (every
//! cone facet is shared with exactly one other cone, with opposite
//! orientation) plus a deterministic point-sampling certificate.

use crate::cone::{Cone, ConeError};
use crate::exactlin::{self, Constraint, IntegerMatrix, Rational, Rel};
use crate::polytope::{
    self, dot, lattice_points_of_hrep, primitive, Facet, LatticePoint, LatticePolytope,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FanError {
    #[error("fan must have positive dimension")]
    ZeroDimension,
    #[error("ray {0} is zero")]
    ZeroRay(usize),
    #[error("ray {0} is not primitive")]
    RayNotPrimitive(usize),
    #[error("rays {0} and {1} coincide")]
    DuplicateRay(usize, usize),
    #[error("ray dimension mismatch at index {0}")]
    RayDimension(usize),
    #[error("cone {0} refers to ray index {1} out of range")]
    BadRayIndex(usize, usize),
    #[error("fan has no maximal cones")]
    NoCones,
    #[error("maximal cone {0} is invalid: {1}")]
    BadCone(usize, ConeError),
    #[error("ray {ray} listed in cone {cone} is not one of its extreme rays")]
    RayNotExtreme { cone: usize, ray: usize },
    #[error("fan is not complete: {0}")]
    Incomplete(String),
    #[error("divisor length {0} does not match ray count {1}")]
    LengthMismatch(usize, usize),
    #[error("polytope is not full-dimensional")]
    NotFullDimensional,
    #[error("normal fan of the polytope is not refined by the fan")]
    RefinementViolated,
    #[error("polytope is empty")]
    EmptyPolytope,
}

/// Torus-invariant divisor `D = sum a_j D_j` as its coefficient vector over
/// the rays.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusDivisor(pub Vec<i64>);

impl TorusDivisor {
    pub fn zero(len: usize) -> Self {
        TorusDivisor(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn is_effective(&self) -> bool {
        self.0.iter().all(|&a| a >= 0)
    }

    pub fn add(&self, other: &TorusDivisor) -> TorusDivisor {
        TorusDivisor(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.checked_add(*b).expect("divisor coefficient overflow"))
                .collect(),
        )
    }

    pub fn sub(&self, other: &TorusDivisor) -> TorusDivisor {
        TorusDivisor(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.checked_sub(*b).expect("divisor coefficient overflow"))
                .collect(),
        )
    }
}

impl std::fmt::Debug for TorusDivisor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A finite complete fan given by its rays and maximal cones.
#[derive(Clone, Serialize)]
#[serde(into = "FanJson")]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
    /// facet normals of each maximal cone, for membership tests
    cone_facets: Vec<Vec<Vec<i64>>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct FanJson {
    dim: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
}

impl From<Fan> for FanJson {
    fn from(f: Fan) -> Self {
        FanJson {
            dim: f.dim,
            rays: f.rays,
            cones: f.max_cones,
        }
    }
}

impl<'de> Deserialize<'de> for Fan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = FanJson::deserialize(d)?;
        Fan::new(raw.dim, raw.rays, raw.cones).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.rays == other.rays && self.max_cones == other.max_cones
    }
}

impl Eq for Fan {}

impl std::fmt::Debug for Fan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Fan(dim={}, rays={:?}, cones={:?})",
            self.dim, self.rays, self.max_cones
        )
    }
}

impl Fan {
    pub fn new(
        dim: usize,
        rays: Vec<Vec<i64>>,
        max_cones: Vec<Vec<usize>>,
    ) -> Result<Fan, FanError> {
        if dim == 0 {
            return Err(FanError::ZeroDimension);
        }
        for (j, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(FanError::RayDimension(j));
            }
            if r.iter().all(|&v| v == 0) {
                return Err(FanError::ZeroRay(j));
            }
            if &primitive(r) != r {
                return Err(FanError::RayNotPrimitive(j));
            }
        }
        for a in 0..rays.len() {
            for b in a + 1..rays.len() {
                if rays[a] == rays[b] {
                    return Err(FanError::DuplicateRay(a, b));
                }
            }
        }
        if max_cones.is_empty() {
            return Err(FanError::NoCones);
        }
        let mut cones: Vec<Vec<usize>> = Vec::with_capacity(max_cones.len());
        for (ci, cone) in max_cones.iter().enumerate() {
            let mut c = cone.clone();
            c.sort_unstable();
            c.dedup();
            for &j in &c {
                if j >= rays.len() {
                    return Err(FanError::BadRayIndex(ci, j));
                }
            }
            cones.push(c);
        }

        let mut cone_facets: Vec<Vec<Vec<i64>>> = Vec::with_capacity(cones.len());
        for (ci, cone) in cones.iter().enumerate() {
            let gens: Vec<Vec<i64>> = cone.iter().map(|&j| rays[j].clone()).collect();
            let c = Cone::from_rays(dim, &gens).map_err(|e| FanError::BadCone(ci, e))?;
            for (k, g) in gens.iter().enumerate() {
                if !c.generators().contains(g) {
                    return Err(FanError::RayNotExtreme {
                        cone: ci,
                        ray: cone[k],
                    });
                }
            }
            if c.generators().len() != gens.len() {
                // an extreme ray of the cone is not listed; the 1-skeleton
                // would be wrong
                return Err(FanError::Incomplete(format!(
                    "cone {ci} has unlisted extreme rays"
                )));
            }
            cone_facets.push(c.facets().to_vec());
        }

        let fan = Fan {
            dim,
            rays,
            max_cones: cones,
            cone_facets,
        };
        fan.check_complete()?;
        Ok(fan)
    }

    /// Closed-surface condition: every facet of every maximal cone is shared
    /// with exactly one other maximal cone, with opposite orientation; plus a
    /// deterministic sample of directions each covered by some cone.
    fn check_complete(&self) -> Result<(), FanError> {
        // key: (canonical normal, ray indices on the facet)
        let mut seen: BTreeMap<(Vec<i64>, Vec<usize>), Vec<(usize, bool)>> = BTreeMap::new();
        for (ci, facets) in self.cone_facets.iter().enumerate() {
            for w in facets {
                let on_facet: Vec<usize> = self.max_cones[ci]
                    .iter()
                    .copied()
                    .filter(|&j| dot(w, &self.rays[j]) == 0)
                    .collect();
                let flipped = match w.iter().find(|&&v| v != 0) {
                    Some(&v) => v < 0,
                    None => false,
                };
                let canon: Vec<i64> = if flipped {
                    w.iter().map(|&v| -v).collect()
                } else {
                    w.clone()
                };
                seen.entry((canon, on_facet))
                    .or_default()
                    .push((ci, flipped));
            }
        }
        for ((_, rays_on), entries) in &seen {
            if entries.len() != 2 {
                return Err(FanError::Incomplete(format!(
                    "facet through rays {:?} bounds {} cone(s)",
                    rays_on,
                    entries.len()
                )));
            }
            if entries[0].0 == entries[1].0 || entries[0].1 == entries[1].1 {
                return Err(FanError::Incomplete(format!(
                    "facet through rays {:?} is not shared with opposite orientation",
                    rays_on
                )));
            }
        }
        // sampling certificate
        for p in sample_directions(self.dim) {
            if !(0..self.max_cones.len()).any(|ci| self.cone_contains(ci, &p)) {
                return Err(FanError::Incomplete(format!(
                    "direction {:?} is not covered",
                    p
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn n_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn maximal_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn cone_contains(&self, cone: usize, x: &[i64]) -> bool {
        self.cone_facets[cone].iter().all(|w| dot(w, x) >= 0)
    }

    fn check_divisor(&self, d: &TorusDivisor) -> Result<(), FanError> {
        if d.len() != self.rays.len() {
            return Err(FanError::LengthMismatch(d.len(), self.rays.len()));
        }
        Ok(())
    }
}

fn sample_directions(dim: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    // all sign patterns over {-1,0,1}^dim except zero
    let mut v = vec![-1i64; dim];
    loop {
        if v.iter().any(|&x| x != 0) {
            out.push(v.clone());
        }
        let mut i = 0;
        loop {
            if i == dim {
                out.push((1..=dim as i64).collect());
                out.push((1..=dim as i64).map(|k| -k).collect());
                return out;
            }
            if v[i] < 1 {
                v[i] += 1;
                break;
            }
            v[i] = -1;
            i += 1;
        }
    }
}

/// Normal fan of a full-dimensional lattice polytope: rays are the primitive
/// inward facet normals, maximal cones are the vertex normal cones.
pub fn normal_fan(p: &LatticePolytope) -> Result<Fan, FanError> {
    if p.is_empty() {
        return Err(FanError::EmptyPolytope);
    }
    if !p.is_full_dimensional() {
        return Err(FanError::NotFullDimensional);
    }
    let rays: Vec<Vec<i64>> = p.facets().iter().map(|f| f.normal.clone()).collect();
    let cones: Vec<Vec<usize>> = p
        .vertices()
        .iter()
        .map(|v| {
            p.facets()
                .iter()
                .enumerate()
                .filter(|(_, f)| dot(&f.normal, v.coords()) == f.offset as i128)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    Fan::new(p.ambient_dim(), rays, cones)
}

/// The polytope `P_D = { m : <m, n_j> >= -a_j }` of a divisor.
///
/// The result is always a lattice polytope: when `P_D` has non-integral
/// vertices the hull of its lattice points is returned, which leaves
/// `M ∩ P_D` unchanged. May be lower-dimensional or empty.
pub fn divisor_polytope(f: &Fan, d: &TorusDivisor) -> Result<LatticePolytope, FanError> {
    f.check_divisor(d)?;
    let r = f.dim;
    let rows: Vec<(Vec<i64>, i64)> = f
        .rays
        .iter()
        .zip(d.coeffs())
        .map(|(n, &a)| (n.clone(), -a))
        .collect();
    let verts = rational_vertices(r, &rows);
    if verts.is_empty() {
        return Ok(LatticePolytope::empty(r));
    }
    let mut integral = true;
    for v in &verts {
        if v.iter().any(|q| !q.denom().is_one()) {
            integral = false;
            break;
        }
    }
    if integral {
        let pts: Vec<LatticePoint> = verts
            .iter()
            .map(|v| {
                LatticePoint::new(
                    v.iter()
                        .map(|q| q.numer().to_i64().expect("vertex overflow"))
                        .collect(),
                )
            })
            .collect();
        return Ok(polytope::hull(&pts).expect("nonempty vertex set"));
    }
    // integer hull
    let lo: Vec<i64> = (0..r)
        .map(|k| verts.iter().map(|v| ratio_floor(&v[k])).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..r)
        .map(|k| verts.iter().map(|v| ratio_ceil(&v[k])).max().unwrap())
        .collect();
    let pts = lattice_points_of_hrep(r, &rows, &lo, &hi);
    if pts.is_empty() {
        Ok(LatticePolytope::empty(r))
    } else {
        Ok(polytope::hull(&pts).expect("nonempty point set"))
    }
}

fn ratio_floor(q: &Rational) -> i64 {
    q.floor().numer().to_i64().expect("bound overflow")
}

fn ratio_ceil(q: &Rational) -> i64 {
    q.ceil().numer().to_i64().expect("bound overflow")
}

/// Exact rational vertices of `{ m : <m, n_i> >= c_i }` (bounded systems).
pub(crate) fn rational_vertices(dim: usize, rows: &[(Vec<i64>, i64)]) -> Vec<Vec<Rational>> {
    let mut verts: Vec<Vec<Rational>> = Vec::new();
    for subset in polytope::combinations(rows.len(), dim) {
        let m = IntegerMatrix::from_rows(
            &subset.iter().map(|&i| rows[i].0.clone()).collect::<Vec<_>>(),
        );
        let rhs: Vec<Rational> = subset
            .iter()
            .map(|&i| Rational::from_integer(rows[i].1.into()))
            .collect();
        let Some(x) = exactlin::solve_unique_rational(&m, &rhs) else {
            continue;
        };
        let ok = rows.iter().all(|(n, c)| {
            let s: Rational = n
                .iter()
                .zip(&x)
                .map(|(&a, b)| Rational::from_integer(a.into()) * b)
                .sum();
            s >= Rational::from_integer((*c).into())
        });
        if ok && !verts.contains(&x) {
            verts.push(x);
        }
    }
    verts
}

/// Divisor of a polytope on a fan refining its normal fan:
/// `a_j = -min_{v in P} <v, n_j>`. Round-trips through `divisor_polytope`,
/// which is exactly the refinement precondition.
pub fn polytope_divisor(f: &Fan, p: &LatticePolytope) -> Result<TorusDivisor, FanError> {
    if p.is_empty() {
        return Err(FanError::EmptyPolytope);
    }
    if p.ambient_dim() != f.dim {
        return Err(FanError::LengthMismatch(p.ambient_dim(), f.dim));
    }
    let coeffs: Vec<i64> = f
        .rays
        .iter()
        .map(|n| {
            (-p.support_min(n).expect("nonempty polytope"))
                .to_i64()
                .expect("coefficient overflow")
        })
        .collect();
    let d = TorusDivisor(coeffs);
    if &divisor_polytope(f, &d)? != p {
        return Err(FanError::RefinementViolated);
    }
    Ok(d)
}

/// Result of a nef test: either a convex support-function certificate (one
/// exact rational local section per maximal cone, in cone order) or the
/// first cone where no section exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NefVerdict {
    Nef { sections: Vec<Vec<Rational>> },
    NotNef { failing_cone: usize },
}

impl NefVerdict {
    pub fn is_nef(&self) -> bool {
        matches!(self, NefVerdict::Nef { .. })
    }
}

/// A divisor is nef iff for every maximal cone there is a local section
/// `m_σ` with `<m_σ, n_j> = -a_j` on the cone's rays and `>= -a_j` on all
/// rays.
pub fn is_nef(f: &Fan, d: &TorusDivisor) -> Result<NefVerdict, FanError> {
    f.check_divisor(d)?;
    let mut sections = Vec::with_capacity(f.max_cones.len());
    for (ci, cone) in f.max_cones.iter().enumerate() {
        match section_for_cone(f, d, cone, false) {
            Some(m) => sections.push(m),
            None => return Ok(NefVerdict::NotNef { failing_cone: ci }),
        }
    }
    Ok(NefVerdict::Nef { sections })
}

/// Ample iff strict sections exist (`> -a_j` off the cone) and the sections
/// of distinct maximal cones differ.
pub fn is_ample(f: &Fan, d: &TorusDivisor) -> Result<bool, FanError> {
    f.check_divisor(d)?;
    let mut sections: Vec<Vec<Rational>> = Vec::with_capacity(f.max_cones.len());
    for cone in &f.max_cones {
        match section_for_cone(f, d, cone, true) {
            Some(m) => sections.push(m),
            None => return Ok(false),
        }
    }
    for i in 0..sections.len() {
        for j in i + 1..sections.len() {
            if sections[i] == sections[j] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn section_for_cone(
    f: &Fan,
    d: &TorusDivisor,
    cone: &[usize],
    strict: bool,
) -> Option<Vec<Rational>> {
    let mut cons: Vec<Constraint> = Vec::with_capacity(f.rays.len());
    for (j, n) in f.rays.iter().enumerate() {
        let rel = if cone.contains(&j) {
            Rel::Eq
        } else if strict {
            Rel::Gt
        } else {
            Rel::Ge
        };
        cons.push(Constraint::from_int(n, rel, -d.0[j]));
    }
    match exactlin::rational_feasible(f.dim, &cons) {
        exactlin::Feasibility::Sat(w) => Some(w),
        exactlin::Feasibility::Unsat => None,
    }
}

/// Support-function coefficients of a polytope measured against a fan's
/// rays, without the refinement check (used to build nef divisors).
pub fn support_divisor(f: &Fan, p: &LatticePolytope) -> Result<TorusDivisor, FanError> {
    if p.is_empty() {
        return Err(FanError::EmptyPolytope);
    }
    if p.ambient_dim() != f.dim {
        return Err(FanError::LengthMismatch(p.ambient_dim(), f.dim));
    }
    Ok(TorusDivisor(
        f.rays
            .iter()
            .map(|n| {
                (-p.support_min(n).unwrap())
                    .to_i64()
                    .expect("coefficient overflow")
            })
            .collect(),
    ))
}

pub(crate) fn bigint_vec(d: &TorusDivisor) -> Vec<BigInt> {
    d.0.iter().map(|&v| BigInt::from(v)).collect()
}
