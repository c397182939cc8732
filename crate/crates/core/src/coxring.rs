//! Graded pieces of the homogeneous coordinate ring, surjectivity of the
//! multiplication maps `S_α ⊗ S_β -> S_{α+β}`, nef-cone membership of
//! classes, and the box-scan search harness for failures.
//!
//! A monomial of degree α is an effective divisor of class α; the fiber over
//! α is enumerated exactly by lifting α through the Smith transforms and
//! listing the lattice points of the resulting divisor polytope.

use crate::exactlin::{self, Constraint, Rel};
use crate::fan::{self, Fan, FanError, TorusDivisor};
use crate::gale::{pairings, ClassElement, GaleData, GaleError};
use crate::polytope::{lattice_points_of_hrep, LatticePoint};
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoxError {
    #[error("fan rays do not match the Gale data rays")]
    RayMismatch,
    #[error("graded pieces are infinite-dimensional: rays do not positively span")]
    Unbounded,
    #[error("class has wrong free rank or torsion length for this presentation")]
    ClassShape,
    #[error("search box has wrong arity: expected {expected}, got {got}")]
    BoxArity { expected: usize, got: usize },
    #[error("checkpoint file does not match this search: {0}")]
    CheckpointMismatch(String),
    #[error("checkpoint io: {0}")]
    CheckpointIo(#[from] std::io::Error),
    #[error("checkpoint parse: {0}")]
    CheckpointParse(String),
    #[error(transparent)]
    Gale(#[from] GaleError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// The monomials of one graded piece `S_α`: every effective divisor of
/// class α, together with the (possibly non-effective) lift used to
/// parametrize the fiber.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MonomialBasis {
    pub degree: ClassElement,
    pub lift: TorusDivisor,
    pub monomials: Vec<TorusDivisor>,
}

impl MonomialBasis {
    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    /// The lattice point `m` with `monomial = lift + π*(m)`; inverse of the
    /// fiber parametrization.
    pub fn point_of(&self, g: &GaleData, monomial: &TorusDivisor) -> Option<LatticePoint> {
        g.solve_pi_star(&monomial.sub(&self.lift))
    }
}

fn check_class_shape(g: &GaleData, alpha: &ClassElement) -> Result<(), CoxError> {
    if alpha.free.len() != g.free_rank() || alpha.torsion.len() != g.torsion_factors().len() {
        return Err(CoxError::ClassShape);
    }
    for (t, &d) in alpha.torsion.iter().zip(g.torsion_factors()) {
        if *t < 0 || *t >= d {
            return Err(CoxError::ClassShape);
        }
    }
    Ok(())
}

/// Rays positively span `R^r` iff every `±e_k` is a nonnegative combination,
/// equivalently the dual cone is trivial. Decided by r-variable feasibility:
/// a nonzero functional that is nonnegative on all rays exists iff some
/// coordinate can be pushed strictly positive or negative.
pub(crate) fn rays_positively_span(dim: usize, rays: &[Vec<i64>]) -> bool {
    for k in 0..dim {
        for sign in [1i64, -1] {
            let mut cons: Vec<Constraint> = rays
                .iter()
                .map(|n| Constraint::from_int(n, Rel::Ge, 0))
                .collect();
            let mut c = vec![0i64; dim];
            c[k] = sign;
            cons.push(Constraint::from_int(&c, Rel::Gt, 0));
            if exactlin::rational_feasible(dim, &cons).is_sat() {
                return false;
            }
        }
    }
    true
}

/// Monomials of class α from the rays alone (the grading depends only on
/// the 1-skeleton). Requires the rays to positively span so the pieces are
/// finite-dimensional.
pub(crate) fn monomials_of_class(
    g: &GaleData,
    alpha: &ClassElement,
) -> Result<MonomialBasis, CoxError> {
    check_class_shape(g, alpha)?;
    if !rays_positively_span(g.dim(), g.rays()) {
        return Err(CoxError::Unbounded);
    }
    let lift = g.lift(alpha);
    let r = g.dim();
    let rows: Vec<(Vec<i64>, i64)> = g
        .rays()
        .iter()
        .zip(lift.coeffs())
        .map(|(n, &a)| (n.clone(), -a))
        .collect();
    let verts = fan::rational_vertices(r, &rows);
    let mut monomials: Vec<TorusDivisor> = Vec::new();
    if !verts.is_empty() {
        let lo: Vec<i64> = (0..r)
            .map(|k| {
                verts
                    .iter()
                    .map(|v| v[k].floor().numer().to_i64().expect("bound overflow"))
                    .min()
                    .unwrap()
            })
            .collect();
        let hi: Vec<i64> = (0..r)
            .map(|k| {
                verts
                    .iter()
                    .map(|v| v[k].ceil().numer().to_i64().expect("bound overflow"))
                    .max()
                    .unwrap()
            })
            .collect();
        for m in lattice_points_of_hrep(r, &rows, &lo, &hi) {
            let shift = pairings(g.rays(), m.coords());
            let coeffs: Vec<i64> = lift
                .coeffs()
                .iter()
                .zip(&shift)
                .map(|(a, s)| a.checked_add(*s).expect("monomial overflow"))
                .collect();
            debug_assert!(coeffs.iter().all(|&c| c >= 0));
            monomials.push(TorusDivisor(coeffs));
        }
    }
    monomials.sort();
    Ok(MonomialBasis {
        degree: alpha.clone(),
        lift,
        monomials,
    })
}

/// The graded piece `S_α` for a complete fan built on the Gale data's rays.
pub fn monomial_basis(
    g: &GaleData,
    f: &Fan,
    alpha: &ClassElement,
) -> Result<MonomialBasis, CoxError> {
    if f.rays() != g.rays() {
        return Err(CoxError::RayMismatch);
    }
    monomials_of_class(g, alpha)
}

/// Surjectivity report for `S_α ⊗ S_β -> S_{α+β}`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MultiplicationReport {
    pub alpha: ClassElement,
    pub beta: ClassElement,
    pub dim_alpha: usize,
    pub dim_beta: usize,
    pub dim_sum: usize,
    pub image_dim: usize,
    pub surjective: bool,
    /// monomials of `S_{α+β}` not of the form `D + E`, sorted
    pub missing: Vec<TorusDivisor>,
}

/// Decide surjectivity of the multiplication map by comparing the set of
/// exponent sums `{D + E}` with the full monomial basis of `S_{α+β}`.
pub fn multiplication_check(
    g: &GaleData,
    f: &Fan,
    alpha: &ClassElement,
    beta: &ClassElement,
) -> Result<MultiplicationReport, CoxError> {
    if f.rays() != g.rays() {
        return Err(CoxError::RayMismatch);
    }
    let ba = monomials_of_class(g, alpha)?;
    let bb = monomials_of_class(g, beta)?;
    let bsum = monomials_of_class(g, &g.class_add(alpha, beta))?;
    let mut image: BTreeSet<TorusDivisor> = BTreeSet::new();
    for a in &ba.monomials {
        for b in &bb.monomials {
            image.insert(a.add(b));
        }
    }
    debug_assert!(image.iter().all(|s| bsum.monomials.binary_search(s).is_ok()));
    let missing: Vec<TorusDivisor> = bsum
        .monomials
        .iter()
        .filter(|m| !image.contains(*m))
        .cloned()
        .collect();
    Ok(MultiplicationReport {
        alpha: alpha.clone(),
        beta: beta.clone(),
        dim_alpha: ba.dim(),
        dim_beta: bb.dim(),
        dim_sum: bsum.dim(),
        image_dim: image.len(),
        surjective: missing.is_empty(),
        missing,
    })
}

/// Position of a class relative to the nef cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NefMembership {
    /// ample: interior of the nef cone
    Interior,
    /// nef but not ample
    Boundary,
    Outside,
}

/// Classify a class against the nef cone of the fan. The verdict is
/// representative-independent because nef-ness is invariant under `π*`
/// shifts; classes with a nonzero torsion component are conservatively
/// classified outside.
pub fn nef_cone_membership(
    g: &GaleData,
    f: &Fan,
    alpha: &ClassElement,
) -> Result<NefMembership, CoxError> {
    if f.rays() != g.rays() {
        return Err(CoxError::RayMismatch);
    }
    check_class_shape(g, alpha)?;
    if alpha.torsion.iter().any(|&t| t != 0) {
        return Ok(NefMembership::Outside);
    }
    let d = g.lift(alpha);
    if !fan::is_nef(f, &d)?.is_nef() {
        return Ok(NefMembership::Outside);
    }
    if fan::is_ample(f, &d)? {
        Ok(NefMembership::Interior)
    } else {
        Ok(NefMembership::Boundary)
    }
}

/// Which membership pattern a scanned pair must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// α ample, β ample
    AmpleAmple,
    /// α ample, β nef
    AmpleNef,
    /// α nef, β nef
    NefNef,
}

impl SearchMode {
    fn admits(&self, a: NefMembership, b: NefMembership) -> bool {
        let nef = |m: NefMembership| m != NefMembership::Outside;
        let ample = |m: NefMembership| m == NefMembership::Interior;
        match self {
            SearchMode::AmpleAmple => ample(a) && ample(b),
            SearchMode::AmpleNef => ample(a) && nef(b),
            SearchMode::NefNef => nef(a) && nef(b),
        }
    }
}

impl std::str::FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ample-ample" => Ok(SearchMode::AmpleAmple),
            "ample-nef" => Ok(SearchMode::AmpleNef),
            "nef-nef" => Ok(SearchMode::NefNef),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchOptions {
    /// resumable checkpoint file; cells before `next_cell` are skipped
    pub checkpoint: Option<PathBuf>,
    /// cells per checkpoint flush
    pub chunk: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Checkpoint {
    schema: u32,
    rays: Vec<Vec<i64>>,
    box_bounds: Vec<(i64, i64)>,
    mode: SearchMode,
    next_cell: usize,
    failure_cells: Vec<usize>,
}

/// Scan all class pairs `(α, β)` over the box whose memberships match the
/// mode and return every non-surjective multiplication map, in lexicographic
/// cell order. Cells are independent and processed in parallel chunks; a
/// checkpoint file makes long scans resumable at cell granularity.
pub fn search_surjectivity_failures(
    g: &GaleData,
    f: &Fan,
    box_bounds: &[(i64, i64)],
    mode: SearchMode,
    opts: &SearchOptions,
) -> Result<Vec<MultiplicationReport>, CoxError> {
    if f.rays() != g.rays() {
        return Err(CoxError::RayMismatch);
    }
    if box_bounds.len() != g.free_rank() {
        return Err(CoxError::BoxArity {
            expected: g.free_rank(),
            got: box_bounds.len(),
        });
    }
    let classes = enumerate_box(g, box_bounds);
    let n = classes.len();
    let memberships: Vec<NefMembership> = classes
        .iter()
        .map(|alpha| nef_cone_membership(g, f, alpha))
        .collect::<Result<_, _>>()?;

    let total = n * n;
    let mut start = 0usize;
    let mut failure_cells: Vec<usize> = Vec::new();
    if let Some(path) = &opts.checkpoint {
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            let cp: Checkpoint =
                serde_json::from_str(&text).map_err(|e| CoxError::CheckpointParse(e.to_string()))?;
            if cp.rays != g.rays() || cp.box_bounds != box_bounds || cp.mode != mode {
                return Err(CoxError::CheckpointMismatch(
                    "rays, box, or mode differ from the recorded scan".into(),
                ));
            }
            start = cp.next_cell;
            failure_cells = cp.failure_cells;
        }
    }

    let chunk = if opts.chunk == 0 { 64 } else { opts.chunk };
    let mut failures: Vec<MultiplicationReport> = Vec::new();
    // re-run recorded failure cells to reconstruct their reports
    for &cell in &failure_cells {
        let (i, j) = (cell / n, cell % n);
        failures.push(multiplication_check(g, f, &classes[i], &classes[j])?);
    }
    let mut cursor = start;
    while cursor < total {
        let end = (cursor + chunk).min(total);
        let mut chunk_results: Vec<(usize, MultiplicationReport)> = (cursor..end)
            .into_par_iter()
            .filter_map(|cell| {
                let (i, j) = (cell / n, cell % n);
                if !mode.admits(memberships[i], memberships[j]) {
                    return None;
                }
                match multiplication_check(g, f, &classes[i], &classes[j]) {
                    Ok(report) if !report.surjective => Some(Ok((cell, report))),
                    Ok(_) => None,
                    Err(e) => Some(Err(e)),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        chunk_results.sort_by_key(|(cell, _)| *cell);
        for (cell, report) in chunk_results {
            failure_cells.push(cell);
            failures.push(report);
        }
        cursor = end;
        if let Some(path) = &opts.checkpoint {
            let cp = Checkpoint {
                schema: 1,
                rays: g.rays().to_vec(),
                box_bounds: box_bounds.to_vec(),
                mode,
                next_cell: cursor,
                failure_cells: failure_cells.clone(),
            };
            let mut file = std::fs::File::create(path)?;
            file.write_all(serde_json::to_string(&cp).unwrap().as_bytes())?;
        }
    }
    Ok(failures)
}

/// All classes with free coordinates in the box (lexicographic order) and
/// zero torsion component.
fn enumerate_box(g: &GaleData, box_bounds: &[(i64, i64)]) -> Vec<ClassElement> {
    let k = box_bounds.len();
    let mut out = Vec::new();
    if box_bounds.iter().any(|(lo, hi)| lo > hi) {
        return out;
    }
    let mut current = box_bounds.iter().map(|(lo, _)| *lo).collect::<Vec<i64>>();
    loop {
        out.push(ClassElement {
            free: current.clone(),
            torsion: vec![0; g.torsion_factors().len()],
        });
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < box_bounds[i].1 {
                current[i] += 1;
                for j in i + 1..k {
                    current[j] = box_bounds[j].0;
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::{divisor_polytope, normal_fan, polytope_divisor};
    use crate::gale::gale_transform;
    use crate::polytope::{check_sumset_equality, hull, lattice_points, minkowski_sum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(coords: &[i64]) -> LatticePoint {
        LatticePoint::new(coords.to_vec())
    }

    fn p2_data() -> (GaleData, Fan) {
        let rays = vec![vec![1, 0], vec![0, 1], vec![-1, -1]];
        let f = Fan::new(2, rays.clone(), vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        (gale_transform(2, &rays).unwrap(), f)
    }

    fn free_class(g: &GaleData, free: Vec<i64>) -> ClassElement {
        ClassElement {
            free,
            torsion: vec![0; g.torsion_factors().len()],
        }
    }

    fn hexagon_data() -> (GaleData, Fan, crate::polytope::LatticePolytope, crate::polytope::LatticePolytope)
    {
        let p = hull(&[pt(&[1, -1]), pt(&[2, -1]), pt(&[1, 0])]).unwrap();
        let q = hull(&[pt(&[1, 1]), pt(&[3, 4]), pt(&[2, 3])]).unwrap();
        let hex = minkowski_sum(&p, &q).unwrap();
        let f = normal_fan(&hex).unwrap();
        let g = gale_transform(2, f.rays()).unwrap();
        (g, f, p, q)
    }

    #[test]
    fn projective_plane_degree_two_has_six_monomials() {
        let (g, f) = p2_data();
        let basis = monomial_basis(&g, &f, &free_class(&g, vec![2])).unwrap();
        assert_eq!(basis.dim(), 6);
        for m in &basis.monomials {
            assert!(m.is_effective());
            assert_eq!(m.coeffs().iter().sum::<i64>(), 2);
        }
    }

    #[test]
    fn degree_zero_is_the_empty_monomial() {
        let (g, f) = p2_data();
        let basis = monomial_basis(&g, &f, &g.class_zero()).unwrap();
        assert_eq!(basis.monomials, vec![TorusDivisor::zero(3)]);
    }

    #[test]
    fn negative_degree_is_empty() {
        let (g, f) = p2_data();
        let basis = monomial_basis(&g, &f, &free_class(&g, vec![-1])).unwrap();
        assert_eq!(basis.dim(), 0);
    }

    #[test]
    fn hexagon_triangle_class_monomials_match_lattice_points() {
        let (g, f, p, _) = hexagon_data();
        let d = polytope_divisor(&f, &p).unwrap();
        let alpha = g.divisor_class(&d).unwrap();
        let basis = monomial_basis(&g, &f, &alpha).unwrap();
        let pts = lattice_points(&p);
        assert_eq!(basis.dim(), pts.len());
        assert_eq!(basis.dim(), 3);
        // explicit bijection m <-> D + pi*(m) after aligning the lifts
        let lift_shift = g.solve_pi_star(&d.sub(&basis.lift)).expect("same class");
        for m in &pts {
            let shifted = pairings(g.rays(), m.add(&lift_shift).coords());
            let monomial = TorusDivisor(
                basis
                    .lift
                    .coeffs()
                    .iter()
                    .zip(&shifted)
                    .map(|(a, s)| a + s)
                    .collect(),
            );
            assert!(basis.monomials.binary_search(&monomial).is_ok());
        }
    }

    #[test]
    fn projective_spaces_are_surjective() {
        // r = 1, 2, 3 with all 0 <= alpha, beta <= 4 here (6 in acceptance)
        for r in 1..=3usize {
            let mut rays: Vec<Vec<i64>> = (0..r)
                .map(|i| (0..r).map(|j| if i == j { 1 } else { 0 }).collect())
                .collect();
            rays.push(vec![-1; r]);
            let cones: Vec<Vec<usize>> = (0..=r)
                .map(|omit| (0..=r).filter(|&i| i != omit).collect())
                .collect();
            let f = Fan::new(r, rays.clone(), cones).unwrap();
            let g = gale_transform(r, &rays).unwrap();
            for a in 0..=4i64 {
                for b in 0..=4i64 {
                    let report = multiplication_check(
                        &g,
                        &f,
                        &free_class(&g, vec![a]),
                        &free_class(&g, vec![b]),
                    )
                    .unwrap();
                    assert!(report.surjective, "P^{r} degree ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn hexagon_multiplication_fails_at_the_figure_pair() {
        let (g, f, p, q) = hexagon_data();
        let dp = polytope_divisor(&f, &p).unwrap();
        let dq = polytope_divisor(&f, &q).unwrap();
        let alpha = g.divisor_class(&dp).unwrap();
        let beta = g.divisor_class(&dq).unwrap();
        let report = multiplication_check(&g, &f, &alpha, &beta).unwrap();
        assert!(!report.surjective);
        assert_eq!((report.dim_alpha, report.dim_beta, report.dim_sum), (3, 3, 10));
        assert_eq!(report.image_dim, 9);
        // the missing monomial corresponds to the lattice point (3,1) of the
        // hexagon: D_P + D_Q + pi*((3,1))
        let dsum = dp.add(&dq);
        let shift = pairings(g.rays(), &[3, 1]);
        let expected = TorusDivisor(
            dsum.coeffs().iter().zip(&shift).map(|(a, s)| a + s).collect(),
        );
        assert_eq!(report.missing, vec![expected]);
    }

    #[test]
    fn unit_class_is_surjective() {
        let (g, f, p, _) = hexagon_data();
        let alpha = g.class_zero();
        let beta = g
            .divisor_class(&polytope_divisor(&f, &p).unwrap())
            .unwrap();
        let report = multiplication_check(&g, &f, &alpha, &beta).unwrap();
        assert!(report.surjective);
        assert_eq!(report.dim_sum, report.dim_beta);
    }

    #[test]
    fn multiplication_is_symmetric() {
        let (g, f, p, q) = hexagon_data();
        let alpha = g.divisor_class(&polytope_divisor(&f, &p).unwrap()).unwrap();
        let beta = g.divisor_class(&polytope_divisor(&f, &q).unwrap()).unwrap();
        let ab = multiplication_check(&g, &f, &alpha, &beta).unwrap();
        let ba = multiplication_check(&g, &f, &beta, &alpha).unwrap();
        assert_eq!(ab.surjective, ba.surjective);
        assert_eq!(ab.image_dim, ba.image_dim);
        assert_eq!(ab.missing, ba.missing);
        assert_eq!((ab.dim_alpha, ab.dim_beta), (ba.dim_beta, ba.dim_alpha));
        // monotonicity: image at least as large as either factor
        assert!(ab.image_dim >= ab.dim_alpha.max(ab.dim_beta));
    }

    #[test]
    fn nef_membership_examples() {
        let (g, f) = p2_data();
        assert_eq!(
            nef_cone_membership(&g, &f, &free_class(&g, vec![1])).unwrap(),
            NefMembership::Interior
        );
        assert_eq!(
            nef_cone_membership(&g, &f, &free_class(&g, vec![-1])).unwrap(),
            NefMembership::Outside
        );
        let (g2, f2, p, _) = hexagon_data();
        let alpha = g2
            .divisor_class(&polytope_divisor(&f2, &p).unwrap())
            .unwrap();
        assert_eq!(
            nef_cone_membership(&g2, &f2, &alpha).unwrap(),
            NefMembership::Boundary
        );
    }

    #[test]
    fn nef_membership_is_representative_independent() {
        let (g, f, p, _) = hexagon_data();
        let d = polytope_divisor(&f, &p).unwrap();
        let alpha = g.divisor_class(&d).unwrap();
        let expected = nef_cone_membership(&g, &f, &alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..10 {
            let m = [rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
            let shift = pairings(g.rays(), &m);
            let shifted = TorusDivisor(
                d.coeffs().iter().zip(&shift).map(|(a, s)| a + s).collect(),
            );
            let alpha2 = g.divisor_class(&shifted).unwrap();
            assert_eq!(alpha2, alpha);
            assert_eq!(nef_cone_membership(&g, &f, &alpha2).unwrap(), expected);
        }
    }

    #[test]
    fn torsion_classes_classified_outside() {
        let rays = vec![vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]];
        let f = Fan::new(
            2,
            rays.clone(),
            vec![vec![0, 1], vec![0, 2], vec![1, 3], vec![2, 3]],
        )
        .unwrap();
        let g = gale_transform(2, &rays).unwrap();
        assert_eq!(g.torsion_factors(), &[2]);
        let mut alpha = g.class_zero();
        alpha.torsion[0] = 1;
        assert_eq!(
            nef_cone_membership(&g, &f, &alpha).unwrap(),
            NefMembership::Outside
        );
    }

    #[test]
    fn dim_matches_divisor_polytope_points_for_nef_classes() {
        let (g, f, p, q) = hexagon_data();
        for poly in [p, q] {
            let d = polytope_divisor(&f, &poly).unwrap();
            let alpha = g.divisor_class(&d).unwrap();
            let basis = monomial_basis(&g, &f, &alpha).unwrap();
            assert_eq!(
                basis.dim(),
                lattice_points(&divisor_polytope(&f, &d).unwrap()).len()
            );
        }
    }

    #[test]
    fn nef_bridge_matches_sumset_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let mut tested = 0;
        while tested < 10 {
            let mk = |rng: &mut ChaCha8Rng| {
                let pts: Vec<LatticePoint> = (0..rng.gen_range(3..=5))
                    .map(|_| pt(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3)]))
                    .collect();
                hull(&pts).unwrap()
            };
            let q1 = mk(&mut rng);
            let q2 = mk(&mut rng);
            let sum = minkowski_sum(&q1, &q2).unwrap();
            if !sum.is_full_dimensional() {
                continue;
            }
            let f = normal_fan(&sum).unwrap();
            let (Ok(d1), Ok(d2)) = (polytope_divisor(&f, &q1), polytope_divisor(&f, &q2)) else {
                continue;
            };
            let g = gale_transform(2, f.rays()).unwrap();
            let report = multiplication_check(
                &g,
                &f,
                &g.divisor_class(&d1).unwrap(),
                &g.divisor_class(&d2).unwrap(),
            )
            .unwrap();
            let p1 = check_sumset_equality(&q1, &q2).unwrap();
            assert_eq!(report.surjective, p1.equal);
            assert_eq!(report.missing.len(), p1.missing.len());
            tested += 1;
        }
    }

    #[test]
    fn search_finds_figure_failure_in_nef_nef_mode() {
        let (g, f, p, q) = hexagon_data();
        let alpha = g.divisor_class(&polytope_divisor(&f, &p).unwrap()).unwrap();
        let beta = g.divisor_class(&polytope_divisor(&f, &q).unwrap()).unwrap();
        let bounds: Vec<(i64, i64)> = (0..g.free_rank())
            .map(|k| {
                (
                    alpha.free[k].min(beta.free[k]).min(0),
                    alpha.free[k].max(beta.free[k]).max(0),
                )
            })
            .collect();
        let failures =
            search_surjectivity_failures(&g, &f, &bounds, SearchMode::NefNef, &SearchOptions::default())
                .unwrap();
        assert!(
            failures
                .iter()
                .any(|r| r.alpha == alpha && r.beta == beta),
            "figure failure must be rediscovered"
        );
    }

    #[test]
    fn search_ample_modes_find_nothing_on_projective_plane() {
        let (g, f) = p2_data();
        for mode in [SearchMode::AmpleAmple, SearchMode::AmpleNef] {
            let failures =
                search_surjectivity_failures(&g, &f, &[(0, 6)], mode, &SearchOptions::default())
                    .unwrap();
            assert!(failures.is_empty());
        }
    }

    #[test]
    fn empty_box_gives_empty_result() {
        let (g, f) = p2_data();
        let failures = search_surjectivity_failures(
            &g,
            &f,
            &[(1, 0)],
            SearchMode::NefNef,
            &SearchOptions::default(),
        )
        .unwrap();
        assert!(failures.is_empty());
    }

    #[test]
    fn checkpoint_resume_matches_fresh_run() {
        let (g, f, p, q) = hexagon_data();
        let alpha = g.divisor_class(&polytope_divisor(&f, &p).unwrap()).unwrap();
        let beta = g.divisor_class(&polytope_divisor(&f, &q).unwrap()).unwrap();
        let bounds: Vec<(i64, i64)> = (0..g.free_rank())
            .map(|k| {
                (
                    alpha.free[k].min(beta.free[k]).min(0),
                    alpha.free[k].max(beta.free[k]).max(0),
                )
            })
            .collect();
        let fresh = search_surjectivity_failures(
            &g,
            &f,
            &bounds,
            SearchMode::NefNef,
            &SearchOptions::default(),
        )
        .unwrap();

        let dir = std::env::temp_dir().join("polycox-checkpoint-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cp.json");
        let _ = std::fs::remove_file(&path);
        let opts = SearchOptions {
            checkpoint: Some(path.clone()),
            chunk: 7,
        };
        let first = search_surjectivity_failures(&g, &f, &bounds, SearchMode::NefNef, &opts)
            .unwrap();
        // resume from the completed checkpoint: nothing re-scanned, same result
        let resumed = search_surjectivity_failures(&g, &f, &bounds, SearchMode::NefNef, &opts)
            .unwrap();
        assert_eq!(fresh.len(), first.len());
        assert_eq!(fresh.len(), resumed.len());
        for (a, b) in fresh.iter().zip(&resumed) {
            assert_eq!(a.alpha, b.alpha);
            assert_eq!(a.beta, b.beta);
            assert_eq!(a.missing, b.missing);
        }
        // mismatched parameters are rejected
        let err = search_surjectivity_failures(&g, &f, &bounds, SearchMode::AmpleNef, &opts);
        assert!(matches!(err, Err(CoxError::CheckpointMismatch(_))));
        let _ = std::fs::remove_file(&path);
    }

    #[test]
    fn unbounded_skeleton_rejected() {
        // rays spanning but not positively spanning
        let g = gale_transform(2, &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let err = monomials_of_class(&g, &g.class_zero());
        assert!(matches!(err, Err(CoxError::Unbounded)));
    }
}
