//! Exact integer and rational linear algebra.
//!
//! Dense arbitrary-precision matrices with Hermite/Smith normal forms,
//! saturated integer kernels, exact linear solving, and a Fourier–Motzkin
//! feasibility oracle for mixed strict/non-strict rational systems. All of
//! the geometry above this module reduces to these routines.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar, always in reduced canonical form.
pub type Rational = num_rational::BigRational;

/// Dense integer matrix, row-major, arbitrary precision.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl std::fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IntegerMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.at(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl IntegerMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| BigInt::from(v)))
            .collect();
        IntegerMatrix { rows: r, cols: c, data }
    }

    pub fn from_bigint_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntegerMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        assert!(i < self.rows);
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.at(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.at(i, j) + a * other.at(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q * row[src]
    fn add_row_mul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.at(dst, j) + q * self.at(src, j);
            self.set(dst, j, v);
        }
    }

    /// col[dst] += q * col[src]
    fn add_col_mul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.at(i, dst) + q * self.at(i, src);
            self.set(i, dst, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.at(i, j);
            self.set(i, j, v);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.at(i, j);
            self.set(i, j, v);
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.at(k, k).is_zero() {
                match (k + 1..n).find(|&i| !m.at(i, k).is_zero()) {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j)) / &prev;
                    m.set(i, j, v);
                }
                m.set(i, k, BigInt::zero());
            }
            prev = m.at(k, k).clone();
        }
        let d = m.at(n - 1, n - 1).clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Rank over the rationals (equivalently over the integers).
    pub fn rank(&self) -> usize {
        rank_of_bigint_rows(&(0..self.rows).map(|i| self.row(i).to_vec()).collect::<Vec<_>>())
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.determinant().abs().is_one()
    }

    /// Inverse of a unimodular matrix (integer entries).
    pub fn inverse_unimodular(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let det = self.determinant();
        assert!(det.abs().is_one(), "matrix is not unimodular");
        // Gauss-Jordan over rationals, then the result is integral because
        // det = ±1.
        let mut a: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|v| Rational::from_integer(v.clone()))
                    .collect()
            })
            .collect();
        let mut inv: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&i| !a[i][k].is_zero()).expect("singular");
            a.swap(k, p);
            inv.swap(k, p);
            let piv = a[k][k].clone();
            for j in 0..n {
                a[k][j] = &a[k][j] / &piv;
                inv[k][j] = &inv[k][j] / &piv;
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let f = a[i][k].clone();
                for j in 0..n {
                    a[i][j] = &a[i][j] - &f * &a[k][j];
                    inv[i][j] = &inv[i][j] - &f * &inv[k][j];
                }
            }
        }
        let rows: Vec<Vec<BigInt>> = inv
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| {
                        assert!(v.denom().is_one(), "non-integral inverse entry");
                        v.numer().clone()
                    })
                    .collect()
            })
            .collect();
        Self::from_bigint_rows(rows)
    }
}

fn rank_of_bigint_rows(rows: &[Vec<BigInt>]) -> usize {
    let mut work: Vec<Vec<BigInt>> = rows.iter().filter(|r| !r.iter().all(Zero::is_zero)).cloned().collect();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut col = 0;
    while col < cols && rank < work.len() {
        let pivot = (rank..work.len()).find(|&i| !work[i][col].is_zero());
        let Some(p) = pivot else {
            col += 1;
            continue;
        };
        work.swap(rank, p);
        for i in rank + 1..work.len() {
            if work[i][col].is_zero() {
                continue;
            }
            // fraction-free row combination, then re-reduce by content
            let a = work[rank][col].clone();
            let b = work[i][col].clone();
            for j in 0..cols {
                work[i][j] = &work[i][j] * &a - &work[rank][j] * &b;
            }
            reduce_row_content(&mut work[i]);
        }
        rank += 1;
        col += 1;
    }
    rank
}

fn reduce_row_content(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for v in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for v in row.iter_mut() {
        *v = &*v / &g;
    }
}

/// Hermite normal form with a left unimodular transform: `u * m = h`.
///
/// `h` is in lower echelon form: pivot columns increase with the row index,
/// each pivot is positive and is the last nonzero entry of its row, entries
/// below a pivot are reduced into `[0, pivot)`, and zero rows come first.
pub fn hermite_normal_form(m: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix) {
    let mut h = m.clone();
    let mut u = IntegerMatrix::identity(m.rows());
    let rows = m.rows();
    let cols = m.cols();
    if rows == 0 {
        return (h, u);
    }

    // Process columns right to left, assigning pivots to the bottom rows
    // upward; row operations mirror into u.
    let mut pivot_row = rows; // exclusive upper bound of unpivoted rows
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in (0..cols).rev() {
        if pivot_row == 0 {
            break;
        }
        let target = pivot_row - 1;
        loop {
            // smallest nonzero |entry| in this column among rows 0..=target
            let mut best: Option<usize> = None;
            for i in 0..=target {
                if h.at(i, col).is_zero() {
                    continue;
                }
                match best {
                    None => best = Some(i),
                    Some(b) => {
                        if h.at(i, col).abs() < h.at(b, col).abs() {
                            best = Some(i);
                        }
                    }
                }
            }
            let Some(b) = best else {
                break;
            };
            h.swap_rows(b, target);
            u.swap_rows(b, target);
            let mut done = true;
            for i in 0..target {
                if h.at(i, col).is_zero() {
                    continue;
                }
                let q = -(h.at(i, col) / h.at(target, col));
                h.add_row_mul(i, target, &q);
                u.add_row_mul(i, target, &q);
                if !h.at(i, col).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !h.at(target, col).is_zero() {
            if h.at(target, col).is_negative() {
                h.negate_row(target);
                u.negate_row(target);
            }
            pivots.push((target, col));
            pivot_row = target;
        }
    }

    // Reduce residues below each pivot, rightmost pivot column first so the
    // side effects only hit columns that are still unfixed.
    for &(k, c) in &pivots {
        let p = h.at(k, c).clone();
        for i in k + 1..rows {
            let q = -h.at(i, c).div_floor(&p);
            h.add_row_mul(i, k, &q);
            u.add_row_mul(i, k, &q);
        }
    }

    (h, u)
}

/// Smith normal form data: `left * m * right = diag(diagonal)`.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    /// Invariant factors, nonnegative, each dividing the next, zeros trailing.
    /// Length is `min(rows, cols)`.
    pub diagonal: Vec<BigInt>,
    pub left: IntegerMatrix,
    pub right: IntegerMatrix,
}

/// Smith normal form by elementary row/column operations.
///
/// Pivot choice is the minimal absolute value with a deterministic
/// tie-break (lowest row, then lowest column), so the transforms are
/// reproducible.
pub fn smith_normal_form(m: &IntegerMatrix) -> SmithDecomposition {
    let mut a = m.clone();
    let rows = a.rows();
    let cols = a.cols();
    let mut left = IntegerMatrix::identity(rows);
    let mut right = IntegerMatrix::identity(cols);
    let k = rows.min(cols);

    let mut n = 0;
    'outer: while n < k {
        // minimal |value| pivot in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in n..rows {
            for j in n..cols {
                if a.at(i, j).is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if a.at(i, j).abs() < a.at(bi, bj).abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = best else {
            break; // trailing block is zero
        };
        a.swap_rows(n, pi);
        left.swap_rows(n, pi);
        a.swap_cols(n, pj);
        right.swap_cols(n, pj);

        // clear column n below the pivot
        for i in n + 1..rows {
            if a.at(i, n).is_zero() {
                continue;
            }
            let q = -(a.at(i, n) / a.at(n, n));
            a.add_row_mul(i, n, &q);
            left.add_row_mul(i, n, &q);
            if !a.at(i, n).is_zero() {
                continue 'outer; // remainder became a smaller pivot candidate
            }
        }
        // clear row n right of the pivot
        for j in n + 1..cols {
            if a.at(n, j).is_zero() {
                continue;
            }
            let q = -(a.at(n, j) / a.at(n, n));
            a.add_col_mul(j, n, &q);
            right.add_col_mul(j, n, &q);
            if !a.at(n, j).is_zero() {
                continue 'outer;
            }
        }
        // pivot must divide the whole trailing block
        for i in n + 1..rows {
            for j in n + 1..cols {
                if (a.at(i, j) % a.at(n, n)).is_zero() {
                    continue;
                }
                a.add_row_mul(n, i, &BigInt::one());
                left.add_row_mul(n, i, &BigInt::one());
                continue 'outer;
            }
        }
        if a.at(n, n).is_negative() {
            a.negate_row(n);
            left.negate_row(n);
        }
        n += 1;
    }

    let diagonal = (0..k).map(|i| a.at(i, i).clone()).collect();
    SmithDecomposition {
        diagonal,
        left,
        right,
    }
}

/// Basis of the integer kernel `{v : m v = 0}`, returned as matrix columns.
///
/// The basis spans a saturated lattice: any integer kernel vector is an
/// integer combination of the columns.
pub fn integer_kernel(m: &IntegerMatrix) -> IntegerMatrix {
    let snf = smith_normal_form(m);
    let rows = m.rows();
    let cols = m.cols();
    let mut kernel_cols: Vec<usize> = Vec::new();
    for i in 0..cols {
        let diag_zero = i >= rows || i >= snf.diagonal.len() || snf.diagonal[i].is_zero();
        if diag_zero {
            kernel_cols.push(i);
        }
    }
    let mut out = IntegerMatrix::zero(cols, kernel_cols.len());
    for (jj, &j) in kernel_cols.iter().enumerate() {
        let mut col = snf.right.column(j);
        // sign-normalize: first nonzero entry positive
        if let Some(first) = col.iter().find(|v| !v.is_zero()) {
            if first.is_negative() {
                for v in col.iter_mut() {
                    *v = -&*v;
                }
            }
        }
        for i in 0..cols {
            out.set(i, jj, col[i].clone());
        }
    }
    out
}

/// Solve `m x = rhs` over the integers via the Smith decomposition.
pub fn solve_integer(m: &IntegerMatrix, rhs: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(m.rows(), rhs.len(), "dimension mismatch");
    let snf = smith_normal_form(m);
    let y = snf.left.mul_vec(rhs);
    let mut w = vec![BigInt::zero(); m.cols()];
    for (i, yi) in y.iter().enumerate() {
        let d = if i < snf.diagonal.len() {
            snf.diagonal[i].clone()
        } else {
            BigInt::zero()
        };
        if d.is_zero() {
            if !yi.is_zero() {
                return None;
            }
        } else {
            let (q, r) = yi.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            if i < m.cols() {
                w[i] = q;
            } else if !q.is_zero() {
                return None;
            }
        }
    }
    Some(snf.right.mul_vec(&w))
}

/// Solve `m x = rhs` over the rationals when the solution is unique
/// (i.e. `m` has full column rank and the system is consistent).
pub fn solve_unique_rational(m: &IntegerMatrix, rhs: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(m.rows(), rhs.len(), "dimension mismatch");
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<Vec<Rational>> = (0..rows)
        .map(|i| {
            let mut row: Vec<Rational> = m
                .row(i)
                .iter()
                .map(|v| Rational::from_integer(v.clone()))
                .collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let piv = a[r][c].clone();
        for j in c..=cols {
            a[r][j] = &a[r][j] / &piv;
        }
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..=cols {
                a[i][j] = &a[i][j] - &f * &a[r][j];
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if pivots.len() < cols {
        return None; // underdetermined
    }
    // consistency: remaining rows must be zero = zero
    for row in a.iter().skip(r) {
        if !row[cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][cols].clone();
    }
    Some(x)
}

/// Relation of a linear constraint `coeffs · x  rel  rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Ge,
    Gt,
    Eq,
}

/// One linear constraint over rational variables.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rel: Rel,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, rel: Rel, rhs: Rational) -> Self {
        Constraint { coeffs, rel, rhs }
    }

    pub fn from_int(coeffs: &[i64], rel: Rel, rhs: i64) -> Self {
        Constraint {
            coeffs: coeffs.iter().map(|&v| Rational::from_integer(v.into())).collect(),
            rel,
            rhs: Rational::from_integer(rhs.into()),
        }
    }

    pub fn from_bigint(coeffs: &[BigInt], rel: Rel, rhs: BigInt) -> Self {
        Constraint {
            coeffs: coeffs.iter().map(|v| Rational::from_integer(v.clone())).collect(),
            rel,
            rhs: Rational::from_integer(rhs),
        }
    }
}

/// Outcome of an exact feasibility query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Sat(Vec<Rational>),
    Unsat,
}

impl Feasibility {
    pub fn is_sat(&self) -> bool {
        matches!(self, Feasibility::Sat(_))
    }

    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            Feasibility::Sat(w) => Some(w),
            Feasibility::Unsat => None,
        }
    }
}

// internal: only >= / > after splitting equalities
#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<Rational>,
    strict: bool,
    rhs: Rational,
}

impl Row {
    /// Scale so coefficients and rhs are coprime integers; orientation kept.
    fn normalize(&mut self) {
        let mut lcm = BigInt::one();
        for c in self.coeffs.iter().chain(std::iter::once(&self.rhs)) {
            lcm = lcm.lcm(c.denom());
        }
        let mut gcd = BigInt::zero();
        let scaled: Vec<BigInt> = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.rhs))
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        for v in &scaled {
            gcd = gcd.gcd(v);
        }
        if gcd.is_zero() {
            gcd = BigInt::one();
        }
        let n = self.coeffs.len();
        for (i, v) in scaled.into_iter().enumerate() {
            let r = Rational::from_integer(v / &gcd);
            if i < n {
                self.coeffs[i] = r;
            } else {
                self.rhs = r;
            }
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn constant_holds(&self) -> bool {
        if self.strict {
            self.rhs < Rational::zero()
        } else {
            self.rhs <= Rational::zero()
        }
    }
}

/// Exact feasibility of a rational linear system by Fourier–Motzkin
/// elimination. Strict inequalities are tracked through combination, so no
/// epsilon bookkeeping is needed. Deterministic: on SAT the witness depends
/// only on the input.
pub fn rational_feasible(n_vars: usize, constraints: &[Constraint]) -> Feasibility {
    let mut system: Vec<Row> = Vec::new();
    for c in constraints {
        assert_eq!(c.coeffs.len(), n_vars, "constraint arity mismatch");
        match c.rel {
            Rel::Ge => system.push(Row {
                coeffs: c.coeffs.clone(),
                strict: false,
                rhs: c.rhs.clone(),
            }),
            Rel::Gt => system.push(Row {
                coeffs: c.coeffs.clone(),
                strict: true,
                rhs: c.rhs.clone(),
            }),
            Rel::Eq => {
                system.push(Row {
                    coeffs: c.coeffs.clone(),
                    strict: false,
                    rhs: c.rhs.clone(),
                });
                system.push(Row {
                    coeffs: c.coeffs.iter().map(|v| -v).collect(),
                    strict: false,
                    rhs: -&c.rhs,
                });
            }
        }
    }

    // stages[j] constrains variables 0..j
    let mut stages: Vec<Vec<Row>> = Vec::with_capacity(n_vars + 1);
    match compact(system) {
        Ok(s) => stages.push(s),
        Err(()) => return Feasibility::Unsat,
    }
    for var in (0..n_vars).rev() {
        let current = stages.last().unwrap();
        let mut next: Vec<Row> = Vec::new();
        let mut lowers: Vec<&Row> = Vec::new();
        let mut uppers: Vec<&Row> = Vec::new();
        for row in current {
            if row.coeffs[var].is_zero() {
                next.push(Row {
                    coeffs: row.coeffs[..var].to_vec(),
                    strict: row.strict,
                    rhs: row.rhs.clone(),
                });
            } else if row.coeffs[var].is_positive() {
                lowers.push(row);
            } else {
                uppers.push(row);
            }
        }
        for lo in &lowers {
            for up in &uppers {
                // lo: c x >= rhs - a·y (c>0)  up: c' x >= rhs' - a'·y (c'<0)
                // combine to (a/c - a'/c')·y >= rhs/c - rhs'/c'
                let c = &lo.coeffs[var];
                let cp = &up.coeffs[var];
                let coeffs: Vec<Rational> = (0..var)
                    .map(|j| &lo.coeffs[j] / c - &up.coeffs[j] / cp)
                    .collect();
                let rhs = &lo.rhs / c - &up.rhs / cp;
                next.push(Row {
                    coeffs,
                    strict: lo.strict || up.strict,
                    rhs,
                });
            }
        }
        match compact(next) {
            Ok(s) => stages.push(s),
            Err(()) => return Feasibility::Unsat,
        }
    }

    // Back-substitute: stages[i] constrains variables 0..n_vars-i, so the
    // bounds for variable v come from stages[n_vars - 1 - v] given the values
    // already chosen for variables 0..v.
    let one = Rational::one();
    let mut witness: Vec<Rational> = Vec::with_capacity(n_vars);
    for var in 0..n_vars {
        let stage = &stages[n_vars - 1 - var];
        let mut lower: Option<(Rational, bool)> = None; // (bound, strict)
        let mut upper: Option<(Rational, bool)> = None;
        for row in stage {
            let c = &row.coeffs[var];
            if c.is_zero() {
                continue;
            }
            let mut rest = row.rhs.clone();
            for (j, w) in witness.iter().enumerate() {
                rest = rest - &row.coeffs[j] * w;
            }
            let bound = &rest / c;
            if c.is_positive() {
                let tighter = match &lower {
                    None => true,
                    Some((b, s)) => bound > *b || (bound == *b && row.strict && !*s),
                };
                if tighter {
                    lower = Some((bound, row.strict));
                }
            } else {
                let tighter = match &upper {
                    None => true,
                    Some((b, s)) => bound < *b || (bound == *b && row.strict && !*s),
                };
                if tighter {
                    upper = Some((bound, row.strict));
                }
            }
        }
        let value = match (lower, upper) {
            (None, None) => Rational::zero(),
            (Some((lo, strict)), None) => {
                if strict {
                    lo + &one
                } else {
                    lo
                }
            }
            (None, Some((up, strict))) => {
                if strict {
                    up - &one
                } else {
                    up
                }
            }
            (Some((lo, lo_strict)), Some((up, up_strict))) => {
                debug_assert!(lo <= up, "inconsistent bounds after elimination");
                if lo == up {
                    debug_assert!(!lo_strict && !up_strict);
                    lo
                } else {
                    (lo + up) / Rational::from_integer(2.into())
                }
            }
        };
        witness.push(value);
    }
    Feasibility::Sat(witness)
}

// Compact a system: evaluate constant rows (Err on violation), drop satisfied
// constants, normalize, and keep only the dominant row per coefficient vector.
fn compact(rows: Vec<Row>) -> Result<Vec<Row>, ()> {
    use std::collections::HashMap;
    let mut best: HashMap<Vec<(BigInt, BigInt)>, Row> = HashMap::new();
    let mut order: Vec<Vec<(BigInt, BigInt)>> = Vec::new();
    for mut row in rows {
        if row.is_constant() {
            if !row.constant_holds() {
                return Err(());
            }
            continue;
        }
        row.normalize();
        let key: Vec<(BigInt, BigInt)> = row
            .coeffs
            .iter()
            .map(|c| (c.numer().clone(), c.denom().clone()))
            .collect();
        match best.get_mut(&key) {
            None => {
                order.push(key.clone());
                best.insert(key, row);
            }
            Some(prev) => {
                let stronger = row.rhs > prev.rhs
                    || (row.rhs == prev.rhs && row.strict && !prev.strict);
                if stronger {
                    *prev = row;
                }
            }
        }
    }
    Ok(order.into_iter().map(|k| best.remove(&k).unwrap()).collect())
}
