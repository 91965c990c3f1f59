//! Dense linear algebra for both scalar backends.
//!
//! The exact backend uses fraction-free (Bareiss) elimination on
//! integer-cleared rows, so ranks and kernels never depend on a tolerance.
//! The float backend goes through an SVD and treats singular values below
//! [`FLOAT_RANK_TOL`] times the largest one as zero.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{Complex, Rational, Scalar};

/// Relative singular-value cutoff for numerical rank decisions.
pub const FLOAT_RANK_TOL: f64 = 1e-9;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<S>]) -> Self {
        Matrix::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        S::rank(self)
    }

    /// Basis of `{x : self * x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<S>> {
        S::nullspace(self)
    }

    /// Some solution of `self * x = rhs`, or `None` when the system is inconsistent.
    pub fn solve(&self, rhs: &[S]) -> Option<Vec<S>> {
        S::solve(self, rhs)
    }
}

// ---------------------------------------------------------------------------
// Exact backend
// ---------------------------------------------------------------------------

struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    row.iter().map(|q| q.numer() * (&lcm / q.denom())).collect()
}

/// Fraction-free Gaussian elimination with partial pivoting (smallest nonzero
/// pivot in absolute value). Every intermediate entry is a minor of the
/// integer-cleared input, so the divisions by the previous pivot are exact.
fn bareiss(mut a: Vec<Vec<BigInt>>, cols: usize) -> Echelon {
    let nrows = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let pivot = (r..nrows)
            .filter(|&i| !a[i][c].is_zero())
            .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
        let Some(p) = pivot else { continue };
        a.swap(r, p);
        let (head, tail) = a.split_at_mut(r + 1);
        let prow = &head[r];
        for row in tail.iter_mut() {
            if row[c].is_zero() {
                // The update still has to rescale the row to keep the minor invariant.
                for j in c + 1..cols {
                    let v = &prow[c] * &row[j];
                    row[j] = exact_div(v, &prev);
                }
                continue;
            }
            for j in c + 1..cols {
                let v = &prow[c] * &row[j] - &row[c] * &prow[j];
                row[j] = exact_div(v, &prev);
            }
            row[c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    Echelon { rows: a, pivots }
}

fn exact_div(v: BigInt, d: &BigInt) -> BigInt {
    let (q, rem) = v.div_rem(d);
    debug_assert!(rem.is_zero(), "Bareiss division must be exact");
    q
}

fn echelon_of(m: &Matrix<Rational>) -> Echelon {
    let rows = (0..m.rows()).map(|i| integer_row(m.row(i))).collect();
    bareiss(rows, m.cols())
}

fn primitive(v: Vec<Rational>) -> Vec<Rational> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v;
    }
    ints.into_iter()
        .map(|x| Rational::from_integer(x / &g))
        .collect()
}

pub(crate) fn exact_rank(m: &Matrix<Rational>) -> usize {
    echelon_of(m).pivots.len()
}

pub(crate) fn exact_nullspace(m: &Matrix<Rational>) -> Vec<Vec<Rational>> {
    let cols = m.cols();
    let ech = echelon_of(m);
    let mut is_pivot = vec![false; cols];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![Rational::zero(); cols];
        x[free] = Rational::one();
        for (i, &pc) in ech.pivots.iter().enumerate().rev() {
            let row = &ech.rows[i];
            let mut s = Rational::zero();
            for j in pc + 1..cols {
                if !row[j].is_zero() && !x[j].is_zero() {
                    s += Rational::from_integer(row[j].clone()) * &x[j];
                }
            }
            x[pc] = -s / Rational::from_integer(row[pc].clone());
        }
        basis.push(primitive(x));
    }
    basis
}

pub(crate) fn exact_solve(m: &Matrix<Rational>, rhs: &[Rational]) -> Option<Vec<Rational>> {
    let cols = m.cols();
    let aug = Matrix::from_fn(m.rows(), cols + 1, |i, j| {
        if j < cols {
            m.get(i, j).clone()
        } else {
            rhs[i].clone()
        }
    });
    let ech = echelon_of(&aug);
    if ech.pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &pc) in ech.pivots.iter().enumerate().rev() {
        let row = &ech.rows[i];
        let mut s = Rational::from_integer(row[cols].clone());
        for j in pc + 1..cols {
            if !row[j].is_zero() && !x[j].is_zero() {
                s -= Rational::from_integer(row[j].clone()) * &x[j];
            }
        }
        x[pc] = s / Rational::from_integer(row[pc].clone());
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Float backend
// ---------------------------------------------------------------------------

fn to_na(m: &Matrix<Complex>, min_rows: usize) -> DMatrix<Complex> {
    let rows = m.rows().max(min_rows);
    DMatrix::from_fn(rows, m.cols(), |i, j| {
        if i < m.rows() {
            *m.get(i, j)
        } else {
            Complex::new(0.0, 0.0)
        }
    })
}

/// Singular values of a complex matrix, in no particular order.
pub fn singular_values(m: &Matrix<Complex>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    to_na(m, 0).singular_values().iter().copied().collect()
}

pub(crate) fn float_rank(m: &Matrix<Complex>) -> usize {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > FLOAT_RANK_TOL * max).count()
}

pub(crate) fn float_nullspace(m: &Matrix<Complex>) -> Vec<Vec<Complex>> {
    let cols = m.cols();
    if cols == 0 {
        return Vec::new();
    }
    if m.rows() == 0 {
        return (0..cols)
            .map(|k| {
                (0..cols)
                    .map(|i| Complex::new(if i == k { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
    }
    let a = to_na(m, cols);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let threshold = if max == 0.0 {
        0.0
    } else {
        FLOAT_RANK_TOL * max
    };
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if max == 0.0 || s <= threshold {
            out.push((0..cols).map(|j| v_t[(i, j)].conj()).collect());
        }
    }
    out
}

pub(crate) fn float_solve(m: &Matrix<Complex>, rhs: &[Complex]) -> Option<Vec<Complex>> {
    let cols = m.cols();
    if cols == 0 {
        return if rhs.iter().all(|c| c.norm() == 0.0) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let a = to_na(m, 0);
    let b = nalgebra::DVector::from_iterator(rhs.len(), rhs.iter().copied());
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(&b, FLOAT_RANK_TOL * max.max(f64::MIN_POSITIVE))
        .ok()?;
    let r = &a * &x - &b;
    let rnorm = r.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let bnorm = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let xnorm = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !x.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return None;
    }
    if rnorm > 1e-8 * (bnorm + max * xnorm).max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(x.iter().copied().collect())
}

/// Least-squares solution with its relative residual `‖Ax − b‖∞ / max(1, ‖b‖∞)`.
pub fn least_squares(m: &Matrix<Complex>, rhs: &[Complex]) -> Option<(Vec<Complex>, f64)> {
    if m.cols() == 0 {
        return None;
    }
    let a = to_na(m, 0);
    let b = nalgebra::DVector::from_iterator(rhs.len(), rhs.iter().copied());
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let x = svd.solve(&b, 1e-13 * max).ok()?;
    if !x.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return None;
    }
    let r = &a * &x - &b;
    let rnorm = r.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let bnorm = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Some((x.iter().copied().collect(), rnorm / bnorm.max(1.0)))
}

/// Singular values in decreasing order and a unit vector spanning the
/// direction of the smallest one (`M v ≈ σ_min v'`).
pub fn smallest_singular(m: &Matrix<Complex>) -> (Vec<f64>, Vec<Complex>) {
    let cols = m.cols();
    let svd = to_na(m, cols).svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let last = *order.last().expect("nonempty matrix");
    let v = (0..cols).map(|j| v_t[(last, j)].conj()).collect();
    (sv, v)
}

/// Determinant of a small square complex matrix (LU via nalgebra).
pub fn determinant(m: &Matrix<Complex>) -> Complex {
    to_na(m, 0).determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    /// Plain rational Gauss-Jordan, used as an independent rank oracle.
    fn naive_rank(m: &Matrix<Rational>) -> usize {
        let mut a: Vec<Vec<Rational>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
        let mut r = 0;
        for c in 0..m.cols() {
            let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            for i in 0..a.len() {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone() / a[r][c].clone();
                    for j in 0..m.cols() {
                        let v = a[r][j].clone() * &f;
                        a[i][j] -= v;
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn rank_of_small_examples() {
        let m = Matrix::from_fn(3, 3, |i, j| q((i * 3 + j) as i64));
        assert_eq!(m.rank(), 2);
        let z = Matrix::<Rational>::zeros(2, 4);
        assert_eq!(z.rank(), 0);
        assert_eq!(z.nullspace().len(), 4);
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = Matrix::from_fn(2, 1, |_, _| q(1));
        assert!(m.solve(&[q(1), q(2)]).is_none());
        assert_eq!(m.solve(&[q(3), q(3)]).unwrap(), vec![q(3)]);
    }

    #[test]
    fn float_nullspace_of_wide_matrix() {
        let m = Matrix::from_fn(1, 3, |_, j| Complex::new((j + 1) as f64, 0.0));
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            let r = m.mul_vec(&v);
            assert!(r[0].norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn bareiss_rank_matches_naive(
            rows in 1usize..6,
            cols in 1usize..6,
            entries in proptest::collection::vec(-3i64..4, 36),
            dens in proptest::collection::vec(1i64..4, 36),
        ) {
            let m = Matrix::from_fn(rows, cols, |i, j| {
                let k = i * 6 + j;
                Rational::new(entries[k].into(), dens[k].into())
            });
            prop_assert_eq!(m.rank(), naive_rank(&m));
            let ns = m.nullspace();
            prop_assert_eq!(ns.len() + m.rank(), cols);
            for v in &ns {
                prop_assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
            }
        }
    }
}
