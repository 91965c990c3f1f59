//! Catalecticant matrices and graded pieces of the apolar ideal.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::form::{DualForm, Form};
use crate::linalg::Matrix;
use crate::monomial::{factorial, index, monomials};
use crate::scalar::Scalar;

/// Matrix of the map `S^δ → S_{d−δ}`, `t ↦ t ⌟ f`. Rows are indexed by dual
/// monomials of degree δ and columns by monomials of degree `d − δ`, so entry
/// `(m, m')` is the coefficient of `m'` in `m ⌟ f`.
#[derive(Clone, Debug)]
pub struct Catalecticant<S> {
    delta: usize,
    matrix: Matrix<S>,
    rank: usize,
    kernel: Vec<DualForm<S>>,
}

impl<S: Scalar> Catalecticant<S> {
    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Basis of `{t ∈ S^δ : t ⌟ f = 0}`.
    pub fn kernel(&self) -> &[DualForm<S>] {
        &self.kernel
    }
}

fn catalecticant_matrix<S: Scalar>(f: &Form<S>, delta: usize) -> Matrix<S> {
    let n = f.num_vars();
    let d = f.degree();
    let rows = monomials(n, delta);
    let cols = monomials(n, d - delta);
    let mut sum = vec![0; n];
    Matrix::from_fn(rows.len(), cols.len(), |i, j| {
        let (m, mp) = (&rows[i], &cols[j]);
        for k in 0..n {
            sum[k] = m[k] + mp[k];
        }
        let c = &f.coeffs()[index(&sum)];
        if c.is_zero() {
            return S::zero();
        }
        let w = (0..n).fold(BigInt::one(), |acc, k| {
            acc * factorial(sum[k]) / factorial(mp[k])
        });
        c.clone() * S::from_bigint(&w)
    })
}

/// The catalecticant `f_{δ, d−δ}` with its rank and kernel.
pub fn catalecticant<S: Scalar>(f: &Form<S>, delta: usize) -> Result<Catalecticant<S>> {
    let d = f.degree();
    if delta > d {
        return Err(Error::DegreeOutOfRange(format!(
            "catalecticant index {delta} exceeds degree {d}"
        )));
    }
    let n = f.num_vars();
    let matrix = catalecticant_matrix(f, delta);
    let rank = matrix.rank();
    let kernel = matrix
        .transpose()
        .nullspace()
        .into_iter()
        .map(|v| {
            DualForm(Form::from_coeffs(n, delta, v).expect("kernel vector has the right length"))
        })
        .collect();
    Ok(Catalecticant {
        delta,
        matrix,
        rank,
        kernel,
    })
}

/// Rank of `f_{δ, d−δ}` without computing the kernel.
pub fn catalecticant_rank<S: Scalar>(f: &Form<S>, delta: usize) -> Result<usize> {
    if delta > f.degree() {
        return Err(Error::DegreeOutOfRange(format!(
            "catalecticant index {delta} exceeds degree {}",
            f.degree()
        )));
    }
    Ok(catalecticant_matrix(f, delta).rank())
}

/// Basis of the degree-`e` part of the apolar ideal of `f`. For `e > d`
/// every dual form annihilates `f`, so the full monomial basis is returned.
pub fn apolar_component<S: Scalar>(f: &Form<S>, e: usize) -> Result<Vec<DualForm<S>>> {
    let n = f.num_vars();
    if e > f.degree() {
        return Ok(monomials(n, e)
            .iter()
            .map(|m| DualForm::monomial(m, S::one()))
            .collect());
    }
    Ok(catalecticant(f, e)?.kernel)
}

/// Smallest `e ≥ 1` for which the apolar ideal of `f` has a nonzero element
/// of degree `e`.
pub fn apolar_initial_degree<S: Scalar>(f: &Form<S>) -> Result<usize> {
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    let d = f.degree();
    for e in 1..=d {
        let cat = catalecticant_matrix(f, e);
        if cat.rank() < cat.rows() {
            return Ok(e);
        }
    }
    Ok(d + 1)
}

/// Number of essential variables: the rank of `f_{1, d−1}`.
pub fn essential_variables<S: Scalar>(f: &Form<S>) -> Result<usize> {
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    if f.degree() == 0 {
        return Ok(0);
    }
    catalecticant_rank(f, 1)
}

/// Ranks of all catalecticants, as `(δ, rank)` pairs for `δ = 0..=d`.
pub fn catalecticant_ranks<S: Scalar>(f: &Form<S>) -> Vec<(usize, usize)> {
    (0..=f.degree())
        .map(|delta| (delta, catalecticant_matrix(f, delta).rank()))
        .collect()
}

/// Largest catalecticant rank, a lower bound for rank and border rank.
pub fn rank_lower_bound<S: Scalar>(f: &Form<S>) -> Result<usize> {
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    let d = f.degree();
    // Ranks are symmetric under δ ↔ d−δ.
    Ok((0..=d / 2)
        .map(|delta| catalecticant_matrix(f, delta).rank())
        .max()
        .unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{contract, parse_form, random_form};
    use crate::scalar::Rational;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> Form<Rational> {
        parse_form(s, n).unwrap()
    }

    #[test]
    fn catalecticant_entries_match_contraction() {
        let f = random_form(3, 3, 4, 5);
        let cat = catalecticant(&f, 2).unwrap();
        for (i, m) in monomials(3, 2).iter().enumerate() {
            let g = contract(&DualForm::monomial(m, Rational::one()), &f).unwrap();
            assert_eq!(cat.matrix().row(i), g.coeffs());
        }
    }

    #[test]
    fn known_ranks() {
        let f = p("x0^4 + x1^4 + x2^4", 3);
        let cat = catalecticant(&f, 2).unwrap();
        assert_eq!((cat.matrix().rows(), cat.matrix().cols()), (6, 6));
        assert_eq!(cat.rank(), 3);
        assert_eq!(rank_lower_bound(&f).unwrap(), 3);
        assert_eq!(essential_variables(&f).unwrap(), 3);
        for d in 1..7 {
            let g = Form::monomial(&[d, 0, 0], Rational::one());
            for delta in 0..=d {
                assert_eq!(catalecticant(&g, delta).unwrap().rank(), 1);
            }
        }
        let z = Form::<Rational>::zero(3, 4);
        assert_eq!(catalecticant(&z, 2).unwrap().rank(), 0);
        assert!(catalecticant(&z, 5).is_err());
    }

    #[test]
    fn apolar_components() {
        let f = p("x0^3*x1", 2);
        let k = apolar_component(&f, 2).unwrap();
        assert_eq!(k.len(), 1);
        let only = &k[0].as_form().coeffs();
        assert!(only[0].is_zero() && only[1].is_zero() && !only[2].is_zero());
        let g = random_form(11, 2, 4, 9);
        assert!(apolar_component(&g, 1).unwrap().is_empty());
        assert_eq!(
            apolar_component(&Form::<Rational>::zero(2, 4), 1)
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn initial_degrees() {
        assert_eq!(apolar_initial_degree(&p("x0^5", 2)).unwrap(), 1);
        assert_eq!(apolar_initial_degree(&p("x0^3*x1", 2)).unwrap(), 2);
        assert_eq!(apolar_initial_degree(&p("x0^4 + x1^4", 2)).unwrap(), 2);
        assert_eq!(
            apolar_initial_degree(&Form::<Rational>::zero(2, 3)),
            Err(Error::ZeroForm)
        );
    }

    #[test]
    fn essential_variable_examples() {
        assert_eq!(essential_variables(&p("x0^4", 3)).unwrap(), 1);
        assert_eq!(
            essential_variables(&p("x0^3 + 3*x0^2*x1 + 3*x0*x1^2 + x1^3", 2)).unwrap(),
            1
        );
    }

    #[test]
    fn generic_quartic_has_full_middle_rank() {
        let f = random_form(5, 3, 4, 20);
        assert_eq!(rank_lower_bound(&f).unwrap(), 6);
    }

    fn unimodular(seed: u64) -> Vec<Form<Rational>> {
        // Product of elementary integer matrices.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = [[1i64, 0, 0], [0, 1, 0], [0, 0, 1]];
        for _ in 0..6 {
            let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
            if i == j {
                continue;
            }
            let c = rng.gen_range(-2..=2);
            for k in 0..3 {
                m[i][k] += c * m[j][k];
            }
        }
        m.iter()
            .map(|row| {
                Form::linear(
                    &row.iter()
                        .map(|&v| Rational::from_integer(v.into()))
                        .collect::<Vec<_>>(),
                )
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn catalecticant_symmetry(n in 1usize..4, d in 0usize..9, seed in any::<u64>()) {
            let f = random_form(seed, n, d, 3);
            for delta in 0..=d {
                prop_assert_eq!(
                    catalecticant(&f, delta).unwrap().rank(),
                    catalecticant(&f, d - delta).unwrap().rank()
                );
            }
        }

        #[test]
        fn kernel_vectors_annihilate(n in 1usize..4, d in 1usize..7, seed in any::<u64>()) {
            let f = random_form(seed, n, d, 2);
            for delta in 0..=d {
                let cat = catalecticant(&f, delta).unwrap();
                prop_assert_eq!(cat.rank() + cat.kernel().len(), monomials(n, delta).len());
                for t in cat.kernel() {
                    prop_assert!(contract(t, &f).unwrap().is_zero());
                }
            }
        }

        #[test]
        fn essential_variables_are_invariant(seed in any::<u64>(), d in 2usize..6, k in 1usize..4) {
            // A form in k variables, embedded in three and then mixed.
            let g = random_form(seed, k, d, 3);
            let mut images: Vec<Form<Rational>> = (0..k)
                .map(|i| {
                    let mut e = vec![Rational::from_integer(0.into()); 3];
                    e[i] = Rational::one();
                    Form::linear(&e)
                })
                .collect();
            let f = g.substitute(&images).unwrap();
            let ess = essential_variables(&f).unwrap();
            prop_assert!(ess <= k);
            images = unimodular(seed);
            let h = f.substitute(&images).unwrap();
            prop_assert_eq!(essential_variables(&h).unwrap(), ess);
        }
    }
}
