//! A quartic needing eight points off its tangent line, and the closed-form
//! open-rank bound in `n` variables.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::avoidance::AvoidanceSet;
use crate::error::{Error, Result};
use crate::form::{parse_form, Form};
use crate::monomial::factorial;
use crate::scalar::{Rational, Scalar};

/// `c₀x0⁴ + c₁x0³x1 + c₂x0²x1² + c₃(x0x1³ + x0³x2)`.
pub fn witness_quartic_with(c: [Rational; 4]) -> Form<Rational> {
    let basis = ["x0^4", "x0^3*x1", "x0^2*x1^2", "x0*x1^3 + x0^3*x2"];
    let mut f = Form::zero(3, 4);
    for (ci, text) in c.iter().zip(basis) {
        let g = parse_form(text, 3).expect("fixed text");
        f = f.add(&g.scale(ci)).expect("quartics");
    }
    f
}

/// The witness with all coefficients 1.
pub fn witness_quartic() -> Form<Rational> {
    witness_quartic_with(std::array::from_fn(|_| Rational::one()))
}

/// The tangent line `x2 = 0` of the curve germ behind the witness.
pub fn witness_avoidance() -> AvoidanceSet {
    AvoidanceSet::new(3, vec![parse_form("x2", 3).expect("fixed text")]).expect("proper set")
}

/// Derivatives `∂ᵏ/∂sᵏ (x0 + s·x1 + s³·x2)⁴` at `s = 0` for `k = 0..=3`.
pub fn jet_basis() -> Vec<Form<Rational>> {
    let one = Rational::one();
    let zero = Rational::zero();
    // Coefficients in s of x0 + s x1 + s^3 x2, each a linear form.
    let factor: Vec<Form<Rational>> = vec![
        Form::linear(&[one.clone(), zero.clone(), zero.clone()]),
        Form::linear(&[zero.clone(), one.clone(), zero.clone()]),
        Form::zero(3, 1),
        Form::linear(&[zero.clone(), zero.clone(), one.clone()]),
    ];
    let mut poly: Vec<Form<Rational>> = vec![Form::monomial(&[0, 0, 0], one.clone())];
    for _ in 0..4 {
        let deg = poly[0].degree() + 1;
        let mut next = vec![Form::zero(3, deg); poly.len() + factor.len() - 1];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                next[i + j] = next[i + j]
                    .add(&a.mul(b).expect("ternary"))
                    .expect("same degree");
            }
        }
        poly = next;
    }
    (0..4)
        .map(|k| poly[k].scale(&Rational::from_bigint(&factorial(k))))
        .collect()
}

fn binom(a: i64, b: i64) -> BigInt {
    if b < 0 || a < 0 || a < b {
        return BigInt::zero();
    }
    let (a, b) = (a as usize, b as usize);
    factorial(a) / (factorial(b) * factorial(a - b))
}

/// `C(n+d−2, d−1) − C(n+d−7, d−4) − C(n+d−6, d−3)`, with `C(a, b) = 0`
/// for `a < b` or negative `a`.
pub fn bound_b1(n: usize, d: usize) -> Result<BigInt> {
    if n < 3 || d < 4 {
        return Err(Error::DegreeOutOfRange(format!(
            "the bound needs n ≥ 3 and d ≥ 4, got n = {n}, d = {d}"
        )));
    }
    let (n, d) = (n as i64, d as i64);
    Ok(binom(n + d - 2, d - 1) - binom(n + d - 7, d - 4) - binom(n + d - 6, d - 3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apolarity::{catalecticant_rank, essential_variables};

    #[test]
    fn jet_basis_matches_the_support() {
        let expected = [
            "x0^4",
            "4*x0^3*x1",
            "12*x0^2*x1^2",
            "24*x0*x1^3 + 24*x0^3*x2",
        ];
        for (got, want) in jet_basis().iter().zip(expected) {
            assert_eq!(got, &parse_form(want, 3).unwrap());
        }
    }

    #[test]
    fn witness_invariants() {
        let f = witness_quartic();
        assert_eq!(essential_variables(&f).unwrap(), 3);
        assert!(catalecticant_rank(&f, 2).unwrap() >= 4);
        let x = witness_avoidance();
        assert_eq!(x.lines().len(), 1);
    }

    #[test]
    fn bound_values() {
        assert_eq!(bound_b1(3, 4).unwrap(), BigInt::from(8));
        assert_eq!(bound_b1(3, 5).unwrap(), BigInt::from(13));
        assert!(bound_b1(2, 4).is_err());
        for n in 3..12 {
            for d in 4..12 {
                assert!(bound_b1(n, d).unwrap() < binom((n + d - 2) as i64, (d - 1) as i64));
            }
        }
    }
}
