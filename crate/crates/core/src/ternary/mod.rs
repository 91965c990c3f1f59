//! Ternary forms: annihilating line products, splitting a form into binary
//! pieces on lines, the odd-degree decomposition, the plane-quartic
//! open-rank pipeline and the conic route for border rank three.

mod affine;
mod brk3;
mod lines;
mod odd;
mod quartic;
mod split;
mod witness;

pub(crate) use affine::free_decomposition;
pub use brk3::{conic_pullback, quartic_brk3_decompose, ConicPullback};
pub use lines::{
    annihilating_lines, minimize_annihilating, reducible_kernel_pair, KernelPair, LineSystem,
};
pub use odd::{
    decompose_quadric, decompose_ternary, decompose_ternary_odd, essential_reduction,
    odd_degree_bound, EssentialReduction,
};
pub use quartic::{
    quartic_decompose_open, quartic_predecomp, quartic_size_bound, CARRIER_FORBIDDEN_SIZE,
    QUARTIC_OPEN_BOUND,
};
pub use split::{split_on_lines, SplitProblem};
pub use witness::{bound_b1, jet_basis, witness_avoidance, witness_quartic, witness_quartic_with};

use num_traits::{One, Zero};
use rand::Rng;

use crate::certify::Term;
use crate::error::{Error, Result};
use crate::form::{contract, DualForm, Form};
use crate::linalg::{smallest_singular, Matrix};
use crate::monomial::factorial_f64;
use crate::point::{distance, normalize_complex, LineChart, DISTINCT_TOL};
use crate::scalar::{Complex, Rational, Scalar};

/// Relative residual under which a contraction counts as zero.
pub const ANNIHILATION_TOL: f64 = 1e-8;

pub(crate) fn check_ternary<S: Scalar>(f: &Form<S>) -> Result<()> {
    if f.num_vars() != 3 {
        return Err(Error::Dimension(format!(
            "ternary form expected, got {} variables",
            f.num_vars()
        )));
    }
    Ok(())
}

pub(crate) fn to_c(v: &[Rational]) -> Vec<Complex> {
    v.iter().map(|c| c.to_complex()).collect()
}

pub(crate) fn product_of_lines(lines: &[Vec<Complex>]) -> DualForm<Complex> {
    let factors: Vec<DualForm<Complex>> = lines.iter().map(|l| DualForm::linear(l)).collect();
    DualForm::product(3, &factors).expect("ternary lines")
}

/// `‖t ⌟ f‖∞` relative to the size it could have for unit-size inputs.
pub(crate) fn contraction_residual(t: &DualForm<Complex>, f: &Form<Complex>) -> f64 {
    let d = f.degree();
    let delta = t.degree();
    if delta > d {
        return 0.0;
    }
    let g = contract(t, f).expect("compatible shapes");
    let t1: f64 = t.as_form().coeffs().iter().map(|c| c.norm()).sum();
    let scale = f.norm_inf() * t1 * factorial_f64(d) / factorial_f64(d - delta);
    if scale == 0.0 {
        return 0.0;
    }
    g.norm_inf() / scale
}

pub(crate) fn annihilates(lines: &[Vec<Complex>], f: &Form<Complex>) -> bool {
    contraction_residual(&product_of_lines(lines), f) <= ANNIHILATION_TOL
}

/// Symmetric matrix `M` of a ternary quadratic form, `q(y) = yᵀ M y`.
pub(crate) fn quadric_matrix<S: Scalar>(q: &Form<S>) -> Matrix<S> {
    let two = S::from_i64(2);
    Matrix::from_fn(3, 3, |i, j| {
        let mut e = [0usize; 3];
        e[i] += 1;
        e[j] += 1;
        let c = q.coeff(&e).clone();
        if i == j {
            c
        } else {
            c / two.clone()
        }
    })
}

/// Whether a ternary quadratic form is not the square of a linear form:
/// exact matrix rank when rational, a singular-value gap otherwise.
pub(crate) fn is_not_square(q: &Form<Complex>) -> bool {
    if let Some(r) = q.to_rational_lossy() {
        return quadric_matrix(&r).rank() >= 2;
    }
    let (sv, _) = smallest_singular(&quadric_matrix(q));
    sv[0] > 0.0 && sv[1] > 1e-6 * sv[0]
}

pub(crate) fn random_rational_line<R: Rng + ?Sized>(rng: &mut R, h: i64) -> Vec<Rational> {
    loop {
        let l: Vec<Rational> = (0..3).map(|_| Rational::random(rng, h)).collect();
        if l.iter().any(|c| !c.is_zero()) {
            return l;
        }
    }
}

pub(crate) fn off_sigma(l: &[Complex], sigma: &[Vec<Complex>]) -> bool {
    sigma.iter().all(|s| distance(s, l) > DISTINCT_TOL)
}

pub(crate) fn normalized(l: &[Complex]) -> Option<Vec<Complex>> {
    normalize_complex(l).map(|(v, _)| v)
}

/// Binary terms on a line chart, pushed into the plane.
pub(crate) fn push_forward(terms: Vec<Term>, chart: &LineChart<Complex>) -> Vec<Term> {
    terms
        .into_iter()
        .map(|t| Term {
            coeff: t.coeff,
            point: chart.embed(&t.point),
        })
        .collect()
}

/// The piece of a form living on the line `l = 0`: the binary form `g` with
/// `g(u·x, v·x) = f` when `l ⌟ f = 0`. `None` if `f` is not supported there.
pub(crate) fn restrict_to_line(
    f: &Form<Complex>,
    chart: &LineChart<Complex>,
) -> Option<Form<Complex>> {
    let d = f.degree();
    let cols: Vec<Vec<Complex>> = (0..=d)
        .map(|j| {
            let mut e = [0usize; 2];
            e[0] = d - j;
            e[1] = j;
            Form::monomial(&e, Complex::one())
                .substitute(&[Form::linear(&chart.u), Form::linear(&chart.v)])
                .expect("binary substitution")
                .coeffs()
                .to_vec()
        })
        .collect();
    let m = Matrix::from_columns(f.coeffs().len(), &cols);
    let g = m.solve(f.coeffs())?;
    Form::from_coeffs(2, d, g).ok()
}

impl Form<Complex> {
    /// Exact rational copy when every coefficient is a real number that
    /// round-trips through a small-denominator rational.
    pub(crate) fn to_rational_lossy(&self) -> Option<Form<Rational>> {
        let coeffs = self
            .coeffs()
            .iter()
            .map(|z| {
                if z.im != 0.0 {
                    return None;
                }
                let r = crate::scalar::rationalize(z.re, 1 << 20)?;
                (r.to_complex().re == z.re).then_some(r)
            })
            .collect::<Option<Vec<_>>>()?;
        Form::from_coeffs(self.num_vars(), self.degree(), coeffs).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::parse_form;

    #[test]
    fn quadric_matrix_and_squares() {
        let q = parse_form("x0^2 + 2*x0*x1 + x1^2", 3).unwrap();
        let m = quadric_matrix(&q);
        assert_eq!(m.rank(), 1);
        assert!(!is_not_square(&q.to_complex()));
        let r = parse_form("x0*x1", 3).unwrap().to_complex();
        assert!(is_not_square(&r));
        let s = r.map(|c| c * Complex::new(0.3, 0.1));
        assert!(is_not_square(&s));
    }

    #[test]
    fn restriction_recovers_binary_piece() {
        let chart = LineChart::new(&[
            Complex::new(1.0, 0.0),
            Complex::new(2.0, 0.0),
            Complex::new(-1.0, 0.0),
        ])
        .unwrap();
        let g = parse_form("x0^3 - 2*x0*x1^2 + 5*x1^3", 2)
            .unwrap()
            .to_complex();
        let f = g
            .substitute(&[Form::linear(&chart.u), Form::linear(&chart.v)])
            .unwrap();
        let back = restrict_to_line(&f, &chart).unwrap();
        assert!(back.sub(&g).unwrap().norm_inf() < 1e-12);
        let off = parse_form("x0^3", 3).unwrap().to_complex();
        assert!(restrict_to_line(&off, &chart).is_none());
    }
}
