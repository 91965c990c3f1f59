//! Waring theory of binary forms: border rank, rank, open rank and
//! decompositions via apolar forms, optionally avoiding a closed set.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apolarity::{apolar_component, apolar_initial_degree};
use crate::avoidance::AvoidanceSet;
use crate::certify::{negligible_term, Decomposition, Provenance, Term};
use crate::error::{Error, Result};
use crate::form::{power_of_linear, random_form_with, DualForm, Form};
use crate::linalg::{least_squares, Matrix};
use crate::point::{min_pairwise_distance, LineChart, DISTINCT_TOL};
use crate::refine::polish_to;
use crate::roots::binary_roots;
use crate::scalar::{Complex, Rational, Scalar};

/// Resampling budget for generic apolar elements.
pub const RETRIES: usize = 64;
/// Relative residual accepted for a binary decomposition. Matches the
/// default certificate tolerance: clustered points with large cancelling
/// coefficients leave a floating-point floor of a few times 1e-9.
pub const BINARY_RESIDUAL_TOL: f64 = crate::certify::DEFAULT_TOL;

/// A binary form, possibly obtained by restricting to a line of the plane.
/// With a chart, binary coordinates `(s, t)` stand for the ambient point
/// `s·u + t·v` and the form for its image in the ambient ring.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryForm<S> {
    form: Form<S>,
    chart: Option<LineChart<S>>,
}

impl<S: Scalar> BinaryForm<S> {
    pub fn new(form: Form<S>) -> Result<Self> {
        check_binary(&form)?;
        Ok(BinaryForm { form, chart: None })
    }

    pub fn on_line(form: Form<S>, chart: LineChart<S>) -> Result<Self> {
        check_binary(&form)?;
        Ok(BinaryForm {
            form,
            chart: Some(chart),
        })
    }

    pub fn form(&self) -> &Form<S> {
        &self.form
    }

    pub fn chart(&self) -> Option<&LineChart<S>> {
        self.chart.as_ref()
    }

    /// The form in the ambient ring: `s ↦ u·x`, `t ↦ v·x`.
    pub fn ambient(&self) -> Result<Form<S>> {
        match &self.chart {
            None => Ok(self.form.clone()),
            Some(c) => self
                .form
                .substitute(&[Form::linear(&c.u), Form::linear(&c.v)]),
        }
    }

    /// Ambient point of binary coordinates `st`.
    pub fn embed_point(&self, st: &[S]) -> Vec<S> {
        match &self.chart {
            None => st.to_vec(),
            Some(c) => c.embed(st),
        }
    }
}

fn check_binary<S: Scalar>(f: &Form<S>) -> Result<()> {
    if f.num_vars() != 2 {
        return Err(Error::Precondition(format!(
            "binary form expected, got {} variables",
            f.num_vars()
        )));
    }
    Ok(())
}

fn check_nonzero_binary<S: Scalar>(f: &Form<S>) -> Result<()> {
    check_binary(f)?;
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    Ok(())
}

/// Border rank: the initial degree of the apolar ideal.
pub fn border_rank_binary<S: Scalar>(f: &Form<S>) -> Result<usize> {
    check_nonzero_binary(f)?;
    apolar_initial_degree(f)
}

/// Exact squarefreeness of a binary form over the rationals.
pub fn is_squarefree(g: &Form<Rational>) -> bool {
    if g.is_zero() {
        return false;
    }
    let c = g.coeffs();
    // Multiplicity of the root (1, 0) is the number of leading zeros.
    let at_infinity = c.iter().take_while(|x| x.is_zero()).count();
    if at_infinity >= 2 {
        return false;
    }
    // g(z, 1) in ascending powers of z.
    let p: Vec<Rational> = c[at_infinity..].iter().rev().cloned().collect();
    let dp: Vec<Rational> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a * Rational::from_integer(k.into()))
        .collect();
    poly_gcd_degree(p, dp) == 0
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Degree of `gcd(a, b)` over the rationals (Euclid on monic remainders).
fn poly_gcd_degree(a: Vec<Rational>, b: Vec<Rational>) -> usize {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let lead = b.last().expect("nonempty").clone();
        let b_monic: Vec<Rational> = b.iter().map(|c| c / &lead).collect();
        while a.len() >= b_monic.len() {
            let shift = a.len() - b_monic.len();
            let factor = a.last().expect("nonempty").clone();
            for (k, c) in b_monic.iter().enumerate() {
                a[shift + k] -= &factor * c;
            }
            a = trim(a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
        b = trim(b);
    }
    a.len().saturating_sub(1)
}

fn float_distinct_roots(g: &Form<Complex>) -> bool {
    match binary_roots(g) {
        Ok(r) => {
            let pts: Vec<Vec<Complex>> = r.iter().map(|p| p.to_vec()).collect();
            min_pairwise_distance(&pts) > DISTINCT_TOL
        }
        Err(_) => false,
    }
}

/// Whether a binary form is squarefree: exactly on the exact backend, by
/// root separation on the float backend.
fn generator_squarefree<S: Scalar>(g: &Form<S>) -> bool {
    match g.to_rational() {
        Some(q) => is_squarefree(&q),
        None => float_distinct_roots(&g.to_complex()),
    }
}

/// Border rank and rank of a nonzero binary form.
pub fn ranks_binary<S: Scalar>(f: &Form<S>) -> Result<(usize, usize)> {
    let b = border_rank_binary(f)?;
    let d = f.degree();
    if 2 * b >= d + 2 {
        return Ok((b, b));
    }
    let kernel = apolar_component(f, b)?;
    let g = &kernel[0];
    let r = if generator_squarefree(g.as_form()) {
        b
    } else {
        d + 2 - b
    };
    Ok((b, r))
}

/// Waring rank: `b` if the degree-`b` apolar generator is squarefree, `d + 2 − b` otherwise.
pub fn rank_binary<S: Scalar>(f: &Form<S>) -> Result<usize> {
    Ok(ranks_binary(f)?.1)
}

/// Open rank `d + 2 − b`.
pub fn open_rank_binary<S: Scalar>(f: &Form<S>) -> Result<usize> {
    let b = border_rank_binary(f)?;
    Ok(f.degree() + 2 - b)
}

/// Coefficients `λ` with `Σ λᵢ pᵢ^d = f`, if the fit is within `tol` and
/// no coefficient vanishes.
fn unit(p: &[Complex]) -> Vec<Complex> {
    let n = p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    p.iter().map(|c| c / n).collect()
}

/// Least-squares coefficients of `f` on the `d`-th powers of `points`,
/// with the relative residual.
pub(crate) fn least_squares_fit<S: Scalar>(
    f: &Form<S>,
    points: &[Vec<Complex>],
) -> Option<(Vec<Complex>, f64)> {
    let cols: Vec<Vec<Complex>> = points
        .iter()
        .map(|p| {
            power_of_linear(p, &Complex::one(), f.degree())
                .ok()
                .map(|g| g.coeffs().to_vec())
        })
        .collect::<Option<_>>()?;
    let rhs: Vec<Complex> = f.coeffs().iter().map(|c| c.to_complex()).collect();
    least_squares(&Matrix::from_columns(rhs.len(), &cols), &rhs)
}

fn fit_coefficients<S: Scalar>(
    f: &Form<S>,
    points: &[Vec<Complex>],
    tol: f64,
) -> Option<Vec<Complex>> {
    let (lambda, res) = least_squares_fit(f, points)?;
    let scale = f.norm_inf();
    let zero = points.iter().zip(&lambda).any(|(p, &coeff)| {
        negligible_term(
            &Term {
                coeff,
                point: p.clone(),
            },
            f.degree(),
            scale,
        )
    });
    (res <= tol && !zero).then_some(lambda)
}

/// Terms on `points` fitting `f` within `tol`; a fit that is close is
/// refined by moving the points as well.
fn fit_or_polish<S: Scalar>(
    f: &Form<S>,
    points: &[Vec<Complex>],
    tol: f64,
    avoid: Avoid<'_>,
) -> Option<Vec<Term>> {
    let (lambda, res) = least_squares_fit(f, points)?;
    let terms: Vec<Term> = points
        .iter()
        .cloned()
        .zip(lambda)
        .map(|(point, coeff)| Term { coeff, point })
        .collect();
    let scale = f.norm_inf();
    if res <= tol && terms.iter().all(|t| !negligible_term(t, f.degree(), scale)) {
        return Some(terms);
    }
    polish_to(f, &terms, res, tol, |p| !avoid(p))
}

/// Exact coefficients for rational points, when `f` is exact.
fn fit_exact(f: &Form<Rational>, points: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let d = f.degree();
    let cols: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| {
            power_of_linear(p, &Rational::one(), d)
                .map(|g| g.coeffs().to_vec())
                .ok()
        })
        .collect::<Option<_>>()?;
    let m = Matrix::from_columns(d + 1, &cols);
    let lambda = m.solve(f.coeffs())?;
    if lambda.iter().any(|c| c.is_zero()) {
        return None;
    }
    Some(lambda)
}

/// Forbidden-point predicate on binary coordinates.
pub type Avoid<'a> = &'a dyn Fn(&[Complex]) -> bool;

fn nothing(_: &[Complex]) -> bool {
    false
}

fn random_point_off<R: Rng + ?Sized>(rng: &mut R, h: i64) -> Vec<Rational> {
    loop {
        let p = vec![Rational::random(rng, h), Rational::random(rng, h)];
        if p.iter().any(|c| !c.is_zero()) {
            return p;
        }
    }
}

/// Decomposition of size `d + 1` through random rational points off the
/// forbidden set. Works for every nonzero binary form because any `d + 1`
/// distinct points on the rational normal curve span the whole space.
fn through_random_points<S: Scalar, R: Rng + ?Sized>(
    f: &Form<S>,
    avoid: Avoid<'_>,
    rng: &mut R,
    tol: f64,
) -> Result<Vec<Term>> {
    let d = f.degree();
    let mut h = 4;
    for attempt in 0..RETRIES {
        if attempt > 0 && attempt % 8 == 0 {
            h *= 2;
        }
        let pts: Vec<Vec<Rational>> = (0..=d).map(|_| random_point_off(rng, h)).collect();
        let pc: Vec<Vec<Complex>> = pts
            .iter()
            .map(|p| p.iter().map(|c| c.to_complex()).collect())
            .collect();
        if min_pairwise_distance(&pc) <= DISTINCT_TOL || pc.iter().any(|p| avoid(p)) {
            continue;
        }
        if let Some(q) = f.to_rational() {
            if let Some(l) = fit_exact(&q, &pts) {
                return Ok(pc
                    .into_iter()
                    .zip(l)
                    .map(|(point, c)| Term {
                        coeff: c.to_complex(),
                        point,
                    })
                    .collect());
            }
        } else if let Some(l) = fit_coefficients(f, &pc, tol) {
            return Ok(pc
                .into_iter()
                .zip(l)
                .map(|(point, coeff)| Term { coeff, point })
                .collect());
        }
    }
    Err(Error::retry(
        "binary decomposition through random points",
        format!("no admissible {} points within {RETRIES} attempts", d + 1),
    ))
}

fn random_combination<S: Scalar, R: Rng + ?Sized>(
    basis: &[DualForm<S>],
    rng: &mut R,
    h: i64,
) -> Form<S> {
    let mut g = Form::zero(basis[0].num_vars(), basis[0].degree());
    for t in basis {
        let c = S::random(rng, h);
        g = g.add(&t.as_form().scale(&c)).expect("same space");
    }
    g
}

/// Decomposition of `f` with exactly `size` summands whose points are the
/// roots of a generic element of the degree-`size` apolar component.
/// Requires `size ≤ d + 1` and that the component has no base points.
pub(crate) fn sylvester<S: Scalar, R: Rng + ?Sized>(
    f: &Form<S>,
    size: usize,
    avoid: Avoid<'_>,
    rng: &mut R,
    tol: f64,
) -> Result<Vec<Term>> {
    let d = f.degree();
    if size > d {
        return through_random_points(f, avoid, rng, tol);
    }
    let basis = apolar_component(f, size)?;
    if basis.is_empty() {
        return Err(Error::Precondition(format!(
            "no apolar forms of degree {size}"
        )));
    }
    let mut h = 4;
    let mut last = String::from("no attempt");
    for attempt in 0..RETRIES {
        if attempt > 0 && attempt % 8 == 0 {
            h *= 2;
        }
        let g = random_combination(&basis, rng, h);
        if g.is_zero() {
            continue;
        }
        let roots = match binary_roots(&g) {
            Ok(r) => r,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let pts: Vec<Vec<Complex>> = roots.iter().map(|r| unit(r)).collect();
        if pts.len() != size || min_pairwise_distance(&pts) <= DISTINCT_TOL {
            last = "apolar form has a repeated root".into();
            continue;
        }
        if pts.iter().any(|p| avoid(p)) {
            last = "a root lies in the avoidance set".into();
            continue;
        }
        match fit_or_polish(f, &pts, tol, avoid) {
            Some(terms) => return Ok(terms),
            None => last = "coefficient fit failed".into(),
        }
    }
    Err(Error::retry(
        "binary apolar sampling",
        format!("size {size}, degree {d}: {last}"),
    ))
}

/// A decomposition of minimal size (the Waring rank), avoiding the forbidden
/// set when possible, falling back to the open-rank size `d + 2 − b`.
pub(crate) fn decompose_minimal<S: Scalar, R: Rng + ?Sized>(
    f: &Form<S>,
    avoid: Avoid<'_>,
    rng: &mut R,
    tol: f64,
) -> Result<Vec<Term>> {
    let (b, r) = ranks_binary(f)?;
    let d = f.degree();
    if r < d + 2 - b {
        if let Ok(t) = sylvester(f, r, avoid, rng, tol) {
            return Ok(t);
        }
    }
    sylvester(f, d + 2 - b, avoid, rng, tol)
}

fn finish(f_degree: usize, terms: Vec<Term>, prov: Provenance) -> Result<Decomposition> {
    Decomposition::new(2, f_degree, terms, prov)
}

/// Waring decomposition of a binary form: `b` points from the apolar
/// generator when it is squarefree, otherwise `d + 2 − b` points from a
/// generic apolar form of that degree.
pub fn decompose_binary<S: Scalar>(f: &Form<S>, seed: u64) -> Result<Decomposition> {
    check_nonzero_binary(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (b, r) = ranks_binary(f)?;
    let d = f.degree();
    let tol = BINARY_RESIDUAL_TOL;
    let (terms, route) = if r == b {
        match sylvester(f, b, &nothing, &mut rng, tol) {
            Ok(t) => (t, "apolar generator"),
            Err(_) => (
                sylvester(f, d + 2 - b, &nothing, &mut rng, tol)?,
                "generic apolar form",
            ),
        }
    } else {
        (
            sylvester(f, d + 2 - b, &nothing, &mut rng, tol)?,
            "generic apolar form",
        )
    };
    let prov = Provenance::new("decompose_binary", seed)
        .route(route)
        .note(format!("border rank {b}, rank {r}"));
    finish(d, terms, prov)
}

/// Decomposition of size exactly `d + 2 − b` with pairwise distinct points
/// outside `x`.
pub fn decompose_binary_avoiding<S: Scalar>(
    f: &Form<S>,
    x: &AvoidanceSet,
    seed: u64,
) -> Result<Decomposition> {
    check_nonzero_binary(f)?;
    if x.num_vars() != 2 {
        return Err(Error::Dimension(
            "avoidance set must live on the projective line".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = border_rank_binary(f)?;
    let d = f.degree();
    let avoid = |p: &[Complex]| x.contains(p);
    let terms = sylvester(f, d + 2 - b, &avoid, &mut rng, BINARY_RESIDUAL_TOL)?;
    let route = if b == 1 {
        "random points"
    } else {
        "generic apolar form"
    };
    let prov = Provenance::new("decompose_binary_avoiding", seed)
        .route(route)
        .note(format!("border rank {b}, open rank {}", d + 2 - b));
    finish(d, terms, prov)
}

/// Decomposition avoiding a predicate, of size `d + 2 − b`; used for binary
/// pieces living on lines of the plane.
pub(crate) fn decompose_open<S: Scalar, R: Rng + ?Sized>(
    f: &Form<S>,
    avoid: Avoid<'_>,
    rng: &mut R,
    tol: f64,
) -> Result<Vec<Term>> {
    let b = border_rank_binary(f)?;
    sylvester(f, f.degree() + 2 - b, avoid, rng, tol)
}

/// Samples random `k`-dimensional projective subspaces of binary forms of
/// degree `d`, takes one random point in each and returns the largest rank
/// seen. The spanning forms are a mix of random forms, `d`-th powers and
/// tangential forms `l^{d−1} m`, so that special subspaces are exercised.
pub fn generic_rank_in_subspace(d: usize, k: usize, trials: usize, seed: u64) -> Result<usize> {
    if k >= d {
        return Err(Error::Precondition(format!(
            "need k < d, got k = {k}, d = {d}"
        )));
    }
    if trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..trials {
        let span: Vec<Form<Rational>> = (0..=k)
            .map(|_| match rng.gen_range(0..3) {
                0 => random_form_with(&mut rng, 2, d, 10),
                1 => {
                    let l = random_point_off(&mut rng, 10);
                    power_of_linear(&l, &Rational::one(), d).expect("nonzero point")
                }
                _ => {
                    let l = Form::linear(&random_point_off(&mut rng, 10));
                    let m = Form::linear(&random_point_off(&mut rng, 10));
                    l.pow(d - 1).mul(&m).expect("binary")
                }
            })
            .collect();
        let p = loop {
            let mut p = Form::zero(2, d);
            for s in &span {
                let c = Rational::random(&mut rng, 1000);
                p = p.add(&s.scale(&c))?;
            }
            if !p.is_zero() {
                break p;
            }
        };
        best = best.max(rank_binary(&p)?);
    }
    Ok(best)
}

/// The bound `floor(max{d + 1 − k, (d + 2)/2})` for general points of a
/// `k`-dimensional subspace.
pub fn subspace_rank_bound(d: usize, k: usize) -> usize {
    (d + 1 - k.min(d + 1)).max((d + 2) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::verify_decomposition;
    use crate::form::{parse_form, random_form};

    fn p(s: &str) -> Form<Rational> {
        parse_form(s, 2).unwrap()
    }

    #[test]
    fn border_ranks_and_ranks() {
        assert_eq!(border_rank_binary(&p("x0^3*x1")).unwrap(), 2);
        assert_eq!(border_rank_binary(&p("x0^4 + x1^4")).unwrap(), 2);
        assert_eq!(border_rank_binary(&p("x0^7")).unwrap(), 1);
        assert_eq!(rank_binary(&p("x0^3*x1")).unwrap(), 4);
        assert_eq!(rank_binary(&p("x0^4 + x1^4")).unwrap(), 2);
        let f = p("x0^4 + x1^4")
            .add(
                &power_of_linear(&[Rational::one(), Rational::one()], &Rational::one(), 4).unwrap(),
            )
            .unwrap();
        assert_eq!(rank_binary(&f).unwrap(), 3);
        assert_eq!(open_rank_binary(&p("x0^4")).unwrap(), 5);
        assert_eq!(open_rank_binary(&p("x0^3*x1")).unwrap(), 4);
        assert_eq!(open_rank_binary(&f).unwrap(), 3);
        assert_eq!(
            rank_binary(&Form::<Rational>::zero(2, 3)),
            Err(Error::ZeroForm)
        );
        assert!(matches!(
            rank_binary(&parse_form("x2^3", 3).unwrap()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn squarefree_test() {
        assert!(is_squarefree(&p("x0*x1")));
        assert!(!is_squarefree(&p("x1^2")));
        assert!(!is_squarefree(&p("x0^2")));
        assert!(is_squarefree(&p("x0^3 - x0*x1^2")));
        assert!(!is_squarefree(&p("x0^3 - 2*x0^2*x1 + x0*x1^2")));
    }

    #[test]
    fn decompositions_verify() {
        let f = p("x0^4 + x1^4");
        let dec = decompose_binary(&f, 0).unwrap();
        assert_eq!(dec.len(), 2);
        assert!(verify_decomposition(&f, &dec, 1e-9).unwrap().valid);
        let g = p("x0^3*x1");
        let dec = decompose_binary(&g, 1).unwrap();
        assert_eq!(dec.len(), 4);
        assert!(verify_decomposition(&g, &dec, 1e-9).unwrap().valid);
        let h = p("x0^5");
        let dec = decompose_binary(&h, 2).unwrap();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec.terms[0].point, vec![Complex::one(), Complex::zero()]);
        assert!((dec.terms[0].coeff - Complex::one()).norm() < 1e-12);
    }

    #[test]
    fn avoiding_the_coordinate_points() {
        let f = p("x0^4 + x1^4");
        let x = AvoidanceSet::parse("x0*x1", 2).unwrap();
        let dec = decompose_binary_avoiding(&f, &x, 3).unwrap();
        assert_eq!(dec.len(), 4);
        for pt in dec.points() {
            assert!(!x.contains(&pt));
        }
        assert!(verify_decomposition(&f, &dec, 1e-9).unwrap().valid);
    }

    #[test]
    fn pure_powers_need_d_plus_one_points() {
        let f = p("x0^6");
        let x = AvoidanceSet::parse("x0 - 2*x1", 2).unwrap();
        let dec = decompose_binary_avoiding(&f, &x, 5).unwrap();
        assert_eq!(dec.len(), 7);
        assert!(verify_decomposition(&f, &dec, 1e-9).unwrap().valid);
    }

    #[test]
    fn float_forms_decompose_too() {
        let f = random_form(8, 2, 6, 5).to_complex();
        let dec = decompose_binary(&f, 0).unwrap();
        assert!(dec.residual(&f).unwrap() < 1e-9);
        assert_eq!(dec.len(), rank_binary(&f).unwrap());
    }

    #[test]
    fn embedding_pushes_powers_forward() {
        let q = |v: i64| Rational::from_integer(v.into());
        let chart = LineChart::new(&[q(1), q(2), q(-1)]).unwrap();
        let st = [q(3), q(-2)];
        let g = power_of_linear(&st, &q(5), 4).unwrap();
        let bf = BinaryForm::on_line(g, chart.clone()).unwrap();
        let x = bf.embed_point(&st);
        assert!(crate::point::dot(&chart.line, &x).is_zero());
        assert_eq!(
            bf.ambient().unwrap(),
            power_of_linear(&x, &q(5), 4).unwrap()
        );
    }

    #[test]
    fn crn_bound_values() {
        assert_eq!(subspace_rank_bound(8, 3), 6);
        assert_eq!(subspace_rank_bound(5, 0), 6);
        assert_eq!(subspace_rank_bound(7, 6), 4);
        assert!(generic_rank_in_subspace(8, 3, 10, 1).unwrap() <= 6);
    }
}
