//! Products of lines annihilating a ternary form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    annihilates, check_ternary, contraction_residual, normalized, off_sigma, product_of_lines,
    random_rational_line, to_c, ANNIHILATION_TOL,
};
use crate::apolarity::catalecticant;
use crate::error::{Error, Result};
use crate::form::{contract, DualForm, Form};
use crate::linalg::{determinant, smallest_singular, Matrix};
use crate::point::{cross, distance, rationalize_point, DISTINCT_TOL};
use crate::roots::poly_roots;
use crate::scalar::{Complex, Rational, Scalar};

const PENCILS: usize = 256;
const LINE_RETRIES: usize = 256;

/// Ordered, pairwise distinct lines of the plane given by dual coordinates,
/// normalized so that the largest coordinate is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSystem {
    lines: Vec<Vec<Complex>>,
}

impl LineSystem {
    pub fn new(lines: Vec<Vec<Complex>>) -> Result<Self> {
        let mut out: Vec<Vec<Complex>> = Vec::with_capacity(lines.len());
        for l in lines {
            if l.len() != 3 {
                return Err(Error::Dimension("lines need three dual coordinates".into()));
            }
            let l = normalized(&l).ok_or_else(|| Error::InvalidPoint("zero line".into()))?;
            if !off_sigma(&l, &out) {
                return Err(Error::InvalidPoint(
                    "lines must be pairwise distinct".into(),
                ));
            }
            out.push(l);
        }
        Ok(LineSystem { lines: out })
    }

    pub fn from_rational(lines: &[Vec<Rational>]) -> Result<Self> {
        LineSystem::new(lines.iter().map(|l| to_c(l)).collect())
    }

    pub fn lines(&self) -> &[Vec<Complex>] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// The product `l⁰ ⋯ lᵏ`.
    pub fn product(&self) -> DualForm<Complex> {
        product_of_lines(&self.lines)
    }

    /// Rational coordinates of every line, when all of them are rational.
    pub fn exact(&self) -> Option<Vec<Vec<Rational>>> {
        self.lines
            .iter()
            .map(|l| rationalize_point(l, 1 << 20, 1e-11))
            .collect()
    }

    /// The point where lines `i` and `j` meet.
    pub fn intersection(&self, i: usize, j: usize) -> Vec<Complex> {
        let p = cross(&self.lines[i], &self.lines[j]);
        normalized(&p).expect("distinct lines meet in a point")
    }

    /// Whether the product of the lines annihilates `f`: exactly when both
    /// are rational, within [`ANNIHILATION_TOL`] otherwise.
    pub fn annihilates<S: Scalar>(&self, f: &Form<S>) -> bool {
        annihilates_subset(&self.lines, f)
    }
}

fn annihilates_subset<S: Scalar>(lines: &[Vec<Complex>], f: &Form<S>) -> bool {
    if lines.len() > f.degree() {
        return true;
    }
    if let Some(q) = f.to_rational() {
        let exact: Option<Vec<Vec<Rational>>> = lines
            .iter()
            .map(|l| rationalize_point(l, 1 << 20, 1e-11))
            .collect();
        if let Some(ls) = exact {
            let factors: Vec<DualForm<Rational>> = ls.iter().map(|l| DualForm::linear(l)).collect();
            let t = DualForm::product(3, &factors).expect("ternary lines");
            return contract(&t, &q).expect("compatible").is_zero();
        }
    }
    annihilates(lines, &f.to_complex())
}

/// Result of the search for a reducible annihilating conic.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelPair {
    /// Distinct lines outside the forbidden list; `exact` holds rational
    /// coordinates when the pair was verified in exact arithmetic.
    Found {
        l1: Vec<Complex>,
        l2: Vec<Complex>,
        exact: Option<(Vec<Rational>, Vec<Rational>)>,
    },
    /// Two forbidden lines (possibly equal) whose product already annihilates.
    InSigma { l1: Vec<Complex>, l2: Vec<Complex> },
}

/// Splits a rank-two symmetric 3×3 matrix into its two lines.
pub(crate) fn factor_singular_conic<R: Rng + ?Sized>(
    q: &Matrix<Complex>,
    rng: &mut R,
) -> Option<(Vec<Complex>, Vec<Complex>)> {
    let (sv, p) = smallest_singular(q);
    if sv[0] == 0.0 || sv[2] > 1e-7 * sv[0] || sv[1] <= 1e-6 * sv[0] {
        return None;
    }
    let bil = |a: &[Complex], b: &[Complex]| -> Complex {
        let qb = q.mul_vec(b);
        a.iter().zip(&qb).map(|(x, y)| x * y).sum()
    };
    let mut draw = || -> Vec<Complex> {
        (0..3)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect()
    };
    let (r1, r2) = (draw(), draw());
    let a = bil(&r2, &r2);
    let b = bil(&r1, &r2);
    let c = bil(&r1, &r1);
    if a.norm() <= 1e-12 * sv[0] {
        return None;
    }
    let disc = (b * b - a * c).sqrt();
    let line_through = |s: Complex| -> Option<Vec<Complex>> {
        let y: Vec<Complex> = r1.iter().zip(&r2).map(|(x, z)| x + s * z).collect();
        normalized(&cross(&p, &y))
    };
    let l1 = line_through((-b + disc) / a)?;
    let l2 = line_through((-b - disc) / a)?;
    (distance(&l1, &l2) > DISTINCT_TOL).then_some((l1, l2))
}

/// Singular members of the pencil `A + tB` (and `B` itself when singular).
pub(crate) fn singular_members(a: &Matrix<Complex>, b: &Matrix<Complex>) -> Vec<Matrix<Complex>> {
    let at =
        |t: f64| -> Matrix<Complex> { Matrix::from_fn(3, 3, |i, j| a.get(i, j) + b.get(i, j) * t) };
    let c0 = determinant(a);
    let c3 = determinant(b);
    let p1 = determinant(&at(1.0));
    let m1 = determinant(&at(-1.0));
    let c2 = (p1 + m1) / 2.0 - c0;
    let c1 = (p1 - m1) / 2.0 - c3;
    let mut coeffs = vec![c0, c1, c2, c3];
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = Vec::new();
    if max == 0.0 {
        return out;
    }
    if c3.norm() <= 1e-12 * max {
        out.push(b.clone());
    }
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= 1e-12 * max) {
        coeffs.pop();
    }
    if let Ok(roots) = poly_roots(&coeffs) {
        for t in roots {
            out.push(Matrix::from_fn(3, 3, |i, j| a.get(i, j) + b.get(i, j) * t));
        }
    }
    out
}

/// Searches the span of `basis` (symmetric matrices of dual conics) for a
/// product of two distinct lines outside `sigma` that passes `accept`.
pub(crate) fn reducible_in_span<R: Rng + ?Sized>(
    basis: &[Matrix<Complex>],
    sigma: &[Vec<Complex>],
    rng: &mut R,
    mut accept: impl FnMut(&[Complex], &[Complex]) -> bool,
) -> Option<(Vec<Complex>, Vec<Complex>)> {
    if basis.is_empty() {
        return None;
    }
    let combo = |rng: &mut R| -> Matrix<Complex> {
        let w: Vec<f64> = basis.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        Matrix::from_fn(3, 3, |i, j| {
            basis.iter().zip(&w).map(|(m, c)| m.get(i, j) * c).sum()
        })
    };
    for attempt in 0..PENCILS {
        let candidates = if basis.len() == 1 {
            if attempt > 0 {
                break;
            }
            vec![basis[0].clone()]
        } else {
            let a = combo(rng);
            let b = combo(rng);
            singular_members(&a, &b)
        };
        for q in candidates {
            let Some((l1, l2)) = factor_singular_conic(&q, rng) else {
                continue;
            };
            if off_sigma(&l1, sigma) && off_sigma(&l2, sigma) && accept(&l1, &l2) {
                return Some((l1, l2));
            }
        }
    }
    None
}

pub(crate) fn dual_conic_matrices<S: Scalar>(basis: &[DualForm<S>]) -> Vec<Matrix<Complex>> {
    basis
        .iter()
        .map(|t| super::quadric_matrix(&t.as_form().to_complex()))
        .collect()
}

pub(crate) fn distinti<S: Scalar, R: Rng + ?Sized>(
    g: &Form<S>,
    sigma: &[Vec<Complex>],
    rng: &mut R,
) -> Result<KernelPair> {
    check_ternary(g)?;
    if g.degree() != 3 {
        return Err(Error::DegreeOutOfRange(
            "a ternary cubic is required".into(),
        ));
    }
    let gc = g.to_complex();
    for (i, a) in sigma.iter().enumerate() {
        for b in &sigma[i..] {
            if annihilates(&[a.clone(), b.clone()], &gc) {
                return Ok(KernelPair::InSigma {
                    l1: a.clone(),
                    l2: b.clone(),
                });
            }
        }
    }
    let kernel = catalecticant(g, 2)?.kernel().to_vec();
    let basis = dual_conic_matrices(&kernel);
    let exact_g = g.to_rational();
    let found = reducible_in_span(&basis, sigma, rng, |l1, l2| {
        annihilates(&[l1.to_vec(), l2.to_vec()], &gc)
    });
    let Some((l1, l2)) = found else {
        return Err(Error::retry(
            "reducible kernel conic",
            format!(
                "no admissible pair in {PENCILS} pencils of a {}-dimensional kernel",
                basis.len()
            ),
        ));
    };
    let exact = exact_g.and_then(|q| {
        let a = rationalize_point(&l1, 1 << 20, 1e-9)?;
        let b = rationalize_point(&l2, 1 << 20, 1e-9)?;
        let t = DualForm::linear(&a).mul(&DualForm::linear(&b)).ok()?;
        contract(&t, &q).ok()?.is_zero().then_some((a, b))
    });
    let (l1, l2) = match &exact {
        Some((a, b)) => (to_c(a), to_c(b)),
        None => (l1, l2),
    };
    Ok(KernelPair::Found { l1, l2, exact })
}

/// Two distinct lines outside `sigma` whose product annihilates the cubic
/// `g`, or a pair of forbidden lines that already does.
pub fn reducible_kernel_pair<S: Scalar>(
    g: &Form<S>,
    sigma: &[Vec<Complex>],
    seed: u64,
) -> Result<KernelPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    distinti(g, sigma, &mut rng)
}

fn random_lines_off<R: Rng + ?Sized>(
    count: usize,
    sigma: &[Vec<Complex>],
    rng: &mut R,
    h: i64,
) -> Vec<Vec<Rational>> {
    let mut taken: Vec<Vec<Complex>> = sigma.to_vec();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let l = random_rational_line(rng, h);
        let lc = normalized(&to_c(&l)).expect("nonzero");
        if off_sigma(&lc, &taken) {
            taken.push(lc);
            out.push(l);
        }
    }
    out
}

pub(crate) fn rette<S: Scalar, R: Rng + ?Sized>(
    f: &Form<S>,
    sigma: &[Vec<Complex>],
    rng: &mut R,
) -> Result<LineSystem> {
    check_ternary(f)?;
    let d = f.degree();
    if d < 3 {
        return Err(Error::DegreeOutOfRange(format!(
            "annihilating line systems need degree at least 3, got {d}"
        )));
    }
    if f.is_zero() {
        return LineSystem::from_rational(&random_lines_off(d - 1, sigma, rng, 9));
    }
    let fc = f.to_complex();
    for (i, a) in sigma.iter().enumerate() {
        for b in &sigma[i..] {
            if annihilates(&[a.clone(), b.clone()], &fc) {
                return Err(Error::Precondition(
                    "a product of two forbidden lines annihilates the form".into(),
                ));
            }
        }
    }
    let mut h = 4;
    let mut last = String::from("no attempt");
    for attempt in 0..LINE_RETRIES {
        if attempt > 0 && attempt % 32 == 0 {
            h *= 2;
        }
        let chosen = random_lines_off(d - 3, sigma, rng, h);
        let chosen_c: Vec<Vec<Complex>> = chosen.iter().map(|l| to_c(l)).collect();
        let mut sigma2 = sigma.to_vec();
        sigma2.extend(chosen_c.iter().cloned());
        let degenerate = (0..sigma2.len()).any(|i| {
            (i..sigma2.len()).any(|j| {
                let mut ls = chosen_c.clone();
                ls.push(sigma2[i].clone());
                ls.push(sigma2[j].clone());
                contraction_residual(&product_of_lines(&ls), &fc) <= 10.0 * ANNIHILATION_TOL
            })
        });
        if degenerate {
            last = "auxiliary lines are degenerate for the form".into();
            continue;
        }
        let factors: Vec<DualForm<S>> = chosen
            .iter()
            .map(|l| DualForm::linear(&l.iter().map(S::from_rational).collect::<Vec<_>>()))
            .collect();
        let g = if factors.is_empty() {
            f.clone()
        } else {
            contract(&DualForm::product(3, &factors)?, f)?
        };
        match distinti(&g, &sigma2, rng) {
            Ok(KernelPair::Found { l1, l2, .. }) => {
                let mut lines = vec![l1, l2];
                lines.extend(chosen_c);
                let system = LineSystem::new(lines)?;
                if system.annihilates(f) {
                    return Ok(system);
                }
                last = "line product failed the annihilation check".into();
            }
            Ok(KernelPair::InSigma { .. }) => {
                last = "kernel pair fell in the forbidden list".into()
            }
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::retry("annihilating lines", last))
}

/// `d − 1` distinct lines outside `sigma` whose product annihilates `f`.
pub fn annihilating_lines<S: Scalar>(
    f: &Form<S>,
    sigma: &[Vec<Complex>],
    seed: u64,
) -> Result<LineSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rette(f, sigma, &mut rng)
}

/// Greedily drops lines, left to right, while the product of the remaining
/// ones still annihilates `f`.
pub fn minimize_annihilating<S: Scalar>(f: &Form<S>, system: &LineSystem) -> LineSystem {
    let mut lines = system.lines.clone();
    let mut i = 0;
    while i < lines.len() {
        let mut rest = lines.clone();
        rest.remove(i);
        if annihilates_subset(&rest, f) {
            lines = rest;
        } else {
            i += 1;
        }
    }
    LineSystem { lines }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{parse_form, random_form};

    fn p(s: &str) -> Form<Rational> {
        parse_form(s, 3).unwrap()
    }

    #[test]
    fn pair_for_the_product_of_coordinates() {
        let g = p("x0*x1*x2");
        match reducible_kernel_pair(&g, &[], 1).unwrap() {
            KernelPair::Found { l1, l2, exact } => {
                assert!(annihilates(&[l1, l2], &g.to_complex()));
                if let Some((a, b)) = exact {
                    let t = DualForm::linear(&a).mul(&DualForm::linear(&b)).unwrap();
                    assert!(contract(&t, &g).unwrap().is_zero());
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pair_for_random_cubics() {
        for seed in 0..10 {
            let g = random_form(seed, 3, 3, 7);
            let KernelPair::Found { l1, l2, .. } = reducible_kernel_pair(&g, &[], seed).unwrap()
            else {
                panic!("no pair")
            };
            assert!(distance(&l1, &l2) > DISTINCT_TOL);
            let t = product_of_lines(&[l1, l2]);
            assert!(contraction_residual(&t, &g.to_complex()) <= 1e-8);
        }
    }

    #[test]
    fn pair_for_a_cube_is_exact() {
        let g = p("x0^3");
        let KernelPair::Found { exact, .. } = reducible_kernel_pair(&g, &[], 3).unwrap() else {
            panic!("no pair")
        };
        assert!(exact.is_some());
    }

    #[test]
    fn forbidden_pair_is_reported() {
        let g = p("x0^3");
        let x1 = vec![
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
        ];
        assert!(matches!(
            reducible_kernel_pair(&g, std::slice::from_ref(&x1), 0).unwrap(),
            KernelPair::InSigma { .. }
        ));
    }

    #[test]
    fn found_pairs_avoid_sigma() {
        let g = random_form(4, 3, 3, 7);
        let KernelPair::Found { l1, l2, .. } = reducible_kernel_pair(&g, &[], 4).unwrap() else {
            panic!()
        };
        let sigma = vec![l1.clone(), l2.clone()];
        if let KernelPair::Found { l1: a, l2: b, .. } =
            reducible_kernel_pair(&g, &sigma, 5).unwrap()
        {
            assert!(off_sigma(&a, &sigma) && off_sigma(&b, &sigma));
        }
    }

    #[test]
    fn annihilating_lines_for_quintics() {
        for seed in 0..5 {
            let f = random_form(seed, 3, 5, 9);
            let sys = annihilating_lines(&f, &[], seed).unwrap();
            assert_eq!(sys.len(), 4);
            assert!(contraction_residual(&sys.product(), &f.to_complex()) <= 1e-8);
        }
        let z = Form::<Rational>::zero(3, 5);
        assert_eq!(annihilating_lines(&z, &[], 0).unwrap().len(), 4);
        let pow = p("x0^6");
        let sys = annihilating_lines(&pow, &[], 2).unwrap();
        assert!(sys.annihilates(&pow));
    }

    #[test]
    fn minimization() {
        let f = p("x0^5 + x1^5 + x2^5");
        let lines = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [1, 2, 3]]
            .iter()
            .map(|l| {
                l.iter()
                    .map(|&v| Rational::from_integer(v.into()))
                    .collect()
            })
            .collect::<Vec<Vec<Rational>>>();
        let sys = LineSystem::from_rational(&lines).unwrap();
        assert!(sys.annihilates(&f));
        let min = minimize_annihilating(&f, &sys);
        assert_eq!(min.len(), 2);
        assert!(min.annihilates(&f));
        for i in 0..min.len() {
            let mut rest = min.lines().to_vec();
            rest.remove(i);
            assert!(!annihilates_subset(&rest, &f));
        }
        assert_eq!(minimize_annihilating(&f, &min), min);
        assert!(minimize_annihilating(&Form::<Rational>::zero(3, 5), &sys).is_empty());
    }
}
