//! Damped Gauss–Newton refinement of power-sum decompositions.

use crate::certify::{negligible_term, Decomposition, Provenance, Term};
use crate::form::{power_of_linear, Form};
use crate::linalg::{least_squares, Matrix};
use crate::point::{min_pairwise_distance, DISTINCT_TOL};
use crate::scalar::{Complex, Scalar};

const ITERATIONS: usize = 200;
const CONVERGED: f64 = 1e-14;
/// Iterations over which the residual must drop tenfold.
const STALL_WINDOW: usize = 40;
/// Residuals up to this size are worth refining.
pub(crate) const POLISH_FROM: f64 = 1e-5;

pub(crate) fn norm(r: &[Complex]) -> f64 {
    r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Levenberg–Marquardt from `z`; returns the final point and relative residual.
pub(crate) fn levenberg_marquardt(
    mut z: Vec<Complex>,
    fnorm: f64,
    residual: impl Fn(&[Complex]) -> Vec<Complex>,
    jacobian: impl Fn(&[Complex]) -> Matrix<Complex>,
) -> (Vec<Complex>, f64) {
    let zero = Complex::new(0.0, 0.0);
    let mut r = residual(&z);
    let mut rn = norm(&r) / fnorm;
    let mut damping = 1e-3;
    let mut history = vec![rn];
    for it in 0..ITERATIONS {
        if rn < CONVERGED {
            break;
        }
        if it >= STALL_WINDOW && rn > 1e-8 && rn > 0.1 * history[it - STALL_WINDOW] {
            break;
        }
        let j = jacobian(&z);
        let n = z.len();
        let rows = j.rows();
        let scale = (0..n)
            .map(|c| (0..rows).map(|i| j.get(i, c).norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt();
        let mut improved = false;
        for _ in 0..12 {
            let mu = Complex::new(damping * scale, 0.0);
            let aug = Matrix::from_fn(rows + n, n, |i, c| {
                if i < rows {
                    *j.get(i, c)
                } else if i - rows == c {
                    mu
                } else {
                    zero
                }
            });
            let mut rhs: Vec<Complex> = r.iter().map(|c| -c).collect();
            rhs.resize(rows + n, zero);
            let Some((step, _)) = least_squares(&aug, &rhs) else {
                break;
            };
            let trial: Vec<Complex> = z.iter().zip(&step).map(|(a, b)| a + b).collect();
            let tr = residual(&trial);
            let tn = norm(&tr) / fnorm;
            if tn.is_finite() && tn < rn {
                z = trial;
                r = tr;
                rn = tn;
                damping = (damping / 4.0).max(1e-12);
                improved = true;
                history.push(rn);
                break;
            }
            damping *= 8.0;
        }
        if !improved {
            break;
        }
    }
    (z, rn)
}

/// Coefficients of `Σ (pᵢ·x)^d − f` for points stacked in `z`.
pub(crate) fn power_sum(f: &Form<Complex>, z: &[Complex]) -> Vec<Complex> {
    let one = Complex::new(1.0, 0.0);
    let mut acc = f.scale(&Complex::new(-1.0, 0.0));
    for p in z.chunks(f.num_vars()) {
        acc = acc
            .add(&power_of_linear(p, &one, f.degree()).expect("nonzero point"))
            .expect("same shape");
    }
    acc.coeffs().to_vec()
}

pub(crate) fn power_sum_jacobian(f: &Form<Complex>, z: &[Complex]) -> Matrix<Complex> {
    let (n, d) = (f.num_vars(), f.degree());
    let mut cols = Vec::with_capacity(z.len());
    for p in z.chunks(n) {
        let lower = power_of_linear(p, &Complex::new(d as f64, 0.0), d - 1).expect("nonzero point");
        for j in 0..n {
            let mut e = vec![Complex::new(0.0, 0.0); n];
            e[j] = Complex::new(1.0, 0.0);
            cols.push(
                lower
                    .mul(&Form::linear(&e))
                    .expect("same variables")
                    .coeffs()
                    .to_vec(),
            );
        }
    }
    Matrix::from_columns(f.coeffs().len(), &cols)
}

/// Refines `terms` towards an exact decomposition of `f` by damped
/// Gauss–Newton on the points, with the coefficients absorbed into them.
/// Points come back with unit norm.
pub(crate) fn polish(f: &Form<Complex>, terms: &[Term]) -> Option<Vec<Term>> {
    let d = f.degree();
    let fnorm = norm(f.coeffs());
    if fnorm == 0.0 || terms.is_empty() || d == 0 {
        return None;
    }
    let z: Vec<Complex> = terms
        .iter()
        .flat_map(|t| {
            let s = t.coeff.powf(1.0 / d as f64);
            t.point.iter().map(move |c| c * s).collect::<Vec<_>>()
        })
        .collect();
    let (z, _) = levenberg_marquardt(z, fnorm, |z| power_sum(f, z), |z| power_sum_jacobian(f, z));
    z.chunks(f.num_vars())
        .map(|p| {
            let r = norm(p);
            (r > 0.0 && r.is_finite()).then(|| Term {
                coeff: Complex::new(r.powi(d as i32), 0.0),
                point: p.iter().map(|c| c / r).collect(),
            })
        })
        .collect()
}

/// Polishes `terms` when their residual `res` against `f` is above `tol`
/// but close, returning a refined set that reaches `tol`, keeps its points
/// distinct and passes `keep`.
pub(crate) fn polish_to<S: Scalar>(
    f: &Form<S>,
    terms: &[Term],
    res: f64,
    tol: f64,
    keep: impl Fn(&[Complex]) -> bool,
) -> Option<Vec<Term>> {
    if res <= tol || res > POLISH_FROM {
        return None;
    }
    let polished = polish(&f.to_complex(), terms)?;
    let pts: Vec<Vec<Complex>> = polished.iter().map(|t| t.point.clone()).collect();
    if min_pairwise_distance(&pts) <= DISTINCT_TOL || !pts.iter().all(|p| keep(p)) {
        return None;
    }
    let scale = f.norm_inf();
    if polished
        .iter()
        .any(|t| negligible_term(t, f.degree(), scale))
    {
        return None;
    }
    let r = Decomposition::new(
        f.num_vars(),
        f.degree(),
        polished.clone(),
        Provenance::default(),
    )
    .and_then(|dec| dec.residual(f))
    .ok()?;
    (r <= tol).then_some(polished)
}
