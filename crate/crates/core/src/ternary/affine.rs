//! Damped Gauss–Newton searches for decompositions of a fixed size, either
//! with every point in the affine chart `l ≠ 0` or with free points.

use rand::Rng;

use crate::certify::{Decomposition, Provenance, Term};
use crate::form::{power_of_linear, Form};
use crate::linalg::{least_squares, Matrix};
use crate::point::{min_pairwise_distance, LineChart, DISTINCT_TOL};
use crate::refine::{levenberg_marquardt, norm, power_sum, power_sum_jacobian};
use crate::scalar::{Complex, Rational};

struct Chart {
    base: Vec<Complex>,
    u: Vec<Complex>,
    v: Vec<Complex>,
}

impl Chart {
    fn point(&self, s: Complex, t: Complex) -> Vec<Complex> {
        (0..3)
            .map(|i| self.base[i] + s * self.u[i] + t * self.v[i])
            .collect()
    }
}

fn residual(f: &Form<Complex>, chart: &Chart, z: &[Complex], k: usize) -> Vec<Complex> {
    let mut acc = f.scale(&Complex::new(-1.0, 0.0));
    for i in 0..k {
        let p = chart.point(z[k + i], z[2 * k + i]);
        let term = power_of_linear(&p, &z[i], f.degree()).expect("ternary point");
        acc = acc.add(&term).expect("same degree");
    }
    acc.coeffs().to_vec()
}

fn jacobian(f: &Form<Complex>, chart: &Chart, z: &[Complex], k: usize) -> Matrix<Complex> {
    let d = f.degree();
    let one = Complex::new(1.0, 0.0);
    let lin_u = Form::linear(&chart.u);
    let lin_v = Form::linear(&chart.v);
    let mut cols = Vec::with_capacity(3 * k);
    let mut du = Vec::with_capacity(k);
    let mut dv = Vec::with_capacity(k);
    for i in 0..k {
        let p = chart.point(z[k + i], z[2 * k + i]);
        cols.push(
            power_of_linear(&p, &one, d)
                .expect("ternary point")
                .coeffs()
                .to_vec(),
        );
        let lower = power_of_linear(&p, &(z[i] * d as f64), d - 1).expect("ternary point");
        du.push(lower.mul(&lin_u).expect("ternary").coeffs().to_vec());
        dv.push(lower.mul(&lin_v).expect("ternary").coeffs().to_vec());
    }
    cols.extend(du);
    cols.extend(dv);
    Matrix::from_columns(f.coeffs().len(), &cols)
}

/// Searches for `size` terms `cᵢ(pᵢ·x)^d` summing to `f` with `l(pᵢ) = 1`,
/// so that no point lies on the line `l = 0`. Returns the first solution
/// passing `accept`.
pub(crate) fn affine_search<R: Rng + ?Sized>(
    f: &Form<Complex>,
    l: &[Complex],
    size: usize,
    starts: usize,
    rng: &mut R,
    mut accept: impl FnMut(&[Term]) -> bool,
) -> Option<Vec<Term>> {
    let lc = LineChart::new(l).ok()?;
    let lnorm: f64 = l.iter().map(|c| c.norm_sqr()).sum();
    let chart = Chart {
        base: l.iter().map(|c| c.conj() / lnorm).collect(),
        u: lc.u.clone(),
        v: lc.v.clone(),
    };
    let fnorm = norm(f.coeffs());
    if fnorm == 0.0 || size == 0 {
        return None;
    }
    let k = size;
    let one = Complex::new(1.0, 0.0);
    for _ in 0..starts {
        let mut z: Vec<Complex> = vec![Complex::new(0.0, 0.0); 3 * k];
        for w in &mut z[k..] {
            *w = Complex::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        }
        let cols: Vec<Vec<Complex>> = (0..k)
            .map(|i| {
                let p = chart.point(z[k + i], z[2 * k + i]);
                power_of_linear(&p, &one, f.degree())
                    .expect("ternary point")
                    .coeffs()
                    .to_vec()
            })
            .collect();
        let Some((a, _)) =
            least_squares(&Matrix::from_columns(f.coeffs().len(), &cols), f.coeffs())
        else {
            continue;
        };
        z[..k].copy_from_slice(&a);
        let (z, rn) = levenberg_marquardt(
            z,
            fnorm,
            |z| residual(f, &chart, z, k),
            |z| jacobian(f, &chart, z, k),
        );
        if rn >= 1e-11 {
            continue;
        }
        let terms: Vec<Term> = (0..k)
            .map(|i| Term {
                coeff: z[i],
                point: chart.point(z[k + i], z[2 * k + i]),
            })
            .collect();
        if accept(&terms) {
            return Some(terms);
        }
    }
    None
}

/// A decomposition `f = Σ (pᵢ·x)^d` with exactly `size` distinct points,
/// found by a search over the points themselves, with residual at most `tol`.
pub(crate) fn free_decomposition<R: Rng + ?Sized>(
    f: &Form<Rational>,
    size: usize,
    starts: usize,
    tol: f64,
    rng: &mut R,
) -> Option<Vec<Term>> {
    let fc = f.to_complex();
    let fnorm = norm(fc.coeffs());
    if fnorm == 0.0 || size == 0 || f.degree() == 0 {
        return None;
    }
    let radius = (fnorm / size as f64).powf(1.0 / f.degree() as f64);
    for _ in 0..starts {
        let z: Vec<Complex> = (0..3 * size)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * radius)
            .collect();
        let (z, rn) = levenberg_marquardt(
            z,
            fnorm,
            |z| power_sum(&fc, z),
            |z| power_sum_jacobian(&fc, z),
        );
        if rn >= 1e-11 {
            continue;
        }
        let terms: Vec<Term> = z
            .chunks(3)
            .map(|p| Term {
                coeff: Complex::new(1.0, 0.0),
                point: p.to_vec(),
            })
            .collect();
        let pts: Vec<Vec<Complex>> = terms.iter().map(|t| t.point.clone()).collect();
        if min_pairwise_distance(&pts) <= DISTINCT_TOL {
            continue;
        }
        let ok = Decomposition::new(3, f.degree(), terms.clone(), Provenance::default())
            .and_then(|d| d.residual(f))
            .is_ok_and(|r| r <= tol);
        if ok {
            return Some(terms);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::parse_form;
    use crate::point::dot;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finds_points_off_a_line() {
        let f = parse_form("x0^4 + x1^4 + x2^4", 3).unwrap().to_complex();
        let l = vec![
            Complex::new(1.0, 0.0),
            Complex::new(-1.0, 0.0),
            Complex::new(0.0, 0.0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let terms = affine_search(&f, &l, 6, 16, &mut rng, |_| true).unwrap();
        let mut acc = Form::<Complex>::zero(3, 4);
        for t in &terms {
            assert!((dot(&l, &t.point) - Complex::new(1.0, 0.0)).norm() < 1e-12);
            acc = acc
                .add(&power_of_linear(&t.point, &t.coeff, 4).unwrap())
                .unwrap();
        }
        assert!(acc.sub(&f).unwrap().norm_inf() < 1e-9);
    }

    #[test]
    fn free_search_recovers_three_powers() {
        let f = parse_form("x0^4 + x1^4 + x2^4", 3).unwrap();
        for seed in 0..4 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let terms = free_decomposition(&f, 3, 12, 1e-9, &mut rng).unwrap();
            assert_eq!(terms.len(), 3);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(free_decomposition(&f, 2, 6, 1e-9, &mut rng).is_none());
    }
}
