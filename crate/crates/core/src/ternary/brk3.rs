//! Quartics of catalecticant rank three through a smooth apolar conic: the
//! form is pulled back to a binary octic along a parametrization of the
//! conic, decomposed there and pushed forward.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lines::{factor_singular_conic, singular_members};
use super::odd::MERGE_TOL;
use super::{check_ternary, quadric_matrix};
use crate::apolarity::catalecticant;
use crate::avoidance::AvoidanceSet;
use crate::binary::{border_rank_binary, least_squares_fit, sylvester};
use crate::certify::{Decomposition, Provenance, Term};
use crate::error::{Error, Result};
use crate::form::Form;
use crate::linalg::Matrix;
use crate::monomial::{binomial, factorial, monomials};
use crate::point::{min_pairwise_distance, rationalize_point, LineChart, DISTINCT_TOL};
use crate::refine::polish_to;
use crate::roots::binary_roots;
use crate::scalar::{Complex, Rational, Scalar};

const CONIC_ATTEMPTS: usize = 64;
const POINT_PENCILS: usize = 32;

/// A quartic seen on a smooth apolar conic.
#[derive(Clone, Debug)]
pub struct ConicPullback {
    /// The conic as a dual quadratic form annihilating the quartic.
    pub conic: Form<Rational>,
    /// The parametrization `(s, t) ↦ (φ₀, φ₁, φ₂)` by binary quadrics.
    pub param: Vec<Form<Complex>>,
    /// The binary octic mapping to the quartic.
    pub octic: Form<Complex>,
    /// The octic in exact arithmetic when the conic has a rational point.
    pub exact_octic: Option<Form<Rational>>,
    pub border_rank: usize,
}

impl ConicPullback {
    /// The point of the conic with parameter `st`.
    pub fn point(&self, st: &[Complex]) -> Vec<Complex> {
        self.param
            .iter()
            .map(|q| q.evaluate_complex(st).expect("binary quadric"))
            .collect()
    }

    pub fn is_exact(&self) -> bool {
        self.exact_octic.is_some()
    }
}

/// Stereographic parametrization from `p0` of the conic with matrix `m`:
/// `φ(s, t) = q(w)·p0 − 2B(p0, w)·w` with `w = s·e_a + t·e_b`.
fn parametrize<S: Scalar>(m: &Matrix<S>, p0: &[S]) -> Vec<Form<S>> {
    let pivot = (0..3)
        .max_by(|&i, &j| p0[i].magnitude().total_cmp(&p0[j].magnitude()))
        .expect("three coordinates");
    let free: Vec<usize> = (0..3).filter(|&i| i != pivot).collect();
    let (a, b) = (free[0], free[1]);
    let two = S::from_i64(2);
    let q = Form::from_coeffs(
        2,
        2,
        vec![
            m.get(a, a).clone(),
            two.clone() * m.get(a, b).clone(),
            m.get(b, b).clone(),
        ],
    )
    .expect("three coefficients");
    let mp: Vec<S> = (0..3)
        .map(|i| {
            (0..3).fold(S::zero(), |acc, j| {
                acc + m.get(i, j).clone() * p0[j].clone()
            })
        })
        .collect();
    let bil = Form::linear(&[mp[a].clone(), mp[b].clone()]);
    (0..3)
        .map(|i| {
            let mut w = vec![S::zero(), S::zero()];
            if i == a {
                w[0] = S::one();
            } else if i == b {
                w[1] = S::one();
            }
            let wi = Form::linear(&w);
            let lin = bil.mul(&wi).expect("binary").scale(&two);
            q.scale(&p0[i]).sub(&lin).expect("binary quadrics")
        })
        .collect()
}

/// Solves `Φ(g) = f` where `Φ((a s + b t)^8) = (φ(a, b)·x)^4`.
fn pull_back<S: Scalar>(f: &Form<S>, param: &[Form<S>]) -> Option<Form<S>> {
    let d = f.degree();
    let e = 2 * d;
    let mons = monomials(3, d);
    let rows: Vec<Vec<S>> = mons
        .iter()
        .map(|m| {
            let w = factorial(d)
                / m.iter()
                    .fold(num_bigint::BigInt::one(), |acc, &k| acc * factorial(k));
            let mut prod = Form::monomial(&[0, 0], S::one());
            for (q, &k) in param.iter().zip(m.iter()) {
                prod = prod.mul(&q.pow(k)).expect("binary");
            }
            let w = S::from_bigint(&w);
            prod.coeffs()
                .iter()
                .enumerate()
                .map(|(j, c)| c.clone() * w.clone() / S::from_i64(binomial(e, j) as i64))
                .collect()
        })
        .collect();
    let m = Matrix::from_fn(mons.len(), e + 1, |i, j| rows[i][j].clone());
    let g = m.solve(f.coeffs())?;
    Form::from_coeffs(2, e, g).ok()
}

/// A rational point on the conic `m`, found among the intersections of the
/// conic with line pairs of the apolar net.
fn rational_point<R: Rng + ?Sized>(
    m: &Matrix<Rational>,
    net: &[Matrix<Complex>],
    rng: &mut R,
) -> Option<Vec<Rational>> {
    let mc = m.map(|c| c.to_complex());
    let on_conic = |p: &[Rational]| -> bool {
        let mp = m.mul_vec(p);
        mp.iter()
            .zip(p)
            .map(|(a, b)| a * b)
            .sum::<Rational>()
            .is_zero()
    };
    let combo = |rng: &mut R| -> Matrix<Complex> {
        let w: Vec<f64> = net.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        Matrix::from_fn(3, 3, |i, j| {
            net.iter().zip(&w).map(|(n, c)| n.get(i, j) * c).sum()
        })
    };
    for _ in 0..POINT_PENCILS {
        let a = combo(rng);
        let b = combo(rng);
        for q in singular_members(&a, &b) {
            let Some((l1, l2)) = factor_singular_conic(&q, rng) else {
                continue;
            };
            for l in [l1, l2] {
                let Ok(chart) = LineChart::new(&l) else {
                    continue;
                };
                let qu = mc.mul_vec(&chart.u);
                let qv = mc.mul_vec(&chart.v);
                let dotc = |x: &[Complex], y: &[Complex]| -> Complex {
                    x.iter().zip(y).map(|(a, b)| a * b).sum()
                };
                let restricted = Form::from_coeffs(
                    2,
                    2,
                    vec![
                        dotc(&chart.u, &qu),
                        dotc(&chart.v, &qu) * 2.0,
                        dotc(&chart.v, &qv),
                    ],
                )
                .expect("binary quadric");
                if restricted.norm_inf() == 0.0 {
                    continue;
                }
                let Ok(roots) = binary_roots(&restricted) else {
                    continue;
                };
                for st in roots {
                    let p = chart.embed(&st);
                    if let Some(r) = rationalize_point(&p, 1 << 20, 1e-9) {
                        if on_conic(&r) {
                            return Some(r);
                        }
                    }
                }
            }
        }
    }
    None
}

fn float_point<R: Rng + ?Sized>(m: &Matrix<Complex>, rng: &mut R) -> Option<Vec<Complex>> {
    for _ in 0..16 {
        let r1: Vec<Complex> = (0..3)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let r2: Vec<Complex> = (0..3)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let bil = |x: &[Complex], y: &[Complex]| -> Complex {
            let my = m.mul_vec(y);
            x.iter().zip(&my).map(|(a, b)| a * b).sum()
        };
        let restricted = Form::from_coeffs(
            2,
            2,
            vec![bil(&r1, &r1), bil(&r1, &r2) * 2.0, bil(&r2, &r2)],
        )
        .expect("binary quadric");
        let Ok(roots) = binary_roots(&restricted) else {
            continue;
        };
        let st = roots[0];
        return Some((0..3).map(|i| st[0] * r1[i] + st[1] * r2[i]).collect());
    }
    None
}

fn random_smooth_conic<R: Rng + ?Sized>(
    kernel: &[Form<Rational>],
    rng: &mut R,
) -> Option<(Form<Rational>, Matrix<Rational>)> {
    for _ in 0..CONIC_ATTEMPTS {
        let mut q = Form::zero(3, 2);
        for t in kernel {
            q = q.add(&t.scale(&Rational::random(rng, 5))).expect("conics");
        }
        let m = quadric_matrix(&q);
        if m.rank() == 3 {
            return Some((q, m));
        }
    }
    None
}

pub(crate) fn pullback_with<R: Rng + ?Sized>(
    f: &Form<Rational>,
    rng: &mut R,
) -> Result<ConicPullback> {
    check_ternary(f)?;
    if f.degree() != 4 {
        return Err(Error::DegreeOutOfRange(
            "the conic route is for quartics".into(),
        ));
    }
    let cat = catalecticant(f, 2)?;
    if cat.rank() != 3 {
        return Err(Error::Precondition(format!(
            "catalecticant rank {} is not 3",
            cat.rank()
        )));
    }
    let kernel: Vec<Form<Rational>> = cat.kernel().iter().map(|t| t.as_form().clone()).collect();
    let net: Vec<Matrix<Complex>> = kernel
        .iter()
        .map(|q| quadric_matrix(q).map(|c| c.to_complex()))
        .collect();
    let mut last = Error::NoSmoothConic;
    for _ in 0..8 {
        let (conic, m) = random_smooth_conic(&kernel, rng).ok_or(Error::NoSmoothConic)?;
        if let Some(p0) = rational_point(&m, &net, rng) {
            let param = parametrize(&m, &p0);
            let Some(g) = pull_back(f, &param) else {
                last = Error::Inconsistent("quartic is not on the conic".into());
                continue;
            };
            let b = border_rank_binary(&g)?;
            if b != 3 {
                last = Error::Precondition(format!("pullback has border rank {b}"));
                continue;
            }
            return Ok(ConicPullback {
                conic,
                param: param.iter().map(|q| q.to_complex()).collect(),
                octic: g.to_complex(),
                exact_octic: Some(g),
                border_rank: b,
            });
        }
        let mc = m.map(|c| c.to_complex());
        let Some(p0) = float_point(&mc, rng) else {
            continue;
        };
        let param = parametrize(&mc, &p0);
        let Some(g) = pull_back(&f.to_complex(), &param) else {
            last = Error::Inconsistent("quartic is not on the conic".into());
            continue;
        };
        let b = border_rank_binary(&g)?;
        if b != 3 {
            last = Error::Precondition(format!("pullback has border rank {b}"));
            continue;
        }
        return Ok(ConicPullback {
            conic,
            param,
            octic: g,
            exact_octic: None,
            border_rank: b,
        });
    }
    Err(last)
}

/// Pulls a catalecticant-rank-3 quartic back to a binary octic along a
/// smooth apolar conic.
pub fn conic_pullback(f: &Form<Rational>, seed: u64) -> Result<ConicPullback> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pullback_with(f, &mut rng)
}

/// Seven terms on the conic, none satisfying `avoid`.
pub(crate) fn brk3_terms<R: Rng + ?Sized>(
    f: &Form<Rational>,
    avoid: &dyn Fn(&[Complex]) -> bool,
    rng: &mut R,
) -> Result<(Vec<Term>, String)> {
    let pb = pullback_with(f, rng)?;
    let pulled = |st: &[Complex]| avoid(&pb.point(st));
    let size = 8 + 2 - pb.border_rank;
    let mut last = Error::retry("conic route", "no attempt");
    for _ in 0..8 {
        let binary = match &pb.exact_octic {
            Some(g) => sylvester(g, size, &pulled, rng, MERGE_TOL),
            None => sylvester(&pb.octic, size, &pulled, rng, MERGE_TOL),
        };
        let binary = match binary {
            Ok(t) => t,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let pts: Vec<Vec<Complex>> = binary.iter().map(|t| pb.point(&t.point)).collect();
        if min_pairwise_distance(&pts) <= DISTINCT_TOL {
            last = Error::retry("conic route", "coincident points");
            continue;
        }
        let coeffs = match least_squares_fit(f, &pts) {
            Some((c, _)) => c,
            None => binary.iter().map(|t| t.coeff).collect(),
        };
        let terms: Vec<Term> = pts
            .into_iter()
            .zip(coeffs)
            .map(|(point, coeff)| Term { coeff, point })
            .collect();
        let res = Decomposition::new(3, 4, terms.clone(), Provenance::default())?.residual(f)?;
        let polished = polish_to(f, &terms, res, MERGE_TOL, |p| !avoid(p));
        if res > MERGE_TOL && polished.is_none() {
            last = Error::retry("conic route", format!("residual {res:.2e}"));
            continue;
        }
        let terms = polished.unwrap_or(terms);
        let note = format!(
            "pullback octic border rank {} ({})",
            pb.border_rank,
            if pb.is_exact() { "exact" } else { "float" }
        );
        return Ok((terms, note));
    }
    Err(last)
}

/// Seven-point decomposition, avoiding `x`, of a quartic of catalecticant
/// rank 3 with a smooth apolar conic.
pub fn quartic_brk3_decompose(
    f: &Form<Rational>,
    x: &AvoidanceSet,
    seed: u64,
) -> Result<Decomposition> {
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    if x.num_vars() != 3 {
        return Err(Error::Dimension(
            "avoidance set must live in the plane".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (terms, note) = brk3_terms(f, &|p| x.contains(p), &mut rng)?;
    let prov = Provenance::new("quartic_brk3_decompose", seed)
        .route("b: conic")
        .note(note);
    Decomposition::new(3, 4, terms, prov)
}
