//! Decompositions of ternary forms by splitting along annihilating lines,
//! plus the low-degree and few-variable cases.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lines::{minimize_annihilating, rette};
use super::split::split_on_lines;
use super::{check_ternary, push_forward};
use crate::apolarity::{catalecticant, essential_variables};
use crate::binary::{decompose_binary, decompose_minimal, ranks_binary, Avoid};
use crate::certify::{merge_coincident, Decomposition, Piece, Provenance, Term};
use crate::error::{Error, Result};
use crate::form::Form;
use crate::linalg::Matrix;
use crate::monomial::{count, monomials};
use crate::point::{min_pairwise_distance, DISTINCT_TOL};
use crate::refine::polish_to;
use crate::scalar::{Complex, Rational, Scalar};

/// Tuples tried per splitting stage.
pub(crate) const SAMPLES: usize = 256;
/// Relative residual a merged decomposition must reach.
pub(crate) const MERGE_TOL: f64 = 1e-9;

/// `(d² − 1) / 2`, the size bound for odd-degree ternary forms.
pub fn odd_degree_bound(d: usize) -> usize {
    (d * d).saturating_sub(1) / 2
}

/// A form rewritten in its essential variables: `f(x) = g(w₁·x, …, w_r·x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EssentialReduction {
    pub basis: Vec<Vec<Rational>>,
    pub reduced: Form<Rational>,
}

impl EssentialReduction {
    /// The ambient point `Σ aᵢ wᵢ` of a point of the reduced space.
    pub fn lift(&self, a: &[Complex]) -> Vec<Complex> {
        let n = self.basis[0].len();
        (0..n)
            .map(|j| {
                a.iter()
                    .zip(&self.basis)
                    .map(|(c, w)| c * w[j].to_complex())
                    .sum()
            })
            .collect()
    }

    pub fn lift_terms(&self, terms: Vec<Term>) -> Vec<Term> {
        terms
            .into_iter()
            .map(|t| Term {
                coeff: t.coeff,
                point: self.lift(&t.point),
            })
            .collect()
    }
}

/// Exact change of coordinates to the essential variables of `f`: the
/// span of its `(d−1)`-th derivatives.
pub fn essential_reduction(f: &Form<Rational>) -> Result<EssentialReduction> {
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    let d = f.degree();
    if d == 0 {
        return Err(Error::DegreeOutOfRange(
            "constant forms have no essential variables".into(),
        ));
    }
    let n = f.num_vars();
    let cat = catalecticant(f, d - 1)?;
    let m = cat.matrix();
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    for i in 0..m.rows() {
        let mut trial = basis.clone();
        trial.push(m.row(i).to_vec());
        if Matrix::from_columns(n, &trial).rank() == trial.len() {
            basis = trial;
        }
        if basis.len() == cat.rank() {
            break;
        }
    }
    let r = basis.len();
    let images: Vec<Form<Rational>> = basis.iter().map(|w| Form::linear(w)).collect();
    let columns: Vec<Vec<Rational>> = monomials(r, d)
        .iter()
        .map(|e| {
            Form::monomial(e, Rational::one())
                .substitute(&images)
                .expect("images match the reduced variables")
                .coeffs()
                .to_vec()
        })
        .collect();
    let g = Matrix::from_columns(count(n, d), &columns)
        .solve(f.coeffs())
        .ok_or_else(|| Error::Inconsistent("form is not in its essential subspace".into()))?;
    Ok(EssentialReduction {
        basis,
        reduced: Form::from_coeffs(r, d, g)?,
    })
}

/// Exact diagonalization `q = Σ (Av·x)² / q(v)` of a quadratic form; the
/// number of terms is the rank of `q`.
pub fn decompose_quadric(f: &Form<Rational>) -> Result<Decomposition> {
    if f.degree() != 2 {
        return Err(Error::DegreeOutOfRange(
            "a quadratic form is required".into(),
        ));
    }
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    let n = f.num_vars();
    let two = Rational::from_integer(2.into());
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = vec![0; n];
                    e[i] += 1;
                    e[j] += 1;
                    let c = f.coeff(&e).clone();
                    if i == j {
                        c
                    } else {
                        c / &two
                    }
                })
                .collect()
        })
        .collect();
    let mut terms = Vec::new();
    loop {
        let v = match (0..n).find(|&i| !a[i][i].is_zero()) {
            Some(i) => unit(n, i, None),
            None => match (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_zero())
            {
                Some((i, j)) => unit(n, i, Some(j)),
                None => break,
            },
        };
        let av: Vec<Rational> = (0..n)
            .map(|i| (0..n).map(|j| &a[i][j] * &v[j]).sum())
            .collect();
        let qv: Rational = av.iter().zip(&v).map(|(x, y)| x * y).sum();
        for i in 0..n {
            for j in 0..n {
                let delta = &av[i] * &av[j] / &qv;
                a[i][j] -= delta;
            }
        }
        terms.push(Term {
            coeff: (Rational::one() / qv).to_complex(),
            point: av.iter().map(|c| c.to_complex()).collect(),
        });
    }
    let prov = Provenance::new("decompose_quadric", 0).route("diagonalization");
    Decomposition::new(n, 2, terms, prov)
}

fn unit(n: usize, i: usize, j: Option<usize>) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    if let Some(j) = j {
        v[j] = Rational::one();
    }
    v
}

/// Decomposes a form with fewer than three essential variables through its
/// reduction; `None` when all three are essential.
pub(crate) fn reduced_decomposition(
    f: &Form<Rational>,
    seed: u64,
) -> Result<Option<(EssentialReduction, Vec<Term>)>> {
    if essential_variables(f)? >= f.num_vars() {
        return Ok(None);
    }
    let red = essential_reduction(f)?;
    let terms = match red.basis.len() {
        1 => vec![Term {
            coeff: red.reduced.coeffs()[0].to_complex(),
            point: vec![Complex::one()],
        }],
        2 => decompose_binary(&red.reduced, seed)?.terms,
        _ => return Ok(None),
    };
    let lifted = red.lift_terms(terms);
    Ok(Some((red, lifted)))
}

/// Largest binary rank allowed for a piece when splitting a degree-`d` form
/// along `k + 1` lines.
pub(crate) fn piece_target(d: usize, k: usize) -> usize {
    let generic = if d % 2 == 1 {
        d.div_ceil(2)
    } else {
        (d + 2) / 2
    };
    (d + 1).saturating_sub(k).max(generic)
}

pub(crate) struct LineRoute {
    pub terms: Vec<Term>,
    pub pieces: Vec<Piece>,
    pub lines: usize,
}

/// Annihilating lines, minimization, splitting and sampling of tuples whose
/// pieces all have binary rank at most the target.
pub(crate) fn split_route<R: Rng + ?Sized>(
    f: &Form<Rational>,
    avoid: Avoid<'_>,
    rng: &mut R,
) -> Result<LineRoute> {
    let d = f.degree();
    let system = rette(f, &[], rng)?;
    let system = minimize_annihilating(f, &system);
    let k = system.len().saturating_sub(1);
    let target = piece_target(d, k);
    let fc = f.to_complex();
    let split = split_on_lines(&fc, system.lines())?;
    let scales: Vec<f64> = split
        .kernel()
        .iter()
        .map(|v| {
            let part = split
                .particular()
                .iter()
                .map(|g| g.norm_inf())
                .fold(0.0, f64::max);
            let ker = v.iter().map(|g| g.norm_inf()).fold(0.0, f64::max);
            if ker == 0.0 {
                0.0
            } else {
                part.max(fc.norm_inf()) / ker
            }
        })
        .collect();
    let mut h = 4i64;
    let mut last = String::from("no attempt");
    for attempt in 0..SAMPLES {
        if attempt > 0 && attempt % 32 == 0 {
            h *= 2;
        }
        let coeffs: Vec<Complex> = scales
            .iter()
            .map(|s| Complex::new(rng.gen_range(-h..=h) as f64 / 4.0 * s, 0.0))
            .collect();
        let pieces = split.sample(&coeffs)?;
        let mut ranks = Vec::with_capacity(pieces.len());
        let mut ok = true;
        for g in &pieces {
            if g.norm_inf() <= 1e-12 * fc.norm_inf() {
                ranks.push(None);
                continue;
            }
            match ranks_binary(g) {
                Ok((b, r)) if r <= target => ranks.push(Some((b, r))),
                Ok((_, r)) => {
                    last = format!("piece of binary rank {r} exceeds target {target}");
                    ok = false;
                    break;
                }
                Err(e) => {
                    last = e.to_string();
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut terms = Vec::new();
        let mut meta = Vec::new();
        for (i, (g, rk)) in pieces.iter().zip(&ranks).enumerate() {
            let Some((b, r)) = *rk else { continue };
            let chart = &split.charts()[i];
            let pulled = |st: &[Complex]| avoid(&chart.embed(st));
            match decompose_minimal(g, &pulled, rng, MERGE_TOL) {
                Ok(t) if t.len() <= target => {
                    meta.push(Piece {
                        line: chart.line.clone(),
                        border_rank: b,
                        rank: r,
                        size: t.len(),
                    });
                    terms.extend(push_forward(t, chart));
                }
                Ok(t) => {
                    last = format!("piece decomposition of size {} exceeds target", t.len());
                    ok = false;
                    break;
                }
                Err(e) => {
                    last = e.to_string();
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let terms = merge_coincident(terms, d, fc.norm_inf());
        let pts: Vec<Vec<Complex>> = terms.iter().map(|t| t.point.clone()).collect();
        if terms.is_empty() || min_pairwise_distance(&pts) <= DISTINCT_TOL {
            last = "pieces share a point".into();
            continue;
        }
        let res = Decomposition::new(3, d, terms.clone(), Provenance::default())?.residual(f)?;
        let polished = polish_to(f, &terms, res, MERGE_TOL, |p| !avoid(p));
        if res > MERGE_TOL && polished.is_none() {
            last = format!("merged residual {res:.2e}");
            continue;
        }
        let terms = polished.unwrap_or(terms);
        return Ok(LineRoute {
            terms,
            pieces: meta,
            lines: k + 1,
        });
    }
    Err(Error::retry(
        "tuple sampling",
        format!("{SAMPLES} tuples on {} lines: {last}", k + 1),
    ))
}

fn no_avoid(_: &[Complex]) -> bool {
    false
}

fn by_lines(f: &Form<Rational>, seed: u64, op: &str) -> Result<Decomposition> {
    let d = f.degree();
    if let Some((red, terms)) = reduced_decomposition(f, seed)? {
        let prov = Provenance::new(op, seed)
            .route("essential reduction")
            .note(format!("{} essential variables", red.basis.len()));
        return Decomposition::new(3, d, terms, prov);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let route = split_route(f, &no_avoid, &mut rng)?;
    let k1 = route.lines;
    let mut prov = Provenance::new(op, seed)
        .route("annihilating lines")
        .route(format!("split on {k1} lines"))
        .note(format!(
            "tuple space dimension {}, piece rank target {}",
            k1 * (k1 - 1) / 2,
            piece_target(d, k1 - 1)
        ));
    prov.pieces = route.pieces;
    Decomposition::new(3, d, route.terms, prov)
}

/// Decomposition of a ternary form of odd degree `d ≥ 5` with at most
/// `(d² − 1)/2` summands.
pub fn decompose_ternary_odd(f: &Form<Rational>, seed: u64) -> Result<Decomposition> {
    check_ternary(f)?;
    let d = f.degree();
    if d < 5 || d.is_multiple_of(2) {
        return Err(Error::DegreeOutOfRange(format!(
            "odd degree at least 5 required, got {d}"
        )));
    }
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    let dec = by_lines(f, seed, "decompose_ternary_odd")?;
    if dec.len() > odd_degree_bound(d) {
        return Err(Error::retry(
            "decompose_ternary_odd",
            format!(
                "{} terms exceed the bound {}",
                dec.len(),
                odd_degree_bound(d)
            ),
        ));
    }
    Ok(dec)
}

/// Decomposition of any nonzero ternary form: linear forms directly,
/// quadrics by diagonalization, higher degrees by splitting along lines.
pub fn decompose_ternary(f: &Form<Rational>, seed: u64) -> Result<Decomposition> {
    check_ternary(f)?;
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    match f.degree() {
        0 => Err(Error::DegreeOutOfRange(
            "constant forms have no decomposition".into(),
        )),
        1 => {
            let point: Vec<Complex> = f.coeffs().iter().map(|c| c.to_complex()).collect();
            let prov = Provenance::new("decompose_ternary", seed).route("linear form");
            Decomposition::new(
                3,
                1,
                vec![Term {
                    coeff: Complex::one(),
                    point,
                }],
                prov,
            )
        }
        2 => {
            let mut dec = decompose_quadric(f)?;
            dec.provenance.seed = seed;
            Ok(dec)
        }
        _ => by_lines(f, seed, "decompose_ternary"),
    }
}
