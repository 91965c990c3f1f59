//! Decompositions, their verification, and JSON certificates.

use serde::{Deserialize, Serialize};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::apolarity::{catalecticant_ranks, rank_lower_bound};
use crate::avoidance::AvoidanceSet;
use crate::binary::decompose_binary;
use crate::error::{Error, Result};
use crate::form::{parse_form_with_degree, power_of_linear, Form};
use crate::point::{distance, min_pairwise_distance, normalize_complex, DISTINCT_TOL};
use crate::scalar::{Complex, Rational, Scalar};
use crate::ternary::{
    decompose_ternary, essential_reduction, free_decomposition, quartic_decompose_open,
};

/// Library version embedded in certificates.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// A term whose largest coefficient is at most this fraction of `‖f‖∞`
/// counts as a zero term.
pub const COEFF_ZERO_TOL: f64 = 1e-14;

/// `λ(p·x)^d` is numerically zero next to a form of max-norm `scale`.
pub fn negligible_term(t: &Term, d: usize, scale: f64) -> bool {
    let p = t.point.iter().map(|c| c.norm()).fold(0.0, f64::max);
    t.coeff.norm() * p.powi(d as i32) <= COEFF_ZERO_TOL * scale
}

/// Sums terms on coinciding points into one term on the first of them.
/// Sums that cancel are dropped.
pub(crate) fn merge_coincident(terms: Vec<Term>, d: usize, scale: f64) -> Vec<Term> {
    let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged
            .iter_mut()
            .find(|m| distance(&m.point, &t.point) <= DISTINCT_TOL)
        {
            Some(m) => {
                let norm: f64 = m.point.iter().map(|c| c.norm_sqr()).sum();
                let inner: Complex = m
                    .point
                    .iter()
                    .zip(&t.point)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                m.coeff += t.coeff * (inner / norm).powi(d as i32);
            }
            None => merged.push(t),
        }
    }
    merged.retain(|t| !negligible_term(t, d, scale));
    merged
}

const BRACKET_TOL: f64 = 1e-9;
const BRACKET_STARTS: usize = 12;

/// One summand `coeff · (Σ pointᵢ xᵢ)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Complex,
    pub point: Vec<Complex>,
}

/// Data about one binary piece of a ternary decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    /// The line carrying the piece, as dual coordinates.
    pub line: Vec<Complex>,
    pub border_rank: usize,
    pub rank: usize,
    pub size: usize,
}

/// How a decomposition was produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub op: String,
    pub seed: u64,
    pub routes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<Piece>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(op: &str, seed: u64) -> Self {
        Provenance {
            op: op.to_string(),
            seed,
            ..Provenance::default()
        }
    }

    pub fn route(mut self, r: impl Into<String>) -> Self {
        self.routes.push(r.into());
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }
}

/// `f = Σ λᵢ lᵢ^d` with explicit coefficients and normalized points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub num_vars: usize,
    pub degree: usize,
    pub terms: Vec<Term>,
    pub provenance: Provenance,
}

impl Decomposition {
    /// Builds a decomposition, normalizing every point so that its largest
    /// coordinate is 1 and absorbing the scale into the coefficient.
    pub fn new(
        num_vars: usize,
        degree: usize,
        terms: Vec<Term>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            if t.point.len() != num_vars {
                return Err(Error::Dimension("term point has wrong length".into()));
            }
            let (p, s) = normalize_complex(&t.point)
                .ok_or_else(|| Error::InvalidPoint("zero or non-finite point".into()))?;
            let coeff = t.coeff * s.powu(degree as u32);
            if !coeff.re.is_finite() || !coeff.im.is_finite() {
                return Err(Error::NonFinite("decomposition coefficient".into()));
            }
            out.push(Term { coeff, point: p });
        }
        Ok(Decomposition {
            num_vars,
            degree,
            terms: out,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn points(&self) -> Vec<Vec<Complex>> {
        self.terms.iter().map(|t| t.point.clone()).collect()
    }

    /// `Σ λᵢ lᵢ^d` expanded.
    pub fn to_form(&self) -> Form<Complex> {
        let mut acc = Form::zero(self.num_vars, self.degree);
        for t in &self.terms {
            let p = power_of_linear(&t.point, &t.coeff, self.degree).expect("normalized point");
            acc = acc.add(&p).expect("same space");
        }
        acc
    }

    /// `‖f − Σ λᵢ lᵢ^d‖∞ / max(1, ‖f‖∞)`, computed in floating point.
    pub fn residual<S: Scalar>(&self, f: &Form<S>) -> Result<f64> {
        if f.num_vars() != self.num_vars || f.degree() != self.degree {
            return Err(Error::Dimension(format!(
                "decomposition is for (n={}, d={}), form is (n={}, d={})",
                self.num_vars,
                self.degree,
                f.num_vars(),
                f.degree()
            )));
        }
        let fc = f.to_complex();
        let diff = fc.sub(&self.to_form())?;
        Ok(diff.norm_inf() / fc.norm_inf().max(1.0))
    }
}

/// A claimed upper bound for the decomposition size and where it comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: usize,
    pub source_tag: String,
}

impl Bound {
    pub fn new(value: usize, source_tag: impl Into<String>) -> Self {
        Bound {
            value,
            source_tag: source_tag.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Values of the avoidance generators at every point of the decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceReport {
    pub generators: Vec<String>,
    /// `evaluations[i][j]`: relative value of generator `j` at point `i`.
    pub evaluations: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub input: String,
    pub n: usize,
    pub d: usize,
    pub terms: Vec<Term>,
    pub residual: f64,
    pub cat_ranks: Vec<(usize, usize)>,
    pub bound: Option<Bound>,
    pub avoidance: Option<AvoidanceReport>,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub version: String,
    pub tol: f64,
    pub valid: bool,
    pub provenance: Provenance,
}

/// Inputs to [`verify_with`] beyond the form and the decomposition.
#[derive(Clone, Debug)]
pub struct VerifyOptions<'a> {
    pub tol: f64,
    pub avoid: Option<&'a AvoidanceSet>,
    pub bound: Option<Bound>,
}

impl Default for VerifyOptions<'_> {
    fn default() -> Self {
        VerifyOptions {
            tol: DEFAULT_TOL,
            avoid: None,
            bound: None,
        }
    }
}

/// Verifies `dec` against `f` at tolerance `tol`.
pub fn verify_decomposition(
    f: &Form<Rational>,
    dec: &Decomposition,
    tol: f64,
) -> Result<Certificate> {
    verify_with(
        f,
        dec,
        &VerifyOptions {
            tol,
            ..VerifyOptions::default()
        },
    )
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        detail,
    }
}

/// Full verification: residual, distinct points, nonzero coefficients, and,
/// when given, avoidance and the size bound. The certificate is valid iff
/// every check passes.
pub fn verify_with(
    f: &Form<Rational>,
    dec: &Decomposition,
    opts: &VerifyOptions<'_>,
) -> Result<Certificate> {
    let residual = dec.residual(f)?;
    let mut checks = Vec::new();
    checks.push(check(
        "residual",
        residual <= opts.tol,
        format!("{residual:.3e} (tolerance {:.1e})", opts.tol),
    ));
    let points = dec.points();
    let min_dist = min_pairwise_distance(&points);
    checks.push(check(
        "distinct_points",
        min_dist > DISTINCT_TOL,
        format!("minimum pairwise distance {min_dist:.3e}"),
    ));
    let scale = f.norm_inf();
    let min_coeff = dec
        .terms
        .iter()
        .map(|t| t.coeff.norm())
        .fold(f64::INFINITY, f64::min);
    let coeffs_ok = dec
        .terms
        .iter()
        .all(|t| !negligible_term(t, dec.degree, scale));
    checks.push(check(
        "nonzero_coefficients",
        coeffs_ok,
        if dec.terms.is_empty() {
            "no terms".to_string()
        } else {
            format!("smallest |coefficient| {min_coeff:.3e}")
        },
    ));
    let avoidance = opts.avoid.map(|x| {
        let evaluations: Vec<Vec<f64>> = points.iter().map(|p| x.evaluations(p)).collect();
        let hits = points.iter().filter(|p| x.contains(p)).count();
        checks.push(check(
            "avoidance",
            hits == 0,
            format!("{hits} of {} points lie in the avoidance set", points.len()),
        ));
        AvoidanceReport {
            generators: x.generators().iter().map(|g| g.to_string()).collect(),
            evaluations,
        }
    });
    if let Some(b) = &opts.bound {
        checks.push(check(
            "size_bound",
            dec.len() <= b.value,
            format!("{} terms, bound {}", dec.len(), b.value),
        ));
    }
    let valid = checks.iter().all(|c| c.pass);
    Ok(Certificate {
        input: f.to_string(),
        n: f.num_vars(),
        d: f.degree(),
        terms: dec.terms.clone(),
        residual,
        cat_ranks: catalecticant_ranks(f),
        bound: opts.bound.clone(),
        avoidance,
        checks,
        seed: dec.provenance.seed,
        version: VERSION.to_string(),
        tol: opts.tol,
        valid,
        provenance: dec.provenance.clone(),
    })
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            pos: e.column(),
            msg: format!("certificate JSON: {e}"),
        })
    }

    /// Rebuilds the input, decomposition and avoidance set from the
    /// certificate and runs the verification again.
    pub fn replay(&self) -> Result<Certificate> {
        let f = parse_form_with_degree(&self.input, self.n, Some(self.d))?;
        let dec = Decomposition {
            num_vars: self.n,
            degree: self.d,
            terms: self.terms.clone(),
            provenance: self.provenance.clone(),
        };
        let avoid = match &self.avoidance {
            Some(a) => Some(AvoidanceSet::parse(&a.generators.join("\n"), self.n)?),
            None => None,
        };
        verify_with(
            &f,
            &dec,
            &VerifyOptions {
                tol: self.tol,
                avoid: avoid.as_ref(),
                bound: self.bound.clone(),
            },
        )
    }
}

/// Lower and upper bounds for the Waring rank of a form, with a
/// decomposition of size `upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankBracket {
    pub lower: usize,
    pub upper: usize,
    pub witness: Decomposition,
}

/// Brackets the rank of `f` in at most three variables. The lower end is
/// the largest catalecticant rank; the upper end is the smallest
/// decomposition found, which is exact for binary forms.
pub fn rank_bracket(f: &Form<Rational>, seed: u64) -> Result<RankBracket> {
    let n = f.num_vars();
    if n == 0 || n > 3 {
        return Err(Error::Unsupported(format!(
            "rank bracket for {n} variables"
        )));
    }
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    let lower = rank_lower_bound(f)?;
    let witness = match n {
        1 => {
            let coeff = f.coeffs()[0].to_complex();
            let prov = Provenance::new("rank_bracket", seed).route("monomial");
            Decomposition::new(
                1,
                f.degree(),
                vec![Term {
                    coeff,
                    point: vec![Complex::new(1.0, 0.0)],
                }],
                prov,
            )?
        }
        2 => decompose_binary(f, seed)?,
        _ => ternary_witness(f, lower, seed)?,
    };
    Ok(RankBracket {
        lower,
        upper: witness.len(),
        witness,
    })
}

fn ternary_witness(f: &Form<Rational>, lower: usize, seed: u64) -> Result<Decomposition> {
    let d = f.degree();
    let red = essential_reduction(f)?;
    if red.basis.len() < 3 {
        let inner = rank_bracket(&red.reduced, seed)?.witness;
        let prov = inner
            .provenance
            .clone()
            .note("reduced to the essential variables");
        return Decomposition::new(3, d, red.lift_terms(inner.terms), prov);
    }
    let mut best = match d {
        4 => quartic_decompose_open(f, &AvoidanceSet::empty(3), seed)?,
        _ => decompose_ternary(f, seed)?,
    };
    if d >= 3 && best.len() > lower {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for size in lower..best.len() {
            if let Some(terms) = free_decomposition(f, size, BRACKET_STARTS, BRACKET_TOL, &mut rng)
            {
                let prov = Provenance::new("rank_bracket", seed)
                    .route("point search")
                    .note(format!("improves the {}-term route", best.len()));
                best = Decomposition::new(3, d, terms, prov)?;
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::parse_form;

    fn c(v: f64) -> Complex {
        Complex::new(v, 0.0)
    }

    #[test]
    fn coincident_terms_merge() {
        let terms = vec![
            Term {
                coeff: c(2.0),
                point: vec![c(1.0), c(-1.0)],
            },
            Term {
                coeff: c(1.0),
                point: vec![c(0.0), c(1.0)],
            },
            Term {
                coeff: c(3.0),
                point: vec![c(-2.0), c(2.0)],
            },
        ];
        let merged = merge_coincident(terms, 3, 1.0);
        assert_eq!(merged.len(), 2);
        // 2 (x0 - x1)^3 + 3 (-2)^3 (x0 - x1)^3
        assert!((merged[0].coeff - c(-22.0)).norm() < 1e-12);
        let cancel = vec![
            Term {
                coeff: c(1.0),
                point: vec![c(1.0), c(0.0)],
            },
            Term {
                coeff: c(1.0),
                point: vec![c(-1.0), c(0.0)],
            },
        ];
        assert!(merge_coincident(cancel, 3, 1.0).is_empty());
    }

    fn two_terms() -> Decomposition {
        Decomposition::new(
            2,
            4,
            vec![
                Term {
                    coeff: c(1.0),
                    point: vec![c(1.0), c(0.0)],
                },
                Term {
                    coeff: c(1.0),
                    point: vec![c(0.0), c(1.0)],
                },
            ],
            Provenance::new("test", 0),
        )
        .unwrap()
    }

    #[test]
    fn exact_power_sum_is_valid() {
        let f = parse_form("x0^4 + x1^4", 2).unwrap();
        let cert = verify_decomposition(&f, &two_terms(), DEFAULT_TOL).unwrap();
        assert!(cert.valid);
        assert_eq!(cert.residual, 0.0);
    }

    #[test]
    fn perturbed_coefficient_is_invalid() {
        let f = parse_form("x0^4 + x1^4", 2).unwrap();
        let mut dec = two_terms();
        dec.terms[0].coeff += c(1e-3);
        let cert = verify_decomposition(&f, &dec, DEFAULT_TOL).unwrap();
        assert!(!cert.valid);
        assert!((cert.residual - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn normalization_absorbs_scale() {
        let dec = Decomposition::new(
            2,
            3,
            vec![Term {
                coeff: c(1.0),
                point: vec![c(2.0), c(1.0)],
            }],
            Provenance::default(),
        )
        .unwrap();
        assert_eq!(dec.terms[0].point, vec![c(1.0), c(0.5)]);
        assert_eq!(dec.terms[0].coeff, c(8.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let f = parse_form("x0^3", 2).unwrap();
        assert!(matches!(
            verify_decomposition(&f, &two_terms(), DEFAULT_TOL),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn json_round_trip_and_replay() {
        let f = parse_form("x0^4 + x1^4", 2).unwrap();
        let x = AvoidanceSet::parse("x0 - x1", 2).unwrap();
        let cert = verify_with(
            &f,
            &two_terms(),
            &VerifyOptions {
                tol: 1e-9,
                avoid: Some(&x),
                bound: Some(Bound::new(2, "test bound")),
            },
        )
        .unwrap();
        assert!(cert.valid);
        let text = cert.to_json();
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, cert);
        assert_eq!(back.replay().unwrap(), cert);
        assert!(text.contains("\"coeff\": [\n"));
    }

    #[test]
    fn bracket_is_exact_for_binary_forms() {
        for seed in 0..10 {
            let f = crate::form::random_form(seed, 2, 3 + seed as usize % 5, 6);
            let b = rank_bracket(&f, seed).unwrap();
            assert_eq!(b.upper, crate::binary::rank_binary(&f).unwrap());
            assert!(b.lower <= b.upper);
            assert!(b.witness.residual(&f).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn bracket_for_sum_of_three_powers() {
        let f = parse_form("x0^4 + x1^4 + x2^4", 3).unwrap();
        let b = rank_bracket(&f, 0).unwrap();
        assert_eq!(b.lower, 3);
        assert!(b.upper <= 8);
        assert_eq!(b.upper, 3);
    }

    #[test]
    fn bracket_for_ternary_forms() {
        let f = crate::form::random_form(4, 3, 5, 5);
        let b = rank_bracket(&f, 4).unwrap();
        assert!(
            b.lower <= b.upper && b.upper <= 12,
            "{} {}",
            b.lower,
            b.upper
        );
        assert!(verify_decomposition(&f, &b.witness, 1e-7).unwrap().valid);
        let g = parse_form("x0^3 + 3*x0^2*x1", 3).unwrap();
        let b = rank_bracket(&g, 1).unwrap();
        assert!(b.lower <= b.upper);
        assert!(verify_decomposition(&g, &b.witness, 1e-7).unwrap().valid);
        let u = parse_form("5*x0^3", 1).unwrap();
        assert_eq!(rank_bracket(&u, 0).unwrap().upper, 1);
        assert!(matches!(
            rank_bracket(&Form::zero(3, 3), 0),
            Err(Error::ZeroForm)
        ));
        assert!(matches!(
            rank_bracket(&Form::zero(4, 3), 0),
            Err(Error::Unsupported(_))
        ));
    }
}
