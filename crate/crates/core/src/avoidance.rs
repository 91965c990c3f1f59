//! Closed subsets of projective space that decomposition points must avoid.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::form::{contract, parse_form, DualForm, Form};
use crate::point::{cross, distance, normalize_complex, rationalize_point, LineChart};
use crate::roots::binary_roots;
use crate::scalar::{Complex, Rational, Scalar};

/// Largest first-order distance `|G(p)| / ‖∇G(p)‖` at a unit point `p` for
/// which a generator `G` counts as vanishing there.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// The common zero locus of a list of forms. At least one generator is
/// nonzero, so the set is a proper subset.
#[derive(Clone, Debug, PartialEq)]
pub struct AvoidanceSet {
    n: usize,
    generators: Vec<Form<Rational>>,
    lines: Vec<Vec<Complex>>,
    gradients: Vec<Vec<Form<Complex>>>,
}

fn gradient(g: &Form<Rational>) -> Vec<Form<Complex>> {
    if g.degree() == 0 {
        return Vec::new();
    }
    let gc = g.to_complex();
    (0..g.num_vars())
        .map(|i| {
            let mut e = vec![Complex::new(0.0, 0.0); g.num_vars()];
            e[i] = Complex::new(1.0, 0.0);
            contract(&DualForm::linear(&e), &gc).expect("matching variables")
        })
        .collect()
}

impl AvoidanceSet {
    pub fn new(n: usize, generators: Vec<Form<Rational>>) -> Result<Self> {
        if generators.iter().any(|g| g.num_vars() != n) {
            return Err(Error::Dimension(format!(
                "avoidance generators must all have {n} variables"
            )));
        }
        if generators.iter().all(|g| g.is_zero()) {
            return Err(Error::Precondition(
                "the avoidance set must be proper (some generator nonzero)".into(),
            ));
        }
        let lines = if n == 3 {
            contained_lines(&generators)
        } else {
            Vec::new()
        };
        let gradients = generators.iter().map(gradient).collect();
        Ok(AvoidanceSet {
            n,
            generators,
            lines,
            gradients,
        })
    }

    /// The empty set, cut out by the constant 1.
    pub fn empty(n: usize) -> Self {
        AvoidanceSet {
            n,
            generators: vec![Form::monomial(&vec![0; n], Rational::from_i64(1))],
            lines: Vec::new(),
            gradients: vec![Vec::new()],
        }
    }

    /// Parses one generator per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let gens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| parse_form(l, n))
            .collect::<Result<Vec<_>>>()?;
        if gens.is_empty() {
            return Ok(AvoidanceSet::empty(n));
        }
        AvoidanceSet::new(n, gens)
    }

    /// A set containing the given points. For binary forms it is exactly the
    /// points; in the plane it is a finite superset cut out by three products
    /// of random lines through the points.
    pub fn from_points(points: &[Vec<Rational>], seed: u64) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Precondition("no points given".into()));
        };
        let n = first.len();
        if points
            .iter()
            .any(|p| p.len() != n || p.iter().all(|c| c.is_zero()))
        {
            return Err(Error::InvalidPoint(
                "points must be nonzero and of equal length".into(),
            ));
        }
        let one = Form::monomial(&vec![0; n], Rational::from_i64(1));
        match n {
            2 => {
                let mut g = one;
                for p in points {
                    let l = Form::linear(&[p[1].clone(), -p[0].clone()]);
                    g = g.mul(&l)?;
                }
                AvoidanceSet::new(2, vec![g])
            }
            3 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut gens = Vec::new();
                for _ in 0..3 {
                    let mut g = one.clone();
                    for p in points {
                        let l = loop {
                            let r: Vec<Rational> =
                                (0..3).map(|_| Rational::random(&mut rng, 9)).collect();
                            let l = cross(p, &r);
                            if l.iter().any(|c| !c.is_zero()) {
                                break l;
                            }
                        };
                        g = g.mul(&Form::linear(&l))?;
                    }
                    gens.push(g);
                }
                AvoidanceSet::new(3, gens)
            }
            _ => Err(Error::Unsupported(
                "point sets are supported for n = 2, 3".into(),
            )),
        }
    }

    /// The line `Σ lᵢ xᵢ = 0` in the plane.
    pub fn line(l: &[Rational]) -> Result<Self> {
        AvoidanceSet::new(l.len(), vec![Form::linear(l)])
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Form<Rational>] {
        &self.generators
    }

    /// Lines (as dual coordinate vectors) contained in the set; plane only.
    pub fn lines(&self) -> &[Vec<Complex>] {
        &self.lines
    }

    /// Relative values `|G(p)| / Σ|coeffs of G|` of every generator at the
    /// normalized point.
    pub fn evaluations(&self, p: &[Complex]) -> Vec<f64> {
        let Some((q, _)) = normalize_complex(p) else {
            return vec![0.0; self.generators.len()];
        };
        self.generators
            .iter()
            .map(|g| {
                let scale: f64 = g.coeffs().iter().map(|c| c.magnitude()).sum();
                if scale == 0.0 {
                    return 0.0;
                }
                g.evaluate_complex(&q)
                    .map(|v| v.norm() / scale)
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    /// First-order distances `|G(q)| / ‖∇G(q)‖` from the unit point `q` over
    /// `p` to each generator's zero locus. Euler's relation bounds them by
    /// `1 / deg G`; a nonzero constant gives infinity.
    pub fn distances(&self, p: &[Complex]) -> Vec<f64> {
        let norm = p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return vec![0.0; self.generators.len()];
        }
        let q: Vec<Complex> = p.iter().map(|c| c / norm).collect();
        self.generators
            .iter()
            .zip(&self.gradients)
            .map(|(g, grad)| {
                let value = g.evaluate_complex(&q).map(|v| v.norm()).unwrap_or(f64::NAN);
                if value == 0.0 {
                    return 0.0;
                }
                if grad.is_empty() {
                    return f64::INFINITY;
                }
                let slope = grad
                    .iter()
                    .map(|h| {
                        h.evaluate_complex(&q)
                            .map(|v| v.norm_sqr())
                            .unwrap_or(f64::NAN)
                    })
                    .sum::<f64>()
                    .sqrt();
                value / slope
            })
            .collect()
    }

    /// Whether every generator vanishes at `p`, in the sense that its
    /// first-order distance is at most [`MEMBERSHIP_TOL`].
    pub fn contains(&self, p: &[Complex]) -> bool {
        p.len() == self.n && self.distances(p).iter().all(|&v| v <= MEMBERSHIP_TOL)
    }

    /// Whether the whole line `Σ lᵢ xᵢ = 0` lies in the set.
    pub fn contains_line(&self, l: &[Complex]) -> bool {
        self.lines.iter().any(|m| distance(m, l) <= 1e-7)
    }

    /// The set pulled back along a parametrization of a line: binary
    /// coordinates `(s, t)` map to `s·u + t·v`.
    pub fn restricted_to(&self, chart: &LineChart<Complex>) -> impl Fn(&[Complex]) -> bool + '_ {
        let chart = chart.clone();
        move |st: &[Complex]| self.contains(&chart.embed(st))
    }
}

fn restriction_vanishes(g: &Form<Rational>, l: &[Complex]) -> bool {
    let Ok(chart) = LineChart::new(l) else {
        return false;
    };
    let scale: f64 = g.coeffs().iter().map(|c| c.magnitude()).sum();
    [(1.0, 0.3), (-0.7, 1.0), (0.45, -1.3), (1.1, 0.9)]
        .iter()
        .all(|&(s, t)| {
            let x = chart.embed(&[Complex::new(s, 0.0), Complex::new(t, 0.0)]);
            let (q, _) = normalize_complex(&x).expect("nonzero");
            g.evaluate_complex(&q)
                .map(|v| v.norm())
                .unwrap_or(f64::INFINITY)
                <= 1e-6 * scale
        })
}

/// Lines contained in the zero locus of a nonzero ternary form, found by
/// joining its intersections with two fixed generic lines.
fn lines_of(g: &Form<Rational>) -> Vec<Vec<Complex>> {
    if g.is_zero() || g.degree() == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x11e5);
    let meet = |m: &[Complex]| -> Vec<Vec<Complex>> {
        let chart = LineChart::new(m).expect("nonzero line");
        let restricted = g
            .to_complex()
            .substitute(&[
                Form::linear(&[chart.u[0], chart.v[0]]),
                Form::linear(&[chart.u[1], chart.v[1]]),
                Form::linear(&[chart.u[2], chart.v[2]]),
            ])
            .expect("three images");
        if restricted.norm_inf() <= 1e-12 * g.norm_inf() {
            return Vec::new();
        }
        binary_roots(&restricted)
            .map(|rs| rs.iter().map(|st| chart.embed(st)).collect())
            .unwrap_or_default()
    };
    let mut pick = || -> Vec<Complex> {
        (0..3)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect()
    };
    let (m1, m2) = (pick(), pick());
    let a = meet(&m1);
    let b = meet(&m2);
    let mut out: Vec<Vec<Complex>> = Vec::new();
    for p in &a {
        for q in &b {
            let l = cross(p, q);
            let Some((l, _)) = normalize_complex(&l) else {
                continue;
            };
            if out.iter().any(|m| distance(m, &l) <= 1e-7) {
                continue;
            }
            if restriction_vanishes(g, &l) {
                let l = match rationalize_point(&l, 1 << 20, 1e-10) {
                    Some(r) => r.iter().map(|c| c.to_complex()).collect(),
                    None => l,
                };
                out.push(l);
            }
        }
    }
    out
}

fn contained_lines(gens: &[Form<Rational>]) -> Vec<Vec<Complex>> {
    let Some(first) = gens.iter().find(|g| !g.is_zero()) else {
        return Vec::new();
    };
    lines_of(first)
        .into_iter()
        .filter(|l| {
            gens.iter()
                .all(|g| g.is_zero() || restriction_vanishes(g, l))
        })
        .collect()
}
