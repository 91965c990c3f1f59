//! Decompositions of plane quartics with at most eight points outside a
//! prescribed closed set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::affine::affine_search;
use super::brk3::brk3_terms;
use super::lines::{dual_conic_matrices, reducible_in_span, singular_members};
use super::odd::{essential_reduction, MERGE_TOL};
use super::split::split_on_lines;
use super::witness::witness_quartic;
use super::{
    annihilates, check_ternary, contraction_residual, is_not_square, normalized, off_sigma,
    product_of_lines, push_forward, quadric_matrix, random_rational_line, restrict_to_line, to_c,
};
use crate::apolarity::{catalecticant, catalecticant_rank, rank_lower_bound};
use crate::avoidance::AvoidanceSet;
use crate::binary::{border_rank_binary, decompose_minimal, decompose_open, ranks_binary};
use crate::certify::{Bound, Decomposition, Piece, Provenance, Term};
use crate::error::{Error, Result};
use crate::form::{contract, Form};
use crate::linalg::{determinant, smallest_singular};
use crate::point::{cross, distance, dot, min_pairwise_distance, LineChart, DISTINCT_TOL};
use crate::scalar::{Complex, Rational};

/// Size bound for quartic decompositions avoiding a closed set.
pub const QUARTIC_OPEN_BOUND: usize = 8;
/// Size reached for quartics of border rank three living on a forbidden
/// line; eight points do not suffice for them.
pub const CARRIER_FORBIDDEN_SIZE: usize = 9;

const TRIPLE_ATTEMPTS: usize = 256;
const CHART_STARTS: usize = 48;
const TUPLE_ATTEMPTS: usize = 256;

fn check_quartic(f: &Form<Rational>) -> Result<()> {
    check_ternary(f)?;
    if f.degree() != 4 {
        return Err(Error::DegreeOutOfRange(format!(
            "a quartic is required, got degree {}",
            f.degree()
        )));
    }
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    Ok(())
}

fn c_line(l: &[Rational]) -> Vec<Complex> {
    normalized(&to_c(l)).expect("nonzero line")
}

/// Lines `l⁰, l¹, l²` outside `sigma`, pairwise distinct and not through a
/// common point, with `l⁰l¹l² ⌟ f = 0` and `l¹l² ⌟ f` not a square.
pub(crate) fn predecomp_search<R: Rng + ?Sized>(
    f: &Form<Rational>,
    sigma: &[Vec<Complex>],
    rng: &mut R,
) -> Result<[Vec<Complex>; 3]> {
    let fc = f.to_complex();
    let q_of = |a: &[Complex], b: &[Complex]| -> Form<Complex> {
        contract(&product_of_lines(&[a.to_vec(), b.to_vec()]), &fc).expect("degree 4")
    };
    let mut last = String::from("no attempt");
    for attempt in 0..TRIPLE_ATTEMPTS {
        let h = 4 << (attempt / 32);
        let l1 = c_line(&random_rational_line(rng, h));
        if !off_sigma(&l1, sigma) {
            continue;
        }
        let m = c_line(&random_rational_line(rng, h));
        let n = c_line(&random_rational_line(rng, h));
        let qm = quadric_matrix(&q_of(&l1, &m));
        let qn = quadric_matrix(&q_of(&l1, &n));
        let mut pencil_points: Vec<Vec<Complex>> = Vec::new();
        let (sv, _) = smallest_singular(&qm);
        if sv[0] > 0.0 && sv[2] <= 1e-9 * sv[0] {
            pencil_points.push(m.clone());
        }
        for q in singular_members(&qm, &qn) {
            // Recover t from q = qm + t qn by least squares on the entries.
            let (mut num, mut den) = (Complex::new(0.0, 0.0), 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let b = *qn.get(i, j);
                    num += b.conj() * (q.get(i, j) - qm.get(i, j));
                    den += b.norm_sqr();
                }
            }
            if den == 0.0 {
                continue;
            }
            let t = num / den;
            let l2: Vec<Complex> = m.iter().zip(&n).map(|(a, b)| a + t * b).collect();
            if let Some(l2) = normalized(&l2) {
                pencil_points.push(l2);
            }
        }
        for l2 in pencil_points {
            if !off_sigma(&l2, sigma) || distance(&l1, &l2) <= DISTINCT_TOL {
                last = "second line is forbidden or repeated".into();
                continue;
            }
            let q = q_of(&l1, &l2);
            let (sv, l0) = smallest_singular(&quadric_matrix(&q));
            if sv[0] == 0.0 || sv[2] > 1e-7 * sv[0] {
                last = "pencil member is not singular".into();
                continue;
            }
            let Some(l0) = normalized(&l0) else { continue };
            if !off_sigma(&l0, sigma)
                || distance(&l0, &l1) <= DISTINCT_TOL
                || distance(&l0, &l2) <= DISTINCT_TOL
            {
                last = "third line is forbidden or repeated".into();
                continue;
            }
            if !is_not_square(&q) {
                last = "l1 l2 contraction is a square".into();
                continue;
            }
            let triple = [l0, l1.clone(), l2];
            if contraction_residual(&product_of_lines(&triple), &fc) > 1e-8 {
                last = "triple does not annihilate".into();
                continue;
            }
            let det = dot(&triple[0], &cross(&triple[1], &triple[2]));
            if det.norm() <= 1e-6 {
                last = "lines are concurrent".into();
                continue;
            }
            return Ok(triple);
        }
    }
    Err(Error::retry("annihilating line triple", last))
}

/// Three lines outside `sigma` whose product annihilates the quartic `f`,
/// with `l¹l² ⌟ f` not a square. Requires catalecticant rank at least 4.
pub fn quartic_predecomp(
    f: &Form<Rational>,
    sigma: &[Vec<Complex>],
    seed: u64,
) -> Result<[Vec<Complex>; 3]> {
    check_quartic(f)?;
    let lb = rank_lower_bound(f)?;
    if lb < 4 {
        return Err(Error::Precondition(format!(
            "catalecticant rank {lb} is below 4"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    predecomp_search(f, sigma, &mut rng)
}

struct Ctx<'a> {
    f: &'a Form<Rational>,
    fc: Form<Complex>,
    x: &'a AvoidanceSet,
    sigma: Vec<Vec<Complex>>,
}

struct Found {
    terms: Vec<Term>,
    pieces: Vec<Piece>,
    route: String,
}

impl Ctx<'_> {
    fn avoid_on<'c>(&'c self, chart: &'c LineChart<Complex>) -> impl Fn(&[Complex]) -> bool + 'c {
        move |st: &[Complex]| self.x.contains(&chart.embed(st))
    }

    fn admissible(&self, terms: &[Term]) -> std::result::Result<(), String> {
        self.admissible_sized(terms, QUARTIC_OPEN_BOUND)
    }

    fn admissible_sized(&self, terms: &[Term], bound: usize) -> std::result::Result<(), String> {
        if terms.len() > bound {
            return Err(format!("{} terms", terms.len()));
        }
        let pts: Vec<Vec<Complex>> = terms.iter().map(|t| t.point.clone()).collect();
        if min_pairwise_distance(&pts) <= DISTINCT_TOL {
            return Err("pieces share a point".into());
        }
        if pts.iter().any(|p| self.x.contains(p)) {
            return Err("a point lies in the avoidance set".into());
        }
        let dec = Decomposition::new(3, 4, terms.to_vec(), Provenance::default())
            .map_err(|e| e.to_string())?;
        let res = dec.residual(self.f).map_err(|e| e.to_string())?;
        if res > MERGE_TOL {
            return Err(format!("residual {res:.2e}"));
        }
        Ok(())
    }

    /// `f` lives on the single line `l = 0`.
    fn single_line<R: Rng + ?Sized>(&self, l: &[Complex], rng: &mut R) -> Result<Found> {
        let chart = LineChart::new(l)?;
        let g = restrict_to_line(&self.fc, &chart)
            .ok_or_else(|| Error::Inconsistent("form does not live on the line".into()))?;
        let b = border_rank_binary(&g)?;
        let (_, r) = ranks_binary(&g)?;
        let mut last = String::new();
        for _ in 0..8 {
            let t = decompose_open(&g, &self.avoid_on(&chart), rng, MERGE_TOL)?;
            let size = t.len();
            let terms = push_forward(t, &chart);
            match self.admissible(&terms) {
                Ok(()) => {
                    return Ok(Found {
                        terms,
                        pieces: vec![Piece {
                            line: chart.line.clone(),
                            border_rank: b,
                            rank: r,
                            size,
                        }],
                        route: "a: single line".into(),
                    })
                }
                Err(e) => last = e,
            }
        }
        Err(Error::retry("single-line piece", last))
    }

    fn two_lines<R: Rng + ?Sized>(
        &self,
        l0: &[Complex],
        l1: &[Complex],
        rng: &mut R,
    ) -> Result<Found> {
        for l in [l0, l1] {
            if annihilates(&[l.to_vec()], &self.fc) {
                return self.single_line(l, rng);
            }
        }
        let split = split_on_lines(&self.fc, &[l0.to_vec(), l1.to_vec()])?;
        let scale = kernel_scales(split.particular(), split.kernel(), self.fc.norm_inf());
        let mut last = String::from("no attempt");
        for attempt in 0..TUPLE_ATTEMPTS {
            let h = 4i64 << (attempt / 32);
            let c = Complex::new(rng.gen_range(-h..=h) as f64 / 4.0 * scale[0], 0.0);
            let pieces = split.sample(&[c])?;
            let mut terms = Vec::new();
            let mut meta = Vec::new();
            let mut ok = true;
            for (i, g) in pieces.iter().enumerate() {
                let b = match border_rank_binary(g) {
                    Ok(b) if b >= 2 => b,
                    Ok(_) => {
                        last = "piece of border rank 1".into();
                        ok = false;
                        break;
                    }
                    Err(e) => {
                        last = e.to_string();
                        ok = false;
                        break;
                    }
                };
                let chart = &split.charts()[i];
                match decompose_open(g, &self.avoid_on(chart), rng, MERGE_TOL) {
                    Ok(t) => {
                        let r = ranks_binary(g).map(|x| x.1).unwrap_or(0);
                        meta.push(Piece {
                            line: chart.line.clone(),
                            border_rank: b,
                            rank: r,
                            size: t.len(),
                        });
                        terms.extend(push_forward(t, chart));
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
            match self.admissible(&terms) {
                Ok(()) => {
                    return Ok(Found {
                        terms,
                        pieces: meta,
                        route: "a: two lines".into(),
                    })
                }
                Err(e) => last = e,
            }
        }
        Err(Error::retry("two-line split", last))
    }

    fn route_a<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Found> {
        let kernel = catalecticant(self.f, 2)?.kernel().to_vec();
        let basis = dual_conic_matrices(&kernel);
        let mut last = String::from("no reducible conic");
        for _ in 0..4 {
            let pair = reducible_in_span(&basis, &self.sigma, rng, |a, b| {
                annihilates(&[a.to_vec(), b.to_vec()], &self.fc)
            });
            let Some((l0, l1)) = pair else { continue };
            match self.two_lines(&l0, &l1, rng) {
                Ok(found) => return Ok(found),
                Err(e) => last = e.to_string(),
            }
        }
        Err(Error::retry("route a", last))
    }

    fn three_lines<R: Rng + ?Sized>(
        &self,
        lines: &[Vec<Complex>; 3],
        rng: &mut R,
    ) -> Result<Found> {
        for l in lines {
            if annihilates(std::slice::from_ref(l), &self.fc) {
                return self.single_line(l, rng);
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if annihilates(&[lines[i].clone(), lines[j].clone()], &self.fc) {
                let mut found = self.two_lines(&lines[i], &lines[j], rng)?;
                found.route = format!("c: {}", found.route.trim_start_matches("a: "));
                return Ok(found);
            }
        }
        let split = split_on_lines(&self.fc, lines)?;
        let pairs = split
            .pairs()
            .ok_or_else(|| Error::Precondition("the three lines are concurrent".into()))?
            .to_vec();
        let scales = kernel_scales(split.particular(), split.kernel(), self.fc.norm_inf());
        let mut last = String::from("no attempt");
        for attempt in 0..TUPLE_ATTEMPTS {
            let special = attempt % 3;
            let h = 4i64 << (attempt / 48);
            let touching: Vec<usize> = (0..3)
                .filter(|&m| pairs[m].0 == special || pairs[m].1 == special)
                .collect();
            let other = (0..3).find(|m| !touching.contains(m)).expect("three pairs");
            let (m1, m2) = (touching[0], touching[1]);
            let piece_at = |a: Complex, b: Complex| -> Form<Complex> {
                let mut c = vec![Complex::new(0.0, 0.0); 3];
                c[m1] = a;
                c[m2] = b;
                split.sample(&c).expect("three coefficients")[special].clone()
            };
            let det = |g: &Form<Complex>| -> Complex {
                determinant(catalecticant(g, 2).expect("quartic").matrix())
            };
            let (s1, s2) = (Complex::new(scales[m1], 0.0), Complex::new(scales[m2], 0.0));
            let zero = Complex::new(0.0, 0.0);
            let d00 = det(&piece_at(zero, zero));
            let d10 = det(&piece_at(s1, zero));
            let d01 = det(&piece_at(zero, s2));
            let d11 = det(&piece_at(s1, s2));
            let (c0, c1, c2, c3) = (d00, d10 - d00, d01 - d00, d11 - d10 - d01 + d00);
            let alpha = rng.gen_range(-h..=h) as f64 / 4.0;
            let den = c2 + c3 * alpha;
            let beta = if [c0, c1, c2, c3]
                .iter()
                .all(|c| c.norm() <= 1e-12 * d00.norm().max(1e-300))
            {
                Complex::new(rng.gen_range(-h..=h) as f64 / 4.0, 0.0)
            } else if den.norm() <= 1e-12 * (c0.norm() + c1.norm() * alpha.abs()) {
                last = "degenerate determinant locus".into();
                continue;
            } else {
                -(c0 + c1 * alpha) / den
            };
            let gamma = rng.gen_range(-h..=h) as f64 / 4.0;
            let mut coeffs = vec![zero; 3];
            coeffs[m1] = s1 * alpha;
            coeffs[m2] = s2 * beta;
            coeffs[other] = Complex::new(scales[other] * gamma, 0.0);
            let pieces = split.sample(&coeffs)?;
            match ranks_binary(&pieces[special]) {
                Ok((2, 2)) => {}
                Ok((b, r)) => {
                    last = format!("special piece has border rank {b}, rank {r}");
                    continue;
                }
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            }
            let mut terms = Vec::new();
            let mut meta = Vec::new();
            let mut ok = true;
            for (i, g) in pieces.iter().enumerate() {
                let (b, r) = match ranks_binary(g) {
                    Ok(x) => x,
                    Err(e) => {
                        last = e.to_string();
                        ok = false;
                        break;
                    }
                };
                if r > 3 {
                    last = format!("piece {i} has rank {r}");
                    ok = false;
                    break;
                }
                let chart = &split.charts()[i];
                match decompose_minimal(g, &self.avoid_on(chart), rng, MERGE_TOL) {
                    Ok(t) => {
                        meta.push(Piece {
                            line: chart.line.clone(),
                            border_rank: b,
                            rank: r,
                            size: t.len(),
                        });
                        terms.extend(push_forward(t, chart));
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
            match self.admissible(&terms) {
                Ok(()) => {
                    return Ok(Found {
                        terms,
                        pieces: meta,
                        route: "c: three lines".into(),
                    })
                }
                Err(e) => last = e,
            }
        }
        Err(Error::retry("three-line split", last))
    }

    /// Points found numerically in the chart off `l`, checked like every
    /// other route.
    fn affine<R: Rng + ?Sized>(&self, l: &[Complex], size: usize, rng: &mut R) -> Result<Found> {
        let terms = affine_search(&self.fc, l, size, CHART_STARTS, rng, |t| {
            self.admissible_sized(t, size).is_ok()
        })
        .ok_or_else(|| Error::retry("chart search", "no admissible solution"))?;
        Ok(Found {
            terms,
            pieces: Vec::new(),
            route: "c: chart off the carrier line".into(),
        })
    }

    /// The line carrying `f` when it has two essential variables.
    fn carrier(&self) -> Option<Vec<Complex>> {
        let red = essential_reduction(self.f).ok()?;
        if red.basis.len() != 2 {
            return None;
        }
        normalized(&cross(&to_c(&red.basis[0]), &to_c(&red.basis[1])))
    }

    fn route_c<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Found> {
        if let Some(l) = self.carrier().filter(|l| !off_sigma(l, &self.sigma)) {
            // Two cubics through the points meet in nine points off the
            // carrier line and none of them can be dropped, so eight points
            // are out of reach here.
            return self.affine(&l, CARRIER_FORBIDDEN_SIZE, rng);
        }
        let mut last = String::from("no triple");
        for _ in 0..4 {
            let triple = match predecomp_search(self.f, &self.sigma, rng) {
                Ok(t) => t,
                Err(e) => {
                    last = e.to_string();
                    break;
                }
            };
            match self.three_lines(&triple, rng) {
                Ok(found) => return Ok(found),
                Err(e) => last = e.to_string(),
            }
        }
        Err(Error::retry("route c", last))
    }
}

fn kernel_scales(
    particular: &[Form<Complex>],
    kernel: &[Vec<Form<Complex>>],
    fnorm: f64,
) -> Vec<f64> {
    let part = particular
        .iter()
        .map(|g| g.norm_inf())
        .fold(fnorm, f64::max);
    kernel
        .iter()
        .map(|v| {
            let k = v.iter().map(|g| g.norm_inf()).fold(0.0, f64::max);
            if k == 0.0 {
                0.0
            } else {
                part / k
            }
        })
        .collect()
}

/// Decomposition of a plane quartic with at most eight pairwise distinct
/// points, none in `x`. The one exception is a quartic of border rank three
/// in two essential variables whose line lies in `x`: it gets
/// [`CARRIER_FORBIDDEN_SIZE`] points.
pub fn quartic_decompose_open(
    f: &Form<Rational>,
    x: &AvoidanceSet,
    seed: u64,
) -> Result<Decomposition> {
    check_quartic(f)?;
    if x.num_vars() != 3 {
        return Err(Error::Dimension(
            "avoidance set must live in the plane".into(),
        ));
    }
    let ctx = Ctx {
        f,
        fc: f.to_complex(),
        x,
        sigma: x.lines().to_vec(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cat = catalecticant_rank(f, 2)?;
    let mut notes = vec![format!("catalecticant rank {cat}")];
    let found = match cat {
        0..=2 => ctx.route_a(&mut rng)?,
        3 => match brk3_terms(f, &|p| x.contains(p), &mut rng) {
            Ok((terms, note)) => match ctx.admissible(&terms) {
                Ok(()) => {
                    notes.push(note);
                    Found {
                        terms,
                        pieces: Vec::new(),
                        route: "b: conic".into(),
                    }
                }
                Err(e) => {
                    notes.push(format!("conic route rejected ({e}), fell back"));
                    ctx.route_c(&mut rng)?
                }
            },
            Err(e) => {
                notes.push(format!("conic route failed ({e}), fell back"));
                ctx.route_c(&mut rng)?
            }
        },
        _ => ctx.route_c(&mut rng)?,
    };
    let mut prov = Provenance::new("quartic_decompose_open", seed).route(found.route);
    prov.pieces = found.pieces;
    prov.notes = notes;
    Decomposition::new(3, 4, found.terms, prov)
}

/// The size bound a quartic decomposition of `size` points is checked
/// against. For the curvilinear witness the tag records that eight is also
/// a lower bound, proved by hand and not checked by this library.
pub fn quartic_size_bound(f: &Form<Rational>, size: usize) -> Bound {
    if size > QUARTIC_OPEN_BOUND {
        Bound::new(
            CARRIER_FORBIDDEN_SIZE,
            "border rank 3 quartic on a forbidden line: nine points",
        )
    } else if *f == witness_quartic() {
        Bound::new(
            QUARTIC_OPEN_BOUND,
            "curvilinear witness: open rank exactly 8 off its tangent line; upper bound certified, lower bound proved by hand and not machine-checked",
        )
    } else {
        Bound::new(QUARTIC_OPEN_BOUND, "plane quartic open rank <= 8")
    }
}
