//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p waring-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use waring_core::apolarity::{
    apolar_component, apolar_initial_degree, catalecticant_rank, essential_variables,
};
use waring_core::binary::{
    border_rank_binary, decompose_binary, decompose_binary_avoiding, generic_rank_in_subspace,
    is_squarefree, open_rank_binary, rank_binary, subspace_rank_bound,
};
use waring_core::certify::{verify_with, Bound, VerifyOptions};
use waring_core::form::{power_of_linear, random_form, random_form_with};
use waring_core::monomial::binomial;
use waring_core::ternary::{
    annihilating_lines, bound_b1, conic_pullback, decompose_ternary_odd, minimize_annihilating,
    odd_degree_bound, quartic_brk3_decompose, quartic_decompose_open, quartic_size_bound,
    split_on_lines, witness_avoidance, witness_quartic, QUARTIC_OPEN_BOUND,
};
use waring_core::{AvoidanceSet, Decomposition, Form, Rational, Scalar};

const TOL: f64 = 1e-7;

/// Collects failures of one criterion.
#[derive(Default)]
struct Tally {
    runs: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.runs += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.runs += 1;
        self.failures.push(what);
    }

    fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn summary(&self, extra: &str) -> String {
        if self.failures.is_empty() {
            format!("{} checks; {extra}", self.runs)
        } else {
            let shown: Vec<&str> = self.failures.iter().take(3).map(String::as_str).collect();
            format!(
                "{} of {} checks failed; {extra}; first: {}",
                self.failures.len(),
                self.runs,
                shown.join(" | ")
            )
        }
    }
}

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn nonzero(rng: &mut ChaCha8Rng, h: i64) -> Rational {
    loop {
        let c = Rational::random(rng, h);
        if !c.is_zero() {
            return c;
        }
    }
}

fn point(rng: &mut ChaCha8Rng, n: usize, h: i64) -> Vec<Rational> {
    loop {
        let p: Vec<Rational> = (0..n).map(|_| Rational::random(rng, h)).collect();
        if p.iter().any(|c| !c.is_zero()) {
            return p;
        }
    }
}

fn power(p: &[Rational], c: &Rational, d: usize) -> Form<Rational> {
    power_of_linear(p, c, d).expect("nonzero point")
}

fn certify(
    f: &Form<Rational>,
    dec: &Decomposition,
    avoid: Option<&AvoidanceSet>,
    bound: Option<Bound>,
) -> Result<(), String> {
    let cert = verify_with(
        f,
        dec,
        &VerifyOptions {
            tol: TOL,
            avoid,
            bound,
        },
    )
    .map_err(|e| e.to_string())?;
    if cert.valid {
        Ok(())
    } else {
        let failed: Vec<String> = cert
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        Err(failed.join(", "))
    }
}

/// Binary forms with a spread of border ranks.
fn binary_corpus() -> Vec<Form<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..200)
        .map(|i| {
            let d = 3 + i % 8;
            match i % 4 {
                0 => random_form_with(&mut rng, 2, d, 9),
                1 => {
                    let r = rng.gen_range(1..=d.div_ceil(2));
                    let mut f = Form::zero(2, d);
                    while f.is_zero() {
                        for _ in 0..r {
                            let p = point(&mut rng, 2, 9);
                            let c = nonzero(&mut rng, 9);
                            f = f.add(&power(&p, &c, d)).unwrap();
                        }
                    }
                    f
                }
                2 => {
                    let l = Form::linear(&point(&mut rng, 2, 9));
                    let m = Form::linear(&point(&mut rng, 2, 9));
                    l.pow(d - 1).mul(&m).unwrap()
                }
                _ => {
                    let j = rng.gen_range(1..=d / 2);
                    let l = Form::linear(&point(&mut rng, 2, 9));
                    l.pow(d - j)
                        .mul(&random_form_with(&mut rng, 2, j, 9))
                        .unwrap()
                }
            }
        })
        .collect()
}

fn random_points_set(rng: &mut ChaCha8Rng, count: usize, seed: u64) -> AvoidanceSet {
    let pts: Vec<Vec<Rational>> = (0..count).map(|_| point(rng, 2, 20)).collect();
    AvoidanceSet::from_points(&pts, seed).expect("proper point set")
}

fn random_line(rng: &mut ChaCha8Rng) -> AvoidanceSet {
    AvoidanceSet::line(&point(rng, 3, 9)).expect("nonzero line")
}

fn criterion_1(corpus: &[Form<Rational>]) -> (bool, String) {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases: Vec<Form<Rational>> = corpus.to_vec();
    cases.push(Form::monomial(&[7, 0], q(1)));
    cases.push(Form::monomial(&[3, 1], q(1)));
    for (i, f) in cases.iter().enumerate() {
        let d = f.degree();
        let b = border_rank_binary(f).unwrap();
        let b2 = apolar_initial_degree(f).unwrap();
        t.check(b == b2, || {
            format!("form {i}: border rank {b} vs initial degree {b2}")
        });
        let x = random_points_set(&mut rng, 10, i as u64);
        match decompose_binary_avoiding(f, &x, i as u64) {
            Ok(dec) => {
                t.check(dec.len() == d + 2 - b, || {
                    format!("form {i}: {} terms, expected {}", dec.len(), d + 2 - b)
                });
                let bound = Bound::new(d + 2 - b, "binary open rank d+2-b");
                if let Err(e) = certify(f, &dec, Some(&x), Some(bound)) {
                    t.fail(format!("form {i}: {e}"));
                }
            }
            Err(e) => t.fail(format!("form {i} ({f}): {e}")),
        }
    }
    let fixed = [
        (Form::monomial(&[7, 0], q(1)), 8),
        (Form::monomial(&[3, 1], q(1)), 4),
    ];
    for (f, want) in &fixed {
        let got = decompose_binary_avoiding(f, &AvoidanceSet::empty(2), 0).map(|d| d.len());
        t.check(got.as_ref().ok() == Some(want), || {
            format!("{f}: {got:?} terms, expected {want}")
        });
    }
    (
        t.passed(),
        t.summary(&format!("{} forms, 10-point avoidance sets", cases.len())),
    )
}

fn criterion_2(corpus: &[Form<Rational>]) -> (bool, String) {
    let mut t = Tally::default();
    let (mut squarefree, mut not_squarefree) = (0, 0);
    for (i, f) in corpus.iter().enumerate() {
        let d = f.degree();
        let b = border_rank_binary(f).unwrap();
        let r = rank_binary(f).unwrap();
        t.check(r == b || r == d + 2 - b, || {
            format!("form {i}: rank {r} with b = {b}, d = {d}")
        });
        if 2 * b < d + 2 {
            let g = apolar_component(f, b).unwrap();
            t.check(g.len() == 1, || {
                format!("form {i}: {} generators in degree {b}", g.len())
            });
            let sq = is_squarefree(g[0].as_form());
            if sq {
                squarefree += 1;
            } else {
                not_squarefree += 1;
            }
            let want = if sq { b } else { d + 2 - b };
            t.check(r == want, || {
                format!("form {i}: rank {r}, generator squarefree = {sq}")
            });
        }
    }
    for d in 3..=10 {
        let f = Form::monomial(&[d - 1, 1], q(1));
        let r = rank_binary(&f).unwrap();
        t.check(r == d, || format!("x0^{}*x1: rank {r}", d - 1));
        match decompose_binary(&f, d as u64) {
            Ok(dec) => {
                t.check(dec.len() == d, || {
                    format!("x0^{}*x1: {} terms", d - 1, dec.len())
                });
                if let Err(e) = certify(&f, &dec, None, None) {
                    t.fail(format!("x0^{}*x1: {e}", d - 1));
                }
            }
            Err(e) => t.fail(format!("x0^{}*x1: {e}", d - 1)),
        }
    }
    t.check(squarefree > 0 && not_squarefree > 0, || {
        "one branch never exercised".into()
    });
    let extra = format!("squarefree branch {squarefree}, non-squarefree branch {not_squarefree}, monomials d = 3..10");
    (t.passed(), t.summary(&extra))
}

fn criterion_3() -> (bool, String) {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 4..=8 {
        for k in 0..4 {
            let pts: Vec<Vec<Rational>> = loop {
                let pts: Vec<Vec<Rational>> = (0..3).map(|_| point(&mut rng, 2, 9)).collect();
                let distinct = (0..3).all(|i| {
                    (i + 1..3).all(|j| {
                        (pts[i][0].clone() * pts[j][1].clone()
                            - pts[i][1].clone() * pts[j][0].clone())
                            != Rational::zero()
                    })
                });
                if distinct {
                    break pts;
                }
            };
            let mut f = Form::zero(2, d);
            for p in &pts {
                f = f.add(&power(p, &nonzero(&mut rng, 9), d)).unwrap();
            }
            let r = rank_binary(&f).unwrap();
            t.check(r == 3, || {
                format!("d = {d}, case {k}: rank {r}, expected 3")
            });
            let o = open_rank_binary(&f).unwrap();
            t.check(o == d - 1, || {
                format!("d = {d}, case {k}: open rank {o}, expected {}", d - 1)
            });
            let x = random_points_set(&mut rng, 10, k);
            match decompose_binary_avoiding(&f, &x, k) {
                Ok(dec) => t.check(dec.len() == d - 1, || {
                    format!("d = {d}, case {k}: {} avoiding terms", dec.len())
                }),
                Err(e) => t.fail(format!("d = {d}, case {k}: {e}")),
            }
        }
    }
    (t.passed(), t.summary("degrees 4..8, four forms each"))
}

fn criterion_4() -> (bool, String) {
    let mut t = Tally::default();
    let mut seen = Vec::new();
    for (d, k) in [(8, 3), (9, 4), (7, 6)] {
        let bound = subspace_rank_bound(d, k);
        match generic_rank_in_subspace(d, k, 100, d as u64 * 10 + k as u64) {
            Ok(max) => {
                seen.push(format!("({d},{k}) max {max} <= {bound}"));
                t.check(max <= bound, || {
                    format!("(d, k) = ({d}, {k}): rank {max} exceeds {bound}")
                });
            }
            Err(e) => t.fail(format!("(d, k) = ({d}, {k}): {e}")),
        }
    }
    (t.passed(), t.summary(&seen.join(", ")))
}

fn odd_batch(t: &mut Tally, d: usize, count: u64, sizes: &mut Vec<usize>) {
    let bound = odd_degree_bound(d);
    for seed in 0..count {
        let f = random_form(1000 * d as u64 + seed, 3, d, 9);
        match decompose_ternary_odd(&f, seed) {
            Ok(dec) => {
                sizes.push(dec.len());
                t.check(dec.len() <= bound, || {
                    format!("degree {d}, seed {seed}: {} terms", dec.len())
                });
                let b = Bound::new(bound, "ternary odd degree (d^2-1)/2");
                if let Err(e) = certify(&f, &dec, None, Some(b)) {
                    t.fail(format!("degree {d}, seed {seed}: {e}"));
                }
                t.check(
                    dec.provenance
                        .routes
                        .iter()
                        .any(|r| r.starts_with("split on")),
                    || {
                        format!(
                            "degree {d}, seed {seed}: routes {:?}",
                            dec.provenance.routes
                        )
                    },
                );
            }
            Err(e) => t.fail(format!("degree {d}, seed {seed}: {e}")),
        }
        let lines = annihilating_lines(&f, &[], seed).map(|s| minimize_annihilating(&f, &s));
        match lines.and_then(|s| split_on_lines(&f.to_complex(), s.lines()).map(|sp| (s.len(), sp)))
        {
            Ok((k1, sp)) => {
                let want = binomial(k1, 2);
                t.check(sp.kernel_dim() == want, || {
                    format!(
                        "degree {d}, seed {seed}: split kernel {} on {k1} lines, expected {want}",
                        sp.kernel_dim()
                    )
                });
            }
            Err(e) => t.fail(format!("degree {d}, seed {seed}: split {e}")),
        }
    }
}

fn criterion_5() -> (bool, String) {
    let mut t = Tally::default();
    let (mut q5, mut q7) = (Vec::new(), Vec::new());
    odd_batch(&mut t, 5, 50, &mut q5);
    odd_batch(&mut t, 7, 25, &mut q7);
    let max = |v: &[usize]| v.iter().copied().max().unwrap_or(0);
    let extra = format!(
        "quintics max {} terms (bound 12), septics max {} terms (bound 24)",
        max(&q5),
        max(&q7)
    );
    (t.passed(), t.summary(&extra))
}

fn quartic_case(
    t: &mut Tally,
    label: &str,
    f: &Form<Rational>,
    x: &AvoidanceSet,
    seed: u64,
) -> Option<String> {
    match quartic_decompose_open(f, x, seed) {
        Ok(dec) => {
            t.check(dec.len() <= QUARTIC_OPEN_BOUND, || {
                format!("{label}: {} terms", dec.len())
            });
            if let Err(e) = certify(
                f,
                &dec,
                Some(x),
                Some(Bound::new(
                    QUARTIC_OPEN_BOUND,
                    "plane quartic open rank <= 8",
                )),
            ) {
                t.fail(format!("{label}: {e}"));
            }
            dec.provenance.routes.first().cloned()
        }
        Err(e) => {
            t.fail(format!("{label}: {e}"));
            None
        }
    }
}

fn criterion_6() -> (bool, String) {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut routes = [0usize; 3];
    for seed in 0..100 {
        let f = random_form(4000 + seed, 3, 4, 9);
        let x = random_line(&mut rng);
        if let Some(r) = quartic_case(&mut t, &format!("seed {seed}"), &f, &x, seed) {
            if let Some(i) = "abc".find(&r[..1]) {
                routes[i] += 1;
            }
        }
    }
    let one = Rational::one();
    let three_powers = [[1, 0, 0], [0, 1, 0], [1, 1, 1]]
        .iter()
        .map(|p| power(&p.map(q), &one, 4))
        .reduce(|a, b| a.add(&b).unwrap())
        .unwrap();
    let full = (0..)
        .map(|s| random_form(4500 + s, 3, 4, 9))
        .find(|f| catalecticant_rank(f, 2).unwrap() == 6)
        .unwrap();
    let fixtures = [
        ("x0^4", Form::monomial(&[4, 0, 0], one.clone()), 'a'),
        ("three powers", three_powers, 'b'),
        ("full rank", full, 'c'),
    ];
    let mut fixture_routes = Vec::new();
    for (label, f, want) in &fixtures {
        let x = random_line(&mut rng);
        let r = quartic_case(&mut t, label, f, &x, 0).unwrap_or_default();
        t.check(r.starts_with(*want), || {
            format!("{label}: route {r:?}, expected {want}")
        });
        fixture_routes.push(format!("{label} -> {r}"));
    }
    let extra = format!(
        "random routes a={} b={} c={}; fixtures {}",
        routes[0],
        routes[1],
        routes[2],
        fixture_routes.join(", ")
    );
    (t.passed(), t.summary(&extra))
}

fn criterion_7() -> (bool, String) {
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut made = 0;
    while made < 20 {
        let pts: Vec<Vec<Rational>> = (0..3).map(|_| point(&mut rng, 3, 9)).collect();
        let det = pts[0][0].clone()
            * (pts[1][1].clone() * pts[2][2].clone() - pts[1][2].clone() * pts[2][1].clone())
            - pts[0][1].clone()
                * (pts[1][0].clone() * pts[2][2].clone() - pts[1][2].clone() * pts[2][0].clone())
            + pts[0][2].clone()
                * (pts[1][0].clone() * pts[2][1].clone() - pts[1][1].clone() * pts[2][0].clone());
        if det.is_zero() {
            continue;
        }
        let seed = made as u64;
        made += 1;
        let f = pts
            .iter()
            .map(|p| power(p, &nonzero(&mut rng, 9), 4))
            .reduce(|a, b| a.add(&b).unwrap())
            .unwrap();
        let c2 = catalecticant_rank(&f, 2).unwrap();
        t.check(c2 == 3, || format!("case {seed}: catalecticant rank {c2}"));
        let x = random_line(&mut rng);
        match quartic_brk3_decompose(&f, &x, seed) {
            Ok(dec) => {
                t.check(dec.len() == 7, || {
                    format!("case {seed}: {} terms", dec.len())
                });
                let b = Bound::new(7, "border rank 3 plane quartic: seven points");
                if let Err(e) = certify(&f, &dec, Some(&x), Some(b)) {
                    t.fail(format!("case {seed}: {e}"));
                }
            }
            Err(e) => t.fail(format!("case {seed}: {e}")),
        }
        match conic_pullback(&f, seed) {
            Ok(pb) => {
                t.check(pb.border_rank == 3, || {
                    format!("case {seed}: octic border rank {}", pb.border_rank)
                });
                if let Some(g) = &pb.exact_octic {
                    let b = border_rank_binary(g).unwrap();
                    t.check(b == 3, || {
                        format!("case {seed}: exact octic border rank {b}")
                    });
                }
            }
            Err(e) => t.fail(format!("case {seed}: pullback {e}")),
        }
    }
    (t.passed(), t.summary("20 quartics spanned by three powers"))
}

fn criterion_8() -> (bool, String) {
    let mut t = Tally::default();
    let f = witness_quartic();
    let x = witness_avoidance();
    let ess = essential_variables(&f).unwrap();
    t.check(ess == 3, || format!("{ess} essential variables"));
    let c2 = catalecticant_rank(&f, 2).unwrap();
    t.check(c2 >= 4, || format!("catalecticant rank {c2}"));
    let mut tag = String::new();
    match quartic_decompose_open(&f, &x, 0) {
        Ok(dec) => {
            t.check(dec.len() == 8, || {
                format!("{} terms, expected 8", dec.len())
            });
            let bound = quartic_size_bound(&f, dec.len());
            tag = bound.source_tag.clone();
            t.check(tag.contains("not machine-checked"), || {
                format!("source tag {tag:?}")
            });
            if let Err(e) = certify(&f, &dec, Some(&x), Some(bound)) {
                t.fail(e);
            }
        }
        Err(e) => t.fail(e.to_string()),
    }
    (
        t.passed(),
        t.summary(&format!("{f} off x2 = 0; bound tag \"{tag}\"")),
    )
}

fn criterion_9() -> (bool, String) {
    let mut t = Tally::default();
    let b34 = bound_b1(3, 4).unwrap();
    let b35 = bound_b1(3, 5).unwrap();
    t.check(b34 == BigInt::from(8), || format!("bound(3,4) = {b34}"));
    t.check(b35 == BigInt::from(13), || format!("bound(3,5) = {b35}"));
    let mut rows = Vec::new();
    for d in (5..=101usize).step_by(2) {
        let b = bound_b1(3, d).unwrap();
        let odd = BigInt::from((d * d - 1) / 2);
        t.check(b > odd, || format!("d = {d}: {b} <= {odd}"));
        if [5, 7, 9, 51, 101].contains(&d) {
            rows.push(format!("d={d}: {b} > {odd}"));
        }
    }
    (
        t.passed(),
        t.summary(&format!("odd d in 5..=101, {}", rows.join(", "))),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> (bool, String) + 'a>);

fn main() -> ExitCode {
    let corpus = binary_corpus();
    let criteria: Vec<Criterion> = vec![
        ("binary open rank d+2-b", Box::new(|| criterion_1(&corpus))),
        ("binary rank dichotomy", Box::new(|| criterion_2(&corpus))),
        ("rank 3 binary open rank d-1", Box::new(criterion_3)),
        ("subspace rank sampling", Box::new(criterion_4)),
        ("ternary odd degree bound", Box::new(criterion_5)),
        ("quartics off a line", Box::new(criterion_6)),
        ("border rank 3 quartics", Box::new(criterion_7)),
        ("curvilinear witness", Box::new(criterion_8)),
        ("closed-form bound", Box::new(criterion_9)),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        all &= ok;
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{name}]: {verdict} ({:.1}s) {detail}",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
