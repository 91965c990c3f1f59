//! Homogeneous forms, dual forms and contraction.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::monomial::{count, index, monomials, multinomial};
use crate::scalar::{Complex, Rational, Scalar, FLOAT_ZERO_TOL};

/// Homogeneous polynomial of degree `d` in `n` variables, stored densely in
/// the monomial order of [`monomial::monomials`].
#[derive(Clone, Debug, PartialEq)]
pub struct Form<S> {
    n: usize,
    d: usize,
    coeffs: Vec<S>,
}

/// Element of the dual ring, acting on forms by contraction. Dual variable
/// `i` acts as `∂/∂xᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualForm<S>(pub Form<S>);

impl<S: Scalar> Form<S> {
    pub fn zero(n: usize, d: usize) -> Self {
        Form {
            n,
            d,
            coeffs: vec![S::zero(); count(n, d)],
        }
    }

    pub fn from_coeffs(n: usize, d: usize, coeffs: Vec<S>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension(
                "a form needs at least one variable".into(),
            ));
        }
        if coeffs.len() != count(n, d) {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for n={n}, d={d}, got {}",
                count(n, d),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("form coefficients".into()));
        }
        Ok(Form { n, d, coeffs })
    }

    /// `c · x^e`.
    pub fn monomial(e: &[usize], c: S) -> Self {
        let d = e.iter().sum();
        let mut f = Form::zero(e.len(), d);
        f.coeffs[index(e)] = c;
        f
    }

    /// The linear form `Σ cᵢ xᵢ`.
    pub fn linear(c: &[S]) -> Self {
        // Degree-1 monomials are ordered x0, x1, …, so coefficients map directly.
        Form {
            n: c.len(),
            d: 1,
            coeffs: c.to_vec(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, e: &[usize]) -> &S {
        &self.coeffs[index(e)]
    }

    /// Nonzero `(exponents, coefficient)` pairs in basis order.
    pub fn terms(&self) -> Vec<(Vec<usize>, S)> {
        monomials(self.n, self.d)
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect()
    }

    /// Largest coefficient modulus.
    pub fn norm_inf(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    /// All coefficients zero (exact) or below tolerance (float).
    pub fn is_zero(&self) -> bool {
        if S::EXACT {
            self.coeffs.iter().all(|c| c.is_zero())
        } else {
            self.norm_inf() <= FLOAT_ZERO_TOL
        }
    }

    /// Zero relative to `scale`, i.e. every coefficient negligible against it.
    pub fn is_negligible(&self, scale: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(scale))
    }

    pub fn scale(&self, c: &S) -> Self {
        Form {
            n: self.n,
            d: self.d,
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::Dimension(format!(
                "forms live in different spaces: (n={}, d={}) vs (n={}, d={})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Form {
            n: self.n,
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Form {
            n: self.n,
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    /// Polynomial product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(
                "product of forms in different rings".into(),
            ));
        }
        let mut out: Form<S> = Form::zero(self.n, self.d + other.d);
        let ma = monomials(self.n, self.d);
        let mb = monomials(self.n, other.d);
        let mut e = vec![0; self.n];
        for (ea, a) in ma.iter().zip(&self.coeffs) {
            if a.is_zero() {
                continue;
            }
            for (eb, b) in mb.iter().zip(&other.coeffs) {
                if b.is_zero() {
                    continue;
                }
                for i in 0..self.n {
                    e[i] = ea[i] + eb[i];
                }
                let k = index(&e);
                out.coeffs[k] = out.coeffs[k].clone() + a.clone() * b.clone();
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Form::monomial(&vec![0; self.n], S::one());
        for _ in 0..k {
            acc = acc.mul(self).expect("same ring");
        }
        acc
    }

    /// Value at a point.
    pub fn evaluate(&self, p: &[S]) -> Result<S> {
        if p.len() != self.n {
            return Err(Error::Dimension(
                "point has wrong number of coordinates".into(),
            ));
        }
        let mons = monomials(self.n, self.d);
        let mut acc = S::zero();
        for (e, c) in mons.iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (x, &k) in p.iter().zip(e) {
                for _ in 0..k {
                    term = term * x.clone();
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Value at a complex point (converting coefficients to floats).
    pub fn evaluate_complex(&self, p: &[Complex]) -> Result<Complex> {
        if p.len() != self.n {
            return Err(Error::Dimension(
                "point has wrong number of coordinates".into(),
            ));
        }
        let mons = monomials(self.n, self.d);
        let mut acc = Complex::new(0.0, 0.0);
        for (e, c) in mons.iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mut term = c.to_complex();
            for (x, &k) in p.iter().zip(e) {
                term *= x.powu(k as u32);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Substitutes `xᵢ ↦ images[i]`, all images being forms of a common
    /// degree `e` in `m` variables; the result has degree `d·e`.
    pub fn substitute(&self, images: &[Form<S>]) -> Result<Self> {
        if images.len() != self.n {
            return Err(Error::Dimension("one image per variable required".into()));
        }
        let m = images[0].n;
        let e = images[0].d;
        if images.iter().any(|g| g.n != m || g.d != e) {
            return Err(Error::Dimension(
                "substitution images must share n and degree".into(),
            ));
        }
        let powers: Vec<Vec<Form<S>>> = images
            .iter()
            .map(|g| {
                let mut v = vec![Form::monomial(&vec![0; m], S::one())];
                for k in 1..=self.d {
                    let next = v[k - 1].mul(g).expect("same ring");
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Form::zero(m, self.d * e);
        for (exps, c) in monomials(self.n, self.d).iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mut term = Form::monomial(&vec![0; m], c.clone());
            for (i, &k) in exps.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&powers[i][k])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Converts coefficients to another backend.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Form<T> {
        Form {
            n: self.n,
            d: self.d,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn to_complex(&self) -> Form<Complex> {
        self.map(|c| c.to_complex())
    }

    /// Exact copy, if the backend is exact.
    pub fn to_rational(&self) -> Option<Form<Rational>> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.to_rational())
            .collect::<Option<Vec<_>>>()?;
        Some(Form {
            n: self.n,
            d: self.d,
            coeffs,
        })
    }
}

impl<S: Scalar> DualForm<S> {
    pub fn zero(n: usize, d: usize) -> Self {
        DualForm(Form::zero(n, d))
    }

    /// The degree-one dual form `Σ cᵢ xⁱ`.
    pub fn linear(c: &[S]) -> Self {
        DualForm(Form::linear(c))
    }

    pub fn monomial(e: &[usize], c: S) -> Self {
        DualForm(Form::monomial(e, c))
    }

    pub fn degree(&self) -> usize {
        self.0.d
    }

    pub fn num_vars(&self) -> usize {
        self.0.n
    }

    pub fn as_form(&self) -> &Form<S> {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(DualForm(self.0.mul(&other.0)?))
    }

    /// Product of several dual forms; the empty product is the constant 1 in `n` variables.
    pub fn product(n: usize, factors: &[DualForm<S>]) -> Result<Self> {
        let mut acc = DualForm::monomial(&vec![0; n], S::one());
        for f in factors {
            acc = acc.mul(f)?;
        }
        Ok(acc)
    }
}

/// Applies `t` to `f` as a constant-coefficient differential operator.
pub fn contract<S: Scalar>(t: &DualForm<S>, f: &Form<S>) -> Result<Form<S>> {
    let (n, delta, d) = (f.n, t.0.d, f.d);
    if t.0.n != n {
        return Err(Error::Dimension(format!(
            "dual form has {} variables, form has {n}",
            t.0.n
        )));
    }
    if delta > d {
        return Err(Error::DegreeOutOfRange(format!(
            "cannot contract degree {delta} into degree {d}"
        )));
    }
    let mut out: Form<S> = Form::zero(n, d - delta);
    let tm = monomials(n, delta);
    let fm = monomials(n, d);
    let mut rem = vec![0; n];
    for (m, tc) in tm.iter().zip(&t.0.coeffs) {
        if tc.is_zero() {
            continue;
        }
        for (a, fc) in fm.iter().zip(&f.coeffs) {
            if fc.is_zero() || a.iter().zip(m).any(|(x, y)| x < y) {
                continue;
            }
            let mut falling = BigInt::one();
            for i in 0..n {
                rem[i] = a[i] - m[i];
                for j in 0..m[i] {
                    falling *= a[i] - j;
                }
            }
            let k = index(&rem);
            out.coeffs[k] =
                out.coeffs[k].clone() + tc.clone() * fc.clone() * S::from_bigint(&falling);
        }
    }
    Ok(out)
}

/// `λ · (Σ pᵢ xᵢ)^d` expanded in the monomial basis.
pub fn power_of_linear<S: Scalar>(p: &[S], lambda: &S, d: usize) -> Result<Form<S>> {
    if p.is_empty() {
        return Err(Error::InvalidPoint("empty coordinate vector".into()));
    }
    if S::EXACT && p.iter().all(|c| c.is_zero()) {
        return Err(Error::InvalidPoint("all coordinates are zero".into()));
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("point coordinates".into()));
    }
    let n = p.len();
    let coeffs = monomials(n, d)
        .iter()
        .map(|e| {
            let mut c = lambda.clone() * S::from_bigint(&multinomial(e));
            for (x, &k) in p.iter().zip(e) {
                for _ in 0..k {
                    c = c * x.clone();
                }
            }
            c
        })
        .collect();
    Ok(Form { n, d, coeffs })
}

/// Deterministic random form with integer coefficients in `[-height, height]`,
/// never identically zero.
pub fn random_form(seed: u64, n: usize, d: usize, height: i64) -> Form<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_form_with(&mut rng, n, d, height)
}

/// Like [`random_form`] but drawing from an existing generator.
pub fn random_form_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
    height: i64,
) -> Form<Rational> {
    let h = height.max(1);
    loop {
        let coeffs: Vec<Rational> = (0..count(n, d))
            .map(|_| Rational::from_integer(rng.gen_range(-h..=h).into()))
            .collect();
        let f = Form { n, d, coeffs };
        if !f.is_zero() {
            return f;
        }
    }
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

fn write_monomial(out: &mut String, e: &[usize]) {
    let mut first = true;
    for (i, &k) in e.iter().enumerate() {
        if k == 0 {
            continue;
        }
        if !first {
            out.push('*');
        }
        first = false;
        out.push_str(&format!("x{i}"));
        if k > 1 {
            out.push_str(&format!("^{k}"));
        }
    }
}

fn format_terms<S>(f: &Form<S>, coeff: impl Fn(&S) -> Option<(bool, String)>) -> String
where
    S: Scalar,
{
    let mut out = String::new();
    let is_const = f.d == 0;
    for (e, c) in monomials(f.n, f.d).iter().zip(&f.coeffs) {
        let Some((negative, magnitude)) = coeff(c) else {
            continue;
        };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if is_const {
            out.push_str(&magnitude);
        } else {
            if magnitude != "1" {
                out.push_str(&magnitude);
                out.push('*');
            }
            write_monomial(&mut out, e);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Form<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format_terms(self, |c| {
            if c.is_zero() {
                return None;
            }
            let a = c.abs();
            let mag = if a.denom().is_one() {
                a.numer().to_string()
            } else {
                format!("{}/{}", a.numer(), a.denom())
            };
            Some((c.is_negative(), mag))
        });
        f.write_str(&s)
    }
}

impl fmt::Display for Form<Complex> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format_terms(self, |c| {
            if c.norm() == 0.0 {
                return None;
            }
            if c.im == 0.0 {
                let mag = format!("{}", c.re.abs());
                Some((c.re < 0.0, mag))
            } else {
                Some((false, format!("({}{:+}i)", c.re, c.im)))
            }
        });
        f.write_str(&s)
    }
}

impl fmt::Display for DualForm<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            std::str::from_utf8(&self.s[start..self.pos]).ok()
        }
    }

    fn number(&mut self) -> Result<Rational> {
        let int = self.digits().ok_or_else(|| self.err("expected a number"))?;
        let mut value = Rational::from_integer(int.parse::<BigInt>().expect("digits"));
        if self.s.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("malformed decimal coefficient"));
            }
            let frac = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
            let num: BigInt = frac.parse().expect("digits");
            let den = BigInt::from(10).pow(frac.len() as u32);
            value += Rational::new(num, den);
        } else if self.peek() == Some(b'/') {
            self.pos += 1;
            let den = self
                .digits()
                .ok_or_else(|| self.err("malformed rational coefficient"))?;
            let den: BigInt = den.parse().expect("digits");
            if den.is_zero() {
                return Err(self.err("zero denominator"));
            }
            value /= Rational::from_integer(den);
        }
        Ok(value)
    }

    fn factor(&mut self, exps: &mut [usize]) -> Result<()> {
        if self.peek() != Some(b'x') {
            return Err(self.err("expected a variable x<i>"));
        }
        self.pos += 1;
        let at = self.pos;
        let idx: usize = self
            .digits()
            .ok_or_else(|| self.err("expected a variable index"))?
            .parse()
            .map_err(|_| self.err("variable index too large"))?;
        if idx >= exps.len() {
            return Err(Error::Parse {
                pos: at,
                msg: format!("unknown variable x{idx} (only {} variables)", exps.len()),
            });
        }
        let mut e = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            e = self
                .digits()
                .ok_or_else(|| self.err("expected an exponent"))?
                .parse()
                .map_err(|_| self.err("exponent too large"))?;
        }
        exps[idx] += e;
        Ok(())
    }

    fn term(&mut self, n: usize) -> Result<(Rational, Vec<usize>)> {
        let mut exps = vec![0; n];
        let mut coeff = Rational::one();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                coeff = self.number()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    self.factor(&mut exps)?;
                }
            }
            Some(b'x') => self.factor(&mut exps)?,
            _ => return Err(self.err("expected a term")),
        }
        while self.peek() == Some(b'*') {
            self.pos += 1;
            self.factor(&mut exps)?;
        }
        Ok((coeff, exps))
    }
}

/// Parses a form in `n` variables, inferring the degree from the first term.
///
/// Grammar: `term (('+'|'-') ['-'] term)*` with `term := [coeff '*'] factor ('*' factor)*`,
/// `factor := 'x' index ['^' exponent]` and `coeff := int | int '/' int | decimal`.
/// A bare coefficient is a degree-zero term. Terms that cancel leave the zero
/// form of the inferred degree.
pub fn parse_form(text: &str, n: usize) -> Result<Form<Rational>> {
    parse_form_with_degree(text, n, None)
}

/// Like [`parse_form`], but with an explicitly declared degree. The declared
/// degree must agree with every term; it is what makes an empty or fully
/// cancelling input meaningful.
pub fn parse_form_with_degree(
    text: &str,
    n: usize,
    degree: Option<usize>,
) -> Result<Form<Rational>> {
    if n == 0 {
        return Err(Error::Dimension(
            "a form needs at least one variable".into(),
        ));
    }
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
    };
    let mut terms: Vec<(Rational, Vec<usize>)> = Vec::new();
    let mut first = true;
    loop {
        let mut negative = false;
        match p.peek() {
            None if first && degree.is_some() => break,
            None if first => return Err(p.err("empty input")),
            None => break,
            Some(b'+') if !first => p.pos += 1,
            Some(b'-') => {
                p.pos += 1;
                negative = true;
            }
            Some(b'+') => p.pos += 1,
            Some(_) if first => {}
            Some(_) => return Err(p.err("expected '+' or '-'")),
        }
        if !first && p.peek() == Some(b'-') {
            p.pos += 1;
            negative = !negative;
        }
        let start = p.pos;
        let (c, e) = p.term(n)?;
        let d_term: usize = e.iter().sum();
        let expected = degree.or(terms.first().map(|(_, e0)| e0.iter().sum()));
        if let Some(d0) = expected {
            if d_term != d0 {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("non-homogeneous input: term of degree {d_term}, expected {d0}"),
                });
            }
        }
        terms.push((if negative { -c } else { c }, e));
        first = false;
    }
    let d = degree.unwrap_or_else(|| terms[0].1.iter().sum());
    let mut f = Form::zero(n, d);
    for (c, e) in terms {
        let k = index(&e);
        f.coeffs[k] += c;
    }
    Ok(f)
}
