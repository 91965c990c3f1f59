//! Writing a ternary form as a sum of binary forms on given lines.

use super::check_ternary;
use crate::error::{Error, Result};
use crate::form::{power_of_linear, Form};
use crate::linalg::Matrix;
use crate::monomial::{binomial, count};
use crate::point::{cross, LineChart};
use crate::scalar::Scalar;

/// All ways of writing `f = Σ fᵢ` with `fᵢ` a binary form on the line
/// `lⁱ = 0`, stored as one particular tuple plus a basis of the tuples
/// summing to zero. Binary pieces are in the coordinates of each line's
/// [`LineChart`].
#[derive(Clone, Debug)]
pub struct SplitProblem<S> {
    f: Form<S>,
    charts: Vec<LineChart<S>>,
    particular: Vec<Form<S>>,
    kernel: Vec<Vec<Form<S>>>,
    pairs: Option<Vec<(usize, usize)>>,
}

fn binary_monomial_images<S: Scalar>(chart: &LineChart<S>, d: usize) -> Vec<Vec<S>> {
    let images = [Form::linear(&chart.u), Form::linear(&chart.v)];
    (0..=d)
        .map(|j| {
            Form::monomial(&[d - j, j], S::one())
                .substitute(&images)
                .expect("binary substitution")
                .coeffs()
                .to_vec()
        })
        .collect()
}

/// Sets up the splitting of `f` along `lines` and checks that the space of
/// zero-sum tuples has dimension `C(k+1, 2)` for `k + 1` lines.
pub fn split_on_lines<S: Scalar>(f: &Form<S>, lines: &[Vec<S>]) -> Result<SplitProblem<S>> {
    check_ternary(f)?;
    if f.is_zero() {
        return Err(Error::ZeroForm);
    }
    if lines.is_empty() {
        return Err(Error::Precondition("at least one line is needed".into()));
    }
    let d = f.degree();
    let charts = lines
        .iter()
        .map(|l| LineChart::new(l))
        .collect::<Result<Vec<_>>>()?;
    let columns: Vec<Vec<S>> = charts
        .iter()
        .flat_map(|c| binary_monomial_images(c, d))
        .collect();
    let m = Matrix::from_columns(count(3, d), &columns);
    let x = m.solve(f.coeffs()).ok_or_else(|| {
        Error::Inconsistent("the form is not a sum of binary forms on these lines".into())
    })?;
    let to_tuple = |v: &[S]| -> Vec<Form<S>> {
        v.chunks(d + 1)
            .map(|c| Form::from_coeffs(2, d, c.to_vec()).expect("chunk of length d+1"))
            .collect()
    };
    let particular = to_tuple(&x);
    let null = m.nullspace();
    let k1 = lines.len();
    let expected = binomial(k1, 2);
    if null.len() != expected {
        return Err(Error::SplitDimension {
            expected,
            found: null.len(),
        });
    }
    let mut explicit = Vec::with_capacity(expected);
    let mut pairs = Vec::with_capacity(expected);
    for i in 0..k1 {
        for j in i + 1..k1 {
            let u = cross(&lines[i], &lines[j]);
            let mut tuple = vec![Form::zero(2, d); k1];
            tuple[i] = power_of_linear(&charts[i].chart(&u), &S::one(), d)?;
            tuple[j] = power_of_linear(&charts[j].chart(&u), &-S::one(), d)?;
            explicit.push(tuple);
            pairs.push((i, j));
        }
    }
    let flat: Vec<Vec<S>> = explicit
        .iter()
        .map(|t| t.iter().flat_map(|g| g.coeffs().iter().cloned()).collect())
        .collect();
    let independent = expected == 0 || Matrix::from_columns(k1 * (d + 1), &flat).rank() == expected;
    let (kernel, pairs) = if independent {
        (explicit, Some(pairs))
    } else {
        (null.iter().map(|v| to_tuple(v)).collect(), None)
    };
    Ok(SplitProblem {
        f: f.clone(),
        charts,
        particular,
        kernel,
        pairs,
    })
}

impl<S: Scalar> SplitProblem<S> {
    pub fn form(&self) -> &Form<S> {
        &self.f
    }

    pub fn charts(&self) -> &[LineChart<S>] {
        &self.charts
    }

    pub fn num_pieces(&self) -> usize {
        self.charts.len()
    }

    pub fn particular(&self) -> &[Form<S>] {
        &self.particular
    }

    /// Basis of the tuples summing to zero.
    pub fn kernel(&self) -> &[Vec<Form<S>>] {
        &self.kernel
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    /// The pair `(i, j)` behind each kernel vector `+u_ij^d` in slot `i`,
    /// `−u_ij^d` in slot `j`, when that basis is used.
    pub fn pairs(&self) -> Option<&[(usize, usize)]> {
        self.pairs.as_deref()
    }

    /// The tuple `particular + Σ cₘ kernelₘ`.
    pub fn sample(&self, coeffs: &[S]) -> Result<Vec<Form<S>>> {
        if coeffs.len() != self.kernel.len() {
            return Err(Error::Dimension(format!(
                "expected {} kernel coefficients, got {}",
                self.kernel.len(),
                coeffs.len()
            )));
        }
        let mut out = self.particular.clone();
        for (c, v) in coeffs.iter().zip(&self.kernel) {
            for (slot, g) in out.iter_mut().zip(v) {
                *slot = slot.add(&g.scale(c))?;
            }
        }
        Ok(out)
    }

    /// Piece `i` as a ternary form.
    pub fn ambient(&self, i: usize, piece: &Form<S>) -> Result<Form<S>> {
        let c = &self.charts[i];
        piece.substitute(&[Form::linear(&c.u), Form::linear(&c.v)])
    }

    /// `Σ fᵢ` in the plane.
    pub fn reconstruct(&self, pieces: &[Form<S>]) -> Result<Form<S>> {
        if pieces.len() != self.charts.len() {
            return Err(Error::Dimension("one piece per line expected".into()));
        }
        let mut acc = Form::zero(3, self.f.degree());
        for (i, p) in pieces.iter().enumerate() {
            acc = acc.add(&self.ambient(i, p)?)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{power_of_linear, random_form};
    use crate::scalar::Rational;
    use rand::SeedableRng;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn line(a: i64, b: i64, c: i64) -> Vec<Rational> {
        vec![q(a), q(b), q(c)]
    }

    /// A form built from random binary pieces on the given rational lines.
    fn form_on(lines: &[Vec<Rational>], d: usize, seed: u64) -> Form<Rational> {
        let mut acc = Form::zero(3, d);
        for (i, l) in lines.iter().enumerate() {
            let c = LineChart::new(l).unwrap();
            let g = random_form(seed + i as u64, 2, d, 5);
            acc = acc
                .add(
                    &g.substitute(&[Form::linear(&c.u), Form::linear(&c.v)])
                        .unwrap(),
                )
                .unwrap();
        }
        acc
    }

    #[test]
    fn two_lines_have_a_one_dimensional_kernel() {
        let lines = vec![line(1, 0, 0), line(0, 1, 0)];
        let f = form_on(&lines, 4, 1);
        let sp = split_on_lines(&f, &lines).unwrap();
        assert_eq!(sp.kernel_dim(), 1);
        assert_eq!(sp.pairs().unwrap(), &[(0, 1)]);
    }

    #[test]
    fn exact_reconstruction_of_samples() {
        let lines = vec![line(1, 0, 0), line(0, 1, 0), line(0, 0, 1), line(1, 2, 3)];
        let f = form_on(&lines, 5, 7);
        let sp = split_on_lines(&f, &lines).unwrap();
        assert_eq!(sp.kernel_dim(), 6);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let c: Vec<Rational> = (0..6).map(|_| Rational::random(&mut rng, 50)).collect();
            let pieces = sp.sample(&c).unwrap();
            assert_eq!(sp.reconstruct(&pieces).unwrap(), f);
        }
    }

    #[test]
    fn kernel_vectors_sum_to_zero() {
        let lines = vec![line(1, 1, 0), line(2, -1, 1), line(0, 1, 5)];
        let f = form_on(&lines, 4, 2);
        let sp = split_on_lines(&f, &lines).unwrap();
        for v in sp.kernel() {
            let mut acc = Form::zero(3, 4);
            for (i, g) in v.iter().enumerate() {
                acc = acc.add(&sp.ambient(i, g).unwrap()).unwrap();
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn inconsistent_systems_are_reported() {
        let lines = vec![line(1, 0, 0), line(0, 1, 0)];
        let f = power_of_linear(&[q(1), q(1), q(1)], &q(1), 4).unwrap();
        assert!(matches!(
            split_on_lines(&f, &lines),
            Err(Error::Inconsistent(_))
        ));
    }
}
