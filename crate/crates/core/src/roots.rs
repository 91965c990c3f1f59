//! Univariate root finding (Aberth–Ehrlich with Newton polishing) and roots
//! of binary forms as points of the projective line.

use crate::error::{Error, Result};
use crate::form::Form;
use crate::scalar::{Complex, Scalar};

const MAX_ITERS: usize = 1000;

fn horner(a: &[Complex], z: Complex) -> (Complex, Complex) {
    // a is ascending: a[0] + a[1] z + …
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &c in a.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn abs_horner(a: &[Complex], r: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

fn newton_polish(a: &[Complex], z: Complex) -> Complex {
    let rev: Vec<Complex> = a.iter().rev().copied().collect();
    let mut z = z;
    for _ in 0..4 {
        let step = if z.norm() <= 1.0 {
            let (p, dp) = horner(a, z);
            if dp.norm() == 0.0 {
                break;
            }
            let cand = z - p / dp;
            if horner(a, cand).0.norm() < p.norm() {
                cand
            } else {
                break;
            }
        } else {
            // Iterate on the reversed polynomial at w = 1/z for stability.
            let w = z.inv();
            let (p, dp) = horner(&rev, w);
            if dp.norm() == 0.0 {
                break;
            }
            let cw = w - p / dp;
            if cw.norm() == 0.0 || horner(&rev, cw).0.norm() >= p.norm() {
                break;
            }
            cw.inv()
        };
        if (step - z).norm() <= 1e-16 * z.norm().max(1.0) {
            z = step;
            break;
        }
        z = step;
    }
    z
}

/// All complex roots, with multiplicity, of `a[0] + a[1] z + … + a[n] zⁿ`.
/// The leading coefficient must be nonzero.
pub fn poly_roots(a: &[Complex]) -> Result<Vec<Complex>> {
    let n = a.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    if a[n].norm() == 0.0 {
        return Err(Error::RootFinding("leading coefficient is zero".into()));
    }
    if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficients".into()));
    }
    let lead = a[n];
    let a: Vec<Complex> = a.iter().map(|c| c / lead).collect();
    if n == 1 {
        return Ok(vec![-a[0]]);
    }
    // Roots of exactly zero are split off so that the iteration only sees a
    // polynomial with nonzero constant term.
    let zeros = a.iter().take_while(|c| c.norm() == 0.0).count();
    let a = &a[zeros..];
    let m = a.len() - 1;
    let mut out = vec![Complex::new(0.0, 0.0); zeros];
    if m == 0 {
        return Ok(out);
    }
    let radius = (0..m)
        .map(|k| a[k].norm().powf(1.0 / (m - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex> = (0..m)
        .map(|k| Complex::from_polar(radius, std::f64::consts::TAU * k as f64 / m as f64 + 0.4))
        .collect();
    let mut converged = vec![false; m];
    for _ in 0..MAX_ITERS {
        let mut all = true;
        for i in 0..m {
            if converged[i] {
                continue;
            }
            let (p, dp) = horner(a, z[i]);
            if p.norm() == 0.0 {
                converged[i] = true;
                continue;
            }
            let ratio = p / dp;
            let s: Complex = (0..m)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let w = ratio / (Complex::new(1.0, 0.0) - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                all = false;
                continue;
            }
            z[i] -= w;
            if w.norm() <= 1e-15 * z[i].norm().max(1e-300) {
                converged[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    for zi in z.iter_mut() {
        *zi = newton_polish(a, *zi);
        let (p, _) = horner(a, *zi);
        let scale = abs_horner(a, zi.norm());
        if !zi.re.is_finite() || !zi.im.is_finite() || p.norm() > 1e-6 * scale {
            return Err(Error::RootFinding(format!(
                "residual {:.3e} at {zi} after {MAX_ITERS} iterations",
                p.norm() / scale
            )));
        }
    }
    out.extend(z);
    Ok(out)
}

/// Zeros of a binary form `g(x0, x1)` as points `(a, b)` of the projective
/// line. Roots at `(1, 0)` are counted from the vanishing leading
/// coefficients; the remaining ones come from `g(z, 1)`.
pub fn binary_roots<S: Scalar>(g: &Form<S>) -> Result<Vec<[Complex; 2]>> {
    if g.num_vars() != 2 {
        return Err(Error::Dimension("binary form expected".into()));
    }
    let c: Vec<Complex> = g.coeffs().iter().map(|x| x.to_complex()).collect();
    let max = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroForm);
    }
    let tol = if S::EXACT { 0.0 } else { 1e-14 * max };
    let at_infinity = c.iter().take_while(|x| x.norm() <= tol).count();
    let e = g.degree();
    // c[j] multiplies x0^{e-j} x1^j, so g(z, 1) has coefficient c[j] on z^{e-j}.
    let ascending: Vec<Complex> = c[at_infinity..].iter().rev().copied().collect();
    let mut out: Vec<[Complex; 2]> =
        vec![[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]; at_infinity];
    debug_assert_eq!(ascending.len(), e + 1 - at_infinity);
    for z in poly_roots(&ascending)? {
        out.push([z, Complex::new(1.0, 0.0)]);
    }
    Ok(out)
}
