//! Projective points and small plane-geometry helpers.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Rational, Scalar};

/// Default tolerance for treating two float points as equal.
pub const POINT_EQ_TOL: f64 = 1e-8;
/// Minimum distance between points of a decomposition.
pub const DISTINCT_TOL: f64 = 1e-6;

/// A point of projective space, kept in normal form: the first nonzero
/// coordinate is 1 (exact backend) or the first coordinate of largest modulus
/// is 1 (float backend).
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint<S> {
    coords: Vec<S>,
}

impl<S: Scalar> ProjectivePoint<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates".into()));
        }
        let pivot = if S::EXACT {
            coords.iter().position(|c| !c.is_zero())
        } else {
            let max = coords.iter().map(|c| c.magnitude()).fold(0.0, f64::max);
            if max == 0.0 {
                None
            } else {
                coords.iter().position(|c| c.magnitude() == max)
            }
        };
        let Some(p) = pivot else {
            return Err(Error::InvalidPoint("all coordinates are zero".into()));
        };
        let inv = S::one() / coords[p].clone();
        let mut coords: Vec<S> = coords.into_iter().map(|c| c * inv.clone()).collect();
        coords[p] = S::one();
        Ok(ProjectivePoint { coords })
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    pub fn to_complex(&self) -> Vec<Complex> {
        self.coords.iter().map(|c| c.to_complex()).collect()
    }

    /// Equality up to [`POINT_EQ_TOL`] (exact equality on the exact backend).
    pub fn approx_eq(&self, other: &Self) -> bool {
        if S::EXACT {
            self == other
        } else {
            distance(&self.to_complex(), &other.to_complex()) <= POINT_EQ_TOL
        }
    }
}

/// Projective distance: the sine of the Hermitian angle between the two lines.
/// Zero iff the points coincide; at most 1.
pub fn distance(a: &[Complex], b: &[Complex]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let inner: Complex = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let cos2 = (inner.norm_sqr() / (na * nb)).min(1.0);
    (1.0 - cos2).max(0.0).sqrt()
}

/// Whether all points are pairwise at distance greater than [`DISTINCT_TOL`].
pub fn pairwise_distinct(points: &[Vec<Complex>]) -> bool {
    min_pairwise_distance(points) > DISTINCT_TOL
}

/// Smallest pairwise distance, or 1 for fewer than two points.
pub fn min_pairwise_distance(points: &[Vec<Complex>]) -> f64 {
    let mut best: f64 = 1.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(distance(&points[i], &points[j]));
        }
    }
    best
}

/// Float normalization by the largest-modulus coordinate; also returns the divisor.
pub fn normalize_complex(p: &[Complex]) -> Option<(Vec<Complex>, Complex)> {
    let max = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 || !max.is_finite() {
        return None;
    }
    let k = p.iter().position(|c| c.norm() == max)?;
    let s = p[k];
    let mut out: Vec<Complex> = p.iter().map(|c| c / s).collect();
    out[k] = Complex::new(1.0, 0.0);
    Some((out, s))
}

pub fn cross<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    vec![
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Basis of the plane `{x : Σ lᵢ xᵢ = 0}` in three-space, together with the
/// coordinate indices that serve as binary coordinates on it.
///
/// With pivot `p` (a coordinate of largest modulus of `l`) and the two other
/// indices `a < b`, the basis is `e_a − (l_a/l_p) e_p`, `e_b − (l_b/l_p) e_p`;
/// a point on the line has binary coordinates `(x_a, x_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineChart<S> {
    pub line: Vec<S>,
    pub u: Vec<S>,
    pub v: Vec<S>,
    pub free: [usize; 2],
    pub pivot: usize,
}

impl<S: Scalar> LineChart<S> {
    pub fn new(line: &[S]) -> Result<Self> {
        if line.len() != 3 {
            return Err(Error::Dimension(
                "lines live in a three-dimensional space".into(),
            ));
        }
        let max = line.iter().map(|c| c.magnitude()).fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::InvalidPoint("zero line".into()));
        }
        let pivot = line
            .iter()
            .position(|c| c.magnitude() == max)
            .expect("max exists");
        let free: Vec<usize> = (0..3).filter(|&i| i != pivot).collect();
        let basis = |a: usize| {
            let mut e = vec![S::zero(); 3];
            e[a] = S::one();
            e[pivot] = -(line[a].clone() / line[pivot].clone());
            e
        };
        Ok(LineChart {
            line: line.to_vec(),
            u: basis(free[0]),
            v: basis(free[1]),
            free: [free[0], free[1]],
            pivot,
        })
    }

    /// Ambient point `s·u + t·v`.
    pub fn embed(&self, st: &[S]) -> Vec<S> {
        (0..3)
            .map(|i| st[0].clone() * self.u[i].clone() + st[1].clone() * self.v[i].clone())
            .collect()
    }

    /// Binary coordinates of an ambient point lying on the line.
    pub fn chart(&self, x: &[S]) -> Vec<S> {
        vec![x[self.free[0]].clone(), x[self.free[1]].clone()]
    }
}

/// Rational approximation of a normalized complex point, if every coordinate is
/// within `tol` of a real rational with denominator at most `max_den`.
pub fn rationalize_point(p: &[Complex], max_den: i64, tol: f64) -> Option<Vec<Rational>> {
    let (q, _) = normalize_complex(p)?;
    let mut out = Vec::with_capacity(q.len());
    for z in &q {
        if z.im.abs() > tol {
            return None;
        }
        let r = crate::scalar::rationalize(z.re, max_den)?;
        if (r.to_complex().re - z.re).abs() > tol {
            return None;
        }
        out.push(r);
    }
    Some(out)
}
