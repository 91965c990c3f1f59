//! Monomial bases of fixed degree in lexicographically descending order
//! (`x0^d` first, `x_{n-1}^d` last).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::One;

/// Exponent vector of a monomial.
pub type Exponents = Vec<usize>;

/// Binomial coefficient as a machine integer; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of monomials of degree `d` in `n` variables.
pub fn count(n: usize, d: usize) -> usize {
    if n == 0 {
        return usize::from(d == 0);
    }
    binomial(n - 1 + d, d)
}

pub fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

pub fn factorial_f64(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Multinomial coefficient `d! / Π eᵢ!` with `d = Σ eᵢ`.
pub fn multinomial(e: &[usize]) -> BigInt {
    let d: usize = e.iter().sum();
    let den = e.iter().fold(BigInt::one(), |acc, &k| acc * factorial(k));
    factorial(d) / den
}

fn build(n: usize, d: usize) -> Vec<Exponents> {
    if n == 0 {
        return if d == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if n == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::with_capacity(count(n, d));
    for e0 in (0..=d).rev() {
        for mut rest in build(n - 1, d - e0) {
            rest.insert(0, e0);
            out.push(rest);
        }
    }
    out
}

type Cache = Mutex<HashMap<(usize, usize), Arc<Vec<Exponents>>>>;

/// All monomials of degree `d` in `n` variables, in basis order.
pub fn monomials(n: usize, d: usize) -> Arc<Vec<Exponents>> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((n, d))
        .or_insert_with(|| Arc::new(build(n, d)))
        .clone()
}

/// Position of `e` in [`monomials`]`(e.len(), Σe)`.
pub fn index(e: &[usize]) -> usize {
    let n = e.len();
    let mut r: usize = e.iter().sum();
    let mut idx = 0;
    for i in 0..n.saturating_sub(1) {
        let rest = n - i - 1;
        for v in e[i] + 1..=r {
            idx += count(rest, r - v);
        }
        r -= e[i];
    }
    idx
}
