//! Fixed workloads shared by the benchmarks.

use waring_core::form::{random_form, Form};
use waring_core::scalar::Rational;

/// Deterministic inputs of the given shape, one per seed in `0..count`.
pub fn workload(n: usize, d: usize, count: u64) -> Vec<Form<Rational>> {
    (0..count).map(|seed| random_form(seed, n, d, 9)).collect()
}
