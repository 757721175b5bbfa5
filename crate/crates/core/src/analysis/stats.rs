//! Resampling: parametric and nonparametric bootstrap.

use alloc::vec::Vec;

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::seed::{chain_rng, ChainRng};

/// Mean and sample standard deviation; `(NaN, NaN)` for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64))
}

/// Source of Gaussian perturbations for parametric resampling.
pub struct Resampler {
    rng: ChainRng,
}

impl Resampler {
    pub fn new(seed: u64) -> Self {
        Resampler {
            rng: chain_rng(seed),
        }
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// `values[i] + errors[i] · z_i`.
    pub fn perturb(&mut self, values: &[f64], errors: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(errors)
            .map(|(v, e)| v + e * self.normal())
            .collect()
    }

    /// Uniform index below `n`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// Bootstrap over `items` (e.g. chains): `resamples` draws with replacement,
/// each passed to `stat`; draws where `stat` returns `None` are skipped.
/// Returns the statistic on the original set and the standard deviation over
/// the draws.
pub fn bootstrap<T, F>(items: &[T], resamples: usize, seed: u64, stat: F) -> (Option<f64>, f64)
where
    F: Fn(&[&T]) -> Option<f64>,
{
    let all: Vec<&T> = items.iter().collect();
    let centre = stat(&all);
    let mut r = Resampler::new(seed);
    let mut draws = Vec::with_capacity(resamples);
    let mut pick: Vec<&T> = Vec::with_capacity(items.len());
    for _ in 0..resamples {
        pick.clear();
        for _ in 0..items.len() {
            pick.push(&items[r.index(items.len())]);
        }
        if let Some(v) = stat(&pick) {
            draws.push(v);
        }
    }
    (centre, mean_std(&draws).1)
}
