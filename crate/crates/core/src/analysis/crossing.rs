//! Crossings of finite-size curves.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::pchip::Pchip;
use super::stats::{mean_std, Resampler};
use crate::error::{invalid, Result};

/// One system size: values (e.g. Binder ratios) with errors on a grid of `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub l: usize,
    pub ps: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl Curve {
    fn validate(&self) -> Result<()> {
        let n = self.ps.len();
        if n < 2 || self.values.len() != n || self.errors.len() != n {
            return Err(invalid("a curve needs at least two points with values and errors"));
        }
        if self.ps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("curve points must be strictly increasing in p"));
        }
        if self.errors.iter().any(|e| !(*e >= 0.0)) {
            return Err(invalid("curve errors must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossingOptions {
    /// Scan points across the common window before bisection.
    pub grid: usize,
    /// Parametric bootstrap replicas of every curve.
    pub resamples: usize,
    pub seed: u64,
    /// Pairs closer in size than this get `close_pair_weight` times their
    /// inverse-variance weight.
    pub min_separation: usize,
    pub close_pair_weight: f64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        CrossingOptions {
            grid: 2000,
            resamples: 200,
            seed: 0,
            min_separation: 8,
            close_pair_weight: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub l1: usize,
    pub l2: usize,
    /// `None` when the curves do not cross inside their common window.
    pub p: Option<f64>,
    pub error: f64,
    /// Fraction of bootstrap replicas that crossed.
    pub found_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub pairs: Vec<PairCrossing>,
    /// Weighted mean over pairs with a crossing; `None` if there is none.
    pub pooled: Option<f64>,
    pub pooled_error: f64,
}

impl CrossingReport {
    pub fn crossed(&self) -> bool {
        self.pooled.is_some()
    }
}

/// Root of `a - b` in the common window of two interpolants, or `None`.
///
/// Sign changes are located on a uniform scan. With several, roots where both
/// curves decrease are preferred (a non-monotone ratio also crosses on the
/// rising flank of its peak), then the one with the steepest difference.
pub fn pair_root(a: &Pchip, b: &Pchip, grid: usize) -> Option<f64> {
    let (a0, a1) = a.domain();
    let (b0, b1) = b.domain();
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if !(hi > lo) {
        return None;
    }
    let grid = grid.max(2);
    let diff = |x: f64| a.eval(x) - b.eval(x);
    let at = |k: usize| lo + (hi - lo) * k as f64 / grid as f64;
    let mut best: Option<(bool, f64, f64)> = None;
    let mut last: Option<(f64, f64)> = None;
    for k in 0..=grid {
        let x = at(k);
        let d = diff(x);
        if d == 0.0 {
            continue;
        }
        if let Some((xl, dl)) = last {
            if dl * d < 0.0 {
                let (mut l, mut r, mut fl) = (xl, x, dl);
                for _ in 0..200 {
                    let m = 0.5 * (l + r);
                    let fm = diff(m);
                    if fm == 0.0 || r - l <= 1e-15 * (hi - lo) {
                        l = m;
                        r = m;
                        break;
                    }
                    if fm * fl < 0.0 {
                        r = m;
                    } else {
                        l = m;
                        fl = fm;
                    }
                }
                let root = 0.5 * (l + r);
                let slope = libm::fabs((d - dl) / (x - xl));
                let falling = a.eval(x) < a.eval(xl) && b.eval(x) < b.eval(xl);
                if best.is_none_or(|(f, _, s)| (falling, slope) > (f, s)) {
                    best = Some((falling, root, slope));
                }
            }
        }
        last = Some((x, d));
    }
    best.map(|(_, x, _)| x)
}

fn roots(curves: &[(usize, Pchip)], grid: usize) -> Vec<(usize, usize, Option<f64>)> {
    let mut out = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            out.push((curves[i].0, curves[j].0, pair_root(&curves[i].1, &curves[j].1, grid)));
        }
    }
    out
}

fn pool(pairs: &[(usize, usize, f64, f64)], options: &CrossingOptions) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let any_zero = pairs.iter().any(|p| !(p.3 > 0.0));
    let mut num = 0.0;
    let mut den = 0.0;
    for &(l1, l2, x, e) in pairs {
        let mut w = if any_zero { 1.0 } else { 1.0 / (e * e) };
        if l1.abs_diff(l2) < options.min_separation {
            w *= options.close_pair_weight;
        }
        num += w * x;
        den += w;
    }
    Some(num / den)
}

/// Pairwise crossings of monotone-cubic interpolants and their pooled
/// inverse-variance mean, with errors from parametric resampling of every
/// curve point.
pub fn binder_crossing(curves: &[Curve], options: &CrossingOptions) -> Result<CrossingReport> {
    if curves.len() < 2 {
        return Err(invalid("a crossing needs at least two system sizes"));
    }
    for c in curves {
        c.validate()?;
    }
    let build = |values: &[Vec<f64>]| -> Result<Vec<(usize, Pchip)>> {
        curves
            .iter()
            .zip(values)
            .map(|(c, v)| Ok((c.l, Pchip::new(&c.ps, v)?)))
            .collect()
    };
    let central: Vec<Vec<f64>> = curves.iter().map(|c| c.values.clone()).collect();
    let base = roots(&build(&central)?, options.grid);
    let npairs = base.len();
    let mut replica_roots: Vec<Vec<f64>> = alloc::vec![Vec::new(); npairs];
    let mut replicas: Vec<Vec<Option<f64>>> = Vec::with_capacity(options.resamples);
    let mut r = Resampler::new(options.seed);
    for _ in 0..options.resamples {
        let values: Vec<Vec<f64>> = curves.iter().map(|c| r.perturb(&c.values, &c.errors)).collect();
        let rs = roots(&build(&values)?, options.grid);
        for (k, (_, _, x)) in rs.iter().enumerate() {
            if let Some(x) = x {
                replica_roots[k].push(*x);
            }
        }
        replicas.push(rs.into_iter().map(|t| t.2).collect());
    }
    let pairs: Vec<PairCrossing> = base
        .iter()
        .zip(&replica_roots)
        .map(|(&(l1, l2, p), rr)| PairCrossing {
            l1,
            l2,
            p,
            error: if rr.len() >= 2 { mean_std(rr).1 } else { 0.0 },
            found_fraction: if options.resamples == 0 {
                0.0
            } else {
                rr.len() as f64 / options.resamples as f64
            },
        })
        .collect();
    let crossed: Vec<(usize, usize, f64, f64)> = pairs
        .iter()
        .filter_map(|c| c.p.map(|x| (c.l1, c.l2, x, c.error)))
        .collect();
    let pooled = pool(&crossed, options);
    // pooled error: same weights applied to each replica's roots
    let mut pooled_draws = Vec::new();
    if pooled.is_some() {
        for rep in &replicas {
            let used: Vec<(usize, usize, f64, f64)> = pairs
                .iter()
                .zip(rep)
                .filter(|(c, _)| c.p.is_some())
                .filter_map(|(c, x)| x.map(|x| (c.l1, c.l2, x, c.error)))
                .collect();
            if used.len() == crossed.len() {
                if let Some(v) = pool(&used, options) {
                    pooled_draws.push(v);
                }
            }
        }
    }
    let pooled_error = if pooled_draws.len() >= 2 {
        mean_std(&pooled_draws).1
    } else {
        0.0
    };
    Ok(CrossingReport {
        pairs,
        pooled,
        pooled_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn synthetic(l: usize, pc: f64, ps: &[f64], err: f64) -> Curve {
        let values = ps
            .iter()
            .map(|p| 2.0 - libm::tanh((p - pc) * l as f64 * 0.5))
            .collect();
        Curve {
            l,
            ps: ps.to_vec(),
            values,
            errors: vec![err; ps.len()],
        }
    }

    fn grid() -> Vec<f64> {
        (0..=16).map(|k| 0.12 + 0.01 * k as f64).collect()
    }

    #[test]
    fn identical_curves_do_not_cross() {
        let c = synthetic(16, 0.2, &grid(), 0.0);
        let mut d = c.clone();
        d.l = 32;
        let rep = binder_crossing(&[c, d], &CrossingOptions::default()).unwrap();
        assert!(!rep.crossed());
        assert_eq!(rep.pairs[0].p, None);
    }

    #[test]
    fn recovers_synthetic_crossing() {
        let ps = grid();
        let curves: Vec<Curve> = [8, 16, 24, 32].iter().map(|&l| synthetic(l, 0.2, &ps, 0.002)).collect();
        let rep = binder_crossing(&curves, &CrossingOptions::default()).unwrap();
        let p = rep.pooled.unwrap();
        assert!((p - 0.2).abs() < 0.002, "{p}");
        assert!(rep.pooled_error > 0.0 && rep.pooled_error < 0.01);
        assert_eq!(rep.pairs.len(), 6);
        assert!(rep.pairs.iter().all(|c| c.found_fraction > 0.9));
    }

    #[test]
    fn prefers_falling_flank_of_a_peak() {
        // peaks that sharpen and drift with L, ordered value below
        let ps: Vec<f64> = (0..=40).map(|k| 0.19 + 0.001 * k as f64).collect();
        let curves: Vec<Curve> = [16usize, 32]
            .iter()
            .map(|&l| {
                let s = l as f64 / 16.0;
                let values = ps
                    .iter()
                    .map(|&p| {
                        let x = (p - 0.211) * l as f64;
                        let peak = s * libm::exp(-((x + 0.1) * (x + 0.1)) * 2.0);
                        2.0 + 1.0 / (1.0 + libm::exp(2.0 * x)) + peak
                    })
                    .collect();
                Curve { l, ps: ps.clone(), values, errors: vec![0.0; ps.len()] }
            })
            .collect();
        let a = Pchip::new(&curves[0].ps, &curves[0].values).unwrap();
        let b = Pchip::new(&curves[1].ps, &curves[1].values).unwrap();
        let x = pair_root(&a, &b, 2000).unwrap();
        assert!(a.eval(x + 1e-4) < a.eval(x), "{x}");
    }

    #[test]
    fn rejects_bad_input() {
        let c = synthetic(8, 0.2, &grid(), 0.0);
        assert!(binder_crossing(&[c.clone()], &CrossingOptions::default()).is_err());
        let mut d = c.clone();
        d.ps.reverse();
        assert!(binder_crossing(&[c, d], &CrossingOptions::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn affine_reparameterization(a in 0.5f64..4.0, b in -1.0f64..1.0, pc in 0.16f64..0.24) {
            let ps = grid();
            let curves: Vec<Curve> = [8, 16, 32].iter().map(|&l| synthetic(l, pc, &ps, 0.003)).collect();
            let mapped: Vec<Curve> = curves
                .iter()
                .map(|c| Curve { ps: c.ps.iter().map(|p| a * p + b).collect(), ..c.clone() })
                .collect();
            let opts = CrossingOptions { resamples: 40, ..CrossingOptions::default() };
            let r1 = binder_crossing(&curves, &opts).unwrap();
            let r2 = binder_crossing(&mapped, &opts).unwrap();
            let (p1, p2) = (r1.pooled.unwrap(), r2.pooled.unwrap());
            prop_assert!((a * p1 + b - p2).abs() < 1e-9);
            prop_assert!((a * r1.pooled_error - r2.pooled_error).abs() < 1e-7 * a);
        }
    }
}
