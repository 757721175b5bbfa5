//! Finite-size-scaling collapse of Binder ratios and second moments.
//!
//! With `x = (p - p_c) L^{1/ν}`, the Binder ratio `B` and the rescaled moment
//! `⟨m²⟩ L^{2β/ν}` should each fall on one curve. The cost of a trial
//! `(p_c, ν, β)` measures how far every point sits from a quadratic fitted to
//! its nearest scaled neighbours of other sizes, normalized by the spread of
//! the scaled values.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::fit::nelder_mead;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub l: usize,
    pub p: f64,
    pub binder: f64,
    pub m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollapseOptions {
    /// Neighbours in each local fit.
    pub neighbors: usize,
    pub nu_starts: Vec<f64>,
    pub beta_starts: Vec<f64>,
    /// Starting `p_c` values as fractions of the scanned window.
    pub pc_starts: Vec<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Side of the `(p_c, ν)` cost grid reported with the fit (0 for none).
    pub landscape: usize,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        CollapseOptions {
            neighbors: 10,
            nu_starts: vec![0.7, 1.0, 1.5],
            beta_starts: vec![0.1, 0.25],
            pc_starts: vec![0.25, 0.5, 0.75],
            tolerance: 1e-12,
            max_iterations: 4000,
            landscape: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub p_c: f64,
    pub nu: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub p_c: f64,
    pub nu: f64,
    pub beta: f64,
    pub collapse_cost: f64,
    pub binder_cost: f64,
    pub m2_cost: f64,
    /// Range of `p` covered by the data.
    pub window: (f64, f64),
    pub sizes: Vec<usize>,
    /// `false` if the best simplex hit the iteration cap.
    pub converged: bool,
    pub landscape: Vec<LandscapePoint>,
}

/// Least-squares quadratic through `(dx, y)` evaluated at `dx = 0`.
fn local_value(pts: &[(f64, f64)]) -> f64 {
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(dx, y) in pts {
        let mut pw = 1.0;
        for k in 0..5 {
            s[k] += pw;
            if k < 3 {
                t[k] += pw * y;
            }
            pw *= dx;
        }
    }
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(a);
    let scale = s[0] * s[2] * s[4];
    if pts.len() >= 3 && libm::fabs(d) > 1e-12 * scale.max(1e-300) {
        let mut m = a;
        for (r, row) in m.iter_mut().enumerate() {
            row[0] = t[r];
        }
        return det3(m) / d;
    }
    let dl = s[0] * s[2] - s[1] * s[1];
    if pts.len() >= 2 && libm::fabs(dl) > 1e-12 * (s[0] * s[2]).max(1e-300) {
        return (t[0] * s[2] - s[1] * t[1]) / dl;
    }
    t[0] / s[0].max(1.0)
}

fn quality(xs: &[f64], ys: &[f64], ls: &[usize], k: usize) -> f64 {
    let n = xs.len();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let spread: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
    if !(spread > 0.0) || !spread.is_finite() {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    let mut near: Vec<(f64, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        near.clear();
        near.extend(
            (0..n)
                .filter(|&j| ls[j] != ls[i])
                .map(|j| (xs[j] - xs[i], ys[j])),
        );
        if near.is_empty() {
            continue;
        }
        let take = k.min(near.len());
        near.sort_unstable_by(|a, b| {
            libm::fabs(a.0)
                .total_cmp(&libm::fabs(b.0))
                .then(a.0.total_cmp(&b.0))
                .then(a.1.total_cmp(&b.1))
        });
        let r = ys[i] - local_value(&near[..take]);
        total += r * r;
    }
    total / spread
}

/// `(Binder cost, moment cost)` of a trial collapse.
pub fn collapse_cost(points: &[ScalingPoint], p_c: f64, nu: f64, beta: f64, neighbors: usize) -> (f64, f64) {
    if !(nu > 0.0) || !p_c.is_finite() || !beta.is_finite() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let ls: Vec<usize> = points.iter().map(|q| q.l).collect();
    let xs: Vec<f64> = points
        .iter()
        .map(|q| (q.p - p_c) * libm::pow(q.l as f64, 1.0 / nu))
        .collect();
    let bs: Vec<f64> = points.iter().map(|q| q.binder).collect();
    let ms: Vec<f64> = points
        .iter()
        .map(|q| q.m2 * libm::pow(q.l as f64, 2.0 * beta / nu))
        .collect();
    (quality(&xs, &bs, &ls, neighbors), quality(&xs, &ms, &ls, neighbors))
}

/// Joint collapse of `B` and `⟨m²⟩` by simplex descent from a grid of starts.
pub fn fss_collapse(points: &[ScalingPoint], options: &CollapseOptions) -> Result<ScalingFit> {
    let mut sizes: Vec<usize> = points.iter().map(|q| q.l).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(invalid("a scaling collapse needs at least three system sizes"));
    }
    if points.iter().any(|q| !(q.p.is_finite() && q.binder.is_finite() && q.m2.is_finite())) {
        return Err(invalid("scaling data must be finite"));
    }
    let lo = points.iter().map(|q| q.p).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|q| q.p).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(invalid("scaling data must span a range of p"));
    }
    let k = options.neighbors.max(3);
    let objective = |v: &[f64]| {
        if v[0] < lo || v[0] > hi {
            return f64::INFINITY;
        }
        let (b, m) = collapse_cost(points, v[0], v[1], v[2], k);
        b + m
    };
    let mut best: Option<super::fit::Minimum> = None;
    for &fp in &options.pc_starts {
        for &nu in &options.nu_starts {
            for &beta in &options.beta_starts {
                let start = [lo + fp * (hi - lo), nu, beta];
                let step = [0.1 * (hi - lo), 0.3 * nu, 0.05];
                let m = nelder_mead(objective, &start, &step, options.tolerance, options.max_iterations);
                if best.as_ref().is_none_or(|b| m.value < b.value) {
                    best = Some(m);
                }
            }
        }
    }
    let m = best.ok_or_else(|| invalid("no collapse starts were given"))?;
    let (p_c, nu, beta) = (m.x[0], m.x[1], m.x[2]);
    let (bc, mc) = collapse_cost(points, p_c, nu, beta, k);
    let mut landscape = Vec::new();
    let g = options.landscape;
    for i in 0..g {
        for j in 0..g {
            let pc = lo + (hi - lo) * (i as f64 + 0.5) / g as f64;
            let nv = nu * libm::pow(4.0, (j as f64 + 0.5) / g as f64 - 0.5);
            let (b, c) = collapse_cost(points, pc, nv, beta, k);
            landscape.push(LandscapePoint { p_c: pc, nu: nv, cost: b + c });
        }
    }
    Ok(ScalingFit {
        p_c,
        nu,
        beta,
        collapse_cost: bc + mc,
        binder_cost: bc,
        m2_cost: mc,
        window: (lo, hi),
        sizes,
        converged: m.converged,
        landscape,
    })
}
