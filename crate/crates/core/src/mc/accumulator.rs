//! Block-structured sums of per-sample observables.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Positions of each observable in the per-sample vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub separations: usize,
    pub regions: usize,
    pub defects: usize,
}

impl Layout {
    pub const M: usize = 0;
    pub const ABS_M: usize = 1;
    pub const M2: usize = 2;
    pub const M4: usize = 3;
    /// Moments averaged over independent sign flips of each flavor.
    pub const M2_SYM: usize = 4;
    pub const M4_SYM: usize = 5;
    const FIXED: usize = 6;

    pub fn correlator(&self, k: usize) -> usize {
        Self::FIXED + k
    }

    pub fn indicator(&self, k: usize) -> usize {
        Self::FIXED + self.separations + k
    }

    pub fn weight(&self, k: usize) -> usize {
        Self::FIXED + self.separations + self.regions + k
    }

    pub fn weight_squared(&self, k: usize) -> usize {
        Self::FIXED + self.separations + self.regions + self.defects + k
    }

    pub fn width(&self) -> usize {
        Self::FIXED + self.separations + self.regions + 2 * self.defects
    }
}

/// Sample count and observable sums over a run of consecutive samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub count: u64,
    pub sums: Vec<f64>,
}

impl Block {
    fn new(width: usize) -> Self {
        Block {
            count: 0,
            sums: vec![0.0; width],
        }
    }

    fn add(&mut self, x: &[f64]) {
        self.count += 1;
        for (s, v) in self.sums.iter_mut().zip(x) {
            *s += v;
        }
    }

    fn merge(&mut self, other: &Block) {
        self.count += other.count;
        for (s, v) in self.sums.iter_mut().zip(&other.sums) {
            *s += v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentAccumulator {
    pub layout: Layout,
    pub block_size: u64,
    pub total: Block,
    pub blocks: Vec<Block>,
    /// Samples with a non-zero indicator, per region.
    pub positives: Vec<u64>,
}

impl MomentAccumulator {
    pub fn new(layout: Layout, block_size: u64) -> Self {
        MomentAccumulator {
            layout,
            block_size: block_size.max(1),
            total: Block::new(layout.width()),
            blocks: Vec::new(),
            positives: vec![0; layout.regions],
        }
    }

    pub fn count(&self) -> u64 {
        self.total.count
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.layout.width());
        let full = self
            .blocks
            .last()
            .is_none_or(|b| b.count >= self.block_size);
        if full {
            self.blocks.push(Block::new(self.layout.width()));
        }
        if let Some(b) = self.blocks.last_mut() {
            b.add(x);
        }
        self.total.add(x);
        for k in 0..self.layout.regions {
            if x[self.layout.indicator(k)] != 0.0 {
                self.positives[k] += 1;
            }
        }
    }

    /// Appends the blocks of `other` after those of `self`.
    pub fn merge(&mut self, other: &MomentAccumulator) {
        assert_eq!(
            self.layout, other.layout,
            "merging accumulators with different layouts"
        );
        self.total.merge(&other.total);
        self.blocks.extend(other.blocks.iter().cloned());
        for (a, b) in self.positives.iter_mut().zip(&other.positives) {
            *a += b;
        }
    }

    pub fn means(&self) -> Vec<f64> {
        let n = self.total.count.max(1) as f64;
        self.total.sums.iter().map(|s| s / n).collect()
    }

    pub fn mean(&self, idx: usize) -> f64 {
        self.total.sums[idx] / self.total.count.max(1) as f64
    }

    /// Re-blocks into blocks of `factor` consecutive old blocks.
    pub fn rebin(&self, factor: usize) -> MomentAccumulator {
        let factor = factor.max(1);
        let mut out = self.clone();
        out.block_size = self.block_size * factor as u64;
        out.blocks = self
            .blocks
            .chunks(factor)
            .map(|c| {
                let mut b = Block::new(self.layout.width());
                c.iter().for_each(|x| b.merge(x));
                b
            })
            .collect();
        out
    }

    /// Leave-one-block-out jackknife of `g` applied to the observable means.
    /// Returns `(g(all), error)`; the error is `NaN` with fewer than two blocks.
    pub fn jackknife<G: Fn(&[f64]) -> f64>(&self, g: G) -> (f64, f64) {
        let full = g(&self.means());
        let nb = self.blocks.len();
        if nb < 2 {
            return (full, f64::NAN);
        }
        let width = self.layout.width();
        let mut reduced = vec![0.0; width];
        let mut values = Vec::with_capacity(nb);
        for b in &self.blocks {
            let n = (self.total.count - b.count) as f64;
            for k in 0..width {
                reduced[k] = (self.total.sums[k] - b.sums[k]) / n;
            }
            values.push(g(&reduced));
        }
        (full, jackknife_error(&values))
    }

    /// Jackknife covariance of two functions of the means.
    pub fn jackknife_covariance<G: Fn(&[f64]) -> f64, H: Fn(&[f64]) -> f64>(
        &self,
        g: G,
        h: H,
    ) -> f64 {
        let nb = self.blocks.len();
        if nb < 2 {
            return f64::NAN;
        }
        let width = self.layout.width();
        let mut reduced = vec![0.0; width];
        let mut gs = Vec::with_capacity(nb);
        let mut hs = Vec::with_capacity(nb);
        for b in &self.blocks {
            let n = (self.total.count - b.count) as f64;
            for k in 0..width {
                reduced[k] = (self.total.sums[k] - b.sums[k]) / n;
            }
            gs.push(g(&reduced));
            hs.push(h(&reduced));
        }
        let mg = gs.iter().sum::<f64>() / nb as f64;
        let mh = hs.iter().sum::<f64>() / nb as f64;
        let c: f64 = gs.iter().zip(&hs).map(|(a, b)| (a - mg) * (b - mh)).sum();
        c * (nb - 1) as f64 / nb as f64
    }
}

/// `sqrt((B-1)/B Σ (θ_b - θ̄)²)` over leave-one-out values `θ_b`.
pub fn jackknife_error(values: &[f64]) -> f64 {
    let nb = values.len();
    if nb < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / nb as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    libm::sqrt(ss * (nb - 1) as f64 / nb as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> Layout {
        Layout {
            separations: 1,
            regions: 1,
            defects: 1,
        }
    }

    #[test]
    fn constant_series_has_zero_error() {
        let mut acc = MomentAccumulator::new(layout(), 10);
        for _ in 0..100 {
            acc.push(&[0.5, 0.5, 0.25, 0.0625, 0.25, 0.0625, 0.1, 1.0, 2.0, 4.0]);
        }
        let (v, e) = acc.jackknife(|m| m[Layout::M4] / (m[Layout::M2] * m[Layout::M2]));
        assert!((v - 1.0).abs() < 1e-12);
        assert!(e.abs() < 1e-12);
        assert_eq!(acc.blocks.len(), 10);
        assert_eq!(acc.positives, vec![100]);
    }

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        // independent uniform draws from a fixed LCG
        let mut acc = MomentAccumulator::new(layout(), 1);
        let mut s = 12345u64;
        let mut xs = Vec::new();
        for _ in 0..2000 {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let x = (s >> 11) as f64 / (1u64 << 53) as f64;
            xs.push(x);
            let mut v = vec![0.0; layout().width()];
            v[0] = x;
            acc.push(&v);
        }
        let (_, e) = acc.jackknife(|m| m[0]);
        let mean = xs.iter().sum::<f64>() / 2000.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 1999.0;
        assert!((e - (var / 2000.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn merge_concatenates_blocks() {
        let mut a = MomentAccumulator::new(layout(), 3);
        let mut b = MomentAccumulator::new(layout(), 3);
        let v = vec![1.0; layout().width()];
        for _ in 0..7 {
            a.push(&v);
        }
        for _ in 0..5 {
            b.push(&v);
        }
        a.merge(&b);
        assert_eq!(a.count(), 12);
        assert_eq!(a.blocks.len(), 5);
        assert_eq!(a.rebin(2).blocks.len(), 3);
    }
}
