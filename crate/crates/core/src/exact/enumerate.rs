//! Chunked enumeration of loop tuples and integer histograms.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::code::{LoopElement, LoopGroup};

/// Runs independent chunks of work and returns their results in chunk order.
///
/// Implementations may evaluate chunks concurrently; callers merge the
/// returned values in index order, so results never depend on scheduling.
pub trait ChunkRunner {
    fn map_chunks<T, F>(&self, chunks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Evaluates chunks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ChunkRunner for Sequential {
    fn map_chunks<T, F>(&self, chunks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..chunks).map(f).collect()
    }
}

/// Splits `0..total` into `chunks` contiguous ranges (fewer if `total` is small).
pub fn split_range(total: u64, chunks: usize) -> Vec<Range<u64>> {
    let chunks = (chunks.max(1) as u64).min(total.max(1));
    (0..chunks)
        .map(|i| (total * i / chunks)..(total * (i + 1) / chunks))
        .collect()
}

/// Non-negative counts indexed by an integer energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(len: usize) -> Self {
        Histogram {
            counts: vec![0; len],
        }
    }

    #[inline]
    pub fn add(&mut self, k: usize) {
        self.counts[k] += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `ln Σ_k c_k e^{k · log_base}`.
    pub fn log_value(&self, log_base: f64) -> f64 {
        crate::logsum::log_polynomial(&self.counts, log_base)
    }
}

/// Signed counts indexed by an integer energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedHistogram {
    pub counts: Vec<i64>,
}

impl SignedHistogram {
    pub fn new(len: usize) -> Self {
        SignedHistogram {
            counts: vec![0; len],
        }
    }

    #[inline]
    pub fn add(&mut self, k: usize, negative: bool) {
        self.counts[k] += if negative { -1 } else { 1 };
    }

    pub fn merge(&mut self, other: &SignedHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// `(sign, ln |Σ_k c_k e^{k · log_base}|)`.
    pub fn signed_log_value(&self, log_base: f64) -> (f64, f64) {
        crate::logsum::signed_log_polynomial(&self.counts, log_base)
    }
}

/// All `flavors`-tuples `(g⁽¹⁾, …, g⁽ᵐ⁾)` of a loop group.
///
/// The first flavor is walked in Gray-code order and is the axis along which
/// work is chunked; the remaining flavors run over a materialized element
/// list.
pub struct TupleSpace<'a> {
    group: &'a LoopGroup,
    flavors: usize,
    list: Vec<LoopElement>,
}

impl<'a> TupleSpace<'a> {
    pub fn new(group: &'a LoopGroup, flavors: usize) -> Self {
        let list = if flavors >= 2 {
            group.elements().collect()
        } else {
            Vec::new()
        };
        TupleSpace {
            group,
            flavors,
            list,
        }
    }

    pub fn flavors(&self) -> usize {
        self.flavors
    }

    /// Length of the chunked axis.
    pub fn axis_len(&self) -> u64 {
        self.group.order()
    }

    /// Calls `visit(tuple, product_mask)` for every tuple whose first flavor
    /// lies at Gray positions `range`.
    pub fn for_each<F>(&self, range: Range<u64>, mut visit: F)
    where
        F: FnMut(&[LoopElement], u64),
    {
        let m = self.flavors;
        if m == 0 {
            return;
        }
        let mut tuple = vec![
            LoopElement {
                mask: 0,
                length: 0,
                sector: 0
            };
            m
        ];
        if m == 1 {
            for e in self.group.elements_range(range.start, range.end) {
                tuple[0] = e;
                visit(&tuple, e.mask);
            }
            return;
        }
        let list = &self.list;
        let size = list.len();
        let mut idx = vec![0usize; m];
        let mut prefix = vec![0u64; m];
        for e in self.group.elements_range(range.start, range.end) {
            tuple[0] = e;
            prefix[0] = e.mask;
            // odometer over flavors 1..m-1; flavor m-1 is the innermost loop
            for s in 1..m {
                idx[s] = 0;
            }
            'outer: loop {
                for s in 1..m - 1 {
                    tuple[s] = list[idx[s]];
                    prefix[s] = prefix[s - 1] ^ tuple[s].mask;
                }
                let base = prefix[m - 2];
                for item in list.iter() {
                    tuple[m - 1] = *item;
                    visit(&tuple, base ^ item.mask);
                }
                let mut s = m - 2;
                loop {
                    if s == 0 {
                        break 'outer;
                    }
                    idx[s] += 1;
                    if idx[s] < size {
                        break;
                    }
                    idx[s] = 0;
                    s -= 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{LoopKind, ToricCode};

    #[test]
    fn split_covers_range() {
        for total in [0u64, 1, 7, 100] {
            for chunks in [1usize, 3, 8, 200] {
                let parts = split_range(total, chunks);
                assert_eq!(parts.first().unwrap().start, 0);
                assert_eq!(parts.last().unwrap().end, total);
                for w in parts.windows(2) {
                    assert_eq!(w[0].end, w[1].start);
                }
            }
        }
    }

    #[test]
    fn tuple_counts_and_products() {
        let code = ToricCode::new(2).unwrap();
        let group = LoopGroup::contractible(&code, LoopKind::Z).unwrap();
        for m in 1..=3 {
            let space = TupleSpace::new(&group, m);
            let mut count = 0u64;
            let mut products_ok = true;
            for r in split_range(space.axis_len(), 3) {
                space.for_each(r, |t, prod| {
                    count += 1;
                    let expect = t.iter().fold(0u64, |a, e| a ^ e.mask);
                    products_ok &= expect == prod;
                });
            }
            assert_eq!(count, group.order().pow(m as u32));
            assert!(products_ok);
        }
    }
}
