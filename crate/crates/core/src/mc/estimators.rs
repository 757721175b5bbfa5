//! Physical estimates with jackknife errors from accumulated chains.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::accumulator::{Layout, MomentAccumulator};
use super::chain::{
    defect_flips, merge_records, run_chains, stage_groups, BondFlip, McConfig, Observables,
};
use crate::code::{LoopKind, ToricCode};
use crate::error::{invalid, Result};
use crate::exact::ChunkRunner;
use crate::region::ParityCheck;

/// Positive samples below which a rare-event estimate is flagged.
pub const MIN_POSITIVE: u64 = 100;
/// Jackknife blocks below which an error bar is flagged.
pub const MIN_BLOCKS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EstimateFlag {
    /// Fewer than [`MIN_POSITIVE`] contributing samples.
    Undersampled { positive: u64 },
    /// The averaged quantity was not positive; the value is `+∞`.
    NonPositive,
    /// Fewer than [`MIN_BLOCKS`] jackknife blocks.
    TooFewBlocks { blocks: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub flags: Vec<EstimateFlag>,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate {
            value,
            error,
            flags: Vec::new(),
        }
    }

    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    /// `|value - target| ≤ k · error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        libm::fabs(self.value - target) <= k * self.error
    }

    fn flag(mut self, f: EstimateFlag) -> Self {
        if !self.flags.contains(&f) {
            self.flags.push(f);
        }
        self
    }

    fn check_blocks(self, acc: &MomentAccumulator) -> Self {
        if acc.blocks.len() < MIN_BLOCKS {
            self.flag(EstimateFlag::TooFewBlocks {
                blocks: acc.blocks.len(),
            })
        } else {
            self
        }
    }

    fn infinite(flag: EstimateFlag) -> Self {
        Estimate::new(f64::INFINITY, f64::NAN).flag(flag)
    }
}

fn jack<G: Fn(&[f64]) -> f64>(acc: &MomentAccumulator, g: G) -> Estimate {
    let (v, e) = acc.jackknife(g);
    Estimate::new(v, e).check_blocks(acc)
}

/// `⟨m⟩`.
pub fn magnetization(acc: &MomentAccumulator) -> Estimate {
    jack(acc, |m| m[Layout::M])
}

/// `⟨m²⟩`; `symmetrized` averages over independent flavor sign flips.
pub fn second_moment(acc: &MomentAccumulator, symmetrized: bool) -> Estimate {
    let k = if symmetrized {
        Layout::M2_SYM
    } else {
        Layout::M2
    };
    jack(acc, |m| m[k])
}

/// Binder ratio `⟨m⁴⟩ / ⟨m²⟩²`.
pub fn binder(acc: &MomentAccumulator, symmetrized: bool) -> Estimate {
    let (k2, k4) = if symmetrized {
        (Layout::M2_SYM, Layout::M4_SYM)
    } else {
        (Layout::M2, Layout::M4)
    };
    jack(acc, |m| m[k4] / (m[k2] * m[k2]))
}

/// Flavor-1 correlator at the `k`-th recorded separation.
pub fn correlator(acc: &MomentAccumulator, k: usize) -> Estimate {
    let idx = acc.layout.correlator(k);
    jack(acc, |m| m[idx])
}

/// `D⁽ⁿ⁾ = ln⟨σσ⟩ / (1 - n)` at the `k`-th separation.
pub fn relative_entropy(acc: &MomentAccumulator, k: usize, n: u32) -> Estimate {
    let idx = acc.layout.correlator(k);
    if acc.mean(idx) <= 0.0 {
        return Estimate::infinite(EstimateFlag::NonPositive);
    }
    let scale = 1.0 / (1.0 - f64::from(n));
    jack(acc, |m| {
        if m[idx] > 0.0 {
            scale * libm::log(m[idx])
        } else {
            f64::INFINITY
        }
    })
}

/// Probability that every constraint of region `k` holds.
pub fn pinning_probability(acc: &MomentAccumulator, k: usize) -> Estimate {
    let idx = acc.layout.indicator(k);
    let est = jack(acc, |m| m[idx]);
    let positive = acc.positives[k];
    if positive < MIN_POSITIVE {
        est.flag(EstimateFlag::Undersampled { positive })
    } else {
        est
    }
}

/// `E = -ln P / (order - 2)` for region `k`; `+∞` when no sample satisfied
/// the constraints.
pub fn negativity(acc: &MomentAccumulator, k: usize, order: u32) -> Estimate {
    let idx = acc.layout.indicator(k);
    let positive = acc.positives[k];
    if positive == 0 {
        return Estimate::infinite(EstimateFlag::Undersampled { positive });
    }
    let scale = 1.0 / f64::from(order - 2);
    let est = jack(acc, |m| {
        if m[idx] > 0.0 {
            -scale * libm::log(m[idx])
        } else {
            f64::INFINITY
        }
    });
    if positive < MIN_POSITIVE {
        est.flag(EstimateFlag::Undersampled { positive })
    } else {
        est
    }
}

/// Effective number of samples `(Σw)² / Σw²` behind perturbation `k`.
pub fn effective_samples(acc: &MomentAccumulator, k: usize) -> f64 {
    let s = acc.total.sums[acc.layout.weight(k)];
    let s2 = acc.total.sums[acc.layout.weight_squared(k)];
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

/// `ΔF = -ln⟨e^{-ΔE}⟩` for perturbation `k`.
pub fn perturbation_free_energy(acc: &MomentAccumulator, k: usize) -> Estimate {
    let idx = acc.layout.weight(k);
    if acc.mean(idx) <= 0.0 {
        return Estimate::infinite(EstimateFlag::Undersampled { positive: 0 });
    }
    let est = jack(acc, |m| -libm::log(m[idx]));
    let ess = effective_samples(acc, k);
    if ess < MIN_POSITIVE as f64 {
        est.flag(EstimateFlag::Undersampled {
            positive: ess as u64,
        })
    } else {
        est
    }
}

/// Runs the chains of `config` recording `obs` and merges them.
pub fn sample<R: ChunkRunner>(
    config: &McConfig,
    obs: &Observables,
    runner: &R,
) -> Result<MomentAccumulator> {
    let records = run_chains(config, obs, &[], &[], runner)?;
    merge_records(&records).ok_or_else(|| invalid("no chains were run"))
}

/// `D⁽ⁿ⁾` at each separation, from flavor-1 correlators.
pub fn estimate_correlator<R: ChunkRunner>(
    config: &McConfig,
    separations: &[usize],
    improved: bool,
    runner: &R,
) -> Result<Vec<Estimate>> {
    if separations.iter().any(|&r| r % config.l == 0) {
        return Err(invalid("correlator sites must be distinct"));
    }
    let obs = Observables {
        separations: separations.to_vec(),
        improved_correlators: improved,
        ..Observables::default()
    };
    let acc = sample(config, &obs, runner)?;
    Ok((0..separations.len())
        .map(|k| relative_entropy(&acc, k, config.n))
        .collect())
}

/// `E^{(order)}` for each region, estimated in one ensemble of `order - 1`
/// flavors; `config.n` is replaced by `order`. With
/// `conditional`, each sample contributes the pinning probability given the
/// spins away from the constrained sites.
pub fn estimate_pinning_probability<R: ChunkRunner>(
    config: &McConfig,
    regions: &[Vec<ParityCheck>],
    order: u32,
    conditional: bool,
    runner: &R,
) -> Result<Vec<Estimate>> {
    if order < 4 || order % 2 == 1 {
        return Err(invalid("negativity order must be even and at least 4"));
    }
    let mut config = config.clone();
    config.n = order;
    let obs = Observables {
        regions: regions.to_vec(),
        conditional_pinning: conditional,
        ..Observables::default()
    };
    let acc = sample(&config, &obs, runner)?;
    Ok((0..regions.len())
        .map(|k| negativity(&acc, k, order))
        .collect())
}

/// `ΔF` of defect `(d₁, d₂)` (loops of `kind`), summed over `stages`
/// perturbation steps that flip consecutive groups of the defect bonds.
pub fn estimate_defect_free_energy<R: ChunkRunner>(
    config: &McConfig,
    kind: LoopKind,
    d1: &[u8],
    d2: &[u8],
    stages: usize,
    runner: &R,
) -> Result<Estimate> {
    if d1.len() != config.flavors() {
        return Err(invalid("defect vectors must have one entry per flavor"));
    }
    let code = ToricCode::new(config.l)?;
    let flips = defect_flips(&code, kind, d1, d2)?;
    if flips.is_empty() {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let groups = stage_groups(&flips, stages);
    let mut background: Vec<BondFlip> = Vec::new();
    let mut total = Estimate::new(0.0, 0.0);
    let mut var = 0.0;
    for (k, group) in groups.iter().enumerate() {
        let obs = Observables {
            defects: alloc::vec![group.clone()],
            ..Observables::default()
        };
        let records = run_chains(
            config,
            &obs,
            &background,
            &[0x7374_6167_65, k as u64],
            runner,
        )?;
        let acc = merge_records(&records).ok_or_else(|| invalid("no chains were run"))?;
        let est = perturbation_free_energy(&acc, 0);
        total.value += est.value;
        var += est.error * est.error;
        for f in est.flags {
            total = total.flag(f);
        }
        background.extend(group.iter().cloned());
    }
    total.error = libm::sqrt(var);
    Ok(total)
}
