//! Chain configuration, seeding and the measurement loop.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use super::accumulator::{Layout, MomentAccumulator};
use super::pinning::ConditionalPinning;
use super::system::{Interaction, SpinSystem};
use crate::code::{Cycle, LoopKind, ToricCode};
use crate::error::{invalid, Result};
use crate::exact::ChunkRunner;
use crate::model::{nishimori_coupling, tension_from_rate};
use crate::region::ParityCheck;
use crate::seed::{chain_rng, derive_seed};

/// Which spin model a chain samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `n-1` flavors with pairwise and product couplings, `J = μ/2`.
    #[default]
    Replica,
    /// One flavor, pairwise coupling only, `J = μ/2`.
    Decoupled,
    /// One flavor with quenched bond disorder at the Nishimori coupling.
    Rbim,
}

impl ModelKind {
    fn tag(self) -> u64 {
        match self {
            ModelKind::Replica => 1,
            ModelKind::Decoupled => 2,
            ModelKind::Rbim => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// All spins up.
    #[default]
    Cold,
    /// Independent uniform spins.
    Hot,
}

const DEFAULT_BLOCKS: usize = 20;

fn default_blocks() -> usize {
    DEFAULT_BLOCKS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(rename = "L")]
    pub l: usize,
    pub n: u32,
    pub p: f64,
    pub sweeps_thermalize: u64,
    pub sweeps_measure: u64,
    pub measure_interval: u64,
    pub chain_count: usize,
    pub seed_base: u64,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub start: Start,
    /// Jackknife blocks per chain.
    #[serde(default = "default_blocks")]
    pub blocks: usize,
}

impl McConfig {
    pub fn new(l: usize, n: u32, p: f64) -> Self {
        McConfig {
            l,
            n,
            p,
            sweeps_thermalize: 1000,
            sweeps_measure: 10_000,
            measure_interval: 1,
            chain_count: 1,
            seed_base: 0,
            model: ModelKind::Replica,
            start: Start::Cold,
            blocks: DEFAULT_BLOCKS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(invalid("L must be at least 2"));
        }
        if self.n < 2 {
            return Err(invalid("n must be at least 2"));
        }
        if self.sweeps_measure == 0
            || self.measure_interval == 0
            || self.chain_count == 0
            || self.blocks == 0
        {
            return Err(invalid(
                "sweep counts, measure interval, chain count and blocks must be positive",
            ));
        }
        match self.model {
            ModelKind::Rbim => {
                nishimori_coupling(self.p)?;
            }
            _ => {
                if !(0.0..=0.5).contains(&self.p) {
                    return Err(invalid("p must lie in [0, 1/2]"));
                }
            }
        }
        Ok(())
    }

    pub fn flavors(&self) -> usize {
        match self.model {
            ModelKind::Replica => self.n as usize - 1,
            ModelKind::Decoupled | ModelKind::Rbim => 1,
        }
    }

    pub fn interaction(&self) -> Interaction {
        match self.model {
            ModelKind::Replica => Interaction::Replica,
            ModelKind::Decoupled | ModelKind::Rbim => Interaction::PairOnly,
        }
    }

    pub fn coupling(&self) -> Result<f64> {
        match self.model {
            ModelKind::Rbim => nishimori_coupling(self.p),
            _ => Ok(0.5 * tension_from_rate(self.p)),
        }
    }

    /// Samples recorded per chain.
    pub fn samples(&self) -> u64 {
        self.sweeps_measure / self.measure_interval
    }

    /// Seed of chain `chain`; `extra` separates independent ensembles at the
    /// same physical point (e.g. free-energy stages).
    pub fn chain_seed(&self, chain: usize, extra: &[u64]) -> u64 {
        let mut tags = vec![
            self.model.tag(),
            self.l as u64,
            u64::from(self.n),
            self.p.to_bits(),
            chain as u64,
        ];
        tags.extend_from_slice(extra);
        derive_seed(self.seed_base, &tags)
    }
}

/// Negation of the bond signs on `bonds` for the flavors set in `flavors`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondFlip {
    pub bonds: Vec<usize>,
    pub flavors: Vec<bool>,
}

impl BondFlip {
    pub fn is_empty(&self) -> bool {
        self.bonds.is_empty() || !self.flavors.iter().any(|&f| f)
    }
}

/// Bonds dual to the logical loop of `kind` along `cycle`.
pub fn cycle_bonds(code: &ToricCode, kind: LoopKind, cycle: Cycle) -> Vec<usize> {
    code.logical_support(kind, cycle)
        .into_iter()
        .map(|e| code.edge_to_bond(kind, e))
        .collect()
}

/// Bond flips inserting defect `(d₁, d₂)`: flavor `s` is twisted along `l₁`
/// when `d₁[s] = 1` and along `l₂` when `d₂[s] = 1`. One entry per bond.
pub fn defect_flips(
    code: &ToricCode,
    kind: LoopKind,
    d1: &[u8],
    d2: &[u8],
) -> Result<Vec<BondFlip>> {
    if d1.len() != d2.len() || d1.is_empty() {
        return Err(invalid("defect vectors must have equal, non-zero length"));
    }
    if d1.iter().chain(d2).any(|&d| d > 1) {
        return Err(invalid("defect entries must be 0 or 1"));
    }
    let f = d1.len();
    let mut out: Vec<BondFlip> = Vec::new();
    for (cycle, d) in [(Cycle::L1, d1), (Cycle::L2, d2)] {
        let flavors: Vec<bool> = d.iter().map(|&x| x == 1).collect();
        if !flavors.iter().any(|&x| x) {
            continue;
        }
        for b in cycle_bonds(code, kind, cycle) {
            match out.iter_mut().find(|x| x.bonds[0] == b) {
                Some(x) => {
                    for s in 0..f {
                        x.flavors[s] ^= flavors[s];
                    }
                }
                None => out.push(BondFlip {
                    bonds: vec![b],
                    flavors: flavors.clone(),
                }),
            }
        }
    }
    out.retain(|x| !x.is_empty());
    Ok(out)
}

/// Merges consecutive bond flips into `stages` groups of near-equal size.
pub fn stage_groups(flips: &[BondFlip], stages: usize) -> Vec<Vec<BondFlip>> {
    let stages = stages.clamp(1, flips.len().max(1));
    let mut out = Vec::with_capacity(stages);
    for k in 0..stages {
        let a = k * flips.len() / stages;
        let b = (k + 1) * flips.len() / stages;
        out.push(flips[a..b].to_vec());
    }
    out
}

/// What to record at every measurement.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// Separations `r` of the flavor-1 correlator, averaged over translations
    /// and both lattice directions.
    pub separations: Vec<usize>,
    /// Use conditional expectations `tanh(J h_i) tanh(J h_j)` where the two
    /// sites are not neighbours.
    pub improved_correlators: bool,
    /// Parity constraints per region; the indicator requires every check for
    /// every combination `π σ⁽ʳ⁾`.
    pub regions: Vec<Vec<ParityCheck>>,
    /// Record the pinning probability conditioned on the spins away from the
    /// constrained sites instead of the bare indicator.
    #[serde(default)]
    pub conditional_pinning: bool,
    /// Perturbations whose Boltzmann factor `e^{-ΔE}` is averaged. Each entry
    /// is a set of bond flips applied together.
    pub defects: Vec<Vec<BondFlip>>,
}

impl Observables {
    pub fn layout(&self) -> Layout {
        Layout {
            separations: self.separations.len(),
            regions: self.regions.len(),
            defects: self.defects.len(),
        }
    }
}

/// One chain's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub chain_id: usize,
    pub seed: u64,
    pub sweep_count: u64,
    pub accepted: u64,
    pub accumulator: MomentAccumulator,
}

impl ChainRecord {
    /// Fraction of accepted proposals over the whole chain.
    pub fn acceptance(&self, sites: usize, flavors: usize) -> f64 {
        self.accepted as f64 / (self.sweep_count as f64 * (sites * flavors) as f64)
    }
}

pub(crate) struct Measurer {
    layout: Layout,
    tanh: [f64; 17],
    improved: bool,
    buffer: Vec<f64>,
    fields: Vec<f64>,
    plans: Option<Vec<Option<ConditionalPinning>>>,
}

impl Measurer {
    pub(crate) fn new(obs: &Observables, coupling: f64) -> Self {
        let mut tanh = [0.0; 17];
        for (k, t) in tanh.iter_mut().enumerate() {
            let h = k as f64 - 8.0;
            *t = if h == 0.0 {
                0.0
            } else {
                libm::tanh(coupling * h)
            };
        }
        Measurer {
            layout: obs.layout(),
            tanh,
            improved: obs.improved_correlators && coupling.is_finite(),
            buffer: vec![0.0; obs.layout().width()],
            fields: Vec::new(),
            plans: None,
        }
    }

    pub(crate) fn measure(&mut self, sys: &SpinSystem, obs: &Observables) -> &[f64] {
        let f = sys.flavors();
        let lat = sys.lattice();
        let n = lat.num_sites();
        let l = lat.size();
        let x = &mut self.buffer;
        let norm = (f * n) as f64;
        let mags = sys.magnetization();
        let m = mags.iter().sum::<i64>() as f64 / norm;
        x[Layout::M] = m;
        x[Layout::ABS_M] = libm::fabs(m);
        x[Layout::M2] = m * m;
        x[Layout::M4] = m * m * m * m;
        let squares: Vec<f64> = mags
            .iter()
            .map(|&v| {
                let a = v as f64 / norm;
                a * a
            })
            .collect();
        let sum2: f64 = squares.iter().sum();
        let sum4: f64 = squares.iter().map(|s| s * s).sum();
        x[Layout::M2_SYM] = sum2;
        x[Layout::M4_SYM] = sum4 + 3.0 * (sum2 * sum2 - sum4);

        if !obs.separations.is_empty() {
            if self.improved {
                self.fields.clear();
                self.fields
                    .extend((0..n).map(|i| self.tanh[(sys.local_field(i, 0) + 8) as usize]));
            }
            for (k, &r) in obs.separations.iter().enumerate() {
                let distance = r % l;
                let distance = distance.min(l - distance);
                let improved = self.improved && distance >= 2;
                let mut acc = 0.0;
                for i in 0..n {
                    for j in [lat.shift(i, 0, r), lat.shift(i, r, 0)] {
                        acc += if improved {
                            self.fields[i] * self.fields[j]
                        } else {
                            f64::from(sys.spin(i, 0) * sys.spin(j, 0))
                        };
                    }
                }
                x[self.layout.correlator(k)] = acc / (2 * n) as f64;
            }
        }

        if obs.conditional_pinning && self.plans.is_none() {
            self.plans = Some(
                obs.regions
                    .iter()
                    .map(|c| ConditionalPinning::new(lat, c, f))
                    .collect(),
            );
        }
        for (k, checks) in obs.regions.iter().enumerate() {
            let plan = self.plans.as_ref().and_then(|p| p[k].as_ref());
            x[self.layout.indicator(k)] = match plan {
                Some(plan) => plan.probability(sys),
                None => {
                    let ok = (0..f).all(|r| {
                        checks.iter().all(|c| {
                            c.sites
                                .iter()
                                .fold(1i8, |acc, &i| acc * sys.product_spin(i) * sys.spin(i, r))
                                == 1
                        })
                    });
                    if ok {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }

        for (k, flips) in obs.defects.iter().enumerate() {
            let dpsi: i64 = flips
                .iter()
                .map(|b| sys.bond_flip_psi(&b.bonds, &b.flavors))
                .sum();
            let w = boltzmann(sys.coupling(), dpsi);
            x[self.layout.weight(k)] = w;
            x[self.layout.weight_squared(k)] = w * w;
        }
        x
    }
}

/// `e^{J ΔΨ}` with `0 · ∞` read as `0`.
fn boltzmann(j: f64, dpsi: i64) -> f64 {
    if dpsi == 0 {
        1.0
    } else {
        libm::exp(j * dpsi as f64)
    }
}

/// Builds the system of `chain`, applies `background` flips and quenched
/// disorder, and sets the initial spins.
pub fn prepare_system(config: &McConfig, background: &[BondFlip], seed: u64) -> Result<SpinSystem> {
    config.validate()?;
    let mut sys = SpinSystem::new(
        config.l,
        config.flavors(),
        config.interaction(),
        config.coupling()?,
        seed,
    )?;
    if config.model == ModelKind::Rbim {
        let mut rng = chain_rng(derive_seed(seed, &[0x6469_736f_7264_6572]));
        let threshold = (config.p * 18446744073709551616.0) as u64;
        let signs: Vec<i8> = (0..sys.signs().len())
            .map(|_| if rng.next_u64() < threshold { -1 } else { 1 })
            .collect();
        sys.set_signs(&signs)?;
    }
    for b in background {
        sys.flip_bonds(&b.bonds, &b.flavors)?;
    }
    match config.start {
        Start::Cold => sys.cold_start(),
        Start::Hot => sys.hot_start(),
    }
    Ok(sys)
}

/// Runs one chain of the ensemble with `background` flips applied.
pub fn run_chain_in(
    config: &McConfig,
    obs: &Observables,
    background: &[BondFlip],
    chain: usize,
    extra: &[u64],
) -> Result<ChainRecord> {
    let seed = config.chain_seed(chain, extra);
    let mut sys = prepare_system(config, background, seed)?;
    let mut accepted = 0u64;
    for _ in 0..config.sweeps_thermalize {
        accepted += sys.sweep();
    }
    let samples = config.samples();
    let block = samples.div_ceil(config.blocks as u64).max(1);
    let mut acc = MomentAccumulator::new(obs.layout(), block);
    let mut measurer = Measurer::new(obs, sys.coupling());
    for _ in 0..samples {
        for _ in 0..config.measure_interval {
            accepted += sys.sweep();
        }
        acc.push(measurer.measure(&sys, obs));
    }
    Ok(ChainRecord {
        chain_id: chain,
        seed,
        sweep_count: sys.sweeps(),
        accepted,
        accumulator: acc,
    })
}

/// Runs chain `chain` of the plain (defect-free) ensemble.
pub fn run_chain(config: &McConfig, obs: &Observables, chain: usize) -> Result<ChainRecord> {
    run_chain_in(config, obs, &[], chain, &[])
}

/// Runs all `chain_count` chains through `runner`, returned in chain order.
pub fn run_chains<R: ChunkRunner>(
    config: &McConfig,
    obs: &Observables,
    background: &[BondFlip],
    extra: &[u64],
    runner: &R,
) -> Result<Vec<ChainRecord>> {
    config.validate()?;
    runner
        .map_chunks(config.chain_count, |c| {
            run_chain_in(config, obs, background, c, extra)
        })
        .into_iter()
        .collect()
}

/// Merges chain accumulators in chain order.
pub fn merge_records(records: &[ChainRecord]) -> Option<MomentAccumulator> {
    let mut it = records.iter();
    let mut acc = it.next()?.accumulator.clone();
    for r in it {
        acc.merge(&r.accumulator);
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Sequential;

    #[test]
    fn seeds_are_distinct() {
        let c = McConfig::new(8, 3, 0.2);
        let mut seeds: Vec<u64> = (0..100).map(|k| c.chain_seed(k, &[])).collect();
        seeds.extend((0..100).map(|k| c.chain_seed(k, &[1])));
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = McConfig::new(8, 2, 0.2);
        c.chain_count = 0;
        assert!(c.validate().is_err());
        let mut c = McConfig::new(8, 2, 0.6);
        assert!(c.validate().is_err());
        c.p = 0.5;
        c.model = ModelKind::Rbim;
        assert!(c.validate().is_err());
    }

    #[test]
    fn nishimori_coupling_value() {
        let mut c = McConfig::new(8, 2, 0.109);
        c.model = ModelKind::Rbim;
        assert!((c.coupling().unwrap() - 1.0505).abs() < 1e-4);
    }

    #[test]
    fn defects_cancel_on_shared_bonds() {
        let code = ToricCode::new(4).unwrap();
        let flips = defect_flips(&code, LoopKind::Z, &[1, 0], &[0, 0]).unwrap();
        assert_eq!(flips.len(), 4);
        assert!(defect_flips(&code, LoopKind::Z, &[0, 0], &[0, 0])
            .unwrap()
            .is_empty());
        let both = defect_flips(&code, LoopKind::Z, &[1, 1], &[1, 0]).unwrap();
        assert_eq!(both.len(), 8);
        let groups = stage_groups(&both, 3);
        assert_eq!(groups.iter().map(|g| g.len()).sum::<usize>(), 8);
    }

    #[test]
    fn reproducible_and_runner_independent() {
        let mut c = McConfig::new(6, 3, 0.2);
        c.sweeps_measure = 500;
        c.chain_count = 3;
        let obs = Observables {
            separations: vec![2, 3],
            improved_correlators: true,
            ..Observables::default()
        };
        let a = run_chains(&c, &obs, &[], &[], &Sequential).unwrap();
        let b: Vec<ChainRecord> = (0..3).map(|k| run_chain(&c, &obs, k).unwrap()).collect();
        assert_eq!(a, b);
        let ma = merge_records(&a).unwrap();
        let mb = merge_records(&b).unwrap();
        assert_eq!(
            ma.total
                .sums
                .iter()
                .map(|x| x.to_bits())
                .collect::<Vec<_>>(),
            mb.total
                .sums
                .iter()
                .map(|x| x.to_bits())
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn symmetrized_moments_for_one_flavor_are_plain() {
        let mut c = McConfig::new(6, 2, 0.15);
        c.sweeps_measure = 200;
        let rec = run_chain(&c, &Observables::default(), 0).unwrap();
        let m = rec.accumulator.means();
        assert!((m[Layout::M2] - m[Layout::M2_SYM]).abs() < 1e-12);
        assert!((m[Layout::M4] - m[Layout::M4_SYM]).abs() < 1e-12);
    }
}
