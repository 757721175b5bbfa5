//! Parallel tempering over a ladder of error rates.
//!
//! One replica per rate sweeps at its own coupling; every `swap_interval`
//! sweeps neighbouring replicas exchange configurations with probability
//! `min(1, exp((J_a - J_b)(Ψ_b - Ψ_a)))`, alternating even and odd pairs.
//! Measurements are filed by rate, not by replica.

use alloc::vec::Vec;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use super::accumulator::MomentAccumulator;
use super::chain::{prepare_system, McConfig, Measurer, ModelKind, Observables};
use super::system::SpinSystem;
use crate::error::{invalid, Result};
use crate::exact::ChunkRunner;
use crate::seed::{chain_rng, derive_seed};

const SWAP_TAG: u64 = 0x7377_6170;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperingRecord {
    pub chain_id: usize,
    pub ps: Vec<f64>,
    /// Accepted / attempted swaps between rates `k` and `k + 1`.
    pub swap_acceptance: Vec<f64>,
    pub accumulators: Vec<MomentAccumulator>,
}

fn swap_probability(ja: f64, jb: f64, psi_a: i64, psi_b: i64) -> f64 {
    let d = psi_b - psi_a;
    if d == 0 || ja == jb {
        return 1.0;
    }
    let x = (ja - jb) * d as f64;
    if x.is_nan() {
        0.0
    } else if x >= 0.0 {
        1.0
    } else {
        libm::exp(x)
    }
}

/// Runs one tempering chain; `config.p` is replaced by each entry of `ps`.
pub fn run_tempering_chain(
    config: &McConfig,
    ps: &[f64],
    swap_interval: u64,
    obs: &Observables,
    chain: usize,
) -> Result<TemperingRecord> {
    if ps.len() < 2 || ps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(
            "tempering needs at least two strictly increasing rates",
        ));
    }
    if config.model == ModelKind::Rbim {
        return Err(invalid(
            "tempering is not available for the disordered model",
        ));
    }
    if swap_interval == 0 {
        return Err(invalid("swap interval must be positive"));
    }
    let configs: Vec<McConfig> = ps
        .iter()
        .map(|&p| {
            let mut c = config.clone();
            c.p = p;
            c
        })
        .collect();
    let mut systems: Vec<SpinSystem> = configs
        .iter()
        .map(|c| prepare_system(c, &[], c.chain_seed(chain, &[SWAP_TAG])))
        .collect::<Result<_>>()?;
    let couplings: Vec<f64> = systems.iter().map(|s| s.coupling()).collect();
    let mut rng = chain_rng(derive_seed(
        config.seed_base,
        &[SWAP_TAG, config.l as u64, u64::from(config.n), chain as u64],
    ));
    let mut attempts = alloc::vec![0u64; ps.len() - 1];
    let mut accepts = alloc::vec![0u64; ps.len() - 1];
    let mut parity = 0usize;
    let mut since_swap = 0u64;

    let mut step = |systems: &mut Vec<SpinSystem>, rng: &mut crate::seed::ChainRng| {
        for s in systems.iter_mut() {
            s.sweep();
        }
        since_swap += 1;
        if since_swap == swap_interval {
            since_swap = 0;
            let mut k = parity;
            while k + 1 < systems.len() {
                attempts[k] += 1;
                let q = swap_probability(
                    couplings[k],
                    couplings[k + 1],
                    systems[k].psi(),
                    systems[k + 1].psi(),
                );
                let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                if u < q {
                    let (a, b) = systems.split_at_mut(k + 1);
                    a[k].swap_configuration(&mut b[0]);
                    accepts[k] += 1;
                }
                k += 2;
            }
            parity ^= 1;
        }
    };

    for _ in 0..config.sweeps_thermalize {
        step(&mut systems, &mut rng);
    }
    let samples = config.samples();
    let block = samples.div_ceil(config.blocks as u64).max(1);
    let mut accs: Vec<MomentAccumulator> = ps
        .iter()
        .map(|_| MomentAccumulator::new(obs.layout(), block))
        .collect();
    let mut measurers: Vec<Measurer> = couplings.iter().map(|&j| Measurer::new(obs, j)).collect();
    for _ in 0..samples {
        for _ in 0..config.measure_interval {
            step(&mut systems, &mut rng);
        }
        for k in 0..ps.len() {
            accs[k].push(measurers[k].measure(&systems[k], obs));
        }
    }
    drop(step);
    Ok(TemperingRecord {
        chain_id: chain,
        ps: ps.to_vec(),
        swap_acceptance: attempts
            .iter()
            .zip(&accepts)
            .map(|(&t, &a)| if t == 0 { 0.0 } else { a as f64 / t as f64 })
            .collect(),
        accumulators: accs,
    })
}

/// All tempering chains, merged per rate in chain order.
pub fn run_tempering<R: ChunkRunner>(
    config: &McConfig,
    ps: &[f64],
    swap_interval: u64,
    obs: &Observables,
    runner: &R,
) -> Result<(Vec<MomentAccumulator>, Vec<TemperingRecord>)> {
    config.validate()?;
    let records: Vec<TemperingRecord> = runner
        .map_chunks(config.chain_count, |c| {
            run_tempering_chain(config, ps, swap_interval, obs, c)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let mut merged = records[0].accumulators.clone();
    for r in &records[1..] {
        for (m, a) in merged.iter_mut().zip(&r.accumulators) {
            m.merge(a);
        }
    }
    Ok((merged, records))
}
