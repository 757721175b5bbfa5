//! The error-configuration picture: replicated sums over error strings and
//! their homologically equivalent deformations.
//!
//! For errors of Pauli type `a` at rate `p`,
//!
//! ```text
//! Z'_{n,a} = 4^{-(n-1)} Σ_C P(C) Π_{s=2..n} Σ_{v⁽ˢ⁾, d⁽ˢ⁾} P(C + ∂v⁽ˢ⁾ + l^{d⁽ˢ⁾})
//! ```
//!
//! with `P(C) = p^{|C|}(1-p)^{N-|C|}`, `v⁽ˢ⁾` a subset of the sites dual to
//! the stabilizers of type `a` (`∂v` its boundary) and `l^d` the logical loop
//! of type `a` in class `d`. The inner sums factorize per replica, so each
//! error string needs one histogram of deformed weights.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::enumerate::{split_range, ChunkRunner, Sequential};
use super::loops::{ExactEngine, PartitionSpec, Sector};
use crate::code::{Cycle, LoopKind, ToricCode};
use crate::error::{invalid, Error, Result};
use crate::logsum::{log_term, LogSumExp};
use crate::model::ErrorModel;

/// Guard on `2^N · 2^{(n-1)L²} · 4^{n-1}`, as a power of two.
pub const MAX_ERROR_CONFIG_TERMS: u32 = 30;

const LN_2: f64 = core::f64::consts::LN_2;

/// Replicated error-configuration sum for errors of one Pauli type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorConfigSpec {
    /// Pauli type of the errors; deformations use loops of the same type.
    pub error: LoopKind,
    pub n: u32,
    pub p: f64,
}

impl ErrorConfigSpec {
    /// Nishimori coupling of the equivalent random-bond model.
    pub fn coupling(&self) -> Result<f64> {
        crate::model::nishimori_coupling(self.p)
    }
}

fn guard(code: &ToricCode, n: u32) -> Result<()> {
    let bits = code.num_qubits() as u64 + (n as u64 - 1) * (code.num_sites() as u64 + 2);
    if bits > MAX_ERROR_CONFIG_TERMS as u64 || code.num_qubits() > 64 {
        return Err(Error::Capacity {
            what: "error-configuration terms (log2)",
            needed: bits,
            limit: MAX_ERROR_CONFIG_TERMS as u64,
        });
    }
    Ok(())
}

/// Masks of `∂v + l^d` over all site subsets `v` and classes `d`, with
/// repetition (`v` and its complement give the same boundary).
fn deformations(code: &ToricCode, kind: LoopKind) -> Vec<u64> {
    let sites = code.num_sites();
    let boundaries: Vec<u64> = code
        .stabilizers(kind)
        .iter()
        .map(|s| match kind {
            LoopKind::X => s.x_words()[0],
            LoopKind::Z => s.z_words()[0],
        })
        .collect();
    let logical = |c: Cycle| {
        code.logical_support(kind, c)
            .into_iter()
            .fold(0u64, |m, e| m | 1 << e)
    };
    let (l1, l2) = (logical(Cycle::L1), logical(Cycle::L2));
    let mut out = Vec::with_capacity(4 << sites);
    let mut mask = 0u64;
    for k in 0..1u64 << sites {
        if k > 0 {
            mask ^= boundaries[k.trailing_zeros() as usize];
        }
        for d in [0, l1, l2, l1 ^ l2] {
            out.push(mask ^ d);
        }
    }
    out
}

/// `ln Z'_{n,a}` by explicit summation.
pub fn error_config_partition(code: &ToricCode, spec: &ErrorConfigSpec) -> Result<f64> {
    error_config_partition_with(code, spec, &Sequential, 1)
}

/// [`error_config_partition`] with chunks dispatched through `runner`.
pub fn error_config_partition_with<R: ChunkRunner>(
    code: &ToricCode,
    spec: &ErrorConfigSpec,
    runner: &R,
    chunks: usize,
) -> Result<f64> {
    if spec.n < 2 {
        return Err(invalid("Rényi index must be at least 2"));
    }
    if !(0.0..=0.5).contains(&spec.p) {
        return Err(invalid("error rate must lie in [0, 1/2]"));
    }
    guard(code, spec.n)?;
    let n_q = code.num_qubits();
    let deform = deformations(code, spec.error);
    let log_ratio = if spec.p == 0.0 {
        f64::NEG_INFINITY
    } else {
        libm::log(spec.p / (1.0 - spec.p))
    };
    let log_q = libm::log1p(-spec.p) * n_q as f64;
    let replicas = (spec.n - 1) as f64;
    let ranges = split_range(1u64 << n_q, chunks);
    let parts = runner.map_chunks(ranges.len(), |i| {
        let mut acc = LogSumExp::new();
        let mut hist = vec![0u64; n_q + 1];
        for c in ranges[i].clone() {
            let log_pc = log_term(1.0, c.count_ones() as usize, log_ratio) + log_q;
            if log_pc == f64::NEG_INFINITY {
                continue;
            }
            hist.iter_mut().for_each(|h| *h = 0);
            for &m in &deform {
                hist[(c ^ m).count_ones() as usize] += 1;
            }
            let log_f = crate::logsum::log_polynomial(&hist, log_ratio) + log_q;
            acc.add(log_pc + replicas * log_f);
        }
        acc
    });
    let mut total = LogSumExp::new();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.value() - replicas * 2.0 * LN_2)
}

/// `tr ρⁿ = Z'_{n,x} Z'_{n,z}` from the error-configuration picture.
pub fn moment_via_error_configs(code: &ToricCode, model: &ErrorModel, n: u32) -> Result<f64> {
    let zx = error_config_partition(
        code,
        &ErrorConfigSpec {
            error: LoopKind::X,
            n,
            p: model.p_x(),
        },
    )?;
    let zz = error_config_partition(
        code,
        &ErrorConfigSpec {
            error: LoopKind::Z,
            n,
            p: model.p_z(),
        },
    )?;
    Ok(libm::exp(zx + zz))
}

/// Both sides of the duality `Z_{n,a} = 2^{(n-1)N/2} Z'_{n,ā}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub n: u32,
    pub p_x: f64,
    pub p_z: f64,
    /// `ln Z_{n,x}` (contractible `X` loops, tension from `p_z`).
    pub log_z_x: f64,
    /// `ln Z_{n,z}` (contractible `Z` loops, tension from `p_x`).
    pub log_z_z: f64,
    /// `ln Z'_{n,z}` (phase-error configurations at `p_z`).
    pub log_zp_z: f64,
    /// `ln Z'_{n,x}` (bit-flip configurations at `p_x`).
    pub log_zp_x: f64,
    /// `|1 - Z_{n,x} / (2^{(n-1)N/2} Z'_{n,z})|`.
    pub residual_x: f64,
    /// `|1 - Z_{n,z} / (2^{(n-1)N/2} Z'_{n,x})|`.
    pub residual_z: f64,
}

impl DualityReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_x.max(self.residual_z)
    }
}

/// Evaluates both pictures and their relative mismatch.
pub fn verify_duality(code: &ToricCode, model: &ErrorModel, n: u32) -> Result<DualityReport> {
    verify_duality_with(code, model, n, &Sequential, 1)
}

/// [`verify_duality`] with chunks dispatched through `runner`.
pub fn verify_duality_with<R: ChunkRunner + Clone>(
    code: &ToricCode,
    model: &ErrorModel,
    n: u32,
    runner: &R,
    chunks: usize,
) -> Result<DualityReport> {
    guard(code, n)?;
    let engine = ExactEngine::with_runner(code, runner.clone(), chunks);
    let loops = |kind: LoopKind| {
        engine.partition_function(
            &PartitionSpec::new(kind, n, model.tension(kind))
                .with_sector(Sector::trivial(n as usize - 1)),
        )
    };
    let log_z_x = loops(LoopKind::X)?;
    let log_z_z = loops(LoopKind::Z)?;
    let errors = |kind: LoopKind, p: f64| {
        error_config_partition_with(code, &ErrorConfigSpec { error: kind, n, p }, runner, chunks)
    };
    let log_zp_z = errors(LoopKind::Z, model.p_z())?;
    let log_zp_x = errors(LoopKind::X, model.p_x())?;
    let shift = (n - 1) as f64 * code.num_sites() as f64 * LN_2;
    let residual = |lhs: f64, rhs: f64| libm::fabs(libm::expm1(lhs - rhs - shift));
    Ok(DualityReport {
        n,
        p_x: model.p_x(),
        p_z: model.p_z(),
        log_z_x,
        log_z_z,
        log_zp_z,
        log_zp_x,
        residual_x: residual(log_z_x, log_zp_z),
        residual_z: residual(log_z_z, log_zp_x),
    })
}
