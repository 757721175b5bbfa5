//! Loop-picture partition functions and the diagnostics built from them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::enumerate::{
    split_range, ChunkRunner, Histogram, Sequential, SignedHistogram, TupleSpace,
};
use crate::code::{LoopElement, LoopGroup, LoopKind, ToricCode};
use crate::error::{invalid, Error, Result};
use crate::model::ErrorModel;
use crate::pauli::EdgeSet;

/// Guard on `(n-1)(L²+1)`, the number of generator bits of a loop tuple.
pub const MAX_TUPLE_BITS: u32 = 30;

/// Guard on the generator bits of the joint `X`/`Z` tuple space used by
/// [`negativity_via_signs`].
pub const MAX_SIGN_TERMS: u32 = 26;

const LN_2: f64 = core::f64::consts::LN_2;

/// Homology classes admitted in a partition function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// Every loop, contractible or not.
    All,
    /// Flavor `s` restricted to class `bits[s]` (bit 0: winds along `l₁`,
    /// bit 1: along `l₂`). All zeros selects contractible loops only.
    Fixed(Vec<u8>),
}

impl Sector {
    /// Contractible loops in every flavor.
    pub fn trivial(flavors: usize) -> Sector {
        Sector::Fixed(vec![0; flavors])
    }

    /// Classes from the defect vectors `d_{l₁}` and `d_{l₂}`.
    pub fn from_defects(d1: &[u8], d2: &[u8]) -> Result<Sector> {
        if d1.len() != d2.len() || d1.iter().chain(d2).any(|&b| b > 1) {
            return Err(invalid("defect vectors must be binary and of equal length"));
        }
        Ok(Sector::Fixed(
            d1.iter().zip(d2).map(|(&a, &b)| a | (b << 1)).collect(),
        ))
    }

    fn is_trivial(&self) -> bool {
        matches!(self, Sector::Fixed(v) if v.iter().all(|&b| b == 0))
    }

    fn admits(&self, tuple: &[LoopElement]) -> bool {
        match self {
            Sector::All => true,
            Sector::Fixed(bits) => tuple.iter().zip(bits).all(|(e, &b)| e.sector == b),
        }
    }
}

/// Boundary constraint of the negativity mapping: every flavor combination
/// `h⁽ʳ⁾ = Π_{s≠r} g⁽ˢ⁾` restricted to `region` must commute with every
/// generator of the other loop kind restricted to `region`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pinning {
    pub region: EdgeSet,
}

/// A replicated loop partition function
/// `Z = Σ exp(-μ [Σ_s |g⁽ˢ⁾| + |Π_s g⁽ˢ⁾|])` over `(n-1)`-tuples of loops.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    pub kind: LoopKind,
    pub n: u32,
    /// Line tension `μ ≥ 0`; `+∞` admits only the empty tuple.
    pub tension: f64,
    pub sector: Sector,
    pub pinning: Option<Pinning>,
}

impl PartitionSpec {
    pub fn new(kind: LoopKind, n: u32, tension: f64) -> Self {
        PartitionSpec {
            kind,
            n,
            tension,
            sector: Sector::All,
            pinning: None,
        }
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = sector;
        self
    }

    pub fn with_pinning(mut self, region: EdgeSet) -> Self {
        self.pinning = Some(Pinning { region });
        self
    }

    fn flavors(&self) -> usize {
        self.n as usize - 1
    }

    fn validate(&self, code: &ToricCode) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("Rényi index must be at least 2"));
        }
        if !(self.tension >= 0.0) {
            return Err(invalid(format!(
                "line tension {} must be >= 0",
                self.tension
            )));
        }
        if let Sector::Fixed(bits) = &self.sector {
            if bits.len() != self.flavors() || bits.iter().any(|&b| b > 3) {
                return Err(invalid("defect classes must have one entry per flavor"));
            }
        }
        if let Some(p) = &self.pinning {
            if p.region.len_qubits() != code.num_qubits() {
                return Err(invalid("pinning region does not belong to this code"));
            }
        }
        Ok(())
    }
}

/// Which initial code state a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    MaxMixedLogical,
    GroundState,
}

trait Merge: Send {
    fn merge_from(&mut self, other: Self);
}

impl Merge for Histogram {
    fn merge_from(&mut self, other: Self) {
        self.merge(&other);
    }
}

impl Merge for SignedHistogram {
    fn merge_from(&mut self, other: Self) {
        self.merge(&other);
    }
}

impl<A: Merge, B: Merge> Merge for (A, B) {
    fn merge_from(&mut self, other: Self) {
        self.0.merge_from(other.0);
        self.1.merge_from(other.1);
    }
}

impl Merge for Vec<Histogram> {
    fn merge_from(&mut self, other: Self) {
        for (a, b) in self.iter_mut().zip(&other) {
            a.merge(b);
        }
    }
}

fn log_base(tension: f64) -> f64 {
    -tension
}

fn tuple_energy(tuple: &[LoopElement], prod: u64) -> usize {
    tuple.iter().map(|e| e.length as usize).sum::<usize>() + prod.count_ones() as usize
}

fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

/// Per-class histograms of the replicated loop model: `hist[c]` collects the
/// tuples whose flavor `s` lies in class `(c >> 2s) & 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectTable {
    pub flavors: usize,
    pub hist: Vec<Histogram>,
}

impl DefectTable {
    fn class_code(bits: &[u8]) -> usize {
        bits.iter()
            .enumerate()
            .fold(0, |acc, (s, &b)| acc | (b as usize) << (2 * s))
    }

    /// `ln Z^{(d)}` for per-flavor classes `bits`.
    pub fn log_z(&self, bits: &[u8], tension: f64) -> f64 {
        self.hist[Self::class_code(bits)].log_value(log_base(tension))
    }

    /// `ln Σ_d Z^{(d)}`.
    pub fn log_z_all(&self, tension: f64) -> f64 {
        let mut acc = crate::logsum::LogSumExp::new();
        for h in &self.hist {
            acc.add(h.log_value(log_base(tension)));
        }
        acc.value()
    }

    /// `ΔF_d = -ln(Z^{(d)} / Z^{(0)})`.
    pub fn delta_f(&self, bits: &[u8], tension: f64) -> f64 {
        let zero = vec![0u8; self.flavors];
        let v = self.log_z(&zero, tension) - self.log_z(bits, tension);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// All per-flavor class vectors in table order.
    pub fn classes(&self) -> Vec<Vec<u8>> {
        (0..self.hist.len())
            .map(|c| {
                (0..self.flavors)
                    .map(|s| ((c >> (2 * s)) & 3) as u8)
                    .collect()
            })
            .collect()
    }
}

/// Loop-picture engine over a fixed code; chunks may run concurrently
/// through `R`.
pub struct ExactEngine<'a, R: ChunkRunner = Sequential> {
    code: &'a ToricCode,
    runner: R,
    chunks: usize,
}

impl<'a> ExactEngine<'a, Sequential> {
    pub fn new(code: &'a ToricCode) -> Self {
        ExactEngine {
            code,
            runner: Sequential,
            chunks: 1,
        }
    }
}

impl<'a, R: ChunkRunner> ExactEngine<'a, R> {
    pub fn with_runner(code: &'a ToricCode, runner: R, chunks: usize) -> Self {
        ExactEngine {
            code,
            runner,
            chunks: chunks.max(1),
        }
    }

    pub fn code(&self) -> &ToricCode {
        self.code
    }

    fn guard(&self, n: u32) -> Result<()> {
        let bits = (n as u64 - 1) * (self.code.num_sites() as u64 + 1);
        if bits > MAX_TUPLE_BITS as u64 {
            return Err(Error::Capacity {
                what: "loop tuple generator bits (n-1)(L^2+1)",
                needed: bits,
                limit: MAX_TUPLE_BITS as u64,
            });
        }
        Ok(())
    }

    fn group(&self, kind: LoopKind, contractible_only: bool) -> Result<LoopGroup> {
        if contractible_only {
            LoopGroup::contractible(self.code, kind)
        } else {
            LoopGroup::new(self.code, kind)
        }
    }

    fn run<T, I, V>(&self, space: &TupleSpace<'_>, init: I, visit: V) -> T
    where
        T: Merge,
        I: Fn() -> T + Sync + Send,
        V: Fn(&mut T, &[LoopElement], u64) + Sync + Send,
    {
        let ranges = split_range(space.axis_len(), self.chunks);
        let parts = self.runner.map_chunks(ranges.len(), |i| {
            let mut acc = init();
            space.for_each(ranges[i].clone(), |t, prod| visit(&mut acc, t, prod));
            acc
        });
        let mut parts = parts.into_iter();
        let mut total = parts.next().unwrap_or_else(&init);
        for p in parts {
            total.merge_from(p);
        }
        total
    }

    fn hist_len(&self, n: u32) -> usize {
        n as usize * self.code.num_qubits() + 1
    }

    /// Masks of the free-group generators restricted to `region`.
    fn pinning_masks(&self, weighted: LoopKind, region: &EdgeSet) -> Vec<u64> {
        let a = region.as_mask();
        let mut masks: Vec<u64> = self
            .code
            .stabilizers(weighted.other())
            .iter()
            .map(|f| {
                let w = match weighted.other() {
                    LoopKind::X => f.x_words()[0],
                    LoopKind::Z => f.z_words()[0],
                };
                w & a
            })
            .filter(|&m| m != 0)
            .collect();
        masks.sort_unstable();
        masks.dedup();
        masks
    }

    /// Energy histogram of a partition function (independent of `μ`).
    pub fn partition_histogram(&self, spec: &PartitionSpec) -> Result<Histogram> {
        spec.validate(self.code)?;
        self.guard(spec.n)?;
        let group = self.group(spec.kind, spec.sector.is_trivial())?;
        let space = TupleSpace::new(&group, spec.flavors());
        let len = self.hist_len(spec.n);
        let pin = spec
            .pinning
            .as_ref()
            .map(|p| self.pinning_masks(spec.kind, &p.region));
        let sector = &spec.sector;
        Ok(self.run(
            &space,
            || Histogram::new(len),
            |h, t, prod| {
                if !sector.admits(t) {
                    return;
                }
                if let Some(masks) = &pin {
                    for g in t {
                        let hr = prod ^ g.mask;
                        if masks.iter().any(|&f| parity(hr & f)) {
                            return;
                        }
                    }
                }
                h.add(tuple_energy(t, prod));
            },
        ))
    }

    /// `ln Z` of a replicated loop partition function.
    pub fn partition_function(&self, spec: &PartitionSpec) -> Result<f64> {
        Ok(self
            .partition_histogram(spec)?
            .log_value(log_base(spec.tension)))
    }

    /// `ln tr ρⁿ = ln Z_{n,x} + ln Z_{n,z} - (n-1) N ln 2` for the maximally
    /// mixed logical state.
    pub fn log_moment(&self, model: &ErrorModel, n: u32) -> Result<f64> {
        let mut total = -((n - 1) as f64) * self.code.num_qubits() as f64 * LN_2;
        for kind in [LoopKind::X, LoopKind::Z] {
            let spec = PartitionSpec::new(kind, n, model.tension(kind))
                .with_sector(Sector::trivial(n as usize - 1));
            total += self.partition_function(&spec)?;
        }
        Ok(total)
    }

    pub fn moment(&self, model: &ErrorModel, n: u32) -> Result<f64> {
        Ok(libm::exp(self.log_moment(model, n)?))
    }

    /// `⟨sgn(g⁽¹⁾, X^C)⟩` over `Z` loops, `C` the string path between the
    /// plaquettes `endpoints`.
    pub fn string_correlator(
        &self,
        model: &ErrorModel,
        n: u32,
        endpoints: (usize, usize),
        state: StateKind,
    ) -> Result<f64> {
        let (a, b) = endpoints;
        if a == b {
            return Err(invalid("relative entropy needs distinct anyon positions"));
        }
        if a >= self.code.num_sites() || b >= self.code.num_sites() {
            return Err(invalid("anyon position outside the lattice"));
        }
        if n < 2 {
            return Err(invalid("Rényi index must be at least 2"));
        }
        self.guard(n)?;
        let path = self
            .code
            .string_path(LoopKind::Z, a, b)?
            .into_iter()
            .fold(0u64, |m, e| m | 1 << e);
        let sector = match state {
            StateKind::MaxMixedLogical => Sector::trivial(n as usize - 1),
            StateKind::GroundState => Sector::All,
        };
        let group = self.group(LoopKind::Z, sector.is_trivial())?;
        let space = TupleSpace::new(&group, n as usize - 1);
        let len = self.hist_len(n);
        let (signed, plain) = self.run(
            &space,
            || (SignedHistogram::new(len), Histogram::new(len)),
            |(s, h), t, prod| {
                let e = tuple_energy(t, prod);
                s.add(e, parity(t[0].mask & path));
                h.add(e);
            },
        );
        let lb = log_base(model.mu_z());
        let (sign, log_num) = signed.signed_log_value(lb);
        if sign <= 0.0 {
            return Ok(0.0);
        }
        Ok(libm::exp(log_num - plain.log_value(lb)))
    }

    /// `D⁽ⁿ⁾ = ln⟨sgn(g⁽¹⁾, X^C)⟩ / (1 - n)`; `+∞` when the correlator vanishes.
    pub fn relative_entropy(
        &self,
        model: &ErrorModel,
        n: u32,
        endpoints: (usize, usize),
        state: StateKind,
    ) -> Result<f64> {
        let c = self.string_correlator(model, n, endpoints, state)?;
        if c <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(libm::log(c) / (1.0 - f64::from(n)))
    }

    /// Histograms of the replicated model split by per-flavor homology class.
    pub fn defect_table(&self, kind: LoopKind, n: u32) -> Result<DefectTable> {
        if n < 2 {
            return Err(invalid("Rényi index must be at least 2"));
        }
        self.guard(n)?;
        let flavors = n as usize - 1;
        let group = self.group(kind, false)?;
        let space = TupleSpace::new(&group, flavors);
        let len = self.hist_len(n);
        let classes = 1usize << (2 * flavors);
        let hist = self.run(
            &space,
            || vec![Histogram::new(len); classes],
            |hs, t, prod| {
                let c = t
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (s, e)| acc | (e.sector as usize) << (2 * s));
                hs[c].add(tuple_energy(t, prod));
            },
        );
        Ok(DefectTable { flavors, hist })
    }

    /// `I_c⁽ⁿ⁾ = Σ_a ln Σ_d e^{-ΔF_{a,d}} / (n - 1) - 2 ln 2`.
    pub fn coherent_info(&self, model: &ErrorModel, n: u32) -> Result<f64> {
        let mut total = 0.0;
        for kind in [LoopKind::X, LoopKind::Z] {
            let table = self.defect_table(kind, n)?;
            let mu = model.tension(kind);
            let zero = vec![0u8; table.flavors];
            total += table.log_z_all(mu) - table.log_z(&zero, mu);
        }
        Ok(total / (f64::from(n) - 1.0) - 2.0 * LN_2)
    }

    /// Rényi negativity of even `order` from the pinned partition function;
    /// requires at most one active error type.
    pub fn negativity_pinning(
        &self,
        model: &ErrorModel,
        order: u32,
        region: &EdgeSet,
    ) -> Result<f64> {
        check_order(order)?;
        check_region(self.code, region)?;
        let weighted = match (model.p_x() > 0.0, model.p_z() > 0.0) {
            (true, true) => {
                return Err(Error::Unsupported(
                    "negativity by pinning needs a single error type; use the sign estimator"
                        .into(),
                ))
            }
            (true, false) => LoopKind::Z,
            _ => LoopKind::X,
        };
        let mu = model.tension(weighted);
        let base = PartitionSpec::new(weighted, order, mu)
            .with_sector(Sector::trivial(order as usize - 1));
        let free = self.partition_function(&base)?;
        let pinned = self.partition_function(&base.with_pinning(region.clone()))?;
        Ok((free - pinned) / (f64::from(order) - 2.0))
    }

    /// Rényi negativity of even `order` from the sign observable
    /// `Π_{s≠r} sgn_A(g_x⁽ˢ⁾, g_z⁽ʳ⁾)`, valid for any `(p_x, p_z)`.
    pub fn negativity_signs(
        &self,
        model: &ErrorModel,
        order: u32,
        region: &EdgeSet,
    ) -> Result<f64> {
        check_order(order)?;
        check_region(self.code, region)?;
        let flavors = order as usize - 1;
        let rank = self.code.num_sites() as u64 - 1;
        let bits = 2 * flavors as u64 * rank;
        if bits > MAX_SIGN_TERMS as u64 {
            return Err(Error::Capacity {
                what: "joint X/Z tuple bits for the sign estimator",
                needed: bits,
                limit: MAX_SIGN_TERMS as u64,
            });
        }
        let a = region.as_mask();
        let collect = |kind: LoopKind| -> Result<Vec<(Vec<u64>, usize)>> {
            let group = LoopGroup::contractible(self.code, kind)?;
            let space = TupleSpace::new(&group, flavors);
            let mut out = Vec::new();
            space.for_each(0..space.axis_len(), |t, prod| {
                out.push((t.iter().map(|e| e.mask).collect(), tuple_energy(t, prod)));
            });
            Ok(out)
        };
        let xs = collect(LoopKind::X)?;
        let zs = collect(LoopKind::Z)?;
        let len = self.hist_len(order);
        let mut joint = vec![0i64; len * len];
        let mut hx = Histogram::new(len);
        let mut hz = Histogram::new(len);
        for (_, ex) in &xs {
            hx.add(*ex);
        }
        let mut h = vec![0u64; flavors];
        for (gz, ez) in &zs {
            hz.add(*ez);
            let prod = gz.iter().fold(0, |acc, m| acc ^ m);
            for s in 0..flavors {
                h[s] = (prod ^ gz[s]) & a;
            }
            for (gx, ex) in &xs {
                let odd = gx
                    .iter()
                    .zip(&h)
                    .fold(0u32, |acc, (x, hs)| acc ^ (x & hs).count_ones())
                    & 1;
                joint[ex * len + ez] += if odd == 1 { -1 } else { 1 };
            }
        }
        let (lbx, lbz) = (log_base(model.mu_x()), log_base(model.mu_z()));
        let terms = joint
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| {
                let (ex, ez) = (i / len, i % len);
                let t = crate::logsum::log_term(c.unsigned_abs() as f64, ex, lbx)
                    + crate::logsum::log_term(1.0, ez, lbz);
                (c > 0, t)
            });
        let (sign, log_num) = signed_log_sum(terms);
        if sign <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let log_den = hx.log_value(lbx) + hz.log_value(lbz);
        Ok((log_num - log_den) / (2.0 - f64::from(order)))
    }
}

fn signed_log_sum(terms: impl Iterator<Item = (bool, f64)> + Clone) -> (f64, f64) {
    let max = terms
        .clone()
        .map(|(_, t)| t)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    let sum: f64 = terms
        .map(|(pos, t)| {
            let v = libm::exp(t - max);
            if pos {
                v
            } else {
                -v
            }
        })
        .sum();
    if sum > 0.0 {
        (1.0, max + libm::log(sum))
    } else if sum < 0.0 {
        (-1.0, max + libm::log(-sum))
    } else {
        (0.0, f64::NEG_INFINITY)
    }
}

fn check_order(order: u32) -> Result<()> {
    if order % 2 == 1 || order < 4 {
        return Err(invalid("negativity order must be even and at least 4"));
    }
    Ok(())
}

fn check_region(code: &ToricCode, region: &EdgeSet) -> Result<()> {
    if region.len_qubits() != code.num_qubits() {
        return Err(invalid("region does not belong to this code"));
    }
    if region.is_empty() || region.count() == code.num_qubits() {
        return Err(invalid("region must be a proper non-empty subset"));
    }
    Ok(())
}

/// `ln Z` of `spec`, enumerated sequentially.
pub fn partition_function(code: &ToricCode, spec: &PartitionSpec) -> Result<f64> {
    ExactEngine::new(code).partition_function(spec)
}

/// `tr ρⁿ` for the maximally mixed logical state under `model`.
pub fn moment_via_loops(code: &ToricCode, model: &ErrorModel, n: u32) -> Result<f64> {
    ExactEngine::new(code).moment(model, n)
}

/// Rényi relative entropy between the corrupted state and the corrupted
/// state with an `m`-anyon pair at `endpoints` (plaquette indices).
pub fn relative_entropy_via_loops(
    code: &ToricCode,
    model: &ErrorModel,
    n: u32,
    endpoints: (usize, usize),
) -> Result<f64> {
    ExactEngine::new(code).relative_entropy(model, n, endpoints, StateKind::MaxMixedLogical)
}

/// Rényi coherent information from defect free energies.
pub fn coherent_info_via_defects(code: &ToricCode, model: &ErrorModel, n: u32) -> Result<f64> {
    ExactEngine::new(code).coherent_info(model, n)
}

/// `ΔF_d` of loops of `kind` for every pair of defect vectors `(d₁, d₂)`,
/// returned as `(d₁, d₂, ΔF)`.
pub fn defect_free_energies(
    code: &ToricCode,
    model: &ErrorModel,
    kind: LoopKind,
    n: u32,
) -> Result<Vec<(Vec<u8>, Vec<u8>, f64)>> {
    let table = ExactEngine::new(code).defect_table(kind, n)?;
    let mu = model.tension(kind);
    Ok(table
        .classes()
        .into_iter()
        .map(|bits| {
            let d1 = bits.iter().map(|b| b & 1).collect();
            let d2 = bits.iter().map(|b| b >> 1).collect();
            let df = table.delta_f(&bits, mu);
            (d1, d2, df)
        })
        .collect())
}

/// Rényi negativity of even `order` by boundary pinning (one error type).
pub fn negativity_via_pinning(
    code: &ToricCode,
    model: &ErrorModel,
    order: u32,
    region: &EdgeSet,
) -> Result<f64> {
    ExactEngine::new(code).negativity_pinning(model, order, region)
}

/// Rényi negativity of even `order` from the sign observable (any error rates).
pub fn negativity_via_signs(
    code: &ToricCode,
    model: &ErrorModel,
    order: u32,
    region: &EdgeSet,
) -> Result<f64> {
    ExactEngine::new(code).negativity_signs(model, order, region)
}
