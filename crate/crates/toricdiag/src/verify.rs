//! Self-checks of the engines.
//!
//! `quick` covers algebraic identities, the Binder limits, complement
//! symmetry of the negativity, the zero defect and reproducibility. `full`
//! adds every dense-vs-loop comparison at `L = 2` and the duality between the
//! loop and error-configuration pictures at `L = 2, 3`.

use std::time::Instant;

use toricdiag_core::code::Cycle;
use toricdiag_core::dense::{
    renyi_coherent_info, renyi_moment, renyi_negativity, renyi_relative_entropy, DenseState,
    InitialState,
};
use toricdiag_core::exact::{
    coherent_info_via_defects, moment_via_loops, verify_duality_with, ExactEngine, Sequential,
    StateKind,
};
use toricdiag_core::mc::estimators::{binder, estimate_defect_free_energy, sample};
use toricdiag_core::mc::{run_chains, run_tempering, McConfig, Observables, Start};
use toricdiag_core::pauli::{commutation_sign, region_sign, y_phase};
use toricdiag_core::region::plaquette_block;
use toricdiag_core::seed::splitmix64;
use toricdiag_core::{EdgeSet, ErrorModel, LoopKind, PauliString, Sign, ToricCode};

use crate::config::Level;
use crate::io::{Outcome, ResultRow};
use crate::runner::{chunks, Rayon};

/// Error rates of the cross-engine comparisons.
pub const GRID: [f64; 6] = [0.0, 0.05, 0.1, 0.178, 0.3, 0.45];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub seconds: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Relative difference; absolute when both values are below `1e-12`.
/// Equal infinities agree.
pub fn relative(a: f64, b: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() {
        return if a == b { 0.0 } else { f64::INFINITY };
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// The smaller of `relative(a, b)` and `100 |a - b|`: agreement to relative
/// `1e-10` or to absolute `1e-12` both give `1e-10`.
pub fn deviation(a: f64, b: f64) -> f64 {
    relative(a, b).min(100.0 * (a - b).abs())
}

type Probe = fn() -> f64;

fn timed(name: &str, tolerance: f64, f: Probe) -> Check {
    let t = Instant::now();
    let residual = f();
    Check {
        name: name.into(),
        residual: if residual.is_nan() { f64::INFINITY } else { residual },
        tolerance,
        seconds: t.elapsed().as_secs_f64(),
    }
}

fn random_strings(count: usize, n: usize) -> Vec<PauliString> {
    let mask = (1u64 << n) - 1;
    let mut s = 0x5eed_u64;
    let mut next = move || {
        s = splitmix64(s);
        s
    };
    (0..count)
        .map(|_| PauliString::from_masks(n, next() & mask, next() & mask))
        .collect()
}

/// Violations of the composition rules of `y_A` and `sgn_A`.
pub fn pauli_identities() -> f64 {
    let n = 40;
    let ps = random_strings(3000, n);
    let regions: Vec<EdgeSet> = random_strings(1000, n)
        .iter()
        .map(|p| EdgeSet::from_edges(n, (0..n).filter(|&q| p.x_bit(q))).unwrap())
        .collect();
    let mut bad = 0usize;
    for k in 0..1000 {
        let (g, h, f, a) = (&ps[3 * k], &ps[3 * k + 1], &ps[3 * k + 2], &regions[k]);
        let gh = g.compose(h).unwrap();
        let ya = |x: &PauliString| y_phase(x, a).unwrap();
        let sa = |x: &PauliString, y: &PauliString| region_sign(x, y, a).unwrap();
        if ya(&gh) != ya(g) * ya(h) * sa(g, h) {
            bad += 1;
        }
        if sa(g, h) * region_sign(g, h, &a.complement()).unwrap() != commutation_sign(g, h).unwrap() {
            bad += 1;
        }
        if sa(&gh, f) != sa(g, f) * sa(h, f) {
            bad += 1;
        }
    }
    bad as f64
}

/// Violations of stabilizer commutation and logical pairing for `L = 2..5`.
pub fn code_algebra() -> f64 {
    let mut bad = 0usize;
    for l in 2..6 {
        let code = ToricCode::new(l).unwrap();
        let logicals: Vec<(LoopKind, Cycle, PauliString)> = [LoopKind::X, LoopKind::Z]
            .into_iter()
            .flat_map(|k| [Cycle::L1, Cycle::L2].map(|c| (k, c, code.logical(k, c))))
            .collect();
        let stabs: Vec<&PauliString> = code
            .vertex_stabilizers()
            .iter()
            .chain(code.plaquette_stabilizers())
            .collect();
        for a in &stabs {
            for b in &stabs {
                bad += usize::from(commutation_sign(a, b).unwrap() != Sign::Plus);
            }
            for (_, _, g) in &logicals {
                bad += usize::from(commutation_sign(a, g).unwrap() != Sign::Plus);
            }
        }
        for (k1, c1, g) in &logicals {
            for (k2, c2, h) in &logicals {
                let anti = k1 != k2 && c1 == c2;
                bad += usize::from((commutation_sign(g, h).unwrap() == Sign::Minus) != anti);
            }
        }
    }
    bad as f64
}

fn binder_at(n: u32, p: f64, start: Start, sweeps: u64, interval: u64, chains: usize) -> [f64; 2] {
    let mut c = McConfig::new(8, n, p);
    c.start = start;
    c.sweeps_thermalize = sweeps / 10;
    c.sweeps_measure = sweeps;
    c.measure_interval = interval;
    c.chain_count = chains;
    c.seed_base = 3;
    let acc = sample(&c, &Observables::default(), &Rayon).unwrap();
    [binder(&acc, false).value, binder(&acc, true).value]
}

/// Largest deviation from the independent-spin value `3 - 2/N` in the
/// paramagnet (`p = 0.01`, `L = 8`, `n = 2, 3, 4`), raw and symmetrized.
pub fn binder_paramagnet() -> f64 {
    let free = 3.0 - 2.0 / 64.0;
    [2u32, 3, 4]
        .into_iter()
        .flat_map(|n| binder_at(n, 0.01, Start::Hot, 20_000, 20, 16))
        .map(|b| (b - free).abs())
        .fold(0.0, f64::max)
}

/// Largest deviation from `B = 1` (raw) and `3 - 2/(n-1)` (symmetrized) deep
/// in the ordered phase (`p = 0.45`).
pub fn binder_ordered() -> f64 {
    let mut worst = 0.0f64;
    for n in [2u32, 3, 4] {
        let [raw, sym] = binder_at(n, 0.45, Start::Cold, 2000, 1, 1);
        let f = f64::from(n - 1);
        worst = worst.max((raw - 1.0).abs()).max((sym - (3.0 - 2.0 / f)).abs());
    }
    worst
}

/// `|E_A - E_Ā|` at `L = 2` from both engines.
pub fn complement_symmetry() -> f64 {
    let code = ToricCode::new(2).unwrap();
    let rho0 = DenseState::new(&code, InitialState::MaxMixedLogical).unwrap();
    let engine = ExactEngine::new(&code);
    let regions = [
        EdgeSet::from_edges(8, [0, 1, 4]).unwrap(),
        EdgeSet::from_edges(8, [0, 6]).unwrap(),
        plaquette_block(&code, 0, 0, 1, 1).unwrap(),
    ];
    let mut worst = 0.0f64;
    for p in [0.05, 0.15, 0.3] {
        for model in [ErrorModel::phase(p).unwrap(), ErrorModel::bit_flip(p).unwrap()] {
            let rho = rho0.apply_channel(&model);
            for a in &regions {
                let abar = a.complement();
                for order in [4, 6] {
                    let d = (renyi_negativity(&rho, a, order).unwrap()
                        - renyi_negativity(&rho, &abar, order).unwrap())
                    .abs();
                    let l = (engine.negativity_pinning(&model, order, a).unwrap()
                        - engine.negativity_pinning(&model, order, &abar).unwrap())
                    .abs();
                    worst = worst.max(d).max(l);
                }
            }
        }
    }
    worst
}

/// `ΔF` of the empty defect, exactly and by Monte Carlo.
pub fn zero_defect() -> f64 {
    let code = ToricCode::new(2).unwrap();
    let engine = ExactEngine::new(&code);
    let mut worst = 0.0f64;
    for kind in [LoopKind::X, LoopKind::Z] {
        let table = engine.defect_table(kind, 3).unwrap();
        for mu in [0.1, 1.0, 3.0] {
            worst = worst.max(table.delta_f(&[0, 0], mu).abs());
        }
    }
    let mut c = McConfig::new(8, 3, 0.2);
    c.sweeps_thermalize = 10;
    c.sweeps_measure = 100;
    let f = estimate_defect_free_energy(&c, LoopKind::Z, &[0, 0], &[0, 0], 2, &Rayon).unwrap();
    worst.max(f.value.abs()).max(f.error.abs())
}

/// Number of mismatching serializations across reruns and runners.
pub fn determinism() -> f64 {
    let mut c = McConfig::new(6, 3, 0.2);
    c.sweeps_thermalize = 50;
    c.sweeps_measure = 400;
    c.chain_count = 3;
    c.seed_base = 11;
    let obs = Observables {
        separations: vec![1, 2],
        ..Observables::default()
    };
    let a = serde_json::to_string(&run_chains(&c, &obs, &[], &[], &Rayon).unwrap()).unwrap();
    let b = serde_json::to_string(&run_chains(&c, &obs, &[], &[], &Rayon).unwrap()).unwrap();
    let s = serde_json::to_string(&run_chains(&c, &obs, &[], &[], &Sequential).unwrap()).unwrap();
    let ps = [0.15, 0.2, 0.25];
    let t1 = serde_json::to_string(&run_tempering(&c, &ps, 1, &obs, &Rayon).unwrap().0).unwrap();
    let t2 = serde_json::to_string(&run_tempering(&c, &ps, 1, &obs, &Sequential).unwrap().0).unwrap();
    let mut other = c.clone();
    other.seed_base += 1;
    let d = serde_json::to_string(&run_chains(&other, &obs, &[], &[], &Rayon).unwrap()).unwrap();
    (usize::from(a != b) + usize::from(a != s) + usize::from(t1 != t2) + usize::from(a == d)) as f64
}

/// Dense against loop sums for `tr ρⁿ`, `D⁽ⁿ⁾`, `I_c⁽ⁿ⁾` and `E⁽²ⁿ⁾` at
/// `L = 2`, `n = 2, 3` over [`GRID`].
/// Every cross-engine pair at `L = 2`, labelled, as (dense, loop) values.
pub fn cross_engine_pairs() -> Vec<(String, f64, f64)> {
    let code = ToricCode::new(2).unwrap();
    let engine = ExactEngine::new(&code);
    let mixed = DenseState::new(&code, InitialState::MaxMixedLogical).unwrap();
    let bell = DenseState::new(&code, InitialState::BellWithReference).unwrap();
    let w = code.string_operator(LoopKind::Z, 0, 3).unwrap();
    let excited = mixed.conjugated(&w).unwrap();
    let region = plaquette_block(&code, 0, 0, 1, 1).unwrap();
    let mut out = Vec::new();
    for p in GRID {
        let model = ErrorModel::symmetric(p).unwrap();
        let rho = mixed.apply_channel(&model);
        let rho_m = excited.apply_channel(&model);
        let rho_rq = bell.apply_channel(&model);
        for n in [2u32, 3] {
            out.push((
                format!("tr rho^{n} at p={p}"),
                renyi_moment(&rho, n).unwrap(),
                moment_via_loops(&code, &model, n).unwrap(),
            ));
            out.push((
                format!("D^({n}) at p={p}"),
                renyi_relative_entropy(&rho, &rho_m, n).unwrap(),
                engine.relative_entropy(&model, n, (0, 3), StateKind::MaxMixedLogical).unwrap(),
            ));
            out.push((
                format!("I_c^({n}) at p={p}"),
                renyi_coherent_info(&rho_rq, n).unwrap(),
                coherent_info_via_defects(&code, &model, n).unwrap(),
            ));
            for (label, single) in [("phase", ErrorModel::phase(p).unwrap()), ("bit-flip", ErrorModel::bit_flip(p).unwrap())] {
                let r = mixed.apply_channel(&single);
                out.push((
                    format!("E^({}) {label} at p={p}", 2 * n),
                    renyi_negativity(&r, &region, 2 * n).unwrap(),
                    engine.negativity_pinning(&single, 2 * n, &region).unwrap(),
                ));
            }
        }
    }
    out
}

/// Largest [`deviation`] over [`cross_engine_pairs`].
pub fn cross_engine() -> f64 {
    cross_engine_pairs()
        .iter()
        .map(|(_, a, b)| deviation(*a, *b))
        .fold(0.0, f64::max)
}

fn duality(l: usize, ns: &[u32]) -> f64 {
    let code = ToricCode::new(l).unwrap();
    let mut worst = 0.0f64;
    for &n in ns {
        for (px, pz) in [(0.05, 0.2), (0.178, 0.109), (0.3, 0.45)] {
            let model = ErrorModel::new(px, pz).unwrap();
            let r = verify_duality_with(&code, &model, n, &Rayon, chunks()).unwrap();
            worst = worst.max(r.max_residual());
        }
    }
    worst
}

pub fn duality_small() -> f64 {
    duality(2, &[2, 3])
}

pub fn duality_three() -> f64 {
    duality(3, &[2])
}

pub fn checks(level: Level) -> Vec<Check> {
    let mut out = vec![
        timed("pauli-composition", 0.0, pauli_identities),
        timed("code-algebra", 0.0, code_algebra),
        timed("binder-paramagnet", 0.1, binder_paramagnet),
        timed("binder-ordered", 1e-3, binder_ordered),
        timed("negativity-complement", 1e-10, complement_symmetry),
        timed("zero-defect", 1e-12, zero_defect),
        timed("determinism", 0.0, determinism),
    ];
    if level == Level::Full {
        out.push(timed("cross-engine-L2", 1e-10, cross_engine));
        out.push(timed("duality-L2", 1e-10, duality_small));
        out.push(timed("duality-L3", 1e-10, duality_three));
    }
    out
}

pub fn run(level: Level) -> Outcome {
    let mut out = Outcome::default();
    let method = match level {
        Level::Quick => "verify-quick",
        Level::Full => "verify-full",
    };
    for c in checks(level) {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        out.line(format!(
            "{status} {:<24} residual {:.3e} (tolerance {:.0e}, {:.1} s)",
            c.name, c.residual, c.tolerance, c.seconds
        ));
        if !c.passed() {
            out.failures.push(format!("{}: residual {:e} exceeds {:e}", c.name, c.residual, c.tolerance));
        }
        out.rows.push(ResultRow {
            quantity: c.name.clone(),
            n: 0,
            l: String::new(),
            p: f64::NAN,
            value: c.residual,
            error: c.tolerance,
            method: method.into(),
            seed_base: 0,
            chains: 0,
            sweeps_thermalize: 0,
            sweeps_measure: 0,
        });
    }
    out
}
