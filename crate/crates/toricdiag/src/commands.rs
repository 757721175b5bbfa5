//! The experiment subcommands.

use std::collections::BTreeMap;

use toricdiag_core::analysis::{
    binder_crossing, fss_collapse, kitaev_preskill, linear_fit, regions_from_accumulator, Curve,
    KpFormula, ScalingPoint,
};
use toricdiag_core::exact::{ExactEngine, StateKind};
use toricdiag_core::mc::estimators::{
    binder, magnetization, negativity, perturbation_free_energy, relative_entropy, second_moment,
};
use toricdiag_core::mc::{
    defect_flips, merge_records, run_chains, run_tempering, stage_groups, BondFlip, ChainRecord,
    McConfig, MomentAccumulator, Observables,
};
use toricdiag_core::region::{parity_checks, Tripartition, KP_LABELS};
use toricdiag_core::{LoopKind, ToricCode};

use crate::config::{Command, ErrorType, ExperimentConfig, Method};
use crate::error::{CliError, CliResult};
use crate::io::{read_jsonl, AccumulatorRecord, Outcome, ResultRow};
use crate::runner::{chunks, Rayon};
use crate::verify;

const STAGE_TAG: u64 = 0x7374_6167_65;

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    match cfg.command() {
        Command::Moments => moments(cfg),
        Command::Threshold => threshold(cfg),
        Command::Collapse => collapse(cfg),
        Command::Negativity => negativity_command(cfg),
        Command::CoherentInfo => coherent_info(cfg),
        Command::RelativeEntropy => relative_entropy_command(cfg),
        Command::Verify => Ok(verify::run(cfg.verify.level)),
    }
}

fn row(cfg: &ExperimentConfig, quantity: impl Into<String>, l: impl ToString, p: f64, value: f64, error: f64, method: &str) -> ResultRow {
    ResultRow {
        quantity: quantity.into(),
        n: cfg.physics.n,
        l: l.to_string(),
        p,
        value,
        error,
        method: method.into(),
        seed_base: cfg.mc.seed,
        chains: cfg.mc.chains,
        sweeps_thermalize: cfg.mc.sweeps_thermalize,
        sweeps_measure: cfg.mc.sweeps_measure,
    }
}

fn record(ensemble: &str, c: &McConfig, seeds: Vec<u64>, acc: MomentAccumulator) -> AccumulatorRecord {
    AccumulatorRecord {
        ensemble: ensemble.into(),
        n: c.n,
        l: c.l,
        p: c.p,
        seed_base: c.seed_base,
        chain_seeds: seeds,
        sweeps_thermalize: c.sweeps_thermalize,
        sweeps_measure: c.sweeps_measure,
        measure_interval: c.measure_interval,
        accumulator: acc,
    }
}

fn merged(records: &[ChainRecord]) -> CliResult<(Vec<u64>, MomentAccumulator)> {
    let acc = merge_records(records).ok_or_else(|| CliError::Config("mc.chains: no chains were run".into()))?;
    Ok((records.iter().map(|r| r.seed).collect(), acc))
}

fn method_tag(cfg: &ExperimentConfig) -> &'static str {
    if cfg.mc.tempering {
        "mc-tempering"
    } else {
        "mc"
    }
}

/// Plain-ensemble accumulators for every `(L, p)`, sampled or read back.
fn moment_data(cfg: &ExperimentConfig, out: &mut Outcome) -> CliResult<Vec<AccumulatorRecord>> {
    if let Some(path) = &cfg.analysis.input {
        let all: Vec<AccumulatorRecord> = read_jsonl(path)?;
        let keep: Vec<AccumulatorRecord> = all
            .into_iter()
            .filter(|r| r.ensemble == "moments" && r.n == cfg.physics.n && cfg.physics.l.contains(&r.l))
            .collect();
        if keep.is_empty() {
            return Err(CliError::Config(format!(
                "analysis.input: {} holds no moment records for n = {} and L in {:?}",
                path.display(),
                cfg.physics.n,
                cfg.physics.l
            )));
        }
        out.line(format!("read {} moment records from {}", keep.len(), path.display()));
        return Ok(keep);
    }
    let ps = cfg.physics.p.values();
    let n = cfg.physics.n;
    let obs = Observables::default();
    let mut data = Vec::new();
    for &l in &cfg.physics.l {
        if cfg.mc.tempering {
            let base = cfg.mc_config(l, n, ps[0]);
            let (accs, recs) = run_tempering(&base, &ps, cfg.mc.swap_interval, &obs, &Rayon)?;
            let mean: Vec<String> = (0..ps.len() - 1)
                .map(|k| {
                    let a = recs.iter().map(|r| r.swap_acceptance[k]).sum::<f64>() / recs.len() as f64;
                    format!("{:.2}", a)
                })
                .collect();
            out.line(format!("L={l}: swap acceptance between neighbouring rates [{}]", mean.join(", ")));
            for (acc, &p) in accs.into_iter().zip(&ps) {
                data.push(record("moments", &cfg.mc_config(l, n, p), Vec::new(), acc));
            }
        } else {
            for &p in &ps {
                let c = cfg.mc_config(l, n, p);
                let (seeds, acc) = merged(&run_chains(&c, &obs, &[], &[], &Rayon)?)?;
                data.push(record("moments", &c, seeds, acc));
            }
        }
    }
    Ok(data)
}

fn moment_rows(cfg: &ExperimentConfig, data: &[AccumulatorRecord], out: &mut Outcome) {
    let method = if cfg.analysis.input.is_some() { "mc-input" } else { method_tag(cfg) };
    for r in data {
        let a = &r.accumulator;
        for (q, e) in [
            ("m", magnetization(a)),
            ("m2", second_moment(a, false)),
            ("binder", binder(a, false)),
            ("m2_sym", second_moment(a, true)),
            ("binder_sym", binder(a, true)),
        ] {
            out.rows.push(row(cfg, q, r.l, r.p, e.value, e.error, method));
        }
    }
}

fn in_window(cfg: &ExperimentConfig, p: f64) -> bool {
    cfg.analysis.window.is_none_or(|[lo, hi]| p >= lo - 1e-12 && p <= hi + 1e-12)
}

fn by_size(data: &[AccumulatorRecord]) -> BTreeMap<usize, Vec<&AccumulatorRecord>> {
    let mut m: BTreeMap<usize, Vec<&AccumulatorRecord>> = BTreeMap::new();
    for r in data {
        m.entry(r.l).or_default().push(r);
    }
    for v in m.values_mut() {
        v.sort_by(|a, b| a.p.total_cmp(&b.p));
    }
    m
}

fn check(out: &mut Outcome, what: &str, value: Option<f64>, expect: Option<[f64; 2]>) {
    let Some([target, tol]) = expect else {
        return;
    };
    match value {
        Some(v) if (v - target).abs() <= tol => {
            out.line(format!("expectation met: {what} = {v:.4} within {tol} of {target}"));
        }
        Some(v) => out.failures.push(format!("{what} = {v:.4} is not within {tol} of {target}")),
        None => out.failures.push(format!("{what} was not determined (expected {target} ± {tol})")),
    }
}

fn moments(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let data = moment_data(cfg, &mut out)?;
    moment_rows(cfg, &data, &mut out);
    out.accumulators = data;
    Ok(out)
}

fn threshold(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let data = moment_data(cfg, &mut out)?;
    moment_rows(cfg, &data, &mut out);
    let sym = cfg.symmetrized();
    let curves: Vec<Curve> = by_size(&data)
        .into_iter()
        .map(|(l, rs)| {
            let rs: Vec<_> = rs.into_iter().filter(|r| in_window(cfg, r.p)).collect();
            let est: Vec<_> = rs.iter().map(|r| binder(&r.accumulator, sym)).collect();
            Curve {
                l,
                ps: rs.iter().map(|r| r.p).collect(),
                values: est.iter().map(|e| e.value).collect(),
                errors: est.iter().map(|e| e.error).collect(),
            }
        })
        .collect();
    let report = binder_crossing(&curves, &cfg.analysis.crossing)?;
    out.line(format!(
        "Binder crossings (n = {}, {} moments)",
        cfg.physics.n,
        if sym { "symmetrized" } else { "raw" }
    ));
    let method = format!("crossing-{}", if sym { "sym" } else { "raw" });
    for pair in &report.pairs {
        match pair.p {
            Some(p) => {
                out.line(format!(
                    "  L={} x L={}: p = {:.4} ± {:.4} (crossed in {:.0}% of replicas)",
                    pair.l1,
                    pair.l2,
                    p,
                    pair.error,
                    100.0 * pair.found_fraction
                ));
                out.rows.push(row(cfg, "p_cross", format!("{}x{}", pair.l1, pair.l2), p, p, pair.error, &method));
            }
            None => out.line(format!("  L={} x L={}: no crossing in the window", pair.l1, pair.l2)),
        }
    }
    match report.pooled {
        Some(p) => {
            out.line(format!("pooled p_c = {:.4} ± {:.4}", p, report.pooled_error));
            let sizes: Vec<String> = curves.iter().map(|c| c.l.to_string()).collect();
            out.rows.push(row(cfg, "p_c", sizes.join("-"), p, p, report.pooled_error, &method));
        }
        None => out.line("no crossing found"),
    }
    check(&mut out, "p_c", report.pooled, cfg.analysis.expect_p_c);
    out.accumulators = data;
    Ok(out)
}

fn collapse(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let data = moment_data(cfg, &mut out)?;
    moment_rows(cfg, &data, &mut out);
    let sym = cfg.symmetrized();
    let points: Vec<ScalingPoint> = data
        .iter()
        .filter(|r| in_window(cfg, r.p))
        .map(|r| ScalingPoint {
            l: r.l,
            p: r.p,
            binder: binder(&r.accumulator, sym).value,
            m2: second_moment(&r.accumulator, sym).value,
        })
        .collect();
    let fit = fss_collapse(&points, &cfg.analysis.collapse)?;
    let sizes: Vec<String> = fit.sizes.iter().map(|l| l.to_string()).collect();
    let sizes = sizes.join("-");
    out.line(format!(
        "finite-size scaling collapse (n = {}, {} moments, L = {}, p in [{:.4}, {:.4}])",
        cfg.physics.n,
        if sym { "symmetrized" } else { "raw" },
        sizes,
        fit.window.0,
        fit.window.1
    ));
    out.line(format!("  p_c  = {:.4}", fit.p_c));
    out.line(format!("  nu   = {:.3}", fit.nu));
    out.line(format!("  beta = {:.3}", fit.beta));
    out.line(format!(
        "  cost = {:.5} (Binder {:.5}, moment {:.5}){}",
        fit.collapse_cost,
        fit.binder_cost,
        fit.m2_cost,
        if fit.converged { "" } else { ", simplex did not converge" }
    ));
    for lp in &fit.landscape {
        out.line(format!("  landscape p_c={:.4} nu={:.3} cost={:.5}", lp.p_c, lp.nu, lp.cost));
    }
    let method = if sym { "collapse-sym" } else { "collapse-raw" };
    let mid = 0.5 * (fit.window.0 + fit.window.1);
    for (q, v) in [("p_c", fit.p_c), ("nu", fit.nu), ("beta", fit.beta), ("collapse_cost", fit.collapse_cost)] {
        out.rows.push(row(cfg, q, &sizes, if q == "p_c" { fit.p_c } else { mid }, v, f64::NAN, method));
    }
    check(&mut out, "p_c", Some(fit.p_c), cfg.analysis.expect_p_c);
    check(&mut out, "nu", Some(fit.nu), cfg.analysis.expect_nu);
    out.accumulators = data;
    Ok(out)
}

fn single_kind(cfg: &ExperimentConfig, what: &str) -> CliResult<LoopKind> {
    match cfg.physics.errors {
        ErrorType::Phase => Ok(LoopKind::X),
        ErrorType::BitFlip => Ok(LoopKind::Z),
        ErrorType::Symmetric => Err(CliError::Config(format!(
            "physics.errors: {what} needs a single error type (phase or bit-flip)"
        ))),
    }
}

fn negativity_command(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let order = cfg.physics.order;
    let [r0, c0] = cfg.physics.kp_origin;
    for &l in &cfg.physics.l {
        let code = ToricCode::new(l)?;
        let tri = Tripartition::pinwheel(&code, r0, c0)?;
        let regions = tri.regions();
        let geometry = format!("3x3 pinwheel at ({r0}, {c0}); {}", tri.describe());
        for p in cfg.physics.p.values() {
            let (values, cov, method) = match cfg.physics.method {
                Method::Exact => {
                    let engine = ExactEngine::with_runner(&code, Rayon, chunks());
                    let model = cfg.physics.errors.model(p)?;
                    let mut v = Vec::new();
                    for (k, r) in regions.iter().enumerate() {
                        v.push(toricdiag_core::analysis::RegionValue {
                            label: KP_LABELS[k].into(),
                            value: engine.negativity_pinning(&model, order, r)?,
                            error: 0.0,
                        });
                    }
                    (v, None, "exact")
                }
                Method::Mc => {
                    let kind = single_kind(cfg, "Monte Carlo negativity")?;
                    let checks = regions
                        .iter()
                        .map(|r| parity_checks(&code, kind, r))
                        .collect::<Result<Vec<_>, _>>()?;
                    let obs = Observables {
                        regions: checks,
                        conditional_pinning: cfg.mc.conditional_pinning,
                        ..Observables::default()
                    };
                    let c = cfg.mc_config(l, order, p);
                    let (seeds, acc) = merged(&run_chains(&c, &obs, &[], &[], &Rayon)?)?;
                    for k in 0..7 {
                        let e = negativity(&acc, k, order);
                        if e.is_flagged() {
                            out.line(format!("  L={l} p={p} region {}: {:?}", KP_LABELS[k], e.flags));
                        }
                    }
                    let (v, cov) = regions_from_accumulator(&acc, order)?;
                    out.accumulators.push(record("negativity", &c, seeds, acc));
                    (v, cfg.analysis.covariance.then_some(cov), "mc")
                }
            };
            for v in &values {
                out.rows.push(row(cfg, format!("E_{}", v.label), l, p, v.value, v.error, method));
            }
            if values.iter().any(|v| !v.value.is_finite()) {
                out.line(format!("L={l} p={p}: a region was never pinned; gamma_N undetermined"));
                continue;
            }
            for (formula, q) in [(KpFormula::Full, "gamma_N"), (KpFormula::Symmetric, "gamma_N_symmetric")] {
                let r = kitaev_preskill(&values, formula, cov.as_ref(), &geometry)?;
                out.rows.push(row(cfg, q, l, p, r.gamma, r.gamma_error, method));
                out.line(format!(
                    "L={l} p={p:.4} E^({order}) {q} = {:.4} ± {:.4}{}",
                    r.gamma,
                    r.gamma_error,
                    if r.gamma + 2.0 * r.gamma_error < 0.0 {
                        " (finite-size dip below zero)"
                    } else {
                        ""
                    }
                ));
            }
        }
    }
    Ok(out)
}

fn coherent_info(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let n = cfg.physics.n;
    let flavors = n as usize - 1;
    let ps = cfg.physics.p.values();
    match cfg.physics.method {
        Method::Exact => {
            for &l in &cfg.physics.l {
                let code = ToricCode::new(l)?;
                let engine = ExactEngine::with_runner(&code, Rayon, chunks());
                for &p in &ps {
                    let v = engine.coherent_info(&cfg.physics.errors.model(p)?, n)?;
                    out.rows.push(row(cfg, "I_c", l, p, v, 0.0, "exact"));
                    out.line(format!("L={l} p={p:.4} I_c^({n}) = {v:.6}"));
                }
            }
        }
        Method::Mc => {
            let d1 = cfg.physics.defect_l1.clone().unwrap_or(vec![1; flavors]);
            let d2 = cfg.physics.defect_l2.clone().unwrap_or(vec![0; flavors]);
            let mut series: BTreeMap<(u8, u64), Vec<(f64, f64)>> = BTreeMap::new();
            for &l in &cfg.physics.l {
                let code = ToricCode::new(l)?;
                for kind in cfg.physics.errors.weighted_kinds() {
                    let flips = defect_flips(&code, kind, &d1, &d2)?;
                    let stages = if cfg.mc.stages == 0 { flips.len() } else { cfg.mc.stages };
                    let groups = stage_groups(&flips, stages);
                    for &p in &ps {
                        let c = cfg.mc_config(l, n, p);
                        let mut background: Vec<BondFlip> = Vec::new();
                        let (mut total, mut var, mut flagged) = (0.0, 0.0, false);
                        for (k, group) in groups.iter().enumerate() {
                            if group.is_empty() {
                                continue;
                            }
                            let obs = Observables {
                                defects: vec![group.clone()],
                                ..Observables::default()
                            };
                            let recs = run_chains(&c, &obs, &background, &[STAGE_TAG, k as u64], &Rayon)?;
                            let (seeds, acc) = merged(&recs)?;
                            let e = perturbation_free_energy(&acc, 0);
                            flagged |= e.is_flagged();
                            total += e.value;
                            var += e.error * e.error;
                            out.accumulators.push(record(&format!("defect-{kind:?}-stage-{k}"), &c, seeds, acc));
                            background.extend(group.iter().cloned());
                        }
                        let q = format!("delta_F_{kind:?}");
                        out.rows.push(row(cfg, &q, l, p, total, var.sqrt(), "mc-fep"));
                        out.line(format!(
                            "L={l} p={p:.4} {q} = {total:.4} ± {:.4} ({} stages){}",
                            var.sqrt(),
                            groups.len(),
                            if flagged { ", undersampled" } else { "" }
                        ));
                        series.entry((kind as u8, p.to_bits())).or_default().push((l as f64, total));
                    }
                }
            }
            for ((kind, bits), pts) in series {
                if pts.len() < 2 {
                    continue;
                }
                let p = f64::from_bits(bits);
                let xs: Vec<f64> = pts.iter().map(|x| x.0).collect();
                let ys: Vec<f64> = pts.iter().map(|x| x.1).collect();
                let fit = linear_fit(&xs, &ys)?;
                let kind = if kind == LoopKind::X as u8 { "X" } else { "Z" };
                out.line(format!(
                    "p={p:.4} delta_F_{kind} vs L: slope {:.4} ± {:.4}, intercept {:.4}, R^2 {:.4}",
                    fit.slope, fit.slope_error, fit.intercept, fit.r_squared
                ));
                let sizes: Vec<String> = xs.iter().map(|l| l.to_string()).collect();
                out.rows.push(row(cfg, format!("delta_F_{kind}_slope"), sizes.join("-"), p, fit.slope, fit.slope_error, "fit"));
            }
        }
    }
    Ok(out)
}

fn relative_entropy_command(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let n = cfg.physics.n;
    let seps = &cfg.physics.separations;
    for &l in &cfg.physics.l {
        if let Some(&r) = seps.iter().find(|&&r| r % l == 0) {
            return Err(CliError::Config(format!(
                "physics.separations: separation {r} is a multiple of L = {l}"
            )));
        }
        let code = ToricCode::new(l)?;
        for p in cfg.physics.p.values() {
            let (values, method): (Vec<(f64, f64)>, &str) = match cfg.physics.method {
                Method::Exact => {
                    let engine = ExactEngine::with_runner(&code, Rayon, chunks());
                    let model = cfg.physics.errors.model(p)?;
                    let v = seps
                        .iter()
                        .map(|&r| {
                            engine
                                .relative_entropy(&model, n, (code.site(0, 0), code.site(0, r as isize)), StateKind::MaxMixedLogical)
                                .map(|d| (d, 0.0))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    (v, "exact")
                }
                Method::Mc => {
                    let obs = Observables {
                        separations: seps.clone(),
                        improved_correlators: cfg.mc.improved_correlators,
                        ..Observables::default()
                    };
                    let c = cfg.mc_config(l, n, p);
                    let (seeds, acc) = merged(&run_chains(&c, &obs, &[], &[], &Rayon)?)?;
                    let v = (0..seps.len())
                        .map(|k| {
                            let e = relative_entropy(&acc, k, n);
                            (e.value, e.error)
                        })
                        .collect();
                    out.accumulators.push(record("correlator", &c, seeds, acc));
                    (v, "mc")
                }
            };
            for (&r, &(v, e)) in seps.iter().zip(&values) {
                out.rows.push(row(cfg, format!("D(r={r})"), l, p, v, e, method));
            }
            let finite: Vec<(f64, f64)> = seps
                .iter()
                .zip(&values)
                .filter(|(_, v)| v.0.is_finite())
                .map(|(&r, v)| (r as f64, v.0))
                .collect();
            if finite.len() >= 3 {
                let xs: Vec<f64> = finite.iter().map(|x| x.0).collect();
                let ys: Vec<f64> = finite.iter().map(|x| x.1).collect();
                let fit = linear_fit(&xs, &ys)?;
                out.line(format!(
                    "L={l} p={p:.4} D^({n}) vs separation: slope {:.4} ± {:.4}, intercept {:.4}, R^2 {:.4}",
                    fit.slope, fit.slope_error, fit.intercept, fit.r_squared
                ));
                out.rows.push(row(cfg, "D_slope", l, p, fit.slope, fit.slope_error, "fit"));
                out.rows.push(row(cfg, "D_r_squared", l, p, fit.r_squared, f64::NAN, "fit"));
            } else {
                out.line(format!("L={l} p={p:.4} D^({n}) = {values:?}"));
            }
        }
    }
    Ok(out)
}
