//! Dense density matrices against exhaustive loop sums at L = 2.

use toricdiag_core::dense::{
    renyi_coherent_info, renyi_moment, renyi_negativity, renyi_relative_entropy, DenseState,
    InitialState,
};
use toricdiag_core::exact::{
    coherent_info_via_defects, moment_via_loops, negativity_via_pinning, negativity_via_signs,
    partition_function, ExactEngine, PartitionSpec, Sector, StateKind,
};
use toricdiag_core::region::plaquette_block;
use toricdiag_core::{EdgeSet, ErrorModel, LoopKind, ToricCode};

const GRID: [f64; 6] = [0.0, 0.05, 0.1, 0.178, 0.3, 0.45];

fn agree(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()) || (a - b).abs() <= 1e-12
}

#[test]
fn moments_match() {
    let code = ToricCode::new(2).unwrap();
    let rho0 = DenseState::new(&code, InitialState::MaxMixedLogical).unwrap();
    for p in GRID {
        let model = ErrorModel::symmetric(p).unwrap();
        let rho = rho0.apply_channel(&model);
        for n in [2, 3] {
            let dense = renyi_moment(&rho, n).unwrap();
            let loops = moment_via_loops(&code, &model, n).unwrap();
            assert!(agree(dense, loops), "p={p} n={n}: {dense} vs {loops}");
        }
    }
}

#[test]
fn asymmetric_rates_match() {
    let code = ToricCode::new(2).unwrap();
    let rho0 = DenseState::new(&code, InitialState::MaxMixedLogical).unwrap();
    let model = ErrorModel::new(0.1, 0.0).unwrap();
    let dense = renyi_moment(&rho0.apply_channel(&model), 2).unwrap();
    let loops = moment_via_loops(&code, &model, 2).unwrap();
    assert!(agree(dense, loops), "{dense} vs {loops}");
}

#[test]
fn bell_purity_is_the_full_loop_sum() {
    let code = ToricCode::new(2).unwrap();
    let bell = DenseState::new(&code, InitialState::BellWithReference).unwrap();
    let model = ErrorModel::symmetric(0.1).unwrap();
    let dense = renyi_moment(&bell.apply_channel(&model), 2).unwrap();
    let log_z: f64 = [LoopKind::X, LoopKind::Z]
        .into_iter()
        .map(|k| {
            partition_function(
                &code,
                &PartitionSpec::new(k, 2, model.tension(k)).with_sector(Sector::All),
            )
            .unwrap()
        })
        .sum();
    let loops = (log_z - 10.0 * std::f64::consts::LN_2).exp();
    assert!(agree(dense, loops), "{dense} vs {loops}");
}

#[test]
fn relative_entropies_match() {
    let code = ToricCode::new(2).unwrap();
    let w = code.string_operator(LoopKind::Z, 0, 3).unwrap();
    for (variant, state) in [
        (InitialState::MaxMixedLogical, StateKind::MaxMixedLogical),
        (InitialState::GroundState, StateKind::GroundState),
    ] {
        let rho0 = DenseState::new(&code, variant).unwrap();
        let excited0 = rho0.conjugated(&w).unwrap();
        for p in GRID.iter().copied().chain([0.2, 0.5]) {
            let model = ErrorModel::symmetric(p).unwrap();
            let rho = rho0.apply_channel(&model);
            let rho_m = excited0.apply_channel(&model);
            for n in [2, 3] {
                let dense = renyi_relative_entropy(&rho, &rho_m, n).unwrap();
                let loops = ExactEngine::new(&code)
                    .relative_entropy(&model, n, (0, 3), state)
                    .unwrap();
                assert!(
                    agree(dense, loops),
                    "{variant:?} p={p} n={n}: {dense} vs {loops}"
                );
            }
        }
    }
}

#[test]
fn coherent_information_matches() {
    let code = ToricCode::new(2).unwrap();
    let bell = DenseState::new(&code, InitialState::BellWithReference).unwrap();
    for p in GRID {
        let model = ErrorModel::symmetric(p).unwrap();
        let rho = bell.apply_channel(&model);
        for n in [2, 3] {
            let dense = renyi_coherent_info(&rho, n).unwrap();
            let loops = coherent_info_via_defects(&code, &model, n).unwrap();
            assert!(agree(dense, loops), "p={p} n={n}: {dense} vs {loops}");
        }
    }
}

#[test]
fn negativities_match() {
    let code = ToricCode::new(2).unwrap();
    let rho0 = DenseState::new(&code, InitialState::MaxMixedLogical).unwrap();
    let regions = [
        plaquette_block(&code, 0, 0, 1, 1).unwrap(),
        EdgeSet::from_edges(8, [0, 1, 4]).unwrap(),
        EdgeSet::from_edges(8, [0, 6]).unwrap(),
    ];
    for region in &regions {
        for p in GRID {
            for model in [
                ErrorModel::phase(p).unwrap(),
                ErrorModel::bit_flip(p).unwrap(),
            ] {
                let rho = rho0.apply_channel(&model);
                for order in [4, 6] {
                    let dense = renyi_negativity(&rho, region, order).unwrap();
                    let loops = negativity_via_pinning(&code, &model, order, region).unwrap();
                    assert!(
                        agree(dense, loops),
                        "{model:?} order={order}: {dense} vs {loops}"
                    );
                }
            }
        }
    }
}

#[test]
fn negativity_with_both_error_types() {
    let code = ToricCode::new(2).unwrap();
    let rho0 = DenseState::new(&code, InitialState::MaxMixedLogical).unwrap();
    let region = EdgeSet::from_edges(8, [0, 1, 4]).unwrap();
    for p in [0.05, 0.178, 0.3] {
        let model = ErrorModel::new(p, 0.5 * p).unwrap();
        let dense = renyi_negativity(&rho0.apply_channel(&model), &region, 4).unwrap();
        let signs = negativity_via_signs(&code, &model, 4, &region).unwrap();
        assert!(agree(dense, signs), "p={p}: {dense} vs {signs}");
    }
}

#[test]
fn negativity_of_complement() {
    let code = ToricCode::new(2).unwrap();
    let rho = DenseState::new(&code, InitialState::MaxMixedLogical)
        .unwrap()
        .apply_channel(&ErrorModel::phase(0.15).unwrap());
    let a = EdgeSet::from_edges(8, [0, 1, 4]).unwrap();
    let abar = a.complement();
    let (ea, eb) = (
        renyi_negativity(&rho, &a, 4).unwrap(),
        renyi_negativity(&rho, &abar, 4).unwrap(),
    );
    assert!((ea - eb).abs() < 1e-10, "{ea} vs {eb}");
    let model = ErrorModel::phase(0.15).unwrap();
    let la = negativity_via_pinning(&code, &model, 4, &a).unwrap();
    let lb = negativity_via_pinning(&code, &model, 4, &abar).unwrap();
    assert!((la - lb).abs() < 1e-10);
    assert!((la - ea).abs() < 1e-10);
}
