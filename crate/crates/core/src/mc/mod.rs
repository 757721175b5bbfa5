//! Seeded Metropolis sampling of the multi-flavor Ising model.

mod accumulator;
mod chain;
pub mod estimators;
mod lattice;
mod pinning;
mod system;
mod tempering;

pub use accumulator::{jackknife_error, Block, Layout, MomentAccumulator};
pub use chain::{
    cycle_bonds, defect_flips, merge_records, prepare_system, run_chain, run_chain_in, run_chains,
    stage_groups, BondFlip, ChainRecord, McConfig, ModelKind, Observables, Start,
};
pub use estimators::{Estimate, EstimateFlag};
pub use lattice::SpinLattice;
pub use pinning::{ConditionalPinning, MAX_FRONTIER_STATES};
pub use system::{Interaction, SpinSystem};
pub use tempering::{run_tempering, run_tempering_chain, TemperingRecord};
