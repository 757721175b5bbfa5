//! Engines for information-theoretic diagnostics of a toric code corrupted by
//! incoherent bit-flip and phase errors.
//!
//! The crate is `no_std` (with `alloc`) and carries no IO. It contains three
//! mutually checking ways of evaluating Rényi moments of the corrupted state:
//!
//! * [`dense`]: brute-force density matrices for the `L = 2` code,
//! * [`exact`]: exhaustive sums over loop groups (and over error
//!   configurations, for the dual random-bond picture),
//! * [`mc`]: seeded Metropolis sampling of the `(n-1)`-flavor Ising model,
//!
//! plus the [`analysis`] layer that turns Monte Carlo accumulators into
//! Binder crossings, scaling collapses and topological negativities.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod code;
pub mod dense;
mod error;
pub mod exact;
pub mod logsum;
pub mod mc;
pub mod model;
pub mod pauli;
pub mod region;
pub mod seed;

pub use code::{LoopElement, LoopGroup, LoopKind, ToricCode};
pub use error::{Error, Result};
pub use model::ErrorModel;
pub use pauli::{EdgeSet, PauliString, Sign};
