//! Finite-size analysis of Monte Carlo estimates.

pub mod collapse;
pub mod crossing;
pub mod fit;
pub mod kp;
pub mod pchip;
pub mod stats;

pub use collapse::{fss_collapse, CollapseOptions, ScalingFit, ScalingPoint};
pub use crossing::{binder_crossing, Curve, CrossingOptions, CrossingReport, PairCrossing};
pub use fit::{linear_fit, nelder_mead, LinearFit, Minimum};
pub use kp::{kitaev_preskill, regions_from_accumulator, KpFormula, NegativityResult, RegionValue};
pub use pchip::Pchip;
pub use stats::{bootstrap, mean_std, Resampler};
