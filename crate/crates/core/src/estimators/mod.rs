//! Monte Carlo estimators built on the streaming replica kernels.

pub mod asymptotic;
pub mod bound_scan;
pub mod continuity;
pub mod crossing;
pub mod engine;
pub mod events;
pub mod fg;
pub mod monotonicity;
pub mod repulsion;
pub mod stats;
pub mod survival;

pub use asymptotic::{check_asymptotic, AsymptoticOptions, AsymptoticReport, AsymptoticRow};
pub use bound_scan::{scan_bound_constant, BoundCell, BoundScan, RangeRegion, TrendRow};
pub use continuity::{continuity_experiment, shifted_family, ContinuityMember, ContinuityReport};
pub use crossing::estimate_bridge_crossing;
pub use engine::{run_replicas, RunConfig};
pub use events::{indicator_q, Ceiling, Side};
pub use fg::{estimate_fg, fg_sensitivity, FgSide, DEFAULT_S};
pub use monotonicity::{monotonicity_coupled, MonotonicityReport};
pub use repulsion::{estimate_repulsion, RepulsionConfig, RepulsionEstimate};
pub use stats::{Estimate, Verdict, CI_SIGMAS};
pub use survival::{estimate_survival, BarrierExperiment, MIN_SAMPLES};
