//! Monte Carlo for Brownian bridges observed at Poisson arrival times below a
//! curved barrier with random decorations.
//!
//! The crate is layered bottom-up: [`rng`] and [`sampling`] provide
//! reproducible exact samplers, [`decorations`] and [`barrier`] describe the
//! model, [`oracles`] holds closed-form reference values, [`estimators`] runs
//! replica-parallel experiments and [`cli`] drives them from config files.

// NaN must fail parameter checks, hence `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod barrier;
pub mod cli;
pub mod decorations;
pub mod error;
pub mod estimators;
pub mod oracles;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
