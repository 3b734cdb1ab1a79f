//! Markov-chain models of a single tennis game under the existing rule and
//! several alternative serving rules.
//!
//! * [`types`]: probabilities, serve profiles and per-point serving schedules.
//! * [`closed_form`]: direct formulas for every rule variant.
//! * [`engine`]: exact lattice evaluation for an arbitrary schedule.
//! * [`monte_carlo`]: seedable simulation used as an independent check.
//! * [`atp`]: player statistics, blended point-win chance and model fit.
//! * [`shaper`]: single-serve cutoff solver and rule comparison table.

pub mod atp;
pub mod closed_form;
pub mod engine;
mod error;
pub mod monte_carlo;
pub mod shaper;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    eval_term, AlgebraTerm, GameMetrics, PointSource, Probability, RuleKind, ServeOrder, ServeProfile, ServeSchedule,
    Server,
};
