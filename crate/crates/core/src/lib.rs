//! Delay and energy outage analysis for single data transmission sessions
//! over fading channels.

// Negated comparisons are used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod error;
pub mod kvfile;
pub mod mathcore;
pub mod metrics;
pub mod montecarlo;
pub mod strategy;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
