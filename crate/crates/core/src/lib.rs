//! Desk-scale laboratory for tuning population-based metaheuristics on
//! discrete surrogate objectives.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`]: ordered value grids, the index-space genotype encoding and
//!   the snap/decode bridge between genotypes and discrete solutions.
//! * [`objectives`]: Ackley/Eggholder surrogates, table surrogates loaded
//!   from CSV, the additive penalty rule and the brute-force oracle.
//! * [`optimizers`]: elitist GA, YPEA-style GA, adaptive PSO and BBO behind
//!   a single seeded [`optimizers::run`] entry point.
//! * [`metrics`]: average performance curves and the F_A / B / F_B / F_C
//!   utilities, plus five-number summaries.
//! * [`tuner`]: parameter grids, N-run assessments, single-pass and
//!   two-phase tuning strategies, and validation.

pub mod error;
pub mod metrics;
pub mod objectives;
pub mod optimizers;
pub mod seed;
pub mod space;
pub mod tuner;

pub use error::{Error, Result};
