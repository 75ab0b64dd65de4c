//! Milestone-driven railway cab modelling.
//!
//! This crate is `no_std` (it needs `alloc`). It contains everything that is
//! pure computation:
//!
//! - [`route`]: immutable route descriptions and the milestones derived from them.
//! - [`odm`]: the five-state operational domain model and its transition table.
//! - [`sim`]: a deterministic longitudinal train simulator with a scripted driver.
//! - [`classifier`]: Gaussian naive Bayes and the state-weighted (OwO) variant.
//! - [`eval`]: run splitting, per-state accuracy reports and the comparison claims.
//!
//! File formats, the CLI and the tuning service live in the `railodm` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifier;
pub mod eval;
mod math;
pub mod odm;
pub mod route;
pub mod sim;

pub use classifier::{
    FeatureSet, GaussianNbModel, InputClass, LabeledRow, Variant, WeightColumn, WeightTable,
};
pub use eval::{Claim, Comparison, EvalReport, ReportMetadata};
pub use odm::{OperationalState, TransitionEvent, TransitionKind};
pub use route::{FeatureKind, Milestone, RouteFeature, RouteSpec};
pub use sim::{InputCommand, ObservationVector, TraceStep, TrainState};
