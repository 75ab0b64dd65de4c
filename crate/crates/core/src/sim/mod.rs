//! Deterministic longitudinal cab simulator and scripted driver.

pub mod constants;
mod dynamics;
pub mod policy;
mod run;
mod trace;

pub use dynamics::{commanded_accel, step_dynamics, InputCommand, InvalidCommand, TrainState};
pub use policy::{
    holding_notch, policy_command, scripted_policy, DriverNoise, Guidance, PolicyConfig,
};
pub use run::{generate_run, generate_run_with, RecordedEvent, Run, SimConfig, SimError};
pub use trace::{ObservationVector, TraceStep};
