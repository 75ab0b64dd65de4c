use super::dynamics::InputCommand;
use crate::odm::OperationalState;

/// One step's channel readings, as a cab data logger would record them.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservationVector {
    /// Seconds since run start.
    pub t: f64,
    /// Speed, m/s.
    pub s: f64,
    /// Posted speed limit, m/s.
    pub sl: f64,
    /// Limit implied by the last signal passed, m/s.
    pub sls: f64,
    /// Rate of acceleration over the previous step, m/s².
    pub roa: f64,
    pub engine_on: bool,
}

impl ObservationVector {
    pub fn es(&self) -> f64 {
        if self.engine_on {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceStep {
    pub t_s: f64,
    pub position_m: f64,
    pub obs: ObservationVector,
    pub state: OperationalState,
    /// Ground-truth label: what the driver did at this step.
    pub input: InputCommand,
    pub prev_input: InputCommand,
}
