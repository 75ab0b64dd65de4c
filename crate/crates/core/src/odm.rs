//! Operational domain model: five driving states switched by milestones.
//!
//! Passing a signal preempts every state into `AWS`. `AWS` can only be left by
//! acknowledging with both levers released, which lands in `Engine_Check`; the
//! speed-band checks then route the train into `Cruise`, `Brake_Change` or
//! `Speed_Change`.

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OperationalState {
    #[cfg_attr(feature = "serde", serde(rename = "Cruise"))]
    Cruise,
    #[cfg_attr(feature = "serde", serde(rename = "AWS"))]
    Aws,
    #[cfg_attr(feature = "serde", serde(rename = "Engine_Check"))]
    EngineCheck,
    #[cfg_attr(feature = "serde", serde(rename = "Brake_Change"))]
    BrakeChange,
    #[cfg_attr(feature = "serde", serde(rename = "Speed_Change"))]
    SpeedChange,
}

impl OperationalState {
    pub const ALL: [OperationalState; 5] = [
        OperationalState::Cruise,
        OperationalState::Aws,
        OperationalState::EngineCheck,
        OperationalState::BrakeChange,
        OperationalState::SpeedChange,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            OperationalState::Cruise => "Cruise",
            OperationalState::Aws => "AWS",
            OperationalState::EngineCheck => "Engine_Check",
            OperationalState::BrakeChange => "Brake_Change",
            OperationalState::SpeedChange => "Speed_Change",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for OperationalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TransitionKind {
    SignalPassed { aspect_limit_mps: f64 },
    AwsAcknowledged,
    SpeedAboveBand,
    SpeedBelowBand,
    SpeedInBand,
    JourneyStart,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransitionEvent {
    pub kind: TransitionKind,
    pub position_m: f64,
    pub t_s: f64,
}

impl TransitionEvent {
    pub fn new(kind: TransitionKind, position_m: f64, t_s: f64) -> Self {
        Self {
            kind,
            position_m,
            t_s,
        }
    }
}

pub const fn initial_state() -> OperationalState {
    OperationalState::EngineCheck
}

pub fn transition(current: OperationalState, event: &TransitionEvent) -> OperationalState {
    use OperationalState::*;
    use TransitionKind::*;
    match (current, event.kind) {
        (_, SignalPassed { .. }) => Aws,
        (Aws, AwsAcknowledged) => EngineCheck,
        (EngineCheck | Cruise, SpeedAboveBand) => BrakeChange,
        (EngineCheck | Cruise, SpeedBelowBand) => SpeedChange,
        (EngineCheck | BrakeChange | SpeedChange, SpeedInBand) => Cruise,
        (state, _) => state,
    }
}

/// Where the current speed sits relative to the target band.
pub fn band_event_kind(speed_mps: f64, target_mps: f64, band_frac: f64) -> TransitionKind {
    let margin = band_frac * target_mps;
    if speed_mps > target_mps + margin {
        TransitionKind::SpeedAboveBand
    } else if speed_mps < target_mps - margin {
        TransitionKind::SpeedBelowBand
    } else {
        TransitionKind::SpeedInBand
    }
}
