use super::constants::{resistance, A_MAX, B_MAX, MAX_NOTCH};
use core::fmt;

/// A driver command. Power and brake are never applied together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InputCommand {
    power_notch: u8,
    brake_notch: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvalidCommand {
    pub power_notch: u8,
    pub brake_notch: u8,
}

impl fmt::Display for InvalidCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid input: power {} brake {} (notches 0..={MAX_NOTCH}, not both non-zero)",
            self.power_notch, self.brake_notch
        )
    }
}

impl core::error::Error for InvalidCommand {}

impl InputCommand {
    pub const COAST: InputCommand = InputCommand {
        power_notch: 0,
        brake_notch: 0,
    };

    pub fn new(power_notch: u8, brake_notch: u8) -> Result<Self, InvalidCommand> {
        if power_notch > MAX_NOTCH
            || brake_notch > MAX_NOTCH
            || (power_notch > 0 && brake_notch > 0)
        {
            return Err(InvalidCommand {
                power_notch,
                brake_notch,
            });
        }
        Ok(Self {
            power_notch,
            brake_notch,
        })
    }

    pub fn power(notch: u8) -> Self {
        Self {
            power_notch: notch.min(MAX_NOTCH),
            brake_notch: 0,
        }
    }

    pub fn brake(notch: u8) -> Self {
        Self {
            power_notch: 0,
            brake_notch: notch.min(MAX_NOTCH),
        }
    }

    /// Single lever position: positive is power, negative is brake.
    pub fn from_lever(lever: i8) -> Self {
        let m = MAX_NOTCH as i8;
        let lever = lever.clamp(-m, m);
        if lever >= 0 {
            Self::power(lever as u8)
        } else {
            Self::brake((-lever) as u8)
        }
    }

    pub fn lever(self) -> i8 {
        self.power_notch as i8 - self.brake_notch as i8
    }

    pub fn power_notch(self) -> u8 {
        self.power_notch
    }

    pub fn brake_notch(self) -> u8 {
        self.brake_notch
    }

    pub fn is_coast(self) -> bool {
        self == Self::COAST
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainState {
    pub position_m: f64,
    pub speed_mps: f64,
    /// Realised acceleration over the last step.
    pub accel_mps2: f64,
    pub engine_on: bool,
    pub t_s: f64,
}

impl TrainState {
    pub fn at_rest() -> Self {
        Self::default()
    }
}

/// Net commanded acceleration before the zero-speed clamp.
pub fn commanded_accel(speed_mps: f64, input: InputCommand) -> f64 {
    let n = MAX_NOTCH as f64;
    input.power_notch as f64 / n * A_MAX
        - input.brake_notch as f64 / n * B_MAX
        - resistance(speed_mps)
}

/// Advances the train by `dt` with semi-implicit Euler.
pub fn step_dynamics(train: &TrainState, input: InputCommand, dt: f64) -> TrainState {
    debug_assert!(dt > 0.0);
    let a = commanded_accel(train.speed_mps, input);
    let speed = (train.speed_mps + a * dt).max(0.0);
    TrainState {
        position_m: train.position_m + speed * dt,
        speed_mps: speed,
        accel_mps2: (speed - train.speed_mps) / dt,
        engine_on: train.engine_on || input.power_notch > 0,
        t_s: train.t_s + dt,
    }
}
