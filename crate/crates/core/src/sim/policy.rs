//! Scripted driver.
//!
//! Behaviour per state: released levers in `AWS` and `Engine_Check`, small
//! notch adjustments in `Cruise`, proportional brake in `Brake_Change` and
//! proportional power in `Speed_Change`.

use super::constants::{
    resistance, A_MAX, B_MAX, CRUISE_MIN_ACCEL, MAX_NOTCH, NOISE_HOLD_STEPS, NOISE_PROB,
    STATION_RELEASE_MARGIN,
};
use super::dynamics::InputCommand;
use super::trace::ObservationVector;
use crate::math::ceil;
use crate::math::round;
use crate::odm::OperationalState;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    /// Brake notches per m/s of overspeed.
    pub brake_gain: f64,
    /// Power notches per m/s of underspeed.
    pub power_gain: f64,
    /// Cruise applies power below `target·(1 − cruise_low_frac)`.
    pub cruise_low_frac: f64,
    /// Cruise coasts above `target·(1 − cruise_high_frac)`.
    pub cruise_high_frac: f64,
    /// Cruise top-ups pick a notch giving at least this net acceleration.
    pub cruise_min_accel: f64,
    pub noise_prob: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            brake_gain: 0.4,
            power_gain: 0.4,
            cruise_low_frac: 0.02,
            cruise_high_frac: 0.0,
            cruise_min_accel: CRUISE_MIN_ACCEL,
            noise_prob: NOISE_PROB,
        }
    }
}

/// What the driver knows beyond the logged channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guidance {
    pub target_mps: f64,
    /// Distance to the platform when a station stop is being made.
    pub stop_distance_m: Option<f64>,
    pub prev_input: InputCommand,
    /// Approaching an AWS magnet: levers are released ready to acknowledge.
    pub aws_standby: bool,
}

impl Guidance {
    pub fn new(target_mps: f64, prev_input: InputCommand) -> Self {
        Self {
            target_mps,
            stop_distance_m: None,
            prev_input,
            aws_standby: false,
        }
    }
}

fn notch(x: f64) -> u8 {
    let n = round(x);
    if n < 1.0 {
        1
    } else if n > MAX_NOTCH as f64 {
        MAX_NOTCH
    } else {
        n as u8
    }
}

/// Lowest power notch that at least balances resistance at `speed_mps`.
pub fn holding_notch(speed_mps: f64) -> u8 {
    let n = ceil(resistance(speed_mps) / A_MAX * MAX_NOTCH as f64);
    (n as u8).clamp(1, MAX_NOTCH)
}

fn cruise_notch(speed_mps: f64, cfg: &PolicyConfig) -> u8 {
    let n = ceil((resistance(speed_mps) + cfg.cruise_min_accel) / A_MAX * MAX_NOTCH as f64) as u8;
    n.clamp(1, MAX_NOTCH)
}

/// Noise-free policy.
pub fn policy_command(
    state: OperationalState,
    obs: &ObservationVector,
    guidance: &Guidance,
    cfg: &PolicyConfig,
) -> InputCommand {
    let target = guidance.target_mps;
    let speed = obs.s;
    if guidance.aws_standby && guidance.stop_distance_m.is_none() {
        return InputCommand::COAST;
    }
    match state {
        OperationalState::Aws | OperationalState::EngineCheck => InputCommand::COAST,
        OperationalState::BrakeChange => match guidance.stop_distance_m {
            Some(d) if d <= 0.0 => InputCommand::brake(MAX_NOTCH),
            Some(d) => {
                let required = speed * speed / (2.0 * d.max(0.5));
                let n = (ceil(required / B_MAX * MAX_NOTCH as f64) as u8).clamp(1, MAX_NOTCH);
                // Hold the current notch until the demand clearly drops below
                // the next notch down, so the lever does not hunt.
                let held = guidance.prev_input.brake_notch();
                let release_below =
                    (held as f64 - 1.0) / MAX_NOTCH as f64 * B_MAX * STATION_RELEASE_MARGIN;
                if held > n && required >= release_below {
                    InputCommand::brake(held)
                } else {
                    InputCommand::brake(n)
                }
            }
            None => InputCommand::brake(notch(cfg.brake_gain * (speed - target))),
        },
        OperationalState::SpeedChange => {
            InputCommand::power(notch(cfg.power_gain * (target - speed)).max(holding_notch(speed)))
        }
        OperationalState::Cruise => {
            if target <= 0.0 {
                InputCommand::COAST
            } else if speed < target * (1.0 - cfg.cruise_low_frac) {
                InputCommand::power(cruise_notch(speed, cfg))
            } else if speed > target * (1.0 - cfg.cruise_high_frac) {
                InputCommand::COAST
            } else if guidance.prev_input.lever() > 0 {
                InputCommand::power(cruise_notch(speed, cfg))
            } else {
                InputCommand::COAST
            }
        }
    }
}

/// Driver slip memory: a perturbation is drawn when the driver settles on a
/// new notch and is kept until the next change of mind, or until noticed
/// after `NOISE_HOLD_STEPS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DriverNoise {
    last_clean: Option<InputCommand>,
    offset: i8,
    held: u32,
}

/// Policy with the seeded ±1 notch perturbation. No noise is injected in
/// `AWS`, `Engine_Check`, on AWS standby, or while the target is zero
/// (station work).
pub fn scripted_policy<R: Rng + ?Sized>(
    state: OperationalState,
    obs: &ObservationVector,
    guidance: &Guidance,
    cfg: &PolicyConfig,
    noise: &mut DriverNoise,
    rng: &mut R,
) -> InputCommand {
    let cmd = policy_command(state, obs, guidance, cfg);
    let quiet = matches!(state, OperationalState::Aws | OperationalState::EngineCheck)
        || guidance.aws_standby
        || guidance.target_mps <= 0.0;
    if quiet {
        *noise = DriverNoise {
            last_clean: Some(cmd),
            offset: 0,
            held: 0,
        };
        return cmd;
    }
    if noise.last_clean != Some(cmd) {
        noise.last_clean = Some(cmd);
        noise.held = 0;
        noise.offset = if !cmd.is_coast() && rng.random_bool(cfg.noise_prob) {
            if rng.random_bool(0.5) {
                1
            } else {
                -1
            }
        } else {
            0
        };
    } else if noise.offset != 0 {
        noise.held += 1;
        if noise.held >= NOISE_HOLD_STEPS {
            noise.offset = 0;
        }
    }
    slip(cmd, noise.offset)
}

/// Moves the selected notch by `offset`, staying on the same lever.
fn slip(cmd: InputCommand, offset: i8) -> InputCommand {
    let shift = |n: u8| (n as i8 + offset).clamp(1, MAX_NOTCH as i8) as u8;
    if cmd.power_notch() > 0 {
        InputCommand::power(shift(cmd.power_notch()))
    } else if cmd.brake_notch() > 0 {
        InputCommand::brake(shift(cmd.brake_notch()))
    } else {
        cmd
    }
}
