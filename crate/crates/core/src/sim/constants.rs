//! Physical and behavioural constants for the cab simulator.

/// Default integration step, seconds.
pub const DT_S: f64 = 0.1;

/// Highest power or brake notch.
pub const MAX_NOTCH: u8 = 4;

/// Full-power tractive acceleration, m/s².
pub const A_MAX: f64 = 1.0;
/// Full-service braking deceleration, m/s².
pub const B_MAX: f64 = 1.2;

/// Davis resistance, mass-normalised: `C0 + C1·v + C2·v²` in m/s².
pub const C0: f64 = 0.05;
pub const C1: f64 = 0.002;
pub const C2: f64 = 0.0006;

/// Half-width of the in-band speed window as a fraction of the target.
pub const BAND_FRAC: f64 = 0.04;

/// Station stops are planned at this fraction of full-service braking.
pub const STATION_BRAKE_FRACTION: f64 = 0.6;
/// A station brake notch is released once the demand falls below this
/// fraction of the next notch down.
pub const STATION_RELEASE_MARGIN: f64 = 0.85;
/// Permanent speed restrictions and restrictive aspects are approached at
/// this fraction of full-service braking.
pub const LIMIT_BRAKE_FRACTION: f64 = 0.35;
/// How far ahead the driver looks for lower limits, metres.
pub const LOOKAHEAD_M: f64 = 2500.0;

/// Levers are released this long before an AWS magnet, seconds of running.
pub const AWS_STANDBY_S: f64 = 3.0;
/// Minimum standby distance, for slow approaches.
pub const AWS_STANDBY_MIN_M: f64 = 10.0;

/// A stop counts as made at the platform when within this distance short of it.
pub const STOP_TOLERANCE_M: f64 = 8.0;
/// Speed used to close up to the platform after stopping short.
pub const CREEP_MPS: f64 = 1.5;

/// Minimum time spent in `Engine_Check` before the band checks resume.
pub const ENGINE_CHECK_BUFFER_S: f64 = 2.0;

/// Cruise top-ups use the lowest notch giving at least this net
/// acceleration, m/s².
pub const CRUISE_MIN_ACCEL: f64 = 0.03;

/// Probability that a notch decision slips by ±1 (outside AWS/Engine_Check).
pub const NOISE_PROB: f64 = 0.05;
/// Steps a slipped notch is held before the driver corrects it.
pub const NOISE_HOLD_STEPS: u32 = 10;
/// Probability that the AWS acknowledgement is delayed by one step.
pub const AWS_DELAY_PROB: f64 = 0.01;

/// Hard cap on steps per run; exceeding it is a simulator failure.
pub const MAX_STEPS: usize = 400_000;

pub fn resistance(speed_mps: f64) -> f64 {
    C0 + C1 * speed_mps + C2 * speed_mps * speed_mps
}
