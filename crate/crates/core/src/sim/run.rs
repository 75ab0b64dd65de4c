//! Run generation: drive the scripted cab over a route and log every step.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::constants::{
    AWS_DELAY_PROB, AWS_STANDBY_MIN_M, AWS_STANDBY_S, BAND_FRAC, B_MAX, CREEP_MPS, DT_S,
    ENGINE_CHECK_BUFFER_S, LIMIT_BRAKE_FRACTION, LOOKAHEAD_M, MAX_STEPS, STATION_BRAKE_FRACTION,
    STOP_TOLERANCE_M,
};
use super::dynamics::{step_dynamics, InputCommand, TrainState};
use super::policy::{scripted_policy, DriverNoise, Guidance, PolicyConfig};
use super::trace::{ObservationVector, TraceStep};
use crate::math::{quantize_micro, round, sqrt};
use crate::odm::{self, band_event_kind, OperationalState, TransitionEvent, TransitionKind};
use crate::route::{derive_milestones, Milestone, MilestoneEffect, RouteError, RouteSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub policy: PolicyConfig,
    pub aws_delay_prob: f64,
    pub engine_check_buffer_s: f64,
    /// Driver coasts for this long before reaching a signal.
    pub aws_standby_s: f64,
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: DT_S,
            policy: PolicyConfig::default(),
            aws_delay_prob: AWS_DELAY_PROB,
            engine_check_buffer_s: ENGINE_CHECK_BUFFER_S,
            aws_standby_s: AWS_STANDBY_S,
            max_steps: MAX_STEPS,
        }
    }
}

impl SimConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidDt(f64),
    InvalidRoute(RouteError),
    /// The simulator cannot drive past a signal showing a stop aspect.
    StopAspect {
        position_m: f64,
    },
    StepCapExceeded {
        steps: usize,
        position_m: f64,
    },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidDt(dt) => write!(f, "dt must be > 0 (got {dt})"),
            SimError::InvalidRoute(e) => write!(f, "{e}"),
            SimError::StopAspect { position_m } => {
                write!(
                    f,
                    "signal at {position_m} m shows a stop aspect; runs cannot pass it"
                )
            }
            SimError::StepCapExceeded { steps, position_m } => write!(
                f,
                "run did not reach route end within {steps} steps (stuck at {position_m:.1} m)"
            ),
        }
    }
}

impl core::error::Error for SimError {}

/// A state-changing event (or a signal passing) and the step it applied to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordedEvent {
    pub step: usize,
    pub event: TransitionEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub seed: u64,
    pub dt: f64,
    pub steps: Vec<TraceStep>,
    pub events: Vec<RecordedEvent>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Station {
    position_m: f64,
    dwell_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum StationPhase {
    Approach,
    /// Committed to stopping at the platform.
    Braking,
    Dwell {
        until_step: usize,
    },
}

/// Speed from which the train can brake to `limit` over `distance` at `decel`.
fn braking_curve(limit: f64, distance: f64, decel: f64) -> f64 {
    sqrt(limit * limit + 2.0 * decel * distance.max(0.0))
}

pub fn generate_run(route: &RouteSpec, seed: u64, dt: f64) -> Result<Run, SimError> {
    generate_run_with(route, seed, &SimConfig::with_dt(dt))
}

pub fn generate_run_with(route: &RouteSpec, seed: u64, cfg: &SimConfig) -> Result<Run, SimError> {
    let dt = cfg.dt;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::InvalidDt(dt));
    }
    route.validate().map_err(SimError::InvalidRoute)?;
    let milestones: Vec<Milestone> = derive_milestones(route);
    if let Some(m) = milestones
        .iter()
        .find(|m| matches!(m.effect, MilestoneEffect::AwsWarning { aspect_limit_mps } if aspect_limit_mps <= 0.0))
    {
        return Err(SimError::StopAspect { position_m: m.position_m });
    }
    let stations: Vec<Station> = milestones
        .iter()
        .filter_map(|m| match m.effect {
            MilestoneEffect::StationStop { dwell_s } => Some(Station {
                position_m: m.position_m,
                dwell_s,
            }),
            _ => None,
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ec_buffer_steps = round(cfg.engine_check_buffer_s / dt) as usize;

    let mut train = TrainState::at_rest();
    let mut speed_limit = route.line_speed_mps;
    let mut signal_limit = route.line_speed_mps;
    let mut cursor = 0usize;
    let mut station_idx = 0usize;
    let mut station_phase = StationPhase::Approach;

    let mut state = odm::initial_state();
    let mut steps_in_state = 0usize;
    let mut aws_hold = 1usize;
    let mut prev_input = InputCommand::COAST;
    let mut noise = DriverNoise::default();

    let mut steps: Vec<TraceStep> = Vec::new();
    let mut events: Vec<RecordedEvent> = Vec::new();
    events.push(RecordedEvent {
        step: 0,
        event: TransitionEvent::new(TransitionKind::JourneyStart, 0.0, 0.0),
    });

    let mut k = 0usize;
    loop {
        let t = k as f64 * dt;
        let pos = train.position_m;
        if pos >= route.length_m {
            break;
        }
        if k >= cfg.max_steps {
            return Err(SimError::StepCapExceeded {
                steps: k,
                position_m: pos,
            });
        }

        // Milestones reached since the last step.
        let mut passed_signal: Option<f64> = None;
        while cursor < milestones.len() && milestones[cursor].position_m <= pos {
            match milestones[cursor].effect {
                MilestoneEffect::AwsWarning { aspect_limit_mps } => {
                    signal_limit = aspect_limit_mps;
                    passed_signal = Some(aspect_limit_mps);
                }
                MilestoneEffect::SpeedLimit { limit_mps } => speed_limit = limit_mps,
                MilestoneEffect::StationStop { .. } | MilestoneEffect::JourneyEnd => {}
            }
            cursor += 1;
        }

        // Target speed: current limits, braking curves to lower limits ahead,
        // then station work on top.
        let current_limit = speed_limit.min(signal_limit);
        let limit_decel = LIMIT_BRAKE_FRACTION * B_MAX;
        let mut target = current_limit;
        let mut aws_standby = false;
        for m in milestones[cursor..].iter() {
            let d = m.position_m - pos;
            if d > LOOKAHEAD_M {
                break;
            }
            let lower = match m.effect {
                MilestoneEffect::SpeedLimit { limit_mps } => limit_mps,
                MilestoneEffect::AwsWarning { aspect_limit_mps } => {
                    if d <= (train.speed_mps * cfg.aws_standby_s).max(AWS_STANDBY_MIN_M) {
                        aws_standby = true;
                    }
                    // Reach a restrictive aspect's speed before standby begins.
                    let lead = aspect_limit_mps * cfg.aws_standby_s + AWS_STANDBY_MIN_M;
                    if aspect_limit_mps < target {
                        target = target.min(braking_curve(aspect_limit_mps, d - lead, limit_decel));
                    }
                    continue;
                }
                _ => continue,
            };
            if lower < target {
                target = target.min(braking_curve(lower, d, limit_decel));
            }
        }

        let mut stop_distance = None;
        if let Some(st) = stations.get(station_idx) {
            let d = st.position_m - pos;
            let v = train.speed_mps;
            match station_phase {
                StationPhase::Dwell { until_step } if k >= until_step => {
                    station_idx += 1;
                    station_phase = StationPhase::Approach;
                }
                StationPhase::Dwell { .. } => {
                    target = 0.0;
                    stop_distance = Some(d);
                }
                StationPhase::Braking if v > 0.0 => {
                    target = 0.0;
                    stop_distance = Some(d);
                }
                StationPhase::Braking | StationPhase::Approach => {
                    let stop_decel = STATION_BRAKE_FRACTION * B_MAX;
                    if v <= 0.0 && d <= STOP_TOLERANCE_M {
                        let dwell_steps = round(st.dwell_s / dt) as usize;
                        station_phase = StationPhase::Dwell {
                            until_step: k + dwell_steps,
                        };
                        target = 0.0;
                        stop_distance = Some(d);
                    } else if v * v / (2.0 * stop_decel) >= d || d <= STOP_TOLERANCE_M {
                        if v < 0.3 && d > STOP_TOLERANCE_M {
                            station_phase = StationPhase::Approach;
                            target = target.min(CREEP_MPS);
                        } else {
                            station_phase = StationPhase::Braking;
                            target = 0.0;
                            stop_distance = Some(d);
                        }
                    } else {
                        station_phase = StationPhase::Approach;
                        // Never plan faster than the station braking curve.
                        target = target.min(
                            braking_curve(0.0, d - STOP_TOLERANCE_M / 2.0, stop_decel)
                                .max(CREEP_MPS),
                        );
                    }
                }
            }
        }

        // ODM event for this step.
        let event_kind = if let Some(aspect_limit_mps) = passed_signal {
            aws_hold = if rng.random_bool(cfg.aws_delay_prob) {
                2
            } else {
                1
            };
            // The warning cuts traction until the next engine check passes.
            train.engine_on = false;
            Some(TransitionKind::SignalPassed { aspect_limit_mps })
        } else {
            match state {
                OperationalState::Aws => (steps_in_state >= aws_hold && prev_input.is_coast())
                    .then_some(TransitionKind::AwsAcknowledged),
                OperationalState::EngineCheck if steps_in_state < ec_buffer_steps => None,
                _ => Some(band_event_kind(train.speed_mps, target, BAND_FRAC)),
            }
        };
        if let Some(kind) = event_kind {
            let ev = TransitionEvent::new(kind, pos, t);
            let next = odm::transition(state, &ev);
            if next != state || matches!(kind, TransitionKind::SignalPassed { .. }) {
                events.push(RecordedEvent { step: k, event: ev });
                steps_in_state = 0;
            }
            if state == OperationalState::EngineCheck && next != state {
                train.engine_on = true;
            }
            state = next;
        }

        let obs = ObservationVector {
            t: quantize_micro(t),
            s: quantize_micro(train.speed_mps),
            sl: quantize_micro(speed_limit),
            sls: quantize_micro(signal_limit),
            roa: quantize_micro(train.accel_mps2),
            engine_on: train.engine_on,
        };
        let guidance = Guidance {
            target_mps: target,
            stop_distance_m: stop_distance,
            prev_input,
            aws_standby,
        };
        let input = scripted_policy(state, &obs, &guidance, &cfg.policy, &mut noise, &mut rng);

        steps.push(TraceStep {
            t_s: obs.t,
            position_m: quantize_micro(pos),
            obs,
            state,
            input,
            prev_input,
        });

        train = step_dynamics(&train, input, dt);
        prev_input = input;
        steps_in_state += 1;
        k += 1;
    }

    Ok(Run {
        seed,
        dt,
        steps,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::route::{FeatureKind, RouteFeature};

    fn short_route() -> RouteSpec {
        RouteSpec {
            length_m: 4000.0,
            line_speed_mps: 15.0,
            features: alloc::vec![
                RouteFeature::new(
                    900.0,
                    FeatureKind::Signal {
                        aspect_limit_mps: 15.0
                    }
                ),
                RouteFeature::new(1500.0, FeatureKind::SpeedLimitChange { limit_mps: 8.0 }),
                RouteFeature::new(2600.0, FeatureKind::StationStop { dwell_s: 10.0 }),
                RouteFeature::new(
                    3200.0,
                    FeatureKind::Signal {
                        aspect_limit_mps: 6.0
                    }
                ),
            ],
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let a = generate_run(&short_route(), 3, DT_S).unwrap();
        let b = generate_run(&short_route(), 3, DT_S).unwrap();
        assert_eq!(a, b);
        let c = generate_run(&short_route(), 4, DT_S).unwrap();
        assert_ne!(a.steps, c.steps);
    }

    #[test]
    fn prev_input_chains() {
        let run = generate_run(&short_route(), 1, DT_S).unwrap();
        assert_eq!(run.steps[0].prev_input, InputCommand::COAST);
        for w in run.steps.windows(2) {
            assert_eq!(w[1].prev_input, w[0].input);
        }
    }

    #[test]
    fn every_state_occurs_and_journey_starts_in_engine_check() {
        let run = generate_run(&short_route(), 1, DT_S).unwrap();
        assert_eq!(run.steps[0].state, OperationalState::EngineCheck);
        for st in OperationalState::ALL {
            assert!(
                run.steps.iter().any(|s| s.state == st),
                "{st:?} never reached"
            );
        }
    }

    #[test]
    fn aws_rows_are_coast_and_lead_to_engine_check() {
        for seed in 1..=5 {
            let run = generate_run(&short_route(), seed, DT_S).unwrap();
            for w in run.steps.windows(2) {
                if w[0].state == OperationalState::Aws {
                    assert!(w[0].input.is_coast());
                    assert!(matches!(
                        w[1].state,
                        OperationalState::Aws | OperationalState::EngineCheck
                    ));
                }
            }
        }
    }

    #[test]
    fn signal_crossings_enter_aws() {
        let route = short_route();
        let run = generate_run(&route, 2, DT_S).unwrap();
        for f in route
            .features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::Signal { .. }))
        {
            let k = run
                .steps
                .iter()
                .position(|s| s.position_m >= f.position_m)
                .unwrap();
            assert_eq!(
                run.steps[k].state,
                OperationalState::Aws,
                "signal at {}",
                f.position_m
            );
        }
    }

    #[test]
    fn engine_reads_off_through_aws_and_engine_check() {
        let run = generate_run(&short_route(), 1, DT_S).unwrap();
        for s in &run.steps {
            match s.state {
                OperationalState::Aws | OperationalState::EngineCheck => assert!(!s.obs.engine_on),
                _ => assert!(s.obs.engine_on, "step at t={} in {:?}", s.t_s, s.state),
            }
        }
    }

    #[test]
    fn recorded_events_replay_to_the_same_states() {
        let run = generate_run(&short_route(), 5, DT_S).unwrap();
        let mut state = odm::initial_state();
        let mut events = run.events.iter().peekable();
        for (k, s) in run.steps.iter().enumerate() {
            while let Some(e) = events.next_if(|e| e.step == k) {
                state = odm::transition(state, &e.event);
            }
            assert_eq!(state, s.state, "step {k}");
        }
    }

    #[test]
    fn physical_sanity() {
        let run = generate_run(&short_route(), 7, DT_S).unwrap();
        let mut last_pos = 0.0;
        for s in &run.steps {
            assert!(s.obs.s >= 0.0);
            assert!(s.position_m >= last_pos);
            last_pos = s.position_m;
        }
        // The station stop is made.
        assert!(run
            .steps
            .iter()
            .any(|s| s.obs.s == 0.0 && (s.position_m - 2600.0).abs() < STOP_TOLERANCE_M));
    }

    #[test]
    fn step_cap_is_an_error() {
        let cfg = SimConfig {
            max_steps: 50,
            ..SimConfig::default()
        };
        let err = generate_run_with(&short_route(), 1, &cfg).unwrap_err();
        assert!(matches!(err, SimError::StepCapExceeded { steps: 50, .. }));
    }

    #[test]
    fn rejects_bad_dt() {
        assert_eq!(
            generate_run(&short_route(), 1, 0.0).unwrap_err(),
            SimError::InvalidDt(0.0)
        );
    }
}
