//! Route descriptions and milestone derivation.
//!
//! A [`RouteSpec`] is fixed infrastructure: once validated it never changes, so
//! the milestones derived from it are the same on every run.

use alloc::vec::Vec;
use core::fmt;

/// What sits at a point along the route.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FeatureKind {
    /// A signal whose aspect implies a speed limit. `0.0` is a stop aspect.
    Signal {
        aspect_limit_mps: f64,
    },
    /// New posted line speed from this point on.
    SpeedLimitChange {
        limit_mps: f64,
    },
    /// Scheduled stop; the train must come to rest here and wait `dwell_s`.
    StationStop {
        dwell_s: f64,
    },
    RouteEnd,
}

impl FeatureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Signal { .. } => "signal",
            FeatureKind::SpeedLimitChange { .. } => "speed_limit",
            FeatureKind::StationStop { .. } => "station",
            FeatureKind::RouteEnd => "route_end",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RouteFeature {
    pub position_m: f64,
    pub kind: FeatureKind,
}

impl RouteFeature {
    pub fn new(position_m: f64, kind: FeatureKind) -> Self {
        Self { position_m, kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RouteSpec {
    pub length_m: f64,
    pub line_speed_mps: f64,
    /// Sorted strictly ascending by position.
    pub features: Vec<RouteFeature>,
}

/// One reason a route failed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum RouteViolation {
    NonPositiveLength(f64),
    NonPositiveLineSpeed(f64),
    NonFinite {
        index: usize,
    },
    OutOfRange {
        index: usize,
        position_m: f64,
    },
    Unsorted {
        index: usize,
        position_m: f64,
        previous_m: f64,
    },
    NonPositiveLimit {
        index: usize,
        limit_mps: f64,
    },
    AspectOutOfRange {
        index: usize,
        aspect_limit_mps: f64,
    },
    NegativeDwell {
        index: usize,
        dwell_s: f64,
    },
    RouteEndNotLast {
        index: usize,
    },
    NoSignal,
}

impl fmt::Display for RouteViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use RouteViolation::*;
        match self {
            NonPositiveLength(v) => write!(f, "length_m must be > 0 (got {v})"),
            NonPositiveLineSpeed(v) => write!(f, "line_speed_mps must be > 0 (got {v})"),
            NonFinite { index } => write!(f, "features[{index}]: non-finite value"),
            OutOfRange { index, position_m } => {
                write!(f, "features[{index}]: position_m {position_m} outside [0, length_m]")
            }
            Unsorted { index, position_m, previous_m } => write!(
                f,
                "features[{index}]: position_m {position_m} not strictly after previous {previous_m}"
            ),
            NonPositiveLimit { index, limit_mps } => {
                write!(f, "features[{index}]: limit_mps must be > 0 (got {limit_mps})")
            }
            AspectOutOfRange { index, aspect_limit_mps } => write!(
                f,
                "features[{index}]: signal limit_mps {aspect_limit_mps} outside [0, line_speed_mps]"
            ),
            NegativeDwell { index, dwell_s } => {
                write!(f, "features[{index}]: dwell_s must be >= 0 (got {dwell_s})")
            }
            RouteEndNotLast { index } => {
                write!(f, "features[{index}]: route_end must be the last feature")
            }
            NoSignal => write!(f, "route has no signal feature"),
        }
    }
}

/// Every violation found in a route, in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteError {
    pub violations: Vec<RouteViolation>,
}

impl fmt::Display for RouteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid route ({} violation(s))", self.violations.len())?;
        for v in &self.violations {
            write!(f, "; {v}")?;
        }
        Ok(())
    }
}

impl core::error::Error for RouteError {}

impl RouteSpec {
    /// Builds and validates a route.
    pub fn new(
        length_m: f64,
        line_speed_mps: f64,
        features: Vec<RouteFeature>,
    ) -> Result<Self, RouteError> {
        let route = Self {
            length_m,
            line_speed_mps,
            features,
        };
        route.validate()?;
        Ok(route)
    }

    pub fn validate(&self) -> Result<(), RouteError> {
        let mut violations = Vec::new();
        if !(self.length_m > 0.0 && self.length_m.is_finite()) {
            violations.push(RouteViolation::NonPositiveLength(self.length_m));
        }
        if !(self.line_speed_mps > 0.0 && self.line_speed_mps.is_finite()) {
            violations.push(RouteViolation::NonPositiveLineSpeed(self.line_speed_mps));
        }
        let mut previous: Option<f64> = None;
        let last = self.features.len().saturating_sub(1);
        for (index, feat) in self.features.iter().enumerate() {
            let p = feat.position_m;
            if !p.is_finite() {
                violations.push(RouteViolation::NonFinite { index });
                continue;
            }
            if p < 0.0 || p > self.length_m {
                violations.push(RouteViolation::OutOfRange {
                    index,
                    position_m: p,
                });
            }
            if let Some(prev) = previous {
                if p <= prev {
                    violations.push(RouteViolation::Unsorted {
                        index,
                        position_m: p,
                        previous_m: prev,
                    });
                }
            }
            previous = Some(p);
            match feat.kind {
                FeatureKind::Signal { aspect_limit_mps } => {
                    if !aspect_limit_mps.is_finite() {
                        violations.push(RouteViolation::NonFinite { index });
                    } else if aspect_limit_mps < 0.0 || aspect_limit_mps > self.line_speed_mps {
                        violations.push(RouteViolation::AspectOutOfRange {
                            index,
                            aspect_limit_mps,
                        });
                    }
                }
                FeatureKind::SpeedLimitChange { limit_mps } => {
                    if !(limit_mps > 0.0 && limit_mps.is_finite()) {
                        violations.push(RouteViolation::NonPositiveLimit { index, limit_mps });
                    }
                }
                FeatureKind::StationStop { dwell_s } => {
                    if !(dwell_s >= 0.0 && dwell_s.is_finite()) {
                        violations.push(RouteViolation::NegativeDwell { index, dwell_s });
                    }
                }
                FeatureKind::RouteEnd => {
                    if index != last {
                        violations.push(RouteViolation::RouteEndNotLast { index });
                    }
                }
            }
        }
        if !self
            .features
            .iter()
            .any(|f| matches!(f.kind, FeatureKind::Signal { .. }))
        {
            violations.push(RouteViolation::NoSignal);
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(RouteError { violations })
        }
    }

    pub fn signal_count(&self) -> usize {
        self.features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::Signal { .. }))
            .count()
    }
}

/// The operational consequence of reaching a milestone.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MilestoneEffect {
    /// Passing a signal: the AWS horn sounds and the ODM preempts into AWS.
    AwsWarning {
        aspect_limit_mps: f64,
    },
    /// Posted limit changes; the speed band is re-evaluated against it.
    SpeedLimit {
        limit_mps: f64,
    },
    StationStop {
        dwell_s: f64,
    },
    JourneyEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Milestone {
    pub position_m: f64,
    /// The feature that produces this milestone.
    pub trigger: RouteFeature,
    /// Index into `RouteSpec::features`; `None` for the implicit route end.
    pub feature_index: Option<usize>,
    pub effect: MilestoneEffect,
}

/// One milestone per feature, plus a route-end milestone at `length_m` when the
/// route does not list one explicitly. Ordered by position.
pub fn derive_milestones(route: &RouteSpec) -> Vec<Milestone> {
    let mut out: Vec<Milestone> = route
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| Milestone {
            position_m: f.position_m,
            trigger: *f,
            feature_index: Some(i),
            effect: match f.kind {
                FeatureKind::Signal { aspect_limit_mps } => {
                    MilestoneEffect::AwsWarning { aspect_limit_mps }
                }
                FeatureKind::SpeedLimitChange { limit_mps } => {
                    MilestoneEffect::SpeedLimit { limit_mps }
                }
                FeatureKind::StationStop { dwell_s } => MilestoneEffect::StationStop { dwell_s },
                FeatureKind::RouteEnd => MilestoneEffect::JourneyEnd,
            },
        })
        .collect();
    let has_end = matches!(route.features.last(), Some(f) if f.kind == FeatureKind::RouteEnd);
    if !has_end {
        out.push(Milestone {
            position_m: route.length_m,
            trigger: RouteFeature::new(route.length_m, FeatureKind::RouteEnd),
            feature_index: None,
            effect: MilestoneEffect::JourneyEnd,
        });
    }
    out
}
