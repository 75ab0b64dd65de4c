//! Route documents (JSON).
//!
//! ```json
//! { "length_m": 12000, "line_speed_mps": 20,
//!   "features": [ { "position_m": 800, "kind": "signal", "limit_mps": 20 } ] }
//! ```
//!
//! Unknown keys are rejected. Loading reports every schema and range
//! violation at once rather than stopping at the first.

use std::path::Path;

use railodm_core::route::{FeatureKind, RouteFeature, RouteSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteDocument {
    pub length_m: f64,
    pub line_speed_mps: f64,
    pub features: Vec<FeatureDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDocument {
    pub position_m: f64,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell_s: Option<f64>,
}

impl RouteDocument {
    /// Converts to a validated route, collecting every problem.
    pub fn into_route(self) -> Result<RouteSpec> {
        let mut problems = Vec::new();
        let mut features = Vec::with_capacity(self.features.len());
        for (i, f) in self.features.iter().enumerate() {
            let kind = match (f.kind.as_str(), f.limit_mps, f.dwell_s) {
                ("signal", Some(l), None) => Some(FeatureKind::Signal {
                    aspect_limit_mps: l,
                }),
                ("speed_limit", Some(l), None) => {
                    Some(FeatureKind::SpeedLimitChange { limit_mps: l })
                }
                ("station", None, d) => Some(FeatureKind::StationStop {
                    dwell_s: d.unwrap_or(0.0),
                }),
                ("route_end", None, None) => Some(FeatureKind::RouteEnd),
                ("signal" | "speed_limit", None, _) => {
                    problems.push(format!("features[{i}]: {} requires limit_mps", f.kind));
                    None
                }
                ("signal" | "speed_limit", Some(_), Some(_)) => {
                    problems.push(format!("features[{i}]: {} does not take dwell_s", f.kind));
                    None
                }
                ("station", Some(_), _) => {
                    problems.push(format!("features[{i}]: station does not take limit_mps"));
                    None
                }
                ("route_end", _, _) => {
                    problems.push(format!("features[{i}]: route_end takes no parameters"));
                    None
                }
                (other, _, _) => {
                    problems.push(format!("features[{i}]: unknown feature kind {other:?}"));
                    None
                }
            };
            // Keep a placeholder so range/order checks still run with stable indices.
            features.push(RouteFeature::new(
                f.position_m,
                kind.unwrap_or(FeatureKind::StationStop { dwell_s: 0.0 }),
            ));
        }
        let route = RouteSpec {
            length_m: self.length_m,
            line_speed_mps: self.line_speed_mps,
            features,
        };
        if let Err(e) = route.validate() {
            problems.extend(e.violations.iter().map(|v| v.to_string()));
        }
        if problems.is_empty() {
            Ok(route)
        } else {
            Err(Error::Schema {
                what: "route",
                problems,
            })
        }
    }

    pub fn from_route(route: &RouteSpec) -> Self {
        let features = route
            .features
            .iter()
            .map(|f| {
                let (limit_mps, dwell_s) = match f.kind {
                    FeatureKind::Signal { aspect_limit_mps } => (Some(aspect_limit_mps), None),
                    FeatureKind::SpeedLimitChange { limit_mps } => (Some(limit_mps), None),
                    FeatureKind::StationStop { dwell_s } => (None, Some(dwell_s)),
                    FeatureKind::RouteEnd => (None, None),
                };
                FeatureDocument {
                    position_m: f.position_m,
                    kind: f.kind.name().to_string(),
                    limit_mps,
                    dwell_s,
                }
            })
            .collect();
        Self {
            length_m: route.length_m,
            line_speed_mps: route.line_speed_mps,
            features,
        }
    }
}

pub fn parse_route(text: &str) -> Result<RouteSpec> {
    let doc: RouteDocument = serde_json::from_str(text).map_err(|e| Error::Schema {
        what: "route",
        problems: vec![e.to_string()],
    })?;
    doc.into_route()
}

pub fn route_to_json(route: &RouteSpec) -> String {
    serde_json::to_string_pretty(&RouteDocument::from_route(route)).expect("route serializes")
}

pub fn load_route(path: &Path) -> Result<RouteSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_route(&text)
}

pub fn save_route(route: &RouteSpec, path: &Path) -> Result<()> {
    std::fs::write(path, route_to_json(route)).map_err(|e| Error::io(path, e))
}

/// Content hash of a route, independent of its file formatting.
pub fn route_hash(route: &RouteSpec) -> String {
    let canonical =
        serde_json::to_string(&RouteDocument::from_route(route)).expect("route serializes");
    crate::hashing::sha256_hex(canonical.as_bytes())
}
