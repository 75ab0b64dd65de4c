//! Bundled routes.

use railodm_core::route::RouteSpec;

use crate::route_file::parse_route;

/// Synthetic 42 km test route: six signals, two stations, three limit changes.
pub const SWALWELL_PROXY_JSON: &str = include_str!("../fixtures/swalwell_proxy.json");

pub fn swalwell_proxy() -> RouteSpec {
    parse_route(SWALWELL_PROXY_JSON).expect("bundled fixture is valid")
}
