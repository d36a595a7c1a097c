//! Size caps for enumerations, overridable through the environment.

use crate::error::{Error, Result};

/// Environment variable holding the maximum number of points (grid points,
/// index tuples, samples) any single enumeration may visit.
pub const MAX_POINTS_ENV: &str = "COPOS_MAX_POINTS";

pub const DEFAULT_MAX_POINTS: u128 = 2_000_000;

pub fn max_points() -> u128 {
    std::env::var(MAX_POINTS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_POINTS)
}

pub fn check(what: &'static str, needed: u128) -> Result<()> {
    let limit = max_points();
    if needed > limit {
        Err(Error::SizeCap { what, needed, limit })
    } else {
        Ok(())
    }
}
