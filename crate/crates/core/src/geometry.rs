//! Angles on the unit circle.

use std::f64::consts::{PI, TAU};

/// Maps an arbitrary angle into the half-open interval `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    if (-PI..PI).contains(&theta) {
        return theta;
    }
    let mut wrapped = theta - TAU * ((theta + PI) / TAU).floor();
    // floor() can land exactly on the excluded endpoint after rounding
    if wrapped >= PI {
        wrapped -= TAU;
    }
    if wrapped < -PI {
        wrapped += TAU;
    }
    wrapped
}

/// Geodesic distance between two points on the unit circle, in `[0, π]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let diff = (wrap_angle(a) - wrap_angle(b)).abs() % TAU;
    diff.min(TAU - diff)
}
