//! Modified Bessel functions `I_0`, `I_1` of real nonnegative argument and
//! the ratio kernel `g(x) = I_1(x) / I_0(x)`.
//!
//! Below [`SERIES_LIMIT`] both functions come from their power series, which
//! has only positive terms and therefore no cancellation. Above it the
//! Hankel asymptotic expansion is used in exponentially scaled form, so
//! `log I_0` and `g` stay finite for arguments far beyond overflow of `I_0`.

use std::f64::consts::TAU;

/// Crossover between the power series and the asymptotic expansion. The
/// smallest asymptotic term at this argument is around `exp(-2x) ~ 4e-18`.
pub const SERIES_LIMIT: f64 = 20.0;

/// Below this the ratio kernels use their `x -> 0` limits.
pub const SMALL_ARG: f64 = 1e-8;

const MAX_TERMS: usize = 200;

/// Partial sums `(sum_k (x^2/4)^k / (k!)^2, sum_k (x^2/4)^k / (k! (k+1)!))`,
/// so that `I_0 = s0` and `I_1 = (x/2) s1`.
fn series_sums(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let (mut t0, mut t1) = (1.0, 1.0);
    let (mut s0, mut s1) = (1.0, 1.0);
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        s0 += t0;
        s1 += t1;
        if t0 < 1e-17 * s0 && t1 < 1e-17 * s1 {
            break;
        }
    }
    (s0, s1)
}

/// `sum_k (-1)^k a_k(nu) / x^k`, the bracket in `I_nu(x) ~ e^x / sqrt(2 pi x) [...]`.
fn asymptotic_bracket(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(nu * nu);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `exp(-x) I_0(x)` for `x >= 0`.
pub fn i0e(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        series_sums(x).0 * (-x).exp()
    } else {
        asymptotic_bracket(0, x) / (TAU * x).sqrt()
    }
}

/// `exp(-x) I_1(x)` for `x >= 0`.
pub fn i1e(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        0.5 * x * series_sums(x).1 * (-x).exp()
    } else {
        asymptotic_bracket(1, x) / (TAU * x).sqrt()
    }
}

pub fn i0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        series_sums(x).0
    } else {
        i0e(x) * x.exp()
    }
}

pub fn i1(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        0.5 * x * series_sums(x).1
    } else {
        i1e(x) * x.exp()
    }
}

/// `ln I_0(x)`, finite for any finite `x`.
pub fn log_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        series_sums(x).0.ln()
    } else {
        x + (asymptotic_bracket(0, x) / (TAU * x).sqrt()).ln()
    }
}

/// `g(x) = I_1(x) / I_0(x)`, with `0 <= g < 1`.
pub fn ratio(x: f64) -> f64 {
    let x = x.abs();
    if x < SMALL_ARG {
        return 0.5 * x;
    }
    if x < SERIES_LIMIT {
        let (s0, s1) = series_sums(x);
        0.5 * x * s1 / s0
    } else {
        asymptotic_bracket(1, x) / asymptotic_bracket(0, x)
    }
}

/// `g(x) / x`, tending to `1/2` at the origin.
pub fn ratio_over_x(x: f64) -> f64 {
    let x = x.abs();
    if x < SMALL_ARG {
        return 0.5;
    }
    if x < SERIES_LIMIT {
        let (s0, s1) = series_sums(x);
        0.5 * s1 / s0
    } else {
        ratio(x) / x
    }
}

/// `g'(x) = 1 - g(x)/x - g(x)^2`, tending to `1/2` at the origin.
pub fn ratio_derivative(x: f64) -> f64 {
    let x = x.abs();
    if x < SMALL_ARG {
        return 0.5;
    }
    let g = ratio(x);
    1.0 - ratio_over_x(x) - g * g
}

/// The quantities the wavefunction needs from one hidden unit at once:
/// `(ln I_0(r), g(r), g(r)/r, g'(r))`.
pub fn kernels(r: f64) -> (f64, f64, f64, f64) {
    let r = r.abs();
    if r < SMALL_ARG {
        let (s0, _) = series_sums(r);
        return (s0.ln(), 0.5 * r, 0.5, 0.5);
    }
    let (log_i0, g, g_over_r) = if r < SERIES_LIMIT {
        let (s0, s1) = series_sums(r);
        let g_over_r = 0.5 * s1 / s0;
        (s0.ln(), g_over_r * r, g_over_r)
    } else {
        let b0 = asymptotic_bracket(0, r);
        let g = asymptotic_bracket(1, r) / b0;
        (r + (b0 / (TAU * r).sqrt()).ln(), g, g / r)
    };
    (log_i0, g, g_over_r, 1.0 - g_over_r - g * g)
}
