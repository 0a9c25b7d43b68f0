//! Brute-force Rayleigh quotient on a periodic grid, used as an independent
//! check on the Monte Carlo and spectral energies for very small systems.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::graph::{RotorConfig, RotorGraph};

/// Largest rotor count the grid oracle accepts.
pub const MAX_QUADRATURE_ROTORS: usize = 3;
pub const MIN_GRID_POINTS: usize = 8;

/// Evaluates `<psi, H psi> / <psi, psi>` for `psi = exp(log_psi)` on a
/// uniform `G^n` grid over `[-π, π)^n` with the trapezoid rule. The
/// Laplacian is the periodic second-order central difference.
pub fn rayleigh_quotient_quadrature<F>(graph: &RotorGraph, log_psi: F, grid_points_per_dim: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = graph.n();
    if n > MAX_QUADRATURE_ROTORS {
        return Err(Error::QuadratureTooLarge { n, max: MAX_QUADRATURE_ROTORS });
    }
    let g = grid_points_per_dim;
    if g < MIN_GRID_POINTS {
        return Err(Error::InvalidSettings(format!(
            "quadrature needs at least {MIN_GRID_POINTS} points per dimension, got {g}"
        )));
    }
    let dx = TAU / g as f64;
    let total = g.pow(n as u32);
    let strides: Vec<usize> = (0..n).map(|i| g.pow((n - 1 - i) as u32)).collect();

    let mut point = vec![0.0; n];
    let mut log_values = Vec::with_capacity(total);
    let mut potential = Vec::with_capacity(total);
    for flat in 0..total {
        for (i, p) in point.iter_mut().enumerate() {
            *p = -PI + dx * ((flat / strides[i]) % g) as f64;
        }
        let lp = log_psi(&point);
        if !lp.is_finite() {
            return Err(Error::NonFinite(format!("log_psi at {point:?}")));
        }
        log_values.push(lp);
        potential.push(graph.potential_energy(&RotorConfig::new(point.clone()))?);
    }
    let shift = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let psi: Vec<f64> = log_values.iter().map(|lp| (lp - shift).exp()).collect();

    let inv_dx2 = 1.0 / (dx * dx);
    let (mut numerator, mut norm) = (0.0, 0.0);
    for flat in 0..total {
        let mut kinetic = 0.0;
        for (&stride, &h) in strides.iter().zip(graph.h()) {
            let coord = (flat / stride) % g;
            let up = if coord + 1 == g { flat + stride - g * stride } else { flat + stride };
            let down = if coord == 0 { flat + (g - 1) * stride } else { flat - stride };
            let lap = (psi[up] - 2.0 * psi[flat] + psi[down]) * inv_dx2;
            kinetic -= 0.5 * h * lap;
        }
        numerator += psi[flat] * (kinetic + potential[flat] * psi[flat]);
        norm += psi[flat] * psi[flat];
    }
    Ok(numerator / norm)
}
