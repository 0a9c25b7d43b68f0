use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::RotorGraph;
use crate::rbm::{RbmCache, RbmParams};
use crate::vmc::sampler::Sampler;

/// `(H psi)(theta) / psi(theta)` for the configuration held by `cache`:
///
/// ```text
/// E_loc = -1/2 sum_j h_j [ d2_j log psi + (d_j log psi)^2 ] + V(theta)
/// ```
pub fn local_energy(graph: &RotorGraph, params: &RbmParams, cache: &RbmCache) -> Result<f64> {
    let (first, second) = params.angle_derivatives(cache);
    let kinetic: f64 =
        graph.h().iter().zip(first.iter().zip(&second)).map(|(h, (d1, d2))| -0.5 * h * (d2 + d1 * d1)).sum();
    let energy = kinetic + graph.potential_energy(cache.config())?;
    if energy.is_finite() {
        Ok(energy)
    } else {
        Err(Error::NonFinite("local energy".into()))
    }
}

/// Summary statistics of one optimization step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub step_index: usize,
    pub mean: f64,
    /// Standard deviation of the local energy over retained samples.
    pub std: f64,
    /// Euclidean norm of the force vector `F`.
    pub grad_norm: f64,
    pub samples: usize,
    pub acceptance_rate: f64,
}

impl EnergyEstimate {
    /// `std / sqrt(samples)`, ignoring autocorrelation.
    pub fn standard_error(&self) -> f64 {
        self.std / (self.samples as f64).sqrt()
    }
}

/// The quantum geometric tensor, either assembled or as centered samples.
#[derive(Clone, Debug)]
pub enum Metric {
    Dense(DMatrix<f64>),
    /// Rows are centered log-derivative samples `O - <O>`; `S = O^T O / N`.
    Samples(DMatrix<f64>),
}

impl Metric {
    pub fn dim(&self) -> usize {
        match self {
            Metric::Dense(s) => s.nrows(),
            Metric::Samples(o) => o.ncols(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Metric::Dense(s) => s.clone(),
            Metric::Samples(o) => {
                let mut s = o.transpose() * o;
                s /= o.nrows() as f64;
                s
            }
        }
    }

    /// `S v`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Metric::Dense(s) => s * v,
            Metric::Samples(o) => {
                let ov = o * v;
                o.tr_mul(&ov) / o.nrows() as f64
            }
        }
    }
}

/// Energy statistics, force `F_k = <E O_k> - <E><O_k>` and metric
/// `S_kl = <O_k O_l> - <O_k><O_l>` over one batch of samples.
#[derive(Clone, Debug)]
pub struct GradientEstimate {
    pub energy: EnergyEstimate,
    pub force: DVector<f64>,
    pub metric: Metric,
}

/// Reduces per-sample local energies and log-derivative rows (row-major,
/// `samples x p`) to the step statistics.
pub fn estimate_from_samples(local_energies: &[f64], log_derivs: &[f64], p: usize) -> Result<GradientEstimate> {
    let samples = local_energies.len();
    if samples < 2 {
        return Err(Error::TooFewSamples(samples));
    }
    if log_derivs.len() != samples * p {
        return Err(Error::DimensionMismatch { expected: samples * p, actual: log_derivs.len() });
    }
    let inv_n = 1.0 / samples as f64;
    let mean = local_energies.iter().sum::<f64>() * inv_n;
    let centered_e: Vec<f64> = local_energies.iter().map(|e| e - mean).collect();
    let var = centered_e.iter().map(|d| d * d).sum::<f64>() * inv_n;

    let mut o = DMatrix::from_row_slice(samples, p, log_derivs);
    for mut col in o.column_iter_mut() {
        let col_mean = col.sum() * inv_n;
        col.add_scalar_mut(-col_mean);
    }
    let force = o.tr_mul(&DVector::from_vec(centered_e)) * inv_n;
    Ok(GradientEstimate {
        energy: EnergyEstimate {
            step_index: 0,
            mean,
            std: var.sqrt(),
            grad_norm: force.norm(),
            samples,
            acceptance_rate: f64::NAN,
        },
        force,
        metric: Metric::Samples(o),
    })
}

/// Samples `|psi|^2` with `sampler` and returns the step statistics.
pub fn estimate_energy_and_gradient(
    graph: &RotorGraph,
    params: &RbmParams,
    sampler: &mut Sampler,
) -> Result<GradientEstimate> {
    let p = params.len();
    let expected = sampler.settings().retained();
    let mut energies = Vec::with_capacity(expected);
    let mut derivs = vec![0.0; expected * p];
    let mut filled = 0;
    let acceptance = sampler.sample(params, |cache| {
        energies.push(local_energy(graph, params, cache)?);
        if derivs.len() < (filled + 1) * p {
            derivs.resize((filled + 1) * p, 0.0);
        }
        params.param_gradient_into(cache, &mut derivs[filled * p..(filled + 1) * p]);
        filled += 1;
        Ok(())
    })?;
    derivs.truncate(filled * p);
    let mut estimate = estimate_from_samples(&energies, &derivs, p)?;
    estimate.energy.acceptance_rate = acceptance;
    Ok(estimate)
}
