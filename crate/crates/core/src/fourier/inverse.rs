use std::io::Write;
use std::time::Instant;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::cg::solve_shifted;
use crate::fourier::operator::{advance, FourierHamiltonian};
use crate::fourier::state::{dot, FourierState};
use crate::graph::RotorGraph;

/// Controls for [`inverse_power_iteration`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EigSettings {
    pub omega_max: usize,
    /// Relative residual target of each CG solve.
    pub tau_cg: f64,
    /// Stop once successive eigenvalue estimates differ by less than this.
    pub tau_inv: f64,
    pub max_inv_iters: usize,
    pub max_cg_iters: usize,
    pub seed: u64,
}

impl Default for EigSettings {
    fn default() -> Self {
        Self { omega_max: 5, tau_cg: 1e-12, tau_inv: 1e-12, max_inv_iters: 2000, max_cg_iters: 10_000, seed: 0 }
    }
}

impl EigSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSettings(msg.into()));
        if self.omega_max == 0 {
            return bad("omega_max must be >= 1");
        }
        if !(self.tau_cg > 0.0 && self.tau_inv > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_inv_iters == 0 || self.max_cg_iters == 0 {
            return bad("iteration caps must be >= 1");
        }
        Ok(())
    }
}

/// One inverse iteration.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InverseIterationRecord {
    pub inv_iter: usize,
    pub lambda: f64,
    pub cg_iters: usize,
    pub residual: f64,
    pub wall_ms: f64,
}

pub const FOURIER_CSV_HEADER: &str = "inv_iter,lambda,cg_iters,residual,wall_ms";

/// Writes the iteration history as CSV.
pub fn write_history_csv(records: &[InverseIterationRecord], mut out: impl Write) -> Result<()> {
    writeln!(out, "{FOURIER_CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{},{:.17e},{},{:e},{:.3}", r.inv_iter, r.lambda, r.cg_iters, r.residual, r.wall_ms)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct EigResult {
    pub lambda_min: f64,
    pub ground_state: FourierState,
    pub inv_iters: usize,
    pub cg_iters_per_inv: Vec<usize>,
    pub shift: f64,
    pub history: Vec<InverseIterationRecord>,
}

/// Shift used for the inverse iteration: the eigenvalue lower bound
/// `-4 sum |beta|`. Without any coupling that bound coincides with the
/// ground energy 0, so a strictly smaller value is used instead.
pub fn solver_shift(graph: &RotorGraph) -> f64 {
    let mu = graph.eigenvalue_lower_bound();
    if mu < 0.0 {
        mu
    } else {
        -1.0
    }
}

/// Seeded Gaussian start vector restricted to frequencies whose net momentum
/// vanishes on every connected component. `H` never couples different
/// momentum sectors, and the ground state lies in this one.
fn neutral_start(graph: &RotorGraph, omega_max: usize, seed: u64) -> Result<FourierState> {
    let n = graph.n();
    let mut state = FourierState::zeros(n, omega_max)?;
    let labels = graph.component_labels();
    let n_comp = graph.component_count();
    let side = state.side();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![0usize; n];
    let mut sums = vec![0i64; n_comp];
    for c in state.coeffs_mut() {
        sums.iter_mut().for_each(|s| *s = 0);
        for (v, &cv) in coords.iter().enumerate() {
            sums[labels[v]] += cv as i64 - omega_max as i64;
        }
        // draw unconditionally so the stream does not depend on the mask
        let draw: f64 = StandardNormal.sample(&mut rng);
        if sums.iter().all(|&s| s == 0) {
            *c = draw;
        }
        advance(&mut coords, side);
    }
    state.normalize();
    Ok(state)
}

/// Ground state of the truncated Fourier Hamiltonian by shifted inverse
/// power iteration with preconditioned CG inner solves.
pub fn inverse_power_iteration(graph: &RotorGraph, settings: &EigSettings) -> Result<EigResult> {
    settings.validate()?;
    let op = FourierHamiltonian::new(graph, settings.omega_max)?;
    let mu = solver_shift(graph);
    let precond = op.preconditioner_or_identity(mu);
    if !graph.is_connected() {
        warn!(
            "graph has {} connected components; each conserves its own net momentum, \
             the start vector is confined to the sector where all of them vanish",
            graph.component_count()
        );
    }

    let mut psi = neutral_start(graph, settings.omega_max, settings.seed)?;
    let mut h_psi = vec![0.0; op.len()];
    op.apply_into(psi.coeffs(), &mut h_psi);
    let mut lambda = dot(psi.coeffs(), &h_psi);

    let mut history = Vec::new();
    let mut change = f64::INFINITY;
    for k in 1..=settings.max_inv_iters {
        let start = Instant::now();
        let (phi, cg_iters, residual) =
            solve_shifted(&op, mu, &precond, psi.coeffs(), settings.tau_cg, settings.max_cg_iters)?;
        psi = FourierState::from_vec(graph.n(), settings.omega_max, phi)?;
        if psi.normalize() == 0.0 {
            return Err(Error::NonFinite("inverse iteration produced a zero vector".into()));
        }
        op.apply_into(psi.coeffs(), &mut h_psi);
        let next = dot(psi.coeffs(), &h_psi);
        change = (next - lambda).abs();
        lambda = next;
        history.push(InverseIterationRecord {
            inv_iter: k,
            lambda,
            cg_iters,
            residual,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        if change < settings.tau_inv {
            // fix the overall sign so that the zero mode is positive
            if psi.get(&vec![0; graph.n()]).unwrap_or(0.0) < 0.0 {
                psi.coeffs_mut().iter_mut().for_each(|c| *c = -*c);
            }
            info!(
                "inverse iteration converged: lambda = {lambda:.12}, {k} iterations, asymmetry {:.1e}",
                psi.reflection_asymmetry()
            );
            return Ok(EigResult {
                lambda_min: lambda,
                ground_state: psi,
                inv_iters: k,
                cg_iters_per_inv: history.iter().map(|r| r.cg_iters).collect(),
                shift: mu,
                history,
            });
        }
    }
    Err(Error::InverseIterationNotConverged { iterations: settings.max_inv_iters, change })
}
