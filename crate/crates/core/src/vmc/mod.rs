//! Variational Monte Carlo for the rotor RBM: Metropolis sampling of
//! `|psi|^2`, local-energy estimation and stochastic reconfiguration.
//!
//! Gradient convention: for real parameters the energy gradient is
//! `dE/dp_k = 2 F_k`, with `F_k = <E_loc O_k> - <E_loc><O_k>`. The update
//! `p <- p - eta (S + eps I)^{-1} F` uses `F` itself.

mod estimator;
mod run;
mod sampler;
mod settings;
mod sr;

pub use estimator::{
    estimate_energy_and_gradient, estimate_from_samples, local_energy, EnergyEstimate, GradientEstimate, Metric,
};
pub use run::{run_vmc, run_vmc_with, StepRecord, VmcReport, VmcRun, ROLLING_WINDOW, VMC_CSV_HEADER};
pub use sampler::{
    metropolis_accept, metropolis_move, metropolis_sweep, MarkovChain, Sampler, REBUILD_INTERVAL_SWEEPS,
};
pub use settings::{SampleUnit, SamplerSettings, SrSettings};
pub use sr::{solve_metric, sr_step, DENSE_SOLVE_LIMIT};
