//! Ground-state solvers for the quantum rotor Hamiltonian on weighted graphs.
//!
//! Three independent routes to the ground state are provided and are meant
//! to be checked against one another:
//!
//! * [`vmc`]: variational Monte Carlo with a rotor restricted Boltzmann
//!   machine ([`rbm`]) trained by stochastic reconfiguration,
//! * [`fourier`]: a frequency-truncated spectral discretization solved by
//!   preconditioned inverse power iteration,
//! * [`jastrow`]: the closed-form energy of the pair-product trial state on
//!   chain graphs.
//!
//! [`harness`] wires the solvers to configuration files, graph generators
//! and comparison reports.

pub mod bessel;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod jastrow;
pub mod quadrature;
pub mod rbm;
pub mod vmc;

pub use error::{Error, Result};
pub use geometry::{circle_distance, wrap_angle};
pub use graph::{Edge, RotorConfig, RotorGraph};
pub use quadrature::rayleigh_quotient_quadrature;
pub use rbm::{RbmCache, RbmParams};
