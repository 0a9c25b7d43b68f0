//! Frequency-truncated spectral eigensolver.
//!
//! Writing `psi(theta) = sum_w psihat(w) exp(-i w.theta)` turns the rotor
//! Hamiltonian with uniform vertex weight into a sparse operator on the
//! integer lattice, truncated here to the cube `|w|_inf <= omega_max`.

mod cg;
mod inverse;
mod operator;
mod state;

pub use cg::{cg_solve, CgOutcome};
pub use inverse::{
    inverse_power_iteration, solver_shift, write_history_csv, EigResult, EigSettings, InverseIterationRecord,
    FOURIER_CSV_HEADER,
};
pub use operator::{apply_hamiltonian, apply_preconditioner_inverse, FourierHamiltonian};
pub use state::FourierState;
