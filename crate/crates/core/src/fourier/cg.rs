use crate::error::{Error, Result};
use crate::fourier::operator::FourierHamiltonian;
use crate::fourier::state::{dot, FourierState};
use crate::graph::RotorGraph;

/// Result of one shifted linear solve.
#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: FourierState,
    /// CG steps taken (residual refreshes are not counted).
    pub iterations: usize,
    /// Achieved `|(H - mu) x - rhs| / |rhs|`.
    pub residual: f64,
}

/// Conjugate gradient on `[M^-1 (H - mu) M^-1] (M x) = M^-1 rhs` with the
/// diagonal `M` supplied as `precond` (square roots of the diagonal).
///
/// The recursive residual is periodically replaced by the true residual
/// and the iteration restarted from the current iterate, which keeps the
/// final tolerance honest at tight `tau`.
pub(crate) fn solve_shifted(
    op: &FourierHamiltonian,
    mu: f64,
    precond: &[f64],
    rhs: &[f64],
    tau: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let len = op.len();
    let rhs_norm = dot(rhs, rhs).sqrt();
    if rhs_norm == 0.0 {
        return Ok((vec![0.0; len], 0, 0.0));
    }
    // z = M x is the unknown of the split system
    let mut z = vec![0.0; len];
    let mut x = vec![0.0; len];
    let mut r: Vec<f64> = rhs.iter().zip(precond).map(|(b, m)| b / m).collect();
    let mut p = r.clone();
    let mut scratch = vec![0.0; len];
    let mut q = vec![0.0; len];
    let mut iterations = 0;
    let mut rr = dot(&r, &r);
    let true_residual = |r_split: &[f64]| -> f64 {
        r_split.iter().zip(precond).map(|(v, m)| (v * m) * (v * m)).sum::<f64>().sqrt() / rhs_norm
    };

    loop {
        let mut converged_recursively = false;
        while iterations < max_iters {
            for ((s, pk), m) in scratch.iter_mut().zip(&p).zip(precond) {
                *s = pk / m;
            }
            op.apply_shifted_into(&scratch, mu, &mut q);
            for (qk, m) in q.iter_mut().zip(precond) {
                *qk /= m;
            }
            iterations += 1;
            let pq = dot(&p, &q);
            if pq <= 0.0 {
                return Err(Error::CgNotConverged { iterations, residual: true_residual(&r) });
            }
            let alpha = rr / pq;
            for k in 0..len {
                z[k] += alpha * p[k];
                r[k] -= alpha * q[k];
            }
            let rr_new = dot(&r, &r);
            if true_residual(&r) <= tau {
                converged_recursively = true;
                break;
            }
            let beta = rr_new / rr;
            rr = rr_new;
            for (pk, rk) in p.iter_mut().zip(&r) {
                *pk = rk + beta * *pk;
            }
        }

        // refresh with the true residual of the current iterate
        for k in 0..len {
            x[k] = z[k] / precond[k];
        }
        op.apply_shifted_into(&x, mu, &mut q);
        for k in 0..len {
            r[k] = (rhs[k] - q[k]) / precond[k];
        }
        let achieved = true_residual(&r);
        if achieved <= tau {
            return Ok((x, iterations, achieved));
        }
        if !converged_recursively || iterations >= max_iters {
            return Err(Error::CgNotConverged { iterations, residual: achieved });
        }
        p.copy_from_slice(&r);
        rr = dot(&r, &r);
    }
}

/// Solves `(H - mu) x = rhs` to relative residual `tau_cg`.
pub fn cg_solve(
    graph: &RotorGraph,
    mu: f64,
    rhs: &FourierState,
    tau_cg: f64,
    max_cg_iters: usize,
) -> Result<CgOutcome> {
    let op = FourierHamiltonian::new(graph, rhs.omega_max())?;
    op.check_state(rhs)?;
    if rhs.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("cg right-hand side".into()));
    }
    let precond = op.preconditioner_or_identity(mu);
    let (x, iterations, residual) = solve_shifted(&op, mu, &precond, rhs.coeffs(), tau_cg, max_cg_iters)?;
    Ok(CgOutcome { solution: FourierState::from_vec(rhs.n(), rhs.omega_max(), x)?, iterations, residual })
}
