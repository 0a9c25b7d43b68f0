use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rbm::RbmParams;
use crate::vmc::estimator::Metric;
use crate::vmc::settings::SrSettings;

/// Above this many parameters the metric is never assembled.
pub const DENSE_SOLVE_LIMIT: usize = 5000;

/// Solves `(S + shift I) delta = force`.
pub fn solve_metric(metric: &Metric, force: &DVector<f64>, shift: f64) -> Result<DVector<f64>> {
    let p = metric.dim();
    if force.len() != p {
        return Err(Error::DimensionMismatch { expected: p, actual: force.len() });
    }
    if p <= DENSE_SOLVE_LIMIT {
        let mut s = metric.to_dense();
        for k in 0..p {
            s[(k, k)] += shift;
        }
        dense_solve(s, force)
    } else {
        iterative_solve(metric, force, shift)
    }
}

fn dense_solve(s: DMatrix<f64>, force: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = Cholesky::new(s)
        .ok_or_else(|| Error::SolveFailed("shifted metric is not positive definite; increase the sr shift".into()))?;
    let delta = chol.solve(force);
    if delta.iter().all(|v| v.is_finite()) {
        Ok(delta)
    } else {
        Err(Error::SolveFailed("non-finite update direction".into()))
    }
}

/// Matrix-free conjugate gradient on `S + shift I`.
fn iterative_solve(metric: &Metric, force: &DVector<f64>, shift: f64) -> Result<DVector<f64>> {
    let p = force.len();
    let tol = 1e-10 * force.norm();
    let mut x = DVector::zeros(p);
    let mut r = force.clone();
    let mut d = r.clone();
    let mut rr = r.dot(&r);
    for _ in 0..10 * p {
        if rr.sqrt() <= tol {
            return Ok(x);
        }
        let q = metric.apply(&d) + &d * shift;
        let dq = d.dot(&q);
        if dq <= 0.0 {
            break;
        }
        let alpha = rr / dq;
        x.axpy(alpha, &d, 1.0);
        r.axpy(-alpha, &q, 1.0);
        let rr_new = r.dot(&r);
        d = &r + &d * (rr_new / rr);
        rr = rr_new;
    }
    Err(Error::SolveFailed(format!("metric solve stalled at residual {:.3e}", rr.sqrt())))
}

/// `p - learning_rate * (S + shift I)^{-1} F` in flat parameter order.
pub fn sr_step(params: &RbmParams, force: &DVector<f64>, metric: &Metric, sr: &SrSettings) -> Result<RbmParams> {
    if force.len() != params.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), actual: force.len() });
    }
    if force.iter().all(|f| *f == 0.0) {
        return Ok(params.clone());
    }
    let delta = solve_metric(metric, force, sr.sr_shift)?;
    let mut next = params.clone();
    for (p, d) in next.as_mut_slice().iter_mut().zip(delta.iter()) {
        *p -= sr.learning_rate * d;
    }
    next.check_finite()?;
    Ok(next)
}
