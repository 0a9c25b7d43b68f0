//! Pair-product (Jastrow) trial state on chain graphs.
//!
//! For `log psi = sum_i w_i cos(theta_i - theta_{i+1})` on a path with
//! uniform vertex weight `h`, every edge contributes independently:
//!
//! ```text
//! E = sum_i [ 2 beta_i + g(2 w_i) (h w_i / 2 - 2 beta_i) ],   g = I_1 / I_0
//! ```

use serde::{Deserialize, Serialize};

use crate::bessel;
use crate::error::{Error, Result};
use crate::graph::RotorGraph;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JastrowChain {
    pub n: usize,
    pub h: f64,
    /// Edge weights, `beta[i]` couples rotors `i` and `i + 1`.
    pub beta: Vec<f64>,
    /// Variational weights, one per edge.
    pub w: Vec<f64>,
}

impl JastrowChain {
    pub fn new(n: usize, h: f64, beta: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSettings("jastrow chain needs n >= 2".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidSettings(format!("vertex weight must be positive, got {h}")));
        }
        if beta.len() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n - 1, actual: beta.len() });
        }
        if w.len() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n - 1, actual: w.len() });
        }
        Ok(Self { n, h, beta, w })
    }

    /// Uniform chain with the same `beta` and `w` on every edge.
    pub fn uniform(n: usize, h: f64, beta: f64, w: f64) -> Result<Self> {
        Self::new(n, h, vec![beta; n.saturating_sub(1)], vec![w; n.saturating_sub(1)])
    }

    /// Reads `n`, `h` and the edge weights off a path graph `0 - 1 - ... - n-1`.
    pub fn from_graph(graph: &RotorGraph, w: Vec<f64>) -> Result<Self> {
        let h = graph.uniform_h()?;
        let n = graph.n();
        let edges = graph.edges();
        let is_path = edges.len() + 1 == n && edges.iter().enumerate().all(|(k, e)| e.i == k && e.j == k + 1);
        if !is_path {
            return Err(Error::InvalidGraph("closed-form jastrow energy needs the path graph 0-1-...-(n-1)".into()));
        }
        Self::new(n, h, edges.iter().map(|e| e.beta).collect(), w)
    }
}

/// Energy contributed by a single edge.
pub fn edge_energy(h: f64, beta: f64, w: f64) -> f64 {
    2.0 * beta + bessel::ratio(2.0 * w) * (0.5 * h * w - 2.0 * beta)
}

/// Closed-form Rayleigh quotient of the Jastrow state on a chain.
pub fn jastrow_energy(chain: &JastrowChain) -> f64 {
    chain.beta.iter().zip(&chain.w).map(|(&b, &w)| edge_energy(chain.h, b, w)).sum()
}

/// Optimal uniform weight on one edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformOptimum {
    pub w_star: f64,
    pub energy_per_edge: f64,
}

/// Golden-section minimization of [`edge_energy`] over `w` in
/// `[0, 8 beta / h + 4]`, refined until the bracket is below `1e-10`.
pub fn optimize_uniform_weight(h: f64, beta: f64) -> Result<UniformOptimum> {
    if !(h > 0.0 && h.is_finite()) || !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidSettings(format!("need h > 0 and beta >= 0, got h = {h}, beta = {beta}")));
    }
    let f = |w: f64| edge_energy(h, beta, w);
    let (mut lo, mut hi) = (0.0, 8.0 * beta / h + 4.0);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut w_star = 0.5 * (lo + hi);
    // the bracket can only close on the boundary when the minimum sits there
    if f(0.0) <= f(w_star) {
        w_star = 0.0;
    }
    Ok(UniformOptimum { w_star, energy_per_edge: f(w_star) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::rayleigh_quotient_quadrature;

    #[test]
    fn zero_weights_give_uniform_state_energy() {
        let jc = JastrowChain::uniform(2, 5.0, 1.0, 0.0).unwrap();
        assert_eq!(jastrow_energy(&jc), 2.0);
        let jc = JastrowChain::new(4, 3.0, vec![1.0, 0.5, 2.0], vec![0.0; 3]).unwrap();
        assert_eq!(jastrow_energy(&jc), 7.0);
    }

    #[test]
    fn optimal_energy_for_reference_couplings() {
        let opt = optimize_uniform_weight(5.0, 1.0).unwrap();
        assert!((opt.energy_per_edge - 1.62718).abs() < 1e-4, "{opt:?}");
        // stationarity at the optimum
        let d = 1e-4;
        let slope = (edge_energy(5.0, 1.0, opt.w_star + d) - edge_energy(5.0, 1.0, opt.w_star - d)) / (2.0 * d);
        assert!(slope.abs() < 1e-6, "slope {slope}");
    }

    #[test]
    fn decoupled_limit() {
        let opt = optimize_uniform_weight(5.0, 0.0).unwrap();
        assert_eq!(opt.w_star, 0.0);
        assert_eq!(opt.energy_per_edge, 0.0);
    }

    #[test]
    fn matches_quadrature_oracle() {
        let g = RotorGraph::new(2, vec![(0, 1, 1.0)], vec![5.0; 2]).unwrap();
        let w = 0.5;
        let closed = jastrow_energy(&JastrowChain::from_graph(&g, vec![w]).unwrap());
        let quad = rayleigh_quotient_quadrature(&g, |t| w * (t[0] - t[1]).cos(), 400).unwrap();
        assert!((closed - quad).abs() < 1e-4, "{closed} vs {quad}");
    }

    #[test]
    fn additive_over_edges() {
        for w in [0.1, 0.8, 1.7] {
            let e = |n| jastrow_energy(&JastrowChain::uniform(n, 5.0, 1.0, w).unwrap());
            let step = e(3) - e(2);
            assert!((e(6) - e(5) - step).abs() < 1e-12);
            assert!((step - edge_energy(5.0, 1.0, w)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(JastrowChain::uniform(1, 5.0, 1.0, 0.0).is_err());
        assert!(JastrowChain::uniform(3, 0.0, 1.0, 0.0).is_err());
        assert!(JastrowChain::new(3, 1.0, vec![1.0], vec![0.0, 0.0]).is_err());
        let ring = RotorGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], vec![5.0; 3]).unwrap();
        assert!(JastrowChain::from_graph(&ring, vec![0.0; 2]).is_err());
        assert!(optimize_uniform_weight(-1.0, 1.0).is_err());
    }
}
