use log::warn;

use crate::error::{Error, Result};
use crate::fourier::state::FourierState;
use crate::graph::RotorGraph;

#[derive(Clone, Copy, Debug)]
struct EdgeStencil {
    i: usize,
    j: usize,
    beta: f64,
    /// flat offset of `omega + e_i - e_j`
    offset: usize,
}

/// Matrix-free truncated Fourier Hamiltonian
///
/// ```text
/// (H psi)(w) = (h/2)|w|^2 psi(w) + sum_ij beta_ij [2 psi(w) - psi(w + e_i - e_j) - psi(w - e_i + e_j)]
/// ```
///
/// with reads outside the frequency cube treated as zero.
#[derive(Clone, Debug)]
pub struct FourierHamiltonian {
    n: usize,
    omega_max: usize,
    h: f64,
    stencils: Vec<EdgeStencil>,
    /// `(h/2)|w|^2 + 2 sum beta`
    diagonal: Vec<f64>,
}

impl FourierHamiltonian {
    pub fn new(graph: &RotorGraph, omega_max: usize) -> Result<Self> {
        let h = graph.uniform_h()?;
        let n = graph.n();
        let len = FourierState::checked_len(n, omega_max)?;
        let side = 2 * omega_max + 1;
        let strides: Vec<usize> = (0..n).map(|i| side.pow((n - 1 - i) as u32)).collect();
        let stencils = graph
            .edges()
            .iter()
            .map(|e| EdgeStencil { i: e.i, j: e.j, beta: e.beta, offset: strides[e.i] - strides[e.j] })
            .collect();

        let two_beta = 2.0 * graph.total_beta();
        let mut diagonal = Vec::with_capacity(len);
        let mut coords = vec![0usize; n];
        for _ in 0..len {
            let w2: f64 = coords
                .iter()
                .map(|&c| {
                    let w = c as f64 - omega_max as f64;
                    w * w
                })
                .sum();
            diagonal.push(0.5 * h * w2 + two_beta);
            advance(&mut coords, side);
        }
        Ok(Self { n, omega_max, h, stencils, diagonal })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega_max(&self) -> usize {
        self.omega_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `out = (H - shift I) psi`.
    pub fn apply_shifted_into(&self, psi: &[f64], shift: f64, out: &mut [f64]) {
        assert_eq!(psi.len(), self.len());
        assert_eq!(out.len(), self.len());
        let side = 2 * self.omega_max + 1;
        let top = side - 1;
        let mut coords = vec![0usize; self.n];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = (self.diagonal[k] - shift) * psi[k];
            for s in &self.stencils {
                let (ci, cj) = (coords[s.i], coords[s.j]);
                // w + e_i - e_j
                if ci < top && cj > 0 {
                    acc -= s.beta * psi[k + s.offset];
                }
                // w - e_i + e_j
                if ci > 0 && cj < top {
                    acc -= s.beta * psi[k - s.offset];
                }
            }
            *slot = acc;
            advance(&mut coords, side);
        }
    }

    pub fn apply_into(&self, psi: &[f64], out: &mut [f64]) {
        self.apply_shifted_into(psi, 0.0, out);
    }

    pub fn apply(&self, psi: &FourierState) -> Result<FourierState> {
        self.check_state(psi)?;
        let mut out = FourierState::zeros(self.n, self.omega_max)?;
        self.apply_into(psi.coeffs(), out.coeffs_mut());
        Ok(out)
    }

    /// Square roots of the diagonal preconditioner `(h/2)|w|^2 + 2 sum beta - shift`,
    /// or an error naming the first nonpositive entry.
    pub fn preconditioner_sqrt(&self, shift: f64) -> Result<Vec<f64>> {
        self.diagonal
            .iter()
            .map(|&d| {
                let v = d - shift;
                if v > 0.0 {
                    Ok(v.sqrt())
                } else {
                    Err(Error::NonPositiveDiagonal(v))
                }
            })
            .collect()
    }

    /// Like [`preconditioner_sqrt`](Self::preconditioner_sqrt), but falls back
    /// to the identity with a warning when the diagonal is not positive.
    pub fn preconditioner_or_identity(&self, shift: f64) -> Vec<f64> {
        match self.preconditioner_sqrt(shift) {
            Ok(m) => m,
            Err(e) => {
                warn!("{e}; running conjugate gradient without preconditioning");
                vec![1.0; self.len()]
            }
        }
    }

    pub(crate) fn check_state(&self, psi: &FourierState) -> Result<()> {
        if psi.n() != self.n || psi.omega_max() != self.omega_max {
            return Err(Error::DimensionMismatch { expected: self.len(), actual: psi.len() });
        }
        Ok(())
    }
}

/// Row-major odometer step over `[0, side)^n`.
#[inline]
pub(crate) fn advance(coords: &mut [usize], side: usize) {
    for c in coords.iter_mut().rev() {
        *c += 1;
        if *c < side {
            return;
        }
        *c = 0;
    }
}

/// `H psi` for a graph with uniform vertex weight.
pub fn apply_hamiltonian(graph: &RotorGraph, psi: &FourierState) -> Result<FourierState> {
    FourierHamiltonian::new(graph, psi.omega_max())?.apply(psi)
}

/// Divides every coefficient by `((h/2)|w|^2 + 2 sum beta - mu)^{1/2}`.
pub fn apply_preconditioner_inverse(graph: &RotorGraph, mu: f64, psi: &FourierState) -> Result<FourierState> {
    let op = FourierHamiltonian::new(graph, psi.omega_max())?;
    op.check_state(psi)?;
    let m = op.preconditioner_sqrt(mu)?;
    let mut out = psi.clone();
    out.coeffs_mut().iter_mut().zip(&m).for_each(|(c, d)| *c /= d);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> RotorGraph {
        RotorGraph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0)).collect(), vec![5.0; n]).unwrap()
    }

    #[test]
    fn indicator_at_origin() {
        let psi = FourierState::indicator(2, 3, &[0, 0]).unwrap();
        let out = apply_hamiltonian(&chain(2), &psi).unwrap();
        for k in 0..out.len() {
            let w = out.frequency_at(k);
            let expected = match (w[0], w[1]) {
                (0, 0) => 2.0,
                (1, -1) | (-1, 1) => -1.0,
                _ => 0.0,
            };
            assert_eq!(out.coeffs()[k], expected, "at {w:?}");
        }
    }

    #[test]
    fn indicator_at_corner_drops_outside_neighbor() {
        let wm = 3i64;
        let psi = FourierState::indicator(2, 3, &[wm, -wm]).unwrap();
        let out = apply_hamiltonian(&chain(2), &psi).unwrap();
        let diag = 2.5 * (2 * wm * wm) as f64 + 2.0;
        assert_eq!(out.get(&[wm, -wm]).unwrap(), diag);
        // only the inward neighbor receives weight
        assert_eq!(out.get(&[wm - 1, -wm + 1]).unwrap(), -1.0);
        let nonzero = out.coeffs().iter().filter(|c| **c != 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn rejects_non_uniform_weights() {
        let g = RotorGraph::new(2, vec![(0, 1, 1.0)], vec![5.0, 4.0]).unwrap();
        assert!(matches!(FourierHamiltonian::new(&g, 2), Err(Error::NonUniformWeights { .. })));
    }

    #[test]
    fn preconditioner_examples() {
        let g = chain(2);
        let psi = FourierState::indicator(2, 2, &[0, 0]).unwrap();
        let once = apply_preconditioner_inverse(&g, -4.0, &psi).unwrap();
        assert!((once.get(&[0, 0]).unwrap() - 1.0 / 6f64.sqrt()).abs() < 1e-15);

        let ramp: Vec<f64> = (0..25).map(|k| k as f64 - 7.0).collect();
        let psi = FourierState::from_vec(2, 2, ramp).unwrap();
        let twice =
            apply_preconditioner_inverse(&g, -4.0, &apply_preconditioner_inverse(&g, -4.0, &psi).unwrap()).unwrap();
        let op = FourierHamiltonian::new(&g, 2).unwrap();
        for k in 0..25 {
            let expected = psi.coeffs()[k] / (op.diagonal()[k] + 4.0);
            assert!((twice.coeffs()[k] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn preconditioner_rejects_nonpositive_diagonal() {
        let g = RotorGraph::new(2, vec![], vec![5.0; 2]).unwrap();
        let psi = FourierState::indicator(2, 1, &[0, 0]).unwrap();
        assert!(matches!(apply_preconditioner_inverse(&g, 0.0, &psi), Err(Error::NonPositiveDiagonal(_))));
    }
}
