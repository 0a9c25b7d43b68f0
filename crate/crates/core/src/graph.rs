//! Interaction graphs, rotor configurations and the classical part of the
//! rotor Hamiltonian.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::wrap_angle;

/// A weighted edge `{i, j}` with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub beta: f64,
}

/// Vertex weights `h_i >= 0` and edge weights `beta_ij` on a finite simple
/// undirected graph. Together these fully determine the rotor Hamiltonian
///
/// ```text
/// H = -1/2 sum_i h_i d^2/dtheta_i^2 + sum_{ij} beta_ij (2 - 2 cos(theta_i - theta_j))
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct RotorGraph {
    n: usize,
    edges: Vec<Edge>,
    h: Vec<f64>,
}

/// On-disk layout: `{"n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]], "h": [5, 5, 5]}`.
#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    h: Vec<f64>,
}

impl RotorGraph {
    /// Validates and canonicalizes a graph. Edges may be given in either
    /// orientation; they are stored with `i < j`, sorted lexicographically.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>, h: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        if h.len() != n {
            return Err(Error::InvalidGraph(format!("expected {n} vertex weights, got {}", h.len())));
        }
        if let Some((idx, w)) = h.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidGraph(format!("vertex weight h[{idx}] = {w} must be finite and nonnegative")));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (a, b, beta) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) references a vertex outside [0, {n})")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if !beta.is_finite() {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has weight {beta}")));
            }
            canon.push(Edge { i: a.min(b), j: a.max(b), beta });
        }
        canon.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = canon.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", w[0].i, w[0].j)));
        }
        Ok(Self { n, edges: canon, h })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// The common vertex weight, if every `h_i` is identical.
    pub fn uniform_h(&self) -> Result<f64> {
        let first = self.h[0];
        match self.h.iter().enumerate().find(|(_, &v)| v != first) {
            Some((index, &value)) => Err(Error::NonUniformWeights { index, value, first }),
            None => Ok(first),
        }
    }

    /// `sum_ij beta_ij [2 - 2 cos(theta_i - theta_j)]`.
    pub fn potential_energy(&self, config: &RotorConfig) -> Result<f64> {
        self.check_config(config)?;
        let theta = config.angles();
        Ok(self.edges.iter().map(|e| e.beta * (2.0 - 2.0 * (theta[e.i] - theta[e.j]).cos())).sum())
    }

    /// Lower bound `-4 sum |beta_ij|` on every Rayleigh quotient of `H`.
    pub fn eigenvalue_lower_bound(&self) -> f64 {
        -4.0 * self.edges.iter().map(|e| e.beta.abs()).sum::<f64>()
    }

    /// `sum_ij beta_ij`.
    pub fn total_beta(&self) -> f64 {
        self.edges.iter().map(|e| e.beta).sum()
    }

    /// Connected-component label for every vertex, labels numbered in order
    /// of first appearance.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for e in &self.edges {
            let (ri, rj) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut labels = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut root_label = vec![usize::MAX; self.n];
        for (v, label) in labels.iter_mut().enumerate() {
            let r = find(&mut parent, v);
            if root_label[r] == usize::MAX {
                root_label[r] = next;
                next += 1;
            }
            *label = root_label[r];
        }
        labels
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    pub(crate) fn check_config(&self, config: &RotorConfig) -> Result<()> {
        if config.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: config.len() });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        Self::new(file.n, file.edges, file.h)
    }

    pub fn to_json(&self) -> String {
        let file =
            GraphFile { n: self.n, edges: self.edges.iter().map(|e| (e.i, e.j, e.beta)).collect(), h: self.h.clone() };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// One angle per rotor, each kept in `[-π, π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotorConfig {
    theta: Vec<f64>,
}

impl RotorConfig {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta: theta.into_iter().map(wrap_angle).collect() }
    }

    pub fn zeros(n: usize) -> Self {
        Self { theta: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    pub fn get(&self, j: usize) -> f64 {
        self.theta[j]
    }

    /// Sets rotor `j`, wrapping into `[-π, π)`.
    pub fn set(&mut self, j: usize, theta: f64) {
        self.theta[j] = wrap_angle(theta);
    }
}
