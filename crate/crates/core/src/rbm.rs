//! Rotor restricted Boltzmann machine on the circle.
//!
//! Integrating out `m` hidden rotors leaves the log-amplitude
//!
//! ```text
//! log psi(theta) = sum_j <c_j, x_j> + sum_i log(2 pi I_0(|y_i|)),   y_i = sum_j a_ij x_j + b_i
//! ```
//!
//! where `x_j = (cos theta_j, sin theta_j)`. Parameters live in one flat
//! vector ordered as all of `a` (row-major, `m x n`), then `b` (`m x 2`),
//! then `c` (`n x 2`).

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bessel;
use crate::error::{Error, Result};
use crate::geometry::wrap_angle;
use crate::graph::RotorConfig;

/// Standard deviation of the default Gaussian initialization.
pub const INIT_STD: f64 = 0.01;

/// Variational parameters `(a, b, c)` of the rotor RBM.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmParams {
    m: usize,
    n: usize,
    flat: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    m: usize,
    n: usize,
    params: Vec<f64>,
}

impl RbmParams {
    /// Number of parameters for `m` hidden and `n` visible rotors.
    pub fn param_count(m: usize, n: usize) -> usize {
        m * n + 2 * m + 2 * n
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, n, flat: vec![0.0; Self::param_count(m, n)] }
    }

    /// I.i.d. zero-mean Gaussian entries with standard deviation `std`.
    pub fn random(m: usize, n: usize, std: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, std).expect("standard deviation must be finite and >= 0");
        let flat = (0..Self::param_count(m, n)).map(|_| normal.sample(&mut rng)).collect();
        Self { m, n, flat }
    }

    pub fn from_flat(m: usize, n: usize, flat: Vec<f64>) -> Result<Self> {
        let expected = Self::param_count(m, n);
        if flat.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: flat.len() });
        }
        let params = Self { m, n, flat };
        params.check_finite()?;
        Ok(params)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.flat.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::NonFinite(format!("rbm parameter {k}"))),
            None => Ok(()),
        }
    }

    pub fn hidden(&self) -> usize {
        self.m
    }

    pub fn visible(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.flat
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.flat
    }

    fn b_offset(&self) -> usize {
        self.m * self.n
    }

    fn c_offset(&self) -> usize {
        self.m * self.n + 2 * self.m
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.flat[i * self.n + j]
    }

    pub fn set_a(&mut self, i: usize, j: usize, value: f64) {
        self.flat[i * self.n + j] = value;
    }

    #[inline]
    pub fn b(&self, i: usize) -> [f64; 2] {
        let k = self.b_offset() + 2 * i;
        [self.flat[k], self.flat[k + 1]]
    }

    pub fn set_b(&mut self, i: usize, value: [f64; 2]) {
        let k = self.b_offset() + 2 * i;
        self.flat[k..k + 2].copy_from_slice(&value);
    }

    #[inline]
    pub fn c(&self, j: usize) -> [f64; 2] {
        let k = self.c_offset() + 2 * j;
        [self.flat[k], self.flat[k + 1]]
    }

    pub fn set_c(&mut self, j: usize, value: [f64; 2]) {
        let k = self.c_offset() + 2 * j;
        self.flat[k..k + 2].copy_from_slice(&value);
    }

    /// `log psi` for the configuration held by `cache`.
    pub fn log_psi(&self, cache: &RbmCache) -> Result<f64> {
        let visible: f64 = (0..self.n).map(|j| dot(self.c(j), cache.x[j])).sum();
        let hidden: f64 = cache.log_i0.iter().sum::<f64>() + self.m as f64 * TAU.ln();
        let value = visible + hidden;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite("log_psi".into()))
        }
    }

    /// Writes `d log psi / d p_k` for every flat parameter index into `out`.
    pub fn param_gradient_into(&self, cache: &RbmCache, out: &mut [f64]) {
        assert_eq!(out.len(), self.len());
        let (n, b_off, c_off) = (self.n, self.b_offset(), self.c_offset());
        for i in 0..self.m {
            // g(r)/r -> 1/2 at the origin, where y_i itself vanishes
            let scale = bessel::ratio_over_x(cache.r[i]);
            let y = cache.y[i];
            for j in 0..n {
                out[i * n + j] = scale * dot(y, cache.x[j]);
            }
            out[b_off + 2 * i] = scale * y[0];
            out[b_off + 2 * i + 1] = scale * y[1];
        }
        for j in 0..n {
            out[c_off + 2 * j] = cache.x[j][0];
            out[c_off + 2 * j + 1] = cache.x[j][1];
        }
    }

    pub fn param_gradient(&self, cache: &RbmCache) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.param_gradient_into(cache, &mut out);
        out
    }

    /// First and second derivatives of `log psi` with respect to each angle.
    pub fn angle_derivatives(&self, cache: &RbmCache) -> (Vec<f64>, Vec<f64>) {
        let mut first = vec![0.0; self.n];
        let mut second = vec![0.0; self.n];
        self.angle_derivatives_into(cache, &mut first, &mut second);
        (first, second)
    }

    pub fn angle_derivatives_into(&self, cache: &RbmCache, first: &mut [f64], second: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            let x = cache.x[j];
            let t = [-x[1], x[0]];
            let c = self.c(j);
            first[j] = dot(c, t);
            second[j] = -dot(c, x);
        }
        for i in 0..self.m {
            let r = cache.r[i];
            let (g, g_over_r, g_prime) = if r < bessel::SMALL_ARG {
                (0.0, 0.5, 0.5)
            } else {
                let (_, g, g_over_r, g_prime) = bessel::kernels(r);
                (g, g_over_r, g_prime)
            };
            // unit direction of y_i; taken as zero at the removable singularity
            let y_hat = if r < bessel::SMALL_ARG { [0.0, 0.0] } else { [cache.y[i][0] / r, cache.y[i][1] / r] };
            for j in 0..n {
                let a = self.a(i, j);
                if a == 0.0 {
                    continue;
                }
                let x = cache.x[j];
                let t = [-x[1], x[0]];
                let yt = dot(y_hat, t);
                let yx = dot(y_hat, x);
                first[j] += g * a * yt;
                second[j] += g_prime * a * a * yt * yt + g_over_r * a * a * (1.0 - yt * yt) - g * a * yx;
            }
        }
    }

    /// Moves rotor `j` to `theta_new`, touching only the `m` hidden
    /// pre-activations.
    pub fn update_rotor(&self, cache: &mut RbmCache, j: usize, theta_new: f64) -> Result<()> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange { index: j, len: self.n });
        }
        let mut proposal = Proposal::with_capacity(self.m);
        self.propose(cache, j, theta_new, &mut proposal);
        cache.commit(&proposal);
        Ok(())
    }

    /// Evaluates the effect of moving rotor `j` to `theta_new` without
    /// touching the cache, returning `log psi(new) - log psi(old)`.
    pub fn propose(&self, cache: &RbmCache, j: usize, theta_new: f64, proposal: &mut Proposal) -> f64 {
        let theta_new = wrap_angle(theta_new);
        let (s, c) = theta_new.sin_cos();
        let x_new = [c, s];
        let x_old = cache.x[j];
        let dx = [x_new[0] - x_old[0], x_new[1] - x_old[1]];
        proposal.j = j;
        proposal.theta = theta_new;
        proposal.x = x_new;
        proposal.y.clear();
        proposal.r.clear();
        proposal.log_i0.clear();
        let mut delta = dot(self.c(j), dx);
        for i in 0..self.m {
            let a = self.a(i, j);
            let y_old = cache.y[i];
            let y = [y_old[0] + a * dx[0], y_old[1] + a * dx[1]];
            let r = y[0].hypot(y[1]);
            let l = bessel::log_i0(r);
            delta += l - cache.log_i0[i];
            proposal.y.push(y);
            proposal.r.push(r);
            proposal.log_i0.push(l);
        }
        proposal.delta_log_psi = delta;
        delta
    }

    pub fn to_checkpoint_json(&self) -> String {
        let ck = Checkpoint { m: self.m, n: self.n, params: self.flat.clone() };
        serde_json::to_string(&ck).expect("checkpoint serialization cannot fail")
    }

    pub fn from_checkpoint_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        Self::from_flat(ck.m, ck.n, ck.params)
    }

    pub fn save_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_checkpoint_json())?;
        Ok(())
    }

    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint_json(&fs::read_to_string(path)?)
    }
}

#[inline]
fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

/// Per-configuration quantities that make single-rotor moves `O(m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmCache {
    theta: RotorConfig,
    x: Vec<[f64; 2]>,
    y: Vec<[f64; 2]>,
    r: Vec<f64>,
    log_i0: Vec<f64>,
}

impl RbmCache {
    pub fn new(params: &RbmParams, config: RotorConfig) -> Result<Self> {
        if config.len() != params.n {
            return Err(Error::DimensionMismatch { expected: params.n, actual: config.len() });
        }
        let mut cache = Self {
            theta: config,
            x: Vec::with_capacity(params.n),
            y: vec![[0.0; 2]; params.m],
            r: vec![0.0; params.m],
            log_i0: vec![0.0; params.m],
        };
        cache.rebuild(params);
        Ok(cache)
    }

    /// Recomputes everything from the stored angles in `O(mn)`.
    pub fn rebuild(&mut self, params: &RbmParams) {
        self.x.clear();
        self.x.extend(self.theta.angles().iter().map(|t| {
            let (s, c) = t.sin_cos();
            [c, s]
        }));
        for i in 0..params.m {
            let mut y = params.b(i);
            for (j, x) in self.x.iter().enumerate() {
                let a = params.a(i, j);
                y[0] += a * x[0];
                y[1] += a * x[1];
            }
            self.y[i] = y;
            self.r[i] = y[0].hypot(y[1]);
            self.log_i0[i] = bessel::log_i0(self.r[i]);
        }
    }

    pub fn commit(&mut self, proposal: &Proposal) {
        self.theta.set(proposal.j, proposal.theta);
        self.x[proposal.j] = proposal.x;
        self.y.copy_from_slice(&proposal.y);
        self.r.copy_from_slice(&proposal.r);
        self.log_i0.copy_from_slice(&proposal.log_i0);
    }

    pub fn config(&self) -> &RotorConfig {
        &self.theta
    }

    pub fn x(&self) -> &[[f64; 2]] {
        &self.x
    }

    pub fn y(&self) -> &[[f64; 2]] {
        &self.y
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Largest absolute difference between the `x`, `y` and `r` arrays.
    pub fn max_deviation(&self, other: &RbmCache) -> f64 {
        let pairs = self.x.iter().zip(&other.x).chain(self.y.iter().zip(&other.y));
        let vec_dev = pairs.map(|(u, v)| (u[0] - v[0]).abs().max((u[1] - v[1]).abs())).fold(0.0, f64::max);
        let r_dev = self.r.iter().zip(&other.r).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        vec_dev.max(r_dev)
    }
}

/// A pending single-rotor move; reused across proposals to avoid allocation.
#[derive(Clone, Debug, Default)]
pub struct Proposal {
    j: usize,
    theta: f64,
    x: [f64; 2],
    y: Vec<[f64; 2]>,
    r: Vec<f64>,
    log_i0: Vec<f64>,
    delta_log_psi: f64,
}

impl Proposal {
    pub fn with_capacity(m: usize) -> Self {
        Self { y: Vec::with_capacity(m), r: Vec::with_capacity(m), log_i0: Vec::with_capacity(m), ..Self::default() }
    }

    pub fn delta_log_psi(&self) -> f64 {
        self.delta_log_psi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}
