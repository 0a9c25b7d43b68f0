//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotor_core::fourier::FourierState;
use rotor_core::harness::{generate_graph, GraphSpec};
use rotor_core::vmc::local_energy;
use rotor_core::{wrap_angle, RbmCache, RbmParams, RotorConfig, RotorGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn chain(n: usize) -> RotorGraph {
    generate_graph(&GraphSpec::chain(n)).unwrap()
}

/// `|a - b| / max(|b|, 1)`: relative for large values, absolute near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn random_params(m: usize, n: usize, scale: f64, rng: &mut ChaCha8Rng) -> RbmParams {
    let flat = (0..RbmParams::param_count(m, n)).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
    RbmParams::from_flat(m, n, flat).unwrap()
}

pub fn random_angles(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-PI..PI)).collect()
}

/// Graph on `n` vertices with a random subset of edges, couplings in
/// `[-2, 2]` and on-site weights in `[0.5, 6]`.
pub fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> RotorGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < 0.7 {
                edges.push((i, j, rng.random_range(-2.0..2.0)));
            }
        }
    }
    let h = (0..n).map(|_| rng.random_range(0.5..6.0)).collect();
    RotorGraph::new(n, edges, h).unwrap()
}

pub fn log_psi_at(params: &RbmParams, theta: &[f64]) -> f64 {
    let cache = RbmCache::new(params, RotorConfig::new(theta.to_vec())).unwrap();
    params.log_psi(&cache).unwrap()
}

/// Central differences of `log psi` in every flat parameter.
pub fn fd_param_gradient(params: &RbmParams, theta: &[f64], step: f64) -> Vec<f64> {
    (0..params.len())
        .map(|k| {
            let mut plus = params.clone();
            plus.as_mut_slice()[k] += step;
            let mut minus = params.clone();
            minus.as_mut_slice()[k] -= step;
            (log_psi_at(&plus, theta) - log_psi_at(&minus, theta)) / (2.0 * step)
        })
        .collect()
}

/// First and second central differences of `log psi` in every angle.
pub fn fd_angle_derivatives(params: &RbmParams, theta: &[f64], step: f64) -> (Vec<f64>, Vec<f64>) {
    let center = log_psi_at(params, theta);
    (0..theta.len())
        .map(|j| {
            let mut plus = theta.to_vec();
            plus[j] += step;
            let mut minus = theta.to_vec();
            minus[j] -= step;
            let (lp, lm) = (log_psi_at(params, &plus), log_psi_at(params, &minus));
            ((lp - lm) / (2.0 * step), (lp - 2.0 * center + lm) / (step * step))
        })
        .unzip()
}

/// `(H psi) / psi` with the Laplacian of `psi = exp(log psi)` taken by
/// second differences.
pub fn fd_local_energy(graph: &RotorGraph, params: &RbmParams, theta: &[f64], step: f64) -> f64 {
    let center = log_psi_at(params, theta);
    let mut kinetic = 0.0;
    for j in 0..theta.len() {
        let mut plus = theta.to_vec();
        plus[j] += step;
        let mut minus = theta.to_vec();
        minus[j] -= step;
        let ratio = (log_psi_at(params, &plus) - center).exp_m1() + (log_psi_at(params, &minus) - center).exp_m1();
        kinetic += -0.5 * graph.h()[j] * ratio / (step * step);
    }
    kinetic + graph.potential_energy(&RotorConfig::new(theta.to_vec())).unwrap()
}

pub fn local_energy_at(graph: &RotorGraph, params: &RbmParams, theta: &[f64]) -> f64 {
    let cache = RbmCache::new(params, RotorConfig::new(theta.to_vec())).unwrap();
    local_energy(graph, params, &cache).unwrap()
}

/// Largest errors over `instances` random models with up to 4 rotors and
/// 8 hidden units: (parameter gradient, first and second angle
/// derivatives, local energy).
pub fn derivative_oracle_errors(instances: usize, seed: u64) -> [f64; 3] {
    let mut r = rng(seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..instances {
        let n = r.random_range(1..=4);
        let m = r.random_range(1..=8);
        let params = random_params(m, n, 0.8, &mut r);
        let theta = random_angles(n, &mut r);
        let graph = random_graph(n, &mut r);
        let cache = RbmCache::new(&params, RotorConfig::new(theta.clone())).unwrap();

        let grad = params.param_gradient(&cache);
        for (a, b) in fd_param_gradient(&params, &theta, 1e-5).iter().zip(&grad) {
            worst[0] = worst[0].max(rel_err(*a, *b));
        }
        let (first, second) = params.angle_derivatives(&cache);
        let (fd1, _) = fd_angle_derivatives(&params, &theta, 1e-5);
        let (_, fd2) = fd_angle_derivatives(&params, &theta, 1e-3);
        for j in 0..n {
            worst[1] = worst[1].max(rel_err(fd1[j], first[j])).max(rel_err(fd2[j], second[j]));
        }
        let exact = local_energy(&graph, &params, &cache).unwrap();
        worst[2] = worst[2].max(rel_err(fd_local_energy(&graph, &params, &theta, 1e-3), exact));
    }
    worst
}

/// `H psi` from the matrix elements, assembled one row at a time by
/// scanning every column: diagonal `(h/2)|w|^2 + 2 sum beta`, and `-beta`
/// between frequencies differing by `+-(e_i - e_j)` for each edge.
pub fn dense_apply(graph: &RotorGraph, psi: &FourierState) -> Vec<f64> {
    let n = graph.n();
    let h = graph.h()[0];
    let len = psi.len();
    let freqs: Vec<Vec<i64>> = (0..len).map(|k| psi.frequency_at(k)).collect();
    let beta_sum: f64 = graph.edges().iter().map(|e| e.beta).sum();
    let mut out = vec![0.0; len];
    let mut diff = vec![0i64; n];
    for (row, w) in freqs.iter().enumerate() {
        let mut acc = 0.0;
        for (col, v) in freqs.iter().enumerate() {
            for d in 0..n {
                diff[d] = v[d] - w[d];
            }
            let entry = if diff.iter().all(|&d| d == 0) {
                0.5 * h * w.iter().map(|&x| (x * x) as f64).sum::<f64>() + 2.0 * beta_sum
            } else {
                let mut e = 0.0;
                for edge in graph.edges() {
                    let hop = diff.iter().enumerate().all(|(d, &x)| {
                        if d == edge.i {
                            x.abs() == 1
                        } else if d == edge.j {
                            x == -diff[edge.i]
                        } else {
                            x == 0
                        }
                    });
                    if hop {
                        e -= edge.beta;
                    }
                }
                e
            };
            if entry != 0.0 {
                acc += entry * psi.coeffs()[col];
            }
        }
        out[row] = acc;
    }
    out
}

pub fn random_state(n: usize, omega_max: usize, seed: u64) -> FourierState {
    let mut r = rng(seed);
    let len = FourierState::checked_len(n, omega_max).unwrap();
    let mut s = FourierState::from_vec(n, omega_max, (0..len).map(|_| r.random::<f64>() - 0.5).collect()).unwrap();
    s.normalize();
    s
}

/// Smooth random trial state on `n` rotors: a handful of low-frequency
/// cosines of single angles and of pair differences.
pub fn smooth_log_psi(n: usize, rng: &mut ChaCha8Rng) -> impl Fn(&[f64]) -> f64 {
    let mut terms = Vec::new();
    for _ in 0..6 {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let k = rng.random_range(1..=2) as f64;
        terms.push((i, j, k, rng.random_range(-1.5..1.5), rng.random_range(-PI..PI)));
    }
    move |theta: &[f64]| {
        terms
            .iter()
            .map(|&(i, j, k, amp, phase)| {
                let arg = if i == j { theta[i] } else { theta[i] - theta[j] };
                amp * (k * arg + phase).cos()
            })
            .sum()
    }
}

/// CDF of `wrap(theta_1 - theta_2)` under `|psi|^2` for a two-rotor model,
/// tabulated on `points + 1` equally spaced values from `-π` to `π`. The
/// inner integral uses the periodic trapezoid rule, the outer a cumulative
/// trapezoid.
pub fn difference_cdf(params: &RbmParams, points: usize, inner: usize) -> Vec<f64> {
    let density: Vec<f64> = (0..=points)
        .map(|k| {
            let phi = -PI + TAU * k as f64 / points as f64;
            (0..inner)
                .map(|l| {
                    let t2 = -PI + TAU * l as f64 / inner as f64;
                    (2.0 * log_psi_at(params, &[t2 + phi, t2])).exp()
                })
                .sum::<f64>()
        })
        .collect();
    let mut cdf = vec![0.0; points + 1];
    for k in 1..=points {
        cdf[k] = cdf[k - 1] + 0.5 * (density[k - 1] + density[k]);
    }
    let total = cdf[points];
    cdf.iter_mut().for_each(|c| *c /= total);
    cdf
}

/// Kolmogorov-Smirnov distance between the wrapped `samples` and a
/// tabulated CDF on `[-π, π]`, linearly interpolated.
pub fn ks_distance(samples: &mut [f64], cdf: &[f64]) -> f64 {
    samples.iter_mut().for_each(|x| *x = wrap_angle(*x));
    samples.sort_by(f64::total_cmp);
    let points = cdf.len() - 1;
    let eval = |x: f64| {
        let t = (x + PI) / TAU * points as f64;
        let k = (t.floor() as usize).min(points - 1);
        let frac = t - k as f64;
        cdf[k] * (1.0 - frac) + cdf[k + 1] * frac
    };
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = eval(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
