mod common;

use common::*;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rotor_core::fourier::{
    apply_hamiltonian, cg_solve, inverse_power_iteration, solver_shift, EigSettings, FourierHamiltonian, FourierState,
};
use rotor_core::harness::{generate_graph, GraphSpec};
use rotor_core::{rayleigh_quotient_quadrature, RotorGraph};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn mixed_sign_graph(n: usize, seed: u64) -> RotorGraph {
    let mut r = rng(seed);
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (i, j, r.random_range(-2.0..2.0)));
    RotorGraph::new(n, edges.collect(), vec![3.0; n]).unwrap()
}

fn dense_matrix(op: &FourierHamiltonian) -> DMatrix<f64> {
    let len = op.len();
    let mut m = DMatrix::zeros(len, len);
    let mut unit = vec![0.0; len];
    let mut col = vec![0.0; len];
    for k in 0..len {
        unit[k] = 1.0;
        op.apply_into(&unit, &mut col);
        m.column_mut(k).copy_from_slice(&col);
        unit[k] = 0.0;
    }
    m
}

#[test]
fn matrix_free_operator_matches_dense_assembly() {
    let cases: Vec<(RotorGraph, Vec<usize>)> = vec![
        (chain(2), vec![1, 3, 12, 49]),
        (chain(3), vec![1, 2, 5, 10]),
        (chain(4), vec![1, 2, 4]),
        (chain(5), vec![1, 2]),
        (generate_graph(&GraphSpec::grid(2, 2)).unwrap(), vec![1, 3, 4]),
        (generate_graph(&GraphSpec::complete(4)).unwrap(), vec![2, 4]),
        (mixed_sign_graph(3, 9), vec![2, 6]),
    ];
    for (g, omegas) in cases {
        for w in omegas {
            let psi = random_state(g.n(), w, w as u64);
            let fast = apply_hamiltonian(&g, &psi).unwrap();
            let err = max_abs_diff(fast.coeffs(), &dense_apply(&g, &psi));
            assert!(err < 1e-13, "n={} w={w}: {err:e}", g.n());
        }
    }
}

#[test]
fn truncated_operator_is_symmetric() {
    for g in [chain(3), mixed_sign_graph(3, 4), generate_graph(&GraphSpec::complete(4)).unwrap()] {
        let op = FourierHamiltonian::new(&g, 2).unwrap();
        let m = dense_matrix(&op);
        assert!((&m - m.transpose()).amax() == 0.0);
    }
}

#[test]
fn preconditioner_reduces_condition_number() {
    for (g, w) in [(chain(2), 8), (chain(3), 3), (generate_graph(&GraphSpec::complete(4)).unwrap(), 2)] {
        let op = FourierHamiltonian::new(&g, w).unwrap();
        let mu = solver_shift(&g);
        let mut a = dense_matrix(&op);
        for k in 0..op.len() {
            a[(k, k)] -= mu;
        }
        let m = op.preconditioner_sqrt(mu).unwrap();
        let scaled = DMatrix::from_fn(op.len(), op.len(), |i, j| a[(i, j)] / (m[i] * m[j]));
        let cond = |mat: DMatrix<f64>| {
            let e = SymmetricEigen::new(mat).eigenvalues;
            assert!(e.min() > 0.0);
            e.max() / e.min()
        };
        let (before, after) = (cond(a), cond(scaled));
        assert!(after < before, "{after} >= {before}");
        assert!(after < 10.0, "preconditioned condition number {after}");
    }
}

#[test]
fn cg_solution_satisfies_shifted_system() {
    let g = chain(3);
    let mu = solver_shift(&g);
    let rhs = random_state(3, 5, 1);
    let out = cg_solve(&g, mu, &rhs, 1e-12, 1000).unwrap();
    let mut lhs = apply_hamiltonian(&g, &out.solution).unwrap();
    for (l, x) in lhs.coeffs_mut().iter_mut().zip(out.solution.coeffs()) {
        *l -= mu * x;
    }
    let resid: f64 = lhs.coeffs().iter().zip(rhs.coeffs()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    assert!(resid / rhs.norm() < 1e-12);
    assert!(out.residual < 1e-12);
}

#[test]
fn edgeless_cg_converges_in_one_step() {
    let g = RotorGraph::new(3, vec![], vec![5.0; 3]).unwrap();
    let out = cg_solve(&g, solver_shift(&g), &random_state(3, 4, 2), 1e-12, 100).unwrap();
    assert_eq!(out.iterations, 1);
}

#[test]
fn edgeless_ground_energy_is_zero() {
    let g = RotorGraph::new(2, vec![], vec![5.0; 2]).unwrap();
    let eig = inverse_power_iteration(&g, &EigSettings::default()).unwrap();
    assert!(eig.lambda_min.abs() < 1e-12);
    assert!((eig.ground_state.get(&[0, 0]).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn spectral_energy_matches_dense_diagonalization() {
    let g = chain(2);
    let op = FourierHamiltonian::new(&g, 6).unwrap();
    let exact = SymmetricEigen::new(dense_matrix(&op)).eigenvalues.min();
    let eig = inverse_power_iteration(&g, &EigSettings { omega_max: 6, ..Default::default() }).unwrap();
    assert!((eig.lambda_min - exact).abs() < 1e-10, "{} vs {exact}", eig.lambda_min);
}

#[test]
fn spectral_energy_agrees_with_grid_quadrature() {
    // The Rayleigh quotient of the spectral ground state evaluated on a grid.
    let g = chain(2);
    let eig = inverse_power_iteration(&g, &EigSettings { omega_max: 8, ..Default::default() }).unwrap();
    let state = eig.ground_state.clone();
    let psi = move |theta: &[f64]| -> f64 {
        let mut acc = 0.0;
        for k in 0..state.len() {
            let w = state.frequency_at(k);
            acc += state.coeffs()[k] * (w[0] as f64 * theta[0] + w[1] as f64 * theta[1]).cos();
        }
        acc
    };
    // the ground state has no nodes, so log|psi| is finite everywhere
    let r = rayleigh_quotient_quadrature(&g, |t| psi(t).ln(), 256).unwrap();
    assert!((r - eig.lambda_min).abs() < 2e-3, "{r} vs {}", eig.lambda_min);
}

#[test]
fn random_trial_states_respect_the_lower_bound() {
    let mut r = rng(77);
    for _ in 0..50 {
        let n = r.random_range(1..=3);
        let g = random_graph(n, &mut r);
        let log_psi = smooth_log_psi(n, &mut r);
        let grid = if n == 3 { 24 } else { 48 };
        let q = rayleigh_quotient_quadrature(&g, log_psi, grid).unwrap();
        assert!(q >= g.eigenvalue_lower_bound(), "{q} < {}", g.eigenvalue_lower_bound());
    }
}

#[test]
fn state_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("rotor-state-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("psi.bin");
    let s = random_state(3, 2, 8);
    s.save(&path).unwrap();
    assert_eq!(FourierState::load(&path).unwrap(), s);
    std::fs::remove_dir_all(&dir).unwrap();
}
