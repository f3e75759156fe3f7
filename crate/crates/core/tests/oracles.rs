mod common;

use chiral_vqe::entanglement::{concurrence, concurrence_matrix, magnetization_texture};
use chiral_vqe::exact::{delta_metric, ground_space_projector, lowest_eigenpairs, lowest_eigenpairs_with, Method};
use chiral_vqe::pauli::{build_chain_hamiltonian, ChainParams};
use chiral_vqe::soliton::{
    analytic_texture, elliptic_e, elliptic_k, jacobi_am, period_energy, soliton_solution, solve_kappa, ContinuumParams,
    KappaOutcome,
};
use chiral_vqe::vqe::{run_layer_sweep, run_vqe, Reference};
use chiral_vqe::{AnsatzSpec, DensityMatrix2Q, GradientMode, ObjectiveKind, OptimizerConfig, StateVector};
use common::*;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[test]
fn complete_integrals_match_quadrature() {
    for kappa in [0.0, 0.1, 0.256, 0.5, 0.8, 0.95, 0.999] {
        assert!((elliptic_k(kappa).unwrap() - quad_k(kappa)).abs() < 1e-11, "K({kappa})");
        assert!((elliptic_e(kappa).unwrap() - quad_e(kappa)).abs() < 1e-11, "E({kappa})");
    }
    assert!((quad_k(0.8) - 1.9953028).abs() < 5e-8);
    assert!((quad_e(0.8) - 1.2763499).abs() < 5e-8);
    assert!((quad_k(0.256) - 1.5975264).abs() < 5e-7);
}

#[test]
fn amplitude_special_points() {
    for kappa in [0.0, 0.3, 0.9] {
        let k = elliptic_k(kappa).unwrap();
        assert!((jacobi_am(k, kappa).unwrap() - PI / 2.0).abs() < 1e-12);
        assert!((jacobi_am(-k, kappa).unwrap() + PI / 2.0).abs() < 1e-12);
        // sn(u) = sin am(u) against F⁻¹ by quadrature at a generic point.
        let phi = 1.1;
        assert!((jacobi_am(quad_f(phi, kappa), kappa).unwrap().sin() - phi.sin()).abs() < 1e-12);
    }
    assert_eq!(jacobi_am(0.7, 0.0).unwrap(), 0.7);
}

#[test]
fn soliton_root_is_stationary_point_of_period_energy() {
    let p = ContinuumParams::new(1.0, 0.63, 3.36e-3);
    let KappaOutcome::Soliton(kappa) = solve_kappa(&p).unwrap() else { panic!("expected soliton") };
    let residual = PI * kappa * p.k0() - 4.0 * p.m() * elliptic_e(kappa).unwrap();
    assert!(residual.abs() < 1e-12);
    let h = 1e-6;
    let slope = (period_energy(&p, kappa + h).unwrap() - period_energy(&p, kappa - h).unwrap()) / (2.0 * h);
    assert!(slope.abs() < 1e-8, "dε/dκ = {slope}");
    // Minimum, not maximum.
    let e = period_energy(&p, kappa).unwrap();
    assert!(period_energy(&p, kappa * 0.9).unwrap() > e && period_energy(&p, kappa * 1.1).unwrap() > e);
}

#[test]
fn soliton_period_identity_and_profile() {
    let sol = soliton_solution(&ContinuumParams::new(1.0, 0.63, 3.36e-3)).unwrap();
    let m = sol.params.m();
    assert!((sol.period - 2.0 * sol.kappa / m * elliptic_k(sol.kappa).unwrap()).abs() < 1e-10);
    // φ advances by 2π over one period (am(2K) = π).
    assert!((sol.phase(sol.period).unwrap() - 2.0 * PI).abs() < 1e-10);
    let rows = analytic_texture(&sol, 10).unwrap();
    assert_eq!((rows[0].mx, rows[0].my), (1.0, 0.0));
    assert!(rows.iter().all(|r| r.mz == 0.0 && (r.norm() - 1.0).abs() < 1e-12));
}

#[test]
fn weak_field_approaches_helix() {
    let p = ContinuumParams::new(1.0, 0.63, 1e-9);
    let sol = soliton_solution(&p).unwrap();
    assert!((sol.kappa - 2.0 * p.m() / p.k0()).abs() / sol.kappa < 1e-3);
    assert!((sol.period - 2.0 * PI / p.k0()).abs() < 1e-3);
    assert!(sol.energy_per_period.is_finite());
}

#[test]
fn dense_and_lanczos_agree() {
    for (n, d, b) in [(4, 0.63, 3.36e-3), (6, 1.0, 0.0), (7, 5.0, 5.0), (8, 0.0, 1.0), (9, 0.63, 0.2)] {
        let h = build_chain_hamiltonian(&ChainParams::open(n, 1.0, d, b)).unwrap();
        let dense = lowest_eigenpairs_with(&h, 4, Method::Dense).unwrap();
        let lanczos = lowest_eigenpairs_with(&h, 4, Method::Lanczos).unwrap();
        for k in 0..4 {
            assert!((dense.eigenvalues[k] - lanczos.eigenvalues[k]).abs() < 1e-8, "N={n} level {k}");
        }
        assert_eq!(dense.ground_degeneracy, lanczos.ground_degeneracy);
        assert!(lanczos.residuals.iter().all(|&r| r < 1e-8));
    }
}

#[test]
fn heisenberg_multiplet_degeneracy() {
    for n in 2..=8 {
        let h = build_chain_hamiltonian(&ChainParams::open(n, 1.0, 0.0, 0.0)).unwrap();
        let s = lowest_eigenpairs(&h, 2).unwrap();
        assert_eq!(s.ground_degeneracy, n + 1, "N={n}");
        assert!((s.e0() + (n - 1) as f64 / 4.0).abs() < 1e-10);
        let projector = ground_space_projector(&s, 1e-8).unwrap();
        let zero = StateVector::new_zero_state(n).unwrap();
        let weight: f64 = projector.iter().map(|g| g.inner_product(&zero).unwrap().norm_sqr()).sum();
        assert!((weight - 1.0).abs() < 1e-10);
        assert!(delta_metric(s.e0(), &s).unwrap().abs() < 1e-12);
    }
}

#[test]
fn dmi_pair_ground_state_is_maximally_entangled() {
    let h = build_chain_hamiltonian(&ChainParams::open(2, 0.0, 1.0, 0.0)).unwrap();
    let s = lowest_eigenpairs(&h, 1).unwrap();
    assert!((s.e0() + 0.5).abs() < 1e-12);
    let rho = s.ground_state().reduced_density_matrix(0, 1).unwrap();
    assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-10);
    let bell = DensityMatrix2Q::from_pure([c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
    assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn reduced_density_matrix_matches_partial_trace_oracle() {
    let n = 4;
    let psi = random_state(n, 17);
    let v = psi.amplitudes();
    for (i, j) in [(0, 1), (0, 3), (1, 2), (2, 3)] {
        let rho = psi.reduced_density_matrix(i, j).unwrap();
        // Brute-force partial trace over every other qubit.
        for r in 0..4 {
            for col in 0..4 {
                let mut acc = c(0.0, 0.0);
                for x in 0..1usize << n {
                    for y in 0..1usize << n {
                        let others = !((1 << i) | (1 << j));
                        if x & others != y & others {
                            continue;
                        }
                        let local = |b: usize| ((b >> i) & 1) << 1 | ((b >> j) & 1);
                        if local(x) == r && local(y) == col {
                            acc += v[x] * v[y].conj();
                        }
                    }
                }
                assert!((rho.entries[(r, col)] - acc).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn texture_of_basis_and_x_states() {
    let zero = StateVector::new_zero_state(3).unwrap();
    assert!(magnetization_texture(&zero).unwrap().iter().all(|r| r.mz == 1.0 && r.mx == 0.0));
    let minus: Vec<_> = (0..8).map(|b: u32| c(if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    let psi = StateVector::from_amplitudes(3, minus).unwrap();
    for r in magnetization_texture(&psi).unwrap() {
        assert!((r.mx + 1.0).abs() < 1e-12 && r.my.abs() < 1e-12 && r.mz.abs() < 1e-12);
    }
    let conc = concurrence_matrix(&psi).unwrap();
    assert!(conc.values.iter().flatten().all(|&v| v.abs() < 1e-10));
}

#[test]
fn seeded_runs_are_bitwise_reproducible() {
    let h = build_chain_hamiltonian(&ChainParams::open(4, 1.0, 0.63, 0.3)).unwrap();
    let spec = AnsatzSpec::ring(4, 2).unwrap();
    let cfg = OptimizerConfig { restarts: 3, base_seed: 7, max_iterations: 500, ..Default::default() };
    let kind = ObjectiveKind::Energy(h);
    let a = run_vqe(&kind, &spec, &cfg, None).unwrap();
    let b = run_vqe(&kind, &spec, &cfg, None).unwrap();
    assert_eq!(a.best_parameters, b.best_parameters);
    for (x, y) in a.per_restart.iter().zip(&b.per_restart) {
        assert_eq!(x.final_value.to_bits(), y.final_value.to_bits());
        assert_eq!(x.trace, y.trace);
    }
}

#[test]
fn warm_started_sweep_never_gets_worse() {
    let h = build_chain_hamiltonian(&ChainParams::open(5, 1.0, 0.63, 0.2)).unwrap();
    let spectrum = lowest_eigenpairs(&h, 2).unwrap();
    let cfg = OptimizerConfig {
        gradient_mode: GradientMode::AdjointAnalytic,
        restarts: 2,
        max_iterations: 400,
        ..Default::default()
    };
    let kind = ObjectiveKind::Energy(h.clone());
    let sweep = run_layer_sweep(
        &kind,
        &AnsatzSpec::ring(5, 1).unwrap(),
        &[1, 2, 3],
        &cfg,
        Some(Reference { hamiltonian: &h, spectrum: &spectrum }),
        true,
    );
    let best: Vec<f64> = sweep.iter().map(|(_, r)| r.as_ref().unwrap().best_value).collect();
    assert!(best.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{best:?}");
    for (_, r) in &sweep {
        let r = r.as_ref().unwrap();
        for rec in &r.per_restart {
            assert!(rec.energy.unwrap() >= spectrum.e0() - 1e-10);
        }
    }
}

/// Wootters' construction from a pure global state: with `ρ = W W†`, the
/// square roots of the eigenvalues of ρρ̃ are the singular values of
/// `τ = Wᵀ (σ_y⊗σ_y) W`.
fn tau_route_concurrence(psi: &StateVector, i: usize, j: usize) -> f64 {
    let n = psi.n_qubits();
    let rest: Vec<usize> = (0..n).filter(|&q| q != i && q != j).collect();
    let m = 1usize << rest.len();
    let w = nalgebra::DMatrix::from_fn(4, m, |row, k| {
        let mut idx = ((row >> 1) & 1) << i | (row & 1) << j;
        for (bit, &q) in rest.iter().enumerate() {
            idx |= ((k >> bit) & 1) << q;
        }
        psi.amplitudes()[idx]
    });
    let mut yy = nalgebra::DMatrix::zeros(4, 4);
    yy[(0, 3)] = c(-1.0, 0.0);
    yy[(3, 0)] = c(-1.0, 0.0);
    yy[(1, 2)] = c(1.0, 0.0);
    yy[(2, 1)] = c(1.0, 0.0);
    let tau = w.transpose() * yy * &w;
    let mut s: Vec<f64> = tau.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.resize(4.max(s.len()), 0.0);
    (s[0] - s[1] - s[2] - s[3]).max(0.0)
}

#[test]
fn concurrence_of_ansatz_marginals_matches_tau_route() {
    // Small angles give near-product pairs whose ρρ̃ is almost nilpotent.
    for layers in 1..=2 {
        let spec = AnsatzSpec::ring(5, layers).unwrap();
        for seed in 0..200u64 {
            let scale = [1.0, 1e-2, 1e-4, 1e-6][(seed % 4) as usize];
            let theta = chiral_vqe::ParameterVector(spec.random_parameters(seed).angles().iter().map(|x| x * scale).collect());
            let psi = spec.prepare_state(&theta).unwrap();
            for i in 0..5 {
                for j in i + 1..5 {
                    let rho = psi.reduced_density_matrix(i, j).unwrap();
                    let got = concurrence(&rho).unwrap();
                    let oracle = tau_route_concurrence(&psi, i, j);
                    assert!((got - oracle).abs() < 1e-6, "L{layers} seed {seed} ({i},{j}): {got} vs {oracle}");
                }
            }
        }
    }
}
