//! Objectives, gradients and the multi-restart VQE driver.


use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clock::Stopwatch;
use crate::ansatz::{AnsatzSpec, Gate, ParameterVector};
use crate::exact::{degeneracy_tolerance, delta_metric, ground_space_projector, Spectrum};
use crate::optimize::{minimize_bfgs, BfgsConfig, Termination};
use crate::pauli::Hamiltonian;
use crate::state::{self, StateVector};
use crate::{Error, Result};

/// What the optimizer minimizes.
#[derive(Debug, Clone)]
pub enum ObjectiveKind {
    /// `⟨ψ(θ)|H|ψ(θ)⟩`.
    Energy(Hamiltonian),
    /// `−Σ_k |⟨φ_k|ψ(θ)⟩|²`, i.e. the energy of `−Σ_k |φ_k⟩⟨φ_k|`.
    NegativeFidelity(Vec<StateVector>),
}

impl ObjectiveKind {
    pub fn label(&self) -> &'static str {
        match self {
            ObjectiveKind::Energy(_) => "energy",
            ObjectiveKind::NegativeFidelity(_) => "negative_fidelity",
        }
    }

    fn n_qubits(&self) -> usize {
        match self {
            ObjectiveKind::Energy(h) => h.n_qubits(),
            ObjectiveKind::NegativeFidelity(t) => t.first().map_or(0, StateVector::n_qubits),
        }
    }

    fn check(&self, spec: &AnsatzSpec) -> Result<()> {
        if let ObjectiveKind::NegativeFidelity(t) = self {
            if t.is_empty() {
                return Err(Error::InvalidParameter("fidelity objective needs a target state".into()));
            }
            if let Some(bad) = t.iter().find(|s| (s.norm_sqr() - 1.0).abs() > 1e-10) {
                return Err(Error::InvalidParameter(format!("target norm² {} is not 1", bad.norm_sqr())));
            }
            if t.iter().any(|s| s.n_qubits() != spec.n_qubits) {
                return Err(Error::DimensionMismatch { expected: spec.n_qubits, actual: self.n_qubits() });
            }
        }
        if self.n_qubits() != spec.n_qubits {
            return Err(Error::DimensionMismatch { expected: spec.n_qubits, actual: self.n_qubits() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    CentralDifference { step: f64 },
    AdjointAnalytic,
}

impl Default for GradientMode {
    fn default() -> Self {
        GradientMode::CentralDifference { step: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    pub gradient_mode: GradientMode,
    pub convergence_grad_tol: f64,
    pub c1: f64,
    pub c2: f64,
    pub restarts: usize,
    pub base_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            gradient_mode: GradientMode::default(),
            convergence_grad_tol: 1e-6,
            c1: 1e-4,
            c2: 0.9,
            restarts: 5,
            base_seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn bfgs(&self) -> BfgsConfig {
        BfgsConfig {
            max_iterations: self.max_iterations,
            grad_tol: self.convergence_grad_tol,
            c1: self.c1,
            c2: self.c2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bfgs().validate()?;
        if let GradientMode::CentralDifference { step } = self.gradient_mode {
            if !(step > 0.0) {
                return Err(Error::InvalidParameter(format!("finite-difference step {step} must be positive")));
            }
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("at least one restart is required".into()));
        }
        Ok(())
    }
}

/// Reusable buffers for evaluating one objective on one ansatz.
pub struct Evaluator<'a> {
    kind: &'a ObjectiveKind,
    spec: AnsatzSpec,
    gates: Vec<Gate>,
    psi: StateVector,
    lambda: Vec<Complex64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(kind: &'a ObjectiveKind, spec: &AnsatzSpec) -> Result<Self> {
        spec.validate()?;
        kind.check(spec)?;
        let psi = StateVector::new_zero_state(spec.n_qubits)?;
        let lambda = vec![Complex64::new(0.0, 0.0); psi.dim()];
        Ok(Self { kind, spec: *spec, gates: spec.gates(), psi, lambda })
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.gates.len() {
            return Err(Error::ParameterCount { expected: self.gates.len(), actual: theta.len() });
        }
        Ok(())
    }

    fn value_of_current(&self) -> f64 {
        match self.kind {
            ObjectiveKind::Energy(h) => h.expectation_unchecked(self.psi.amplitudes()),
            ObjectiveKind::NegativeFidelity(targets) => {
                -targets.iter().map(|t| state::inner(t.amplitudes(), self.psi.amplitudes()).norm_sqr()).sum::<f64>()
            }
        }
    }

    pub fn value(&mut self, theta: &[f64]) -> Result<f64> {
        self.check_len(theta)?;
        self.spec.prepare_into(&self.gates, theta, &mut self.psi);
        Ok(self.value_of_current())
    }

    /// The last prepared state.
    pub fn state(&self) -> &StateVector {
        &self.psi
    }

    /// Fills `grad` and returns the objective value at `theta`.
    pub fn gradient(&mut self, theta: &[f64], mode: GradientMode, grad: &mut [f64]) -> Result<f64> {
        self.check_len(theta)?;
        let f = match mode {
            GradientMode::CentralDifference { step } => {
                let mut probe = theta.to_vec();
                for k in 0..theta.len() {
                    probe[k] = theta[k] + step;
                    let up = self.value(&probe)?;
                    probe[k] = theta[k] - step;
                    let down = self.value(&probe)?;
                    probe[k] = theta[k];
                    grad[k] = (up - down) / (2.0 * step);
                }
                self.value(theta)?
            }
            GradientMode::AdjointAnalytic => self.adjoint(theta, grad),
        };
        if !f.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient evaluation"));
        }
        Ok(f)
    }

    /// Reverse sweep: with `ψ_k`, `λ_k` the forward and adjoint states after
    /// gate `k`, `∂f/∂θ_k = 2 Im⟨λ_k|G_k|ψ_k⟩` for `U_k = exp(−iθ_k G_k)`.
    fn adjoint(&mut self, theta: &[f64], grad: &mut [f64]) -> f64 {
        self.spec.prepare_into(&self.gates, theta, &mut self.psi);
        let f = self.value_of_current();
        match self.kind {
            ObjectiveKind::Energy(h) => h.apply_into(self.psi.amplitudes(), &mut self.lambda),
            ObjectiveKind::NegativeFidelity(targets) => {
                self.lambda.iter_mut().for_each(|l| *l = Complex64::new(0.0, 0.0));
                for t in targets {
                    let overlap = state::inner(t.amplitudes(), self.psi.amplitudes());
                    self.lambda.iter_mut().zip(t.amplitudes()).for_each(|(l, a)| *l -= a * overlap);
                }
            }
        }
        let psi = self.psi.amplitudes_mut();
        for (k, gate) in self.gates.iter().enumerate().rev() {
            let overlap = match *gate {
                Gate::Rotation { axis, qubit } => state::generator_overlap(&self.lambda, psi, axis, qubit),
                Gate::ControlledRy { control, target } => {
                    state::controlled_y_overlap(&self.lambda, psi, control, target)
                }
            };
            grad[k] = 2.0 * overlap.im;
            gate.apply(psi, -theta[k]);
            gate.apply(&mut self.lambda, -theta[k]);
        }
        f
    }
}

pub fn evaluate_objective(kind: &ObjectiveKind, spec: &AnsatzSpec, theta: &ParameterVector) -> Result<f64> {
    Evaluator::new(kind, spec)?.value(theta.angles())
}

pub fn gradient(kind: &ObjectiveKind, spec: &AnsatzSpec, theta: &ParameterVector, mode: GradientMode) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; theta.len()];
    Evaluator::new(kind, spec)?.gradient(theta.angles(), mode, &mut grad)?;
    Ok(grad)
}

/// Exact reference used to score a run.
#[derive(Debug, Clone, Copy)]
pub struct Reference<'a> {
    pub hamiltonian: &'a Hamiltonian,
    pub spectrum: &'a Spectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub seed: Option<u64>,
    pub final_value: f64,
    pub energy: Option<f64>,
    pub fidelity: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    #[serde(skip)]
    pub trace: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip)]
    pub parameters: Option<ParameterVector>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VqeResult {
    pub objective: String,
    pub ansatz: AnsatzSpec,
    pub best_restart: usize,
    pub best_value: f64,
    pub best_energy: Option<f64>,
    pub best_parameters: ParameterVector,
    pub mean_value: f64,
    pub std_value: f64,
    pub mean_energy: Option<f64>,
    pub std_energy: Option<f64>,
    /// Projector fidelity of the best restart against the exact ground space.
    pub fidelity: Option<f64>,
    pub max_fidelity: Option<f64>,
    pub delta: Option<f64>,
    pub per_restart: Vec<RestartRecord>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl VqeResult {
    pub fn best_state(&self) -> Result<StateVector> {
        self.ansatz.prepare_state(&self.best_parameters)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Starting point of one restart.
#[derive(Debug, Clone)]
pub struct Start {
    pub seed: Option<u64>,
    pub theta0: ParameterVector,
}

/// `cfg.restarts` optimizations from random angles seeded `base_seed + r`.
pub fn run_vqe(
    kind: &ObjectiveKind,
    spec: &AnsatzSpec,
    cfg: &OptimizerConfig,
    reference: Option<Reference<'_>>,
) -> Result<VqeResult> {
    let starts = (0..cfg.restarts as u64)
        .map(|r| {
            let seed = cfg.base_seed.wrapping_add(r);
            Start { seed: Some(seed), theta0: spec.random_parameters(seed) }
        })
        .collect();
    run_vqe_from(kind, spec, cfg, reference, starts)
}

/// Runs one optimization per start and aggregates in start order.
pub fn run_vqe_from(
    kind: &ObjectiveKind,
    spec: &AnsatzSpec,
    cfg: &OptimizerConfig,
    reference: Option<Reference<'_>>,
    starts: Vec<Start>,
) -> Result<VqeResult> {
    cfg.validate()?;
    spec.validate()?;
    kind.check(spec)?;
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no restarts requested".into()));
    }
    let clock = Stopwatch::start();
    let ground = match reference {
        Some(r) => Some(ground_space_projector(r.spectrum, degeneracy_tolerance(r.spectrum.e0()))?),
        None => None,
    };
    let score = |psi: &StateVector| -> (Option<f64>, Option<f64>) {
        let energy = match (kind, reference) {
            (ObjectiveKind::Energy(h), _) => Some(h.expectation_unchecked(psi.amplitudes())),
            (_, Some(r)) => Some(r.hamiltonian.expectation_unchecked(psi.amplitudes())),
            _ => None,
        };
        let fidelity = ground.as_ref().map(|basis| {
            basis.iter().map(|g| state::inner(g.amplitudes(), psi.amplitudes()).norm_sqr()).sum()
        });
        (energy, fidelity)
    };

    let one = |start: &Start| -> RestartRecord {
        let attempt = || -> Result<RestartRecord> {
            let mut eval = Evaluator::new(kind, spec)?;
            let mode = cfg.gradient_mode;
            let mut failure: Option<Error> = None;
            let outcome = minimize_bfgs(
                |x, g| match eval.gradient(x, mode, g) {
                    Ok(f) => f,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                start.theta0.angles(),
                &cfg.bfgs(),
            )?;
            if let Some(e) = failure.filter(|_| !outcome.value.is_finite()) {
                return Err(e);
            }
            let psi = spec.prepare_state(&ParameterVector(outcome.x.clone()))?;
            let (energy, fidelity) = score(&psi);
            Ok(RestartRecord {
                seed: start.seed,
                final_value: outcome.value,
                energy,
                fidelity,
                iterations: outcome.iterations,
                evaluations: outcome.evaluations,
                termination: outcome.termination,
                trace: outcome.trace,
                error: None,
                parameters: Some(ParameterVector(outcome.x)),
            })
        };
        attempt().unwrap_or_else(|e| RestartRecord {
            seed: start.seed,
            final_value: f64::NAN,
            energy: None,
            fidelity: None,
            iterations: 0,
            evaluations: 0,
            termination: Termination::LineSearchFailed,
            trace: vec![],
            error: Some(e.to_string()),
            parameters: None,
        })
    };

    #[cfg(feature = "parallel")]
    let per_restart: Vec<RestartRecord> = {
        use rayon::prelude::*;
        starts.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_restart: Vec<RestartRecord> = starts.iter().map(one).collect();

    let ok: Vec<usize> = (0..per_restart.len()).filter(|&i| per_restart[i].error.is_none()).collect();
    let Some(&best_restart) =
        ok.iter().min_by(|&&a, &&b| per_restart[a].final_value.total_cmp(&per_restart[b].final_value))
    else {
        let reason = per_restart.iter().filter_map(|r| r.error.clone()).next().unwrap_or_default();
        return Err(Error::Optimization(format!("every restart failed: {reason}")));
    };
    let best = &per_restart[best_restart];
    let values: Vec<f64> = ok.iter().map(|&i| per_restart[i].final_value).collect();
    let (mean_value, std_value) = mean_std(&values);
    let energies: Vec<f64> = ok.iter().filter_map(|&i| per_restart[i].energy).collect();
    let (mean_energy, std_energy) = if energies.len() == ok.len() {
        let (m, s) = mean_std(&energies);
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    let delta = match (reference, best.energy) {
        (Some(r), Some(e)) => delta_metric(e, r.spectrum).ok(),
        _ => None,
    };
    let max_fidelity = ok.iter().filter_map(|&i| per_restart[i].fidelity).reduce(f64::max);
    Ok(VqeResult {
        objective: kind.label().to_string(),
        ansatz: *spec,
        best_restart,
        best_value: best.final_value,
        best_energy: best.energy,
        best_parameters: best.parameters.clone().expect("successful restart keeps parameters"),
        mean_value,
        std_value,
        mean_energy,
        std_energy,
        fidelity: best.fidelity,
        max_fidelity,
        delta,
        per_restart,
        wall_time: clock.seconds(),
    })
}

/// One [`run_vqe`] per layer count. With `warm_start`, each depth after the
/// first gets one extra restart from the previous best padded with a
/// zero-angle layer, so its best objective cannot exceed the previous one.
pub fn run_layer_sweep(
    kind: &ObjectiveKind,
    base: &AnsatzSpec,
    layers: &[usize],
    cfg: &OptimizerConfig,
    reference: Option<Reference<'_>>,
    warm_start: bool,
) -> Vec<(usize, Result<VqeResult>)> {
    let mut out: Vec<(usize, Result<VqeResult>)> = Vec::with_capacity(layers.len());
    let mut previous: Option<ParameterVector> = None;
    for &n_layers in layers {
        let spec = base.with_layers(n_layers);
        let mut starts: Vec<Start> = (0..cfg.restarts as u64)
            .map(|r| {
                let seed = cfg.base_seed.wrapping_add(r);
                Start { seed: Some(seed), theta0: spec.random_parameters(seed) }
            })
            .collect();
        if warm_start {
            if let Some(padded) = previous.as_ref().and_then(|p| p.zero_padded(&spec).ok()) {
                starts.push(Start { seed: None, theta0: padded });
            }
        }
        let result = run_vqe_from(kind, &spec, cfg, reference, starts);
        if let Ok(r) = &result {
            previous = Some(r.best_parameters.clone());
        }
        out.push((n_layers, result));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::lowest_eigenpairs;
    use crate::pauli::{build_chain_hamiltonian, ChainParams};

    fn chain(n: usize, j: f64, d: f64, b: f64) -> Hamiltonian {
        build_chain_hamiltonian(&ChainParams::open(n, j, d, b)).unwrap()
    }

    #[test]
    fn objective_examples() {
        let spec = AnsatzSpec::ring(2, 1).unwrap();
        let zeros = ParameterVector::zeros(spec.param_count());
        let energy = ObjectiveKind::Energy(chain(2, 1.0, 0.0, 0.0));
        assert!((evaluate_objective(&energy, &spec, &zeros).unwrap() + 0.25).abs() < 1e-14);
        let fid = ObjectiveKind::NegativeFidelity(vec![StateVector::new_zero_state(2).unwrap()]);
        assert!((evaluate_objective(&fid, &spec, &zeros).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn energy_within_spectrum() {
        let h = chain(5, 1.0, 0.63, 0.3);
        let dense = h.to_dense().unwrap().symmetric_eigen();
        let lo = dense.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = dense.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spec = AnsatzSpec::ring(5, 2).unwrap();
        let kind = ObjectiveKind::Energy(h);
        for seed in 0..5 {
            let e = evaluate_objective(&kind, &spec, &spec.random_parameters(seed)).unwrap();
            assert!(e >= lo - 1e-12 && e <= hi + 1e-12);
        }
    }

    #[test]
    fn stationary_point_gradient_vanishes() {
        let spec = AnsatzSpec::ring(3, 1).unwrap();
        let kind = ObjectiveKind::NegativeFidelity(vec![StateVector::new_zero_state(3).unwrap()]);
        let zeros = ParameterVector::zeros(spec.param_count());
        for mode in [GradientMode::AdjointAnalytic, GradientMode::default()] {
            let g = gradient(&kind, &spec, &zeros, mode).unwrap();
            assert!(g.iter().all(|v| v.abs() < 1e-6), "{mode:?}: {g:?}");
        }
    }

    #[test]
    fn adjoint_matches_central_difference() {
        let spec = AnsatzSpec::ring(4, 2).unwrap();
        let h = chain(4, 1.0, 0.63, 0.4);
        let spectrum = lowest_eigenpairs(&h, 1).unwrap();
        for kind in [ObjectiveKind::Energy(h.clone()), ObjectiveKind::NegativeFidelity(vec![spectrum.ground_state().clone()])]
        {
            let theta = spec.random_parameters(11);
            let a = gradient(&kind, &spec, &theta, GradientMode::AdjointAnalytic).unwrap();
            let c = gradient(&kind, &spec, &theta, GradientMode::default()).unwrap();
            let worst = a.iter().zip(&c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-5, "{}: {worst}", kind.label());
        }
    }

    #[test]
    fn pair_heisenberg_vqe_hits_ground_energy() {
        let h = chain(2, 1.0, 0.0, 0.0);
        let spectrum = lowest_eigenpairs(&h, 1).unwrap();
        let spec = AnsatzSpec::ring(2, 1).unwrap();
        let cfg = OptimizerConfig { restarts: 2, ..Default::default() };
        let kind = ObjectiveKind::Energy(h.clone());
        let r = run_vqe(&kind, &spec, &cfg, Some(Reference { hamiltonian: &h, spectrum: &spectrum })).unwrap();
        assert!((r.best_energy.unwrap() + 0.25).abs() < 1e-6);
        assert!(r.fidelity.unwrap() > 1.0 - 1e-6);
        assert!(r.delta.unwrap().abs() < 1e-5);
        assert_eq!(r.per_restart.len(), 2);
    }

    #[test]
    fn restart_seed_permutation_keeps_best() {
        let h = chain(3, 1.0, 0.63, 0.2);
        let spec = AnsatzSpec::ring(3, 1).unwrap();
        let kind = ObjectiveKind::Energy(h);
        let cfg = OptimizerConfig { gradient_mode: GradientMode::AdjointAnalytic, restarts: 3, ..Default::default() };
        let forward = run_vqe(&kind, &spec, &cfg, None).unwrap();
        let starts = [12u64, 11, 10]
            .iter()
            .map(|&s| Start { seed: Some(s), theta0: spec.random_parameters(s) })
            .collect();
        let shuffled = run_vqe_from(&kind, &spec, &OptimizerConfig { base_seed: 10, ..cfg }, None, starts).unwrap();
        let reference = run_vqe(&kind, &spec, &OptimizerConfig { base_seed: 10, ..cfg }, None).unwrap();
        assert_eq!(shuffled.best_value, reference.best_value);
        assert_eq!(shuffled.per_restart[0].final_value, reference.per_restart[2].final_value);
        assert!(forward.best_value.is_finite());
    }

    #[test]
    fn rejects_mismatched_objectives() {
        let spec = AnsatzSpec::ring(3, 1).unwrap();
        let kind = ObjectiveKind::Energy(chain(2, 1.0, 0.0, 0.0));
        assert!(run_vqe(&kind, &spec, &OptimizerConfig::default(), None).is_err());
        let unnormalized = StateVector::new_zero_state(3).unwrap();
        let mut bad = unnormalized.clone();
        bad.amplitudes_mut()[1] = Complex64::new(1.0, 0.0);
        assert!(Evaluator::new(&ObjectiveKind::NegativeFidelity(vec![bad]), &spec).is_err());
        let cfg = OptimizerConfig { restarts: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
