//! Layered hardware-efficient ansatz.
//!
//! Each layer applies `R_X R_Z R_X` to every qubit (three angles per qubit,
//! qubits in ascending order) followed by a cascade of controlled-`R_Y`
//! entanglers `q → q+1` for `q = 0..N−2`, closed by `N−1 → 0` on a ring.
//! Angles are consumed in exactly that order, layer after layer.

use std::f64::consts::TAU;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pauli::Pauli;
use crate::state::{self, StateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntanglerTopology {
    #[default]
    Ring,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    #[serde(default)]
    pub entangler_topology: EntanglerTopology,
}

/// One parametrized gate; its angle index is its position in [`AnsatzSpec::gates`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Rotation { axis: Pauli, qubit: usize },
    ControlledRy { control: usize, target: usize },
}

impl Gate {
    pub(crate) fn apply(&self, amps: &mut [num_complex::Complex64], theta: f64) {
        match *self {
            Gate::Rotation { axis, qubit } => state::rotate(amps, axis, qubit, theta),
            Gate::ControlledRy { control, target } => state::controlled_ry(amps, control, target, theta),
        }
    }
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, n_layers: usize, entangler_topology: EntanglerTopology) -> Result<Self> {
        let spec = Self { n_qubits, n_layers, entangler_topology };
        spec.validate()?;
        Ok(spec)
    }

    /// Ring-topology ansatz, the default layout.
    pub fn ring(n_qubits: usize, n_layers: usize) -> Result<Self> {
        Self::new(n_qubits, n_layers, EntanglerTopology::Ring)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 || self.n_qubits > state::MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("ansatz needs 2..={} qubits", state::MAX_QUBITS)));
        }
        if self.n_layers == 0 {
            return Err(Error::InvalidParameter("ansatz needs at least one layer".into()));
        }
        Ok(())
    }

    fn entanglers(&self) -> Vec<(usize, usize)> {
        let n = self.n_qubits;
        let mut pairs: Vec<_> = (0..n - 1).map(|q| (q, q + 1)).collect();
        if self.entangler_topology == EntanglerTopology::Ring {
            pairs.push((n - 1, 0));
        }
        pairs
    }

    pub fn params_per_layer(&self) -> usize {
        3 * self.n_qubits + self.entanglers().len()
    }

    pub fn param_count(&self) -> usize {
        self.n_layers * self.params_per_layer()
    }

    pub fn with_layers(&self, n_layers: usize) -> Self {
        Self { n_layers, ..*self }
    }

    /// The full gate sequence in parameter order.
    pub fn gates(&self) -> Vec<Gate> {
        let mut layer = Vec::with_capacity(self.params_per_layer());
        for qubit in 0..self.n_qubits {
            for axis in [Pauli::X, Pauli::Z, Pauli::X] {
                layer.push(Gate::Rotation { axis, qubit });
            }
        }
        layer.extend(self.entanglers().into_iter().map(|(control, target)| Gate::ControlledRy { control, target }));
        layer.iter().copied().cycle().take(layer.len() * self.n_layers).collect()
    }

    fn check_len(&self, theta: &ParameterVector) -> Result<()> {
        if theta.len() != self.param_count() {
            return Err(Error::ParameterCount { expected: self.param_count(), actual: theta.len() });
        }
        Ok(())
    }

    /// `U(θ)|0…0⟩`.
    pub fn prepare_state(&self, theta: &ParameterVector) -> Result<StateVector> {
        self.check_len(theta)?;
        let mut psi = StateVector::new_zero_state(self.n_qubits)?;
        self.prepare_into(&self.gates(), theta.angles(), &mut psi);
        Ok(psi)
    }

    pub(crate) fn prepare_into(&self, gates: &[Gate], angles: &[f64], psi: &mut StateVector) {
        psi.reset_zero();
        let amps = psi.amplitudes_mut();
        for (gate, &theta) in gates.iter().zip(angles) {
            gate.apply(amps, theta);
        }
    }

    /// Uniform i.i.d. angles in `[0, 2π)`, reproducible per seed.
    pub fn random_parameters(&self, seed: u64) -> ParameterVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new(0.0, TAU);
        ParameterVector((0..self.param_count()).map(|_| dist.sample(&mut rng)).collect())
    }
}

/// Circuit angles in radians. Optimization leaves them unconstrained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Angles folded into `[0, 2π)` for reporting.
    pub fn reduced(&self) -> Self {
        Self(self.0.iter().map(|a| a.rem_euclid(TAU)).collect())
    }

    /// Appends zero-angle layers; the prepared state is unchanged.
    pub fn zero_padded(&self, to: &AnsatzSpec) -> Result<Self> {
        let target = to.param_count();
        if target < self.len() || (target - self.len()) % to.params_per_layer() != 0 {
            return Err(Error::ParameterCount { expected: target, actual: self.len() });
        }
        let mut angles = self.0.clone();
        angles.resize(target, 0.0);
        Ok(Self(angles))
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
