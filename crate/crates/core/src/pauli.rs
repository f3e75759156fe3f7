//! Real-weighted Pauli strings and the chiral Heisenberg chain.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::state::StateVector;
use crate::{Error, Result};

/// Coefficients whose magnitude falls below this after merging are dropped.
pub const MERGE_TOLERANCE: f64 = 1e-15;

/// Largest register `to_dense` will materialize.
pub const DENSE_QUBIT_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(c)
    }
}

/// `coefficient · σ_{a}^{q_1} σ_{b}^{q_2} …` with identity on unlisted qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    #[serde(rename = "coeff")]
    coefficient: f64,
    ops: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    /// Operators may be given in any order; a qubit may appear only once.
    pub fn new(coefficient: f64, mut ops: Vec<(usize, Pauli)>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::InvalidTerm(format!("non-finite coefficient {coefficient}")));
        }
        ops.sort_by_key(|&(q, _)| q);
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidTerm(format!("repeated qubit in {ops:?}")));
        }
        Ok(Self { coefficient, ops })
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    fn mask(&self) -> TermMask {
        let mut mask = TermMask { x: 0, z: 0, phase: Complex64::new(self.coefficient, 0.0) };
        let mut n_y = 0;
        for &(q, p) in &self.ops {
            match p {
                Pauli::X => mask.x |= 1 << q,
                Pauli::Z => mask.z |= 1 << q,
                Pauli::Y => {
                    mask.x |= 1 << q;
                    mask.z |= 1 << q;
                    n_y += 1;
                }
            }
        }
        // Y = i·X·Z, so the string is i^{n_y} X^x Z^z.
        let i_pow = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        mask.phase *= i_pow[n_y % 4];
        mask
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.coefficient)?;
        for (q, p) in &self.ops {
            write!(f, "·{p}{q}")?;
        }
        Ok(())
    }
}

/// Bit-mask form of a term: `P|b⟩ = phase · (−1)^{|b ∧ z|} |b ⊕ x⟩`.
#[derive(Debug, Clone, Copy)]
struct TermMask {
    x: usize,
    z: usize,
    phase: Complex64,
}

impl TermMask {
    #[inline]
    fn sign(&self, b: usize) -> f64 {
        if (b & self.z).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// A Hermitian operator stored as a sum of real-weighted Pauli strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "RawHamiltonian", try_from = "RawHamiltonian")]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    masks: Vec<TermMask>,
}

#[derive(Serialize, Deserialize)]
struct RawHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl From<Hamiltonian> for RawHamiltonian {
    fn from(h: Hamiltonian) -> Self {
        Self { n_qubits: h.n_qubits, terms: h.terms }
    }
}

impl TryFrom<RawHamiltonian> for Hamiltonian {
    type Error = Error;

    fn try_from(raw: RawHamiltonian) -> Result<Self> {
        let terms = raw
            .terms
            .into_iter()
            .map(|t| PauliTerm::new(t.coefficient, t.ops))
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::new(raw.n_qubits, terms)
    }
}

impl PartialEq for Hamiltonian {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits && self.terms == other.terms
    }
}

impl Hamiltonian {
    /// Merges terms with identical operator lists and drops vanishing ones.
    /// Identity-only terms are kept as a constant offset.
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("Hamiltonian needs at least one qubit".into()));
        }
        if n_qubits > usize::BITS as usize - 2 {
            return Err(Error::TooManyQubits { n_qubits, limit: usize::BITS as usize - 2 });
        }
        let mut merged: BTreeMap<Vec<(usize, Pauli)>, f64> = BTreeMap::new();
        for term in terms {
            if let Some(&(q, _)) = term.ops.iter().find(|&&(q, _)| q >= n_qubits) {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            *merged.entry(term.ops).or_insert(0.0) += term.coefficient;
        }
        let terms: Vec<PauliTerm> = merged
            .into_iter()
            .filter(|(_, c)| c.abs() >= MERGE_TOLERANCE)
            .map(|(ops, coefficient)| PauliTerm { coefficient, ops })
            .collect();
        let masks = terms.iter().map(PauliTerm::mask).collect();
        Ok(Self { n_qubits, terms, masks })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.n_qubits,
            self.terms.iter().map(|t| PauliTerm { coefficient: t.coefficient * factor, ops: t.ops.clone() }),
        )
    }

    pub fn sum(&self, other: &Hamiltonian) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, actual: other.n_qubits });
        }
        Self::new(self.n_qubits, self.terms.iter().chain(&other.terms).cloned())
    }

    fn check_state(&self, psi: &StateVector) -> Result<()> {
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, actual: psi.n_qubits() });
        }
        Ok(())
    }

    /// `⟨ψ|H|ψ⟩` evaluated term by term on the amplitudes.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        self.check_state(psi)?;
        Ok(self.expectation_unchecked(psi.amplitudes()))
    }

    pub(crate) fn expectation_unchecked(&self, amps: &[Complex64]) -> f64 {
        let mut total = Complex64::new(0.0, 0.0);
        for m in &self.masks {
            let mut acc = Complex64::new(0.0, 0.0);
            if m.x == 0 {
                for (b, a) in amps.iter().enumerate() {
                    acc += a.norm_sqr() * m.sign(b);
                }
            } else {
                for (b, a) in amps.iter().enumerate() {
                    acc += amps[b ^ m.x].conj() * a * m.sign(b);
                }
            }
            total += m.phase * acc;
        }
        debug_assert!(total.im.abs() < 1e-10, "imaginary expectation residue {}", total.im);
        total.re
    }

    /// Matrix-free `H|ψ⟩`; the result is generally not normalized.
    pub fn apply(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        self.check_state(psi)?;
        let mut out = vec![Complex64::new(0.0, 0.0); psi.amplitudes().len()];
        self.apply_into(psi.amplitudes(), &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, amps: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for m in &self.masks {
            for (b, a) in amps.iter().enumerate() {
                out[b ^ m.x] += m.phase * a * m.sign(b);
            }
        }
    }

    /// Dense Kronecker expansion, for oracles and small exact solves.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::TooManyQubits { n_qubits: self.n_qubits, limit: DENSE_QUBIT_LIMIT });
        }
        let dim = 1usize << self.n_qubits;
        let mut h = DMatrix::zeros(dim, dim);
        for m in &self.masks {
            for b in 0..dim {
                h[(b ^ m.x, b)] += m.phase * m.sign(b);
            }
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Couplings of the chain: exchange `J`, DMI `D ê_z`, field `B ê_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_qubits: usize,
    pub j_exchange: f64,
    pub dmi: f64,
    pub field: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ChainParams {
    pub fn open(n_qubits: usize, j_exchange: f64, dmi: f64, field: f64) -> Self {
        Self { n_qubits, j_exchange, dmi, field, boundary: Boundary::Open }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::InvalidParameter(format!("chain needs n_qubits >= 2, got {}", self.n_qubits)));
        }
        if ![self.j_exchange, self.dmi, self.field].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coupling".into()));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, i+1)`, plus `(N−1, 0)` when periodic.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_qubits;
        let mut bonds: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}

/// Expands `−J Σ Sᵢ·Sⱼ − D Σ (Sᵢ×Sⱼ)_z + B Σ Sₓ` with `S = σ/2` into Pauli strings.
///
/// Per bond: `−J/4 (XX + YY + ZZ) − D/4 (XᵢYⱼ − YᵢXⱼ)`; per site: `+B/2 X`.
pub fn build_chain_hamiltonian(params: &ChainParams) -> Result<Hamiltonian> {
    params.validate()?;
    let j4 = params.j_exchange / 4.0;
    let d4 = params.dmi / 4.0;
    let mut terms = Vec::new();
    for (i, j) in params.bonds() {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push(PauliTerm::new(-j4, vec![(i, p), (j, p)])?);
        }
        terms.push(PauliTerm::new(-d4, vec![(i, Pauli::X), (j, Pauli::Y)])?);
        terms.push(PauliTerm::new(d4, vec![(i, Pauli::Y), (j, Pauli::X)])?);
    }
    for q in 0..params.n_qubits {
        terms.push(PauliTerm::new(params.field / 2.0, vec![(q, Pauli::X)])?);
    }
    Hamiltonian::new(params.n_qubits, terms)
}
