//! Dense statevector simulation.
//!
//! Gates are applied in place by walking amplitude pairs `(k, k + 2^q)` with
//! bit `q` of `k` clear. Rotations follow `R_α(θ) = exp(−iθσ_α)`, i.e. the
//! full angle multiplies the Pauli matrix (no factor ½).

use std::io::{Read, Write};

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::pauli::Pauli;
use crate::{Error, Result};

pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn new_zero_state(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps amplitudes, rescaling them to unit norm.
    pub fn from_amplitudes(n_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_register(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidParameter("state has zero or non-finite norm".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        if index >= 1 << n_qubits {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range")));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[index] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub(crate) fn reset_zero(&mut self) {
        self.amplitudes.iter_mut().for_each(|a| *a = ZERO);
        self.amplitudes[0] = ONE;
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
        }
        Ok(())
    }

    /// `exp(−iθσ_axis)` on `qubit`.
    pub fn apply_rotation(&mut self, axis: Pauli, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        rotate(&mut self.amplitudes, axis, qubit, theta);
        debug_assert!((self.norm_sqr() - 1.0).abs() < 1e-10);
        Ok(())
    }

    /// `exp(−iθY)` on `target` for the control-1 subspace.
    pub fn apply_controlled_ry(&mut self, control: usize, target: usize, theta: f64) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidQubitPair(control, target));
        }
        controlled_ry(&mut self.amplitudes, control, target, theta);
        debug_assert!((self.norm_sqr() - 1.0).abs() < 1e-10);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, actual: other.n_qubits });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Two-qubit reduced density matrix with basis `|q_i q_j⟩`, `q_i` the high bit.
    pub fn reduced_density_matrix(&self, i: usize, j: usize) -> Result<DensityMatrix2Q> {
        if !(i < j && j < self.n_qubits) {
            return Err(Error::InvalidQubitPair(i, j));
        }
        let (bi, bj) = (1usize << i, 1usize << j);
        let mut rho = Matrix4::<Complex64>::zeros();
        for rest in 0..self.amplitudes.len() {
            if rest & (bi | bj) != 0 {
                continue;
            }
            let local = [
                self.amplitudes[rest],
                self.amplitudes[rest | bj],
                self.amplitudes[rest | bi],
                self.amplitudes[rest | bi | bj],
            ];
            for r in 0..4 {
                for c in 0..4 {
                    rho[(r, c)] += local[r] * local[c].conj();
                }
            }
        }
        Ok(DensityMatrix2Q { entries: rho, qubit_pair: (i, j) })
    }

    /// `⟨σ_axis⟩` on a single qubit.
    pub fn single_qubit_expectation(&self, axis: Pauli, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let mut acc = 0.0;
        for k in (0..self.amplitudes.len()).filter(|k| k & bit == 0) {
            let (a0, a1) = (self.amplitudes[k], self.amplitudes[k | bit]);
            acc += match axis {
                Pauli::X => 2.0 * (a0.conj() * a1).re,
                Pauli::Y => 2.0 * (a0.conj() * a1).im,
                Pauli::Z => a0.norm_sqr() - a1.norm_sqr(),
            };
        }
        Ok(acc)
    }

    /// Little-endian dump: `u64` qubit count, then `(re, im)` `f64` pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n_qubits as u64).to_le_bytes())?;
        for a in &self.amplitudes {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n_qubits = u64::from_le_bytes(word) as usize;
        check_register(n_qubits)?;
        let mut amplitudes = Vec::with_capacity(1 << n_qubits);
        for _ in 0..1usize << n_qubits {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            amplitudes.push(Complex64::new(re, im));
        }
        Ok(Self { n_qubits, amplitudes })
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits { n_qubits, limit: MAX_QUBITS });
    }
    Ok(())
}

#[inline]
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Visits every `(k, k | bit)` pair with bit clear in `k`.
#[inline]
fn for_pairs(len: usize, bit: usize, mut f: impl FnMut(usize, usize)) {
    let mut base = 0;
    while base < len {
        for k in base..base + bit {
            f(k, k | bit);
        }
        base += bit << 1;
    }
}

pub(crate) fn rotate(amps: &mut [Complex64], axis: Pauli, qubit: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    let bit = 1usize << qubit;
    match axis {
        Pauli::X => {
            let mis = Complex64::new(0.0, -s);
            for_pairs(amps.len(), bit, |k0, k1| {
                let (a0, a1) = (amps[k0], amps[k1]);
                amps[k0] = a0 * c + mis * a1;
                amps[k1] = mis * a0 + a1 * c;
            });
        }
        Pauli::Y => for_pairs(amps.len(), bit, |k0, k1| {
            let (a0, a1) = (amps[k0], amps[k1]);
            amps[k0] = a0 * c - a1 * s;
            amps[k1] = a0 * s + a1 * c;
        }),
        Pauli::Z => {
            let down = Complex64::new(c, -s);
            let up = Complex64::new(c, s);
            for_pairs(amps.len(), bit, |k0, k1| {
                amps[k0] *= down;
                amps[k1] *= up;
            });
        }
    }
}

pub(crate) fn controlled_ry(amps: &mut [Complex64], control: usize, target: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    let cbit = 1usize << control;
    for_pairs(amps.len(), 1 << target, |k0, k1| {
        if k0 & cbit != 0 {
            let (a0, a1) = (amps[k0], amps[k1]);
            amps[k0] = a0 * c - a1 * s;
            amps[k1] = a0 * s + a1 * c;
        }
    });
}

/// `⟨bra| G |ket⟩` for the generator `G = σ_axis` on `qubit`.
pub(crate) fn generator_overlap(bra: &[Complex64], ket: &[Complex64], axis: Pauli, qubit: usize) -> Complex64 {
    let mut acc = ZERO;
    for_pairs(ket.len(), 1 << qubit, |k0, k1| {
        acc += match axis {
            Pauli::X => bra[k0].conj() * ket[k1] + bra[k1].conj() * ket[k0],
            Pauli::Y => Complex64::new(0.0, 1.0) * (bra[k1].conj() * ket[k0] - bra[k0].conj() * ket[k1]),
            Pauli::Z => bra[k0].conj() * ket[k0] - bra[k1].conj() * ket[k1],
        };
    });
    acc
}

/// `⟨bra| |1⟩⟨1|_control ⊗ Y_target |ket⟩`.
pub(crate) fn controlled_y_overlap(bra: &[Complex64], ket: &[Complex64], control: usize, target: usize) -> Complex64 {
    let cbit = 1usize << control;
    let mut acc = ZERO;
    for_pairs(ket.len(), 1 << target, |k0, k1| {
        if k0 & cbit != 0 {
            acc += Complex64::new(0.0, 1.0) * (bra[k1].conj() * ket[k0] - bra[k0].conj() * ket[k1]);
        }
    });
    acc
}

/// Reduced state of a qubit pair `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix2Q {
    pub entries: Matrix4<Complex64>,
    pub qubit_pair: (usize, usize),
}

impl DensityMatrix2Q {
    /// Pure two-qubit state with amplitudes ordered `|00⟩, |01⟩, |10⟩, |11⟩`
    /// (first label is the high bit).
    pub fn from_pure(amps: [Complex64; 4]) -> Self {
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        let v = amps.map(|a| a / norm);
        let entries = Matrix4::from_fn(|r, c| v[r] * v[c].conj());
        Self { entries, qubit_pair: (0, 1) }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (self.entries - self.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let ev = self.entries.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(f64::total_cmp);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(actual: &[Complex64], expected: &[Complex64]) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert!((a - e).norm() < 1e-12, "{actual:?} != {expected:?}");
        }
    }

    #[test]
    fn zero_states() {
        assert_eq!(StateVector::new_zero_state(1).unwrap().amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(StateVector::new_zero_state(2).unwrap().amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let s = StateVector::new_zero_state(10).unwrap();
        assert_eq!(s.dim(), 1024);
        assert_relative_eq!(s.norm_sqr(), 1.0);
        assert!(StateVector::new_zero_state(0).is_err());
        assert!(StateVector::new_zero_state(25).is_err());
    }

    #[test]
    fn rotation_examples() {
        let mut s = StateVector::new_zero_state(1).unwrap();
        s.apply_rotation(Pauli::X, 0, FRAC_PI_2).unwrap();
        assert_amps(s.amplitudes(), &[ZERO, c(0.0, -1.0)]);

        let theta = 0.37;
        let mut s = StateVector::new_zero_state(1).unwrap();
        s.apply_rotation(Pauli::Z, 0, theta).unwrap();
        assert_amps(s.amplitudes(), &[Complex64::from_polar(1.0, -theta), ZERO]);

        let mut s = StateVector::new_zero_state(1).unwrap();
        s.apply_rotation(Pauli::X, 0, PI).unwrap();
        assert_amps(s.amplitudes(), &[c(-1.0, 0.0), ZERO]);

        let mut s = StateVector::new_zero_state(1).unwrap();
        s.apply_rotation(Pauli::Y, 0, FRAC_PI_2).unwrap();
        assert_amps(s.amplitudes(), &[ZERO, ONE]);
    }

    #[test]
    fn rotation_acts_on_requested_bit() {
        let mut s = StateVector::new_zero_state(3).unwrap();
        s.apply_rotation(Pauli::X, 2, FRAC_PI_2).unwrap();
        assert_relative_eq!(s.amplitudes()[4].norm(), 1.0, epsilon = 1e-15);
        assert!(s.apply_rotation(Pauli::X, 3, 0.1).is_err());
    }

    #[test]
    fn controlled_ry_examples() {
        let mut s = StateVector::new_zero_state(2).unwrap();
        s.apply_controlled_ry(0, 1, 1.234).unwrap();
        assert_amps(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);

        // qubit 0 set → index 1
        let mut s = StateVector::basis_state(2, 1).unwrap();
        s.apply_controlled_ry(0, 1, FRAC_PI_2).unwrap();
        assert_amps(s.amplitudes(), &[ZERO, ZERO, ZERO, ONE]);

        assert!(matches!(s.apply_controlled_ry(1, 1, 0.3), Err(Error::InvalidQubitPair(1, 1))));
        assert!(s.apply_controlled_ry(0, 2, 0.3).is_err());
    }

    #[test]
    fn inner_products() {
        let zero = StateVector::new_zero_state(1).unwrap();
        let one = StateVector::basis_state(1, 1).unwrap();
        assert_eq!(zero.inner_product(&zero).unwrap(), ONE);
        assert_eq!(zero.inner_product(&one).unwrap(), ZERO);
        let two = StateVector::new_zero_state(2).unwrap();
        assert!(zero.inner_product(&two).is_err());
    }

    #[test]
    fn inner_product_conjugates_bra() {
        let a = StateVector::from_amplitudes(1, vec![c(0.0, 1.0), ZERO]).unwrap();
        let b = StateVector::new_zero_state(1).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn rdm_product_and_bell() {
        let s = StateVector::new_zero_state(3).unwrap();
        let rho = s.reduced_density_matrix(0, 1).unwrap();
        assert_eq!(rho.entries[(0, 0)], ONE);
        assert_eq!(rho.entries.iter().filter(|z| z.norm() > 0.0).count(), 1);

        let h = FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(2, vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]).unwrap();
        let rho = bell.reduced_density_matrix(0, 1).unwrap();
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_relative_eq!(rho.entries[(r, col)].re, 0.5, epsilon = 1e-15);
        }
        assert_relative_eq!(rho.entries.iter().map(|z| z.norm()).sum::<f64>(), 2.0, epsilon = 1e-14);
        assert!(s.reduced_density_matrix(1, 1).is_err());
        assert!(s.reduced_density_matrix(2, 1).is_err());
        assert!(s.reduced_density_matrix(1, 3).is_err());
    }

    #[test]
    fn rdm_basis_order_high_bit_is_first_qubit() {
        // qubit 0 = 1, qubit 2 = 0 → |q_0 q_2⟩ = |10⟩ → local index 2
        let s = StateVector::basis_state(3, 0b001).unwrap();
        let rho = s.reduced_density_matrix(0, 2).unwrap();
        assert_eq!(rho.entries[(2, 2)], ONE);
    }

    #[test]
    fn single_qubit_expectations() {
        let mut s = StateVector::new_zero_state(2).unwrap();
        assert_relative_eq!(s.single_qubit_expectation(Pauli::Z, 1).unwrap(), 1.0);
        // exp(−iπ/4 Y)|0⟩ = (|0⟩ + |1⟩)/√2
        s.apply_rotation(Pauli::Y, 1, PI / 4.0).unwrap();
        assert_relative_eq!(s.single_qubit_expectation(Pauli::X, 1).unwrap(), 1.0, epsilon = 1e-14);
        // exp(−iπ/4 X)|0⟩ = (|0⟩ − i|1⟩)/√2 → ⟨Y⟩ = −1
        s.apply_rotation(Pauli::X, 0, PI / 4.0).unwrap();
        assert_relative_eq!(s.single_qubit_expectation(Pauli::Y, 0).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn binary_dump_round_trip() {
        let mut s = StateVector::new_zero_state(3).unwrap();
        s.apply_rotation(Pauli::X, 1, 0.4).unwrap();
        s.apply_controlled_ry(1, 2, 0.9).unwrap();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 16 * 8);
        assert_eq!(&buf[..8], &3u64.to_le_bytes());
        assert_eq!(StateVector::read_binary(&buf[..]).unwrap(), s);
        assert!(StateVector::read_binary(&buf[..20]).is_err());
    }
}
