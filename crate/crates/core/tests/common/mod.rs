#![allow(dead_code)]

use chiral_vqe::{Complex64, Pauli, StateVector};
use nalgebra::DMatrix;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_matrix(p: Option<Pauli>) -> DMatrix<Complex64> {
    let (o, i) = (c(0.0, 0.0), c(1.0, 0.0));
    let data = match p {
        None => [i, o, o, i],
        Some(Pauli::X) => [o, i, i, o],
        Some(Pauli::Y) => [o, c(0.0, -1.0), c(0.0, 1.0), o],
        Some(Pauli::Z) => [i, o, o, -i],
    };
    DMatrix::from_row_slice(2, 2, &data)
}

/// Dense operator of a Pauli string by explicit Kronecker products, with qubit
/// 0 as the least significant bit (rightmost factor).
pub fn kron_string(n: usize, ops: &[(usize, Pauli)]) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in (0..n).rev() {
        let p = ops.iter().find(|(k, _)| *k == q).map(|(_, p)| *p);
        m = m.kronecker(&pauli_matrix(p));
    }
    m
}

/// Single-qubit 2×2 embedded at `qubit` by Kronecker products.
pub fn embed(n: usize, qubit: usize, u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in (0..n).rev() {
        m = m.kronecker(&if q == qubit { u.clone() } else { pauli_matrix(None) });
    }
    m
}

/// `exp(−iθσ) = cos θ I − i sin θ σ`.
pub fn rotation_matrix(p: Pauli, theta: f64) -> DMatrix<Complex64> {
    pauli_matrix(None) * c(theta.cos(), 0.0) - pauli_matrix(Some(p)) * c(0.0, theta.sin())
}

/// `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ exp(−iθY)_t` built entry by entry.
pub fn controlled_ry_matrix(n: usize, control: usize, target: usize, theta: f64) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let r = rotation_matrix(Pauli::Y, theta);
    DMatrix::from_fn(dim, dim, |row, col| {
        let cb = (col >> control) & 1;
        if cb == 0 {
            return if row == col { c(1.0, 0.0) } else { c(0.0, 0.0) };
        }
        let mask = !(1usize << target);
        if (row & mask) != (col & mask) || (row >> control) & 1 == 0 {
            return c(0.0, 0.0);
        }
        r[((row >> target) & 1, (col >> target) & 1)]
    })
}

pub fn as_vector(psi: &StateVector) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(psi.amplitudes())
}

pub fn random_state(n: usize, seed: u64) -> StateVector {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..1 << n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    StateVector::from_amplitudes(n, amps).unwrap()
}

/// Adaptive Simpson quadrature, the reference for elliptic-integral checks.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

pub fn quad_k(kappa: f64) -> f64 {
    integrate(&|t: f64| 1.0 / (1.0 - (kappa * t.sin()).powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-14)
}

pub fn quad_e(kappa: f64) -> f64 {
    integrate(&|t: f64| (1.0 - (kappa * t.sin()).powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-14)
}

/// Incomplete integral of the first kind `F(φ, κ)` by quadrature.
pub fn quad_f(phi: f64, kappa: f64) -> f64 {
    integrate(&|t: f64| 1.0 / (1.0 - (kappa * t.sin()).powi(2)).sqrt(), 0.0, phi, 1e-14)
}
