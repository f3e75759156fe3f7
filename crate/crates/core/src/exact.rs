//! Ground-truth eigenpairs: dense diagonalization and a matrix-free Lanczos
//! solver with full reorthogonalization and deflation of converged vectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigen, symmetric_eigen};
use crate::pauli::Hamiltonian;
use crate::state::{inner, StateVector};
use crate::{Error, Result};

pub const DENSE_LIMIT: usize = 12;
pub const LANCZOS_LIMIT: usize = 16;
/// Above this the automatic choice switches from dense to Lanczos.
pub const AUTO_DENSE_LIMIT: usize = 10;

const RESIDUAL_TARGET: f64 = 1e-10;
const RESIDUAL_LIMIT: f64 = 1e-8;
const MAX_KRYLOV: usize = 160;
const MAX_RESTARTS: usize = 200;

/// Relative degeneracy tolerance `1e-8 · max(1, |E₀|)`.
pub fn degeneracy_tolerance(e0: f64) -> f64 {
    1e-8 * e0.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Auto,
    Dense,
    Lanczos,
}

/// Lowest eigenpairs in ascending order.
///
/// Always contains the full ground cluster and, when the Hilbert space
/// allows it, at least one level above it.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
    pub ground_degeneracy: usize,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub e0: f64,
    pub e1: Option<f64>,
    pub degeneracy: usize,
    pub residuals: Vec<f64>,
}

impl Spectrum {
    fn from_pairs(mut pairs: Vec<(f64, StateVector, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let e0 = pairs[0].0;
        let tol = degeneracy_tolerance(e0);
        let ground_degeneracy = pairs.iter().take_while(|p| p.0 <= e0 + tol).count();
        let mut spectrum =
            Self { eigenvalues: vec![], eigenvectors: vec![], ground_degeneracy, residuals: vec![] };
        for (e, v, r) in pairs {
            spectrum.eigenvalues.push(e);
            spectrum.eigenvectors.push(v);
            spectrum.residuals.push(r);
        }
        spectrum
    }

    pub fn e0(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// First eigenvalue strictly above the ground cluster.
    pub fn e1(&self) -> Option<f64> {
        self.eigenvalues.get(self.ground_degeneracy).copied()
    }

    pub fn ground_state(&self) -> &StateVector {
        &self.eigenvectors[0]
    }

    pub fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            e0: self.e0(),
            e1: self.e1(),
            degeneracy: self.ground_degeneracy,
            residuals: self.residuals.clone(),
        }
    }
}

pub fn lowest_eigenpairs(h: &Hamiltonian, m: usize) -> Result<Spectrum> {
    lowest_eigenpairs_with(h, m, Method::Auto)
}

pub fn lowest_eigenpairs_with(h: &Hamiltonian, m: usize, method: Method) -> Result<Spectrum> {
    if m == 0 {
        return Err(Error::InvalidParameter("at least one eigenpair must be requested".into()));
    }
    match method {
        Method::Dense => dense(h, m),
        Method::Lanczos => lanczos(h, m),
        Method::Auto if h.n_qubits() <= AUTO_DENSE_LIMIT => dense(h, m),
        Method::Auto => lanczos(h, m),
    }
}

fn residual(h: &Hamiltonian, v: &[Complex64], lambda: f64) -> f64 {
    let mut hv = vec![Complex64::new(0.0, 0.0); v.len()];
    h.apply_into(v, &mut hv);
    hv.iter().zip(v).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt()
}

/// Number of leading pairs to keep: `m`, extended to cover the ground
/// cluster plus one more level.
fn keep_count(sorted: &[f64], m: usize) -> usize {
    let tol = degeneracy_tolerance(sorted[0]);
    let cluster = sorted.iter().take_while(|&&e| e <= sorted[0] + tol).count();
    m.max(cluster + 1).min(sorted.len())
}

fn dense(h: &Hamiltonian, m: usize) -> Result<Spectrum> {
    if h.n_qubits() > DENSE_LIMIT {
        return Err(Error::TooManyQubits { n_qubits: h.n_qubits(), limit: DENSE_LIMIT });
    }
    let (values, vectors) = hermitian_eigen(&h.to_dense()?)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let keep = keep_count(&sorted, m);
    let pairs = order[..keep]
        .iter()
        .map(|&i| {
            let col: Vec<Complex64> = vectors.column(i).iter().copied().collect();
            let lambda = values[i];
            let r = residual(h, &col, lambda);
            if r > RESIDUAL_LIMIT {
                return Err(Error::NonConvergence { iterations: 0, residual: r });
            }
            Ok((lambda, StateVector::from_amplitudes(h.n_qubits(), col)?, r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::from_pairs(pairs))
}

fn lanczos(h: &Hamiltonian, m: usize) -> Result<Spectrum> {
    if h.n_qubits() > LANCZOS_LIMIT {
        return Err(Error::TooManyQubits { n_qubits: h.n_qubits(), limit: LANCZOS_LIMIT });
    }
    let dim = 1usize << h.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_205e);
    let mut locked: Vec<Vec<Complex64>> = Vec::new();
    let mut pairs: Vec<(f64, StateVector, f64)> = Vec::new();
    loop {
        let (lambda, v) = lowest_in_complement(h, &locked, &mut rng)?;
        let r = residual(h, &v, lambda);
        if r > RESIDUAL_LIMIT {
            return Err(Error::NonConvergence { iterations: MAX_RESTARTS * MAX_KRYLOV, residual: r });
        }
        pairs.push((lambda, StateVector::from_amplitudes(h.n_qubits(), v.clone())?, r));
        locked.push(v);

        let mut values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        values.sort_by(f64::total_cmp);
        let tol = degeneracy_tolerance(values[0]);
        let above_cluster = values.iter().any(|&e| e > values[0] + tol);
        if (values.len() >= m && above_cluster) || values.len() == dim {
            break;
        }
    }
    Ok(Spectrum::from_pairs(pairs))
}

fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for q in basis {
            let overlap = inner(q, w);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= overlap * y);
        }
    }
}

fn normalize(w: &mut [Complex64]) -> f64 {
    let norm = w.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    if norm > 0.0 {
        w.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Lowest Ritz pair of `H` restricted to the orthogonal complement of `locked`.
fn lowest_in_complement(
    h: &Hamiltonian,
    locked: &[Vec<Complex64>],
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<Complex64>)> {
    let dim = 1usize << h.n_qubits();
    let krylov_cap = MAX_KRYLOV.min(dim - locked.len());
    let mut start: Vec<Complex64> =
        (0..dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    orthogonalize(&mut start, locked);
    normalize(&mut start);

    let mut best_residual = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        let mut ritz: Option<(f64, DVector<f64>)> = None;

        for k in 0..krylov_cap {
            h.apply_into(&basis[k], &mut w);
            let alpha = inner(&basis[k], &w).re;
            alphas.push(alpha);
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let beta = normalize(&mut w);

            let check = k % 4 == 3 || k + 1 == krylov_cap || beta < 1e-12;
            if check {
                let (theta, y) = tridiagonal_lowest(&alphas, &betas);
                let estimate = beta * y[y.len() - 1].abs();
                ritz = Some((theta, y));
                if estimate < RESIDUAL_TARGET || beta < 1e-12 {
                    break;
                }
            }
            if k + 1 < krylov_cap {
                betas.push(beta);
                basis.push(w.clone());
            }
        }

        let (_, y) = ritz.expect("at least one Ritz check per sweep");
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for (q, &c) in basis.iter().zip(y.iter()) {
            v.iter_mut().zip(q).for_each(|(x, b)| *x += b * c);
        }
        orthogonalize(&mut v, locked);
        normalize(&mut v);
        let lambda = h.expectation_unchecked(&v);
        let r = residual(h, &v, lambda);
        best_residual = best_residual.min(r);
        if r < RESIDUAL_TARGET * 10.0 {
            return Ok((lambda, v));
        }
            start = v;
    }
    Err(Error::NonConvergence { iterations: MAX_RESTARTS * krylov_cap, residual: best_residual })
}

fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> (f64, DVector<f64>) {
    let n = alphas.len();
    let t = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let (values, vectors) = symmetric_eigen(&t);
    (values[0], vectors.column(0).into_owned())
}

/// Orthonormal basis of the ground eigenspace, clustered with tolerance `tol`.
pub fn ground_space_projector(spectrum: &Spectrum, tol: f64) -> Result<Vec<StateVector>> {
    let e0 = spectrum.e0();
    let e1 = spectrum
        .e1()
        .ok_or_else(|| Error::Spectrum("spectrum holds no level above the ground cluster".into()))?;
    if e1 - e0 < tol {
        return Err(Error::Spectrum(format!(
            "tolerance {tol:e} merges E0 = {e0} with E1 = {e1} (gap {:e})",
            e1 - e0
        )));
    }
    if !spectrum.eigenvalues.iter().any(|&e| e > e0 + tol) {
        return Err(Error::Spectrum("spectrum does not resolve the cluster edge".into()));
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for (e, v) in spectrum.eigenvalues.iter().zip(&spectrum.eigenvectors) {
        if *e > e0 + tol {
            continue;
        }
        let mut w = v.amplitudes().to_vec();
        orthogonalize(&mut w, &basis);
        normalize(&mut w);
        basis.push(w);
    }
    let n = spectrum.ground_state().n_qubits();
    basis.into_iter().map(|w| StateVector::from_amplitudes(n, w)).collect()
}

/// `δ = (E_VQE − E₀)/(E₁ − E₀)`.
pub fn delta_metric(e_vqe: f64, spectrum: &Spectrum) -> Result<f64> {
    let e1 = spectrum
        .e1()
        .ok_or_else(|| Error::Spectrum("δ undefined: no level above the ground cluster".into()))?;
    Ok((e_vqe - spectrum.e0()) / (e1 - spectrum.e0()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{build_chain_hamiltonian, ChainParams};
    use approx::assert_relative_eq;

    fn chain(n: usize, j: f64, d: f64, b: f64) -> Hamiltonian {
        build_chain_hamiltonian(&ChainParams::open(n, j, d, b)).unwrap()
    }

    #[test]
    fn heisenberg_pair() {
        for method in [Method::Dense, Method::Lanczos] {
            let s = lowest_eigenpairs_with(&chain(2, 1.0, 0.0, 0.0), 1, method).unwrap();
            assert_relative_eq!(s.e0(), -0.25, epsilon = 1e-12);
            assert_eq!(s.ground_degeneracy, 3);
            assert_relative_eq!(s.e1().unwrap(), 0.75, epsilon = 1e-12);
        }
    }

    #[test]
    fn dmi_pair_ground_vector() {
        let s = lowest_eigenpairs(&chain(2, 0.0, 1.0, 0.0), 1).unwrap();
        assert_relative_eq!(s.e0(), -0.5, epsilon = 1e-12);
        assert_eq!(s.ground_degeneracy, 1);
        // |q1 q0⟩ index order: qubit 0 set = index 1, qubit 1 set = index 2.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let candidate = |a: Complex64, b: Complex64| {
            StateVector::from_amplitudes(2, vec![Complex64::new(0.0, 0.0), a, b, Complex64::new(0.0, 0.0)])
                .unwrap()
        };
        let one = Complex64::new(h, 0.0);
        let i = Complex64::new(0.0, h);
        let overlap_a = candidate(one, i).inner_product(s.ground_state()).unwrap().norm_sqr();
        let overlap_b = candidate(i, one).inner_product(s.ground_state()).unwrap().norm_sqr();
        // exactly one of the two phase conventions is the ground state
        assert!((overlap_a.max(overlap_b) - 1.0).abs() < 1e-10);
        assert!(overlap_a.min(overlap_b) < 1e-10);
        let full = lowest_eigenpairs_with(&chain(2, 0.0, 1.0, 0.0), 4, Method::Dense).unwrap();
        let expected = [-0.5, 0.0, 0.0, 0.5];
        for (a, b) in full.eigenvalues.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn projector_and_delta() {
        let s = lowest_eigenpairs(&chain(2, 1.0, 0.0, 0.0), 1).unwrap();
        let basis = ground_space_projector(&s, 1e-8).unwrap();
        assert_eq!(basis.len(), 3);
        for a in 0..3 {
            for b in 0..3 {
                let o = basis[a].inner_product(&basis[b]).unwrap().norm();
                assert!((o - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        assert!(matches!(ground_space_projector(&s, 2.0), Err(Error::Spectrum(_))));
        assert_relative_eq!(delta_metric(-0.25, &s).unwrap(), 0.0);
        assert_relative_eq!(delta_metric(0.75, &s).unwrap(), 1.0);

        let s = lowest_eigenpairs(&chain(3, 1.0, 0.3, 0.4), 2).unwrap();
        assert_eq!(ground_space_projector(&s, 1e-8).unwrap().len(), 1);
    }

    #[test]
    fn residuals_and_ordering() {
        for method in [Method::Dense, Method::Lanczos] {
            let h = chain(6, 1.0, 0.63, 0.2);
            let s = lowest_eigenpairs_with(&h, 4, method).unwrap();
            assert!(s.eigenvalues.len() >= 4);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(s.residuals.iter().all(|&r| r < 1e-8));
            for v in &s.eigenvectors {
                assert!((v.norm_sqr() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_and_lanczos_agree() {
        for (n, d, b) in [(4, 0.63, 0.0), (5, 1.0, 0.5), (6, 0.0, 1.0), (7, 0.63, 3.36e-3)] {
            let h = chain(n, 1.0, d, b);
            let a = lowest_eigenpairs_with(&h, 3, Method::Dense).unwrap();
            let l = lowest_eigenpairs_with(&h, 3, Method::Lanczos).unwrap();
            for k in 0..3 {
                assert!((a.eigenvalues[k] - l.eigenvalues[k]).abs() < 1e-8, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn guards() {
        let h = chain(13, 1.0, 0.0, 0.0);
        assert!(matches!(lowest_eigenpairs_with(&h, 1, Method::Dense), Err(Error::TooManyQubits { .. })));
        assert!(lowest_eigenpairs(&chain(2, 1.0, 0.0, 0.0), 0).is_err());
    }
}
