//! Wootters concurrence maps and per-site magnetization textures.

use std::fmt::Write as _;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::Pauli;
use crate::state::{DensityMatrix2Q, StateVector};
use crate::{Error, Result};

/// Exact entries at or below this are treated as zero in ratio maps.
pub const RATIO_THRESHOLD: f64 = 1e-6;
const IMAG_LIMIT: f64 = 1e-8;
const NEGATIVE_LIMIT: f64 = 1e-10;
const NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// `σ_y ⊗ σ_y` in the `|00⟩, |01⟩, |10⟩, |11⟩` basis.
fn sigma_yy() -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    let minus = Complex64::new(-1.0, 0.0);
    let plus = Complex64::new(1.0, 0.0);
    m[(0, 3)] = minus;
    m[(3, 0)] = minus;
    m[(1, 2)] = plus;
    m[(2, 1)] = plus;
    m
}

/// `C = max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄)` with `λ₁ ≥ … ≥ λ₄` the eigenvalues
/// of `ρ ρ̃`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn concurrence(rho: &DensityMatrix2Q) -> Result<f64> {
    let yy = sigma_yy();
    let flipped = yy * rho.entries.map(|z| z.conj()) * yy;
    let r = rho.entries * flipped;
    let eig = general_eigenvalues(r)?;
    let mut lambdas = [0.0; 4];
    for (slot, z) in lambdas.iter_mut().zip(eig.iter()) {
        if z.im.abs() > IMAG_LIMIT {
            return Err(Error::Concurrence(format!("eigenvalue {z} of ρρ̃ is not real")));
        }
        if z.re < -NEGATIVE_LIMIT {
            return Err(Error::Concurrence(format!("eigenvalue {} of ρρ̃ is negative", z.re)));
        }
        *slot = z.re;
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    // The square root turns rounding noise of a zero eigenvalue (~1e-16)
    // into ~1e-8, so anything below the solver's noise floor is zero.
    let floor = NOISE_FLOOR * rho.entries.norm() * flipped.norm();
    for l in &mut lambdas {
        if *l <= floor {
            *l = 0.0;
        }
    }
    let s = lambdas.map(f64::sqrt);
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

/// Eigenvalues of a general complex 4×4 matrix: Householder reduction to
/// Hessenberg form, then Wilkinson-shifted QR sweeps with Givens rotations.
///
/// Deflation uses an absolute floor tied to the matrix norm so that
/// rank-deficient inputs (pure-state `ρρ̃` has rank one) converge.
pub fn general_eigenvalues(m: Matrix4<Complex64>) -> Result<[Complex64; 4]> {
    const N: usize = 4;
    let zero = Complex64::new(0.0, 0.0);
    let mut h = m;
    for k in 0..N - 2 {
        let x: Vec<Complex64> = (k + 1..N).map(|r| h[(r, k)]).collect();
        let alpha = x.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vnorm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= vnorm);
        // H ← P H P with P = I − 2vv†
        for c in 0..N {
            let dot: Complex64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, c)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, c)] -= v[i] * dot * 2.0;
            }
        }
        for r in 0..N {
            let dot: Complex64 = (0..v.len()).map(|i| h[(r, k + 1 + i)] * v[i]).sum();
            for i in 0..v.len() {
                h[(r, k + 1 + i)] -= dot * v[i].conj() * 2.0;
            }
        }
        for r in k + 2..N {
            h[(r, k)] = zero;
        }
    }

    let floor = f64::EPSILON * h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut eig = [zero; N];
    let mut end = N;
    let mut stalled = 0;
    while end > 0 {
        if end == 1 {
            eig[0] = h[(0, 0)];
            break;
        }
        let (a, b) = (end - 2, end - 1);
        let sub = h[(b, a)].norm();
        if sub <= f64::EPSILON * (h[(a, a)].norm() + h[(b, b)].norm()) || sub <= floor {
            h[(b, a)] = zero;
            eig[b] = h[(b, b)];
            end -= 1;
            stalled = 0;
            continue;
        }
        stalled += 1;
        if stalled > 500 {
            return Err(Error::Concurrence("shifted QR did not converge".into()));
        }
        // Active block starts after the last negligible subdiagonal entry.
        let mut start = a;
        while start > 0 && h[(start, start - 1)].norm() > floor {
            start -= 1;
        }
        let tr = h[(a, a)] + h[(b, b)];
        let det = h[(a, a)] * h[(b, b)] - h[(a, b)] * h[(b, a)];
        let disc = (tr * tr * 0.25 - det).sqrt();
        let (l1, l2) = (tr * 0.5 + disc, tr * 0.5 - disc);
        if start == a {
            // An isolated 2×2 block is solved in closed form; iterating on a
            // nearly defective pair (near-product ρρ̃ is almost nilpotent)
            // never deflates.
            let big = if l1.norm() >= l2.norm() { l1 } else { l2 };
            let small = if big.norm() > 0.0 { det / big } else { zero };
            eig[b] = big;
            eig[a] = small;
            end -= 2;
            stalled = 0;
            continue;
        }
        let mut shift = if (l1 - h[(b, b)]).norm() < (l2 - h[(b, b)]).norm() { l1 } else { l2 };
        if stalled % 11 == 10 {
            shift += Complex64::new(sub, 0.0);
        }
        for i in start..end {
            h[(i, i)] -= shift;
        }
        let mut rotations = Vec::with_capacity(end - start);
        for k in start..end - 1 {
            let (p, q) = (h[(k, k)], h[(k + 1, k)]);
            let r = (p.norm_sqr() + q.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (Complex64::new(1.0, 0.0), zero) } else { (p / r, q / r) };
            // G = [[c*, s*], [−s, c]] applied to rows k, k+1
            for col in k..N {
                let (x, y) = (h[(k, col)], h[(k + 1, col)]);
                h[(k, col)] = c.conj() * x + s.conj() * y;
                h[(k + 1, col)] = -s * x + c * y;
            }
            rotations.push((k, c, s));
        }
        for (k, c, s) in rotations {
            for row in 0..(k + 2).min(N) {
                let (x, y) = (h[(row, k)], h[(row, k + 1)]);
                h[(row, k)] = x * c + y * s;
                h[(row, k + 1)] = -x * s.conj() + y * c.conj();
            }
        }
        for i in start..end {
            h[(i, i)] += shift;
        }
    }
    Ok(eig)
}

/// Symmetric `N × N` map of pairwise concurrences with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceMatrix {
    pub values: Vec<Vec<f64>>,
}

impl ConcurrenceMatrix {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.12}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let values = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .map(|c| c.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad concurrence cell: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|r| r.len() != values.len()) {
            return Err(Error::Config("concurrence CSV is not square".into()));
        }
        Ok(Self { values })
    }
}

pub fn concurrence_matrix(psi: &StateVector) -> Result<ConcurrenceMatrix> {
    let n = psi.n_qubits();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let eval = |&(i, j): &(usize, usize)| -> Result<f64> { concurrence(&psi.reduced_density_matrix(i, j)?) };
    #[cfg(feature = "parallel")]
    let computed: Vec<Result<f64>> = {
        use rayon::prelude::*;
        pairs.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let computed: Vec<Result<f64>> = pairs.iter().map(eval).collect();

    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), c) in pairs.iter().zip(computed) {
        let c = c?;
        values[i][j] = c;
        values[j][i] = c;
    }
    Ok(ConcurrenceMatrix { values })
}

/// Elementwise `vqe / exact`; `None` where the exact entry is not above
/// [`RATIO_THRESHOLD`] (including the diagonal).
pub fn relative_concurrence(vqe: &ConcurrenceMatrix, exact: &ConcurrenceMatrix) -> Result<Vec<Vec<Option<f64>>>> {
    if vqe.n() != exact.n() {
        return Err(Error::DimensionMismatch { expected: exact.n(), actual: vqe.n() });
    }
    Ok(vqe
        .values
        .iter()
        .zip(&exact.values)
        .map(|(rv, re)| rv.iter().zip(re).map(|(&v, &e)| (e > RATIO_THRESHOLD).then(|| v / e)).collect())
        .collect())
}

/// Ratio map as CSV; undefined cells are left empty.
pub fn ratio_to_csv(ratio: &[Vec<Option<f64>>]) -> String {
    let mut out = String::new();
    for row in ratio {
        let cells: Vec<String> = row.iter().map(|v| v.map(|x| format!("{x:.12}")).unwrap_or_default()).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Local moment `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` at one site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureRow {
    pub site: usize,
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl TextureRow {
    pub fn norm(&self) -> f64 {
        (self.mx * self.mx + self.my * self.my + self.mz * self.mz).sqrt()
    }

    /// In-plane angle `atan2(my, mx)`.
    pub fn azimuth(&self) -> f64 {
        self.my.atan2(self.mx)
    }
}

pub fn magnetization_texture(psi: &StateVector) -> Result<Vec<TextureRow>> {
    (0..psi.n_qubits())
        .map(|site| {
            Ok(TextureRow {
                site,
                mx: psi.single_qubit_expectation(Pauli::X, site)?,
                my: psi.single_qubit_expectation(Pauli::Y, site)?,
                mz: psi.single_qubit_expectation(Pauli::Z, site)?,
            })
        })
        .collect()
}

pub fn texture_to_csv(rows: &[TextureRow]) -> String {
    let mut out = String::from("site,mx,my,mz\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.12},{:.12},{:.12}", r.site, r.mx, r.my, r.mz);
    }
    out
}

pub fn texture_from_csv(text: &str) -> Result<Vec<TextureRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "site,mx,my,mz" => {}
        _ => return Err(Error::Config("texture CSV must start with 'site,mx,my,mz'".into())),
    }
    lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').map(str::trim).collect();
            if cells.len() != 4 {
                return Err(Error::Config(format!("texture row '{l}' needs 4 cells")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Config(format!("bad texture cell: {e}")));
            Ok(TextureRow {
                site: cells[0].parse().map_err(|e| Error::Config(format!("bad site index: {e}")))?,
                mx: num(cells[1])?,
                my: num(cells[2])?,
                mz: num(cells[3])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bell_product_and_dmi_pair() {
        let h = FRAC_1_SQRT_2;
        let zero = c(0.0, 0.0);
        let bell = DensityMatrix2Q::from_pure([c(h, 0.0), zero, zero, c(h, 0.0)]);
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-10);
        let product = DensityMatrix2Q::from_pure([c(1.0, 0.0), zero, zero, zero]);
        assert!(concurrence(&product).unwrap().abs() < 1e-10);
        let dmi = DensityMatrix2Q::from_pure([zero, c(h, 0.0), c(0.0, h), zero]);
        assert!((concurrence(&dmi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn general_eigenvalues_match_trace_and_determinant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let m = Matrix4::from_fn(|_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let ev = general_eigenvalues(m).unwrap();
            let sum: Complex64 = ev.iter().sum();
            let prod: Complex64 = ev.iter().product();
            assert!((sum - m.trace()).norm() < 1e-12);
            assert!((prod - m.determinant()).norm() < 1e-12);
            for l in ev {
                let shifted = m - Matrix4::from_diagonal_element(l);
                assert!(shifted.determinant().norm() < 1e-10);
            }
        }
        let diag = Matrix4::from_diagonal(&nalgebra::Vector4::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        let mut ev = general_eigenvalues(diag).unwrap().map(|z| z.re);
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn maximally_mixed_is_unentangled() {
        let rho = DensityMatrix2Q {
            entries: Matrix4::from_diagonal_element(c(0.25, 0.0)),
            qubit_pair: (0, 1),
        };
        assert!(concurrence(&rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn matrix_of_bell_pair_plus_spectators() {
        let h = FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0, 0.0); 16];
        amps[0b0000] = c(h, 0.0);
        amps[0b0011] = c(h, 0.0);
        let psi = StateVector::from_amplitudes(4, amps).unwrap();
        let m = concurrence_matrix(&psi).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (0, 1) || (i, j) == (1, 0) { 1.0 } else { 0.0 };
                assert!((m.get(i, j) - expected).abs() < 1e-10, "({i},{j}) = {}", m.get(i, j));
            }
        }
        let zero = concurrence_matrix(&StateVector::new_zero_state(4).unwrap()).unwrap();
        assert!(zero.values.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn ratios() {
        let exact = ConcurrenceMatrix { values: vec![vec![0.0, 0.4], vec![0.4, 0.0]] };
        let same = relative_concurrence(&exact, &exact).unwrap();
        assert_eq!(same[0][1], Some(1.0));
        assert_eq!(same[0][0], None);
        let half = ConcurrenceMatrix { values: vec![vec![0.0, 0.2], vec![0.2, 0.0]] };
        assert_eq!(relative_concurrence(&half, &exact).unwrap()[1][0], Some(0.5));
        let zero = ConcurrenceMatrix { values: vec![vec![0.0, 0.0], vec![0.0, 0.0]] };
        assert_eq!(relative_concurrence(&half, &zero).unwrap()[0][1], None);
        assert_eq!(ratio_to_csv(&relative_concurrence(&half, &zero).unwrap()), ",\n,\n");
        let three = ConcurrenceMatrix { values: vec![vec![0.0; 3]; 3] };
        assert!(relative_concurrence(&three, &exact).is_err());
    }

    #[test]
    fn textures_of_simple_states() {
        let rows = magnetization_texture(&StateVector::new_zero_state(3).unwrap()).unwrap();
        assert!(rows.iter().all(|r| r.mx == 0.0 && r.my == 0.0 && (r.mz - 1.0).abs() < 1e-15));
        let minus = [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)];
        let amps = (0..8).map(|b| (0..3).map(|q| minus[(b >> q) & 1]).product()).collect();
        let psi = StateVector::from_amplitudes(3, amps).unwrap();
        for r in magnetization_texture(&psi).unwrap() {
            assert!((r.mx + 1.0).abs() < 1e-12 && r.my.abs() < 1e-12 && r.mz.abs() < 1e-12);
        }
    }

    #[test]
    fn csv_formats() {
        let rows = vec![TextureRow { site: 0, mx: 1.0, my: 0.0, mz: 0.0 }, TextureRow { site: 1, mx: 0.0, my: -1.0, mz: 0.0 }];
        let csv = texture_to_csv(&rows);
        assert!(csv.starts_with("site,mx,my,mz\n0,1.000000000000,"));
        assert_eq!(texture_from_csv(&csv).unwrap(), rows);
        assert!(texture_from_csv("a,b\n").is_err());
        let m = ConcurrenceMatrix { values: vec![vec![0.0, 0.5], vec![0.5, 0.0]] };
        assert_eq!(ConcurrenceMatrix::from_csv(&m.to_csv()).unwrap(), m);
    }
}
