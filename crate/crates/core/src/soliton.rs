//! Continuum chiral soliton lattice.
//!
//! With `θ = π/2` the in-plane angle obeys `φ'' + m² sin φ = 0`, solved by
//! `φ(z) = 2 am(mz/κ, κ)` where the modulus `κ` satisfies `πκk₀ = 4mE(κ)`.
//! Here `k₀ = D/(aJ)` and `m² = 2B/(a²J)`. Elliptic functions take the
//! modulus `κ` (not the parameter `κ²`).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entanglement::TextureRow;
use crate::pauli::ChainParams;
use crate::state::StateVector;
use crate::{Error, Result};

const AGM_TOL: f64 = 1e-16;

/// Arithmetic-geometric mean sequence `(a_n, b_n, c_n)` with `c_0 = c0`.
fn agm_ladder(a0: f64, b0: f64, c0: f64) -> Vec<(f64, f64, f64)> {
    let mut ladder = vec![(a0, b0, c0)];
    let (mut a, mut b) = (a0, b0);
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let next = (0.5 * (a + b), (a * b).sqrt());
        a = next.0;
        b = next.1;
        ladder.push((a, b, c));
        if c.abs() <= AGM_TOL * a {
            break;
        }
    }
    ladder
}

fn check_modulus(kappa: f64, allow_one: bool) -> Result<()> {
    let ok = kappa.is_finite() && kappa >= 0.0 && if allow_one { kappa <= 1.0 } else { kappa < 1.0 };
    if !ok {
        return Err(Error::InvalidParameter(format!("elliptic modulus {kappa} out of domain")));
    }
    Ok(())
}

/// Complete elliptic integral of the first kind, `K(κ) = π / (2·AGM(1, √(1−κ²)))`.
pub fn elliptic_k(kappa: f64) -> Result<f64> {
    check_modulus(kappa, false)?;
    let ladder = agm_ladder(1.0, (1.0 - kappa * kappa).sqrt(), kappa);
    Ok(FRAC_PI_2 / ladder.last().unwrap().0)
}

/// Complete elliptic integral of the second kind,
/// `E(κ) = K(κ)·(1 − Σ_n 2^{n−1} c_n²)`, with `E(1) = 1`.
pub fn elliptic_e(kappa: f64) -> Result<f64> {
    check_modulus(kappa, true)?;
    if kappa == 1.0 {
        return Ok(1.0);
    }
    let ladder = agm_ladder(1.0, (1.0 - kappa * kappa).sqrt(), kappa);
    let mut weight = 0.5;
    let mut sum = 0.0;
    for &(_, _, c) in &ladder {
        sum += weight * c * c;
        weight *= 2.0;
    }
    Ok(FRAC_PI_2 / ladder.last().unwrap().0 * (1.0 - sum))
}

/// Jacobi amplitude `am(u, κ)`, continuous and increasing in `u`, by the
/// descending AGM recurrence `φ_{n−1} = (φ_n + asin(c_n/a_n · sin φ_n))/2`.
pub fn jacobi_am(u: f64, kappa: f64) -> Result<f64> {
    check_modulus(kappa, false)?;
    if !u.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite argument {u}")));
    }
    if kappa == 0.0 {
        return Ok(u);
    }
    let ladder = agm_ladder(1.0, (1.0 - kappa * kappa).sqrt(), kappa);
    let depth = ladder.len() - 1;
    let mut phi = (depth as f64).exp2() * ladder[depth].0 * u;
    for n in (1..=depth).rev() {
        let (a, _, c) = ladder[n];
        phi = 0.5 * (phi + (c / a * phi.sin()).asin());
    }
    Ok(phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuumParams {
    pub j_exchange: f64,
    pub dmi: f64,
    pub field: f64,
    #[serde(default = "unit")]
    pub lattice_const: f64,
}

fn unit() -> f64 {
    1.0
}

impl ContinuumParams {
    pub fn new(j_exchange: f64, dmi: f64, field: f64) -> Self {
        Self { j_exchange, dmi, field, lattice_const: 1.0 }
    }

    pub fn from_chain(chain: &ChainParams) -> Self {
        Self::new(chain.j_exchange, chain.dmi, chain.field)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j_exchange > 0.0) || !(self.field >= 0.0) || !(self.lattice_const > 0.0) || !self.dmi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "continuum model needs J > 0, B >= 0, a > 0; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Pitch `k₀ = D/(aJ)`.
    pub fn k0(&self) -> f64 {
        self.dmi / (self.lattice_const * self.j_exchange)
    }

    /// `m = √(2B/(a²J))`.
    pub fn m(&self) -> f64 {
        (2.0 * self.field / (self.lattice_const.powi(2) * self.j_exchange)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KappaOutcome {
    Soliton(f64),
    /// `πk₀ ≤ 4m`: the field has unwound the lattice.
    NoSolution { pi_k0: f64, four_m: f64 },
}

/// Root of `πκk₀ − 4mE(κ)` on `(0, 1)`.
pub fn solve_kappa(params: &ContinuumParams) -> Result<KappaOutcome> {
    params.validate()?;
    let (k0, m) = (params.k0(), params.m());
    if !(m > 0.0) {
        return Err(Error::InvalidParameter("κ condition needs a positive field".into()));
    }
    if PI * k0 <= 4.0 * m {
        return Ok(KappaOutcome::NoSolution { pi_k0: PI * k0, four_m: 4.0 * m });
    }
    let f = |k: f64| -> Result<f64> { Ok(PI * k * k0 - 4.0 * m * elliptic_e(k)?) };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Newton polish, f'(κ) = πk₀ − 4m(E − K)/κ.
    let mut k = 0.5 * (lo + hi);
    for _ in 0..8 {
        let (e, kk) = (elliptic_e(k)?, elliptic_k(k)?);
        let step = f(k)? / (PI * k0 - 4.0 * m * (e - kk) / k);
        let next = k - step;
        if !(next > lo.min(k) * 0.5 && next < 1.0) {
            break;
        }
        k = next;
        if step.abs() < 1e-16 {
            break;
        }
    }
    Ok(KappaOutcome::Soliton(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonSolution {
    pub kappa: f64,
    /// `ℓ = (2κ/m) K(κ)`.
    pub period: f64,
    /// `ε = (am²J/2)(2E/(κ²K) − 1/κ² − (π/2m)·k₀/(κK))`.
    pub energy_per_period: f64,
    pub params: ContinuumParams,
}

/// Lattice energy `ε` for an arbitrary modulus, used for stationarity checks.
pub fn period_energy(params: &ContinuumParams, kappa: f64) -> Result<f64> {
    let (k0, m) = (params.k0(), params.m());
    let (e, kk) = (elliptic_e(kappa)?, elliptic_k(kappa)?);
    let prefactor = params.lattice_const * m * m * params.j_exchange / 2.0;
    Ok(prefactor * (2.0 * e / (kappa * kappa * kk) - 1.0 / (kappa * kappa) - PI / (2.0 * m) * k0 / (kappa * kk)))
}

pub fn soliton_solution(params: &ContinuumParams) -> Result<SolitonSolution> {
    let kappa = match solve_kappa(params)? {
        KappaOutcome::Soliton(k) => k,
        KappaOutcome::NoSolution { pi_k0, four_m } => {
            return Err(Error::NoSoliton(format!("πk₀ = {pi_k0:.6} does not exceed 4m = {four_m:.6}")))
        }
    };
    let period = 2.0 * kappa / params.m() * elliptic_k(kappa)?;
    let energy_per_period = period_energy(params, kappa)?;
    Ok(SolitonSolution { kappa, period, energy_per_period, params: *params })
}

impl SolitonSolution {
    /// `φ(z) = 2 am(mz/κ, κ)`.
    pub fn phase(&self, z: f64) -> Result<f64> {
        Ok(2.0 * jacobi_am(self.params.m() * z / self.kappa, self.kappa)?)
    }

    pub fn report(&self) -> SolitonReport {
        SolitonReport {
            kappa: self.kappa,
            period: self.period,
            energy_per_period: self.energy_per_period,
            k0: self.params.k0(),
            m: self.params.m(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonReport {
    pub kappa: f64,
    pub period: f64,
    pub energy_per_period: f64,
    pub k0: f64,
    pub m: f64,
}

/// In-plane texture `(cos φ(z_j), sin φ(z_j), 0)` at `z_j = j·a`.
pub fn analytic_texture(sol: &SolitonSolution, sites: usize) -> Result<Vec<TextureRow>> {
    (0..sites)
        .map(|site| {
            let phi = sol.phase(site as f64 * sol.params.lattice_const)?;
            Ok(TextureRow { site, mx: phi.cos(), my: phi.sin(), mz: 0.0 })
        })
        .collect()
}

/// Classical energy of unit spins `n_j` on the chain,
/// `−J/4 Σ nᵢ·nⱼ − D/4 Σ (nᵢ×nⱼ)_z + B/2 Σ nⱼˣ`.
///
/// The field enters with the same sign as in the quantum Hamiltonian, so this
/// equals the energy of the corresponding spin-coherent product state.
pub fn classical_energy(texture: &[TextureRow], chain: &ChainParams) -> Result<f64> {
    chain.validate()?;
    if texture.len() != chain.n_qubits {
        return Err(Error::DimensionMismatch { expected: chain.n_qubits, actual: texture.len() });
    }
    if let Some(r) = texture.iter().find(|r| (r.norm() - 1.0).abs() > 1e-6) {
        return Err(Error::InvalidParameter(format!("site {} is not a unit vector (|n| = {})", r.site, r.norm())));
    }
    let mut energy = 0.0;
    for (i, j) in chain.bonds() {
        let (a, b) = (&texture[i], &texture[j]);
        let dot = a.mx * b.mx + a.my * b.my + a.mz * b.mz;
        let cross_z = a.mx * b.my - a.my * b.mx;
        energy -= chain.j_exchange / 4.0 * dot + chain.dmi / 4.0 * cross_z;
    }
    energy += chain.field / 2.0 * texture.iter().map(|r| r.mx).sum::<f64>();
    Ok(energy)
}

/// Continuum estimate of the full classical chain energy: `ε` integrated over
/// the bonds plus the two constants the closed form drops, the exchange
/// reference `−J/4` per bond and the field offset `B/2` per site.
pub fn continuum_chain_energy(sol: &SolitonSolution, chain: &ChainParams) -> Result<f64> {
    chain.validate()?;
    let bonds = chain.bonds().len() as f64;
    let p = &sol.params;
    Ok(sol.energy_per_period * bonds * p.lattice_const - p.j_exchange / 4.0 * bonds
        + p.field / 2.0 * chain.n_qubits as f64)
}

/// Product of spinors `(e^{−iφ/2} cos(θ/2), e^{iφ/2} sin(θ/2))` whose Bloch
/// vectors are the texture rows.
pub fn product_state(texture: &[TextureRow]) -> Result<StateVector> {
    let spinors: Vec<[Complex64; 2]> = texture
        .iter()
        .map(|r| {
            let theta = r.mz.clamp(-1.0, 1.0).acos();
            let phi = r.my.atan2(r.mx);
            [
                Complex64::from_polar((theta / 2.0).cos(), -phi / 2.0),
                Complex64::from_polar((theta / 2.0).sin(), phi / 2.0),
            ]
        })
        .collect();
    let n = spinors.len();
    let amps = (0..1usize << n).map(|b| (0..n).map(|q| spinors[q][(b >> q) & 1]).product()).collect();
    StateVector::from_amplitudes(n, amps)
}
