//! wasm-bindgen surface for the static demo page in `www/`. Every export
//! returns a JSON string; SVG fields are ready to drop into the DOM. The
//! plain Rust functions behind the exports are public for native tests.

use chiral_vqe::entanglement::{concurrence_matrix, magnetization_texture};
use chiral_vqe::exact::lowest_eigenpairs;
use chiral_vqe::pauli::{build_chain_hamiltonian, ChainParams};
use chiral_vqe::plot::{arrow_plot, heatmap};
use chiral_vqe::soliton::{analytic_texture, soliton_solution, ContinuumParams};
use chiral_vqe::vqe::{run_vqe, Reference};
use chiral_vqe::{AnsatzSpec, Error, GradientMode, ObjectiveKind, OptimizerConfig};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest chain the page will diagonalize; keeps a click under a few seconds.
pub const MAX_SITES: usize = 10;

type Result<T> = std::result::Result<T, Error>;

fn js_err(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn chain(sites: usize, dmi: f64, field: f64) -> Result<ChainParams> {
    if !(2..=MAX_SITES).contains(&sites) {
        return Err(Error::InvalidParameter(format!("sites must be between 2 and {MAX_SITES}")));
    }
    let params = ChainParams::open(sites, 1.0, dmi, field);
    params.validate()?;
    Ok(params)
}

fn as_cells(values: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    values.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect()
}

/// κ, period and energy density of the continuum soliton lattice, and its
/// profile sampled on `sites` lattice points.
pub fn soliton_profile(dmi: f64, field: f64, sites: usize) -> Result<String> {
    let sol = soliton_solution(&ContinuumParams::new(1.0, dmi, field))?;
    let rows = analytic_texture(&sol, sites.clamp(2, 200))?;
    let phase: Vec<f64> = rows.iter().map(|r| r.my.atan2(r.mx)).collect();
    Ok(json!({
        "report": sol.report(),
        "texture": rows,
        "phase": phase,
        "svg": arrow_plot(&rows, "analytic texture"),
    })
    .to_string())
}

/// Exact ground state of the open chain: energies, degeneracy, the pair
/// concurrence map and the per-site magnetization.
pub fn exact_ground(sites: usize, dmi: f64, field: f64) -> Result<String> {
    let h = build_chain_hamiltonian(&chain(sites, dmi, field)?)?;
    let spectrum = lowest_eigenpairs(&h, 2)?;
    let conc = concurrence_matrix(spectrum.ground_state())?;
    let texture = magnetization_texture(spectrum.ground_state())?;
    Ok(json!({
        "summary": spectrum.summary(),
        "concurrence": conc.values,
        "texture": texture,
        "concurrence_svg": heatmap(&as_cells(&conc.values), "exact concurrence"),
        "texture_svg": arrow_plot(&texture, "exact texture"),
    })
    .to_string())
}

/// A short energy-mode VQE run with analytic gradients, scored against the
/// exact ground state.
pub fn vqe_demo(
    sites: usize,
    layers: usize,
    dmi: f64,
    field: f64,
    seed: u32,
    max_iterations: usize,
) -> Result<String> {
    let h = build_chain_hamiltonian(&chain(sites, dmi, field)?)?;
    let spectrum = lowest_eigenpairs(&h, 2)?;
    let spec = AnsatzSpec::ring(sites, layers.clamp(1, 12))?;
    let cfg = OptimizerConfig {
        gradient_mode: GradientMode::AdjointAnalytic,
        restarts: 1,
        base_seed: seed as u64,
        max_iterations: max_iterations.clamp(1, 20_000),
        ..OptimizerConfig::default()
    };
    let result = run_vqe(
        &ObjectiveKind::Energy(h.clone()),
        &spec,
        &cfg,
        Some(Reference { hamiltonian: &h, spectrum: &spectrum }),
    )?;
    let psi = result.best_state()?;
    let conc = concurrence_matrix(&psi)?;
    let texture = magnetization_texture(&psi)?;
    let trace: Vec<[f64; 2]> =
        result.per_restart[0].trace.iter().map(|&(it, v)| [it as f64, v]).collect();
    Ok(json!({
        "e0": spectrum.e0(),
        "e1": spectrum.e1(),
        "energy": result.best_energy,
        "fidelity": result.fidelity,
        "delta": result.delta,
        "iterations": result.per_restart[0].iterations,
        "trace": trace,
        "concurrence_svg": heatmap(&as_cells(&conc.values), "VQE concurrence"),
        "texture_svg": arrow_plot(&texture, "VQE texture"),
    })
    .to_string())
}

#[wasm_bindgen(js_name = solitonProfile)]
pub fn soliton_profile_js(dmi: f64, field: f64, sites: usize) -> std::result::Result<String, JsValue> {
    soliton_profile(dmi, field, sites).map_err(js_err)
}

#[wasm_bindgen(js_name = exactGround)]
pub fn exact_ground_js(sites: usize, dmi: f64, field: f64) -> std::result::Result<String, JsValue> {
    exact_ground(sites, dmi, field).map_err(js_err)
}

#[wasm_bindgen(js_name = vqeDemo)]
pub fn vqe_demo_js(
    sites: usize,
    layers: usize,
    dmi: f64,
    field: f64,
    seed: u32,
    max_iterations: usize,
) -> std::result::Result<String, JsValue> {
    vqe_demo(sites, layers, dmi, field, seed, max_iterations).map_err(js_err)
}
