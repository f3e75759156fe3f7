use chiral_vqe::experiment::RunManifest;
use serde_json::{json, Value};

/// Built-in starting point: the ten-site soliton chain, layers 1 to 6.
pub fn default_config_value() -> Value {
    json!({
        "chain": { "n_qubits": 10, "dmi": 0.63, "field": 0.00336, "boundary": "open" },
        "ansatz": { "layers": [1, 2, 3, 4, 5, 6], "entangler_topology": "ring" },
        "mode": "vqe_energy",
        "outputs": { "dir": "out" },
        "seed": 0,
        "metadata": { "j_mry": 1.88, "field_tesla": 0.74 }
    })
}

/// The headline numbers of a run, for stdout and the reproduction summary.
pub fn summarize(m: &RunManifest) -> Value {
    let mut out = json!({
        "status": m.status,
        "output_dir": m.config.outputs.dir,
        "mode": m.config.mode,
        "chain": m.config.chain,
    });
    if let Some(exact) = &m.exact {
        out["exact"] = json!({ "e0": exact.e0, "e1": exact.e1, "degeneracy": exact.degeneracy });
    }
    if !m.sweep.is_empty() {
        out["sweep"] = serde_json::to_value(&m.sweep).unwrap_or(Value::Null);
        let best_delta = m.sweep.iter().filter_map(|r| r.delta).reduce(f64::min);
        out["best_delta"] = json!(best_delta);
    }
    if let Some(s) = &m.soliton {
        out["soliton"] = serde_json::to_value(s).unwrap_or(Value::Null);
    }
    if !m.failures.is_empty() {
        out["failures"] = serde_json::to_value(&m.failures).unwrap_or(Value::Null);
    }
    out
}
