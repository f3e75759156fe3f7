//! Config-driven experiment runs: exact reference, VQE layer sweeps, soliton
//! analytics, and the CSV/JSON/SVG artifacts they produce.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::clock::Stopwatch;
use crate::ansatz::{AnsatzSpec, EntanglerTopology};
use crate::entanglement::{
    concurrence_matrix, magnetization_texture, ratio_to_csv, relative_concurrence, texture_to_csv, ConcurrenceMatrix,
};
use crate::exact::{ground_space_projector, degeneracy_tolerance, lowest_eigenpairs, Spectrum, SpectrumSummary};
use crate::pauli::{build_chain_hamiltonian, Boundary, ChainParams};
use crate::plot;
use crate::state::StateVector;
use crate::soliton::{
    analytic_texture, classical_energy, continuum_chain_energy, soliton_solution, solve_kappa, ContinuumParams,
    KappaOutcome, SolitonReport,
};
use crate::vqe::{run_layer_sweep, GradientMode, ObjectiveKind, OptimizerConfig, Reference, VqeResult};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Chain couplings in units of `J` (which is fixed to 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub n_qubits: usize,
    /// `D/J`.
    #[serde(default)]
    pub dmi: f64,
    /// `B/J`.
    #[serde(default)]
    pub field: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ChainConfig {
    pub fn params(&self) -> ChainParams {
        ChainParams { n_qubits: self.n_qubits, j_exchange: 1.0, dmi: self.dmi, field: self.field, boundary: self.boundary }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    /// Layer counts to run; accepts `3`, `[1, 2, 6]` or `"1..6"` (inclusive).
    #[serde(deserialize_with = "layers_from_any")]
    pub layers: Vec<usize>,
    #[serde(default)]
    pub entangler_topology: EntanglerTopology,
    /// Seed each depth with the previous depth's best angles plus a zero layer.
    #[serde(default)]
    pub warm_start: bool,
}

fn layers_from_any<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Any {
        One(usize),
        Many(Vec<usize>),
        Text(String),
    }
    match Any::deserialize(d)? {
        Any::One(n) => Ok(vec![n]),
        Any::Many(v) => Ok(v),
        Any::Text(t) => parse_layers(&t).map_err(serde::de::Error::custom),
    }
}

/// Parses `"4"`, `"1,2,6"` or an inclusive range `"1..6"`.
pub fn parse_layers(text: &str) -> std::result::Result<Vec<usize>, String> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| format!("bad layer range {text:?}"))?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad layer range {text:?}"))?;
        return Ok((a..=b).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| format!("bad layer count {t:?}"))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    VqeEnergy,
    FidelityMax,
    ExactOnly,
    SolitonOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub json: bool,
    #[serde(default = "yes")]
    pub svg: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), csv: true, json: true, svg: true }
    }
}

/// Pass-through physical units; nothing is computed from these.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_mry: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_tesla: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub chain: ChainConfig,
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub mode: Mode,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Base seed; restart `r` at every depth uses `seed + r`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub metadata: Metadata,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg.effective())
    }

    /// Parses a JSON value after dotted-path overrides such as
    /// `("chain.dmi", "0.5")` have been applied to it.
    pub fn from_value_with_overrides(mut value: serde_json::Value, overrides: &[(String, String)]) -> Result<Self> {
        for (path, raw) in overrides {
            apply_override(&mut value, path, raw)?;
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg.effective())
    }

    /// The config as actually run: the optimizer seed follows `seed`.
    pub fn effective(mut self) -> Self {
        self.optimizer.base_seed = self.seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.params().validate().map_err(|e| Error::Config(e.to_string()))?;
        let layers = &self.ansatz.layers;
        if layers.is_empty() {
            return Err(Error::Config("layer sweep is empty".into()));
        }
        if layers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("layer sweep {layers:?} is not strictly ascending")));
        }
        if layers[0] == 0 {
            return Err(Error::Config("layer counts start at 1".into()));
        }
        self.optimizer.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Sets `path` (dot separated) inside `value`. The raw text is parsed as JSON
/// when possible and used as a string otherwise.
pub fn apply_override(value: &mut serde_json::Value, path: &str, raw: &str) -> Result<()> {
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = value;
    let keys: Vec<&str> = path.split('.').collect();
    for (depth, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(Error::Config(format!("bad override path {path:?}")));
        }
        let obj = match cursor {
            serde_json::Value::Object(map) => map,
            serde_json::Value::Null => {
                *cursor = serde_json::Value::Object(Default::default());
                cursor.as_object_mut().expect("just created")
            }
            _ => return Err(Error::Config(format!("override {path:?} descends into a non-object"))),
        };
        if depth + 1 == keys.len() {
            obj.insert(key.to_string(), parsed);
            return Ok(());
        }
        cursor = obj.entry(key.to_string()).or_insert(serde_json::Value::Null);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFailure {
    pub layers: usize,
    pub error: String,
}

/// One row of the energy-versus-depth table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub layers: usize,
    pub mean: f64,
    pub std: f64,
    pub best: f64,
    pub delta: Option<f64>,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolitonReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_solution: Option<NoSolution>,
    /// Eq.-2 energy of the sampled analytic texture on this chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_energy: Option<f64>,
    /// Continuum estimate of the same quantity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuum_energy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoSolution {
    pub pi_k0: f64,
    pub four_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub status: RunStatus,
    /// Paths relative to the output directory, in write order.
    pub files: Vec<String>,
    pub timings: BTreeMap<String, f64>,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<SpectrumSummary>,
    #[serde(default)]
    pub sweep: Vec<SweepRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonSummary>,
    #[serde(default)]
    pub failures: Vec<LayerFailure>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Everything a run computed, kept in memory for callers that want more than
/// the files (tests, the reproduction summary).
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub spectrum: Option<Spectrum>,
    pub layers: Vec<(usize, Result<VqeResult>)>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_state(&mut self, name: &str, psi: &StateVector) -> Result<()> {
        psi.write_binary(std::io::BufWriter::new(fs::File::create(self.dir.join(name))?))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    Ok(run_experiment_detailed(cfg)?.manifest)
}

pub fn run_experiment_detailed(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let cfg = cfg.clone().effective();
    let out = &cfg.outputs;
    fs::create_dir_all(&out.dir)?;
    let mut writer = Writer { dir: out.dir.clone(), files: vec![] };
    let mut timings = BTreeMap::new();
    let chain = cfg.chain.params();
    let n = chain.n_qubits;

    let soliton = if matches!(cfg.mode, Mode::ExactOnly) { None } else { Some(soliton_summary(&chain)?) };
    if let Some(s) = &soliton {
        if out.json {
            writer.write("soliton.json", &to_json(s))?;
        }
        if out.csv && s.solution.is_some() {
            let sol = soliton_solution(&ContinuumParams::from_chain(&chain))?;
            writer.write("texture_analytic.csv", &texture_to_csv(&analytic_texture(&sol, n)?))?;
        }
    }

    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        status: RunStatus::Complete,
        files: vec![],
        timings: BTreeMap::new(),
        seeds: vec![],
        exact: None,
        sweep: vec![],
        soliton,
        failures: vec![],
    };
    if matches!(cfg.mode, Mode::SolitonOnly) {
        return finish(manifest, writer, timings, None, vec![]);
    }

    let clock = Stopwatch::start();
    let h = build_chain_hamiltonian(&chain)?;
    let spectrum = lowest_eigenpairs(&h, 2)?;
    timings.insert("exact".to_string(), clock.seconds());
    manifest.exact = Some(spectrum.summary());
    let exact_conc = concurrence_matrix(spectrum.ground_state())?;
    if out.json {
        let mut doc = serde_json::to_value(spectrum.summary())?;
        doc["eigenvalues"] = serde_json::to_value(&spectrum.eigenvalues)?;
        writer.write("spectrum.json", &to_json(&doc))?;
    }
    if out.csv {
        writer.write_state("state_exact.bin", spectrum.ground_state())?;
        writer.write("concurrence_exact.csv", &exact_conc.to_csv())?;
        writer.write("texture_exact.csv", &texture_to_csv(&magnetization_texture(spectrum.ground_state())?))?;
    }
    if matches!(cfg.mode, Mode::ExactOnly) {
        return finish(manifest, writer, timings, Some(spectrum), vec![]);
    }

    let kind = match cfg.mode {
        Mode::FidelityMax => {
            ObjectiveKind::NegativeFidelity(ground_space_projector(&spectrum, degeneracy_tolerance(spectrum.e0()))?)
        }
        _ => ObjectiveKind::Energy(h.clone()),
    };
    let base = AnsatzSpec::new(n, cfg.ansatz.layers[0], cfg.ansatz.entangler_topology)?;
    let clock = Stopwatch::start();
    let results = run_layer_sweep(
        &kind,
        &base,
        &cfg.ansatz.layers,
        &cfg.optimizer,
        Some(Reference { hamiltonian: &h, spectrum: &spectrum }),
        cfg.ansatz.warm_start,
    );
    timings.insert("vqe".to_string(), clock.seconds());
    manifest.seeds = (0..cfg.optimizer.restarts as u64).map(|r| cfg.seed.wrapping_add(r)).collect();

    let mut trace = String::from("layers,restart,iteration,objective\n");
    let mut per_layer_json = Vec::new();
    for (layers, result) in &results {
        match result {
            Ok(r) => {
                timings.insert(format!("vqe_layers_{layers}"), r.wall_time);
                manifest.sweep.push(sweep_row(*layers, r));
                for (restart, rec) in r.per_restart.iter().enumerate() {
                    for (it, value) in &rec.trace {
                        let _ = writeln!(trace, "{layers},{restart},{it},{value:.15e}");
                    }
                }
                if out.csv {
                    let psi = r.best_state()?;
                    let conc = concurrence_matrix(&psi)?;
                    writer.write_state(&format!("state_layers_{layers}.bin"), &psi)?;
                    writer.write(&format!("texture_layers_{layers}.csv"), &texture_to_csv(&magnetization_texture(&psi)?))?;
                    writer.write(&format!("concurrence_vqe_layers_{layers}.csv"), &conc.to_csv())?;
                    writer.write(
                        &format!("concurrence_ratio_layers_{layers}.csv"),
                        &ratio_to_csv(&relative_concurrence(&conc, &exact_conc)?),
                    )?;
                }
                per_layer_json.push(serde_json::json!({ "layers": layers, "result": r }));
            }
            Err(e) => {
                manifest.failures.push(LayerFailure { layers: *layers, error: e.to_string() });
                per_layer_json.push(serde_json::json!({ "layers": layers, "error": e.to_string() }));
            }
        }
    }
    if manifest.sweep.is_empty() {
        let reason = manifest.failures.first().map(|f| f.error.clone()).unwrap_or_default();
        return Err(Error::Optimization(format!("every layer run failed: {reason}")));
    }
    if !manifest.failures.is_empty() {
        manifest.status = RunStatus::Partial;
    }
    if out.csv {
        writer.write("sweep.csv", &sweep_to_csv(&manifest.sweep))?;
        writer.write("trace.csv", &trace)?;
    }
    if out.json {
        writer.write("results.json", &to_json(&per_layer_json))?;
    }
    finish(manifest, writer, timings, Some(spectrum), results)
}

fn finish(
    mut manifest: RunManifest,
    mut writer: Writer,
    mut timings: BTreeMap<String, f64>,
    spectrum: Option<Spectrum>,
    layers: Vec<(usize, Result<VqeResult>)>,
) -> Result<RunOutcome> {
    manifest.files = writer.files.clone();
    if manifest.config.outputs.svg {
        let clock = Stopwatch::start();
        for path in emit_svg_plots(&manifest, &writer.dir)? {
            let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            writer.files.push(name);
        }
        timings.insert("svg".to_string(), clock.seconds());
    }
    manifest.files = writer.files.clone();
    manifest.timings = timings;
    fs::write(writer.dir.join(MANIFEST_FILE), to_json(&manifest))?;
    Ok(RunOutcome { manifest, spectrum, layers })
}

fn soliton_summary(chain: &ChainParams) -> Result<SolitonSummary> {
    let params = ContinuumParams::from_chain(chain);
    let mut summary = SolitonSummary { solution: None, no_solution: None, classical_energy: None, continuum_energy: None };
    if params.validate().is_err() || params.m() == 0.0 {
        return Ok(summary);
    }
    match solve_kappa(&params)? {
        KappaOutcome::NoSolution { pi_k0, four_m } => summary.no_solution = Some(NoSolution { pi_k0, four_m }),
        KappaOutcome::Soliton(_) => {
            let sol = soliton_solution(&params)?;
            summary.solution = Some(sol.report());
            if chain.n_qubits >= 2 {
                summary.classical_energy = Some(classical_energy(&analytic_texture(&sol, chain.n_qubits)?, chain)?);
                summary.continuum_energy = Some(continuum_chain_energy(&sol, chain)?);
            }
        }
    }
    Ok(summary)
}

fn sweep_row(layers: usize, r: &VqeResult) -> SweepRow {
    SweepRow {
        layers,
        mean: r.mean_energy.unwrap_or(r.mean_value),
        std: r.std_energy.unwrap_or(r.std_value),
        best: r.best_energy.unwrap_or(r.best_value),
        delta: r.delta,
        fidelity: r.fidelity,
    }
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
    let mut out = String::from("layers,mean,std,best,delta,fidelity\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.12},{:.12},{:.12},{},{}",
            r.layers,
            r.mean,
            r.std,
            r.best,
            opt(r.delta),
            opt(r.fidelity)
        );
    }
    out
}

pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepRow>> {
    let bad = |line: &str| Error::Config(format!("bad sweep row {line:?}"));
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 6 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            Ok(SweepRow {
                layers: cells[0].parse().map_err(|_| bad(line))?,
                mean: num(cells[1])?,
                std: num(cells[2])?,
                best: num(cells[3])?,
                delta: opt(cells[4])?,
                fidelity: opt(cells[5])?,
            })
        })
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Renders every CSV the manifest lists to an SVG next to it.
pub fn emit_svg_plots(manifest: &RunManifest, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let exact_e0 = manifest.exact.as_ref().map(|s| s.e0);
    for name in &manifest.files {
        let Some(stem) = name.strip_suffix(".csv") else { continue };
        let path = dir.join(name);
        if !path.exists() {
            return Err(Error::Config(format!("manifest lists missing file {}", path.display())));
        }
        let text = fs::read_to_string(&path)?;
        let svg = if stem == "sweep" {
            plot::sweep_plot(&sweep_from_csv(&text)?, exact_e0)
        } else if stem.starts_with("concurrence_ratio") {
            plot::heatmap(&ratio_from_csv(&text)?, &title(stem))
        } else if stem.starts_with("concurrence") {
            let m = ConcurrenceMatrix::from_csv(&text)?;
            plot::heatmap(&m.values.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect::<Vec<_>>(), &title(stem))
        } else if stem.starts_with("texture") {
            plot::arrow_plot(&crate::entanglement::texture_from_csv(&text)?, &title(stem))
        } else {
            continue;
        };
        let out = dir.join(format!("{stem}.svg"));
        fs::write(&out, svg)?;
        written.push(out);
    }
    Ok(written)
}

fn title(stem: &str) -> String {
    stem.replace('_', " ")
}

fn ratio_from_csv(text: &str) -> Result<Vec<Vec<Option<f64>>>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| {
                    let c = c.trim();
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse().map(Some).map_err(|e| Error::Config(format!("bad ratio cell {c:?}: {e}")))
                    }
                })
                .collect()
        })
        .collect()
}

/// Named runs that together cover the main sweeps and the
/// supplemental regimes. `reduced` trims restarts and iteration caps for
/// quick checks.
pub fn paper_suite(root: &Path, reduced: bool) -> Vec<(String, ExperimentConfig)> {
    let optimizer = OptimizerConfig {
        gradient_mode: GradientMode::AdjointAnalytic,
        restarts: if reduced { 2 } else { 5 },
        max_iterations: if reduced { 5_000 } else { 50_000 },
        ..OptimizerConfig::default()
    };
    let soliton = ChainConfig { n_qubits: 10, dmi: 0.63, field: 3.36e-3, boundary: Boundary::Open };
    let metadata = Metadata { j_mry: Some(1.88), field_tesla: Some(0.74), label: None };
    let make = |name: &str, chain: ChainConfig, layers: Vec<usize>, mode: Mode| {
        let cfg = ExperimentConfig {
            chain,
            ansatz: AnsatzConfig { layers, entangler_topology: EntanglerTopology::Ring, warm_start: false },
            optimizer,
            mode,
            outputs: OutputConfig { dir: root.join(name), ..OutputConfig::default() },
            seed: 0,
            metadata: Metadata { label: Some(name.to_string()), ..metadata.clone() },
        };
        (name.to_string(), cfg)
    };
    let with = |dmi: f64, field: f64| ChainConfig { dmi, field, ..soliton };
    vec![
        make("soliton_analytics", soliton, vec![1], Mode::SolitonOnly),
        make("layer_sweep", soliton, (1..=6).collect(), Mode::VqeEnergy),
        make("fidelity_max_9_layers", soliton, vec![9], Mode::FidelityMax),
        make("energy_9_layers", soliton, vec![9], Mode::VqeEnergy),
        make("heisenberg", with(0.0, 0.0), vec![1], Mode::VqeEnergy),
        make("field_only", with(0.0, 1.0), vec![1], Mode::VqeEnergy),
        make("dmi_only", with(1.0, 0.0), vec![8], Mode::VqeEnergy),
        make("strong_dmi_field", with(5.0, 5.0), vec![8], Mode::VqeEnergy),
    ]
}
