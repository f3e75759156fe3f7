use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use chiral_vqe::entanglement::{concurrence_matrix, magnetization_texture, texture_to_csv};
use chiral_vqe::exact::lowest_eigenpairs;
use chiral_vqe::experiment::{
    emit_svg_plots, paper_suite, run_experiment, ExperimentConfig, Mode, RunManifest, RunStatus,
};
use chiral_vqe::pauli::build_chain_hamiltonian;
use chiral_vqe::soliton::{analytic_texture, soliton_solution, ContinuumParams};
use chiral_vqe::StateVector;
use clap::{Parser, Subcommand, ValueEnum};

mod overrides;
mod report;

/// Worker threads for restarts and pair maps; unset means one per core.
const THREADS_ENV: &str = "CHIRAL_VQE_THREADS";

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "chiral-vqe", version, about = "VQE and exact studies of a chiral spin chain")]
#[command(after_help = "Any config field can be overridden with a flag named by its JSON path, \
    e.g. --chain.dmi 0.5 --ansatz.layers 1..6 --optimizer.restarts 3 --outputs.dir out")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Layer sweep of the variational solver against the exact reference.
    Vqe {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Objective::Energy)]
        objective: Objective,
    },
    /// Lowest eigenpairs, ground-state concurrence and texture.
    Exact {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Continuum soliton-lattice solution for the configured couplings.
    Soliton {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Pairwise concurrence CSV of a saved state or the exact ground state.
    Concurrence {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-site magnetization CSV of a saved state, the exact ground state,
    /// or the analytic soliton profile.
    Texture {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "analytic")]
        state: Option<PathBuf>,
        #[arg(long)]
        analytic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Renders the CSVs listed in a run manifest to SVG.
    Plot {
        manifest: PathBuf,
    },
    /// Runs every figure and supplemental regime into one directory tree.
    ReproducePaper {
        #[arg(long, default_value = "paper-output")]
        out: PathBuf,
        /// Two restarts and a 5000-iteration cap instead of five and 50000.
        #[arg(long)]
        reduced: bool,
        /// Comma-separated subset of run names.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Objective {
    Energy,
    Fidelity,
}

fn main() -> ExitCode {
    let (argv, overrides) = match overrides::split(std::env::args().collect()) {
        Ok(split) => split,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cli = Cli::parse_from(argv);
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match run(cli.command, &overrides) {
        Ok(RunStatus::Complete) => ExitCode::SUCCESS,
        Ok(RunStatus::Partial) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw.trim().parse().with_context(|| format!("{THREADS_ENV}={raw:?} is not a count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use chiral_vqe::Error as E;
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<E>() {
            return match err {
                E::NonConvergence { .. }
                | E::Spectrum(_)
                | E::NonFinite(_)
                | E::Concurrence(_)
                | E::Optimization(_)
                | E::NoSoliton(_) => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            };
        }
    }
    EXIT_CONFIG
}

fn load_config(path: Option<&Path>, mode: Mode, overrides: &[(String, String)]) -> anyhow::Result<ExperimentConfig> {
    let mut value = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| chiral_vqe::Error::Config(format!("{}: {e}", p.display())))?
        }
        None => report::default_config_value(),
    };
    value["mode"] = serde_json::to_value(mode)?;
    Ok(ExperimentConfig::from_value_with_overrides(value, overrides)?)
}

fn run(command: Command, overrides: &[(String, String)]) -> anyhow::Result<RunStatus> {
    match command {
        Command::Vqe { config, objective } => {
            let mode = match objective {
                Objective::Energy => Mode::VqeEnergy,
                Objective::Fidelity => Mode::FidelityMax,
            };
            experiment(config.as_deref(), mode, overrides)
        }
        Command::Exact { config } => experiment(config.as_deref(), Mode::ExactOnly, overrides),
        Command::Soliton { config } => experiment(config.as_deref(), Mode::SolitonOnly, overrides),
        Command::Concurrence { config, state, out } => {
            let psi = state_or_ground(config.as_deref(), state.as_deref(), overrides)?;
            emit(out.as_deref(), &concurrence_matrix(&psi)?.to_csv())?;
            Ok(RunStatus::Complete)
        }
        Command::Texture { config, state, analytic, out } => {
            let rows = if analytic {
                let cfg = load_config(config.as_deref(), Mode::SolitonOnly, overrides)?;
                let chain = cfg.chain.params();
                analytic_texture(&soliton_solution(&ContinuumParams::from_chain(&chain))?, chain.n_qubits)?
            } else {
                magnetization_texture(&state_or_ground(config.as_deref(), state.as_deref(), overrides)?)?
            };
            emit(out.as_deref(), &texture_to_csv(&rows))?;
            Ok(RunStatus::Complete)
        }
        Command::Plot { manifest } => {
            if !overrides.is_empty() {
                bail!(chiral_vqe::Error::Config("plot takes no config overrides".into()));
            }
            let m = RunManifest::load(&manifest).with_context(|| format!("loading {}", manifest.display()))?;
            let dir = manifest.parent().unwrap_or(Path::new("."));
            for path in emit_svg_plots(&m, dir)? {
                println!("{}", path.display());
            }
            Ok(RunStatus::Complete)
        }
        Command::ReproducePaper { out, reduced, only } => reproduce(&out, reduced, &only, overrides),
    }
}

fn experiment(config: Option<&Path>, mode: Mode, overrides: &[(String, String)]) -> anyhow::Result<RunStatus> {
    let cfg = load_config(config, mode, overrides)?;
    let manifest = run_experiment(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&report::summarize(&manifest))?);
    for f in &manifest.failures {
        eprintln!("warning: {} layers failed: {}", f.layers, f.error);
    }
    Ok(manifest.status)
}

fn state_or_ground(
    config: Option<&Path>,
    state: Option<&Path>,
    overrides: &[(String, String)],
) -> anyhow::Result<StateVector> {
    if let Some(path) = state {
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        return Ok(StateVector::read_binary(io::BufReader::new(file))?);
    }
    let cfg = load_config(config, Mode::ExactOnly, overrides)?;
    let spectrum = lowest_eigenpairs(&build_chain_hamiltonian(&cfg.chain.params())?, 1)?;
    Ok(spectrum.ground_state().clone())
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn reproduce(root: &Path, reduced: bool, only: &[String], overrides: &[(String, String)]) -> anyhow::Result<RunStatus> {
    let suite = paper_suite(root, reduced);
    if let Some(unknown) = only.iter().find(|name| !suite.iter().any(|(n, _)| n == *name)) {
        let names: Vec<&str> = suite.iter().map(|(n, _)| n.as_str()).collect();
        bail!(chiral_vqe::Error::Config(format!("unknown run {unknown:?}; choose from {}", names.join(", "))));
    }
    let mut status = RunStatus::Complete;
    let mut summaries = serde_json::Map::new();
    for (name, cfg) in suite {
        if !only.is_empty() && !only.contains(&name) {
            continue;
        }
        let value = serde_json::to_value(&cfg)?;
        let cfg = ExperimentConfig::from_value_with_overrides(value, overrides)?;
        eprintln!("running {name}");
        match run_experiment(&cfg) {
            Ok(manifest) => {
                if manifest.status == RunStatus::Partial {
                    status = RunStatus::Partial;
                }
                summaries.insert(name, report::summarize(&manifest));
            }
            Err(e) => {
                eprintln!("warning: {name} failed: {e}");
                status = RunStatus::Partial;
                summaries.insert(name, serde_json::json!({ "error": e.to_string() }));
            }
        }
    }
    let summary = serde_json::to_string_pretty(&serde_json::Value::Object(summaries))?;
    fs::create_dir_all(root)?;
    fs::write(root.join("summary.json"), format!("{summary}\n"))?;
    println!("{summary}");
    Ok(status)
}
