//! Command-line entry point: generate, ingest, post-process, manage
//! datasets and serve.
//!
//! Failures print one JSON line `{"error": code, "message": text}` on
//! stderr. Exit status is 1 for runtime errors and 2 for usage errors.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::api::{self, ApiError, AppState, ServiceSettings, SpecInput};
use crate::config::{CliConfig, ConfigError};
use crate::model::{DatasetId, MethodId, NormKind, SelectionSpec, SimId};
use crate::pipeline::postprocess;
use crate::selection::{replay, save_selection};
use crate::store::Store;
use crate::synth::{generate_ensemble, EnsembleConfig, Manifest, MANIFEST_NAME};

#[derive(Debug, Parser)]
#[command(
    name = "ensel",
    version,
    about = "Post-process a simulation ensemble and curate training datasets"
)]
pub struct Cli {
    /// Store file (created on first use).
    #[arg(long, global = true, env = "ENSEL_STORE")]
    pub store: Option<PathBuf>,
    /// Settings file (TOML).
    #[arg(long, env = "ENSEL_CONFIG")]
    pub config: Option<PathBuf>,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic ensemble and its manifest.
    Generate {
        /// Ensemble config (TOML); defaults to the built-in 216-member ensemble.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Register the simulations listed in a manifest.
    Ingest {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Post-processing methods.
    #[command(subcommand)]
    Method(MethodCommand),
    /// Compute the missing distance records of a method.
    Postprocess {
        #[arg(long)]
        method: MethodId,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
    },
    /// Saved training datasets.
    #[command(subcommand)]
    Datasets(DatasetsCommand),
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "ENSEL_BIND")]
        bind: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MethodCommand {
    /// Create a method; prints its id.
    Create {
        /// Ground-truth simulation id.
        #[arg(long)]
        gt: SimId,
        /// Ground-truth time step.
        #[arg(long)]
        t: u32,
        #[arg(long)]
        norm: NormKind,
        #[arg(long)]
        desc: String,
    },
    List,
}

#[derive(Debug, Subcommand)]
pub enum DatasetsCommand {
    List,
    /// Write the export document to `--out` or stdout.
    Export {
        #[arg(long)]
        id: DatasetId,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Delete {
        #[arg(long)]
        id: DatasetId,
    },
    /// Recompute a dataset from its settings; exits 0 only if the members match.
    Replay {
        #[arg(long)]
        id: DatasetId,
    },
    /// Replay a selection spec (JSON) and save it; prints the new id.
    Save {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub usage: bool,
}

impl CliError {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            message: message.into(),
            usage: false,
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self {
            usage: true,
            ..Self::new("usage", message)
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.usage {
            2
        } else {
            1
        }
    }

    pub fn json_line(&self) -> String {
        serde_json::json!({ "error": self.code, "message": self.message }).to_string()
    }
}

impl<E: Into<ApiError>> From<E> for CliError {
    fn from(e: E) -> Self {
        let e: ApiError = e.into();
        Self::new(&e.code, e.message)
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        ApiError::unprocessable("config", e.to_string())
    }
}

impl From<crate::synth::SynthError> for ApiError {
    fn from(e: crate::synth::SynthError) -> Self {
        ApiError::unprocessable("ensemble", e.to_string())
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::internal(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

struct Context {
    store: Option<PathBuf>,
    config: CliConfig,
}

impl Context {
    fn open_store(&self) -> Result<Store, CliError> {
        let path = self.store.as_ref().or(self.config.store.as_ref()).ok_or_else(|| {
            CliError::usage("no store: pass --store, set ENSEL_STORE, or set `store` in the config file")
        })?;
        Ok(Store::open(path)?)
    }
}

fn read_ensemble_config(path: &Path) -> Result<EnsembleConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("config", format!("reading {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::new("config", format!("parsing {}: {e}", path.display())))
}

fn ids_line(ids: &[SimId]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn run(cli: Cli) -> CliResult {
    let config = CliConfig::load(cli.config.as_deref())?;
    init_logging(&config.log, cli.verbose);
    let ctx = Context {
        store: cli.store,
        config,
    };
    match cli.command {
        Command::Generate { config, seed, out } => generate(&ctx, config, seed, out),
        Command::Ingest { manifest } => ingest(&ctx, manifest),
        Command::Method(cmd) => method(&ctx, cmd),
        Command::Postprocess { method, jobs } => {
            let store = ctx.open_store()?;
            let workers = jobs.map_or_else(|| ctx.config.workers(), |j| j as usize);
            let report = postprocess(&store, method, workers)?;
            println!(
                "method {}: {} written, {} skipped, {} failed, {} flagged in {:.2}s",
                report.method_id,
                report.records_written,
                report.records_skipped,
                report.records_failed,
                report.records_flagged,
                report.wall_time
            );
            if !report.is_ok() {
                return Err(CliError::new("postprocess_incomplete", report.errors.join("; ")));
            }
            Ok(())
        }
        Command::Datasets(cmd) => datasets(&ctx, cmd),
        Command::Serve { bind } => {
            let store = ctx.open_store()?;
            let bind = bind.unwrap_or_else(|| ctx.config.bind.clone());
            let settings = ServiceSettings {
                sync_threshold: ctx.config.sync_threshold,
                workers: ctx.config.workers(),
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(&bind).await?;
                println!("listening on http://{}", listener.local_addr()?);
                std::io::stdout().flush()?;
                api::serve(AppState::new(store, settings), listener).await
            })?;
            Ok(())
        }
    }
}

fn init_logging(level: &str, verbose: u8) {
    let level = match verbose {
        0 => level,
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn generate(ctx: &Context, config: Option<PathBuf>, seed: Option<u64>, out: Option<PathBuf>) -> CliResult {
    let mut ensemble = match config.as_ref().or(ctx.config.ensemble_config.as_ref()) {
        Some(path) => read_ensemble_config(path)?,
        None => EnsembleConfig::default(),
    };
    if let Some(seed) = seed {
        ensemble.seed = seed;
    }
    let out = out
        .or_else(|| ctx.config.data_dir.clone())
        .ok_or_else(|| CliError::usage("no output directory: pass --out or set `data_dir` in the config file"))?;
    let sims = generate_ensemble(&ensemble, &out)?;
    println!("generated {} simulations in {}", sims.len(), out.display());
    Ok(())
}

fn ingest(ctx: &Context, manifest: Option<PathBuf>) -> CliResult {
    let path = manifest
        .or_else(|| ctx.config.data_dir.as_ref().map(|d| d.join(MANIFEST_NAME)))
        .ok_or_else(|| CliError::usage("no manifest: pass --manifest or set `data_dir` in the config file"))?;
    let manifest = Manifest::read(&path)?;
    let store = ctx.open_store()?;
    store.set_ensemble(&manifest.config.meta())?;
    store.insert_simulations(&manifest.simulations)?;
    println!("ingested {} simulations", manifest.simulations.len());
    Ok(())
}

fn method(ctx: &Context, cmd: MethodCommand) -> CliResult {
    let store = ctx.open_store()?;
    match cmd {
        MethodCommand::Create { gt, t, norm, desc } => {
            store.get_simulation(gt)?;
            let gt_id = match store.find_ground_truth(gt)? {
                Some(id) => id,
                None => store.register_ground_truth(gt)?,
            };
            println!("{}", store.create_method(gt_id, t, norm, &desc)?);
        }
        MethodCommand::List => {
            for m in store.list_methods()? {
                println!(
                    "{}\tgt={}@{}\t{}\t{} records\t{}",
                    m.method_id,
                    store.ground_truth_sim(m.ground_truth_id)?,
                    m.gt_time_step,
                    m.norm,
                    store.count_records(m.method_id)?,
                    m.description
                );
            }
        }
    }
    Ok(())
}

fn datasets(ctx: &Context, cmd: DatasetsCommand) -> CliResult {
    let store = ctx.open_store()?;
    match cmd {
        DatasetsCommand::List => {
            for d in store.list_datasets()? {
                println!(
                    "{}\t{}\t{}\t{} members\tmethod {} t={}\t\"{}\"\t{}",
                    d.dataset_id,
                    d.created_at.to_rfc3339(),
                    d.selection_type,
                    d.member_count,
                    d.method_id,
                    d.time_step,
                    d.filter_string,
                    d.description
                );
            }
        }
        DatasetsCommand::Export { id, out } => match out {
            Some(path) => {
                store.export_dataset_to(id, &path)?;
                println!("wrote {}", path.display());
            }
            None => {
                let doc = serde_json::to_string_pretty(&store.export_dataset(id)?)
                    .map_err(|e| ApiError::internal(e.to_string()))?;
                let mut out = std::io::stdout().lock();
                match writeln!(out, "{doc}") {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                    _ => {}
                }
            }
        },
        DatasetsCommand::Delete { id } => {
            store.delete_dataset(id)?;
            println!("deleted dataset {id}");
        }
        DatasetsCommand::Replay { id } => {
            let dataset = store.load_dataset(id)?;
            let replayed = replay(&dataset.spec, &store)?;
            println!("{}", ids_line(&replayed));
            let stored: BTreeSet<SimId> = dataset.member_sim_ids.iter().copied().collect();
            let now: BTreeSet<SimId> = replayed.iter().copied().collect();
            if stored != now {
                let missing: Vec<SimId> = stored.difference(&now).copied().collect();
                let extra: Vec<SimId> = now.difference(&stored).copied().collect();
                println!("MISMATCH");
                return Err(CliError::new(
                    "replay_mismatch",
                    format!(
                        "dataset {id}: missing [{}], extra [{}]",
                        ids_line(&missing),
                        ids_line(&extra)
                    ),
                ));
            }
            println!("MATCH");
        }
        DatasetsCommand::Save { spec } => {
            let text = std::fs::read_to_string(&spec)
                .map_err(|e| CliError::new("spec", format!("reading {}: {e}", spec.display())))?;
            let input: SpecInput = serde_json::from_str(&text)
                .map_err(|e| CliError::new("spec", format!("parsing {}: {e}", spec.display())))?;
            let (id, members) = save_selection(&SelectionSpec::from(input), &store)?;
            println!("{id}");
            println!("{}", ids_line(&members));
        }
    }
    Ok(())
}

/// Parse arguments, run, and report failures as a JSON line on stderr.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.json_line());
            ExitCode::from(e.exit_code())
        }
    }
}
