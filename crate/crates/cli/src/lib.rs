//! Command-line front end: ingest, build, validate, simulate and serve.

use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tracing::{info, warn};

use dockpuzzle_core::pipeline::{self, PipelineConfig, ScriptStep};
use dockpuzzle_core::quiz::{load_bank_file, QuizBank};
use dockpuzzle_core::{LevelPack, Tier};

pub mod serve;

pub const DEFAULT_CONFIG: &str = "pipeline.toml";

/// Exit status for a run that completed but found problems.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Exit status for configuration or I/O errors.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dockpuzzle",
    version,
    about = "Protein docking puzzle asset pipeline and engine"
)]
pub struct Cli {
    /// Pipeline configuration file.
    #[arg(long, global = true, default_value = DEFAULT_CONFIG)]
    pub config: PathBuf,

    /// Log filter, e.g. `warn` or `dockpuzzle_core=debug`.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse PDB files into the structure cache.
    Ingest(IngestArgs),
    /// Slice every configured complex and write pieces plus the level pack.
    Build(BuildArgs),
    /// Check a built pack against the asset invariants.
    Validate(ValidateArgs),
    /// Play a scripted session headlessly and write its transcript.
    Simulate(SimulateArgs),
    /// Host the session protocol over a websocket or standard streams.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Files or directories; defaults to the configured PDB directory.
    pub paths: Vec<PathBuf>,
    /// Cache directory; defaults to the configured one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ingest only this entry's file.
    #[arg(long)]
    pub entry: Option<String>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Output directory; defaults to the configured one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Build only this entry.
    #[arg(long)]
    pub entry: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Pack file or directory; defaults to the configured output directory.
    pub pack: Option<PathBuf>,
    /// Check only this entry's pieces.
    #[arg(long)]
    pub entry: Option<String>,
    /// Write the report as JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Pack file or directory; defaults to the configured output directory.
    #[arg(long)]
    pub pack: Option<PathBuf>,
    /// NDJSON script of steps; defaults to a built-in demo.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Session seed; overridden by a seed in the script's join.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Outbound transcript file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the inbound lines, for replay.
    #[arg(long)]
    pub inbound: Option<PathBuf>,
    /// Quiz bank JSON; the bundled sample bank when absent.
    #[arg(long)]
    pub quiz_bank: Option<PathBuf>,
    /// Quiz tier, `gcse` or `a-level`; the configured tier when absent.
    #[arg(long, value_parser = parse_tier)]
    pub tier: Option<Tier>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Pack file or directory; defaults to the configured output directory.
    #[arg(long)]
    pub pack: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    /// Directory of static client files served at `/`.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
    /// Speak the protocol on stdin/stdout instead of a socket.
    #[arg(long)]
    pub stdio: bool,
    /// Seed used when a join does not carry one.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Quiz bank JSON; the bundled sample bank when absent.
    #[arg(long)]
    pub quiz_bank: Option<PathBuf>,
}

fn parse_tier(s: &str) -> Result<Tier, String> {
    match s.to_ascii_lowercase().as_str() {
        "gcse" => Ok(Tier::Gcse),
        "a_level" | "a-level" | "alevel" => Ok(Tier::ALevel),
        _ => Err(format!("unknown tier {s:?}; expected GCSE or A_Level")),
    }
}

pub fn init_logging(filter: &str) {
    let filter = tracing_subscriber::EnvFilter::try_new(filter)
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_target(false)
        .with_ansi(std::io::stderr().is_terminal())
        .try_init();
}

/// Run a parsed command line and map the outcome to an exit status.
pub fn run(cli: Cli) -> ExitCode {
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(&cli.config, a),
        Command::Build(a) => cmd_build(&cli.config, a),
        Command::Validate(a) => cmd_validate(&cli.config, a),
        Command::Simulate(a) => cmd_simulate(&cli.config, a),
        Command::Serve(a) => cmd_serve(&cli.config, a),
    }
}

/// Load the config if present; otherwise fall back to defaults rooted at the
/// working directory.
fn load_config(path: &Path) -> Result<PipelineConfig> {
    if path.exists() {
        PipelineConfig::load(path).with_context(|| format!("loading {}", path.display()))
    } else if path == Path::new(DEFAULT_CONFIG) {
        warn!("{} not found; using built-in defaults", path.display());
        Ok(PipelineConfig::default())
    } else {
        bail!("config file {} not found", path.display())
    }
}

fn restrict(config: PipelineConfig, entry: Option<&str>) -> Result<PipelineConfig> {
    match entry {
        Some(code) => Ok(config.only(&code.to_ascii_lowercase())?),
        None => Ok(config),
    }
}

fn cmd_ingest(config_path: &Path, args: &IngestArgs) -> Result<bool> {
    let config = restrict(load_config(config_path)?, args.entry.as_deref())?;
    let cache = args.out.clone().unwrap_or_else(|| config.cache_dir.clone());
    let paths = if !args.paths.is_empty() {
        args.paths.clone()
    } else if args.entry.is_some() {
        config
            .entries
            .iter()
            .map(|e| config.pdb_dir.join(e.file_name()))
            .collect()
    } else {
        vec![config.pdb_dir.clone()]
    };
    let report = pipeline::ingest(&paths, &cache)?;
    for e in &report.entries {
        println!(
            "{:<6} {:<8} atoms={:<6} chains={}",
            e.code,
            format!("{:?}", e.status).to_ascii_lowercase(),
            e.atoms,
            e.chains.iter().collect::<String>()
        );
    }
    for (path, message) in &report.failures {
        eprintln!("failed {}: {message}", path.display());
    }
    info!(
        cached = report.entries.len(),
        failed = report.failures.len(),
        dir = %cache.display(),
        "ingest done"
    );
    Ok(report.failures.is_empty())
}

fn cmd_build(config_path: &Path, args: &BuildArgs) -> Result<bool> {
    let mut config = restrict(load_config(config_path)?, args.entry.as_deref())?;
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    let missing = config.missing_reference_entries();
    if !missing.is_empty() && args.entry.is_none() {
        warn!(?missing, "config lacks reference entries");
    }
    let (pack, report) = pipeline::build(&config)?;
    for e in &report.entries {
        println!(
            "{:<6} bridges={:<3} charges={:<3} receptor={:.1}A2/{}v ligand={:.1}A2/{}v",
            e.code,
            e.bridges,
            e.charges_kept,
            e.receptor_area,
            e.receptor_vertices,
            e.ligand_area,
            e.ligand_vertices
        );
    }
    for (code, message) in &report.skipped {
        println!("{code:<6} skipped: {message}");
    }
    if !report.level_table_violations.is_empty() {
        println!("pack is not level-table conformant:");
        for v in &report.level_table_violations {
            println!("  {v}");
        }
    }
    println!(
        "{} pieces written to {}",
        pack.pieces.len(),
        config.output_dir.display()
    );
    Ok(!pack.pieces.is_empty())
}

fn pack_path(config: &PipelineConfig, explicit: Option<&PathBuf>) -> PathBuf {
    explicit
        .cloned()
        .unwrap_or_else(|| config.output_dir.join(pipeline::PACK_FILE))
}

fn cmd_validate(config_path: &Path, args: &ValidateArgs) -> Result<bool> {
    let config = load_config(config_path)?;
    let path = pack_path(&config, args.pack.as_ref());
    let mut pack = pipeline::load_pack(&path)?;
    if let Some(code) = &args.entry {
        let code = code.to_ascii_lowercase();
        pack.pieces.retain(|p| p.source_entry == code);
        if pack.pieces.is_empty() {
            bail!("pack has no pieces for entry {code}");
        }
    }
    let report = pipeline::validate_pack(&pack, &config.engine);
    for v in &report.violations {
        println!("violation {} [{}]: {}", v.subject, v.rule, v.detail);
    }
    for v in &report.level_table {
        println!("violation level_table: {v}");
    }
    if let Some(out) = &args.out {
        let text = serde_json::to_string_pretty(&report)?;
        pipeline::write_atomic(out, text.as_bytes())?;
    }
    let clean = report.is_clean();
    println!(
        "{} pieces checked, {} violation(s): {}",
        report.pieces_checked,
        report.violations.len() + report.level_table.len(),
        if clean { "clean" } else { "NOT clean" }
    );
    Ok(clean)
}

fn load_quiz(path: Option<&PathBuf>) -> Result<QuizBank> {
    match path {
        Some(p) => load_bank_file(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(QuizBank::sample()),
    }
}

fn cmd_simulate(config_path: &Path, args: &SimulateArgs) -> Result<bool> {
    let config = load_config(config_path)?;
    let pack: LevelPack = pipeline::load_pack(&pack_path(&config, args.pack.as_ref()))?;
    let bank = load_quiz(args.quiz_bank.as_ref())?;
    let mut game = config.game;
    if let Some(tier) = args.tier {
        game.tier = tier;
    }
    let script: Vec<ScriptStep> = match &args.script {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            pipeline::parse_script(&text)?
        }
        None => pipeline::demo_script(&pack.pack_id),
    };
    let transcript = pipeline::simulate(Arc::new(pack), Arc::new(bank), game, args.seed, &script);
    match &args.out {
        Some(p) => pipeline::write_atomic(p, transcript.outbound_text().as_bytes())?,
        None => print!("{}", transcript.outbound_text()),
    }
    if let Some(p) = &args.inbound {
        pipeline::write_atomic(p, transcript.inbound_text().as_bytes())?;
    }
    info!(counts = ?pipeline::kind_counts(&transcript.outbound), "simulation done");
    Ok(true)
}

fn cmd_serve(config_path: &Path, args: &ServeArgs) -> Result<bool> {
    let config = load_config(config_path)?;
    let pack = pipeline::load_pack(&pack_path(&config, args.pack.as_ref()))?;
    let state = serve::ServerState::new(
        Arc::new(pack),
        Arc::new(load_quiz(args.quiz_bank.as_ref())?),
        config.game,
        args.seed,
    );
    if args.stdio {
        serve::run_stdio(&state)?;
        return Ok(true);
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(serve::run_socket(
        state,
        &args.addr,
        args.static_dir.clone(),
    ))?;
    Ok(true)
}
