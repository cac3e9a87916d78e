//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, write_config, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{linspace, run_timeseries, sweep_grid, GridSpec};
use crate::output;
use crate::presets::{self, Preset, PresetPlan};

#[derive(Debug, Parser)]
#[command(
    name = "repgame",
    version,
    about = "Reputation-driven game transitions on lattices and small-world networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one replicate and write its time series.
    Run(RunArgs),
    /// Steady-state sweep over a p-m grid.
    Sweep(SweepArgs),
    /// Run on the lattice and write state snapshots.
    Snapshot(SnapshotArgs),
    /// List the named experiment presets.
    Presets,
    /// Execute a named preset end to end.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a named preset's base configuration instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Master seed (overrides REPGAME_SEED and the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Replicate index selecting the dynamics stream.
    #[arg(long, default_value_t = 0)]
    replicate: u32,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// p grid as lo:hi:steps.
    #[arg(long, value_parser = parse_range)]
    p_range: Option<Range>,
    /// m grid as lo:hi:steps.
    #[arg(long, value_parser = parse_range)]
    m_range: Option<Range>,
    /// Comma-separated temptation values.
    #[arg(long, value_delimiter = ',')]
    bl_values: Option<Vec<f64>>,
    #[arg(long)]
    replicates: Option<u32>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct SnapshotArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated snapshot steps (default 0,500,2000,3000 when the
    /// config has none).
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<u64>>,
    #[arg(long, default_value_t = 0)]
    replicate: u32,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Preset name, see `repgame presets`.
    name: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    replicates: Option<u32>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// Evenly spaced grid parsed from `lo:hi:steps`.
#[derive(Clone, Debug, PartialEq)]
struct Range(Vec<f64>);

fn parse_range(s: &str) -> std::result::Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(format!("expected lo:hi:steps, got `{s}`"));
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    let steps: usize = steps
        .parse()
        .map_err(|_| format!("bad step count `{steps}`"))?;
    if steps == 0 {
        return Err("step count must be positive".into());
    }
    Ok(Range(linspace(lo, hi, steps)))
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Snapshot(args) => cmd_snapshot(args),
        Command::Presets => {
            for p in presets::all_presets(crate::config::DEFAULT_SEED) {
                println!("{:<10} {}", p.name, p.summary);
            }
            Ok(())
        }
        Command::Reproduce(args) => cmd_reproduce(args),
    }
}

fn lookup_preset(name: &str, seed: u64) -> Result<Preset> {
    presets::preset(name, seed).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "unknown preset `{name}` (available: {})",
            presets::PRESET_NAMES.join(", ")
        ))
    })
}

/// Resolves the effective seed: flag, then environment, then config.
fn effective_seed(flag: Option<u64>, config_seed: u64) -> Result<u64> {
    Ok(match flag {
        Some(s) => s,
        None => RunConfig::env_seed()?.unwrap_or(config_seed),
    })
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => {
            let seed = effective_seed(common.seed, crate::config::DEFAULT_SEED)?;
            match lookup_preset(name, seed)?.plan {
                PresetPlan::Sweep(grid) => grid.base,
                PresetPlan::Snapshots(cfg) => cfg,
                PresetPlan::Distributions { base, .. } => base,
            }
        }
        (None, None) => RunConfig::default(),
    };
    cfg.master_seed = effective_seed(common.seed, cfg.master_seed)?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    for warning in cfg.params.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = RunConfig {
        snapshot_steps: Vec::new(),
        ..load(&args.common)?
    };
    let series = run_timeseries(&cfg, args.replicate)?;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    output::write_timeseries_csv(&series.records, &dir.join("timeseries.csv"))?;
    if let Some(pop) = &series.final_state {
        output::write_node_states_csv(pop, &dir.join("final_states.csv"))?;
    }
    write_config(&cfg, &dir.join("config.toml"))?;
    println!("wrote {}", dir.join("timeseries.csv").display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = load(&args.common)?;
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    let grid = GridSpec {
        p_values: args.p_range.map_or_else(|| vec![cfg.params.p], |r| r.0),
        m_values: args.m_range.map_or_else(|| vec![cfg.params.m], |r| r.0),
        b_l_values: args.bl_values.unwrap_or_else(|| vec![cfg.params.b_l]),
        base: cfg,
    };
    let cells = sweep_grid(&grid, args.jobs.max(1))?;
    let dir = &grid.base.output_dir;
    create_dir(dir)?;
    output::write_sweep_csv(&cells, &dir.join("sweep.csv"))?;
    write_config(&grid.base, &dir.join("config.toml"))?;
    println!(
        "wrote {} ({} cells)",
        dir.join("sweep.csv").display(),
        cells.len()
    );
    Ok(())
}

fn cmd_snapshot(args: SnapshotArgs) -> Result<()> {
    let mut cfg = load(&args.common)?;
    if let Some(steps) = args.steps {
        cfg.snapshot_steps = steps;
    } else if cfg.snapshot_steps.is_empty() {
        cfg.snapshot_steps = presets::SNAPSHOT_STEPS.to_vec();
    }
    let last = cfg.snapshot_steps.iter().copied().max().unwrap_or(0);
    if last > cfg.horizon {
        cfg.horizon = last;
        cfg.burn_in = cfg.burn_in.min(cfg.horizon.saturating_sub(cfg.window));
    }
    cfg.validate()?;
    let series = run_timeseries(&cfg, args.replicate)?;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    output::write_timeseries_csv(&series.records, &dir.join("timeseries.csv"))?;
    for grid in &series.snapshots {
        output::write_snapshot(grid, &dir.join(format!("snapshot_{:05}", grid.step)))?;
    }
    write_config(&cfg, &dir.join("config.toml"))?;
    println!(
        "wrote {} snapshots to {}",
        series.snapshots.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<()> {
    let seed = effective_seed(args.seed, crate::config::DEFAULT_SEED)?;
    let mut preset = lookup_preset(&args.name, seed)?;
    if let Some(r) = args.replicates {
        preset = preset.with_replicates(r);
    }
    let result = preset.execute(args.jobs.max(1))?;
    let dir = args.out.join(preset.name);
    let files = presets::write_result(&result, &dir)?;
    println!(
        "{}: wrote {} files to {}",
        preset.name,
        files.len(),
        dir.display()
    );
    Ok(())
}
