//! `ringglow`: far-field patterns, decay spectra and fluorescence traces of
//! phase-imprinted multiphoton states on atomic ring arrays.

mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{execute, prepare, run_verify};
use config::{
    invalid, CliError, CliResult, DynamicsArgs, GeometryArgs, OutputArgs, PatternArgs, RunConfig,
    StateArgs, StateSpec, Task,
};

#[derive(Parser, Debug)]
#[command(name = "ringglow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the far-field pattern Ω_f(θ, φ) of one state.
    Pattern {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: PatternArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decay rates and shifts of the coupling matrix, with optional state weights.
    Spectrum {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Excited-population traces, one file per state.
    Fluorescence {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the oracle and symmetry checks; exit 1 if any fails.
    Verify {
        /// Accepted for uniformity; the checks are deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cartesian product over kinds, ring counts and states, one file each.
    Sweep {
        /// What to compute for each combination.
        #[arg(long, value_enum, default_value = "fluorescence")]
        task: Task,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: PatternArgs,
        #[command(flatten)]
        dynamics: DynamicsArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Applies `RINGGLOW_THREADS` to the global thread pool.
fn configure_threads() -> CliResult<Option<usize>> {
    let Ok(raw) = std::env::var("RINGGLOW_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        invalid(format!(
            "RINGGLOW_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(Some(n))
}

fn default_out(task: Task, format: config::Format) -> PathBuf {
    PathBuf::from(format!("{}.{}", task.as_str(), format.as_str()))
}

/// `dir/stem_tag.ext` for multi-state runs.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

struct Common<'a> {
    task: Task,
    state: &'a StateArgs,
    output: &'a OutputArgs,
    grid: Option<&'a PatternArgs>,
    dynamics: Option<&'a DynamicsArgs>,
    threads: Option<usize>,
}

impl Common<'_> {
    fn config(&self, geometry: config::GeometryConfig) -> CliResult<RunConfig> {
        if let Some(d) = self.dynamics {
            d.validate()?;
        }
        Ok(RunConfig {
            command: self.task,
            version: env!("CARGO_PKG_VERSION"),
            geometry,
            m: self.state.m()?,
            state: None,
            k_dir: self.state.k_dir()?,
            pol: self.state.pol,
            n_theta: self.grid.map(|g| g.n_theta),
            n_phi_grid: self.grid.map(|g| g.n_phi_grid),
            t_max: self.dynamics.map(|d| d.t_max),
            n_t: self.dynamics.map(|d| d.n_t),
            out: PathBuf::new(),
            format: self.output.format,
            seed: self.output.seed,
            threads: self.threads,
            command_line: Vec::new(),
        })
    }
}

fn run_single(common: Common<'_>, geometry: &GeometryArgs) -> CliResult<()> {
    let geometry = geometry.resolve_one()?;
    let config = common.config(geometry)?;
    let states = common.state.states()?;
    match common.task {
        Task::Pattern if states.len() != 1 => {
            return Err(invalid(if states.is_empty() {
                "l is required"
            } else {
                "l takes a single value for pattern"
            }))
        }
        Task::Spectrum if states.len() > 1 => {
            return Err(invalid("l takes a single value for spectrum"))
        }
        Task::Fluorescence if states.is_empty() => return Err(invalid("l is required")),
        _ => {}
    }
    let prepared = prepare(&config, &states)?;
    let out = common
        .output
        .out
        .clone()
        .unwrap_or_else(|| default_out(common.task, config.format));
    let multi = states.len() > 1;
    let written = execute(&config, &prepared, &|spec: Option<StateSpec>| match spec {
        Some(s) if multi => tagged(&out, &s.tag()),
        _ => out.clone(),
    })?;
    for f in written {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn run_sweep(common: Common<'_>, geometry: &GeometryArgs) -> CliResult<()> {
    let geometries = geometry.resolve_all()?;
    let states = common.state.states()?;
    if states.is_empty() && common.task != Task::Spectrum {
        return Err(invalid("l is required"));
    }
    let configs = geometries
        .into_iter()
        .map(|g| common.config(g))
        .collect::<CliResult<Vec<_>>>()?;
    // Validate every combination before computing any of them.
    let prepared = configs
        .iter()
        .map(|c| prepare(c, &states))
        .collect::<CliResult<Vec<_>>>()?;
    let dir = common
        .output
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("sweep"));
    fs::create_dir_all(&dir)?;
    let ext = common.output.format.as_str();
    let mut files = Vec::new();
    for (config, prep) in configs.iter().zip(&prepared) {
        let g = &config.geometry;
        let base = format!(
            "{}_{}_nr{}",
            common.task.as_str(),
            g.kind.as_str(),
            g.n_rings
        );
        let name = |spec: Option<StateSpec>| match spec {
            Some(s) => dir.join(format!("{base}_{}.{ext}", s.tag())),
            None => dir.join(format!("{base}.{ext}")),
        };
        if common.task == Task::Spectrum && states.len() > 1 {
            for (spec, state) in &prep.states {
                let single = commands::Prepared {
                    array: prep.array.clone(),
                    states: vec![(*spec, state.clone())],
                };
                files.extend(execute(config, &single, &name)?);
            }
        } else {
            files.extend(execute(config, prep, &name)?);
        }
    }
    let index = dir.join("sweep.config.json");
    let doc = json!({
        "task": common.task,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": common.output.seed,
        "threads": common.threads,
        "command_line": std::env::args().collect::<Vec<_>>(),
        "files": files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
    });
    let mut w = fs::File::create(&index)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<bool> {
    let threads = configure_threads()?;
    match &cli.command {
        Command::Pattern {
            geometry,
            state,
            grid,
            output,
        } => {
            let common = Common {
                task: Task::Pattern,
                state,
                output,
                grid: Some(grid),
                dynamics: None,
                threads,
            };
            run_single(common, geometry)?;
        }
        Command::Spectrum {
            geometry,
            state,
            output,
        } => {
            let common = Common {
                task: Task::Spectrum,
                state,
                output,
                grid: None,
                dynamics: None,
                threads,
            };
            run_single(common, geometry)?;
        }
        Command::Fluorescence {
            geometry,
            state,
            dynamics,
            output,
        } => {
            let common = Common {
                task: Task::Fluorescence,
                state,
                output,
                grid: None,
                dynamics: Some(dynamics),
                threads,
            };
            run_single(common, geometry)?;
        }
        Command::Verify { .. } => return Ok(run_verify()),
        Command::Sweep {
            task,
            geometry,
            state,
            grid,
            dynamics,
            output,
        } => {
            let common = Common {
                task: *task,
                state,
                output,
                grid: (*task == Task::Pattern).then_some(grid),
                dynamics: (*task == Task::Fluorescence).then_some(dynamics),
                threads,
            };
            run_sweep(common, geometry)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
