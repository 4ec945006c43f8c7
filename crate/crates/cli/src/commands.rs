//! Command execution: build inputs from a validated config, compute, write.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ringglow_core::io::{write_grid_csv, write_grid_json, write_spectrum_csv, write_trace_csv};
use ringglow_core::verify::{self, Status};
use ringglow_core::{
    build_effective_coupling, decay_spectrum, sample_grid, trace_with_spectrum, AtomArray,
    DecaySpectrum, EffectiveCoupling, MultiphotonState,
};
use serde_json::json;

use crate::config::{sample_times, sidecar_path, CliResult, Format, RunConfig, StateSpec, Task};

/// Writes `file` through `body`, then its config sidecar.
fn write_output(
    file: &Path,
    config: &RunConfig,
    body: impl FnOnce(&mut BufWriter<File>) -> CliResult<()>,
) -> CliResult<()> {
    if let Some(dir) = file.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(file)?);
    body(&mut w)?;
    w.flush()?;
    let mut side = BufWriter::new(File::create(sidecar_path(file))?);
    serde_json::to_writer_pretty(&mut side, &config.clone().at(file))?;
    writeln!(side)?;
    side.flush()?;
    Ok(())
}

/// Inputs validated up front so that bad configs fail before computing.
pub struct Prepared {
    pub array: AtomArray,
    pub states: Vec<(StateSpec, MultiphotonState)>,
}

pub fn prepare(config: &RunConfig, states: &[StateSpec]) -> CliResult<Prepared> {
    let array = config.geometry.build()?;
    let k_l = config.k_l();
    let states = states
        .iter()
        .map(|&s| Ok((s, s.build(&array, config.m, k_l)?)))
        .collect::<CliResult<Vec<_>>>()?;
    if states.is_empty() {
        // Still check that the manifold itself is admissible.
        ringglow_core::enumerate_manifold(array.len(), config.m)
            .map_err(|e| crate::config::invalid(format!("m: {e}")))?;
    }
    Ok(Prepared { array, states })
}

/// Runs `config.command` for each prepared state; `path_for` names the file.
pub fn execute(
    config: &RunConfig,
    prepared: &Prepared,
    path_for: &dyn Fn(Option<StateSpec>) -> PathBuf,
) -> CliResult<Vec<PathBuf>> {
    let pol = config.pol.vector();
    let mut written = Vec::new();
    match config.command {
        Task::Pattern => {
            let (n_theta, n_phi_grid) = (
                config.n_theta.unwrap_or(91),
                config.n_phi_grid.unwrap_or(181),
            );
            for (spec, state) in &prepared.states {
                let grid = sample_grid(state, &prepared.array, pol, n_theta, n_phi_grid)?;
                let file = path_for(Some(*spec));
                let cfg = RunConfig {
                    state: Some(*spec),
                    ..config.clone()
                };
                write_output(&file, &cfg, |w| match config.format {
                    Format::Csv => Ok(write_grid_csv(w, &grid)?),
                    Format::Json => Ok(write_grid_json(w, &grid)?),
                })?;
                written.push(file);
            }
        }
        Task::Spectrum => {
            let (_, spectrum) = solve(config, prepared)?;
            let state = prepared.states.first();
            let weights = state
                .map(|(_, s)| {
                    spectrum
                        .overlaps(s)
                        .map(|o| o.into_iter().map(|(_, w)| w).collect::<Vec<_>>())
                })
                .transpose()?;
            let file = path_for(state.map(|(s, _)| *s));
            let cfg = RunConfig {
                state: state.map(|(s, _)| *s),
                ..config.clone()
            };
            write_output(&file, &cfg, |w| match config.format {
                Format::Csv => Ok(write_spectrum_csv(w, &spectrum, weights.as_deref())?),
                Format::Json => Ok(serde_json::to_writer_pretty(
                    w,
                    &spectrum_json(&spectrum, weights.as_deref()),
                )?),
            })?;
            written.push(file);
        }
        Task::Fluorescence => {
            let (coupling, spectrum) = solve(config, prepared)?;
            let times = sample_times(config.t_max.unwrap_or(4.0), config.n_t.unwrap_or(401));
            for (spec, state) in &prepared.states {
                let trace = trace_with_spectrum(state, &coupling, &spectrum, &times)?;
                let file = path_for(Some(*spec));
                let cfg = RunConfig {
                    state: Some(*spec),
                    ..config.clone()
                };
                write_output(&file, &cfg, |w| match config.format {
                    Format::Csv => Ok(write_trace_csv(w, &trace, config.m)?),
                    Format::Json => {
                        let reference: Vec<f64> = trace
                            .times
                            .iter()
                            .map(|t| (-(config.m as f64) * t).exp())
                            .collect();
                        let doc = json!({
                            "gamma_t": trace.times,
                            "intensity": trace.intensity,
                            "reference": reference,
                            "emitted_power": trace.emitted_power,
                            "method": trace.method,
                        });
                        Ok(serde_json::to_writer_pretty(w, &doc)?)
                    }
                })?;
                written.push(file);
            }
        }
    }
    Ok(written)
}

fn solve(config: &RunConfig, prepared: &Prepared) -> CliResult<(EffectiveCoupling, DecaySpectrum)> {
    let coupling = build_effective_coupling(&prepared.array, config.m, config.pol.vector())?;
    let spectrum = decay_spectrum(&coupling)?;
    Ok((coupling, spectrum))
}

fn spectrum_json(spectrum: &DecaySpectrum, weights: Option<&[f64]>) -> serde_json::Value {
    json!({
        "eigenvalues": spectrum.eigenvalues.iter().map(|l| [l.re, l.im]).collect::<Vec<_>>(),
        "rate_over_half_gamma": spectrum.rates,
        "shift_over_half_gamma": spectrum.shifts,
        "weight": weights,
        "condition": spectrum.condition(),
    })
}

/// Prints one line per property; returns whether none failed.
pub fn run_verify() -> bool {
    let results = verify::run_suite();
    for r in &results {
        println!("{r}");
    }
    let count = |s: Status| results.iter().filter(|r| r.status == s).count();
    println!(
        "{} passed, {} failed, {} skipped",
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skip)
    );
    verify::all_passed(&results)
}
