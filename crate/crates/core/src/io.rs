//! CSV and JSON exchange formats.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that identical inputs give byte-identical files.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::dynamics::{DecaySpectrum, FluorescenceTrace};
use crate::error::{Error, Result};
use crate::farfield::FarFieldGrid;
use crate::geometry::AtomArray;
use crate::manifold::{MultiphotonState, StateLabel};

pub const GRID_CSV_HEADER: &str = "theta,phi,omega_f";
pub const SPECTRUM_CSV_HEADER: &str = "index,rate_over_half_gamma,shift_over_half_gamma,weight";
pub const TRACE_CSV_HEADER: &str = "gamma_t,intensity,reference,emitted_power";

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_grid_csv<W: Write>(mut w: W, grid: &FarFieldGrid) -> Result<()> {
    writeln!(w, "{GRID_CSV_HEADER}")?;
    for (i, &theta) in grid.thetas.iter().enumerate() {
        for (j, &phi) in grid.phis.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                fmt17(theta),
                fmt17(phi),
                fmt17(grid.value(i, j))
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `(theta, phi, omega_f)` rows back from [`write_grid_csv`] output.
pub fn read_grid_csv<R: BufRead>(r: R) -> Result<Vec<[f64; 3]>> {
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == GRID_CSV_HEADER => {}
        Some(Ok(h)) => return Err(Error::Domain(format!("unexpected grid header `{h}`"))),
        Some(Err(e)) => return Err(e.into()),
        None => return Err(Error::Domain("empty grid file".into())),
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0; 3];
        let mut fields = line.split(',');
        for slot in &mut row {
            *slot = fields
                .next()
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| Error::Domain(format!("malformed grid row {}: `{line}`", n + 2)))?;
        }
        if fields.next().is_some() {
            return Err(Error::Domain(format!(
                "too many fields in grid row {}",
                n + 2
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_grid_json<W: Write>(w: W, grid: &FarFieldGrid) -> Result<()> {
    serde_json::to_writer_pretty(w, grid)?;
    Ok(())
}

/// One row per eigenvalue in ascending-rate order. `weights` (if any) are
/// the `|c_n|²` expansion weights of an initial state, in the same order;
/// otherwise the column is left empty.
pub fn write_spectrum_csv<W: Write>(
    mut w: W,
    spectrum: &DecaySpectrum,
    weights: Option<&[f64]>,
) -> Result<()> {
    if let Some(ws) = weights {
        if ws.len() != spectrum.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} eigenvalues",
                ws.len(),
                spectrum.len()
            )));
        }
    }
    writeln!(w, "{SPECTRUM_CSV_HEADER}")?;
    for n in 0..spectrum.len() {
        let weight = weights.map(|ws| fmt17(ws[n])).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            n,
            fmt17(spectrum.rates[n]),
            fmt17(spectrum.shifts[n]),
            weight
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Trace rows with the independent-atom reference `exp(−m Γt)`.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &FluorescenceTrace, m: usize) -> Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for ((t, i), p) in trace
        .times
        .iter()
        .zip(&trace.intensity)
        .zip(&trace.emitted_power)
    {
        let reference = (-(m as f64) * t).exp();
        writeln!(
            w,
            "{},{},{},{}",
            fmt17(*t),
            fmt17(*i),
            fmt17(reference),
            fmt17(*p)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct StateDump {
    n: usize,
    m: usize,
    label: StateLabel,
    amplitudes: Vec<[f64; 2]>,
}

pub fn write_state_json<W: Write>(w: W, state: &MultiphotonState) -> Result<()> {
    let dump = StateDump {
        n: state.manifold().n(),
        m: state.manifold().m(),
        label: state.label(),
        amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
    };
    serde_json::to_writer_pretty(w, &dump)?;
    Ok(())
}

pub fn write_geometry_json<W: Write>(w: W, array: &AtomArray) -> Result<()> {
    serde_json::to_writer_pretty(w, array)?;
    Ok(())
}
