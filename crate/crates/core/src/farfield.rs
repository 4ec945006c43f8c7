//! Far-field scattering patterns `Ω_f(θ, φ)`.
//!
//! The pattern is the dipole prefactor `1 − (R̂·p̂)²` times the structure
//! factor `|Σ_c a_c exp(−i k_R·R_c)|²`, where the sum runs over excitation
//! configurations `c`, `R_c` is the summed position of the excited atoms and
//! `k_R = 2π R̂`. The amplitudes `a_c` already carry the `C^{-1/2}`
//! normalization, the traveling phase and the imprinted phase, so this is the
//! configuration double sum collapsed into a modulus squared.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AtomArray, Vec3};
use crate::manifold::{binomial, config_position, MultiphotonState, StateLabel};

/// Largest manifold accepted by [`omega_f_bruteforce`].
pub const BRUTEFORCE_CAP: u128 = 1_000;

/// Cap on `n_theta · n_phi · C(n, m)` for a sampled grid.
pub const GRID_WORK_CAP: u128 = 20_000_000_000;

/// Relative tolerance for merging plateaus in [`count_azimuthal_peaks`].
pub const PLATEAU_RTOL: f64 = 1e-9;

/// Minimum samples per peak required by [`count_azimuthal_peaks`].
pub const SAMPLES_PER_PEAK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn unit(self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    p_hat: Vec3,
}

impl Polarization {
    pub fn x() -> Self {
        Self { p_hat: Vec3::X }
    }

    pub fn y() -> Self {
        Self { p_hat: Vec3::Y }
    }

    pub fn z() -> Self {
        Self { p_hat: Vec3::Z }
    }

    /// Normalizes `v`; fails for zero or non-finite vectors.
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain(format!(
                "polarization {v:?} cannot be normalized"
            )));
        }
        Ok(Self {
            p_hat: v * norm.recip(),
        })
    }

    pub fn p_hat(self) -> Vec3 {
        self.p_hat
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Polarization::x()),
            "y" => Ok(Polarization::y()),
            "z" => Ok(Polarization::z()),
            other => Err(Error::Domain(format!("unknown polarization `{other}`"))),
        }
    }
}

/// Dipole radiation prefactor `1 − (R̂·p̂)²`.
pub fn prefactor(dir: Direction, pol: Polarization) -> f64 {
    let c = dir.unit().dot(pol.p_hat());
    (1.0 - c * c).max(0.0)
}

fn check_pair(state: &MultiphotonState, array: &AtomArray) -> Result<()> {
    if state.manifold().n() != array.len() {
        return Err(Error::Dimension(format!(
            "state lives on {} atoms, geometry has {}",
            state.manifold().n(),
            array.len()
        )));
    }
    Ok(())
}

/// Structure factor `|Σ_c a_c Π_{μ∈c} exp(−i k_R·r_μ)|²` for a precomputed
/// per-atom phase table.
fn structure_factor(state: &MultiphotonState, atom_phase: &[Complex64]) -> f64 {
    let manifold = state.manifold();
    manifold
        .iter()
        .zip(state.amplitudes())
        .map(|(config, a)| config.iter().fold(*a, |acc, &mu| acc * atom_phase[mu - 1]))
        .sum::<Complex64>()
        .norm_sqr()
}

fn atom_phases(array: &AtomArray, dir: Direction, out: &mut Vec<Complex64>) {
    let k_r = dir.unit() * TAU;
    out.clear();
    out.extend(
        array
            .positions()
            .iter()
            .map(|p| Complex64::cis(-k_r.dot(*p))),
    );
}

/// Far-field pattern of `state` in direction `dir`.
pub fn omega_f(
    state: &MultiphotonState,
    array: &AtomArray,
    dir: Direction,
    pol: Polarization,
) -> Result<f64> {
    check_pair(state, array)?;
    let mut phases = Vec::with_capacity(array.len());
    atom_phases(array, dir, &mut phases);
    Ok(prefactor(dir, pol) * structure_factor(state, &phases))
}

/// Literal configuration double sum, used as an oracle for [`omega_f`].
///
/// Phases are rebuilt from the state's label and excitation wave vector
/// rather than read from its amplitudes, so the two paths share nothing
/// beyond the manifold enumeration.
pub fn omega_f_bruteforce(
    state: &MultiphotonState,
    array: &AtomArray,
    dir: Direction,
    pol: Polarization,
) -> Result<f64> {
    check_pair(state, array)?;
    let manifold = state.manifold();
    let size = manifold.len();
    if size as u128 > BRUTEFORCE_CAP {
        return Err(Error::Resource {
            what: format!(
                "brute-force double sum over C({}, {})",
                manifold.n(),
                manifold.m()
            ),
            required: size as u128,
            cap: BRUTEFORCE_CAP,
        });
    }
    let dk = dir.unit() * TAU - state.k_l();
    let imprint = |config: &[usize]| -> f64 {
        match state.label() {
            StateLabel::Oam(l) => {
                let f: usize = config.iter().map(|&mu| (mu - 1) % array.n_phi() + 1).sum();
                2.0 * PI * l as f64 * (f as f64 - 1.0) / array.n_phi() as f64
            }
            StateLabel::General(n) => {
                let f: usize = config.iter().sum();
                2.0 * PI * n as f64 * (f as f64 - 1.0) / size as f64
            }
        }
    };
    let mut total = 0.0;
    for cm in manifold.iter() {
        let rm = config_position(cm, array);
        let fm = imprint(cm);
        for cj in manifold.iter() {
            let rj = config_position(cj, array);
            let fj = imprint(cj);
            total += (dk.dot(rm - rj) + fj - fm).cos();
        }
    }
    Ok(prefactor(dir, pol) * total / size as f64)
}

/// Closed-form pattern of the two-excitation helical state on a three-atom
/// ring under x̂ polarization, with `r_bar = 2π r/λ`.
///
/// This is the double sum *without* the `1/C(3, 2)` normalization, so it
/// equals `3 · omega_f` for the same state.
pub fn three_atom_closed_form(dir: Direction, l: i64, r_bar: f64) -> f64 {
    let st = dir.theta.sin();
    let (sp, cp) = dir.phi.sin_cos();
    let s3 = 3f64.sqrt();
    let lp = 2.0 * PI * l as f64 / 3.0;
    let a = s3 * r_bar * st * sp + lp;
    let b = 1.5 * r_bar * st * cp + 0.5 * s3 * r_bar * st * sp + 2.0 * lp;
    let c = 1.5 * r_bar * st * cp - 0.5 * s3 * r_bar * st * sp + lp;
    let bracket = 3.0 + 2.0 * (a.cos() + b.cos() + c.cos());
    (1.0 - st * st * cp * cp) * bracket
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub label: StateLabel,
    pub geometry: String,
    pub polarization: Vec3,
}

/// `Ω_f` on a regular `(θ, φ)` grid, stored row-major with θ as the row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarFieldGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
    pub metadata: GridMetadata,
}

impl FarFieldGrid {
    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.phis.len() + i_phi]
    }

    pub fn row(&self, i_theta: usize) -> &[f64] {
        let n = self.phis.len();
        &self.values[i_theta * n..(i_theta + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Samples `θ ∈ [0, π]` (endpoints included) and `φ ∈ [0, 2π)`.
pub fn sample_grid(
    state: &MultiphotonState,
    array: &AtomArray,
    pol: Polarization,
    n_theta: usize,
    n_phi_grid: usize,
) -> Result<FarFieldGrid> {
    check_pair(state, array)?;
    if n_theta < 2 || n_phi_grid < 2 {
        return Err(Error::Domain(format!(
            "grid needs at least 2x2 samples, got {n_theta}x{n_phi_grid}"
        )));
    }
    let work = n_theta as u128 * n_phi_grid as u128 * state.manifold().len() as u128;
    if work > GRID_WORK_CAP {
        return Err(Error::Resource {
            what: format!(
                "{n_theta}x{n_phi_grid} grid over {} configurations",
                state.manifold().len()
            ),
            required: work,
            cap: GRID_WORK_CAP,
        });
    }
    let thetas: Vec<f64> = (0..n_theta)
        .map(|i| PI * i as f64 / (n_theta - 1) as f64)
        .collect();
    let phis: Vec<f64> = (0..n_phi_grid)
        .map(|j| TAU * j as f64 / n_phi_grid as f64)
        .collect();
    let mut values = vec![0.0; n_theta * n_phi_grid];
    values
        .par_chunks_mut(n_phi_grid)
        .zip(thetas.par_iter())
        .for_each_init(Vec::new, |phases, (row, &theta)| {
            for (cell, &phi) in row.iter_mut().zip(&phis) {
                let dir = Direction::new(theta, phi);
                atom_phases(array, dir, phases);
                *cell = prefactor(dir, pol) * structure_factor(state, phases);
            }
        });
    Ok(FarFieldGrid {
        thetas,
        phis,
        values,
        metadata: GridMetadata {
            label: state.label(),
            geometry: array.descriptor(),
            polarization: pol.p_hat(),
        },
    })
}

/// Number of strict local maxima of `φ ↦ Ω_f(θ, φ)` on the periodic φ axis,
/// using the grid row nearest to `theta`. Runs of samples equal within
/// [`PLATEAU_RTOL`] are merged and count once if both neighbours are lower.
pub fn count_azimuthal_peaks(grid: &FarFieldGrid, theta: f64) -> Result<usize> {
    let (first, last) = (grid.thetas[0], *grid.thetas.last().unwrap());
    if !(theta >= first - 1e-12 && theta <= last + 1e-12) {
        return Err(Error::Domain(format!(
            "theta = {theta} outside grid [{first}, {last}]"
        )));
    }
    let i_theta = grid
        .thetas
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - theta).abs().total_cmp(&(b.1 - theta).abs()))
        .map(|(i, _)| i)
        .unwrap();
    let peaks = count_periodic_maxima(grid.row(i_theta));
    let n = grid.phis.len();
    if peaks > 0 && n < SAMPLES_PER_PEAK * peaks {
        return Err(Error::Resolution(format!(
            "{n} azimuthal samples for {peaks} peaks; need at least {}",
            SAMPLES_PER_PEAK * peaks
        )));
    }
    Ok(peaks)
}

fn count_periodic_maxima(row: &[f64]) -> usize {
    let n = row.len();
    let scale = row
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let same = |a: f64, b: f64| (a - b).abs() <= PLATEAU_RTOL * scale;

    // Collapse the periodic row into runs of equal values.
    let Some(start) = (0..n).find(|&i| !same(row[i], row[(i + n - 1) % n])) else {
        return 0;
    };
    let mut runs: Vec<f64> = Vec::new();
    for k in 0..n {
        let v = row[(start + k) % n];
        match runs.last() {
            Some(&last) if same(last, v) => {}
            _ => runs.push(v),
        }
    }
    let r = runs.len();
    (0..r)
        .filter(|&i| runs[i] > runs[(i + r - 1) % r] && runs[i] > runs[(i + 1) % r])
        .count()
}

/// Mean of `Ω_f` over the unit sphere, by midpoint quadrature in `cos θ`
/// (`n_u` nodes) and `φ` (`n_phi` nodes).
pub fn sphere_mean(
    state: &MultiphotonState,
    array: &AtomArray,
    pol: Polarization,
    n_u: usize,
    n_phi: usize,
) -> Result<f64> {
    check_pair(state, array)?;
    if n_u == 0 || n_phi == 0 {
        return Err(Error::Domain(
            "quadrature needs at least one node per axis".into(),
        ));
    }
    let total: f64 = (0..n_u)
        .into_par_iter()
        .map_init(Vec::new, |phases, i| {
            let u = -1.0 + (2.0 * i as f64 + 1.0) / n_u as f64;
            let theta = u.clamp(-1.0, 1.0).acos();
            (0..n_phi)
                .map(|j| {
                    let dir = Direction::new(theta, TAU * (j as f64 + 0.5) / n_phi as f64);
                    atom_phases(array, dir, phases);
                    prefactor(dir, pol) * structure_factor(state, phases)
                })
                .sum::<f64>()
        })
        .sum();
    Ok(total / (n_u * n_phi) as f64)
}

/// `C(n, m)` of the manifold the closed form is normalized against.
pub fn three_atom_normalization() -> f64 {
    binomial(3, 2) as f64
}
