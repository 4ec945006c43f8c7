//! Collective decay within the M-excitation sector.
//!
//! Amplitudes evolve as `da/dt = Λ a` with time in units of `1/Γ`. For two
//! configurations `V ≠ W` that differ by moving one excitation from atom `β`
//! (in `V`) to atom `α` (in `W`),
//!
//! ```text
//! Λ_WV = ½ (−F_αβ + i G_αβ),      Λ_VV = −m/2,
//! ```
//!
//! where `F` and `G` are the dissipative and dispersive parts of the resonant
//! dipole-dipole kernel. All other entries vanish. Rates are reported as
//! `Re[−λ]/(Γ/2)` and shifts as `Im[λ]/(Γ/2)`.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farfield::Polarization;
use crate::geometry::{AtomArray, Vec3};
use crate::manifold::{ExcitationManifold, MultiphotonState};

/// Separations at or below this (λ units) are rejected as contact.
pub const CONTACT_CUTOFF: f64 = 1e-6;

/// Below this `ξ` the near-field part of `F` uses its Taylor series.
const SERIES_XI: f64 = 1e-2;

/// Eigenvector condition number above which the eigen expansion is abandoned.
pub const MAX_EIGVEC_CONDITION: f64 = 1e12;

/// Step used by the integrator fallback (units of `1/Γ`).
pub const FALLBACK_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairKernel {
    pub f_val: f64,
    pub g_val: f64,
}

/// Resonant dipole-dipole kernel for two atoms separated by `separation`
/// with common dipole orientation `pol`.
///
/// With `ξ = 2π|r|` and `c = p̂·r̂`:
///
/// ```text
/// F = 3/2 [ (1 − c²) sin ξ/ξ + (1 − 3c²)(cos ξ/ξ² − sin ξ/ξ³) ]
/// G = 3/2 [ −(1 − c²) cos ξ/ξ + (1 − 3c²)(sin ξ/ξ² + cos ξ/ξ³) ]
/// ```
pub fn rddi_pair(separation: Vec3, pol: Polarization) -> Result<PairKernel> {
    let dist = separation.norm();
    if !dist.is_finite() || dist <= CONTACT_CUTOFF {
        return Err(Error::Singularity(format!(
            "separation {dist:e} λ is at or below the contact cutoff {CONTACT_CUTOFF:e} λ"
        )));
    }
    let xi = std::f64::consts::TAU * dist;
    let c = pol.p_hat().dot(separation) / dist;
    let c2 = c * c;
    let (s, co) = xi.sin_cos();
    let (sinc, near) = if xi < SERIES_XI {
        let x2 = xi * xi;
        (
            1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0,
            -1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0 + x2 * x2 * x2 / 45360.0,
        )
    } else {
        (s / xi, co / (xi * xi) - s / (xi * xi * xi))
    };
    let f_val = 1.5 * ((1.0 - c2) * sinc + (1.0 - 3.0 * c2) * near);
    let g_val =
        1.5 * (-(1.0 - c2) * co / xi + (1.0 - 3.0 * c2) * (s / (xi * xi) + co / (xi * xi * xi)));
    Ok(PairKernel { f_val, g_val })
}

fn kernel_table(array: &AtomArray, pol: Polarization) -> Result<Vec<PairKernel>> {
    let n = array.len();
    let pos = array.positions();
    let mut table = vec![
        PairKernel {
            f_val: 1.0,
            g_val: 0.0
        };
        n * n
    ];
    for a in 0..n {
        for b in a + 1..n {
            let k = rddi_pair(pos[a] - pos[b], pol)
                .map_err(|e| Error::Singularity(format!("atoms {} and {}: {e}", a + 1, b + 1)))?;
            table[a * n + b] = k;
            table[b * n + a] = k;
        }
    }
    Ok(table)
}

/// Non-Hermitian generator of amplitude evolution on a manifold.
#[derive(Clone, Debug)]
pub struct EffectiveCoupling {
    manifold: Arc<ExcitationManifold>,
    matrix: Mat<Complex64>,
}

impl EffectiveCoupling {
    pub fn manifold(&self) -> &Arc<ExcitationManifold> {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    pub fn apply(&self, a: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, &aj) in a.iter().enumerate().take(n) {
            if aj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(i, j)] * aj;
            }
        }
        out
    }
}

pub fn build_effective_coupling(
    array: &AtomArray,
    m: usize,
    pol: Polarization,
) -> Result<EffectiveCoupling> {
    let manifold = Arc::new(ExcitationManifold::new(array.len(), m)?);
    coupling_on(manifold, array, pol)
}

/// [`build_effective_coupling`] on an existing manifold.
pub fn coupling_on(
    manifold: Arc<ExcitationManifold>,
    array: &AtomArray,
    pol: Polarization,
) -> Result<EffectiveCoupling> {
    if manifold.n() != array.len() {
        return Err(Error::Dimension(format!(
            "manifold over {} atoms, array has {}",
            manifold.n(),
            array.len()
        )));
    }
    let n = array.len();
    let m = manifold.m();
    let dim = manifold.len();
    let table = kernel_table(array, pol)?;

    let columns: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .into_par_iter()
        .map(|v| {
            let config = manifold.config(v);
            let mut occupied = vec![false; n + 1];
            for &mu in config {
                occupied[mu] = true;
            }
            let mut entries = Vec::with_capacity(m * (n - m));
            let mut moved = config.to_vec();
            for (slot, &beta) in config.iter().enumerate() {
                for alpha in (1..=n).filter(|&a| !occupied[a]) {
                    moved.copy_from_slice(config);
                    moved[slot] = alpha;
                    moved.sort_unstable();
                    let w = manifold.rank(&moved).expect("moved configuration is valid");
                    let k = table[(alpha - 1) * n + (beta - 1)];
                    entries.push((w, Complex64::new(-0.5 * k.f_val, 0.5 * k.g_val)));
                }
            }
            entries
        })
        .collect();

    let mut matrix = Mat::<Complex64>::zeros(dim, dim);
    for (v, entries) in columns.into_iter().enumerate() {
        matrix[(v, v)] = Complex64::new(-0.5 * m as f64, 0.0);
        for (w, value) in entries {
            matrix[(w, v)] = value;
        }
    }
    Ok(EffectiveCoupling { manifold, matrix })
}

/// Eigenvalues of the coupling matrix sorted by ascending decay rate, with
/// the matching right eigenvectors.
#[derive(Clone, Debug)]
pub struct DecaySpectrum {
    pub eigenvalues: Vec<Complex64>,
    /// `Re[−λ]/(Γ/2)`, ascending.
    pub rates: Vec<f64>,
    /// `Im[λ]/(Γ/2)`.
    pub shifts: Vec<f64>,
    eigenvectors: Mat<Complex64>,
    condition: f64,
}

pub fn decay_spectrum(coupling: &EffectiveCoupling) -> Result<DecaySpectrum> {
    let matrix = &coupling.matrix;
    if (0..matrix.nrows()).any(|i| (0..matrix.ncols()).any(|j| !matrix[(i, j)].is_finite())) {
        return Err(Error::Numerical(
            "coupling matrix has non-finite entries".into(),
        ));
    }
    let evd = matrix
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let values = evd.S();
    let vectors = evd.U();
    let dim = values.dim();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (values[a], values[b]);
        (-la.re).total_cmp(&-lb.re).then(la.im.total_cmp(&lb.im))
    });

    let eigenvalues: Vec<Complex64> = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = Mat::<Complex64>::from_fn(dim, dim, |i, j| {
        let col = order[j];
        let norm = (0..dim)
            .map(|r| vectors[(r, col)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        vectors[(i, col)] / norm
    });
    let singular = eigenvectors
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD of eigenvector matrix failed: {e:?}")))?;
    let smax = singular.iter().copied().fold(0.0, f64::max);
    let smin = singular.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };

    Ok(DecaySpectrum {
        rates: eigenvalues.iter().map(|l| -2.0 * l.re).collect(),
        shifts: eigenvalues.iter().map(|l| 2.0 * l.im).collect(),
        eigenvalues,
        eigenvectors,
        condition,
    })
}

impl DecaySpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// 2-norm condition number of the column-normalized eigenvector matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn is_well_conditioned(&self) -> bool {
        self.condition.is_finite() && self.condition <= MAX_EIGVEC_CONDITION
    }

    /// Solves `V c = a` for the right-eigenvector expansion of `amplitudes`.
    pub fn expansion(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a spectrum of size {}",
                amplitudes.len(),
                self.len()
            )));
        }
        if !self.is_well_conditioned() {
            return Err(Error::Numerical(format!(
                "eigenvector matrix condition number {:e} exceeds {MAX_EIGVEC_CONDITION:e}",
                self.condition
            )));
        }
        let rhs = Mat::<Complex64>::from_fn(self.len(), 1, |i, _| amplitudes[i]);
        let sol = self.eigenvectors.partial_piv_lu().solve(&rhs);
        Ok((0..self.len()).map(|i| sol[(i, 0)]).collect())
    }

    /// `(λ_n, |c_n|²)` for the expansion of `state` in this eigenbasis.
    pub fn overlaps(&self, state: &MultiphotonState) -> Result<Vec<(Complex64, f64)>> {
        let coeffs = self.expansion(state.amplitudes())?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(coeffs)
            .map(|(&l, c)| (l, c.norm_sqr()))
            .collect())
    }

    /// `a(t) = V diag(exp(λ t)) c`.
    pub fn evolve(&self, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let dim = self.len();
        let weighted: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .zip(coeffs)
            .map(|(l, c)| c * (l * t).exp())
            .collect();
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| self.eigenvectors[(i, j)] * weighted[j])
                    .sum()
            })
            .collect()
    }
}

pub fn eigen_overlaps(
    state: &MultiphotonState,
    coupling: &EffectiveCoupling,
) -> Result<Vec<(Complex64, f64)>> {
    check_shared(state, coupling)?;
    decay_spectrum(coupling)?.overlaps(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMethod {
    Eigen,
    Integrator,
}

/// Total excited population `I₀(t)` normalized to 1 at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluorescenceTrace {
    pub times: Vec<f64>,
    pub intensity: Vec<f64>,
    /// `−dI₀/dt`, the instantaneous emitted power in the same normalization.
    pub emitted_power: Vec<f64>,
    pub method: EvolutionMethod,
}

fn check_shared(state: &MultiphotonState, coupling: &EffectiveCoupling) -> Result<()> {
    let (a, b) = (state.manifold(), coupling.manifold());
    if a.n() != b.n() || a.m() != b.m() {
        return Err(Error::Dimension(format!(
            "state on C({}, {}) but coupling on C({}, {})",
            a.n(),
            a.m(),
            b.n(),
            b.m()
        )));
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Domain(format!(
            "times must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

fn population_and_power(coupling: &EffectiveCoupling, a: &[Complex64], p0: f64) -> (f64, f64) {
    let pop: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let la = coupling.apply(a);
    let rate: f64 = a.iter().zip(&la).map(|(x, y)| (x.conj() * y).re).sum();
    (pop / p0, -2.0 * rate / p0)
}

/// Evolves `state` under `coupling`, using the eigen expansion when the
/// eigenbasis is well conditioned and RK4 otherwise.
pub fn fluorescence_trace(
    state: &MultiphotonState,
    coupling: &EffectiveCoupling,
    times: &[f64],
) -> Result<FluorescenceTrace> {
    check_shared(state, coupling)?;
    let spectrum = decay_spectrum(coupling)?;
    trace_with_spectrum(state, coupling, &spectrum, times)
}

/// [`fluorescence_trace`] reusing a precomputed spectrum of `coupling`.
pub fn trace_with_spectrum(
    state: &MultiphotonState,
    coupling: &EffectiveCoupling,
    spectrum: &DecaySpectrum,
    times: &[f64],
) -> Result<FluorescenceTrace> {
    check_shared(state, coupling)?;
    check_times(times)?;
    if !spectrum.is_well_conditioned() {
        return integrate_rk4(state, coupling, times, FALLBACK_STEP);
    }
    let p0 = state.norm_sqr();
    let coeffs = spectrum.expansion(state.amplitudes())?;
    let (intensity, emitted_power) = times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                population_and_power(coupling, state.amplitudes(), p0)
            } else {
                population_and_power(coupling, &spectrum.evolve(&coeffs, t), p0)
            }
        })
        .unzip();
    Ok(FluorescenceTrace {
        times: times.to_vec(),
        intensity,
        emitted_power,
        method: EvolutionMethod::Eigen,
    })
}

/// Fixed-step classical RK4 on `da/dt = Λ a`, landing exactly on each
/// requested time.
pub fn integrate_rk4(
    state: &MultiphotonState,
    coupling: &EffectiveCoupling,
    times: &[f64],
    step: f64,
) -> Result<FluorescenceTrace> {
    check_shared(state, coupling)?;
    check_times(times)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    let p0 = state.norm_sqr();
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut a = state.amplitudes().to_vec();
    let mut t = 0.0;
    let mut intensity = vec![0.0; times.len()];
    let mut emitted_power = vec![0.0; times.len()];
    for idx in order {
        let target = times[idx];
        while target - t > 1e-12 {
            let h = step.min(target - t);
            rk4_step(coupling, &mut a, h);
            t += h;
        }
        let (pop, power) = population_and_power(coupling, &a, p0);
        intensity[idx] = pop;
        emitted_power[idx] = power;
    }
    Ok(FluorescenceTrace {
        times: times.to_vec(),
        intensity,
        emitted_power,
        method: EvolutionMethod::Integrator,
    })
}

fn rk4_step(coupling: &EffectiveCoupling, a: &mut [Complex64], h: f64) {
    let axpy = |x: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
        x.iter().zip(k).map(|(x, k)| x + k * s).collect()
    };
    let k1 = coupling.apply(a);
    let k2 = coupling.apply(&axpy(a, &k1, 0.5 * h));
    let k3 = coupling.apply(&axpy(a, &k2, 0.5 * h));
    let k4 = coupling.apply(&axpy(a, &k3, h));
    for i in 0..a.len() {
        a[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
    }
}

/// Single-excitation decay matrix `Γ_αβ = F(ξ_αβ)` with unit diagonal.
pub fn pair_decay_matrix(array: &AtomArray, pol: Polarization) -> Result<Vec<Vec<f64>>> {
    let n = array.len();
    let table = kernel_table(array, pol)?;
    Ok((0..n)
        .map(|a| (0..n).map(|b| table[a * n + b].f_val).collect())
        .collect())
}

/// Smallest eigenvalue of [`pair_decay_matrix`].
pub fn pair_decay_min_eigenvalue(array: &AtomArray, pol: Polarization) -> Result<f64> {
    let gamma = pair_decay_matrix(array, pol)?;
    let n = gamma.len();
    let mat = Mat::<f64>::from_fn(n, n, |i, j| gamma[i][j]);
    let ev = mat
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    Ok(ev.iter().copied().fold(f64::INFINITY, f64::min))
}
