//! The M-excitation configuration space and phase-imprinted states on it.
//!
//! Configurations are strictly increasing tuples of 1-based atom indices,
//! stored in lexicographic order. Ranks use the combinatorial number system,
//! so `rank` and `unrank` never touch the enumerated table.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AtomArray, Vec3};

/// Default cap on `C(n, m)` for an enumerated manifold.
pub const DEFAULT_MANIFOLD_CAP: u128 = 1_000_000;

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationManifold {
    n: usize,
    m: usize,
    // C(n, m) tuples of length m, flattened.
    configs: Vec<usize>,
}

impl ExcitationManifold {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_MANIFOLD_CAP)
    }

    pub fn with_cap(n: usize, m: usize, cap: u128) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Domain(format!(
                "excitation number m = {m} must satisfy 1 <= m <= n = {n}"
            )));
        }
        let size = binomial(n, m);
        if size > cap {
            return Err(Error::Resource {
                what: format!("manifold C({n}, {m})"),
                required: size,
                cap,
            });
        }
        let size = size as usize;
        let mut configs = Vec::with_capacity(size * m);
        let mut current: Vec<usize> = (1..=m).collect();
        loop {
            configs.extend_from_slice(&current);
            // Lexicographic successor: bump the rightmost index that can move.
            let Some(pos) = (0..m).rev().find(|&i| current[i] < n - m + i + 1) else {
                break;
            };
            current[pos] += 1;
            for i in pos + 1..m {
                current[i] = current[i - 1] + 1;
            }
        }
        debug_assert_eq!(configs.len(), size * m);
        Ok(ExcitationManifold { n, m, configs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of configurations, `C(n, m)`.
    pub fn len(&self) -> usize {
        self.configs.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn config(&self, index: usize) -> &[usize] {
        &self.configs[index * self.m..(index + 1) * self.m]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.configs.chunks_exact(self.m)
    }

    /// Lexicographic rank of a strictly increasing tuple.
    pub fn rank(&self, config: &[usize]) -> Result<usize> {
        self.check_config(config)?;
        let total = self.len() as u128;
        let tail: u128 = config
            .iter()
            .enumerate()
            .map(|(i, &mu)| binomial(self.n - mu, self.m - i))
            .sum();
        Ok((total - 1 - tail) as usize)
    }

    /// Inverse of [`rank`](Self::rank), computed arithmetically.
    pub fn unrank(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.len() {
            return Err(Error::Index {
                index,
                len: self.len(),
            });
        }
        let mut remaining = (self.len() - 1 - index) as u128;
        let mut out = Vec::with_capacity(self.m);
        let mut lo = 1;
        for i in 0..self.m {
            let k = self.m - i;
            // Smallest mu >= lo with C(n - mu, k) <= remaining.
            let mut mu = lo;
            while binomial(self.n - mu, k) > remaining {
                mu += 1;
            }
            remaining -= binomial(self.n - mu, k);
            out.push(mu);
            lo = mu + 1;
        }
        Ok(out)
    }

    pub fn check_config(&self, config: &[usize]) -> Result<()> {
        if config.len() != self.m {
            return Err(Error::Dimension(format!(
                "configuration has {} entries, manifold has m = {}",
                config.len(),
                self.m
            )));
        }
        for (i, &mu) in config.iter().enumerate() {
            if mu == 0 || mu > self.n {
                return Err(Error::Index {
                    index: mu,
                    len: self.n,
                });
            }
            if i > 0 && config[i - 1] >= mu {
                return Err(Error::Domain(format!(
                    "configuration {config:?} not strictly increasing"
                )));
            }
        }
        Ok(())
    }
}

/// Enumerate all `m`-subsets of `n` atoms with the default size cap.
pub fn enumerate_manifold(n: usize, m: usize) -> Result<ExcitationManifold> {
    ExcitationManifold::new(n, m)
}

/// Sum of azimuthal indices over the excited atoms of `config`.
pub fn helical_phase_sum(config: &[usize], array: &AtomArray) -> Result<usize> {
    config.iter().map(|&mu| array.azimuthal_index(mu)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateLabel {
    /// Helical phase from orbital angular momentum `l`.
    Oam(i64),
    /// Linear phase ramp over global indices with ramp index `n_index`.
    General(u64),
}

/// Uniform-modulus amplitude vector on an excitation manifold.
#[derive(Clone, Debug)]
pub struct MultiphotonState {
    manifold: Arc<ExcitationManifold>,
    amplitudes: Vec<Complex64>,
    label: StateLabel,
    k_l: Vec3,
}

impl MultiphotonState {
    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(
        manifold: Arc<ExcitationManifold>,
        amplitudes: Vec<Complex64>,
        label: StateLabel,
        k_l: Vec3,
    ) -> Result<Self> {
        if amplitudes.len() != manifold.len() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a manifold of size {}",
                amplitudes.len(),
                manifold.len()
            )));
        }
        Ok(MultiphotonState {
            manifold,
            amplitudes,
            label,
            k_l,
        })
    }

    pub fn manifold(&self) -> &Arc<ExcitationManifold> {
        &self.manifold
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn label(&self) -> StateLabel {
        self.label
    }

    pub fn k_l(&self) -> Vec3 {
        self.k_l
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Excitation wave vector `2π ẑ` in λ units.
pub fn default_k_l() -> Vec3 {
    Vec3::Z * TAU
}

/// Sum of positions of the excited atoms.
pub(crate) fn config_position(config: &[usize], array: &AtomArray) -> Vec3 {
    let positions = array.positions();
    config
        .iter()
        .fold(Vec3::ZERO, |acc, &mu| acc + positions[mu - 1])
}

fn check_array(manifold: &ExcitationManifold, array: &AtomArray) -> Result<()> {
    if manifold.n() != array.len() {
        return Err(Error::Dimension(format!(
            "manifold over {} atoms, array has {}",
            manifold.n(),
            array.len()
        )));
    }
    Ok(())
}

/// Helical-phase-imprinted state:
/// `a(μ⃗) = C^{-1/2} exp(i k_L·R_M) exp(i 2π l (f − 1) / n_phi)`,
/// with `f` the sum of azimuthal indices of the excited atoms.
pub fn build_hpi_state(array: &AtomArray, m: usize, l: i64, k_l: Vec3) -> Result<MultiphotonState> {
    let manifold = Arc::new(ExcitationManifold::new(array.len(), m)?);
    hpi_state_on(manifold, array, l, k_l)
}

/// [`build_hpi_state`] on an existing manifold.
pub fn hpi_state_on(
    manifold: Arc<ExcitationManifold>,
    array: &AtomArray,
    l: i64,
    k_l: Vec3,
) -> Result<MultiphotonState> {
    check_array(&manifold, array)?;
    let n_phi = array.n_phi() as i64;
    let norm = (manifold.len() as f64).sqrt().recip();
    let amplitudes = manifold
        .iter()
        .map(|config| {
            let f = helical_phase_sum(config, array)? as i64;
            // Reduce l·(f − 1) mod n_phi first so that l and l + n_phi agree exactly.
            let turns = (l.rem_euclid(n_phi) * (f - 1)).rem_euclid(n_phi);
            let phase = k_l.dot(config_position(config, array)) + TAU * turns as f64 / n_phi as f64;
            Ok(Complex64::from_polar(norm, phase))
        })
        .collect::<Result<Vec<_>>>()?;
    MultiphotonState::from_amplitudes(manifold, amplitudes, StateLabel::Oam(l), k_l)
}

/// Generalized phase-imprinted state:
/// `a(μ⃗) = C^{-1/2} exp(i k_L·R_M) exp(i 2π n (f − 1) / C)`,
/// with `f` the sum of global indices of the excited atoms.
pub fn build_generalized_state(
    array: &AtomArray,
    m: usize,
    n_index: u64,
    k_l: Vec3,
) -> Result<MultiphotonState> {
    let manifold = Arc::new(ExcitationManifold::new(array.len(), m)?);
    generalized_state_on(manifold, array, n_index, k_l)
}

pub fn generalized_state_on(
    manifold: Arc<ExcitationManifold>,
    array: &AtomArray,
    n_index: u64,
    k_l: Vec3,
) -> Result<MultiphotonState> {
    check_array(&manifold, array)?;
    let size = manifold.len() as u64;
    if n_index == 0 || n_index > size {
        return Err(Error::Domain(format!(
            "n_index = {n_index} outside [1, {size}]"
        )));
    }
    let norm = (size as f64).sqrt().recip();
    let amplitudes = manifold
        .iter()
        .map(|config| {
            let f: u64 = config.iter().map(|&mu| mu as u64).sum();
            let turns = ((n_index as u128 * (f - 1) as u128) % size as u128) as f64;
            let phase = k_l.dot(config_position(config, array)) + TAU * turns / size as f64;
            Complex64::from_polar(norm, phase)
        })
        .collect();
    MultiphotonState::from_amplitudes(manifold, amplitudes, StateLabel::General(n_index), k_l)
}
