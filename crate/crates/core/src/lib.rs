//! Helical-phase-imprinted multiphoton states on atomic ring arrays.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds single, stacked and concentric rings (lengths in
//!   units of the transition wavelength, so `|k| = 2π`).
//! * [`manifold`] enumerates the `C(N, M)` excitation configurations and
//!   constructs phase-imprinted amplitude vectors.
//! * [`farfield`] evaluates the dimensionless far-field pattern `Ω_f(θ, φ)`.
//! * [`dynamics`] builds the non-Hermitian coupling matrix of the
//!   M-excitation sector and evolves fluorescence traces.
//! * [`io`] holds the CSV/JSON exchange formats and [`verify`] the
//!   self-check property suite used by the CLI.

pub mod dynamics;
pub mod error;
pub mod farfield;
pub mod geometry;
pub mod io;
pub mod manifold;
pub mod verify;

pub use dynamics::{
    build_effective_coupling, coupling_on, decay_spectrum, eigen_overlaps, fluorescence_trace,
    integrate_rk4, rddi_pair, trace_with_spectrum, DecaySpectrum, EffectiveCoupling,
    EvolutionMethod, FluorescenceTrace, PairKernel,
};
pub use error::{Error, Result};
pub use farfield::{
    count_azimuthal_peaks, omega_f, omega_f_bruteforce, prefactor, sample_grid, sphere_mean,
    three_atom_closed_form, Direction, FarFieldGrid, Polarization,
};
pub use geometry::{AtomArray, RingKind, Vec3};
pub use manifold::{
    binomial, build_generalized_state, build_hpi_state, default_k_l, enumerate_manifold,
    generalized_state_on, helical_phase_sum, hpi_state_on, ExcitationManifold, MultiphotonState,
    StateLabel,
};
