//! Python bindings for `ringglow_core`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use pyo3::exceptions::{PyIndexError, PyMemoryError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use ringglow_core as core;
use ringglow_core::{Direction, Polarization, Vec3};

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Index { .. } => PyIndexError::new_err(e.to_string()),
        core::Error::Resource { .. } => PyMemoryError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn polarization(pol: &str) -> PyResult<Polarization> {
    match pol {
        "x" => Ok(Polarization::x()),
        "y" => Ok(Polarization::y()),
        "z" => Ok(Polarization::z()),
        _ => Err(PyValueError::new_err(format!(
            "pol must be 'x', 'y' or 'z', got {pol:?}"
        ))),
    }
}

fn wavevector(k_dir: (f64, f64, f64)) -> PyResult<Vec3> {
    let v = Vec3::new(k_dir.0, k_dir.1, k_dir.2);
    let norm = v.norm();
    if !norm.is_finite() || norm == 0.0 {
        return Err(PyValueError::new_err(
            "k_dir must be a nonzero finite vector",
        ));
    }
    Ok(v * (TAU / norm))
}

/// Atom positions in units of the transition wavelength.
#[pyclass(name = "AtomArray", frozen)]
struct PyAtomArray {
    inner: core::AtomArray,
}

#[pymethods]
impl PyAtomArray {
    #[staticmethod]
    fn single_ring(n_phi: usize, r: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::AtomArray::single_ring(n_phi, r).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn stacked_rings(n_phi: usize, n_rings: usize, r: f64, d_z: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::AtomArray::stacked_rings(n_phi, n_rings, r, d_z).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n_phi, n_rings, r, d_r=None))]
    fn concentric_rings(n_phi: usize, n_rings: usize, r: f64, d_r: Option<f64>) -> PyResult<Self> {
        let d_r = d_r.unwrap_or(r);
        Ok(Self {
            inner: core::AtomArray::concentric_rings(n_phi, n_rings, r, d_r).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_positions(positions: Vec<(f64, f64, f64)>) -> PyResult<Self> {
        let positions = positions
            .into_iter()
            .map(|(x, y, z)| Vec3::new(x, y, z))
            .collect();
        Ok(Self {
            inner: core::AtomArray::from_positions(positions).map_err(to_py)?,
        })
    }

    fn scaled(&self, s: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.scaled(s).map_err(to_py)?,
        })
    }

    fn positions(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .positions()
            .iter()
            .map(|p| (p.x, p.y, p.z))
            .collect()
    }

    /// 1-based azimuthal index of 1-based atom `mu`.
    fn azimuthal_index(&self, mu: usize) -> PyResult<usize> {
        self.inner.azimuthal_index(mu).map_err(to_py)
    }

    fn ring_index(&self, mu: usize) -> PyResult<usize> {
        self.inner.ring_index(mu).map_err(to_py)
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    #[getter]
    fn n_phi(&self) -> usize {
        self.inner.n_phi()
    }

    #[getter]
    fn n_rings(&self) -> usize {
        self.inner.n_rings()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("AtomArray({})", self.inner.descriptor())
    }
}

/// A phase-imprinted state on the m-excitation manifold.
#[pyclass(name = "State", frozen)]
struct PyState {
    inner: core::MultiphotonState,
}

#[pymethods]
impl PyState {
    #[staticmethod]
    #[pyo3(signature = (array, m, l, k_dir=(0.0, 0.0, 1.0)))]
    fn hpi(array: &PyAtomArray, m: usize, l: i64, k_dir: (f64, f64, f64)) -> PyResult<Self> {
        let inner = core::build_hpi_state(&array.inner, m, l, wavevector(k_dir)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (array, m, n_index, k_dir=(0.0, 0.0, 1.0)))]
    fn generalized(
        array: &PyAtomArray,
        m: usize,
        n_index: u64,
        k_dir: (f64, f64, f64),
    ) -> PyResult<Self> {
        let inner = core::build_generalized_state(&array.inner, m, n_index, wavevector(k_dir)?)
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.manifold().n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.manifold().m()
    }

    /// `("oam", l)` or `("general", n)`.
    #[getter]
    fn label(&self) -> (&'static str, i128) {
        match self.inner.label() {
            core::StateLabel::Oam(l) => ("oam", l as i128),
            core::StateLabel::General(n) => ("general", n as i128),
        }
    }

    fn norm_sqr(&self) -> f64 {
        self.inner.norm_sqr()
    }

    fn __len__(&self) -> usize {
        self.inner.amplitudes().len()
    }
}

/// Lexicographic list of 1-based excitation tuples.
#[pyfunction]
fn enumerate_manifold(n: usize, m: usize) -> PyResult<Vec<Vec<usize>>> {
    let manifold = core::enumerate_manifold(n, m).map_err(to_py)?;
    Ok(manifold.iter().map(|c| c.to_vec()).collect())
}

#[pyfunction]
#[pyo3(signature = (state, array, theta, phi, pol="x"))]
fn omega_f(state: &PyState, array: &PyAtomArray, theta: f64, phi: f64, pol: &str) -> PyResult<f64> {
    core::omega_f(
        &state.inner,
        &array.inner,
        Direction::new(theta, phi),
        polarization(pol)?,
    )
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (state, array, theta, phi, pol="x"))]
fn omega_f_bruteforce(
    state: &PyState,
    array: &PyAtomArray,
    theta: f64,
    phi: f64,
    pol: &str,
) -> PyResult<f64> {
    core::omega_f_bruteforce(
        &state.inner,
        &array.inner,
        Direction::new(theta, phi),
        polarization(pol)?,
    )
    .map_err(to_py)
}

type Grid = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// `(thetas, phis, values)` with `values[i][j]` at `(thetas[i], phis[j])`.
#[pyfunction]
#[pyo3(signature = (state, array, n_theta=91, n_phi_grid=181, pol="x"))]
fn sample_grid(
    py: Python<'_>,
    state: &PyState,
    array: &PyAtomArray,
    n_theta: usize,
    n_phi_grid: usize,
    pol: &str,
) -> PyResult<Grid> {
    let pol = polarization(pol)?;
    let grid = py
        .detach(|| core::sample_grid(&state.inner, &array.inner, pol, n_theta, n_phi_grid))
        .map_err(to_py)?;
    let rows = (0..grid.thetas.len())
        .map(|i| grid.row(i).to_vec())
        .collect();
    Ok((grid.thetas, grid.phis, rows))
}

/// Eigenvalues of the coupling matrix, ascending by decay rate.
#[pyfunction]
#[pyo3(signature = (array, m, pol="x"))]
fn decay_spectrum<'py>(
    py: Python<'py>,
    array: &PyAtomArray,
    m: usize,
    pol: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let pol = polarization(pol)?;
    let spectrum = py
        .detach(|| {
            core::build_effective_coupling(&array.inner, m, pol)
                .and_then(|c| core::decay_spectrum(&c))
        })
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("eigenvalues", spectrum.eigenvalues.clone())?;
    out.set_item("rates", spectrum.rates.clone())?;
    out.set_item("shifts", spectrum.shifts.clone())?;
    out.set_item("condition", spectrum.condition())?;
    Ok(out)
}

/// Excited population and emitted power of `state` at `times` (units of 1/Γ).
#[pyfunction]
#[pyo3(signature = (state, array, times, pol="x"))]
fn fluorescence_trace<'py>(
    py: Python<'py>,
    state: &PyState,
    array: &PyAtomArray,
    times: Vec<f64>,
    pol: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let pol = polarization(pol)?;
    let m = state.inner.manifold().m();
    let trace = py
        .detach(|| {
            let coupling = core::build_effective_coupling(&array.inner, m, pol)?;
            core::fluorescence_trace(&state.inner, &coupling, &times)
        })
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("times", trace.times)?;
    out.set_item("intensity", trace.intensity)?;
    out.set_item("emitted_power", trace.emitted_power)?;
    out.set_item(
        "method",
        match trace.method {
            core::EvolutionMethod::Eigen => "eigen",
            core::EvolutionMethod::Integrator => "integrator",
        },
    )?;
    Ok(out)
}

/// Runs the built-in checks: a list of `(name, status, detail)`.
#[pyfunction]
fn verify(py: Python<'_>) -> Vec<(String, String, String)> {
    py.detach(core::verify::run_suite)
        .into_iter()
        .map(|r| {
            let status = match r.status {
                core::verify::Status::Pass => "pass",
                core::verify::Status::Fail => "fail",
                core::verify::Status::Skip => "skip",
            };
            (r.name.to_string(), status.to_string(), r.detail)
        })
        .collect()
}

#[pymodule]
fn ringglow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAtomArray>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(enumerate_manifold, m)?)?;
    m.add_function(wrap_pyfunction!(omega_f, m)?)?;
    m.add_function(wrap_pyfunction!(omega_f_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(sample_grid, m)?)?;
    m.add_function(wrap_pyfunction!(decay_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(fluorescence_trace, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
