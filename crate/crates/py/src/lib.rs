//! Python bindings for `tomocheck-core`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use tomocheck_core::tomography::{default_x_grid, uniform_phases, DEFAULT_PHASES};
use tomocheck_core::{homodyne, inequalities, purity, Error, PureStateSpec, StateSpec, TomogramGrid, XGrid};

create_exception!(
    tomocheck,
    NumericalError,
    PyRuntimeError,
    "Quadrature or resolution failure."
);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        e if e.is_numerical() => NumericalError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn pure_of(s: &State) -> PyResult<PureStateSpec> {
    match &s.inner {
        StateSpec::Pure(p) => Ok(p.clone()),
        StateSpec::Mixed(_) => Err(PyValueError::new_err("mixture components must be pure states")),
    }
}

/// Single-mode state: Gaussian, Fock superposition, or a finite mixture.
#[pyclass(name = "State", module = "tomocheck", frozen, from_py_object)]
#[derive(Clone)]
struct State {
    inner: StateSpec,
}

#[pymethods]
impl State {
    #[staticmethod]
    fn vacuum() -> Self {
        Self {
            inner: StateSpec::vacuum(),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (mean_q=0.0, mean_p=0.0, squeeze=1.0))]
    fn gaussian(mean_q: f64, mean_p: f64, squeeze: f64) -> PyResult<Self> {
        Ok(Self {
            inner: StateSpec::gaussian(mean_q, mean_p, squeeze).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn fock(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: StateSpec::fock(n).map_err(py_err)?,
        })
    }

    /// Normalizes the coefficients c₀, c₁, ….
    #[staticmethod]
    fn fock_superposition(coeffs: Vec<Complex64>) -> PyResult<Self> {
        let pure = PureStateSpec::fock_superposition(coeffs).map_err(py_err)?;
        Ok(Self { inner: pure.into() })
    }

    #[staticmethod]
    fn thermal(mean_occupation: f64) -> PyResult<Self> {
        Ok(Self {
            inner: StateSpec::thermal(mean_occupation).map_err(py_err)?,
        })
    }

    /// Weighted mixture of pure states; weights must sum to one.
    #[staticmethod]
    fn mixture(components: Vec<(f64, State)>) -> PyResult<Self> {
        let parts = components
            .iter()
            .map(|(w, s)| Ok((*w, pure_of(s)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: StateSpec::mixture(parts).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: StateSpec::from_json(text).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn is_pure(&self) -> bool {
        self.inner.is_pure()
    }

    /// Closed-form (mean, variance) of the quadrature at `phase`.
    fn analytic_moments(&self, phase: f64) -> (f64, f64) {
        let m = self.inner.analytic_moments(phase);
        (m.mean, m.variance)
    }

    fn __repr__(&self) -> String {
        format!("State({})", self.inner.to_json())
    }
}

/// Optical tomogram sampled on phases × a uniform x grid.
#[pyclass(name = "Tomogram", module = "tomocheck", frozen)]
struct Tomogram {
    inner: TomogramGrid,
}

#[pymethods]
impl Tomogram {
    #[new]
    fn new(phases: Vec<f64>, x_min: f64, x_max: f64, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let n_x = rows.first().map_or(0, Vec::len);
        let x = XGrid::new(x_min, x_max, n_x).map_err(py_err)?;
        Ok(Self {
            inner: TomogramGrid::new(phases, x, rows).map_err(py_err)?,
        })
    }

    /// Tomogram of `state`; defaults to uniform phases and an adaptive window.
    #[staticmethod]
    #[pyo3(signature = (state, phases=None, nx=None, x_max=None))]
    fn from_state(state: &State, phases: Option<usize>, nx: Option<usize>, x_max: Option<f64>) -> PyResult<Self> {
        let s = &state.inner;
        let mut x = default_x_grid(s);
        if nx.is_some() || x_max.is_some() {
            x = XGrid::symmetric(x_max.unwrap_or(x.x_max), nx.unwrap_or(x.n_x)).map_err(py_err)?;
        }
        let ph = uniform_phases(phases.unwrap_or(DEFAULT_PHASES));
        Ok(Self {
            inner: TomogramGrid::from_state_with(s, &ph, x).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: TomogramGrid::read_csv(path).map_err(py_err)?,
        })
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        self.inner.write_csv(path).map_err(py_err)
    }

    #[getter]
    fn phases(&self) -> Vec<f64> {
        self.inner.phases().to_vec()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x_grid().points()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().to_vec()
    }

    fn value(&self, x: f64, phase: f64) -> PyResult<f64> {
        self.inner.value(x, phase).map_err(py_err)
    }

    /// (mean, variance) of the stored row at `phase`.
    fn moments(&self, phase: f64) -> PyResult<(f64, f64)> {
        let m = tomocheck_core::moments::grid_moments(&self.inner, phase).map_err(py_err)?;
        Ok((m.mean, m.variance))
    }

    /// Drops the attached state so later checks use the stored rows only.
    fn without_state(&self) -> Self {
        Self {
            inner: self.inner.clone().without_origin(),
        }
    }
}

/// Result of an inequality check.
#[pyclass(name = "Report", module = "tomocheck", frozen)]
struct Report {
    #[pyo3(get)]
    kind: String,
    #[pyo3(get)]
    phase: f64,
    #[pyo3(get)]
    lhs: f64,
    #[pyo3(get)]
    bound: f64,
    #[pyo3(get)]
    margin: f64,
    #[pyo3(get)]
    satisfied: bool,
    #[pyo3(get)]
    stderr: Option<f64>,
    json: String,
}

impl From<inequalities::InequalityReport> for Report {
    fn from(r: inequalities::InequalityReport) -> Self {
        let json = r.to_json();
        let kind = match r.kind {
            inequalities::InequalityKind::Heisenberg => "heisenberg",
            inequalities::InequalityKind::Trifonov => "trifonov",
            inequalities::InequalityKind::TrifonovSweep => "trifonov_sweep",
        };
        Self {
            kind: kind.into(),
            phase: r.phase,
            lhs: r.lhs,
            bound: r.bound,
            margin: r.margin,
            satisfied: r.satisfied,
            stderr: r.stderr,
            json,
        }
    }
}

#[pymethods]
impl Report {
    fn to_json(&self) -> String {
        self.json.clone()
    }

    fn __repr__(&self) -> String {
        format!("Report({})", self.json)
    }
}

/// Homodyne samples as (phase, x) records.
#[pyclass(name = "Dataset", module = "tomocheck", frozen)]
struct Dataset {
    inner: homodyne::HomodyneDataset,
}

#[pymethods]
impl Dataset {
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: homodyne::HomodyneDataset::read(path).map_err(py_err)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        self.inner.write(path).map_err(py_err)
    }

    #[getter]
    fn records(&self) -> Vec<(f64, f64)> {
        self.inner.records.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn samples_at(&self, phase: f64) -> Vec<f64> {
        self.inner.samples_at(phase)
    }

    /// (mean, mean_stderr, variance, variance_stderr) at `phase`.
    fn estimate(&self, phase: f64) -> PyResult<(f64, f64, f64, f64)> {
        let e = homodyne::estimate_moments(&self.inner, phase).map_err(py_err)?;
        Ok((e.mean, e.mean_stderr, e.variance, e.variance_stderr))
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }
}

#[pyfunction]
#[pyo3(signature = (tomogram, tolerance=inequalities::DEFAULT_TOLERANCE))]
fn heisenberg(tomogram: &Tomogram, tolerance: f64) -> PyResult<Report> {
    Ok(inequalities::heisenberg_lhs_with(&tomogram.inner, tolerance)
        .map_err(py_err)?
        .into())
}

#[pyfunction]
#[pyo3(signature = (tomogram1, tomogram2, phase, tolerance=inequalities::DEFAULT_TOLERANCE))]
fn trifonov(tomogram1: &Tomogram, tomogram2: &Tomogram, phase: f64, tolerance: f64) -> PyResult<Report> {
    let r = inequalities::trifonov_lhs_with(&tomogram1.inner, &tomogram2.inner, phase, tolerance).map_err(py_err)?;
    Ok(r.into())
}

/// Minimum of the Trifonov combination over `phases` (default: the first grid's).
#[pyfunction]
#[pyo3(signature = (tomogram1, tomogram2, phases=None, tolerance=inequalities::DEFAULT_TOLERANCE))]
fn trifonov_sweep(
    tomogram1: &Tomogram,
    tomogram2: &Tomogram,
    phases: Option<Vec<f64>>,
    tolerance: f64,
) -> PyResult<Report> {
    let ph = phases.unwrap_or_else(|| tomogram1.inner.phases().to_vec());
    let r = inequalities::trifonov_sweep_with(&tomogram1.inner, &tomogram2.inner, &ph, tolerance).map_err(py_err)?;
    Ok(r.into())
}

/// Overlap functional of two tomograms; equals Tr ρ₁ρ₂.
#[pyfunction]
fn purity_overlap(tomogram1: &Tomogram, tomogram2: &Tomogram) -> PyResult<f64> {
    purity::purity_overlap(&tomogram1.inner, &tomogram2.inner).map_err(py_err)
}

/// (overlap, "pure" | "mixed") for a single tomogram.
#[pyfunction]
#[pyo3(signature = (tomogram, tolerance=purity::DEFAULT_TOLERANCE))]
fn purity_classify(tomogram: &Tomogram, tolerance: f64) -> PyResult<(f64, &'static str)> {
    let r = purity::purity_classify(&tomogram.inner, tolerance).map_err(py_err)?;
    let class = match r.classification {
        purity::Classification::Pure => "pure",
        purity::Classification::Mixed => "mixed",
    };
    Ok((r.overlap, class))
}

/// Seeded homodyne samples; `schedule` lists (phase, count) pairs.
#[pyfunction]
fn simulate(state: &State, schedule: Vec<(f64, usize)>, seed: u64) -> PyResult<Dataset> {
    Ok(Dataset {
        inner: homodyne::sample(&state.inner, &schedule, seed).map_err(py_err)?,
    })
}

#[pyfunction]
fn empirical_trifonov(data1: &Dataset, data2: &Dataset, phase: f64) -> PyResult<Report> {
    Ok(homodyne::empirical_trifonov(&data1.inner, &data2.inner, phase)
        .map_err(py_err)?
        .into())
}

#[pymodule]
fn tomocheck(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<State>()?;
    m.add_class::<Tomogram>()?;
    m.add_class::<Report>()?;
    m.add_class::<Dataset>()?;
    m.add_function(wrap_pyfunction!(heisenberg, m)?)?;
    m.add_function(wrap_pyfunction!(trifonov, m)?)?;
    m.add_function(wrap_pyfunction!(trifonov_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(purity_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(purity_classify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_trifonov, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
