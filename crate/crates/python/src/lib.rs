//! Python bindings: parameters, runs, diagnostics tables and the
//! verification suite.
//!
//! ```python
//! import freebound as fb
//! p = fb.ModelParams(a=1.0, gamma=5.0, mu=0.1, P=1.0, R=2, N=32)
//! traj = fb.run(p, "single_mode", t_end=1.0, output_dt=0.1, k=4, amplitude=0.01)
//! traj.column("total_energy")
//! ```

use std::collections::HashMap;
use std::path::Path;

use freebound::config::{boundary_relax, mixed_mode, single_mode, stationary, RunConfig, Target};
use freebound::diagnostics::{eulerian_map, TRAJECTORY_COLUMNS};
use freebound::galerkin::output_grid;
use freebound::oracle;
use freebound::verify::{mutation_sensitivity, Suite};
use freebound::{Error, Galerkin, InitialData, RhsVariant, RunOptions, Stepping};
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Config(_)
        | Error::InvalidParams { .. }
        | Error::InvalidInitialData(_)
        | Error::InsufficientResolution { .. }
        | Error::Domain { .. } => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

/// Physical and discretization constants.
#[pyclass(name = "ModelParams", frozen)]
#[derive(Clone)]
struct PyModelParams {
    inner: freebound::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (a=1.0, gamma=5.0, mu=0.1, P=1.0, R=2, N=32, oversample=4, xi_floor=1e-8, tol_ode=1e-10))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn new(
        a: f64,
        gamma: f64,
        mu: f64,
        P: f64,
        R: usize,
        N: usize,
        oversample: usize,
        xi_floor: f64,
        tol_ode: f64,
    ) -> PyResult<Self> {
        let inner = freebound::ModelParams::new(a, gamma, mu, P, R, N)
            .and_then(|p| p.with_oversample(oversample))
            .and_then(|p| p.with_xi_floor(xi_floor))
            .and_then(|p| p.with_tol_ode(tol_ode))
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }
    #[getter(P)]
    fn p_ext(&self) -> f64 {
        self.inner.p_ext
    }
    #[getter(R)]
    fn undamped(&self) -> usize {
        self.inner.undamped
    }
    #[getter(N)]
    fn modes(&self) -> usize {
        self.inner.modes
    }
    #[getter(M)]
    fn grid(&self) -> usize {
        self.inner.grid
    }

    /// Equilibrium specific volume `(a/P)^(1/gamma)`.
    fn stationary_xi(&self) -> f64 {
        freebound::stationary_xi(&self.inner)
    }

    /// `a gamma / xi_plus^(gamma+1)`.
    fn smallness_threshold(&self, xi_plus: f64) -> f64 {
        self.inner.smallness_threshold(xi_plus)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(a={}, gamma={}, mu={}, P={}, R={}, N={}, oversample={})",
            p.a, p.gamma, p.mu, p.p_ext, p.undamped, p.modes, p.oversample
        )
    }
}

/// Recorded diagnostics and coefficient states of one run.
#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    system: Galerkin,
    traj: freebound::Trajectory,
    /// Set when the run aborted; the trajectory is then partial.
    #[pyo3(get)]
    error: Option<String>,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.traj.times()
    }

    #[getter]
    fn columns(&self) -> Vec<&'static str> {
        TRAJECTORY_COLUMNS.to_vec()
    }

    #[getter]
    fn accepted_steps(&self) -> u64 {
        self.traj.accepted_steps
    }

    fn __len__(&self) -> usize {
        self.traj.len()
    }

    /// One diagnostics column over all records.
    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        let idx = TRAJECTORY_COLUMNS
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown column {name:?}")))?;
        Ok(self.traj.records.iter().map(|r| r.table_row()[idx]).collect())
    }

    /// All records as dictionaries keyed by column name.
    fn records(&self) -> Vec<HashMap<&'static str, f64>> {
        self.traj
            .records
            .iter()
            .map(|r| TRAJECTORY_COLUMNS.iter().copied().zip(r.table_row()).collect())
            .collect()
    }

    /// Coefficients `(alpha, gtilde, pi)` of record `i` (negative indices
    /// count from the end).
    fn coefficients(&self, i: isize) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
        let s = &self.traj.states[self.index(i)?];
        Ok((s.alpha.clone(), s.gtilde.clone(), s.pi()))
    }

    /// Fields `x, v, xi, rho, r` of record `i` on a uniform grid of `m`
    /// points (default: the run's grid).
    #[pyo3(signature = (i, m=None))]
    fn snapshot<'py>(&self, py: Python<'py>, i: isize, m: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
        let s = &self.traj.states[self.index(i)?];
        let m = m.unwrap_or(self.system.params().grid);
        if m < 2 {
            return Err(PyValueError::new_err("need at least 2 grid points"));
        }
        let v = self.system.reconstruct_v(s, m).map_err(to_py)?;
        let xi = self.system.reconstruct_xi(s, m);
        let (r, _) = eulerian_map(&self.system, s, m).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("t", s.t)?;
        d.set_item("x", xi.xs())?;
        d.set_item("v", v.values().to_vec())?;
        d.set_item("rho", xi.values().iter().map(|x| 1.0 / x).collect::<Vec<_>>())?;
        d.set_item("xi", xi.into_values())?;
        d.set_item("r", r.into_values())?;
        Ok(d)
    }
}

impl PyTrajectory {
    fn index(&self, i: isize) -> PyResult<usize> {
        let n = self.traj.len() as isize;
        let j = if i < 0 { n + i } else { i };
        if (0..n).contains(&j) {
            Ok(j as usize)
        } else {
            Err(pyo3::exceptions::PyIndexError::new_err(format!("record {i} out of range for {n} records")))
        }
    }
}

fn preset(params: &freebound::ModelParams, name: &str, kw: Option<&Bound<'_, PyDict>>) -> PyResult<InitialData> {
    let get = |key: &str| -> PyResult<Option<Bound<'_, PyAny>>> {
        match kw {
            Some(d) => d.get_item(key),
            None => Ok(None),
        }
    };
    let need_f64 = |key: &str| -> PyResult<f64> {
        get(key)?
            .ok_or_else(|| PyValueError::new_err(format!("preset {name} needs `{key}`")))?
            .extract()
    };
    Ok(match name {
        "stationary" => stationary(params),
        "single_mode" => {
            let k: usize = match get("k")? {
                Some(v) => v.extract()?,
                None => return Err(PyValueError::new_err("preset single_mode needs `k`")),
            };
            if k == 0 || k > params.modes {
                return Err(PyValueError::new_err(format!("k must be in 1..={}", params.modes)));
            }
            let target = match get("target")? {
                None => Target::Velocity,
                Some(v) => match v.extract::<String>()?.as_str() {
                    "velocity" => Target::Velocity,
                    "volume" => Target::Volume,
                    other => return Err(PyValueError::new_err(format!("unknown target {other:?}"))),
                },
            };
            single_mode(params, k, need_f64("amplitude")?, target)
        }
        "boundary_relax" => boundary_relax(need_f64("pi0")?),
        "mixed_mode" => mixed_mode(params, need_f64("amplitude")?, need_f64("ratio")?).map_err(to_py)?,
        other => return Err(PyValueError::new_err(format!("unknown preset {other:?}"))),
    })
}

fn integrate(
    py: Python<'_>,
    params: freebound::ModelParams,
    init: InitialData,
    t_end: f64,
    outputs: Vec<f64>,
    options: RunOptions,
) -> PyResult<PyTrajectory> {
    let system = Galerkin::new(params).map_err(to_py)?;
    let state = system.initial_state(&init).map_err(to_py)?;
    let result = py.detach(|| freebound::run_from(&system, state, t_end, &outputs, &options));
    match result {
        Ok(traj) => Ok(PyTrajectory { system, traj, error: None }),
        Err(abort) if !abort.partial.is_empty() => Ok(PyTrajectory {
            system,
            traj: abort.partial,
            error: Some(abort.error.to_string()),
        }),
        Err(abort) => Err(to_py(abort.error)),
    }
}

/// Integrates a preset (`stationary`, `single_mode`, `boundary_relax`,
/// `mixed_mode`) to `t_end`. Preset arguments are keywords. A fixed `dt`
/// selects fixed steps, otherwise the step is adaptive. Monitor failures
/// return a partial trajectory with `error` set.
#[pyfunction]
#[pyo3(signature = (params, preset_name, t_end, output_dt=None, dt=None, monitors=true, **kwargs))]
fn run(
    py: Python<'_>,
    params: &PyModelParams,
    preset_name: &str,
    t_end: f64,
    output_dt: Option<f64>,
    dt: Option<f64>,
    monitors: bool,
    kwargs: Option<&Bound<'_, PyDict>>,
) -> PyResult<PyTrajectory> {
    if !(t_end > 0.0) {
        return Err(PyValueError::new_err("t_end must be positive"));
    }
    let p = params.inner.clone();
    let init = preset(&p, preset_name, kwargs)?;
    let out_dt = output_dt.unwrap_or(t_end / 100.0);
    if !(out_dt > 0.0) {
        return Err(PyValueError::new_err("output_dt must be positive"));
    }
    let stepping = match dt {
        Some(dt) if dt > 0.0 => Stepping::Fixed { dt },
        Some(_) => return Err(PyValueError::new_err("dt must be positive")),
        None => Stepping::Adaptive {
            h0: out_dt.min(1e-3),
            h_max: out_dt,
        },
    };
    let options = RunOptions {
        stepping,
        monitors: if monitors {
            Default::default()
        } else {
            freebound::MonitorSettings::relaxed()
        },
        variant: RhsVariant::Faithful,
    };
    integrate(py, p, init, t_end, output_grid(t_end, out_dt), options)
}

/// Runs a TOML configuration given as text. Relative `custom` data paths
/// resolve against `base_dir`.
#[pyfunction]
#[pyo3(signature = (toml_text, base_dir="."))]
fn run_config(py: Python<'_>, toml_text: &str, base_dir: &str) -> PyResult<PyTrajectory> {
    let cfg = RunConfig::from_toml_str(toml_text).map_err(to_py)?;
    let params = cfg.params().map_err(to_py)?;
    let init = cfg.initial_data(&params, Path::new(base_dir)).map_err(to_py)?;
    integrate(py, params, init, cfg.time.t_end, cfg.output_times(), cfg.run_options())
}

#[pyfunction]
fn stationary_xi(params: &PyModelParams) -> f64 {
    freebound::stationary_xi(&params.inner)
}

/// Bracket `(min(pi0, xi*), max(pi0, xi*))` of the boundary value.
#[pyfunction]
fn pi_bounds(pi0: f64, params: &PyModelParams) -> (f64, f64) {
    freebound::pi_bounds(pi0, &params.inner)
}

/// Frequency `omega` and viscous rate `delta` of mode `k` about the
/// equilibrium.
#[pyfunction]
fn linearized_prediction(k: usize, params: &PyModelParams) -> PyResult<HashMap<&'static str, f64>> {
    if k == 0 {
        return Err(PyValueError::new_err("modes start at 1"));
    }
    let l = oracle::linearized_prediction(k, &params.inner);
    Ok(HashMap::from([
        ("omega", l.omega),
        ("delta", l.delta),
        ("damped_frequency", l.damped_frequency()),
    ]))
}

fn state(params: &PyModelParams, alpha: Vec<f64>, gtilde: Vec<f64>, pi: f64) -> PyResult<(Galerkin, freebound::GalerkinState)> {
    let n = params.inner.modes;
    if alpha.len() != n || gtilde.len() != n {
        return Err(PyValueError::new_err(format!("need {n} coefficients per field")));
    }
    let system = Galerkin::new(params.inner.clone()).map_err(to_py)?;
    let s = system.state_from_coeffs(alpha, gtilde, pi);
    Ok((system, s))
}

/// Fast right-hand side `(dalpha, dgtilde, dpi)` of a coefficient state.
#[pyfunction]
fn assemble_rhs(params: &PyModelParams, alpha: Vec<f64>, gtilde: Vec<f64>, pi: f64) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let (system, s) = state(params, alpha, gtilde, pi)?;
    let r = system.assemble_rhs(&s).map_err(to_py)?;
    Ok((r.dalpha, r.dgtilde, r.dpi))
}

/// The same right-hand side by the dense quadrature oracle.
#[pyfunction]
#[pyo3(signature = (params, alpha, gtilde, pi, refinement=8))]
fn dense_rhs(
    params: &PyModelParams,
    alpha: Vec<f64>,
    gtilde: Vec<f64>,
    pi: f64,
    refinement: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let (system, s) = state(params, alpha, gtilde, pi)?;
    let r = oracle::dense_rhs(&system, &s, refinement).map_err(to_py)?;
    Ok((r.dalpha, r.dgtilde, r.dpi))
}

/// Runs the acceptance suite; returns `(checks, notes)` where each check
/// is a dict with `name, passed, measured, threshold, detail`.
#[pyfunction]
#[pyo3(signature = (params=None, mutations=true))]
fn verify<'py>(
    py: Python<'py>,
    params: Option<&PyModelParams>,
    mutations: bool,
) -> PyResult<(Vec<Bound<'py, PyDict>>, Vec<String>)> {
    let base = params.map(|p| p.inner.clone()).unwrap_or_default();
    let report = py.detach(|| {
        let mut report = Suite::with_base(base.clone(), RhsVariant::Faithful).run_all();
        if mutations {
            report.checks.extend(mutation_sensitivity(&base));
        }
        report
    });
    let mut checks = Vec::with_capacity(report.checks.len());
    for c in report.checks {
        let d = PyDict::new(py);
        d.set_item("name", c.name)?;
        d.set_item("passed", c.passed)?;
        d.set_item("measured", c.measured)?;
        d.set_item("threshold", c.threshold)?;
        d.set_item("detail", c.detail)?;
        checks.push(d);
    }
    Ok((checks, report.notes))
}

#[pymodule]
#[pyo3(name = "freebound")]
fn freebound_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_xi, m)?)?;
    m.add_function(wrap_pyfunction!(pi_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(linearized_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(dense_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("TRAJECTORY_COLUMNS", TRAJECTORY_COLUMNS.to_vec())?;
    Ok(())
}
