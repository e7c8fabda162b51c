//! Python bindings: model parameters, 1D profiles, grids, steady runs,
//! Melnikov predictions and the farfield structures.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use quench::config::ExperimentConfig;
use quench::farfield::{self, PartitionSpec, ShearSpec};
use quench::profiles1d::{self, FrontSide};
use quench::quench2d::{self, ThetaSpec};
use quench::{experiment, melnikov, measure, spectral, Error, Grid1D};

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::Config(_) | Error::InvalidWindow(_) | Error::ShapeMismatch(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn poly(coeffs: Vec<f64>) -> PyResult<quench::Poly> {
    quench::Poly::new(&coeffs).map_err(err)
}

#[pyclass(name = "ModelParams", from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: quench::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (c_x = 0.5, alpha = 0.0, g_left = vec![], g_right = vec![], c_y = 0.0))]
    fn new(c_x: f64, alpha: f64, g_left: Vec<f64>, g_right: Vec<f64>, c_y: f64) -> PyResult<Self> {
        let mut inner = quench::ModelParams::new(c_x, alpha, poly(g_left)?, poly(g_right)?).map_err(err)?;
        inner.c_y = c_y;
        inner.validate().map_err(err)?;
        Ok(PyModelParams { inner })
    }

    #[getter]
    fn c_x(&self) -> f64 {
        self.inner.c_x
    }

    #[getter]
    fn c_y(&self) -> f64 {
        self.inner.c_y
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn g_left(&self) -> Vec<f64> {
        self.inner.g_left.coeffs().to_vec()
    }

    #[getter]
    fn g_right(&self) -> Vec<f64> {
        self.inner.g_right.coeffs().to_vec()
    }

    fn with_alpha(&self, alpha: f64) -> Self {
        PyModelParams {
            inner: self.inner.with_alpha(alpha),
        }
    }

    /// `(z_minus, z_zero, z_plus)` at the stored alpha.
    fn equilibria(&self) -> PyResult<(f64, f64, f64)> {
        let z = quench::model::stable_zeros(self.inner.alpha, &self.inner).map_err(err)?;
        Ok((z.z_minus, z.z_zero, z.z_plus))
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(c_x={:?}, alpha={:?}, g_left=[{}], g_right=[{}], c_y={:?})",
            p.c_x, p.alpha, p.g_left, p.g_right, p.c_y
        )
    }
}

/// Values on a uniform 2D grid, row-major with `y` outer.
#[pyclass(name = "Field2D", from_py_object)]
#[derive(Clone)]
struct PyField2D {
    inner: quench::Field2D,
}

#[pymethods]
impl PyField2D {
    /// Zero field on `[-half_x, half_x] x [-half_y, half_y]`.
    #[staticmethod]
    fn centered(half_x: f64, half_y: f64, h: f64) -> PyResult<Self> {
        Ok(PyField2D {
            inner: quench::Field2D::centered(half_x, half_y, h).map_err(err)?,
        })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(PyField2D {
            inner: quench::Field2D::read_binary(&path).map_err(err)?,
        })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_binary(&path).map_err(err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.ny, self.inner.nx)
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        (0..self.inner.nx).map(|i| self.inner.x(i)).collect()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        (0..self.inner.ny).map(|j| self.inner.y(j)).collect()
    }

    /// Flat row-major values.
    #[getter]
    fn data(&self) -> Vec<f64> {
        self.inner.data.clone()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        if i >= self.inner.nx || j >= self.inner.ny {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) out of range")));
        }
        Ok(self.inner.get(i, j))
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn oddness_defect(&self) -> f64 {
        self.inner.oddness_defect()
    }

    /// Least-squares angle of the nodal line over `[x_min, x_max]`.
    fn measure_angle(&self, py: Python<'_>, x_min: f64, x_max: f64) -> PyResult<Py<PyDict>> {
        let m = measure::measure_angle(&self.inner, (x_min, x_max)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("psi", m.psi)?;
        d.set_item("phi", m.phi)?;
        d.set_item("slope", m.slope)?;
        d.set_item("intercept", m.intercept)?;
        d.set_item("rms_fit_error", m.rms_fit_error)?;
        d.set_item("psi_std_error", m.psi_std_error)?;
        d.set_item("n_points", m.n_points)?;
        Ok(d.unbind())
    }

    fn contact_height(&self) -> PyResult<f64> {
        measure::contact_height(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Field2D(nx={}, ny={}, h={:?})", self.inner.nx, self.inner.ny, self.inner.hx)
    }
}

/// Quenched front `u_t` (`side="top"`) or `u_b` on `[-half_width, half_width]`.
#[pyfunction]
#[pyo3(signature = (p, half_width = 30.0, h = 0.025, side = "top"))]
fn quench_front(p: &PyModelParams, half_width: f64, h: f64, side: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let side = match side {
        "top" => FrontSide::Top,
        "bottom" => FrontSide::Bottom,
        s => return Err(PyValueError::new_err(format!("side must be 'top' or 'bottom', got {s:?}"))),
    };
    let g = Grid1D::symmetric(half_width, h).map_err(err)?;
    let f = profiles1d::solve_quench_front(side, &p.inner, g).map_err(err)?;
    Ok((g.points(), f.values))
}

/// `(c_n, xi, values)` of the planar wave.
#[pyfunction]
#[pyo3(signature = (p, half_width = 30.0, h = 0.025))]
fn traveling_wave(p: &PyModelParams, half_width: f64, h: f64) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let g = Grid1D::symmetric(half_width, h).map_err(err)?;
    let w = profiles1d::solve_traveling_wave(&p.inner, g).map_err(err)?;
    Ok((w.speed, g.points(), w.profile.values))
}

#[pyfunction]
fn cn_prime(g_left: Vec<f64>) -> PyResult<f64> {
    Ok(profiles1d::cn_prime_quadrature(&poly(g_left)?))
}

#[pyfunction]
fn cy_from_speed(c_n: f64, psi: f64, c_x: f64) -> PyResult<f64> {
    profiles1d::cy_from_speed(c_n, psi, c_x).map_err(err)
}

/// The odd solution `Θ` at `α = 0`.
#[pyfunction]
#[pyo3(signature = (c_x, half_width = 60.0, h = 0.25, tol = 1e-9))]
fn solve_theta(py: Python<'_>, c_x: f64, half_width: f64, h: f64, tol: f64) -> PyResult<PyField2D> {
    let spec = ThetaSpec {
        half_x: half_width,
        half_y: half_width,
        h,
        tol,
        ..ThetaSpec::default()
    };
    let f = py.detach(|| quench2d::solve_theta(c_x, &spec)).map_err(err)?;
    Ok(PyField2D { inner: f })
}

/// Pinned steady run; returns the field and a dict of measurements.
#[pyfunction]
#[pyo3(signature = (p, half_width = 60.0, h = 0.25, tol = 1e-8, window = (-50.0, -20.0)))]
fn simulate(
    py: Python<'_>,
    p: &PyModelParams,
    half_width: f64,
    h: f64,
    tol: f64,
    window: (f64, f64),
) -> PyResult<(PyField2D, Py<PyDict>)> {
    let mut s = ExperimentConfig::default().sim;
    s.half_width = half_width;
    s.h = h;
    s.tol = tol;
    s.window = window;
    let params = p.inner;
    let o = py.detach(|| experiment::simulate_angle(&params, &s)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("psi", o.angle.psi)?;
    d.set_item("phi", o.angle.phi)?;
    d.set_item("intercept", o.angle.intercept)?;
    d.set_item("c_y", o.steady.c_y)?;
    d.set_item("drift", o.drift)?;
    d.set_item("steps", o.steady.steps)?;
    d.set_item("residual", o.steady.final_residual)?;
    Ok((PyField2D { inner: o.steady.field }, d.unbind()))
}

/// Melnikov quantities from `Θ` for the perturbation in `p`.
#[pyfunction]
fn melnikov_report(py: Python<'_>, theta: &PyField2D, p: &PyModelParams) -> PyResult<Py<PyDict>> {
    let r = melnikov::predict(&theta.inner, &p.inner).map_err(err)?;
    let d = PyDict::new(py);
    for (k, v) in r.to_key_values() {
        d.set_item(k, v)?;
    }
    Ok(d.unbind())
}

/// Forward and adjoint relative residuals of `Θ_y` and `e^{c_x x} Θ_y`.
#[pyfunction]
fn kernel_check(theta: &PyField2D, c_x: f64) -> (f64, f64) {
    let k = spectral::kernel_check_2d(&theta.inner, c_x);
    (k.forward_residual, k.adjoint_residual)
}

/// Largest eigenvalue of the linearization about the top quenched front.
#[pyfunction]
#[pyo3(signature = (c_x, half_width = 30.0, h = 0.025))]
fn front_max_eigenvalue(c_x: f64, half_width: f64, h: f64) -> PyResult<f64> {
    let g = Grid1D::symmetric(half_width, h).map_err(err)?;
    let p = quench::ModelParams {
        c_x,
        ..quench::ModelParams::default()
    };
    let f = profiles1d::solve_quench_front(FrontSide::Top, &p, g).map_err(err)?;
    let op = spectral::LinearOperator1D::quenched_front(&f, c_x).map_err(err)?;
    spectral::max_real_eig_1d(&op).map_err(err)
}

/// `(chi_t, chi_r, chi_b, chi_l, chi_0)` at `(x, y)`.
#[pyfunction]
fn partition_of_unity(r: f64, x: f64, y: f64) -> PyResult<(f64, f64, f64, f64, f64)> {
    let w = farfield::partition_of_unity(&PartitionSpec::new(r).map_err(err)?, x, y);
    Ok((w.top, w.right, w.bottom, w.left, w.core))
}

#[pyfunction]
fn shear_map(x: f64, y: f64, psi: f64) -> PyResult<(f64, f64)> {
    Ok(farfield::shear_map(x, y, &ShearSpec::new(psi).map_err(err)?))
}

#[pyfunction]
fn shear_inverse(x: f64, y: f64, psi: f64) -> PyResult<(f64, f64)> {
    Ok(farfield::shear_inverse(x, y, &ShearSpec::new(psi).map_err(err)?))
}

/// Farfield-core solve at `alpha`; `theta` must live on the solver grid.
#[pyfunction]
#[pyo3(signature = (alpha, p, theta, radius = 20.0, half_width = 40.0, h = 0.25, tol = 1e-6, eta = None))]
#[allow(clippy::too_many_arguments)]
fn solve_bordered(
    py: Python<'_>,
    alpha: f64,
    p: &PyModelParams,
    theta: &PyField2D,
    radius: f64,
    half_width: f64,
    h: f64,
    tol: f64,
    eta: Option<f64>,
) -> PyResult<(PyField2D, Py<PyDict>)> {
    let spec = PartitionSpec::new(radius).map_err(err)?;
    let settings = farfield::BorderedSpec {
        half_width,
        h,
        tol,
        ..farfield::BorderedSpec::default()
    };
    let eta = eta.unwrap_or_else(|| farfield::default_eta(p.inner.c_x));
    let params = p.inner;
    let c = py
        .detach(|| farfield::solve_bordered(alpha, &params, &spec, eta, &theta.inner, &settings))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("psi", c.psi)?;
    d.set_item("alpha", c.alpha)?;
    d.set_item("c_y", c.c_y)?;
    d.set_item("weighted_residual", c.weighted_residual)?;
    d.set_item("projected_residual", c.projected_residual)?;
    d.set_item("eta", c.weight_rate)?;
    d.set_item("iterations", c.iterations)?;
    Ok((PyField2D { inner: c.w }, d.unbind()))
}

/// Runs a config given as text; returns the written paths.
#[pyfunction]
fn run_config(py: Python<'_>, text: &str) -> PyResult<Vec<PathBuf>> {
    let cfg = ExperimentConfig::parse(text).map_err(err)?;
    let s = py.detach(|| experiment::run(&cfg)).map_err(err)?;
    Ok(s.artifacts)
}

#[pymodule]
#[pyo3(name = "quench")]
fn quench_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyField2D>()?;
    m.add_function(wrap_pyfunction!(quench_front, m)?)?;
    m.add_function(wrap_pyfunction!(traveling_wave, m)?)?;
    m.add_function(wrap_pyfunction!(cn_prime, m)?)?;
    m.add_function(wrap_pyfunction!(cy_from_speed, m)?)?;
    m.add_function(wrap_pyfunction!(solve_theta, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(melnikov_report, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_check, m)?)?;
    m.add_function(wrap_pyfunction!(front_max_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(partition_of_unity, m)?)?;
    m.add_function(wrap_pyfunction!(shear_map, m)?)?;
    m.add_function(wrap_pyfunction!(shear_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bordered, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
