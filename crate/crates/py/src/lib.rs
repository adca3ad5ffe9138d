//! Python module `slowfast`: Dulac maps, isoclines, real and complex cycle
//! counting for the slow-fast Darboux foliation.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use slowfast_core::cyclicity::{self, ContourD, ContourOptions, ExperimentOptions};
use slowfast_core::foliation::{self, Branch, Poly};
use slowfast_core::isoclines::{self, BoundaryCurve, Region, Side};
use slowfast_core::{blowup, dulac, leaves, Cpx, Eps};

create_exception!(slowfast, SlowfastError, PyRuntimeError, "Numerical failure inside slowfast-core.");

fn err(e: slowfast_core::Error) -> PyErr {
    match e {
        slowfast_core::Error::InvalidEps { .. } | slowfast_core::Error::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        other => SlowfastError::new_err(other.to_string()),
    }
}

fn eps(e: f64) -> PyResult<Eps> {
    Eps::new(e).map_err(err)
}

fn branch(b: u8) -> PyResult<Branch> {
    Branch::from_index(b).map_err(err)
}

fn side(s: &str) -> PyResult<Side> {
    match s {
        "D0" => Ok(Side::D0),
        "D1" => Ok(Side::D1),
        _ => Err(PyValueError::new_err(format!("side must be 'D0' or 'D1', got {s:?}"))),
    }
}

fn boundary(label: &str) -> PyResult<BoundaryCurve> {
    BoundaryCurve::ALL
        .into_iter()
        .find(|b| b.label() == label)
        .ok_or_else(|| PyValueError::new_err(format!("curve must be one of C+0, C-0, C+pi, C-pi; got {label:?}")))
}

/// Perturbed foliation `dH + delta (P dx + Q dy)`; directions are lists of
/// `(i, j, c)` monomials `c x^i y^j`.
#[pyclass(name = "FoliationParams", module = "slowfast", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: foliation::FoliationParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (eps, delta=0.0, p=Vec::new(), q=Vec::new()))]
    fn new(eps: f64, delta: f64, p: Vec<(usize, usize, f64)>, q: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let inner = foliation::FoliationParams::new(eps, delta, Poly::from_terms(&p), Poly::from_terms(&q)).map_err(err)?;
        Ok(PyParams { inner })
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps.get()
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    fn with_delta(&self, delta: f64) -> Self {
        PyParams { inner: self.inner.with_delta(delta) }
    }

    /// Focus `(x_c, y_c)` of the perturbed field.
    fn focus(&self) -> PyResult<(f64, f64)> {
        foliation::find_focus(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("FoliationParams(eps={}, delta={})", self.inner.eps.get(), self.inner.delta)
    }
}

/// Section function `h(y) = y^eps (1 - y)`.
#[pyfunction]
fn h_section(y: Cpx, eps_: f64) -> PyResult<Cpx> {
    slowfast_core::analytic::h_section(y, eps(eps_)?).map_err(err)
}

/// Real Dulac involution on `(0, 1)`.
#[pyfunction]
fn dulac_real(y: f64, eps_: f64) -> PyResult<f64> {
    dulac::dulac_real(y, eps(eps_)?).map_err(err)
}

/// Holomorphic extension of the Dulac map between `D1` and `D0`.
#[pyfunction]
fn dulac_integrable(y: Cpx, eps_: f64) -> PyResult<Cpx> {
    dulac::dulac_integrable(y, eps(eps_)?).map_err(err)
}

/// Dulac map of the perturbed foliation along branch 1 or 2.
#[pyfunction]
fn dulac_perturbed(y: Cpx, params: &PyParams, branch_: u8) -> PyResult<Cpx> {
    dulac::dulac_perturbed(y, &params.inner, branch(branch_)?).map_err(err)
}

/// `"D0"`, `"D1"`, `"boundary"` or `"outside"`.
#[pyfunction]
fn classify_point(y: Cpx, eps_: f64) -> PyResult<&'static str> {
    Ok(match isoclines::classify_point(y, eps(eps_)?).map_err(err)? {
        Region::D0 => "D0",
        Region::D1 => "D1",
        Region::Boundary => "boundary",
        Region::Outside => "outside",
    })
}

#[pyfunction]
#[pyo3(signature = (theta, side_, eps_, r_max=10.0, chord_tol=1e-4))]
fn trace_isocline(theta: f64, side_: &str, eps_: f64, r_max: f64, chord_tol: f64) -> PyResult<Vec<Cpx>> {
    Ok(isoclines::trace_isocline(theta, side(side_)?, eps(eps_)?, r_max, chord_tol).map_err(err)?.samples)
}

/// One of `"C+0"`, `"C-0"`, `"C+pi"`, `"C-pi"`.
#[pyfunction]
#[pyo3(signature = (curve, eps_, r_max=10.0, chord_tol=1e-4))]
fn trace_boundary_curve(curve: &str, eps_: f64, r_max: f64, chord_tol: f64) -> PyResult<Vec<Cpx>> {
    Ok(isoclines::trace_boundary_curve(boundary(curve)?, eps(eps_)?, r_max, chord_tol).map_err(err)?.samples)
}

#[pyfunction]
fn half_return(y: f64, params: &PyParams, branch_: u8) -> PyResult<f64> {
    foliation::half_return(y, &params.inner, branch(branch_)?).map_err(err)
}

#[pyfunction]
fn displacement(y: f64, params: &PyParams) -> PyResult<f64> {
    foliation::displacement(y, &params.inner).map_err(err)
}

/// Section points scanned for real cycles.
#[pyfunction]
#[pyo3(signature = (params, n=60))]
fn real_section_grid(params: &PyParams, n: usize) -> PyResult<Vec<f64>> {
    cyclicity::real_section_grid(&params.inner, n).map_err(err)
}

/// Real limit cycles as `(y, residual)` pairs on the section through the focus.
#[pyfunction]
#[pyo3(signature = (params, grid=None))]
fn find_real_cycles(py: Python<'_>, params: &PyParams, grid: Option<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
    let p = params.inner.clone();
    py.detach(move || {
        let grid = match grid {
            Some(g) => g,
            None => cyclicity::real_section_grid(&p, 60)?,
        };
        foliation::find_real_cycles(&p, &grid).map(|c| c.into_iter().map(|r| (r.y_fixed, r.residual)).collect())
    })
    .map_err(err)
}

/// First-order term at level `c`, as `(value, abs_integral)`.
#[pyfunction]
fn melnikov(c: f64, params: &PyParams) -> PyResult<(f64, f64)> {
    foliation::melnikov(c, &params.inner).map(|m| (m.value, m.abs_integral)).map_err(err)
}

/// Simple zeros of the Melnikov function, as levels.
#[pyfunction]
#[pyo3(signature = (params, n=40))]
fn melnikov_zeros(py: Python<'_>, params: &PyParams, n: usize) -> PyResult<Vec<f64>> {
    let p = params.inner.clone();
    py.detach(move || foliation::melnikov_zeros(&p, &cyclicity::melnikov_level_grid(p.eps, n))).map_err(err)
}

#[pyfunction]
fn level_to_y(c: f64, eps_: f64) -> PyResult<f64> {
    foliation::level_to_y(c, eps(eps_)?).map_err(err)
}

/// Closed contour around the complex domain of the displacement map, as a
/// list of `(kind, points)` arcs.
#[pyfunction]
fn build_contour(py: Python<'_>, params: &PyParams) -> PyResult<Vec<(String, Vec<Cpx>)>> {
    let p = params.inner.clone();
    let c = py.detach(move || ContourD::build(&p, &ContourOptions::default())).map_err(err)?;
    Ok(c.arcs.into_iter().map(|a| (format!("{:?}", a.kind), a.points)).collect())
}

/// Argument principle for `D1 - D2` on the contour; returns a dict with the
/// winding number, the rounded bound and the Petrov counts.
#[pyfunction]
fn winding_bound<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyDict>> {
    let p = params.inner.clone();
    let r = py
        .detach(move || {
            let c = ContourD::build(&p, &ContourOptions::default())?;
            cyclicity::variation_of_argument(|y| cyclicity::displacement_complex(y, &p), &c)
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("winding", r.winding)?;
    d.set_item("residual", r.residual)?;
    d.set_item("bound", r.bound)?;
    d.set_item("petrov_bound", r.petrov_bound)?;
    d.set_item("petrov_zero_counts", r.petrov_zero_counts)?;
    d.set_item("arc_variations", r.arc_variations)?;
    d.set_item("samples", r.samples)?;
    Ok(d)
}

/// Figure-eight loop on the leaf through `(0, y_plus)`, `y_plus` on `C±pi`,
/// as a dict of `x`, `y` samples and the closure residual.
#[pyfunction]
fn figure_eight<'py>(py: Python<'py>, y_plus: Cpx, eps_: f64) -> PyResult<Bound<'py, PyDict>> {
    let ee = eps(eps_)?;
    let f8 = leaves::figure_eight(y_plus, ee).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("closure_residual", f8.closure_residual())?;
    d.set_item("h_drift", f8.loop_path.h_drift(ee))?;
    d.set_item("w", f8.w)?;
    d.set_item("x", f8.loop_path.x_samples)?;
    d.set_item("y", f8.loop_path.y_samples)?;
    Ok(d)
}

/// Holonomy of the perturbed foliation along the figure-eight through
/// `(0, y_plus)`, applied to a real offset on `{x = 0}`.
#[pyfunction]
fn holonomy_transport(py: Python<'_>, y_plus: Cpx, params: &PyParams, offset: f64) -> PyResult<Cpx> {
    let p = params.inner.clone();
    py.detach(move || {
        let f8 = leaves::figure_eight(y_plus, p.eps)?;
        leaves::holonomy_transport(&f8, &p, offset)
    })
    .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (eps_, x_max=1.0, y_max=2.0, n=201))]
fn rescaled_integral_residual(eps_: f64, x_max: f64, y_max: f64, n: usize) -> PyResult<f64> {
    blowup::rescaled_integral_residual(eps_, &blowup::Region { x_max, y_max, n }).map_err(err)
}

/// Bound, real-cycle and Melnikov counts per `(eps, delta)` cell.
#[pyfunction]
#[pyo3(signature = (eps_grid, delta_seq, p=Vec::new(), q=Vec::new()))]
fn cyclicity_experiment<'py>(
    py: Python<'py>,
    eps_grid: Vec<f64>,
    delta_seq: Vec<f64>,
    p: Vec<(usize, usize, f64)>,
    q: Vec<(usize, usize, f64)>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let (pp, qq) = (Poly::from_terms(&p), Poly::from_terms(&q));
    let rows = py.detach(move || cyclicity::cyclicity_experiment(&eps_grid, &pp, &qq, &delta_seq, &ExperimentOptions::default()));
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("eps", r.eps)?;
            d.set_item("delta", r.delta)?;
            d.set_item("bound", r.bound)?;
            d.set_item("winding", r.winding)?;
            d.set_item("petrov_bound", r.petrov_bound)?;
            d.set_item("real_cycles", r.real_cycles)?;
            d.set_item("melnikov_zeros", r.melnikov_zeros)?;
            d.set_item("violation", r.violation)?;
            d.set_item("error", r.error)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn slowfast(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SlowfastError", m.py().get_type::<SlowfastError>())?;
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(h_section, m)?)?;
    m.add_function(wrap_pyfunction!(dulac_real, m)?)?;
    m.add_function(wrap_pyfunction!(dulac_integrable, m)?)?;
    m.add_function(wrap_pyfunction!(dulac_perturbed, m)?)?;
    m.add_function(wrap_pyfunction!(classify_point, m)?)?;
    m.add_function(wrap_pyfunction!(trace_isocline, m)?)?;
    m.add_function(wrap_pyfunction!(trace_boundary_curve, m)?)?;
    m.add_function(wrap_pyfunction!(half_return, m)?)?;
    m.add_function(wrap_pyfunction!(displacement, m)?)?;
    m.add_function(wrap_pyfunction!(real_section_grid, m)?)?;
    m.add_function(wrap_pyfunction!(find_real_cycles, m)?)?;
    m.add_function(wrap_pyfunction!(melnikov, m)?)?;
    m.add_function(wrap_pyfunction!(melnikov_zeros, m)?)?;
    m.add_function(wrap_pyfunction!(level_to_y, m)?)?;
    m.add_function(wrap_pyfunction!(build_contour, m)?)?;
    m.add_function(wrap_pyfunction!(winding_bound, m)?)?;
    m.add_function(wrap_pyfunction!(figure_eight, m)?)?;
    m.add_function(wrap_pyfunction!(holonomy_transport, m)?)?;
    m.add_function(wrap_pyfunction!(rescaled_integral_residual, m)?)?;
    m.add_function(wrap_pyfunction!(cyclicity_experiment, m)?)?;
    Ok(())
}
