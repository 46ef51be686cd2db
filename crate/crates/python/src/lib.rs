//! Python bindings: `import pycubature5`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cubature5::bounds;
use cubature5::constructor::{self, CubatureRule};
use cubature5::moments::{self, AxisMoments, MeasureSpec, MomentOracle, RadialMoments};
use cubature5::polyparse::parse;
use cubature5::verify;

create_exception!(pycubature5, CubatureError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    CubatureError::new_err(e.to_string())
}

/// An integration measure: region plus weight function.
#[pyclass(name = "Measure", module = "pycubature5", frozen)]
pub struct PyMeasure {
    inner: MeasureSpec,
}

#[pymethods]
impl PyMeasure {
    /// `[-1, 1]^n` with constant weight 1/2 per axis, or the Gegenbauer
    /// weight `(1 - x²)^alpha` (one value or one per axis).
    #[staticmethod]
    #[pyo3(signature = (n, alpha=None))]
    fn cube(n: usize, alpha: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = match alpha {
            None => MeasureSpec::cube(n),
            Some(a) if a.len() == 1 => MeasureSpec::gegenbauer(n, a[0]),
            Some(a) if a.len() == n => MeasureSpec::gegenbauer_axes(a),
            Some(a) => {
                return Err(err(format!("alpha has {} values but n = {n}", a.len())));
            }
        };
        inner.map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn gaussian(n: usize) -> PyResult<Self> {
        MeasureSpec::gaussian(n).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn unit_ball(n: usize) -> PyResult<Self> {
        MeasureSpec::unit_ball(n).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn shell(n: usize, r: f64) -> PyResult<Self> {
        MeasureSpec::shell(n, r).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn exp_radial(n: usize) -> PyResult<Self> {
        MeasureSpec::exp_radial(n).map(|inner| Self { inner }).map_err(err)
    }

    /// Product measure from per-axis moments `(m0, m2, m4, m6)`.
    #[staticmethod]
    fn custom_product(axes: Vec<(f64, f64, f64, f64)>) -> PyResult<Self> {
        let axes = axes
            .into_iter()
            .map(|(m0, m2, m4, m6)| AxisMoments::even(m0, m2, m4, m6))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        MeasureSpec::custom_product(axes).map(|inner| Self { inner }).map_err(err)
    }

    /// Spherically symmetric measure from `L(1), L(x1²), L(x1⁴), L(x1²x2²)`.
    #[staticmethod]
    fn custom_radial(n: usize, mass: f64, second: f64, fourth: f64, mixed: f64) -> PyResult<Self> {
        let m = RadialMoments {
            mass,
            second,
            fourth,
            mixed,
        };
        MeasureSpec::custom_radial(n, m).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn region(&self) -> String {
        self.inner.region_tag()
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    #[getter]
    fn is_product(&self) -> bool {
        self.inner.is_product()
    }

    /// `L(x^alpha)`.
    fn moment(&self, alpha: Vec<u32>) -> PyResult<f64> {
        MomentOracle::new(&self.inner).evaluate(&alpha).map_err(err)
    }

    /// Exact integral of a polynomial expression such as `"x1^2*x2^2 - 3"`.
    fn integrate(&self, expression: &str) -> PyResult<f64> {
        let poly = parse(expression, self.inner.dimension()).map_err(err)?;
        MomentOracle::new(&self.inner).integrate(&poly).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Measure('{}', n={})", self.inner.region_tag(), self.inner.dimension())
    }
}

/// A cubature rule: nodes, weights and construction metadata.
#[pyclass(name = "Rule", module = "pycubature5", frozen)]
pub struct PyRule {
    inner: CubatureRule,
}

#[pymethods]
impl PyRule {
    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.declared_degree
    }

    #[getter]
    fn region(&self) -> String {
        self.inner.region.clone()
    }

    #[getter]
    fn nodes(&self) -> Vec<Vec<f64>> {
        self.inner.nodes.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    #[getter]
    fn scale_diag(&self) -> Vec<f64> {
        self.inner.scale_diag.clone()
    }

    #[getter]
    fn points_in_region(&self) -> bool {
        self.inner.points_in_region
    }

    #[getter]
    fn has_negative_weights(&self) -> bool {
        self.inner.has_negative_weights
    }

    #[getter]
    fn attains_moller_bound(&self) -> bool {
        self.inner.attains_moller_bound
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CubatureRule::from_json(text).map(|inner| Self { inner }).map_err(err)
    }

    /// Apply the rule to a polynomial expression.
    fn integrate(&self, expression: &str) -> PyResult<f64> {
        let poly = parse(expression, self.inner.dimension).map_err(err)?;
        verify::apply_rule(&self.inner, &poly).map_err(err)
    }

    /// Exactness sweep against `measure`; returns
    /// `{"degrees": [{"degree", "max_rel_error", "worst_monomial"}], "pass", "tolerance"}`.
    #[pyo3(signature = (measure, max_degree=5, tolerance=verify::DEFAULT_TOLERANCE))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        measure: &PyMeasure,
        max_degree: u32,
        tolerance: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let oracle = MomentOracle::new(&measure.inner);
        let report =
            verify::exactness_sweep(&self.inner, &oracle, max_degree, tolerance).map_err(err)?;
        let degrees = report
            .degrees
            .iter()
            .map(|d| {
                let entry = PyDict::new(py);
                entry.set_item("degree", d.degree)?;
                entry.set_item("max_rel_error", d.max_rel_error)?;
                entry.set_item("worst_monomial", d.worst_monomial.clone())?;
                Ok(entry)
            })
            .collect::<PyResult<Vec<_>>>()?;
        let out = PyDict::new(py);
        out.set_item("degrees", degrees)?;
        out.set_item("pass", report.pass)?;
        out.set_item("tolerance", report.tolerance)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Rule('{}', n={}, degree={}, points={})",
            self.inner.region,
            self.inner.dimension,
            self.inner.declared_degree,
            self.inner.len()
        )
    }
}

/// Degree-5 rule: product construction for product measures (optional
/// `gamma` override), spherical construction otherwise.
#[pyfunction]
#[pyo3(signature = (measure, gamma=None))]
fn build_rule(measure: &PyMeasure, gamma: Option<f64>) -> PyResult<PyRule> {
    constructor::build_rule(&measure.inner, gamma)
        .map(|inner| PyRule { inner })
        .map_err(err)
}

/// Degree-3 rule: the scaled sphere part plus a center weight.
#[pyfunction]
fn build_degree3_rule(measure: &PyMeasure) -> PyResult<PyRule> {
    constructor::build_degree3_rule(&measure.inner)
        .map(|inner| PyRule { inner })
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, degree=5))]
fn moller_bound(n: usize, degree: u32) -> PyResult<u64> {
    bounds::moller_bound(n, degree).map_err(err)
}

#[pyfunction]
fn dim_poly_space(n: usize, k: u32) -> PyResult<u64> {
    bounds::dim_poly_space(n, k).map_err(err)
}

/// `∫ x^alpha dσ` over the unit sphere surface in `R^n`.
#[pyfunction]
fn surface_monomial_integral(n: usize, alpha: Vec<u32>) -> PyResult<f64> {
    if n < 2 || alpha.len() > n {
        return Err(err(format!("need 2 <= n and len(alpha) <= n, got n = {n}")));
    }
    Ok(moments::surface_monomial_integral(n, &alpha))
}

#[pymodule]
fn pycubature5(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds the module's classes and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CubatureError", m.py().get_type::<CubatureError>())?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyRule>()?;
    m.add_function(wrap_pyfunction!(build_rule, m)?)?;
    m.add_function(wrap_pyfunction!(build_degree3_rule, m)?)?;
    m.add_function(wrap_pyfunction!(moller_bound, m)?)?;
    m.add_function(wrap_pyfunction!(dim_poly_space, m)?)?;
    m.add_function(wrap_pyfunction!(surface_monomial_integral, m)?)?;
    Ok(())
}
