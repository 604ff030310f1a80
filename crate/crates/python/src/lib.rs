//! Python bindings: `import torusq`.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use torus_quant as tq;

fn to_py(err: tq::Error) -> PyErr {
    let msg = err.to_string();
    match err {
        tq::Error::Accuracy { .. } | tq::Error::Numeric(_) => PyArithmeticError::new_err(msg),
        tq::Error::Io(_) => PyIOError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn rows(m: &tq::OperatorMatrix) -> Vec<Vec<Complex64>> {
    let e = m.entries();
    (0..e.nrows()).map(|r| (0..e.ncols()).map(|c| e[(r, c)]).collect()).collect()
}

#[pyclass(name = "Torus", module = "torusq", frozen)]
struct PyTorus {
    inner: tq::FloquetTorus,
}

#[pymethods]
impl PyTorus {
    #[new]
    #[pyo3(signature = (k, c = 0.0, d = 0.0, j = None))]
    fn new(k: u32, c: f64, d: f64, j: Option<u32>) -> PyResult<Self> {
        let mut inner = tq::FloquetTorus::new(k, c, d).map_err(to_py)?;
        if let Some(j) = j {
            inner = inner.with_truncation(j).map_err(to_py)?;
        }
        Ok(Self { inner })
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.k()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d()
    }

    #[getter]
    fn truncation(&self) -> u32 {
        self.inner.truncation()
    }

    /// Theta basis function `e_l` at a point of the strip `|Im z| <= 2`.
    fn eval_e(&self, l: usize, z: Complex64) -> PyResult<Complex64> {
        tq::eval_e(&self.inner, l, z).map_err(to_py)
    }

    fn basis_norm_sq(&self, l: usize) -> PyResult<f64> {
        tq::basis_norm_sq(&self.inner, l).map_err(to_py)
    }

    fn gram_matrix(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let g = tq::gram_matrix(&self.inner).map_err(to_py)?;
        Ok((0..g.nrows()).map(|r| (0..g.ncols()).map(|c| g[(r, c)]).collect()).collect())
    }

    fn __repr__(&self) -> String {
        format!("Torus(k={}, c={}, d={})", self.inner.k(), self.inner.c(), self.inner.d())
    }
}

#[pyclass(name = "Symbol", module = "torusq", frozen)]
struct PySymbol {
    inner: tq::FourierSymbol,
}

#[pymethods]
impl PySymbol {
    /// Coefficients as `(m, n, a)` triples; `frame` is `real_plane` or `lambda_phi1`.
    #[new]
    #[pyo3(signature = (coefficients, frame = "real_plane"))]
    fn new(coefficients: Vec<(i32, i32, Complex64)>, frame: &str) -> PyResult<Self> {
        let frame: tq::Frame = frame.parse().map_err(to_py)?;
        let inner = tq::FourierSymbol::from_coefficients(frame, coefficients).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        tq::FourierSymbol::builtin(name).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn builtin_names() -> Vec<&'static str> {
        tq::FourierSymbol::BUILTIN_NAMES.to_vec()
    }

    #[staticmethod]
    fn from_table(text: &str) -> PyResult<Self> {
        tq::FourierSymbol::from_table_str(text).map(|inner| Self { inner }).map_err(to_py)
    }

    fn to_table(&self) -> String {
        self.inner.to_table_string()
    }

    #[getter]
    fn frame(&self) -> String {
        self.inner.frame().to_string()
    }

    #[getter]
    fn is_real(&self) -> bool {
        self.inner.is_real()
    }

    fn coefficients(&self) -> Vec<(i32, i32, Complex64)> {
        self.inner.iter().collect()
    }

    fn evaluate(&self, x: f64, y: f64) -> Complex64 {
        self.inner.evaluate(x, y)
    }

    fn heat_flow(&self, k: u32) -> PyResult<Self> {
        tq::heat_flow(&self.inner, k).map(|inner| Self { inner }).map_err(to_py)
    }

    fn truncate(&self, m_max: u32, n_max: u32) -> Self {
        Self {
            inner: self.inner.truncate(m_max, n_max),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Symbol(frame={}, terms={})", self.inner.frame(), self.inner.len())
    }
}

/// Orthonormal Toeplitz matrix `T_k(f)`.
#[pyfunction]
fn toeplitz_matrix(torus: &PyTorus, symbol: &PySymbol) -> PyResult<Vec<Vec<Complex64>>> {
    let t = tq::toeplitz_matrix(&torus.inner, &symbol.inner).map_err(to_py)?;
    Ok(rows(&t.orthonormal))
}

/// Orthonormal complex Weyl matrix of the heat-flowed symbol.
#[pyfunction]
fn weyl_matrix(torus: &PyTorus, symbol: &PySymbol) -> PyResult<Vec<Vec<Complex64>>> {
    let check = tq::correspondence_check(&torus.inner, &symbol.inner).map_err(to_py)?;
    Ok(rows(&check.weyl))
}

/// Real-side Weyl matrix `Op^w_k(a)` in the ε basis.
#[pyfunction]
fn quantize_weyl(torus: &PyTorus, symbol: &PySymbol) -> PyResult<Vec<Vec<Complex64>>> {
    tq::quantize_weyl(&torus.inner, &symbol.inner).map(|m| rows(&m)).map_err(to_py)
}

#[pyfunction]
fn translation_matrix(torus: &PyTorus, m: i32, n: i32) -> Vec<Vec<Complex64>> {
    rows(&tq::translation_matrix(&torus.inner, m, n))
}

#[pyfunction]
fn residual(torus: &PyTorus, symbol: &PySymbol) -> PyResult<f64> {
    tq::theorem_a_residual(&torus.inner, &symbol.inner).map_err(to_py)
}

#[pyfunction]
fn corollary_residual(torus: &PyTorus, symbol: &PySymbol) -> PyResult<f64> {
    tq::corollary_residual(&torus.inner, &symbol.inner).map_err(to_py)
}

#[pyfunction]
fn spectra<'py>(py: Python<'py>, torus: &PyTorus, symbol: &PySymbol) -> PyResult<Bound<'py, PyDict>> {
    let s = tq::spectrum_compare(&torus.inner, &symbol.inner).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("eigs_toeplitz", s.eigs_toeplitz)?;
    out.set_item("eigs_weyl", s.eigs_weyl)?;
    out.set_item("hausdorff", s.hausdorff)?;
    Ok(out)
}

/// Residuals over increasing levels; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (symbol, levels, c = 0.0, d = 0.0, name = "symbol"))]
fn scan<'py>(
    py: Python<'py>,
    symbol: &PySymbol,
    levels: Vec<u32>,
    c: f64,
    d: f64,
    name: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let first = *levels.first().ok_or_else(|| PyValueError::new_err("no levels given"))?;
    let template = tq::FloquetTorus::new(first, c, d).map_err(to_py)?;
    let report = py
        .detach(|| tq::decay_scan(name, &symbol.inner, &levels, &template))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("symbol", &report.symbol)?;
    out.set_item("k_values", &report.k_values)?;
    out.set_item("residuals", &report.residuals)?;
    out.set_item("corollary_residuals", &report.corollary_residuals)?;
    out.set_item("floor", &report.floor)?;
    out.set_item("floor_limited", &report.floor_limited)?;
    out.set_item("hausdorff", &report.hausdorff)?;
    out.set_item("slope", report.slope)?;
    out.set_item("errors", &report.errors)?;
    out.set_item("csv", report.to_csv())?;
    Ok(out)
}

#[pymodule]
fn torusq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTorus>()?;
    m.add_class::<PySymbol>()?;
    m.add_function(wrap_pyfunction!(toeplitz_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_weyl, m)?)?;
    m.add_function(wrap_pyfunction!(translation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_residual, m)?)?;
    m.add_function(wrap_pyfunction!(spectra, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}
