//! Python bindings: measurement ensembles, the cell-cycle kernel, Jacobian
//! closed forms and sphere sampling.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sweepcert::cell_cycle::{CellCycleModel, PowerDensity};
use sweepcert::certify::{check_proper_subinvariance, sweeping_diagnostic, CertificatePlan, IntervalFamily, SphereFamily};
use sweepcert::markov::MarkovProcess;
use sweepcert::numerics::{sample_uniform_sphere, sphere_volume, RandomStream};
use sweepcert::qnd::{self, CMatrix, FockLyapunovDensity};
use sweepcert::{QuantumState, C64 as Complex64};

fn py_err(e: sweepcert::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn state(phi: Vec<Complex64>) -> PyResult<QuantumState> {
    QuantumState::normalized(phi).map_err(py_err)
}

fn complex_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square and non-empty"));
    }
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    Ok(CMatrix::from_row_slice(n, n, &flat))
}

/// A finite family of measurement matrices `M_k` with `Σ M_k* M_k = I`.
#[pyclass(name = "MeasurementEnsemble", module = "pysweepcert")]
struct PyEnsemble {
    inner: qnd::MeasurementEnsemble,
}

#[pymethods]
impl PyEnsemble {
    /// `table[k][i]` is the i-th diagonal entry of `M_k`. Completeness is checked.
    #[staticmethod]
    fn diagonal(table: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: qnd::MeasurementEnsemble::diagonal(table).map_err(py_err)? })
    }

    /// Full complex matrices, one nested row list per outcome. Completeness is checked.
    #[staticmethod]
    fn general(matrices: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let ms = matrices.into_iter().map(complex_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: qnd::MeasurementEnsemble::general(ms).map_err(py_err)? })
    }

    /// The two-level example `diag(0.6, 0.8)`, `diag(0.8, 0.6)`.
    #[staticmethod]
    fn example() -> Self {
        Self { inner: qnd::example_ensemble() }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn completeness_residual(&self) -> f64 {
        self.inner.completeness_residual()
    }

    /// `M_k φ / ‖M_k φ‖`.
    fn apply(&self, k: usize, phi: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.check_index(k)?;
        Ok(self.inner.apply(k, &state(phi)?).map_err(py_err)?.into_components())
    }

    fn outcome_probabilities(&self, phi: Vec<Complex64>) -> PyResult<Vec<f64>> {
        self.inner.outcome_probabilities(&state(phi)?).map_err(py_err)
    }

    /// Transfer operator applied to the Fock density `1/Π|φ_i|²`, evaluated at `φ`.
    fn perron_fock(&self, phi: Vec<Complex64>) -> PyResult<f64> {
        let u = FockLyapunovDensity::new(self.inner.dim());
        qnd::perron_qnd(&self.inner, &u, &state(phi)?).map_err(py_err)
    }

    /// `Σ_k 1/‖M_k⁻¹φ‖²` (diagonal ensembles only).
    fn subinvariance_ratio(&self, phi: Vec<Complex64>) -> PyResult<f64> {
        qnd::subinvariance_ratio(&self.inner, &state(phi)?).map_err(py_err)
    }

    /// Runs the Fock-density certificate; returns `(verdict, min_margin, violation_count)`.
    #[pyo3(signature = (n_points = 10_000, seed = 0, exclusion_radius = 1e-3, margin_floor = 1e-9))]
    fn certify(&self, n_points: usize, seed: u64, exclusion_radius: f64, margin_floor: f64) -> PyResult<(String, f64, usize)> {
        let n = self.inner.dim();
        let plan = CertificatePlan { n_points, exclusion_radius, margin_floor };
        let ifs = self.inner.to_ifs_model();
        let u = FockLyapunovDensity::new(n);
        let r = check_proper_subinvariance(&ifs, &u, &plan, |s| sample_uniform_sphere(n, s), &RandomStream::new(seed, 0))
            .map_err(py_err)?;
        Ok((format!("{:?}", r.verdict).to_lowercase(), r.min_margin, r.violation_count))
    }

    /// Mass of `{min_i |φ_i| ≥ ε}` per `ε` and checkpoint, from a uniform start.
    ///
    /// Returns rows `(member_id, eps, checkpoint, mass, std_error)`.
    #[pyo3(signature = (eps, n_trajectories, checkpoints, seed = 0))]
    fn sweeping(
        &self,
        py: Python<'_>,
        eps: Vec<f64>,
        n_trajectories: usize,
        checkpoints: Vec<usize>,
        seed: u64,
    ) -> PyResult<Vec<(usize, f64, usize, f64, f64)>> {
        let n = self.inner.dim();
        let family = SphereFamily::new(n, eps).map_err(py_err)?;
        let ifs = self.inner.to_ifs_model();
        let report = py
            .detach(|| {
                sweeping_diagnostic(&ifs, |s| sample_uniform_sphere(n, s), &family, &checkpoints, n_trajectories, &RandomStream::new(seed, 2))
            })
            .map_err(py_err)?;
        Ok(report.masses.iter().map(|m| (m.member_id, m.member_param, m.checkpoint, m.mass, m.std_error)).collect())
    }

    fn __repr__(&self) -> String {
        format!("MeasurementEnsemble(dim={}, outcomes={})", self.inner.dim(), self.inner.len())
    }
}

impl PyEnsemble {
    fn check_index(&self, k: usize) -> PyResult<()> {
        if k >= self.inner.len() {
            return Err(PyValueError::new_err(format!("outcome index {k} out of range")));
        }
        Ok(())
    }
}

/// Size-structured cell-cycle model with Pareto-distributed daughter sizes.
#[pyclass(name = "CellCycleModel", module = "pysweepcert")]
struct PyCellModel {
    inner: CellCycleModel,
}

#[pymethods]
impl PyCellModel {
    #[new]
    #[pyo3(signature = (alpha, sigma, beta = 0.0))]
    fn new(alpha: f64, sigma: f64, beta: f64) -> PyResult<Self> {
        Ok(Self { inner: CellCycleModel::new(alpha, sigma, beta).map_err(py_err)? })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    fn kernel(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.kernel_eval(x, y).map_err(py_err)
    }

    /// Transfer operator of `x^{-1+β}` at `x`, closed form.
    fn perron_power(&self, x: f64) -> PyResult<f64> {
        self.inner.perron_power_closed_form(x).map_err(py_err)
    }

    /// Transfer operator of `x^{-1+β}` at `x`, by adaptive quadrature.
    #[pyo3(signature = (x, tol = 1e-13))]
    fn perron_power_quadrature(&self, x: f64, tol: f64) -> PyResult<f64> {
        self.inner.perron_quadrature(&PowerDensity { beta: self.inner.beta }, x, tol).map_err(py_err)
    }

    /// `f(β) = α − σ^β (α + β)`.
    fn certificate_margin(&self, beta: f64) -> f64 {
        self.inner.certificate_margin(beta)
    }

    fn certificate_slope_at_zero(&self) -> f64 {
        self.inner.certificate_slope_at_zero()
    }

    #[pyo3(signature = (beta_max = 1.0, grid = 100))]
    fn find_beta(&self, beta_max: f64, grid: usize) -> Option<f64> {
        self.inner.find_beta(beta_max, grid)
    }

    /// Draws `n` successive sizes of one lineage started at `y`.
    #[pyo3(signature = (y, n, seed = 0))]
    fn trajectory(&self, y: f64, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        let mut rng = RandomStream::new(seed, 0);
        let mut x = y;
        let mut out = Vec::with_capacity(n + 1);
        out.push(x);
        for _ in 0..n {
            x = self.inner.step(&x, &mut rng).map_err(py_err)?.1;
            out.push(x);
        }
        Ok(out)
    }

    /// Mass of `[σ, a)` per `a` and checkpoint, starting uniform on `[σ, 2σ]`.
    #[pyo3(signature = (ends, n_trajectories, checkpoints, seed = 0))]
    fn sweeping(
        &self,
        py: Python<'_>,
        ends: Vec<f64>,
        n_trajectories: usize,
        checkpoints: Vec<usize>,
        seed: u64,
    ) -> PyResult<Vec<(usize, f64, usize, f64, f64)>> {
        let s = self.inner.sigma;
        let family = IntervalFamily::new(s, ends).map_err(py_err)?;
        let m = self.inner;
        let report = py
            .detach(|| sweeping_diagnostic(&m, |r| Ok(s + s * r.uniform()), &family, &checkpoints, n_trajectories, &RandomStream::new(seed, 2)))
            .map_err(py_err)?;
        Ok(report.masses.iter().map(|m| (m.member_id, m.member_param, m.checkpoint, m.mass, m.std_error)).collect())
    }

    fn __repr__(&self) -> String {
        format!("CellCycleModel(alpha={}, sigma={}, beta={})", self.inner.alpha, self.inner.sigma, self.inner.beta)
    }
}

/// `|det M| / ‖Mφ‖^N` for a real matrix on the real unit sphere.
#[pyfunction]
fn jacobian_det_real(m: Vec<Vec<f64>>, phi: Vec<f64>) -> PyResult<f64> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square and non-empty"));
    }
    let flat: Vec<f64> = m.into_iter().flatten().collect();
    qnd::jacobian_det_real(&DMatrix::from_row_slice(n, n, &flat), &phi).map_err(py_err)
}

/// `|det M|² / ‖Mφ‖^{2N}` for a complex matrix on the complex unit sphere.
#[pyfunction]
fn jacobian_det_complex(m: Vec<Vec<Complex64>>, phi: Vec<Complex64>) -> PyResult<f64> {
    qnd::jacobian_det_complex(&complex_matrix(m)?, &QuantumState::from_unit(phi).map_err(py_err)?).map_err(py_err)
}

/// The same determinant through the realified real matrix.
#[pyfunction]
fn jacobian_det_complex_realified(m: Vec<Vec<Complex64>>, phi: Vec<Complex64>) -> PyResult<f64> {
    qnd::jacobian_det_complex_realified(&complex_matrix(m)?, &QuantumState::from_unit(phi).map_err(py_err)?).map_err(py_err)
}

/// `n` uniform points on the unit sphere of `C^dim`.
#[pyfunction]
#[pyo3(signature = (dim, n, seed = 0))]
fn sample_sphere(dim: usize, n: usize, seed: u64) -> PyResult<Vec<Vec<Complex64>>> {
    let mut rng = RandomStream::new(seed, 0);
    (0..n)
        .map(|_| sample_uniform_sphere(dim, &mut rng).map(QuantumState::into_components).map_err(py_err))
        .collect()
}

/// Surface area of the unit sphere of `C^dim`.
#[pyfunction]
#[pyo3(name = "sphere_volume")]
fn py_sphere_volume(dim: usize) -> f64 {
    sphere_volume(dim)
}

#[pymodule]
fn pysweepcert(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyCellModel>()?;
    m.add_function(wrap_pyfunction!(jacobian_det_real, m)?)?;
    m.add_function(wrap_pyfunction!(jacobian_det_complex, m)?)?;
    m.add_function(wrap_pyfunction!(jacobian_det_complex_realified, m)?)?;
    m.add_function(wrap_pyfunction!(sample_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(py_sphere_volume, m)?)?;
    Ok(())
}
