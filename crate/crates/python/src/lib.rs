//! Python bindings for `chaoscope`.

use pyo3::exceptions::{PyOSError, PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use ::chaoscope as core;
use core::analysis::{self, ConvergenceReport, ProbeBudget};
use core::chaos::{self, OrbitRecord, SelectionModel};
use core::config::SystemConfig;
use core::gallery;
use core::render::{self, Viewport};
use core::sets;
use core::spaces::{SpaceModel, DEFAULT_CHART_THRESHOLD};

fn py_err(e: core::Error) -> PyErr {
    match e {
        core::Error::Diverged { .. } => PyOverflowError::new_err(e.to_string()),
        core::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn report_dict<'py>(py: Python<'py>, r: &ConvergenceReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let ladder: Vec<(usize, f64)> = r.ladder.iter().map(|e| (e.k, e.d_h)).collect();
    d.set_item("ladder", ladder)?;
    d.set_item("reference", &r.reference_descriptor)?;
    d.set_item("converged", r.converged)?;
    d.set_item("tol", r.tol)?;
    Ok(d)
}

/// A finite, deduplicated set of canonical points in one space.
#[pyclass(name = "PointCloud", module = "chaoscope", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPointCloud(sets::PointCloud);

#[pymethods]
impl PyPointCloud {
    /// `space` is a descriptor such as `"euclidean 2"`, `"circle"`,
    /// `"projective2"` or `"sequence 256"`.
    #[new]
    fn new(space: &str, points: Vec<Vec<f64>>) -> PyResult<Self> {
        let space: SpaceModel = space.parse().map_err(py_err)?;
        sets::PointCloud::from_raw(space, points).map(PyPointCloud).map_err(py_err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        sets::PointCloud::from_text(text, "<text>").map(PyPointCloud).map_err(py_err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    #[getter]
    fn space(&self) -> String {
        self.0.space().to_string()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.0.points().iter().map(|p| p.coords().to_vec()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("PointCloud({:?}, {} points)", self.0.space().to_string(), self.0.len())
    }
}

/// An iterated function system.
#[pyclass(name = "System", module = "chaoscope", frozen)]
struct PySystem(gallery::GalleryEntry);

#[pymethods]
impl PySystem {
    /// Loads a custom system from TOML text.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let cfg = SystemConfig::parse(text, "<toml>").map_err(py_err)?;
        cfg.into_entry().map(PySystem).map_err(py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn space(&self) -> String {
        self.0.system.space.to_string()
    }

    #[getter]
    fn default_x0(&self) -> Vec<f64> {
        self.0.defaults.x0.clone()
    }

    fn __len__(&self) -> usize {
        self.0.system.len()
    }

    /// One application of the Hutchinson operator.
    fn hutchinson(&self, cloud: &PyPointCloud) -> PyResult<PyPointCloud> {
        core::ifs::hutchinson(&self.0.system, &cloud.0).map(PyPointCloud).map_err(py_err)
    }

    /// Deterministic attractor from `start` (default: the system's start
    /// point). Returns `(cloud, report)`.
    #[pyo3(signature = (eps=None, tol=None, max_iter=None, start=None))]
    fn oracle<'py>(
        &self,
        py: Python<'py>,
        eps: Option<f64>,
        tol: Option<f64>,
        max_iter: Option<usize>,
        start: Option<Vec<f64>>,
    ) -> PyResult<(PyPointCloud, Bound<'py, PyDict>)> {
        let d = &self.0.defaults;
        let s0 = match start {
            Some(x) => {
                let p = self.0.system.point(&x).map_err(py_err)?;
                sets::PointCloud::singleton(self.0.system.space, p).map_err(py_err)?
            }
            None => self.0.start_cloud().map_err(py_err)?,
        };
        let (cloud, report) = core::ifs::deterministic_attractor(
            &self.0.system,
            &s0,
            eps.unwrap_or(d.eps),
            tol.unwrap_or(d.oracle_tol),
            max_iter.unwrap_or(d.max_iter),
        )
        .map_err(py_err)?;
        Ok((PyPointCloud(cloud), report_dict(py, &report)?))
    }

    /// Runs the chaos game. `model` is a selection descriptor such as
    /// `"iid:0.5,0.5"`; uniform iid when omitted.
    #[pyo3(signature = (steps, seed, x0=None, model=None))]
    fn chaos_game(
        &self,
        steps: usize,
        seed: u64,
        x0: Option<Vec<f64>>,
        model: Option<&str>,
    ) -> PyResult<PyOrbit> {
        let sys = &self.0.system;
        let x0 = sys.point(&x0.unwrap_or_else(|| self.0.defaults.x0.clone())).map_err(py_err)?;
        let model = match model {
            Some(m) => m.parse::<SelectionModel>().map_err(py_err)?,
            None => SelectionModel::uniform(sys.len()).map_err(py_err)?,
        };
        chaos::run_chaos_game(sys, &x0, steps, &model, seed)
            .map(PyOrbit)
            .map_err(py_err)
    }

    /// Pointwise basin probe of `x` against `reference`.
    #[pyo3(signature = (x, reference, k_max=None, eps=None, tol=None))]
    fn basin_probe<'py>(
        &self,
        py: Python<'py>,
        x: Vec<f64>,
        reference: &PyPointCloud,
        k_max: Option<usize>,
        eps: Option<f64>,
        tol: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let d = &self.0.defaults;
        let budget = ProbeBudget {
            k_max: k_max.unwrap_or(d.max_iter),
            eps: eps.unwrap_or(d.eps),
            tol: tol.unwrap_or(d.tol),
        };
        let p = self.0.system.point(&x).map_err(py_err)?;
        let v = analysis::basin_probe(&self.0.system, &p, &reference.0, budget).map_err(py_err)?;
        let out = PyDict::new(py);
        out.set_item("point", v.point)?;
        out.set_item("verdict", v.verdict.to_string())?;
        out.set_item("k_reached", v.k_reached)?;
        out.set_item("final_d_h", v.final_d_h)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("System({:?}, {}, {} maps)", self.0.name, self.0.system.space, self.0.system.len())
    }
}

/// A recorded chaos-game orbit.
#[pyclass(name = "Orbit", module = "chaoscope", frozen)]
struct PyOrbit(OrbitRecord);

#[pymethods]
impl PyOrbit {
    #[getter]
    fn indices(&self) -> Vec<usize> {
        self.0.indices.clone()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.0.points.iter().map(|p| p.coords().to_vec()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn tail_cloud(&self, burn_in: usize) -> PyResult<PyPointCloud> {
        chaos::tail_cloud(&self.0, burn_in).map(PyPointCloud).map_err(py_err)
    }

    /// True if recomputing from `x0` and the indices gives identical points.
    fn replays_exactly(&self) -> PyResult<bool> {
        Ok(self.0.replay().map_err(py_err)? == self.0.points)
    }

    fn to_trace(&self) -> String {
        self.0.to_trace()
    }
}

#[pyfunction]
fn gallery_names() -> Vec<&'static str> {
    gallery::NAMES.to_vec()
}

/// A built-in system by name.
#[pyfunction]
fn build(name: &str) -> PyResult<PySystem> {
    gallery::build(name).map(PySystem).map_err(py_err)
}

#[pyfunction]
fn hausdorff(a: &PyPointCloud, b: &PyPointCloud) -> PyResult<f64> {
    sets::hausdorff(&a.0, &b.0).map_err(py_err)
}

#[pyfunction]
fn decimate(cloud: &PyPointCloud, eps: f64) -> PyResult<PyPointCloud> {
    sets::decimate(&cloud.0, eps).map(PyPointCloud).map_err(py_err)
}

/// Binary PGM bytes of `cloud`; autoscaled unless both ranges are given.
#[pyfunction]
#[pyo3(signature = (cloud, width=800, height=800, x_range=None, y_range=None, path=None))]
fn render_pgm<'py>(
    py: Python<'py>,
    cloud: &PyPointCloud,
    width: usize,
    height: usize,
    x_range: Option<(f64, f64)>,
    y_range: Option<(f64, f64)>,
    path: Option<std::path::PathBuf>,
) -> PyResult<Bound<'py, PyBytes>> {
    let vp = match (x_range, y_range) {
        (Some(x), Some(y)) => Viewport::fixed(x, y, width, height),
        (None, None) => Viewport::auto(width, height),
        _ => return Err(PyValueError::new_err("x_range and y_range go together")),
    };
    let r = render::rasterize(&cloud.0, &vp, DEFAULT_CHART_THRESHOLD).map_err(py_err)?;
    if let Some(p) = path {
        render::write_pgm(&r.image, &p).map_err(py_err)?;
    }
    Ok(PyBytes::new(py, &render::encode_pgm(&r.image)))
}

/// `(iterated, closed_form)` norms of `w^k(r·e_k)` for the diagonal map.
#[pyfunction]
fn hilbert_moving_basis(d: usize, k: usize, r: f64) -> PyResult<(f64, f64)> {
    let n = analysis::hilbert_moving_basis(d, k, r).map_err(py_err)?;
    Ok((n.iterated, n.closed_form))
}

#[pymodule]
#[pyo3(name = "chaoscope")]
fn chaoscope_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointCloud>()?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyOrbit>()?;
    m.add_function(wrap_pyfunction!(gallery_names, m)?)?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(decimate, m)?)?;
    m.add_function(wrap_pyfunction!(render_pgm, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert_moving_basis, m)?)?;
    m.add("RNG_ALGORITHM", chaos::RNG_ALGORITHM)?;
    Ok(())
}
