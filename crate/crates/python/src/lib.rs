//! Python bindings: `import pyironmask`.
//!
//! Vectors cross the boundary as lists of floats, matrices as lists of rows.
//! Library errors raise `pyironmask.IronMaskError` with the error name as
//! the message prefix.

use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use ironmask::attacks::{plant_exact_instance, tmto_exact, TmtoOptions, DEFAULT_CAPACITY};
use ironmask::centering::{center as center_set, CenterMethod, TemplateSet};
use ironmask::ecc::{self, CodeParams as CoreParams, Codeword as CoreCodeword};
use ironmask::geometry::{self, normalize, UnitVector};
use ironmask::protection::{self, MatrixEncoding, ProtectedTemplate as CoreTemplate};
use ironmask::simulation::{gen_dataset, NoiseSpec};
use ironmask::store;
use ironmask::{rotation, seeded_rng};

create_exception!(pyironmask, IronMaskError, PyValueError, "Raised for invalid inputs and malformed data.");

fn err(e: ironmask::Error) -> PyErr {
    IronMaskError::new_err(format!("{}: {e}", e.name()))
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for ironmask::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn unit(v: Vec<f64>) -> PyResult<UnitVector> {
    normalize(&v).or_raise()
}

fn encoding(f32: bool) -> MatrixEncoding {
    if f32 {
        MatrixEncoding::F32
    } else {
        MatrixEncoding::F64
    }
}

fn rows(m: &rotation::OrthogonalMatrix) -> Vec<Vec<f64>> {
    let a = m.matrix();
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

#[pyclass(frozen, eq, hash, skip_from_py_object, module = "pyironmask")]
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct CodeParams(CoreParams);

#[pymethods]
impl CodeParams {
    #[new]
    fn new(n: usize, alpha: usize) -> PyResult<Self> {
        CoreParams::new(n, alpha).map(CodeParams).or_raise()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn alpha(&self) -> usize {
        self.0.weight()
    }

    fn cardinality(&self) -> BigUint {
        ecc::cardinality(self.0)
    }

    fn security_bits(&self) -> f64 {
        ecc::security_bits(self.0)
    }

    /// Minimum angle between distinct codewords, in radians.
    fn min_angle(&self) -> f64 {
        ecc::min_angle(self.0)
    }

    fn __repr__(&self) -> String {
        format!("CodeParams(n={}, alpha={})", self.0.dim(), self.0.weight())
    }
}

#[pyclass(frozen, eq, ord, hash, skip_from_py_object, module = "pyironmask")]
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Codeword(CoreCodeword);

#[pymethods]
impl Codeword {
    /// Parses the text form, e.g. `"4 2 0:+ 1:-"`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(Codeword).or_raise()
    }

    #[getter]
    fn params(&self) -> CodeParams {
        CodeParams(self.0.params())
    }

    #[getter]
    fn support(&self) -> Vec<usize> {
        self.0.support().to_vec()
    }

    /// `+1` / `-1` per support index.
    #[getter]
    fn signs(&self) -> Vec<i8> {
        self.0.signs().iter().map(|s| s.as_f64() as i8).collect()
    }

    fn dense(&self) -> Vec<f64> {
        self.0.to_dense()
    }

    fn encode<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &protection::encode_codeword(&self.0))
    }

    fn digest<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &protection::hash_codeword(&self.0))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Codeword('{}')", self.0)
    }
}

#[pyclass(frozen, module = "pyironmask")]
struct ProtectedTemplate(CoreTemplate);

#[pymethods]
impl ProtectedTemplate {
    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        CoreTemplate::from_bytes(data).map(ProtectedTemplate).or_raise()
    }

    #[pyo3(signature = (f32 = false))]
    fn to_bytes<'py>(&self, py: Python<'py>, f32: bool) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.0.to_bytes(encoding(f32)))
    }

    #[staticmethod]
    fn read(path: std::path::PathBuf) -> PyResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| err(e.into()))?;
        Self::from_bytes(&bytes)
    }

    #[pyo3(signature = (path, f32 = false))]
    fn write(&self, path: std::path::PathBuf, f32: bool) -> PyResult<()> {
        std::fs::write(path, self.0.to_bytes(encoding(f32))).map_err(|e| err(e.into()))
    }

    #[getter]
    fn params(&self) -> CodeParams {
        CodeParams(self.0.params())
    }

    #[getter]
    fn digest<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.digest())
    }

    /// The helper matrix as a list of rows.
    fn helper(&self) -> Vec<Vec<f64>> {
        rows(self.0.helper())
    }

    /// True on Accept. With `list > 1` any of the `list` nearest codewords may match.
    #[pyo3(signature = (probe, list = 1))]
    fn verify(&self, probe: Vec<f64>, list: usize) -> PyResult<bool> {
        let probe = unit(probe)?;
        protection::verify_list(&self.0, &probe, list).map(|d| d.is_accept()).or_raise()
    }

    fn __repr__(&self) -> String {
        let p = self.0.params();
        format!("ProtectedTemplate(n={}, alpha={}, digest={})", p.dim(), p.weight(), hex(self.0.digest()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[pyclass(module = "pyironmask")]
struct Registry(store::Registry);

#[pymethods]
impl Registry {
    #[new]
    fn open(path: std::path::PathBuf) -> PyResult<Self> {
        store::Registry::open(path).map(Registry).or_raise()
    }

    #[pyo3(signature = (label, template, f32 = false))]
    fn enroll(&mut self, label: &str, template: &ProtectedTemplate, f32: bool) -> PyResult<()> {
        self.0.enroll(label, &template.0, encoding(f32)).or_raise()
    }

    fn revoke(&mut self, label: &str) -> PyResult<()> {
        self.0.revoke(label).or_raise()
    }

    fn get(&self, label: &str) -> PyResult<ProtectedTemplate> {
        self.0.get(label).map(ProtectedTemplate).or_raise()
    }

    fn labels(&self) -> Vec<String> {
        self.0.entries().iter().map(|e| e.label.clone()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Uniform random codeword.
#[pyfunction]
fn sample(n: usize, alpha: usize, seed: u64) -> PyResult<Codeword> {
    let p = CoreParams::new(n, alpha).or_raise()?;
    Ok(Codeword(ecc::usample(p, &mut seeded_rng(seed))))
}

/// Nearest codeword to `vector` (normalized first).
#[pyfunction]
fn decode(vector: Vec<f64>, alpha: usize) -> PyResult<Codeword> {
    let u = unit(vector)?;
    let p = CoreParams::new(u.dim(), alpha).or_raise()?;
    ecc::decode(&u, p).map(Codeword).or_raise()
}

/// The `count` nearest codewords, nearest first.
#[pyfunction]
fn decode_list(vector: Vec<f64>, alpha: usize, count: usize) -> PyResult<Vec<Codeword>> {
    let u = unit(vector)?;
    let p = CoreParams::new(u.dim(), alpha).or_raise()?;
    Ok(ecc::decode_list(&u, p, count).or_raise()?.into_iter().map(Codeword).collect())
}

#[pyfunction]
fn protect(template: Vec<f64>, alpha: usize, seed: u64) -> PyResult<ProtectedTemplate> {
    let t = unit(template)?;
    let p = CoreParams::new(t.dim(), alpha).or_raise()?;
    protection::protect(&t, p, &mut seeded_rng(seed)).map(ProtectedTemplate).or_raise()
}

/// An orthogonal matrix `P` with `P·t = c`, as a list of rows.
#[pyfunction]
fn hrmg(t: Vec<f64>, c: Vec<f64>, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let m = rotation::hrmg(&unit(t)?, &unit(c)?, &mut seeded_rng(seed)).or_raise()?;
    Ok(rows(&m))
}

/// Angle in radians between two vectors (both normalized first).
#[pyfunction]
fn angle(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    geometry::angle_stable(&unit(u)?, &unit(v)?).or_raise()
}

/// `"mean"` or `"median"` center of a list of vectors.
#[pyfunction]
#[pyo3(signature = (vectors, method = "mean"))]
fn center(vectors: Vec<Vec<f64>>, method: &str) -> PyResult<Vec<f64>> {
    let method: CenterMethod = method.parse().or_raise()?;
    let members = vectors.into_iter().map(unit).collect::<PyResult<Vec<_>>>()?;
    let set = TemplateSet::new(members).or_raise()?;
    Ok(center_set(&set, method).or_raise()?.into_inner())
}

/// Synthetic `(label, vector)` records; give exactly one of `angle_deg`, `sigma`.
#[pyfunction]
#[pyo3(signature = (k, per, dim, seed, angle_deg = None, sigma = None))]
fn synth(k: usize, per: usize, dim: usize, seed: u64, angle_deg: Option<f64>, sigma: Option<f64>) -> PyResult<Vec<(String, Vec<f64>)>> {
    let noise = match (angle_deg, sigma) {
        (Some(d), None) => NoiseSpec::ExactAngle { theta: d.to_radians() },
        (None, Some(s)) => NoiseSpec::GaussianPerturb { sigma: s },
        _ => return Err(PyValueError::new_err("give exactly one of angle_deg, sigma")),
    };
    let ds = gen_dataset(k, per, dim, noise, &mut seeded_rng(seed)).or_raise()?;
    Ok(ds.records().iter().map(|(l, v)| (l.clone(), v.as_slice().to_vec())).collect())
}

/// Meet-in-the-middle search on a planted instance; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (n, alpha, seed, ell = None, slack = 0.0))]
fn tmto<'py>(py: Python<'py>, n: usize, alpha: usize, seed: u64, ell: Option<usize>, slack: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = CoreParams::new(n, alpha).or_raise()?;
    let inst = plant_exact_instance(p, &mut seeded_rng(seed)).or_raise()?;
    let res = tmto_exact(&inst.helper, p, &TmtoOptions { ell, slack, capacity: DEFAULT_CAPACITY }).or_raise()?;
    let d = PyDict::new(py);
    d.set_item("N", res.table_size)?;
    d.set_item("ell", res.ell)?;
    d.set_item("slack", res.slack)?;
    d.set_item("solutions_found", res.solutions.len())?;
    d.set_item("planted_recovered", res.solutions.iter().any(|(a, b)| *a == inst.c1 && *b == inst.c2))?;
    d.set_item("step3_survivors", res.step3_survivors)?;
    d.set_item("step4_checks", res.step4_checks)?;
    Ok(d)
}

#[pymodule]
fn pyironmask(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IronMaskError", m.py().get_type::<IronMaskError>())?;
    m.add_class::<CodeParams>()?;
    m.add_class::<Codeword>()?;
    m.add_class::<ProtectedTemplate>()?;
    m.add_class::<Registry>()?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(decode_list, m)?)?;
    m.add_function(wrap_pyfunction!(protect, m)?)?;
    m.add_function(wrap_pyfunction!(hrmg, m)?)?;
    m.add_function(wrap_pyfunction!(angle, m)?)?;
    m.add_function(wrap_pyfunction!(center, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(tmto, m)?)?;
    Ok(())
}
