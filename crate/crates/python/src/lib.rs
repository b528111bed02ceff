//! Python bindings. Matrices cross the boundary as nested lists of complex
//! numbers; reports come back as plain dicts.

use std::sync::Arc;

use opcover::algebra::Ambient;
use opcover::cb::{self, LinearMap};
use opcover::covers::{self, CstarCover, OperatorAlgebra};
use opcover::dynamics::{self, DynamicalSystem, FiniteGroup};
use opcover::linalg::{Mat, C64};
use opcover::tol::Config;
use opcover::{corpus, crossed, partial, report, scenario, structure, suite, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde_json::{json, Value};

create_exception!(opcover_py, OpcoverError, PyException);

fn err(e: Error) -> PyErr {
    match e {
        Error::Input(m) => PyValueError::new_err(m),
        e => OpcoverError::new_err(e.to_string()),
    }
}

type PyMat = Vec<Vec<C64>>;

fn to_mat(rows: &PyMat) -> PyResult<Mat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

fn from_mat(m: &Mat) -> PyMat {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn ambient(blocks: Vec<usize>) -> PyResult<Ambient> {
    Ambient::new(blocks).map_err(err)
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

/// Tolerances and budgets; defaults match the library.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone, Copy)]
struct PyConfig(Config);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (tol=None, seed=None, max_iter=None, max_words=None, cross_check=false))]
    fn new(tol: Option<f64>, seed: Option<u64>, max_iter: Option<usize>, max_words: Option<usize>, cross_check: bool) -> Self {
        let mut c = Config::default();
        if let Some(t) = tol {
            c.feas_tol = t;
        }
        if let Some(s) = seed {
            c.seed = s;
        }
        if let Some(n) = max_iter {
            c.max_iter = n;
        }
        if let Some(n) = max_words {
            c.max_words = n;
        }
        c.cross_check = cross_check;
        PyConfig(c)
    }

    #[getter]
    fn tol(&self) -> f64 {
        self.0.feas_tol
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    fn __repr__(&self) -> String {
        format!("Config(tol={:e}, seed={:#x}, max_iter={}, max_words={})", self.0.feas_tol, self.0.seed, self.0.max_iter, self.0.max_words)
    }
}

fn cfg(c: Option<PyConfig>) -> Config {
    c.map_or_else(Config::default, |c| c.0)
}

/// A unital operator algebra given by generators in a block-diagonal ambient.
#[pyclass(name = "Algebra", frozen, skip_from_py_object)]
struct PyAlgebra(Arc<OperatorAlgebra>);

#[pymethods]
impl PyAlgebra {
    #[new]
    fn new(name: &str, ambient_blocks: Vec<usize>, generators: Vec<(String, PyMat)>) -> PyResult<Self> {
        let amb = ambient(ambient_blocks)?;
        let gens = generators.iter().map(|(n, m)| Ok((n.clone(), to_mat(m)?))).collect::<PyResult<Vec<_>>>()?;
        Ok(PyAlgebra(Arc::new(OperatorAlgebra::new(name, &amb, gens).map_err(err)?)))
    }

    /// `span{E11, E22, E33, E44, E13, E14, E23, E24}` in `M4`.
    #[staticmethod]
    fn a4() -> Self {
        PyAlgebra(corpus::a4())
    }

    /// Upper triangular 2×2 matrices.
    #[staticmethod]
    fn t2() -> Self {
        PyAlgebra(corpus::t2())
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn ambient(&self) -> Vec<usize> {
        self.0.span.ambient().blocks().to_vec()
    }

    #[getter]
    fn generators(&self) -> Vec<(String, PyMat)> {
        self.0.gen_names.iter().cloned().zip(self.0.generators.iter().map(from_mat)).collect()
    }

    #[pyo3(signature = (config=None))]
    fn identity_cover(&self, config: Option<PyConfig>) -> PyResult<PyCover> {
        self.0.identity_cover(&cfg(config)).map(PyCover).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Algebra({:?}, dim={})", self.0.name, self.0.dim())
    }
}

/// A C*-cover `(C, j)` of an operator algebra.
#[pyclass(name = "Cover", frozen, skip_from_py_object)]
struct PyCover(CstarCover);

#[pymethods]
impl PyCover {
    /// `images` are the generator images in the cover ambient; the map is
    /// checked to be a unital complete isometry that generates.
    #[new]
    #[pyo3(signature = (name, algebra, ambient_blocks, images, config=None))]
    fn new(py: Python<'_>, name: &str, algebra: &PyAlgebra, ambient_blocks: Vec<usize>, images: Vec<PyMat>, config: Option<PyConfig>) -> PyResult<Self> {
        let amb = ambient(ambient_blocks)?;
        let ims = images.iter().map(to_mat).collect::<PyResult<Vec<_>>>()?;
        let c = cfg(config);
        let a = algebra.0.clone();
        py.detach(|| CstarCover::make(name, &a, &amb, &ims, &c)).map(PyCover).map_err(err)
    }

    /// Bundled covers: schur, schur_twisted, schur_orbit, a4_identity on
    /// the 4×4 algebra; t2_identity, diag, chi1, chi2, shrunk on T2.
    #[staticmethod]
    #[pyo3(signature = (name, config=None))]
    fn named(py: Python<'_>, name: &str, config: Option<PyConfig>) -> PyResult<Self> {
        let c = cfg(config);
        let t2 = corpus::t2();
        py.detach(|| match name {
            "schur" => corpus::schur_cover(&c),
            "schur_twisted" => corpus::schur_cover_twisted(&c),
            "schur_orbit" => corpus::schur_orbit_cover(&c),
            "a4_identity" => corpus::a4_identity_cover(&c),
            "t2_identity" => t2.identity_cover(&c),
            "diag" => corpus::diag_cover(&t2, &c),
            "chi1" => corpus::first_char_cover(&t2, &c),
            "chi2" => corpus::second_char_cover(&t2, &c),
            "shrunk" => corpus::shrunk_cover(&t2, &c),
            other => Err(Error::Input(format!("no bundled cover '{other}'"))),
        })
        .map(PyCover)
        .map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn ambient(&self) -> Vec<usize> {
        self.0.ambient().blocks().to_vec()
    }

    #[getter]
    fn algebra(&self) -> PyAlgebra {
        PyAlgebra(self.0.algebra.clone())
    }

    /// Wedderburn block sizes of the cover algebra.
    fn block_dims(&self) -> PyResult<Vec<usize>> {
        self.0.block_dims().map_err(err)
    }

    /// Block type such as `M4⊕M2⊕ℂ²`.
    fn structure(&self) -> PyResult<String> {
        Ok(structure::render_dims(&self.0.block_dims().map_err(err)?))
    }

    fn images(&self) -> Vec<PyMat> {
        self.0.gen_images().iter().map(from_mat).collect()
    }

    /// Block indices of the Shilov ideal plus the type of what is left.
    #[pyo3(signature = (config=None))]
    fn shilov(&self, py: Python<'_>, config: Option<PyConfig>) -> PyResult<Py<PyAny>> {
        let c = cfg(config);
        let rep = py.detach(|| covers::shilov(&self.0, &c)).map_err(err)?;
        let dims = self.0.block_dims().map_err(err)?;
        let rest: Vec<usize> = (0..dims.len()).filter(|b| !rep.set.contains(b)).map(|b| dims[b]).collect();
        let sh: Vec<usize> = rep.set.iter().map(|&b| dims[b]).collect();
        to_py(
            py,
            &json!({
                "blocks": rep.set,
                "type": structure::render_dims(&sh),
                "envelope_type": structure::render_dims(&rest),
                "decisive": rep.is_decisive(),
            }),
        )
    }

    #[pyo3(signature = (config=None))]
    fn envelope(&self, py: Python<'_>, config: Option<PyConfig>) -> PyResult<PyCover> {
        let c = cfg(config);
        py.detach(|| covers::envelope(&self.0, &c)).map(PyCover).map_err(err)
    }

    /// Is the Shilov ideal essential in the cover algebra?
    #[pyo3(signature = (config=None))]
    fn is_essential(&self, py: Python<'_>, config: Option<PyConfig>) -> PyResult<bool> {
        let c = cfg(config);
        py.detach(|| {
            let rep = covers::shilov(&self.0, &c)?;
            structure::is_essential(&self.0.c, &rep.set)
        })
        .map_err(err)
    }

    /// `self ≤ upper`: a *-homomorphism `upper → self` intertwines the maps.
    #[pyo3(signature = (upper, config=None))]
    fn below(&self, py: Python<'_>, upper: &PyCover, config: Option<PyConfig>) -> PyResult<bool> {
        let c = cfg(config);
        py.detach(|| covers::below(&self.0, &upper.0, &c)).map_err(err)
    }

    #[pyo3(signature = (other, config=None))]
    fn equivalent(&self, py: Python<'_>, other: &PyCover, config: Option<PyConfig>) -> PyResult<bool> {
        let c = cfg(config);
        py.detach(|| covers::equivalent(&self.0, &other.0, &c)).map_err(err)
    }

    #[pyo3(signature = (other, config=None))]
    fn join(&self, py: Python<'_>, other: &PyCover, config: Option<PyConfig>) -> PyResult<PyCover> {
        let c = cfg(config);
        py.detach(|| covers::join(&[&self.0, &other.0], &c)).map(PyCover).map_err(err)
    }

    #[pyo3(signature = (other, config=None))]
    fn meet(&self, py: Python<'_>, other: &PyCover, config: Option<PyConfig>) -> PyResult<PyCover> {
        let c = cfg(config);
        py.detach(|| covers::meet(&self.0, &other.0, &c)).map(PyCover).map_err(err)
    }

    fn __repr__(&self) -> String {
        let ty = self.0.block_dims().map(|d| structure::render_dims(&d)).unwrap_or_default();
        format!("Cover({:?}, {ty})", self.0.name)
    }
}

#[pyclass(name = "Group", frozen, skip_from_py_object)]
struct PyGroup(FiniteGroup);

#[pymethods]
impl PyGroup {
    /// Multiplication table with identity 0.
    #[new]
    fn new(name: &str, table: Vec<Vec<usize>>) -> PyResult<Self> {
        FiniteGroup::from_table(name, table).map(PyGroup).map_err(err)
    }

    #[staticmethod]
    fn cyclic(n: usize) -> Self {
        PyGroup(FiniteGroup::cyclic(n))
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    fn mul(&self, s: usize, t: usize) -> usize {
        self.0.mul(s, t)
    }
}

/// An action of a finite group on an operator algebra by complete isometries.
#[pyclass(name = "System", frozen, skip_from_py_object)]
struct PySystem(DynamicalSystem);

#[pymethods]
impl PySystem {
    /// `α_s = ad(u_s)`, one unitary per group element.
    #[staticmethod]
    #[pyo3(signature = (algebra, group, unitaries, config=None))]
    fn conjugation(algebra: &PyAlgebra, group: &PyGroup, unitaries: Vec<PyMat>, config: Option<PyConfig>) -> PyResult<Self> {
        let us = unitaries.iter().map(to_mat).collect::<PyResult<Vec<_>>>()?;
        DynamicalSystem::conjugation(&algebra.0, group.0.clone(), &us, &cfg(config)).map(PySystem).map_err(err)
    }

    /// `images[s][k]` is `α_s` of generator `k`.
    #[staticmethod]
    #[pyo3(signature = (algebra, group, images, config=None))]
    fn from_images(py: Python<'_>, algebra: &PyAlgebra, group: &PyGroup, images: Vec<Vec<PyMat>>, config: Option<PyConfig>) -> PyResult<Self> {
        let ims = images.iter().map(|s| s.iter().map(to_mat).collect::<PyResult<Vec<_>>>()).collect::<PyResult<Vec<_>>>()?;
        let c = cfg(config);
        let a = algebra.0.clone();
        let g = group.0.clone();
        py.detach(|| DynamicalSystem::make(&a, g, ims, covers::Validation::Full, &c)).map(PySystem).map_err(err)
    }

    /// Bundled systems: swap (on the 4×4 algebra), t2_sign, t2_rotation.
    #[staticmethod]
    #[pyo3(signature = (name, config=None))]
    fn named(name: &str, config: Option<PyConfig>) -> PyResult<Self> {
        let c = cfg(config);
        match name {
            "swap" => corpus::swap_system(&c),
            "t2_sign" => corpus::t2_sign_system(&corpus::t2(), &c),
            "t2_rotation" => corpus::t2_rotation_system(&corpus::t2(), &c),
            other => Err(Error::Input(format!("no bundled system '{other}'"))),
        }
        .map(PySystem)
        .map_err(err)
    }

    fn act(&self, s: usize, a: PyMat) -> PyResult<PyMat> {
        self.0.act(s, &to_mat(&a)?).map(|m| from_mat(&m)).map_err(err)
    }
}

/// Does the action lift to the cover? Returns the verdict and, when it
/// does not, a witness `(0, y)` in the graph closure.
#[pyfunction]
#[pyo3(signature = (system, cover, config=None))]
fn admissible(py: Python<'_>, system: &PySystem, cover: &PyCover, config: Option<PyConfig>) -> PyResult<Py<PyAny>> {
    let c = cfg(config);
    let rep = py.detach(|| dynamics::admissible(&system.0, &cover.0, &c)).map_err(err)?;
    let mut out = json!({"admissible": rep.admissible, "closure_dims": rep.closure_dims});
    if let Some((s, w)) = &rep.witness {
        out["element"] = json!(s);
        out["witness"] = report::witness(w, &cover.0.algebra.gen_names);
    }
    to_py(py, &out)
}

/// Unitaries of the cover implementing the lifted action, if any.
#[pyfunction]
#[pyo3(signature = (system, cover, config=None))]
fn locally_inner(py: Python<'_>, system: &PySystem, cover: &PyCover, config: Option<PyConfig>) -> PyResult<Option<Vec<PyMat>>> {
    let c = cfg(config);
    let rep = py.detach(|| dynamics::locally_inner(&system.0, &cover.0, &c)).map_err(err)?;
    Ok(rep.unitaries.map(|us| us.iter().map(from_mat).collect()))
}

/// Crossed product relative to `cover`, or the full one (over the
/// envelope) when no cover is given.
#[pyfunction]
#[pyo3(signature = (system, cover=None, config=None))]
fn crossed_product(py: Python<'_>, system: &PySystem, cover: Option<&PyCover>, config: Option<PyConfig>) -> PyResult<Py<PyAny>> {
    let c = cfg(config);
    let out = py
        .detach(|| -> opcover::Result<Value> {
            let cp = match cover {
                Some(cv) => crossed::relative_crossed(&system.0, &cv.0, &c)?,
                None => crossed::full_crossed(&system.0, &c)?.1,
            };
            let diag = cp.diagonal_dims()?;
            let cs = cp.cstar()?;
            let cdims = cs.structure()?.dims();
            Ok(json!({
                "dim": cp.dim(),
                "diagonal": diag,
                "diagonal_type": structure::render_dims(&diag),
                "cstar": cdims,
                "cstar_type": structure::render_dims(&cdims),
                "covariance_residual": report::num(cp.covariance_residual()?),
            }))
        })
        .map_err(err)?;
    to_py(py, &out)
}

/// Compares the crossed products of two actions on the same cover.
#[pyfunction]
#[pyo3(signature = (a, b, cover, config=None))]
fn crossed_equivalent(py: Python<'_>, a: &PySystem, b: &PySystem, cover: &PyCover, config: Option<PyConfig>) -> PyResult<bool> {
    let c = cfg(config);
    py.detach(|| {
        let x = crossed::relative_crossed(&a.0, &cover.0, &c)?;
        let y = crossed::relative_crossed(&b.0, &cover.0, &c)?;
        crossed::crossed_equivalent(&x, &y, &c).map(|r| r.equivalent)
    })
    .map_err(err)
}

/// Untwists a locally inner action into the trivial-action crossed product.
#[pyfunction]
#[pyo3(signature = (system, cover, config=None))]
fn trivialize(py: Python<'_>, system: &PySystem, cover: &PyCover, config: Option<PyConfig>) -> PyResult<Py<PyAny>> {
    let c = cfg(config);
    let rep = py.detach(|| crossed::trivialization_iso(&system.0, &cover.0, &c)).map_err(err)?;
    to_py(
        py,
        &json!({
            "passed": rep.passed(),
            "ci": format!("{:?}", rep.ci.verdict),
            "twisted_dim": rep.twisted.dim(),
            "trivial_dim": rep.trivial.dim(),
            "tensor_dim": rep.tensor_dim,
            "tensor_diagonal": rep.tensor_diagonal,
            "multiplicative_defect": report::num(rep.multiplicative_defect),
        }),
    )
}

/// Partial action on the Shilov complement, its partial crossed product,
/// and the recovery of the full crossed product.
#[pyfunction]
#[pyo3(signature = (system, cover, waive_maximality=false, config=None))]
fn partial_recovery(py: Python<'_>, system: &PySystem, cover: &PyCover, waive_maximality: bool, config: Option<PyConfig>) -> PyResult<Py<PyAny>> {
    let c = cfg(config);
    let out = py
        .detach(|| -> opcover::Result<Value> {
            let dec = partial::decompose(&cover.0, waive_maximality, &c)?;
            let ds = &system.0;
            let spec = partial::build_partial_action(ds, &dec, &c)?;
            spec.verify_axioms()?;
            let pc = partial::partial_crossed(&spec)?;
            let rec = partial::verify_partial_recovery(ds, &dec, &spec, &pc, &c)?;
            let blocks = pc.block_dims()?;
            Ok(json!({
                "dim": pc.dim(),
                "blocks": blocks,
                "type": structure::render_dims(&blocks),
                "b_dim": rec.b_dim,
                "full_dim": rec.full_dim,
                "recovered": rec.passed(),
                "inverse_residuals": [report::num(rec.inverse_residuals.0), report::num(rec.inverse_residuals.1)],
                "essential": dec.essential,
            }))
        })
        .map_err(err)?;
    to_py(py, &out)
}

/// cb-check of the linear map `xs[i] ↦ ys[i]` between block ambients.
/// `kind` is "cc" (complete contraction) or "ci" (complete isometry).
#[pyfunction]
#[pyo3(signature = (domain_blocks, xs, codomain_blocks, ys, kind="cc", config=None))]
fn cb_check(
    py: Python<'_>,
    domain_blocks: Vec<usize>,
    xs: Vec<PyMat>,
    codomain_blocks: Vec<usize>,
    ys: Vec<PyMat>,
    kind: &str,
    config: Option<PyConfig>,
) -> PyResult<Py<PyAny>> {
    let dom = ambient(domain_blocks)?;
    let cod = ambient(codomain_blocks)?;
    let xs = xs.iter().map(to_mat).collect::<PyResult<Vec<_>>>()?;
    let ys = ys.iter().map(to_mat).collect::<PyResult<Vec<_>>>()?;
    let phi = LinearMap::from_pairs(&dom, &xs, &ys, &cod).map_err(err)?;
    let c = cfg(config);
    let rep = match kind {
        "cc" => py.detach(|| cb::cc_check(&phi, &c)),
        "ci" => py.detach(|| cb::ci_check(&phi, &c)),
        other => return Err(PyValueError::new_err(format!("kind must be 'cc' or 'ci', got '{other}'"))),
    };
    to_py(py, &report::cb_report(&rep))
}

/// Runs a scenario given as JSON text; returns the report dict.
#[pyfunction]
#[pyo3(signature = (text, config=None))]
fn run_scenario(py: Python<'_>, text: &str, config: Option<PyConfig>) -> PyResult<Py<PyAny>> {
    let sc = scenario::Scenario::from_json(text).map_err(err)?;
    let c = cfg(config);
    let rep = py.detach(|| scenario::run_scenario(&sc, &c)).map_err(err)?;
    to_py(py, &rep.to_json())
}

/// Names of the bundled scenarios.
#[pyfunction]
fn bundled_scenarios() -> Vec<&'static str> {
    suite::SCENARIOS.iter().map(|(n, _)| *n).collect()
}

#[pyfunction]
fn bundled_scenario(name: &str) -> PyResult<&'static str> {
    suite::SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| PyValueError::new_err(format!("no bundled scenario '{name}'")))
}

/// Full golden corpus plus property suites (about a minute in release).
#[pyfunction]
#[pyo3(signature = (config=None))]
fn paper_suite(py: Python<'_>, config: Option<PyConfig>) -> PyResult<Py<PyAny>> {
    let c = cfg(config);
    let rep = py.detach(|| suite::paper_suite(&c)).map_err(err)?;
    to_py(py, &rep.to_json())
}

#[pymodule]
fn opcover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", scenario::VERSION)?;
    m.add("OpcoverError", m.py().get_type::<OpcoverError>())?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyCover>()?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(admissible, m)?)?;
    m.add_function(wrap_pyfunction!(locally_inner, m)?)?;
    m.add_function(wrap_pyfunction!(crossed_product, m)?)?;
    m.add_function(wrap_pyfunction!(crossed_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(trivialize, m)?)?;
    m.add_function(wrap_pyfunction!(partial_recovery, m)?)?;
    m.add_function(wrap_pyfunction!(cb_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(paper_suite, m)?)?;
    Ok(())
}
