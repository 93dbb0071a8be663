//! Python bindings: text helpers, the upcycling arithmetic and the stage
//! runner.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dissbus_core::corpus::Review;
use dissbus_core::parse::Tagger;
use dissbus_core::pipeline::{self, PipelineConfig, Stage};
use dissbus_core::segment::SegmenterConfig;
use dissbus_core::strain::FrequencyTable;
use dissbus_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Parameter(_) | Error::Validation(_) | Error::Format { .. } => PyValueError::new_err(e.to_string()),
        Error::MissingStage { .. } | Error::Service(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

/// An (object, evaluation) pair of stems with their coarse tags.
#[pyclass(frozen, eq, ord, hash, skip_from_py_object, name = "BiTerm")]
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct PyBiTerm(dissbus_core::summarize::BiTerm);

#[pymethods]
impl PyBiTerm {
    #[new]
    fn new(object_stem: &str, object_pos: &str, evaluation_stem: &str, evaluation_pos: &str) -> PyResult<Self> {
        PyBiTerm::from_key(&format!("{object_stem}:{object_pos}:{evaluation_stem}:{evaluation_pos}"))
    }

    /// Parses `object:POS:evaluation:POS`.
    #[staticmethod]
    fn from_key(key: &str) -> PyResult<Self> {
        key.parse().map(PyBiTerm).map_err(py_err)
    }

    #[getter]
    fn object_stem(&self) -> &str {
        &self.0.object_stem
    }

    #[getter]
    fn object_pos(&self) -> &'static str {
        self.0.object_pos.as_str()
    }

    #[getter]
    fn evaluation_stem(&self) -> &str {
        &self.0.evaluation_stem
    }

    #[getter]
    fn evaluation_pos(&self) -> &'static str {
        self.0.evaluation_pos.as_str()
    }

    fn key(&self) -> String {
        self.0.key()
    }

    fn __str__(&self) -> String {
        self.0.key()
    }

    fn __repr__(&self) -> String {
        format!("BiTerm('{}')", self.0.key())
    }
}

/// One clause of a review with its bi-terms.
#[pyclass(frozen, get_all, name = "Clause")]
struct PyClause {
    review_id: String,
    index: usize,
    text: String,
    negated: bool,
    biterms: Vec<PyBiTerm>,
}

#[pymethods]
impl PyClause {
    fn __repr__(&self) -> String {
        format!("Clause({}#{}, {:?})", self.review_id, self.index, self.text)
    }
}

#[pyfunction]
fn stem(word: &str) -> String {
    dissbus_core::stem::stem(word)
}

/// Rule-tagged tokens as `(surface, tag)` pairs.
#[pyfunction]
fn tag(text: &str) -> Vec<(String, &'static str)> {
    Tagger::shared()
        .tag(text)
        .into_iter()
        .map(|t| (t.surface, t.pos.as_str()))
        .collect()
}

/// Splits a review body into clauses with the rule tagger and extracts
/// their bi-terms.
#[pyfunction]
#[pyo3(signature = (body, review_id = "review"))]
fn disintegrate(body: &str, review_id: &str) -> Vec<PyClause> {
    let review = Review::new(review_id, body);
    let records = pipeline::disintegrate_review(&review, None, Tagger::shared(), &SegmenterConfig::default());
    let occurrences = pipeline::summarize(&records);
    records
        .into_iter()
        .map(|r| PyClause {
            biterms: occurrences
                .iter()
                .filter(|o| o.clause_index == r.clause.index)
                .map(|o| PyBiTerm(o.biterm.clone()))
                .collect(),
            review_id: r.clause.review_id,
            index: r.clause.index,
            text: r.clause.text,
            negated: r.clause.negated,
        })
        .collect()
}

/// Bi-term keys whose count reaches `cut_point`.
#[pyfunction]
fn strain(counts: BTreeMap<String, usize>, cut_point: i64) -> PyResult<Vec<String>> {
    let mut table = FrequencyTable::new();
    for (key, n) in counts {
        table.add(key.parse().map_err(py_err)?, n);
    }
    let set = dissbus_core::strain::strain(&table, cut_point).map_err(py_err)?;
    Ok(set.biterms.iter().map(|b| b.key()).collect())
}

/// Comparison seats per bag: `(apportioned, seats)`.
#[pyfunction]
fn allocate_fractional(m: usize, sizes: Vec<usize>) -> PyResult<(Vec<usize>, Vec<usize>)> {
    let a = dissbus_core::upcycle::allocate_fractional(m, &sizes).map_err(py_err)?;
    Ok((a.apportioned, a.seats))
}

/// Three-level score of a mean valence.
#[pyfunction]
#[pyo3(signature = (mean, tau = 0.25))]
fn discretize(mean: f64, tau: f64) -> PyResult<u8> {
    dissbus_core::score::discretize(mean, tau).map_err(py_err)
}

/// Stage runner over a TOML config.
#[pyclass(name = "Pipeline")]
struct PyPipeline(pipeline::Pipeline);

#[pymethods]
impl PyPipeline {
    #[new]
    #[pyo3(signature = (config, *, output = None, cut_point = None, c1 = None, c2 = None, mode = None, m = None, seed = None, tau = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        config: PathBuf,
        output: Option<PathBuf>,
        cut_point: Option<i64>,
        c1: Option<f64>,
        c2: Option<i64>,
        mode: Option<&str>,
        m: Option<usize>,
        seed: Option<u64>,
        tau: Option<f64>,
    ) -> PyResult<Self> {
        let mut cfg = PipelineConfig::load(&config).map_err(py_err)?;
        if let Some(o) = output {
            cfg.paths.output = o;
        }
        let p = &mut cfg.parameters;
        p.cut_point = cut_point.unwrap_or(p.cut_point);
        p.c1 = c1.unwrap_or(p.c1);
        p.c2 = c2.unwrap_or(p.c2);
        if let Some(mode) = mode {
            p.mode = mode.parse().map_err(py_err)?;
        }
        p.m = m.unwrap_or(p.m);
        p.seed = seed.unwrap_or(p.seed);
        p.tau = tau.unwrap_or(p.tau);
        pipeline::Pipeline::new(cfg).map(PyPipeline).map_err(py_err)
    }

    #[getter]
    fn output(&self) -> PathBuf {
        self.0.config.paths.output.clone()
    }

    /// Runs one stage and returns its manifest counts.
    fn run_stage(&self, py: Python<'_>, stage: &str) -> PyResult<BTreeMap<String, usize>> {
        let stage: Stage = stage.parse().map_err(py_err)?;
        let p = &self.0;
        py.detach(|| p.run_stage(stage)).map(|m| m.counts).map_err(py_err)
    }

    /// Runs every stage and returns the run report.
    fn run_all(&self, py: Python<'_>) -> PyResult<BTreeMap<String, usize>> {
        let p = &self.0;
        let report = py.detach(|| p.run_all()).map_err(py_err)?;
        let value = serde_json::to_value(report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        serde_json::from_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Path of a named artifact in the output directory.
    fn artifact(&self, name: &str) -> PathBuf {
        self.0.config.output(name)
    }
}

#[pymodule]
fn dissbus(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBiTerm>()?;
    m.add_class::<PyClause>()?;
    m.add_class::<PyPipeline>()?;
    m.add_function(wrap_pyfunction!(stem, m)?)?;
    m.add_function(wrap_pyfunction!(tag, m)?)?;
    m.add_function(wrap_pyfunction!(disintegrate, m)?)?;
    m.add_function(wrap_pyfunction!(strain, m)?)?;
    m.add_function(wrap_pyfunction!(allocate_fractional, m)?)?;
    m.add_function(wrap_pyfunction!(discretize, m)?)?;
    m.add("MATRIX", pipeline::MATRIX)?;
    m.add("RUN_REPORT", pipeline::RUN_REPORT)?;
    Ok(())
}
