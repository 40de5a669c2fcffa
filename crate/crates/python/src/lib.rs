use std::path::PathBuf;

use halq::bell::{self, HalVariant, PollRecord};
use halq::corpus::{self, Corpus};
use halq::hal::DEFAULT_WINDOW;
use halq::index;
use halq::query::{self, Operator, Query, DEFAULT_TAU};
use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: halq::Error) -> PyErr {
    match e {
        halq::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn variant(name: &str) -> PyResult<HalVariant> {
    name.parse().map_err(to_py)
}

#[pyfunction]
fn normalize_text(raw: &str) -> String {
    corpus::normalize_text(raw)
}

#[pyfunction]
fn tokenize(normalized: &str) -> Vec<String> {
    corpus::tokenize(normalized)
}

#[pyfunction]
#[pyo3(signature = (responses, scale = 10.0))]
fn mean_score(responses: Vec<f64>, scale: f64) -> PyResult<f64> {
    bell::mean_score(&responses, scale).map_err(to_py)
}

#[pyfunction]
fn classify_regime(s: f64) -> PyResult<String> {
    bell::classify_regime(s).map(|r| r.to_string()).map_err(to_py)
}

#[pyclass(name = "BellReport", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBellReport {
    #[pyo3(get)]
    s_value: f64,
    #[pyo3(get)]
    terms: [f64; 4],
    #[pyo3(get)]
    regime: String,
    #[pyo3(get)]
    formula_variant: String,
}

#[pymethods]
impl PyBellReport {
    fn __repr__(&self) -> String {
        format!(
            "BellReport(s_value={:.6}, regime='{}', formula_variant='{}')",
            self.s_value, self.regime, self.formula_variant
        )
    }
}

impl From<bell::BellReport> for PyBellReport {
    fn from(r: bell::BellReport) -> Self {
        PyBellReport {
            s_value: r.s_value,
            terms: r.terms,
            regime: r.regime.to_string(),
            formula_variant: r.formula_variant.to_string(),
        }
    }
}

#[pyfunction]
fn bell_poll(mu_a: f64, mu_b: f64, mu_a_or_b: f64) -> PyResult<PyBellReport> {
    let record = PollRecord::new("", mu_a, mu_b, mu_a_or_b).map_err(to_py)?;
    bell::bell_poll(&record).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x_af, x_al, x_bf, x_bl, variant = "table"))]
fn bell_hal(x_af: f64, x_al: f64, x_bf: f64, x_bl: f64, variant: &str) -> PyResult<PyBellReport> {
    bell::bell_hal(x_af, x_al, x_bf, x_bl, self::variant(variant)?)
        .map(Into::into)
        .map_err(to_py)
}

#[pyclass(name = "InterferenceReport", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInterferenceReport {
    #[pyo3(get)]
    classical_average: f64,
    #[pyo3(get)]
    interference_term: f64,
    #[pyo3(get)]
    cos_phi_unit_c: Option<f64>,
    #[pyo3(get)]
    required_c: Option<f64>,
    #[pyo3(get)]
    extension_flag: String,
}

#[pyfunction]
fn interference_analysis(mu_a: f64, mu_b: f64, mu_a_or_b: f64) -> PyResult<PyInterferenceReport> {
    let record = PollRecord::new("", mu_a, mu_b, mu_a_or_b).map_err(to_py)?;
    let r = bell::interference_analysis(&record).map_err(to_py)?;
    Ok(PyInterferenceReport {
        classical_average: r.classical_average,
        interference_term: r.interference_term,
        cos_phi_unit_c: r.cos_phi_unit_c,
        required_c: r.required_c,
        extension_flag: r.extension_flag.to_string(),
    })
}

/// Returns `(deficits, zero_deficit_count, mean_deficit)`.
#[pyfunction]
#[pyo3(signature = (rows, scale = 10.0, epsilon = bell::DEFAULT_EXCLUSIVITY_EPSILON))]
fn exclusivity_stats(
    rows: Vec<(String, f64, f64)>,
    scale: f64,
    epsilon: f64,
) -> PyResult<(Vec<f64>, usize, f64)> {
    let s = bell::exclusivity_stats(&rows, scale, epsilon).map_err(to_py)?;
    Ok((
        s.rows.iter().map(|r| r.deficit).collect(),
        s.zero_deficit_count,
        s.mean_deficit,
    ))
}

/// A corpus index: vocabulary plus one HAL matrix per document.
#[pyclass(name = "Index", frozen)]
struct PyIndex {
    inner: index::Index,
}

impl PyIndex {
    fn matrix(&self, doc_id: &str) -> PyResult<&halq::hal::HalMatrix> {
        self.inner
            .matrices
            .iter()
            .find(|m| m.doc_id() == doc_id)
            .ok_or_else(|| PyKeyError::new_err(doc_id.to_string()))
    }

    fn term(&self, word: &str) -> PyResult<u32> {
        self.inner
            .vocabulary
            .resolve(word)
            .ok_or_else(|| PyKeyError::new_err(word.to_string()))
    }
}

#[pymethods]
impl PyIndex {
    #[staticmethod]
    #[pyo3(signature = (documents, window = DEFAULT_WINDOW))]
    fn from_texts(documents: Vec<(String, String)>, window: usize) -> PyResult<Self> {
        let corpus = Corpus::from_texts(documents).map_err(to_py)?;
        let inner = index::Index::build(&corpus, window).map_err(to_py)?;
        Ok(PyIndex { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (manifest, window = DEFAULT_WINDOW))]
    fn from_manifest(manifest: PathBuf, window: usize) -> PyResult<Self> {
        let corpus = Corpus::from_manifest(&manifest).map_err(to_py)?;
        let inner = index::Index::build(&corpus, window).map_err(to_py)?;
        Ok(PyIndex { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        index::Index::load(&path).map(|inner| PyIndex { inner }).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py)
    }

    #[getter]
    fn window(&self) -> usize {
        self.inner.window
    }

    #[getter]
    fn vocabulary(&self) -> Vec<String> {
        self.inner.vocabulary.terms().to_vec()
    }

    #[getter]
    fn documents(&self) -> Vec<String> {
        self.inner.matrices.iter().map(|m| m.doc_id().to_string()).collect()
    }

    /// Canonical term for a query word (plural folding applied).
    fn fold(&self, word: &str) -> String {
        self.inner.vocabulary.fold(&corpus::normalize_text(word))
    }

    /// Non-zero components of a unit context vector as `[(term, weight)]`.
    fn context_vector(&self, doc_id: &str, word: &str) -> PyResult<Vec<(String, f64)>> {
        let v = self
            .matrix(doc_id)?
            .context_vector(self.term(word)?)
            .map_err(to_py)?;
        Ok(v
            .components()
            .iter()
            .map(|&(t, x)| (self.inner.vocabulary.term(t).unwrap_or_default().to_string(), x))
            .collect())
    }

    fn score_and(&self, doc_id: &str, a: &str, b: &str) -> PyResult<f64> {
        query::score_and(self.matrix(doc_id)?, self.term(a)?, self.term(b)?).map_err(to_py)
    }

    #[pyo3(signature = (doc_id, a, b, refined = false, tau = DEFAULT_TAU))]
    fn score_without(&self, doc_id: &str, a: &str, b: &str, refined: bool, tau: f64) -> PyResult<f64> {
        let m = self.matrix(doc_id)?;
        let (i, j) = (self.term(a)?, self.term(b)?);
        if refined {
            query::score_without_refined(m, i, j, tau)
        } else {
            query::score_without(m, i, j)
        }
        .map_err(to_py)
    }

    /// Ranks every document; returns `[(doc_id, score)]`, best first.
    #[pyo3(signature = (operator, left, right, refined = false, tau = DEFAULT_TAU))]
    fn query(
        &self,
        operator: &str,
        left: &str,
        right: &str,
        refined: bool,
        tau: f64,
    ) -> PyResult<Vec<(String, f64)>> {
        let op: Operator = operator.parse().map_err(to_py)?;
        let mut q = Query::new(op, left, right);
        q.refined = refined;
        q.tau = tau;
        let ranking = query::rank_documents(&self.inner.matrices, &self.inner.vocabulary, &q)
            .map_err(to_py)?;
        Ok(ranking.scores.into_iter().map(|s| (s.doc_id, s.score)).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.matrices.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Index(documents={}, terms={}, window={})",
            self.inner.matrices.len(),
            self.inner.vocabulary.len(),
            self.inner.window
        )
    }
}

#[pymodule]
fn pyhalq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize_text, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(mean_score, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(bell_poll, m)?)?;
    m.add_function(wrap_pyfunction!(bell_hal, m)?)?;
    m.add_function(wrap_pyfunction!(interference_analysis, m)?)?;
    m.add_function(wrap_pyfunction!(exclusivity_stats, m)?)?;
    m.add_class::<PyIndex>()?;
    m.add_class::<PyBellReport>()?;
    m.add_class::<PyInterferenceReport>()?;
    Ok(())
}
