//! Python bindings for the viramkit core.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use viramkit::corpus::{self, PunctuationInventory};
use viramkit::metrics::{self, MetricConfig};
use viramkit::prompts::{self, ShotExample, Strategy};
use viramkit::restorer::{self, LabelSet, LabeledSentence, PunctLabel, RestorerModel, TrainConfig};
use viramkit::runner::{self, ExperimentConfig, ReportFormat};

create_exception!(viramkit_py, ViramkitError, PyException);
create_exception!(viramkit_py, ParseError, ViramkitError);

fn err(e: impl std::fmt::Display) -> PyErr {
    ViramkitError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(module = "viramkit_py", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct BenchmarkInstance {
    id: String,
    english_written: String,
    english_meant: String,
    marathi_meant: String,
    punctuation_type: String,
}

#[pymethods]
impl BenchmarkInstance {
    fn __repr__(&self) -> String {
        format!("BenchmarkInstance(id={:?}, punctuation_type={:?})", self.id, self.punctuation_type)
    }
}

impl From<corpus::BenchmarkInstance> for BenchmarkInstance {
    fn from(b: corpus::BenchmarkInstance) -> Self {
        Self {
            id: b.id,
            english_written: b.english_written,
            english_meant: b.english_meant,
            marathi_meant: b.marathi_meant,
            punctuation_type: b.punctuation_type,
        }
    }
}

impl From<&BenchmarkInstance> for corpus::BenchmarkInstance {
    fn from(b: &BenchmarkInstance) -> Self {
        Self {
            id: b.id.clone(),
            english_written: b.english_written.clone(),
            english_meant: b.english_meant.clone(),
            marathi_meant: b.marathi_meant.clone(),
            punctuation_type: b.punctuation_type.clone(),
        }
    }
}

#[pyfunction]
fn load_benchmark(path: PathBuf) -> PyResult<Vec<BenchmarkInstance>> {
    let format = corpus::BenchmarkFormat::from_path(&path);
    Ok(corpus::load_benchmark(&path, format).map_err(err)?.into_iter().map(Into::into).collect())
}

#[pyfunction]
fn strip_punctuation(text: &str) -> String {
    corpus::strip_punctuation(text, &PunctuationInventory::default())
}

#[pyfunction]
fn normalize_ws(text: &str) -> String {
    corpus::normalize_ws(text)
}

/// Returns the variant as a list of (source, target) pairs.
#[pyfunction]
fn make_variant(pairs: Vec<(String, String)>, kind: &str) -> PyResult<Vec<(String, String)>> {
    let kind: corpus::VariantKind = kind.parse().map_err(err)?;
    let pairs = pairs
        .into_iter()
        .map(|(s, t)| corpus::ParallelPair::new(s, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let base = corpus::ParallelCorpus::new("base", pairs);
    let v = corpus::make_variant(&base, kind, &PunctuationInventory::default()).map_err(err)?;
    Ok(v.pairs.into_iter().map(|p| (p.source, p.target)).collect())
}

#[pyfunction]
fn corpus_bleu(hyps: Vec<String>, refs: Vec<String>) -> PyResult<f64> {
    Ok(metrics::corpus_bleu(&hyps, &refs, &MetricConfig::default()).map_err(err)?.score)
}

#[pyfunction]
#[pyo3(signature = (hyps, refs, beta = 2.0))]
fn chrf(hyps: Vec<String>, refs: Vec<String>, beta: f64) -> PyResult<f64> {
    Ok(metrics::chrf(&hyps, &refs, &MetricConfig::default().with_beta(beta)).map_err(err)?.score)
}

/// BLEU, chrF++ and chrF2++ for one system, as a dict.
#[pyfunction]
#[pyo3(signature = (hyps, refs, system_name = "system"))]
fn score_report<'py>(py: Python<'py>, hyps: Vec<String>, refs: Vec<String>, system_name: &str) -> PyResult<Bound<'py, PyAny>> {
    let report = metrics::build_report(system_name, None, &hyps, &refs, Default::default(), &MetricConfig::default())
        .map_err(err)?;
    to_py(py, &report)
}

fn parse_labels(names: &[String]) -> PyResult<Vec<PunctLabel>> {
    names.iter().map(|n| n.parse::<PunctLabel>().map_err(err)).collect()
}

/// Tokens and slot labels of a punctuated sentence.
#[pyfunction]
fn derive_labels(text: &str) -> PyResult<(Vec<String>, Vec<String>)> {
    let s = restorer::derive_labels(text, &PunctuationInventory::default(), &LabelSet::default()).map_err(err)?;
    Ok((s.tokens().to_vec(), s.labels().iter().map(|l| l.name().to_string()).collect()))
}

#[pyfunction]
fn apply_labels(tokens: Vec<String>, labels: Vec<String>) -> PyResult<String> {
    let s = LabeledSentence::new(tokens, parse_labels(&labels)?).map_err(err)?;
    Ok(restorer::apply_labels(&s))
}

fn labeled(sentences: &[String]) -> PyResult<Vec<LabeledSentence>> {
    let inv = PunctuationInventory::default();
    let set = LabelSet::default();
    sentences.iter().map(|s| restorer::derive_labels(s, &inv, &set).map_err(err)).collect()
}

#[pyclass(module = "viramkit_py", frozen)]
struct Restorer {
    model: RestorerModel,
}

#[pymethods]
impl Restorer {
    #[staticmethod]
    #[pyo3(signature = (sentences, epochs = 5, seed = 7))]
    fn train(py: Python<'_>, sentences: Vec<String>, epochs: usize, seed: u64) -> PyResult<Self> {
        let data = labeled(&sentences)?;
        let cfg = TrainConfig { epochs, seed, label_set: LabelSet::default() };
        let model = py.detach(|| restorer::train(&data, &cfg)).map_err(err)?;
        Ok(Self { model })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { model: RestorerModel::load(&path).map_err(err)? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { model: RestorerModel::from_text(text).map_err(err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.model.save(&path).map_err(err)
    }

    fn to_text(&self) -> String {
        self.model.to_text()
    }

    fn restore(&self, text: &str) -> PyResult<String> {
        restorer::restore(&self.model, text, &PunctuationInventory::default()).map_err(err)
    }

    /// Slot-level scores on punctuated held-out sentences.
    fn evaluate<'py>(&self, py: Python<'py>, sentences: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
        let eval = restorer::evaluate_restorer(&self.model, &labeled(&sentences)?).map_err(err)?;
        to_py(py, &eval)
    }
}

fn strategy(name: &str) -> PyResult<Strategy> {
    name.parse().map_err(err)
}

/// Renders a prompt. Three-shot strategies use the reference
/// demonstrations unless `shots` gives (written, meant, marathi) triples.
#[pyfunction]
#[pyo3(signature = (strategy_name, sentence, shots = None))]
fn render_prompt(strategy_name: &str, sentence: &str, shots: Option<Vec<(String, String, String)>>) -> PyResult<String> {
    let s = strategy(strategy_name)?;
    let shots = match shots {
        Some(v) => v.into_iter().map(|(w, m, t)| ShotExample::new(w, m, t)).collect::<Result<Vec<_>, _>>().map_err(err)?,
        None if s.shot_count() > 0 => prompts::reference_shots(),
        None => Vec::new(),
    };
    prompts::render_prompt(s, sentence, &shots).map_err(err)
}

/// Returns (restored_english or None, marathi).
#[pyfunction]
fn parse_reply(strategy_name: &str, raw: &str) -> PyResult<(Option<String>, String)> {
    let p = prompts::parse_reply(strategy(strategy_name)?, raw).map_err(|e| ParseError::new_err(e.to_string()))?;
    Ok((p.restored_english, p.marathi))
}

/// Splits shots out of a benchmark; returns (shots, eval_set).
#[pyfunction]
fn select_and_exclude_shots(
    benchmark: Vec<PyRef<'_, BenchmarkInstance>>,
    shot_ids: Vec<String>,
) -> PyResult<(Vec<BenchmarkInstance>, Vec<BenchmarkInstance>)> {
    let bench: Vec<corpus::BenchmarkInstance> = benchmark.iter().map(|b| (&**b).into()).collect();
    let (_, eval) = prompts::select_and_exclude_shots(&bench, &shot_ids).map_err(err)?;
    let shots = shot_ids
        .iter()
        .filter_map(|id| bench.iter().find(|b| &b.id == id).cloned())
        .map(Into::into)
        .collect();
    Ok((shots, eval.into_iter().map(Into::into).collect()))
}

/// Runs an experiment from a TOML file and returns the report table as a dict.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config_path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::load(&config_path).map_err(err)?;
    let out = py.detach(|| runner::run_experiment(&cfg)).map_err(err)?;
    to_py(py, &out.table)
}

/// Renders `<dir>/report.json` as markdown, csv or json.
#[pyfunction]
#[pyo3(signature = (run_dir, format = "markdown"))]
fn render_report(run_dir: PathBuf, format: &str) -> PyResult<String> {
    let format: ReportFormat = format.parse().map_err(err)?;
    let table = runner::load_report(&run_dir.join(runner::REPORT_FILE)).map_err(err)?;
    runner::render_report(&table, format).map_err(err)
}

#[pymodule]
fn viramkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ViramkitError", m.py().get_type::<ViramkitError>())?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add_class::<BenchmarkInstance>()?;
    m.add_class::<Restorer>()?;
    m.add_function(wrap_pyfunction!(load_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(strip_punctuation, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_ws, m)?)?;
    m.add_function(wrap_pyfunction!(make_variant, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_bleu, m)?)?;
    m.add_function(wrap_pyfunction!(chrf, m)?)?;
    m.add_function(wrap_pyfunction!(score_report, m)?)?;
    m.add_function(wrap_pyfunction!(derive_labels, m)?)?;
    m.add_function(wrap_pyfunction!(apply_labels, m)?)?;
    m.add_function(wrap_pyfunction!(render_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(parse_reply, m)?)?;
    m.add_function(wrap_pyfunction!(select_and_exclude_shots, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(render_report, m)?)?;
    Ok(())
}
