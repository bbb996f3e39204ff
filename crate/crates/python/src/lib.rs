//! Python bindings: `import openimc`.

use std::collections::BTreeMap;

use openimc::edges::{enumerate_valid_sets, DEFAULT_GUARD};
use openimc::graph::to_dot;
use openimc::imdp::{ilec_violations, maximal_ilecs_avoiding};
use openimc::oracle::{differential_run as run_differential, RandomModelSpec};
use openimc::rational::parse_literal;
use openimc::sim::{
    constant_assignments, reference_decay_probability as reference, simulate_reach, SchedulerKind,
    SchedulerSpec, DEFAULT_HORIZON,
};
use openimc::{analyze, emit_model, parse_model, Imc, ModelDocument, Rational, StateSet};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rational(text: &str) -> PyResult<Rational> {
    parse_literal(text).map_err(|e| PyValueError::new_err(format!("`{text}`: {e}")))
}

type Sets = BTreeMap<&'static str, Vec<String>>;

/// An interval Markov chain parsed from the `.imc` text format.
#[pyclass(module = "openimc", frozen)]
struct Model {
    doc: ModelDocument,
    imc: Imc,
}

impl Model {
    fn set(&self, names: Vec<String>) -> PyResult<StateSet> {
        self.imc
            .state_set(names.iter().map(String::as_str))
            .map_err(err)
    }

    fn names(&self, set: &StateSet) -> Vec<String> {
        self.imc.names(set).into_iter().map(String::from).collect()
    }
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let doc = parse_model(text).map_err(err)?;
        let imc = doc.to_imc().map_err(err)?;
        Ok(Model { doc, imc })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(err)?;
        Self::parse(&text)
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.imc.states().to_vec()
    }

    /// Members of a named set declared in the file, if any.
    fn named_set(&self, name: &str) -> Option<Vec<String>> {
        self.doc.set(name).map(<[String]>::to_vec)
    }

    /// `(is_well_formed, violation descriptions)`.
    fn well_formed(&self) -> (bool, Vec<String>) {
        let report = self.imc.well_formed();
        (report.is_well_formed(), report.describe(self.imc.states()))
    }

    /// `{"UMC": {...}, "IMDP": {...}}` with `AQ0`, `EQ0`, `EQ1`, `AQ1`.
    fn analyze(&self, target: Vec<String>) -> PyResult<BTreeMap<&'static str, Sets>> {
        let t = self.set(target)?;
        let r = analyze(&self.imc, &t).map_err(err)?;
        let mut out = BTreeMap::new();
        for (label, sets) in [("UMC", &r.umc), ("IMDP", &r.imdp)] {
            out.insert(
                label,
                BTreeMap::from([
                    ("AQ0", self.names(&sets.aq0)),
                    ("EQ0", self.names(&sets.eq0)),
                    ("EQ1", self.names(&sets.eq1)),
                    ("AQ1", self.names(&sets.aq1)),
                ]),
            );
        }
        Ok(out)
    }

    /// Maximal end components (IMDP sense) disjoint from the target.
    fn ilecs(&self, target: Vec<String>) -> PyResult<Vec<Vec<String>>> {
        let t = self.set(target)?;
        let report = maximal_ilecs_avoiding(&self.imc, &t).map_err(err)?;
        Ok(report.ilecs.iter().map(|c| self.names(c)).collect())
    }

    /// Violated ILEC condition numbers for `states` (empty when it is one).
    fn ilec_violations(&self, states: Vec<String>) -> PyResult<Vec<u32>> {
        let c = self.set(states)?;
        let v = ilec_violations(&self.imc, &c).map_err(err)?;
        Ok(v.iter().map(|x| u32::from(x.condition())).collect())
    }

    /// Valid edge sets of `state`, each as a list of `(source, target)`.
    #[pyo3(signature = (state, guard = DEFAULT_GUARD))]
    fn valid_edge_sets(&self, state: &str, guard: usize) -> PyResult<Vec<Vec<(String, String)>>> {
        let s = self.imc.index_of(state).map_err(err)?;
        let sets = enumerate_valid_sets(&self.imc, s, guard).map_err(err)?;
        Ok(sets
            .iter()
            .map(|b| {
                b.iter()
                    .map(|e| {
                        (
                            self.imc.name(e.source).to_string(),
                            self.imc.name(e.target).to_string(),
                        )
                    })
                    .collect()
            })
            .collect())
    }

    /// Canonical `.imc` text.
    fn emit(&self) -> String {
        emit_model(&self.doc)
    }

    fn to_dot(&self) -> String {
        to_dot(&self.imc)
    }

    /// Monte Carlo estimate `(hits, trials, estimate, half_width)` for
    /// `scheduler` = `"constant:λ"` or `"decaying:base"`.
    #[pyo3(signature = (target, scheduler, trials = 100_000, horizon = DEFAULT_HORIZON, seed = 0, start = None, ilec = None))]
    #[allow(clippy::too_many_arguments)]
    fn simulate(
        &self,
        target: Vec<String>,
        scheduler: &str,
        trials: u64,
        horizon: usize,
        seed: u64,
        start: Option<&str>,
        ilec: Option<Vec<String>>,
    ) -> PyResult<(u64, u64, f64, f64)> {
        let t = self.set(target)?;
        let start = match start {
            Some(name) => self.imc.index_of(name).map_err(err)?,
            None => 0,
        };
        let (kind, param) = scheduler.split_once(':').ok_or_else(|| {
            PyValueError::new_err("scheduler must be `constant:λ` or `decaying:base`")
        })?;
        let param = rational(param)?;
        let kind = match kind {
            "constant" => {
                SchedulerKind::Constant(constant_assignments(&self.imc, &t, &param).map_err(err)?)
            }
            "decaying" => {
                let ilec = match ilec {
                    Some(names) => self.set(names)?,
                    None => {
                        let report = maximal_ilecs_avoiding(&self.imc, &t).map_err(err)?;
                        report
                            .ilecs
                            .iter()
                            .find(|c| c.contains(start))
                            .or(report.ilecs.first())
                            .cloned()
                            .ok_or_else(|| PyValueError::new_err("no ILEC avoids the target"))?
                    }
                };
                SchedulerKind::Decaying {
                    ilec,
                    base: param,
                    floor: Rational::from_integer(0.into()),
                }
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown scheduler `{other}`"
                )))
            }
        };
        let spec = SchedulerSpec {
            kind,
            horizon,
            trials,
            seed,
        };
        let e = simulate_reach(&self.imc, &t, start, &spec).map_err(err)?;
        Ok((e.hits, e.trials, e.estimate, e.half_width))
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(states={:?}, edges={})",
            self.imc.states(),
            self.imc.edge_count()
        )
    }
}

/// `1 − ∏_{i=1..terms}(1 − base^i)`; `base` is a rational literal.
#[pyfunction]
fn reference_decay_probability(base: &str, terms: usize) -> PyResult<f64> {
    Ok(reference(&rational(base)?, terms))
}

/// Differential run of the polynomial algorithms against the brute-force
/// oracle; returns `(mismatches, violations)`.
#[pyfunction]
#[pyo3(signature = (states, instances, seed = 0, denominator = 4))]
fn differential_run(
    states: usize,
    instances: usize,
    seed: u64,
    denominator: i64,
) -> PyResult<(usize, usize)> {
    let spec = RandomModelSpec {
        states,
        denominator,
        seed,
        ..Default::default()
    };
    let report = run_differential(&spec, instances, DEFAULT_GUARD).map_err(err)?;
    Ok((report.mismatch_count(), report.violation_count()))
}

#[pymodule]
#[pyo3(name = "openimc")]
pub fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(reference_decay_probability, m)?)?;
    m.add_function(wrap_pyfunction!(differential_run, m)?)?;
    Ok(())
}
