//! Byte-stable JSON rendering of an [`AnalysisReport`].

use serde_json::{json, Map, Value};

use crate::analysis::{AnalysisReport, SemanticsSets};
use crate::model::Imc;
use crate::stateset::StateSet;

fn names(m: &Imc, set: &StateSet) -> Value {
    Value::from(m.names(set))
}

fn sets_json(m: &Imc, sets: &SemanticsSets) -> Value {
    json!({
        "AQ0": names(m, &sets.aq0),
        "EQ0": names(m, &sets.eq0),
        "EQ1": names(m, &sets.eq1),
        "AQ1": names(m, &sets.aq1),
    })
}

/// The report as a JSON value. State arrays list names in declaration
/// order; object keys are sorted.
pub fn report_value(r: &AnalysisReport, m: &Imc) -> Value {
    let mut semantics = Map::new();
    semantics.insert("UMC".into(), sets_json(m, &r.umc));
    semantics.insert("IMDP".into(), sets_json(m, &r.imdp));
    json!({
        "states": m.states(),
        "target": names(m, &r.target),
        "semantics": semantics,
        "ilecs": r.ilecs.ilecs.iter().map(|c| names(m, c)).collect::<Vec<_>>(),
        "iterations": {
            "EQ0": { "rounds": r.eq0_trace.inner.first().copied().unwrap_or(0) },
            "EQ1": { "outer": r.eq1_trace.outer, "inner": r.eq1_trace.inner },
            "ILEC": { "rounds": r.ilecs.rounds },
        },
    })
}

pub fn emit_report(r: &AnalysisReport, m: &Imc) -> String {
    let mut out = serde_json::to_string_pretty(&report_value(r, m)).expect("JSON values serialize");
    out.push('\n');
    out
}
