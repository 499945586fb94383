//! JSON file formats for models, event models, products and reports.
//!
//! Output is normalised: worlds and events keep their declared order,
//! relation pairs are sorted by that order, propositions are sorted by
//! name, empty extensions are dropped and preconditions are printed in
//! the canonical formula syntax. Parsing normalised output and printing
//! it again reproduces the same bytes.

use std::collections::BTreeMap;

use produpd_core::analysis::{Bisimulation, DegreeCheckResult, DegreeVerdict};
use produpd_core::harness::{Case, FailureRecord, FuzzReport, SuiteReport};
use produpd_core::models::ModelError;
use produpd_core::translator::TranslationReport;
use produpd_core::{parse_formula, EventModel, KripkeModel, ParseError, TaggedModel, WorldSet};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("precondition of `{event}`: {error}")]
    Precondition { event: String, error: ParseError },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    worlds: Vec<String>,
    #[serde(default)]
    rel: Vec<(String, String)>,
    #[serde(default)]
    val: BTreeMap<String, Vec<String>>,
    /// Present on product output; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tags: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventModelJson {
    events: Vec<String>,
    #[serde(default)]
    rel: Vec<(String, String)>,
    pre: BTreeMap<String, String>,
}

/// Reads a model: `{"worlds": [...], "rel": [[w, v], ...], "val": {p: [w, ...]}}`.
pub fn parse_model(text: &str) -> Result<KripkeModel, FormatError> {
    let raw: ModelJson = serde_json::from_str(text)?;
    let val: Vec<(String, Vec<String>)> = raw.val.into_iter().collect();
    Ok(KripkeModel::from_names(&raw.worlds, &raw.rel, &val)?)
}

/// Reads an event model: `{"events": [...], "rel": [[a, b], ...], "pre": {a: formula}}`.
/// The order of `events` fixes nominal numbering.
pub fn parse_event_model(text: &str) -> Result<EventModel, FormatError> {
    let raw: EventModelJson = serde_json::from_str(text)?;
    let mut pre = Vec::new();
    for (event, src) in raw.pre {
        let f = parse_formula(&src).map_err(|error| FormatError::Precondition {
            event: event.clone(),
            error,
        })?;
        pre.push((event, f));
    }
    Ok(EventModel::from_names(&raw.events, &raw.rel, &pre)?)
}

fn model_json(m: &KripkeModel) -> ModelJson {
    let name = |w: usize| m.world_name(w).to_string();
    ModelJson {
        worlds: m.world_names().to_vec(),
        rel: m.edges().map(|(a, b)| (name(a), name(b))).collect(),
        val: m
            .props()
            .map(|(p, x)| (p.clone(), x.iter().map(name).collect()))
            .collect(),
        tags: None,
    }
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

pub fn model_to_value(m: &KripkeModel) -> Value {
    serde_json::to_value(model_json(m)).expect("serialisable")
}

pub fn model_to_json(m: &KripkeModel) -> String {
    pretty(&model_json(m))
}

pub fn event_model_to_value(a: &EventModel) -> Value {
    let name = |e: usize| a.event_name(e).to_string();
    let raw = EventModelJson {
        events: a.event_names().to_vec(),
        rel: a.edges().map(|(x, y)| (name(x), name(y))).collect(),
        pre: (0..a.len()).map(|e| (name(e), a.pre(e).to_string())).collect(),
    };
    serde_json::to_value(raw).expect("serialisable")
}

pub fn event_model_to_json(a: &EventModel) -> String {
    pretty(&event_model_to_value(a))
}

/// A product in model JSON with `"tags": {pair world: event}`.
pub fn product_to_json(p: &TaggedModel, a: &EventModel) -> String {
    let mut raw = model_json(&p.model);
    raw.tags = p.tags.as_ref().map(|tags| {
        tags.iter()
            .enumerate()
            .map(|(w, &e)| (p.model.world_name(w).to_string(), a.event_name(e).to_string()))
            .collect()
    });
    pretty(&raw)
}

/// Parses and reprints a model file.
pub fn normalize_model_json(text: &str) -> Result<String, FormatError> {
    Ok(model_to_json(&parse_model(text)?))
}

pub fn normalize_event_model_json(text: &str) -> Result<String, FormatError> {
    Ok(event_model_to_json(&parse_event_model(text)?))
}

/// World names of `set`, or `#i` when the set is over a different domain.
pub fn world_list(m: &KripkeModel, set: &WorldSet) -> Vec<String> {
    set.iter()
        .map(|w| {
            if set.universe() == m.len() {
                m.world_name(w).to_string()
            } else {
                format!("#{w}")
            }
        })
        .collect()
}

pub fn translation_report_to_value(r: &TranslationReport) -> Value {
    json!({
        "input": r.input.to_string(),
        "output": r.output.to_string(),
        "input_size": r.input_size,
        "output_size": r.output_size,
        "input_eps": r.input_eps,
        "output_eps": r.output_eps,
        "steps": r.steps.iter().map(|s| json!({
            "rule": s.rule,
            "at": s.at,
            "eps": s.eps,
            "size": s.size,
            "parent": s.parent,
        })).collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

/// Relation as name pairs.
pub fn bisimulation_to_value(z: &Bisimulation, m1: &KripkeModel, m2: &KripkeModel) -> Value {
    let pairs: Vec<[&str; 2]> = z
        .pairs
        .iter()
        .map(|&(s, t)| [m1.world_name(s), m2.world_name(t)])
        .collect();
    json!({ "pairs": pairs })
}

pub fn degree_result_to_value(r: &DegreeCheckResult) -> Value {
    let mut v = json!({
        "formula": r.formula.to_string(),
        "k": r.k,
    });
    match &r.verdict {
        DegreeVerdict::ConsistentOnTestSet => {
            v["verdict"] = json!("ConsistentOnTestSet");
        }
        DegreeVerdict::Counterexample {
            index,
            model,
            full,
            truncated,
        } => {
            v["verdict"] = json!("Counterexample");
            v["counterexample"] = json!({
                "index": index,
                "model": model_to_value(&model.model),
                "point": model.model.world_name(model.point),
                "full": full,
                "truncated": truncated,
            });
        }
    }
    v
}

fn case_to_value(c: &Case) -> Value {
    let mut v = json!({
        "model": model_to_value(&c.model),
        "formula": c.display_formula().to_string(),
    });
    if let Some(a) = &c.events {
        v["events"] = event_model_to_value(a);
    }
    if let Some(w) = c.duplicate {
        v["duplicated_world"] = json!(c.model.world_name(w));
    }
    if !c.testset.is_empty() {
        v["testset"] = c
            .testset
            .iter()
            .map(|pm| json!({"model": model_to_value(&pm.model), "point": pm.model.world_name(pm.point)}))
            .collect();
    }
    v
}

fn failure_to_value(c: &Case, f: &produpd_core::harness::Failure) -> Value {
    json!({
        "detail": f.detail,
        "expected": f.expected.as_ref().map(|x| world_list(&c.model, x)),
        "actual": f.actual.as_ref().map(|x| world_list(&c.model, x)),
    })
}

fn failure_record_to_value(r: &FailureRecord) -> Value {
    json!({
        "case_index": r.case_index,
        "case": case_to_value(&r.case),
        "failure": failure_to_value(&r.case, &r.failure),
        "shrunk": {
            "steps": r.shrink_steps,
            "case": case_to_value(&r.shrunk),
            "failure": failure_to_value(&r.shrunk, &r.shrunk_failure),
        },
    })
}

fn suite_to_value(s: &SuiteReport) -> Value {
    json!({
        "suite": s.suite.name(),
        "cases": s.cases,
        "passed": s.passed,
        "failed": s.failed,
        "first_failure": s.first_failure.as_ref().map(failure_record_to_value),
        "blowup": {
            "samples": s.blowup.samples,
            "mean_size_ratio": s.blowup.mean_size_ratio,
            "max_size_ratio": s.blowup.max_size_ratio,
            "mean_output_eps": s.blowup.mean_output_eps,
            "max_output_eps": s.blowup.max_output_eps,
        },
        "measure": {
            "calls": s.measure.calls,
            "violations": s.measure.violations,
        },
        "precondition_false_points": s.precondition_false_points,
        "total_micros": s.total_micros,
        "max_case_micros": s.max_case_micros,
    })
}

pub fn fuzz_report_to_value(r: &FuzzReport) -> Value {
    let c = &r.config;
    json!({
        "config": {
            "seed": c.seed,
            "cases": c.cases,
            "max_worlds": c.max_worlds,
            "max_events": c.max_events,
            "max_props": c.max_props,
            "max_formula_size": c.max_formula_size,
            "max_eps": c.max_eps,
            "edge_probability": c.edge_probability.to_string(),
            "suites": c.suites.iter().map(|s| s.name()).collect::<Vec<_>>(),
        },
        "passed": r.all_passed(),
        "suites": r.suites.iter().map(suite_to_value).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_examples() {
        let m = parse_model(r#"{"worlds":["w0"],"rel":[["w0","w0"]],"val":{"p":["w0"]}}"#).unwrap();
        assert_eq!(m.len(), 1);
        assert!(m.has_edge(0, 0));
        assert!(matches!(
            parse_model(r#"{"worlds":[],"rel":[],"val":{}}"#),
            Err(FormatError::Model(ModelError::EmptyDomain))
        ));
        assert!(matches!(
            parse_model(r#"{"worlds":["w0"],"rel":[["w0","w1"]],"val":{}}"#),
            Err(FormatError::Model(ModelError::UnknownWorldInRelation(_)))
        ));
        assert!(matches!(
            parse_model(r#"{"worlds":["w0"],"val":{"p":["w9"]}}"#),
            Err(FormatError::Model(ModelError::UnknownWorldInValuation(_)))
        ));
    }

    #[test]
    fn event_model_examples() {
        let a = parse_event_model(r#"{"events":["a0"],"rel":[["a0","a0"]],"pre":{"a0":"true"}}"#).unwrap();
        assert_eq!(a, EventModel::skip());
        assert!(matches!(
            parse_event_model(r#"{"events":["a0"],"rel":[],"pre":{"a0":"<a0> p"}}"#),
            Err(FormatError::Model(ModelError::PreconditionNotBaseMso { .. }))
        ));
        assert!(matches!(
            parse_event_model(r#"{"events":[],"rel":[],"pre":{}}"#),
            Err(FormatError::Model(ModelError::EmptyEventSet))
        ));
        assert!(matches!(
            parse_event_model(r#"{"events":["a0"],"pre":{"a0":"p &"}}"#),
            Err(FormatError::Precondition { .. })
        ));
    }

    #[test]
    fn normalisation_is_stable() {
        let messy = r#"{"val":{"q":[],"p":["w1","w0"]},"rel":[["w1","w0"],["w0","w1"],["w0","w1"]],"worlds":["w0","w1"]}"#;
        let once = normalize_model_json(messy).unwrap();
        assert_eq!(normalize_model_json(&once).unwrap(), once);
        assert!(!once.contains("\"q\""));
        let events = r#"{"events":["b","a"],"rel":[["a","b"]],"pre":{"a":"p|q","b":"true"}}"#;
        let once = normalize_event_model_json(events).unwrap();
        assert!(once.contains("(p | q)"));
        assert_eq!(normalize_event_model_json(&once).unwrap(), once);
    }
}
