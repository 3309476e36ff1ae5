//! The full analysis pipeline and its machine-readable report.
//!
//! `analyze` runs, in order: structural validation, the exact
//! negative-definiteness certificate, the h-recursion for every root choice,
//! index-sum residuals, separatrix witnesses per piece of the deleted
//! divisor, the separatrix-count census, and approximation chains from every
//! invariant start. Reports are deterministic: identical input and options
//! produce identical serialization.

use serde::Serialize;
use serde_json::{json, Value};

use crate::chains::{find_approximation_chain, verify_chain};
use crate::cs::{residual_report, separatrix_witnesses, strong_separatrix_count_check};
use crate::definiteness::{leading_minors, MinorSequence};
use crate::graph::{DecoratedGraph, GraphError};
use crate::tree::{compute_h, root_order, verify_h_negative};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub verdict: Verdict,
    pub details: Value,
    pub witnesses: Value,
}

impl CheckRecord {
    fn new(name: &str, verdict: Verdict, details: Value, witnesses: Value) -> Self {
        CheckRecord {
            name: name.to_string(),
            verdict,
            details,
            witnesses,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tolerance: f64,
    pub partial: bool,
    pub checks: Vec<CheckRecord>,
    pub overall: Verdict,
}

impl AnalysisReport {
    pub fn passed(&self) -> bool {
        self.overall == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub tolerance: f64,
    pub partial: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            tolerance: crate::numeric::DEFAULT_TOLERANCE,
            partial: false,
        }
    }
}

fn minors_json(minors: &MinorSequence) -> Value {
    json!(minors.0.iter().map(|d| d.to_string()).collect::<Vec<_>>())
}

/// Parse, validate and analyze a JSON graph. Malformed or invalid input is
/// an error; every downstream finding lands in the report instead.
pub fn analyze_json(raw: &str, options: AnalyzeOptions) -> Result<AnalysisReport, GraphError> {
    let graph = DecoratedGraph::from_json(raw, options.tolerance)?;
    Ok(analyze(&graph, options))
}

pub fn analyze(g: &DecoratedGraph, options: AnalyzeOptions) -> AnalysisReport {
    let mut checks = Vec::new();

    checks.push(CheckRecord::new(
        "validate",
        Verdict::Pass,
        json!({
            "components": g.components().len(),
            "corners": g.corners().len(),
            "tails": g.tails().len(),
        }),
        Value::Null,
    ));

    let matrix = g.intersection_matrix();
    let minors = leading_minors(&matrix);
    let definite = minors.alternates_strictly();
    checks.push(CheckRecord::new(
        "negative_definite",
        if definite {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        json!({
            "dimension": matrix.dimension(),
            "minors": minors_json(&minors),
        }),
        Value::Null,
    ));

    checks.push(h_all_roots_record(g));

    let residuals = residual_report(g, options.tolerance, options.partial);
    let residuals_pass = residuals.iter().all(|r| r.pass);
    checks.push(CheckRecord::new(
        "residuals",
        if residuals_pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        serde_json::to_value(&residuals).expect("serializable"),
        Value::Null,
    ));

    checks.push(match separatrix_witnesses(g, options.tolerance) {
        Ok(witnesses) => CheckRecord::new(
            "witnesses",
            Verdict::Pass,
            json!({ "pieces": witnesses.len() }),
            serde_json::to_value(&witnesses).expect("serializable"),
        ),
        Err(err) => CheckRecord::new(
            "witnesses",
            Verdict::Fail,
            json!({ "error": err.to_string() }),
            Value::Null,
        ),
    });

    let (census, census_ok) = strong_separatrix_count_check(g);
    checks.push(CheckRecord::new(
        "census",
        if census_ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        serde_json::to_value(&census).expect("serializable"),
        Value::Null,
    ));

    checks.push(chains_record(g));

    let overall = if checks.iter().any(|c| c.verdict == Verdict::Fail) {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    AnalysisReport {
        tolerance: options.tolerance,
        partial: options.partial,
        checks,
        overall,
    }
}

fn h_all_roots_record(g: &DecoratedGraph) -> CheckRecord {
    if !g.is_tree() {
        return CheckRecord::new(
            "h_all_roots",
            Verdict::Skip,
            json!({ "reason": "graph is not a tree" }),
            Value::Null,
        );
    }
    let mut failures = Vec::new();
    let mut first_table: Option<Value> = None;
    for component in g.components() {
        let root = &component.id;
        let order = root_order(g, root).expect("tree with known root");
        match compute_h(g, &order) {
            Ok(h) => {
                let negativity = verify_h_negative(&h);
                if !negativity.all_negative {
                    failures.push(json!({
                        "root": root,
                        "violations": negativity.violations,
                    }));
                }
                if first_table.is_none() {
                    let table: serde_json::Map<String, Value> = h
                        .iter()
                        .map(|(v, value)| (v.to_string(), json!(value.to_string())))
                        .collect();
                    first_table = Some(Value::Object(table));
                }
            }
            Err(err) => failures.push(json!({
                "root": root,
                "error": err.to_string(),
            })),
        }
    }
    let verdict = if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    CheckRecord::new(
        "h_all_roots",
        verdict,
        json!({
            "roots_checked": g.components().len(),
            "h": first_table.unwrap_or(Value::Null),
            "failures": failures,
        }),
        Value::Null,
    )
}

fn chains_record(g: &DecoratedGraph) -> CheckRecord {
    let mut rows = Vec::new();
    let mut all_ok = true;
    for component in g.components().iter().filter(|c| c.invariant) {
        match find_approximation_chain(g, &component.id) {
            Ok(chain) => {
                let check = verify_chain(g, &chain).expect("found chain resolves");
                if !check.ok {
                    all_ok = false;
                }
                rows.push(json!({
                    "start": component.id,
                    "components": chain.components,
                    "corners": chain.corners,
                    "terminal": chain.terminal,
                    "verified": check.ok,
                    "violation": check.violation.map(|v| v.label()),
                }));
            }
            Err(err) => {
                all_ok = false;
                rows.push(json!({
                    "start": component.id,
                    "error": err.to_string(),
                }));
            }
        }
    }
    CheckRecord::new(
        "chains",
        if all_ok { Verdict::Pass } else { Verdict::Fail },
        json!({ "starts": rows.len() }),
        Value::Array(rows),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const A2_CHAIN: &str = r#"{
        "components": [
            {"id":"v1","weight":-2,"invariant":true},
            {"id":"v2","weight":-2,"invariant":true}
        ],
        "corners": [
            {"id":"z1","a":"v1","b":"v2","cs_a":[-1,0],"cs_b":[-1,0]}
        ],
        "tails": [
            {"id":"q1","comp":"v1","cs":[-1,0]},
            {"id":"q2","comp":"v2","cs":[-1,0]}
        ]
    }"#;

    #[test]
    fn analyze_consistent_chain_passes() {
        let report = analyze_json(A2_CHAIN, AnalyzeOptions::default()).unwrap();
        assert!(report.passed(), "{}", report.to_json());
        let h = report
            .checks
            .iter()
            .find(|c| c.name == "h_all_roots")
            .unwrap();
        // Lexicographically first root is v1: h(v2) = -2, h(v1) = -3/2.
        assert_eq!(h.details["h"]["v1"], "-3/2");
        assert_eq!(h.details["h"]["v2"], "-2");
    }

    #[test]
    fn analyze_is_deterministic() {
        let a = analyze_json(A2_CHAIN, AnalyzeOptions::default())
            .unwrap()
            .to_json();
        let b = analyze_json(A2_CHAIN, AnalyzeOptions::default())
            .unwrap()
            .to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn analyze_flags_indefinite_matrix() {
        let null_pair = r#"{
            "components": [
                {"id":"v1","weight":-1,"invariant":true},
                {"id":"v2","weight":-1,"invariant":true}
            ],
            "corners": [
                {"id":"z1","a":"v1","b":"v2","cs_a":[-1,0],"cs_b":[-1,0]}
            ],
            "tails": []
        }"#;
        let report = analyze_json(null_pair, AnalyzeOptions::default()).unwrap();
        assert!(!report.passed());
        let nd = report
            .checks
            .iter()
            .find(|c| c.name == "negative_definite")
            .unwrap();
        assert_eq!(nd.verdict, Verdict::Fail);
        assert_eq!(nd.details["minors"], json!(["-1", "0"]));
    }

    #[test]
    fn analyze_rejects_malformed_input() {
        assert!(analyze_json("{", AnalyzeOptions::default()).is_err());
        assert!(analyze_json(r#"{"components":[]}"#, AnalyzeOptions::default()).is_err());
    }
}
