//! Allocation JSON and plot-ready CSV for heuristic runs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::heuristic::{HeuristicResult, IterationRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub l1_rel_change: f64,
}

/// `{"values": [...], "total": v, "trace": [{"iter": i, "l1_rel_change": r}]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationOutput {
    pub values: Vec<f64>,
    pub total: f64,
    pub trace: Vec<TraceEntry>,
}

impl AllocationOutput {
    pub fn from_result(result: &HeuristicResult) -> Self {
        AllocationOutput {
            values: result.y.clone(),
            total: result.y.iter().sum(),
            trace: result
                .trace
                .iter()
                .map(|r| TraceEntry {
                    iter: r.iter,
                    l1_rel_change: r.l1_rel_change,
                })
                .collect(),
        }
    }
}

/// `iter,l1_rel_change` rows.
pub fn convergence_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::from("iter,l1_rel_change\n");
    for r in trace {
        writeln!(out, "{},{}", r.iter, r.l1_rel_change).expect("write to string");
    }
    out
}

/// `|heuristic − exact| / exact` per player (0 when both are 0).
pub fn relative_errors(exact: &[f64], heuristic: &[f64]) -> Vec<f64> {
    exact
        .iter()
        .zip(heuristic)
        .map(|(&e, &h)| {
            if e == 0.0 {
                if h == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (h - e).abs() / e.abs()
            }
        })
        .collect()
}

/// `player,exact,heuristic,rel_error` rows.
pub fn error_csv(exact: &[f64], heuristic: &[f64]) -> String {
    let mut out = String::from("player,exact,heuristic,rel_error\n");
    for (p, ((e, h), r)) in exact.iter().zip(heuristic).zip(relative_errors(exact, heuristic)).enumerate() {
        writeln!(out, "{p},{e},{h},{r}").expect("write to string");
    }
    out
}
