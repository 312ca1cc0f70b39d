//! Report rendering: pretty JSON and plain-text tables.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::aggregate::Explanation;
use crate::error::Result;

/// Pretty JSON with a trailing newline. Floats use the shortest
/// representation that parses back to the same value.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

pub fn explanation_from_json(text: &str) -> Result<Explanation> {
    Ok(serde_json::from_str(text)?)
}

fn fmt_num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.4}")
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        let mut first = true;
        for (c, w) in cells.iter().zip(&widths) {
            if !first {
                out.push_str("  ");
            }
            if first {
                let _ = write!(out, "{c:<w$}");
            } else {
                let _ = write!(out, "{c:>w$}");
            }
            first = false;
        }
        out.push('\n');
    };
    line(&mut out, header);
    line(&mut out, &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for r in rows {
        line(&mut out, r);
    }
    out
}

pub fn explanation_table(ex: &Explanation) -> String {
    let d = ex.input_count();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "rule {}  outcome {}  triggered {}",
        ex.rule,
        ex.outcome,
        ex.triggered_rule.as_deref().unwrap_or("none (default)")
    );
    out.push('\n');
    let mut header = vec!["feature".to_string(), "value".into(), "r".into()];
    header.extend(ex.models.iter().map(|m| format!("phi_hat[{}]", m.model)));
    header.push("e".into());
    let rows: Vec<Vec<String>> = (0..ex.features.len())
        .map(|j| {
            let mut row = vec![ex.features[j].clone(), fmt_num(ex.completed[j]), fmt_num(ex.r[j])];
            for m in &ex.models {
                row.push(if j < d { fmt_num(m.phi_hat[j]) } else { String::new() });
            }
            row.push(if j < d { fmt_num(ex.e[j]) } else { String::new() });
            row
        })
        .collect();
    out.push_str(&table(&header, &rows));
    let _ = writeln!(
        out,
        "\nbackend {}, {} background rows",
        ex.metadata.backend, ex.metadata.background_rows
    );
    out
}

/// Attributions of the input features from several methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub features: Vec<String>,
    pub instance: Vec<f64>,
    pub seed: u64,
    pub methods: Vec<MethodColumn>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodColumn {
    pub method: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

pub fn comparison_table(cmp: &Comparison) -> String {
    let mut header = vec!["feature".to_string(), "value".into()];
    header.extend(cmp.methods.iter().map(|m| {
        if m.degenerate {
            format!("{}*", m.method)
        } else {
            m.method.clone()
        }
    }));
    let rows: Vec<Vec<String>> = cmp
        .features
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let mut row = vec![f.clone(), fmt_num(cmp.instance[j])];
            row.extend(cmp.methods.iter().map(|m| fmt_num(m.values[j])));
            row
        })
        .collect();
    let mut out = table(&header, &rows);
    if cmp.methods.iter().any(|m| m.degenerate) {
        out.push_str("* all sampled labels were identical\n");
    }
    out
}
