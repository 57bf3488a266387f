//! CSV and JSON result files, per-parameter ratio tables and cumulative ratios.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{CspError, Result};
use crate::harness::ResultRow;

pub const CSV_HEADER: &str = "instance,config,status,solutions,nodes,checks,backjumps_total,elapsed_ms";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CspError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CspError::Parse(format!("unknown format `{s}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

fn csv_error(e: impl fmt::Display) -> CspError {
    CspError::Io(e.to_string())
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.config.clone(),
            r.status.clone(),
            r.solutions.to_string(),
            r.nodes.to_string(),
            r.checks.to_string(),
            r.backjumps_total.to_string(),
            format!("{:.3}", r.elapsed_ms),
        ])
        .map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

pub fn to_json(rows: &[ResultRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(csv_error)
}

/// Renders `rows` and writes them to `path` when given. Returns the text.
pub fn emit_report(rows: &[ResultRow], format: Format, path: Option<&Path>) -> Result<String> {
    if rows.is_empty() {
        return Err(CspError::Precondition("no rows to report".into()));
    }
    let text = match format {
        Format::Csv => to_csv(rows)?,
        Format::Json => to_json(rows)? + "\n",
    };
    if let Some(path) = path {
        fs::write(path, &text)?;
    }
    Ok(text)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    /// The grouping parameter's value.
    pub value: Json,
    /// Instances where both configurations completed.
    pub instances: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean_a / mean_b`.
    pub ratio: f64,
}

/// Node counts of `config_a` and `config_b` on the instances where both completed.
fn paired<'a>(rows: &'a [ResultRow], config_a: &str, config_b: &str) -> Vec<(&'a ResultRow, &'a ResultRow)> {
    let mut b_rows: BTreeMap<&str, &ResultRow> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.config == config_b && r.status == "COMPLETE") {
        b_rows.insert(&r.instance, r);
    }
    rows.iter()
        .filter(|r| r.config == config_a && r.status == "COMPLETE")
        .filter_map(|a| b_rows.get(a.instance.as_str()).map(|b| (a, *b)))
        .collect()
}

/// Mean node counts of two configurations grouped by the generator parameter
/// `param`, in ascending parameter order.
pub fn ratio_table(rows: &[ResultRow], param: &str, config_a: &str, config_b: &str) -> Vec<RatioRow> {
    let mut groups: Vec<(Json, Vec<(u64, u64)>)> = Vec::new();
    for (a, b) in paired(rows, config_a, config_b) {
        let Some(v) = a.params.get(param) else { continue };
        match groups.iter_mut().find(|(g, _)| g == v) {
            Some((_, list)) => list.push((a.nodes, b.nodes)),
            None => groups.push((v.clone(), vec![(a.nodes, b.nodes)])),
        }
    }
    groups.sort_by(|x, y| match (x.0.as_f64(), y.0.as_f64()) {
        (Some(p), Some(q)) => p.total_cmp(&q),
        _ => x.0.to_string().cmp(&y.0.to_string()),
    });
    groups
        .into_iter()
        .map(|(value, list)| {
            let k = list.len() as f64;
            let mean_a = list.iter().map(|p| p.0 as f64).sum::<f64>() / k;
            let mean_b = list.iter().map(|p| p.1 as f64).sum::<f64>() / k;
            RatioRow { value, instances: list.len(), mean_a, mean_b, ratio: mean_a / mean_b }
        })
        .collect()
}

/// The ratio table as CSV: `param,<config_a>,<config_b>,ratio`.
pub fn render_ratio_table(table: &[RatioRow], param: &str, config_a: &str, config_b: &str) -> String {
    let mut out = format!("{param},{config_a},{config_b},ratio\n");
    for r in table {
        let value = match &r.value {
            Json::String(s) => s.clone(),
            v => v.to_string(),
        };
        out.push_str(&format!("{value},{:.2},{:.2},{:.4}\n", r.mean_a, r.mean_b, r.ratio));
    }
    out
}

/// Per-instance node ratios `nodes(a) / nodes(b)` sorted ascending. A zero
/// denominator counts as one node.
pub fn cumulative_ratios(rows: &[ResultRow], config_a: &str, config_b: &str) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = paired(rows, config_a, config_b)
        .into_iter()
        .map(|(a, b)| {
            let ratio = if a.nodes == 0 && b.nodes == 0 { 1.0 } else { a.nodes as f64 / b.nodes.max(1) as f64 };
            (a.instance.clone(), ratio)
        })
        .collect();
    out.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn row(instance: &str, config: &str, d: u64, nodes: u64) -> ResultRow {
        ResultRow {
            instance: instance.into(),
            config: config.into(),
            status: "COMPLETE".into(),
            solutions: 0,
            nodes,
            checks: 0,
            backjump_histogram: BTreeMap::new(),
            backjumps_total: 0,
            elapsed_ms: 1.5,
            params: [("d".to_string(), json!(d))].into_iter().collect(),
            error: None,
            trace: None,
        }
    }

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let rows = [row("random(5,2,2,4,3)#1", "a", 5, 3), row("i2", "b", 5, 4)];
        let text = emit_report(&rows, Format::Csv, None).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("\"random(5,2,2,4,3)#1\",a,COMPLETE"));
        assert!(emit_report(&[], Format::Csv, None).is_err());
    }

    #[test]
    fn json_round_trips() {
        let rows = vec![row("i", "a", 5, 3)];
        let back: Vec<ResultRow> = serde_json::from_str(&to_json(&rows).unwrap()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn ratio_table_groups_by_parameter() {
        let rows = [
            row("i1", "cbj", 10, 2),
            row("i1", "gac", 10, 4),
            row("i2", "cbj", 5, 1),
            row("i2", "gac", 5, 1),
            row("i3", "cbj", 10, 4),
            row("i3", "gac", 10, 4),
        ];
        let t = ratio_table(&rows, "d", "cbj", "gac");
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].value.clone(), t[0].ratio), (json!(5), 1.0));
        assert_eq!((t[1].mean_a, t[1].mean_b, t[1].ratio), (3.0, 4.0, 0.75));
        let text = render_ratio_table(&t, "d", "cbj", "gac");
        assert_eq!(text.lines().next(), Some("d,cbj,gac,ratio"));
    }

    #[test]
    fn cumulative_ratios_are_sorted() {
        let mut rows = Vec::new();
        for i in 0..100u64 {
            rows.push(row(&format!("i{i}"), "a", 5, (i * 37) % 11));
            rows.push(row(&format!("i{i}"), "b", 5, (i * 13) % 7 + 1));
        }
        let r = cumulative_ratios(&rows, "a", "b");
        assert_eq!(r.len(), 100);
        assert!(r.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
