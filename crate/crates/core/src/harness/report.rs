//! Fixed-column rendering of evaluation reports.

use std::fmt::Write as _;
use std::path::Path;

use super::features::write_atomic;
use crate::error::{Error, Result};
use crate::metrics::{EvalReport, LengthBucket};

/// The five headline values with two decimals, space separated.
pub fn headline_row(report: &EvalReport) -> String {
    report.headline().iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" ")
}

fn bucket_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.2}"))
}

/// Headline metrics followed by average mAP per ground-truth length bucket.
pub fn render_table(name: &str, report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "method", "R1@0.5", "R1@0.7", "mAP@0.5", "mAP@0.75", "mAP avg", "Long", "Medium", "Short"
    );
    let [a, b, c, d, e] = report.headline();
    let _ = writeln!(
        out,
        "{:<24} {a:>8.2} {b:>8.2} {c:>8.2} {d:>8.2} {e:>8.2} {:>8} {:>8} {:>8}",
        name,
        bucket_cell(report.bucketed.get(LengthBucket::Long)),
        bucket_cell(report.bucketed.get(LengthBucket::Medium)),
        bucket_cell(report.bucketed.get(LengthBucket::Short)),
    );
    let _ = writeln!(out, "queries: {}  max_preds: {}", report.num_queries, report.max_preds);
    out
}

pub const REPORT_CSV_HEADER: &str = "method,r1@0.5,r1@0.7,map@0.5,map@0.75,map_avg,map_long,map_medium,map_short,queries";

pub fn render_csv(rows: &[(&str, &EvalReport)]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for (name, r) in rows {
        let [a, b, c, d, e] = r.headline();
        let cell = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:.6}"));
        let _ = writeln!(
            out,
            "{name},{a:.6},{b:.6},{c:.6},{d:.6},{e:.6},{},{},{},{}",
            cell(r.bucketed.long),
            cell(r.bucketed.medium),
            cell(r.bucketed.short),
            r.num_queries
        );
    }
    out
}

pub fn write_report_json(path: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    write_atomic(path.as_ref(), &bytes)
}

pub fn load_report_json(path: impl AsRef<Path>) -> Result<EvalReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.into(), line: e.line(), message: e.to_string() })
}
