//! Hyperparameter sweeps: one full evaluation per grid value.

use std::fmt::Write as _;

use super::config::{SweepParam, SweepSpec};
use super::features::FeatureRoot;
use super::pipeline::{run_many, PipelineOutput};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_with_cap, EvalReport};
use crate::record::QueryRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub report: EvalReport,
    /// Moments emitted before truncation, summed over evaluated queries.
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str = "param,value,r1@0.5,r1@0.7,map@0.5,map@0.75,map_avg,segments";

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let [a, b, c, d, e] = row.report.headline();
            let _ = writeln!(out, "{},{},{a:.4},{b:.4},{c:.4},{d:.4},{e:.4},{}", self.param, row.value, row.segments);
        }
        out
    }

    /// The row with the highest average mAP; earliest on ties.
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows.iter().fold(None, |best: Option<&SweepRow>, r| match best {
            Some(b) if b.report.map_avg >= r.report.map_avg => Some(b),
            _ => Some(r),
        })
    }
}

/// Evaluates one pipeline output on the queries it processed.
pub fn evaluate_output(output: &PipelineOutput, dataset: &[QueryRecord], max_preds: usize) -> Result<EvalReport> {
    let subset = output.evaluated_subset(dataset);
    if subset.is_empty() {
        return Err(Error::Empty("evaluated query set"));
    }
    evaluate_with_cap(&output.predictions, &subset, max_preds)
}

pub fn sweep(spec: &SweepSpec, dataset: &[QueryRecord], root: &FeatureRoot) -> Result<SweepTable> {
    let configs = spec.configs();
    let outputs = run_many(&configs, dataset, root)?;
    let rows = spec
        .values
        .iter()
        .zip(&configs)
        .zip(&outputs)
        .map(|((&value, config), out)| {
            Ok(SweepRow { value, report: evaluate_output(out, dataset, config.max_preds)?, segments: out.segments })
        })
        .collect::<Result<_>>()?;
    Ok(SweepTable { param: spec.param, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::BucketedMap;

    fn report(v: f64) -> EvalReport {
        EvalReport {
            r1_at_0_5: v,
            r1_at_0_7: v,
            map_at_0_5: v,
            map_at_0_75: v,
            map_avg: v,
            map_by_threshold: vec![v; 10],
            bucketed: BucketedMap::default(),
            num_queries: 1,
            max_preds: 10,
        }
    }

    #[test]
    fn csv_layout_and_best_row() {
        let table = SweepTable {
            param: SweepParam::Lambda,
            rows: vec![
                SweepRow { value: 20.0, report: report(10.0), segments: 40 },
                SweepRow { value: 23.0, report: report(12.5), segments: 30 },
                SweepRow { value: 26.0, report: report(12.5), segments: 25 },
            ],
        };
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines[2], "lambda,23,12.5000,12.5000,12.5000,12.5000,12.5000,30");
        assert_eq!(table.best().unwrap().value, 23.0);
    }
}
