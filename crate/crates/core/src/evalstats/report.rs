//! Evaluation report: machine-readable JSON plus an aligned text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::winning::WinningTable;
use super::{AccuracyReport, HardnessReport, PercentileSummary};
use crate::combine::SweepPoint;
use crate::error::{Error, Result};
use crate::nli::PoolingStrategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySection {
    pub dataset: String,
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<PoolingStrategy>,
    pub accuracy: f64,
    pub report: AccuracyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub dataset: String,
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<PoolingStrategy>,
    /// `segment` or `system`.
    pub level: String,
    pub pearson: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kendall: Option<f64>,
    pub n: usize,
    pub dropped: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooSelection {
    pub held_out: String,
    pub strategy: PoolingStrategy,
    /// Performance on the held-out dataset with the selected strategy.
    pub performance: f64,
    /// Same, with the strategy selected on all datasets.
    pub global_performance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub nli_metric: String,
    pub base_metric: String,
    pub points: Vec<SweepPoint>,
    pub best_w: f64,
    /// Mean of accuracy and correlation at `best_w`.
    pub best_overall: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: Vec<AccuracySection>,
    pub correlations: Vec<CorrelationRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winning: Option<WinningTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_strategy: Option<PoolingStrategy>,
    #[serde(default)]
    pub leave_one_out: Vec<LooSelection>,
    #[serde(default)]
    pub hardness: BTreeMap<String, HardnessReport>,
    #[serde(default)]
    pub sweeps: Vec<SweepCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overall: Option<f64>,
    /// Percentile interval of per-dataset accuracies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy_summary: Option<PercentileSummary>,
}

impl EvalReport {
    /// Accuracies within [0, 1], correlations within [-1, 1].
    pub fn validate(&self) -> Result<()> {
        for a in &self.accuracy {
            if !(0.0..=1.0).contains(&a.accuracy) {
                return Err(Error::Invalid(format!("accuracy {} for {} out of range", a.accuracy, a.dataset)));
            }
        }
        for c in &self.correlations {
            let ok = (-1.0..=1.0).contains(&c.pearson) && c.kendall.map_or(true, |k| (-1.0..=1.0).contains(&k));
            if !ok {
                return Err(Error::Invalid(format!("correlation for {} out of range", c.dataset)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        serde_json::to_string_pretty(self).map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if !self.accuracy.is_empty() {
            out.push_str("Preference accuracy\n");
            let mut rows = vec![vec!["dataset".to_string(), "metric".into(), "phenomenon".into(), "acc".into(), "ties".into(), "n".into()]];
            for a in &self.accuracy {
                let metric = match a.strategy {
                    Some(s) => format!("{}[{s}]", a.metric),
                    None => a.metric.clone(),
                };
                for (label, cell) in &a.report.per_phenomenon {
                    rows.push(vec![
                        a.dataset.clone(),
                        metric.clone(),
                        label.clone(),
                        format!("{:.3}", cell.accuracy()),
                        cell.ties.to_string(),
                        cell.total.to_string(),
                    ]);
                }
                let o = &a.report.overall;
                rows.push(vec![
                    a.dataset.clone(),
                    metric,
                    "(all)".into(),
                    format!("{:.3}", o.accuracy()),
                    o.ties.to_string(),
                    o.total.to_string(),
                ]);
            }
            push_table(&mut out, &rows);
        }
        if !self.correlations.is_empty() {
            out.push_str("\nCorrelation with human judgments\n");
            let mut rows = vec![vec!["dataset".to_string(), "metric".into(), "level".into(), "pearson".into(), "kendall".into(), "n".into(), "note".into()]];
            for c in &self.correlations {
                let metric = match c.strategy {
                    Some(s) => format!("{}[{s}]", c.metric),
                    None => c.metric.clone(),
                };
                rows.push(vec![
                    c.dataset.clone(),
                    metric,
                    c.level.clone(),
                    format!("{:.3}", c.pearson),
                    c.kendall.map_or("-".into(), |k| format!("{k:.3}")),
                    c.n.to_string(),
                    if c.degenerate { "two systems".into() } else { String::new() },
                ]);
            }
            push_table(&mut out, &rows);
        }
        if let Some(w) = &self.winning {
            out.push_str("\nWinning frequency (adversarial+standard)\n");
            out.push_str(&w.render());
        }
        if let Some(s) = self.selected_strategy {
            let _ = writeln!(out, "\nSelected pooling strategy: {s}");
        }
        if !self.leave_one_out.is_empty() {
            out.push_str("\nLeave-one-out selection\n");
            let mut rows = vec![vec!["held out".to_string(), "strategy".into(), "perf".into(), "global".into(), "delta".into()]];
            for l in &self.leave_one_out {
                rows.push(vec![
                    l.held_out.clone(),
                    l.strategy.to_string(),
                    format!("{:.3}", l.performance),
                    format!("{:.3}", l.global_performance),
                    format!("{:+.3}", l.performance - l.global_performance),
                ]);
            }
            push_table(&mut out, &rows);
        }
        if !self.hardness.is_empty() {
            out.push_str("\nEdit distance of the paraphrase (failures vs successes)\n");
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
            let mut rows = vec![vec!["dataset".to_string(), "fail".into(), "ok".into(), "gap".into()]];
            for (k, h) in &self.hardness {
                rows.push(vec![k.clone(), fmt(h.failure_mean_distance), fmt(h.success_mean_distance), fmt(h.gap)]);
            }
            push_table(&mut out, &rows);
        }
        for s in &self.sweeps {
            let _ = writeln!(out, "\nSweep {} + {}", s.nli_metric, s.base_metric);
            let mut rows = vec![vec!["w_nli".to_string(), "accuracy".into(), "correlation".into()]];
            for p in &s.points {
                rows.push(vec![format!("{:.1}", p.w_nli), format!("{:.3}", p.accuracy), format!("{:.3}", p.correlation)]);
            }
            push_table(&mut out, &rows);
            let _ = writeln!(out, "best w_nli = {:.1} (overall {:.3})", s.best_w, s.best_overall);
        }
        if let Some(o) = self.overall {
            let _ = writeln!(out, "\nOverall performance: {o:.3}");
        }
        if let Some(s) = &self.accuracy_summary {
            let _ = writeln!(
                out,
                "Accuracy over {} datasets: mean {:.3}, {:.0}% percentile interval [{:.3}, {:.3}]",
                s.n,
                s.mean,
                s.coverage * 100.0,
                s.lower,
                s.upper
            );
        }
        out
    }
}

fn push_table(out: &mut String, rows: &[Vec<String>]) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for row in rows {
        let line: Vec<String> = row.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalstats::AccuracyCell;

    #[test]
    fn text_and_json() {
        let mut report = EvalReport::default();
        let mut acc = AccuracyReport::default();
        acc.overall = AccuracyCell { correct: 3, ties: 1, total: 4 };
        acc.per_phenomenon.insert("negation".into(), acc.overall);
        report.accuracy.push(AccuracySection {
            dataset: "paws".into(),
            metric: "sentbleu".into(),
            strategy: None,
            accuracy: 0.75,
            report: acc,
        });
        report.correlations.push(CorrelationRow {
            dataset: "wmt".into(),
            metric: "sentbleu".into(),
            strategy: None,
            level: "system".into(),
            pearson: 1.0,
            kendall: None,
            n: 2,
            dropped: 0,
            degenerate: true,
        });
        let text = report.render_text();
        assert!(text.contains("negation") && text.contains("0.750") && text.contains("two systems"));
        let json = report.to_json().unwrap();
        let back: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        report.correlations[0].pearson = 1.5;
        assert!(report.to_json().is_err());
    }
}
