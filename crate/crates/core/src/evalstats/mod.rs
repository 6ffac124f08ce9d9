//! Evaluation statistics: preference accuracy, correlation with human
//! judgments, pooling-strategy selection and hardness analysis.

mod correlation;
mod report;
mod winning;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::combine::ScoreBatch;
use crate::error::{Error, Result};
use crate::suite::TestSuite;
use crate::textops::levenshtein_normalized;

pub use correlation::{fractional_ranks, kendall, pearson, spearman};
pub use report::{AccuracySection, CorrelationRow, EvalReport, LooSelection, SweepCurve};
pub use winning::{best_strategy, leave_one_out_strategy, winning_frequency, winning_table, ResultsGrid, WinningTable};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCell {
    pub correct: usize,
    pub ties: usize,
    pub total: usize,
}

impl AccuracyCell {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// Accuracy if ties earned half credit.
    pub fn accuracy_half_ties(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.correct as f64 + self.ties as f64 / 2.0) / self.total as f64
        }
    }

    fn add(&mut self, para: f64, adv: f64) {
        self.total += 1;
        if para > adv {
            self.correct += 1;
        } else if para == adv {
            self.ties += 1;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub overall: AccuracyCell,
    pub per_phenomenon: BTreeMap<String, AccuracyCell>,
}

impl AccuracyReport {
    pub fn accuracy(&self) -> f64 {
        self.overall.accuracy()
    }
}

/// Phenomenon label of an instance id (`<seed_id>:<label>`).
pub fn phenomenon_of(instance_id: &str) -> &str {
    instance_id.rsplit_once(':').map_or(instance_id, |(_, label)| label)
}

fn id_diff(a: &ScoreBatch, b: &ScoreBatch) -> Result<()> {
    let only_left: Vec<String> = a.entries.keys().filter(|k| !b.entries.contains_key(*k)).cloned().collect();
    let only_right: Vec<String> = b.entries.keys().filter(|k| !a.entries.contains_key(*k)).cloned().collect();
    if only_left.is_empty() && only_right.is_empty() {
        Ok(())
    } else {
        Err(Error::IdMismatch { only_left, only_right })
    }
}

/// An instance is correct iff its paraphrase scores strictly above its
/// adversarial candidate; ties count as incorrect and are tallied.
pub fn preference_accuracy(para: &ScoreBatch, adv: &ScoreBatch) -> Result<AccuracyReport> {
    id_diff(para, adv)?;
    if para.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut report = AccuracyReport::default();
    for (id, &p) in &para.entries {
        let a = adv.entries[id];
        if !p.is_finite() || !a.is_finite() {
            return Err(Error::Invalid(format!("non-finite score for `{id}`")));
        }
        report.overall.add(p, a);
        report.per_phenomenon.entry(phenomenon_of(id).to_string()).or_default().add(p, a);
    }
    Ok(report)
}

/// One human judgment of one system output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanJudgment {
    pub segment_id: String,
    pub system_id: String,
    #[serde(rename = "score")]
    pub human_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_set_id: Option<String>,
}

impl HumanJudgment {
    /// Key under which metric scores for this output are stored.
    pub fn key(&self) -> String {
        judgment_key(&self.system_id, &self.segment_id)
    }
}

pub fn judgment_key(system_id: &str, segment_id: &str) -> String {
    format!("{system_id}:{segment_id}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub pearson: f64,
    /// Pairs (or systems) that entered the correlation.
    pub n: usize,
    /// Judgments without a metric score.
    pub dropped: usize,
    /// Two systems always correlate at +-1.
    pub degenerate: bool,
}

fn join<'a>(metric: &ScoreBatch, judgments: &'a [HumanJudgment]) -> Result<(Vec<(&'a HumanJudgment, f64)>, usize)> {
    let mut joined = Vec::new();
    let mut dropped = 0;
    for j in judgments {
        match metric.get(&j.key()) {
            Some(m) => joined.push((j, m)),
            None => dropped += 1,
        }
    }
    if joined.is_empty() {
        return Err(Error::EmptyJoin);
    }
    Ok((joined, dropped))
}

/// Pearson correlation over (system, segment) pairs present on both sides.
pub fn segment_level(metric: &ScoreBatch, judgments: &[HumanJudgment]) -> Result<Correlation> {
    let (joined, dropped) = join(metric, judgments)?;
    let (m, h): (Vec<f64>, Vec<f64>) = joined.iter().map(|(j, m)| (*m, j.human_score)).unzip();
    Ok(Correlation { pearson: pearson(&m, &h)?, n: m.len(), dropped, degenerate: false })
}

/// Pearson correlation of per-system mean metric and human scores.
pub fn system_level(metric: &ScoreBatch, judgments: &[HumanJudgment]) -> Result<Correlation> {
    let (joined, dropped) = join(metric, judgments)?;
    let mut sums: BTreeMap<&str, (f64, f64, usize)> = BTreeMap::new();
    for (j, m) in &joined {
        let e = sums.entry(j.system_id.as_str()).or_default();
        *e = (e.0 + m, e.1 + j.human_score, e.2 + 1);
    }
    if sums.len() < 2 {
        return Err(Error::TooFewSystems(sums.len()));
    }
    let (m, h): (Vec<f64>, Vec<f64>) = sums.values().map(|&(m, h, n)| (m / n as f64, h / n as f64)).unzip();
    Ok(Correlation { pearson: pearson(&m, &h)?, n: m.len(), dropped, degenerate: m.len() == 2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Mean,
    Max,
}

/// Collapses per-reference scores to one score per instance.
pub fn multi_ref_aggregate(scores: &BTreeMap<String, Vec<f64>>, mode: Aggregation, metric_id: &str) -> Result<ScoreBatch> {
    let mut out = ScoreBatch::new(metric_id);
    for (id, list) in scores {
        if list.is_empty() {
            return Err(Error::EmptyList(id.clone()));
        }
        let v = match mode {
            Aggregation::Mean => list.iter().sum::<f64>() / list.len() as f64,
            Aggregation::Max => list.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        out.entries.insert(id.clone(), v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    pub failures: usize,
    pub successes: usize,
    /// Mean normalized edit distance between the perturbed text and the
    /// good candidate, over instances the metric got wrong.
    pub failure_mean_distance: Option<f64>,
    pub success_mean_distance: Option<f64>,
    /// failure mean minus success mean; absent when a partition is empty.
    pub gap: Option<f64>,
}

/// Splits instances by preference correctness and compares how far the good
/// candidate is from the perturbed text in each group.
pub fn edit_distance_analysis(suite: &TestSuite, para: &ScoreBatch, adv: &ScoreBatch) -> Result<HardnessReport> {
    let ids: BTreeSet<&String> = suite.instances.iter().map(|i| &i.id).collect();
    for batch in [para, adv] {
        let only_left: Vec<String> = ids.iter().filter(|id| !batch.entries.contains_key(**id)).map(|s| s.to_string()).collect();
        let only_right: Vec<String> = batch.entries.keys().filter(|k| !ids.contains(k)).cloned().collect();
        if !only_left.is_empty() || !only_right.is_empty() {
            return Err(Error::IdMismatch { only_left, only_right });
        }
    }
    let (mut fail, mut ok) = ((0usize, 0.0), (0usize, 0.0));
    for inst in &suite.instances {
        let d = levenshtein_normalized(inst.adv_source(), &inst.cand_para);
        let slot = if para.entries[&inst.id] > adv.entries[&inst.id] { &mut ok } else { &mut fail };
        slot.0 += 1;
        slot.1 += d;
    }
    let mean = |(n, s): (usize, f64)| (n > 0).then(|| s / n as f64);
    let (fm, sm) = (mean(fail), mean(ok));
    Ok(HardnessReport {
        failures: fail.0,
        successes: ok.0,
        failure_mean_distance: fm,
        success_mean_distance: sm,
        gap: fm.zip(sm).map(|(f, s)| f - s),
    })
}

/// Mean of the concatenated per-dataset accuracies and correlations.
pub fn overall_performance(accuracies: &[f64], correlations: &[f64]) -> Result<f64> {
    if accuracies.is_empty() {
        return Err(Error::EmptyInput("no adversarial accuracies"));
    }
    if correlations.is_empty() {
        return Err(Error::EmptyInput("no standard correlations"));
    }
    let all: Vec<f64> = accuracies.iter().chain(correlations).copied().collect();
    Ok(all.iter().sum::<f64>() / all.len() as f64)
}

/// Mean with a percentile interval over the given values (e.g. datasets).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileSummary {
    pub n: usize,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub coverage: f64,
}

/// Linear-interpolated percentile interval with the given coverage
/// (0.95 gives the 2.5th and 97.5th percentiles).
pub fn percentile_summary(values: &[f64], coverage: f64) -> Result<PercentileSummary> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no values to summarize"));
    }
    if !(0.0..=1.0).contains(&coverage) {
        return Err(Error::Invalid(format!("coverage {coverage} outside [0, 1]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (v.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    let tail = (1.0 - coverage) / 2.0;
    Ok(PercentileSummary {
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        lower: at(tail),
        upper: at(1.0 - tail),
        coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::{Lexicon, Phenomenon, PhenomenonSet};
    use crate::suite::{build_ref_based, ParaMode, SeedRecord};

    fn b(pairs: &[(&str, f64)]) -> ScoreBatch {
        ScoreBatch::from_entries("m", pairs.iter().map(|(k, v)| (*k, *v)))
    }

    #[test]
    fn accuracy_rules() {
        let para = b(&[("s1:negation", 0.9), ("s2:negation", 0.5), ("s3:name", 0.1), ("s4:name", 0.7)]);
        let adv = b(&[("s1:negation", 0.1), ("s2:negation", 0.4), ("s3:name", 0.2), ("s4:name", 0.3)]);
        let r = preference_accuracy(&para, &adv).unwrap();
        assert_eq!(r.accuracy(), 0.75);
        assert_eq!(r.per_phenomenon["name"].accuracy(), 0.5);
        let ties = preference_accuracy(&para, &para).unwrap();
        assert_eq!(ties.accuracy(), 0.0);
        assert_eq!(ties.overall.ties, 4);
        assert_eq!(ties.overall.accuracy_half_ties(), 0.5);
        let short = b(&[("s1:negation", 0.9)]);
        assert!(matches!(preference_accuracy(&para, &short), Err(Error::IdMismatch { .. })));
    }

    fn judg(system: &str, segment: &str, score: f64) -> HumanJudgment {
        HumanJudgment {
            segment_id: segment.into(),
            system_id: system.into(),
            human_score: score,
            dataset: None,
            criterion: None,
            level: None,
            reference_set_id: None,
        }
    }

    #[test]
    fn segment_level_join() {
        let js = vec![judg("A", "1", 0.1), judg("A", "2", 0.5), judg("B", "1", 0.9), judg("C", "9", 0.3)];
        let metric = ScoreBatch::from_entries("m", js[..3].iter().map(|j| (j.key(), j.human_score)));
        let c = segment_level(&metric, &js).unwrap();
        assert!((c.pearson - 1.0).abs() < 1e-15);
        assert_eq!((c.n, c.dropped), (3, 1));
        let one = ScoreBatch::from_entries("m", [(js[0].key(), 1.0)]);
        assert!(matches!(segment_level(&one, &js), Err(Error::TooShort { .. })));
        assert!(matches!(segment_level(&ScoreBatch::new("m"), &js), Err(Error::EmptyJoin)));
    }

    #[test]
    fn system_level_means() {
        // 3 systems x 4 segments.
        let human = [[1.0, 2.0, 3.0, 4.0], [2.0, 2.0, 2.0, 6.0], [0.0, 0.0, 1.0, 1.0]];
        let metric = [[0.1, 0.1, 0.1, 0.1], [0.5, 0.3, 0.3, 0.1], [0.0, 0.2, 0.0, 0.2]];
        let mut js = Vec::new();
        let mut m = ScoreBatch::new("m");
        for (s, sys) in ["A", "B", "C"].iter().enumerate() {
            for seg in 0..4 {
                let j = judg(sys, &seg.to_string(), human[s][seg]);
                m.entries.insert(j.key(), metric[s][seg]);
                js.push(j);
            }
        }
        let c = system_level(&m, &js).unwrap();
        let want = pearson(&[0.1, 0.3, 0.1], &[2.5, 3.0, 0.5]).unwrap();
        assert!((c.pearson - want).abs() < 1e-15);
        assert!(!c.degenerate);
        js.reverse();
        assert_eq!(system_level(&m, &js).unwrap().pearson, c.pearson);
        let two: Vec<_> = js.iter().filter(|j| j.system_id != "C").cloned().collect();
        assert!(system_level(&m, &two).unwrap().degenerate);
        let one: Vec<_> = js.iter().filter(|j| j.system_id == "A").cloned().collect();
        assert!(matches!(system_level(&m, &one), Err(Error::TooFewSystems(1))));
    }

    #[test]
    fn aggregation() {
        let mut scores = BTreeMap::new();
        scores.insert("a".to_string(), vec![0.2, 0.8]);
        scores.insert("b".to_string(), vec![0.4]);
        let mean = multi_ref_aggregate(&scores, Aggregation::Mean, "m").unwrap();
        let max = multi_ref_aggregate(&scores, Aggregation::Max, "m").unwrap();
        assert_eq!((mean.entries["a"], max.entries["a"]), (0.5, 0.8));
        assert_eq!((mean.entries["b"], max.entries["b"]), (0.4, 0.4));
        scores.insert("c".to_string(), vec![]);
        assert!(matches!(multi_ref_aggregate(&scores, Aggregation::Max, "m"), Err(Error::EmptyList(_))));
    }

    #[test]
    fn overall_and_percentiles() {
        assert!((overall_performance(&[0.8], &[0.6]).unwrap() - 0.7).abs() < 1e-15);
        let v = overall_performance(&[0.9, 0.5, 0.7], &[0.2, 0.4]).unwrap();
        assert!((v - 0.54).abs() < 1e-12);
        assert!((overall_performance(&[0.5, 0.7, 0.9], &[0.4, 0.2]).unwrap() - v).abs() < 1e-15);
        assert!(overall_performance(&[], &[0.1]).is_err());
        let s = percentile_summary(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.5).unwrap();
        assert_eq!((s.mean, s.lower, s.upper), (3.0, 2.0, 4.0));
    }

    #[test]
    fn hardness_partitions() {
        let lex = Lexicon::builtin();
        let seeds = [
            SeedRecord::new("a", "He likes dogs.").with_para("He likes dogs a lot."),
            SeedRecord::new("b", "She is tired.").with_para("She is tired."),
        ];
        let suite =
            build_ref_based("t", &seeds, &[PhenomenonSet::single(Phenomenon::Negation)], lex, 0, ParaMode::Original).unwrap();
        let para = b(&[("a:negation", 0.0), ("b:negation", 1.0)]);
        let adv = b(&[("a:negation", 0.5), ("b:negation", 0.0)]);
        let r = edit_distance_analysis(&suite, &para, &adv).unwrap();
        assert_eq!((r.failures, r.successes), (1, 1));
        assert_eq!(r.success_mean_distance, Some(0.0));
        assert!(r.gap.unwrap() > 0.0);
        let all_ok = edit_distance_analysis(&suite, &para, &b(&[("a:negation", -1.0), ("b:negation", 0.0)])).unwrap();
        assert_eq!((all_ok.failure_mean_distance, all_ok.gap), (None, None));
    }
}
