//! Min-max normalization and weighted combination of two metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    MinMax { min: f64, max: f64 },
    /// Union of batches that were normalized separately (one range per
    /// dataset).
    Merged { ranges: BTreeMap<String, (f64, f64)> },
}

impl Normalization {
    pub fn is_normalized(&self) -> bool {
        !matches!(self, Normalization::Raw)
    }
}

/// Scores of one metric, keyed by instance id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBatch {
    pub metric_id: String,
    pub entries: BTreeMap<String, f64>,
    pub normalization: Normalization,
}

impl ScoreBatch {
    pub fn new(metric_id: impl Into<String>) -> Self {
        ScoreBatch { metric_id: metric_id.into(), entries: BTreeMap::new(), normalization: Normalization::Raw }
    }

    pub fn from_entries<K: Into<String>>(metric_id: impl Into<String>, entries: impl IntoIterator<Item = (K, f64)>) -> Self {
        let mut b = ScoreBatch::new(metric_id);
        b.entries = entries.into_iter().map(|(k, v)| (k.into(), v)).collect();
        b
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.entries.get(id).copied()
    }

    fn check_finite(&self) -> Result<()> {
        match self.entries.iter().find(|(_, v)| !v.is_finite()) {
            Some((id, v)) => Err(Error::Invalid(format!("{}: score for `{id}` is {v}", self.metric_id))),
            None => Ok(()),
        }
    }

    /// Entries whose id satisfies `keep`, with the same normalization state.
    pub fn filter(&self, keep: impl Fn(&str) -> bool) -> ScoreBatch {
        ScoreBatch {
            metric_id: self.metric_id.clone(),
            entries: self.entries.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), *v)).collect(),
            normalization: self.normalization.clone(),
        }
    }

    /// Unions batches of the same metric keyed by `name`. Ids must not
    /// collide. The result is normalized when every part is.
    pub fn merge(parts: &[(String, ScoreBatch)]) -> Result<ScoreBatch> {
        let first = parts.first().ok_or(Error::EmptyBatch)?;
        let mut out = ScoreBatch::new(first.1.metric_id.clone());
        let mut ranges = BTreeMap::new();
        let mut all_normalized = true;
        for (name, part) in parts {
            match &part.normalization {
                Normalization::Raw => all_normalized = false,
                Normalization::MinMax { min, max } => {
                    ranges.insert(name.clone(), (*min, *max));
                }
                Normalization::Merged { ranges: r } => {
                    ranges.extend(r.iter().map(|(k, v)| (format!("{name}/{k}"), *v)));
                }
            }
            for (id, v) in &part.entries {
                if out.entries.insert(id.clone(), *v).is_some() {
                    return Err(Error::DuplicateId(id.clone()));
                }
            }
        }
        if all_normalized {
            out.normalization = Normalization::Merged { ranges };
        }
        Ok(out)
    }
}

/// `x -> (x - min) / (max - min)` over the batch; a constant batch maps to
/// 0.5. The range is stored for reuse on held-out data.
pub fn min_max_normalize(batch: &ScoreBatch) -> Result<ScoreBatch> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    batch.check_finite()?;
    let min = batch.entries.values().copied().fold(f64::INFINITY, f64::min);
    let max = batch.entries.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let entries = batch
        .entries
        .iter()
        .map(|(k, &v)| {
            let x = if span > 0.0 { ((v - min) / span).clamp(0.0, 1.0) } else { 0.5 };
            (k.clone(), x)
        })
        .collect();
    Ok(ScoreBatch {
        metric_id: batch.metric_id.clone(),
        entries,
        normalization: Normalization::MinMax { min, max },
    })
}

/// Applies a previously observed range to new data, clamping to [0, 1].
pub fn apply_stored_minmax(batch: &ScoreBatch, min: f64, max: f64) -> Result<ScoreBatch> {
    if !(max > min) || !min.is_finite() || !max.is_finite() {
        return Err(Error::DegenerateRange { min, max });
    }
    batch.check_finite()?;
    let span = max - min;
    Ok(ScoreBatch {
        metric_id: batch.metric_id.clone(),
        entries: batch.entries.iter().map(|(k, &v)| (k.clone(), ((v - min) / span).clamp(0.0, 1.0))).collect(),
        normalization: Normalization::MinMax { min, max },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedBatch {
    pub nli_metric_id: String,
    pub base_metric_id: String,
    pub w_nli: f64,
    pub entries: BTreeMap<String, f64>,
    /// Ids present in only one of the inputs.
    pub dropped: Vec<String>,
}

impl CombinedBatch {
    pub fn as_batch(&self) -> ScoreBatch {
        ScoreBatch {
            metric_id: format!("{}*{}+{}*{}", self.w_nli, self.nli_metric_id, 1.0 - self.w_nli, self.base_metric_id),
            entries: self.entries.clone(),
            normalization: Normalization::Merged { ranges: BTreeMap::new() },
        }
    }
}

fn check_weight(w: f64) -> Result<()> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(Error::InvalidWeight(w))
    }
}

/// `C = w * N + (1 - w) * M` over the ids both batches share.
pub fn combine(n: &ScoreBatch, m: &ScoreBatch, w_nli: f64) -> Result<CombinedBatch> {
    check_weight(w_nli)?;
    for b in [n, m] {
        if !b.normalization.is_normalized() {
            return Err(Error::NotNormalized(b.metric_id.clone()));
        }
        b.check_finite()?;
    }
    let mut entries = BTreeMap::new();
    let mut dropped = Vec::new();
    for (id, &nv) in &n.entries {
        match m.entries.get(id) {
            Some(&mv) => {
                entries.insert(id.clone(), (w_nli * nv + (1.0 - w_nli) * mv).clamp(0.0, 1.0));
            }
            None => dropped.push(id.clone()),
        }
    }
    dropped.extend(m.entries.keys().filter(|id| !n.entries.contains_key(*id)).cloned());
    dropped.sort();
    if entries.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(CombinedBatch {
        nli_metric_id: n.metric_id.clone(),
        base_metric_id: m.metric_id.clone(),
        w_nli,
        entries,
        dropped,
    })
}

/// 0.0, 0.1, ..., 1.0.
pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub w_nli: f64,
    pub accuracy: f64,
    pub correlation: f64,
}

/// Evaluates the combination at every weight. The evaluator maps a
/// combined batch to (adversarial accuracy, standard correlation).
pub fn sweep<F>(n: &ScoreBatch, m: &ScoreBatch, weights: &[f64], mut evaluator: F) -> Result<Vec<SweepPoint>>
where
    F: FnMut(&CombinedBatch) -> Result<(f64, f64)>,
{
    for &w in weights {
        check_weight(w)?;
    }
    weights
        .iter()
        .map(|&w| {
            let c = combine(n, m, w)?;
            let (accuracy, correlation) = evaluator(&c)?;
            Ok(SweepPoint { w_nli: w, accuracy, correlation })
        })
        .collect()
}
