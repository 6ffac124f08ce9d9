//! Score files: one record per scored (item, candidate, reference).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{split_request_id, ScoreResponse};
use crate::combine::ScoreBatch;
use crate::error::{Error, Result};
use crate::evalstats::{multi_ref_aggregate, Aggregation};
use crate::jsonl::{self, Header, SCORES_FORMAT};
use crate::nli::{DirectionalTriples, InstanceTriples, NliTriple, PoolingStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    Para,
    Adv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    /// Suite instance id, or `system:segment` for judgment datasets.
    pub instance_id: String,
    pub metric_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Candidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward: Option<NliTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backward: Option<NliTriple>,
}

/// Turns validated responses into score records, splitting request ids.
pub fn records_from_responses(metric_id: &str, responses: &BTreeMap<String, ScoreResponse>) -> Vec<ScoreRecord> {
    responses
        .values()
        .map(|r| {
            let key = split_request_id(&r.request_id);
            ScoreRecord {
                instance_id: key.item.to_string(),
                metric_id: metric_id.to_string(),
                candidate: key.candidate,
                reference: key.reference.map(str::to_string),
                score: r.scalar,
                forward: r.forward,
                backward: r.backward,
            }
        })
        .collect()
}

pub fn write_score_file(path: &Path, records: &[ScoreRecord]) -> Result<usize> {
    let metric = records.first().map(|r| r.metric_id.clone()).ok_or(Error::EmptyInput("no score records"))?;
    if let Some(r) = records.iter().find(|r| r.metric_id != metric) {
        return Err(Error::Invalid(format!("score file mixes metrics `{metric}` and `{}`", r.metric_id)));
    }
    let header = Header::new(SCORES_FORMAT).with("kind", "scores")?.with("metric_id", &metric)?;
    jsonl::write(path, &header, records)
}

/// Scores of one metric, keyed by item, one value per reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable<T> {
    pub metric_id: String,
    pub para: BTreeMap<String, Vec<T>>,
    pub adv: BTreeMap<String, Vec<T>>,
    /// Judgment-dataset scores keyed by `system:segment`.
    pub segments: BTreeMap<String, Vec<T>>,
}

impl<T> ScoreTable<T> {
    fn new(metric_id: String) -> Self {
        ScoreTable { metric_id, para: BTreeMap::new(), adv: BTreeMap::new(), segments: BTreeMap::new() }
    }

    fn slot(&mut self, c: Option<Candidate>) -> &mut BTreeMap<String, Vec<T>> {
        match c {
            Some(Candidate::Para) => &mut self.para,
            Some(Candidate::Adv) => &mut self.adv,
            None => &mut self.segments,
        }
    }

    fn map<U>(&self, metric_id: String, mut f: impl FnMut(&T) -> Result<U>) -> Result<ScoreTable<U>> {
        let mut conv = |m: &BTreeMap<String, Vec<T>>| -> Result<BTreeMap<String, Vec<U>>> {
            m.iter().map(|(k, v)| Ok((k.clone(), v.iter().map(&mut f).collect::<Result<Vec<U>>>()?))).collect()
        };
        Ok(ScoreTable { metric_id, para: conv(&self.para)?, adv: conv(&self.adv)?, segments: conv(&self.segments)? })
    }
}

/// Aggregated batches of a scalar table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBatches {
    pub para: ScoreBatch,
    pub adv: ScoreBatch,
    pub segments: ScoreBatch,
}

impl ScoreTable<f64> {
    pub fn batches(&self, agg: Aggregation) -> Result<ScalarBatches> {
        Ok(ScalarBatches {
            para: multi_ref_aggregate(&self.para, agg, &self.metric_id)?,
            adv: multi_ref_aggregate(&self.adv, agg, &self.metric_id)?,
            segments: multi_ref_aggregate(&self.segments, agg, &self.metric_id)?,
        })
    }
}

impl ScoreTable<DirectionalTriples> {
    /// True when every pair carries a backward triple.
    pub fn has_backward(&self) -> bool {
        [&self.para, &self.adv, &self.segments]
            .iter()
            .flat_map(|m| m.values().flatten())
            .all(|t| t.backward.is_some())
    }

    /// Strategies applicable to this table.
    pub fn strategies(&self) -> Vec<PoolingStrategy> {
        if self.has_backward() {
            PoolingStrategy::all()
        } else {
            PoolingStrategy::forward_only()
        }
    }

    pub fn pooled(&self, strategy: PoolingStrategy) -> Result<ScoreTable<f64>> {
        self.map(format!("{}[{strategy}]", self.metric_id), |t| t.pool(strategy))
    }

    /// Single-reference instance triples, for pooling whole suites.
    pub fn instance_triples(&self) -> Result<BTreeMap<String, InstanceTriples>> {
        let single = |id: &str, v: &Vec<DirectionalTriples>| match v.as_slice() {
            [t] => Ok(*t),
            _ => Err(Error::Invalid(format!("`{id}` has {} references; pool the table instead", v.len()))),
        };
        let mut out = BTreeMap::new();
        for (id, p) in &self.para {
            let a = self.adv.get(id).ok_or_else(|| Error::CoverageGap { missing: vec![format!("{id}#adv")], extra: Vec::new() })?;
            out.insert(id.clone(), InstanceTriples { para: single(id, p)?, adv: single(id, a)? });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedScores {
    Scalar(ScoreTable<f64>),
    Nli(ScoreTable<DirectionalTriples>),
}

impl LoadedScores {
    pub fn metric_id(&self) -> &str {
        match self {
            LoadedScores::Scalar(t) => &t.metric_id,
            LoadedScores::Nli(t) => &t.metric_id,
        }
    }

    pub fn is_nli(&self) -> bool {
        matches!(self, LoadedScores::Nli(_))
    }
}

/// Reads a score file written by [`write_score_file`]. All records must share
/// one metric and be all-scalar or all-triple.
pub fn load_scores(path: &Path) -> Result<LoadedScores> {
    let (_, records) = jsonl::read::<ScoreRecord>(path, SCORES_FORMAT, true)?;
    let Some((_, first)) = records.first() else {
        return Err(Error::EmptyInput("score file has no records"));
    };
    let metric = first.metric_id.clone();
    let nli = first.score.is_none();
    let mut scalar = ScoreTable::new(metric.clone());
    let mut triples = ScoreTable::new(metric.clone());
    let mut seen = std::collections::BTreeSet::new();
    for (line, r) in records {
        let fail = |m: String| Error::parse(path, line, m);
        if r.metric_id != metric {
            return Err(fail(format!("metric `{}` differs from `{metric}`", r.metric_id)));
        }
        if !seen.insert((r.instance_id.clone(), r.candidate, r.reference.clone())) {
            return Err(fail(format!("duplicate score for `{}`", r.instance_id)));
        }
        let has_triples = r.forward.is_some() || r.backward.is_some();
        match (nli, r.score) {
            (false, Some(s)) if !has_triples && s.is_finite() => scalar.slot(r.candidate).entry(r.instance_id).or_default().push(s),
            (true, None) if has_triples => triples
                .slot(r.candidate)
                .entry(r.instance_id)
                .or_default()
                .push(DirectionalTriples { forward: r.forward, backward: r.backward }),
            _ => return Err(fail("record must carry a finite score or triples, consistently across the file".into())),
        }
    }
    Ok(if nli { LoadedScores::Nli(triples) } else { LoadedScores::Scalar(scalar) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nli::{Direction, Formula};

    fn t(e: f64, c: f64) -> NliTriple {
        NliTriple::new(e, c, 1.0 - e - c).unwrap()
    }

    #[test]
    fn scalar_round_trip_with_references() {
        let mut resp = BTreeMap::new();
        for (id, v) in [("i:negation#para", 0.9), ("i:negation#adv", 0.2), ("s:1#ref=a", 0.4), ("s:1#ref=b", 0.8)] {
            resp.insert(id.to_string(), ScoreResponse::scalar(id, v));
        }
        let records = records_from_responses("bleu", &resp);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        write_score_file(&p, &records).unwrap();
        let LoadedScores::Scalar(table) = load_scores(&p).unwrap() else { panic!() };
        let b = table.batches(Aggregation::Max).unwrap();
        assert_eq!(b.para.get("i:negation"), Some(0.9));
        assert_eq!(b.adv.get("i:negation"), Some(0.2));
        assert_eq!(b.segments.get("s:1"), Some(0.8));
        let b = table.batches(Aggregation::Mean).unwrap();
        assert!((b.segments.get("s:1").unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn triples_pool_and_reject_mixing() {
        let mut resp = BTreeMap::new();
        resp.insert("x#para".into(), ScoreResponse::triples("x#para", Some(t(0.9, 0.05)), Some(t(0.7, 0.1))));
        resp.insert("x#adv".into(), ScoreResponse::triples("x#adv", Some(t(0.1, 0.8)), Some(t(0.2, 0.7))));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.jsonl");
        write_score_file(&p, &records_from_responses("nli", &resp)).unwrap();
        let LoadedScores::Nli(table) = load_scores(&p).unwrap() else { panic!() };
        assert_eq!(table.strategies().len(), 15);
        let s = PoolingStrategy::new(Direction::Bi, Formula::E);
        let pooled = table.pooled(s).unwrap().batches(Aggregation::Mean).unwrap();
        assert!((pooled.para.get("x").unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(pooled.para.metric_id, "nli[e/bi]");
        assert_eq!(table.instance_triples().unwrap().len(), 1);

        let mut records = records_from_responses("nli", &resp);
        records[0].forward = None;
        records[0].backward = None;
        records[0].score = Some(1.0);
        write_score_file(&p, &records).unwrap();
        assert!(matches!(load_scores(&p), Err(Error::Parse { .. })));
    }
}
