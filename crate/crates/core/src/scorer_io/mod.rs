//! The boundary to metrics: request/response files, builtin lexical
//! scorers, external scorer processes and score files.
//!
//! A request pairs `text_a` (premise, reference or source) with `text_b`
//! (hypothesis or candidate). Every scorer must report higher-is-better
//! scores.

mod process;
mod records;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::jsonl::{self, Header, SCORES_FORMAT};
use crate::nli::{DirectionalTriples, NliTriple};
use crate::suite::TestSuite;
use crate::textops::{levenshtein_normalized, rouge_l_f1, sentence_bleu};

pub use process::{
    content_hash, merge_responses, run_external_scorer, run_sharded, shard_requests, ExternalScorer, LineScorer,
    Scorer,
};
pub use records::{
    load_scores, records_from_responses, write_score_file, Candidate, LoadedScores, ScalarBatches, ScoreRecord, ScoreTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    Scalar,
    NliForward,
    NliBackward,
    NliBoth,
}

impl ScoreMode {
    pub fn is_nli(self) -> bool {
        self != ScoreMode::Scalar
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub request_id: String,
    pub text_a: String,
    pub text_b: String,
    pub mode: ScoreMode,
}

impl ScoreRequest {
    pub fn new(id: impl Into<String>, text_a: impl Into<String>, text_b: impl Into<String>, mode: ScoreMode) -> Self {
        ScoreRequest { request_id: id.into(), text_a: text_a.into(), text_b: text_b.into(), mode }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub request_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward: Option<NliTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backward: Option<NliTriple>,
    /// Scorer-specific extras, e.g. a truncation flag.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
    /// Set by scorers that could not handle this request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScoreResponse {
    pub fn scalar(id: impl Into<String>, value: f64) -> Self {
        ScoreResponse { request_id: id.into(), scalar: Some(value), forward: None, backward: None, meta: None, error: None }
    }

    pub fn triples(id: impl Into<String>, forward: Option<NliTriple>, backward: Option<NliTriple>) -> Self {
        ScoreResponse { request_id: id.into(), scalar: None, forward, backward, meta: None, error: None }
    }

    pub fn directional(&self) -> DirectionalTriples {
        DirectionalTriples { forward: self.forward, backward: self.backward }
    }

    /// Checks the response carries exactly what `mode` asks for.
    pub fn check_shape(&self, mode: ScoreMode) -> std::result::Result<(), String> {
        if let Some(e) = &self.error {
            return Err(format!("scorer reported an error: {e}"));
        }
        let has_triples = self.forward.is_some() || self.backward.is_some();
        let ok = match mode {
            ScoreMode::Scalar => self.scalar.is_some_and(f64::is_finite) && !has_triples,
            ScoreMode::NliForward => self.forward.is_some() && self.scalar.is_none(),
            ScoreMode::NliBackward => self.backward.is_some() && self.scalar.is_none(),
            ScoreMode::NliBoth => self.forward.is_some() && self.backward.is_some() && self.scalar.is_none(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("response shape does not match request mode {mode:?}"))
        }
    }
}

fn check_requests(requests: &[ScoreRequest]) -> Result<()> {
    if requests.is_empty() {
        return Err(Error::EmptyInput("no score requests"));
    }
    let mut seen = BTreeSet::new();
    for r in requests {
        if !seen.insert(r.request_id.as_str()) {
            return Err(Error::DuplicateId(r.request_id.clone()));
        }
        if r.text_a.trim().is_empty() || r.text_b.trim().is_empty() {
            return Err(Error::Invalid(format!("request `{}` has an empty text", r.request_id)));
        }
    }
    Ok(())
}

fn sorted<T: Clone>(items: &[T], key: impl Fn(&T) -> &str) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort_by(|a, b| key(a).cmp(key(b)));
    v
}

/// Writes requests sorted by id after a header line. Duplicate ids and empty
/// texts are rejected before anything is written.
pub fn write_requests(requests: &[ScoreRequest], path: &Path) -> Result<usize> {
    check_requests(requests)?;
    let header = Header::new(SCORES_FORMAT).with("kind", "requests")?;
    jsonl::write(path, &header, sorted(requests, |r| &r.request_id))
}

pub fn read_requests(path: &Path) -> Result<Vec<ScoreRequest>> {
    let (_, records) = jsonl::read::<ScoreRequest>(path, SCORES_FORMAT, true)?;
    let requests: Vec<ScoreRequest> = records.into_iter().map(|(_, r)| r).collect();
    check_requests(&requests)?;
    Ok(requests)
}

pub fn write_responses<'a>(responses: impl IntoIterator<Item = &'a ScoreResponse>, path: &Path) -> Result<usize> {
    let mut v: Vec<&ScoreResponse> = responses.into_iter().collect();
    v.sort_by(|a, b| a.request_id.cmp(&b.request_id));
    let header = Header::new(SCORES_FORMAT).with("kind", "responses")?;
    jsonl::write(path, &header, v)
}

/// Reads a response file and checks it answers exactly `expected`.
/// Triples are validated (and renormalized) while parsing.
pub fn read_responses(path: &Path, expected: &[ScoreRequest]) -> Result<BTreeMap<String, ScoreResponse>> {
    let (_, records) = jsonl::read::<ScoreResponse>(path, SCORES_FORMAT, false)?;
    let modes: BTreeMap<&str, ScoreMode> = expected.iter().map(|r| (r.request_id.as_str(), r.mode)).collect();
    let mut out = BTreeMap::new();
    let mut extra = Vec::new();
    for (line, resp) in records {
        match modes.get(resp.request_id.as_str()) {
            Some(&mode) => resp.check_shape(mode).map_err(|m| Error::parse(path, line, format!("{}: {m}", resp.request_id)))?,
            None => {
                extra.push(resp.request_id.clone());
                continue;
            }
        }
        if out.contains_key(&resp.request_id) {
            return Err(Error::parse(path, line, format!("duplicate response for `{}`", resp.request_id)));
        }
        out.insert(resp.request_id.clone(), resp);
    }
    let missing: Vec<String> = modes.keys().filter(|id| !out.contains_key(**id)).map(|s| s.to_string()).collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::CoverageGap { missing, extra });
    }
    Ok(out)
}

/// In-process lexical scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinScorer {
    SentBleu,
    RougeL,
    NegEditDistance,
}

impl BuiltinScorer {
    pub const ALL: [BuiltinScorer; 3] = [BuiltinScorer::SentBleu, BuiltinScorer::RougeL, BuiltinScorer::NegEditDistance];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinScorer::SentBleu => "sentbleu",
            BuiltinScorer::RougeL => "rougeL",
            BuiltinScorer::NegEditDistance => "neg_edit_distance",
        }
    }

    /// Score of candidate `text_b` against `text_a`.
    pub fn score(self, text_a: &str, text_b: &str) -> Result<f64> {
        match self {
            BuiltinScorer::SentBleu => sentence_bleu(text_b, text_a),
            BuiltinScorer::RougeL => rouge_l_f1(text_b, text_a),
            BuiltinScorer::NegEditDistance => Ok(-levenshtein_normalized(text_a, text_b)),
        }
    }
}

impl FromStr for BuiltinScorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuiltinScorer::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownScorer(s.to_string()))
    }
}

/// Scores scalar requests with a builtin scorer, by name.
pub fn builtin_scorer(name: &str, requests: &[ScoreRequest]) -> Result<Vec<ScoreResponse>> {
    let scorer: BuiltinScorer = name.parse()?;
    score_builtin(scorer, requests)
}

pub fn score_builtin(scorer: BuiltinScorer, requests: &[ScoreRequest]) -> Result<Vec<ScoreResponse>> {
    use rayon::prelude::*;
    requests
        .par_iter()
        .map(|r| {
            if r.mode != ScoreMode::Scalar {
                return Err(Error::Invalid(format!("builtin scorer {} only answers scalar requests", scorer.name())));
            }
            Ok(ScoreResponse::scalar(r.request_id.clone(), scorer.score(&r.text_a, &r.text_b)?))
        })
        .collect()
}

pub const PARA_SUFFIX: &str = "#para";
pub const ADV_SUFFIX: &str = "#adv";

/// Two requests per instance: (anchor, cand_para) and (anchor, cand_adv).
pub fn suite_requests(suite: &TestSuite, mode: ScoreMode) -> Vec<ScoreRequest> {
    suite
        .instances
        .iter()
        .flat_map(|i| {
            [
                ScoreRequest::new(request_id(&i.id, Some(Candidate::Para), None), &i.anchor, &i.cand_para, mode),
                ScoreRequest::new(request_id(&i.id, Some(Candidate::Adv), None), &i.anchor, &i.cand_adv, mode),
            ]
        })
        .collect()
}

/// Parts of a request id: `<item>[#para|#adv][#ref=<reference>]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestKey<'a> {
    /// Instance id or judgment key.
    pub item: &'a str,
    pub candidate: Option<Candidate>,
    pub reference: Option<&'a str>,
}

pub const REF_MARKER: &str = "#ref=";

pub fn request_id(item: &str, candidate: Option<Candidate>, reference: Option<&str>) -> String {
    let mut id = item.to_string();
    match candidate {
        Some(Candidate::Para) => id.push_str(PARA_SUFFIX),
        Some(Candidate::Adv) => id.push_str(ADV_SUFFIX),
        None => {}
    }
    if let Some(r) = reference {
        id.push_str(REF_MARKER);
        id.push_str(r);
    }
    id
}

pub fn split_request_id(id: &str) -> RequestKey<'_> {
    let (rest, reference) = match id.rsplit_once(REF_MARKER) {
        Some((rest, r)) => (rest, Some(r)),
        None => (id, None),
    };
    let (item, candidate) = if let Some(inst) = rest.strip_suffix(PARA_SUFFIX) {
        (inst, Some(Candidate::Para))
    } else if let Some(inst) = rest.strip_suffix(ADV_SUFFIX) {
        (inst, Some(Candidate::Adv))
    } else {
        (rest, None)
    };
    RequestKey { item, candidate, reference }
}
