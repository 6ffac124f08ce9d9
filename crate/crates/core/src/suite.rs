//! Preference test suites: (anchor, good candidate, adversarial candidate)
//! triples built from seed corpora.
//!
//! Reference-based suites perturb the reference and score both candidates
//! against it. Reference-free suites score against the source, use the
//! reference as the good candidate and perturb a machine translation (or
//! the top-ranked summary reference) of the source.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::jsonl::{self, Header, SUITE_FORMAT};
use crate::perturb::{compose, perturb, Lexicon, Phenomenon, PhenomenonSet, PerturbationResult};
use crate::textops::{
    levenshtein_normalized, lcs_len, number_to_words, rouge_tokens, tokenize_with, TokenKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(rename = "ref")]
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub para: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot_r: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang_pair: Option<(String, String)>,
}

impl SeedRecord {
    pub fn new(id: impl Into<String>, reference: impl Into<String>) -> Self {
        SeedRecord {
            id: id.into(),
            src: None,
            reference: reference.into(),
            para: None,
            pivot_r: None,
            lang_pair: None,
        }
    }

    pub fn with_para(mut self, para: impl Into<String>) -> Self {
        self.para = Some(para.into());
        self
    }

    pub fn with_source(mut self, src: impl Into<String>, pivot_r: impl Into<String>) -> Self {
        self.src = Some(src.into());
        self.pivot_r = Some(pivot_r.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    RefBased,
    RefFree,
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "ref-based" => Ok(Setting::RefBased),
            "ref-free" => Ok(Setting::RefFree),
            other => Err(Error::Invalid(format!("unknown setting `{other}` (valid: ref-based, ref-free)"))),
        }
    }
}

/// Where the good candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParaSource {
    Original,
    Backtranslation,
    NumberWords,
    /// Reference-free suites: the human reference.
    Reference,
}

/// How reference-based suites obtain the good candidate.
///
/// `Original` and `Backtranslation` take the seed's `para` field and differ
/// only in the recorded provenance. Number-error instances always use the
/// reference with its numbers spelled out. `NumberWords` does that for every
/// phenomenon and needs no `para`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParaMode {
    Original,
    Backtranslation,
    NumberWords,
}

impl std::str::FromStr for ParaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "original" => Ok(ParaMode::Original),
            "backtranslation" => Ok(ParaMode::Backtranslation),
            "number-words" => Ok(ParaMode::NumberWords),
            other => Err(Error::Invalid(format!(
                "unknown paraphrase mode `{other}` (valid: original, backtranslation, number-words)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarialInstance {
    pub id: String,
    pub phenomenon: PhenomenonSet,
    pub setting: Setting,
    pub anchor: String,
    pub cand_para: String,
    pub cand_adv: String,
    pub seed_id: String,
    pub para_source: ParaSource,
    /// The perturbed text (`perturbation.original`) and the edits that turn
    /// it into `cand_adv`.
    pub perturbation: PerturbationResult,
}

impl AdversarialInstance {
    /// The text `cand_adv` was derived from: the reference, or the pivot
    /// translation in reference-free suites.
    pub fn adv_source(&self) -> &str {
        &self.perturbation.original
    }

    pub fn check(&self) -> Result<()> {
        if self.cand_adv == self.cand_para {
            return Err(Error::Invalid(format!("{}: adversarial candidate equals the paraphrase", self.id)));
        }
        if self.cand_adv == self.anchor {
            return Err(Error::Invalid(format!("{}: adversarial candidate equals the anchor", self.id)));
        }
        if self.perturbation.perturbed != self.cand_adv || !self.perturbation.replays() {
            return Err(Error::Invalid(format!("{}: recorded edits do not reproduce cand_adv", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhenomenonCount {
    pub generated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub seed: u64,
    pub setting: Setting,
    pub phenomena: Vec<PhenomenonSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub para_mode: Option<ParaMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSuite {
    pub name: String,
    pub config: GenerationConfig,
    /// Keyed by phenomenon label.
    pub counts: BTreeMap<String, PhenomenonCount>,
    pub instances: Vec<AdversarialInstance>,
}

impl TestSuite {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Checks instance invariants, id uniqueness and count consistency.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        let mut generated: BTreeMap<String, usize> = BTreeMap::new();
        for inst in &self.instances {
            inst.check()?;
            if !ids.insert(inst.id.as_str()) {
                return Err(Error::DuplicateId(inst.id.clone()));
            }
            *generated.entry(inst.phenomenon.label()).or_default() += 1;
        }
        for (label, count) in &self.counts {
            if generated.get(label).copied().unwrap_or(0) != count.generated {
                return Err(Error::Invalid(format!("count for `{label}` disagrees with the instance list")));
            }
        }
        if let Some(label) = generated.keys().find(|l| !self.counts.contains_key(*l)) {
            return Err(Error::Invalid(format!("instances of `{label}` have no count entry")));
        }
        Ok(())
    }
}

/// Instance id shared by suite, score and report files.
pub fn instance_id(seed_id: &str, phenomenon: &PhenomenonSet) -> String {
    format!("{seed_id}:{}", phenomenon.label())
}

/// Per-(seed, phenomenon) RNG seed, independent of build order.
pub fn derive_seed(global: u64, seed_id: &str, phenomenon: &PhenomenonSet) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update(seed_id.as_bytes());
    h.update([0]);
    h.update(phenomenon.label().as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Replaces every number token with its English words; numbers that cannot
/// be verbalized are kept.
pub fn verbalize_numbers(text: &str, lex: &Lexicon) -> Result<String> {
    let s = tokenize_with(text, None, lex)?;
    let mut out = String::with_capacity(text.len() + 16);
    let mut last = 0;
    for tok in s.tokens.iter().filter(|t| t.kind == TokenKind::Number) {
        if let Ok(words) = number_to_words(&tok.surface) {
            out.push_str(&text[last..tok.span.start]);
            out.push_str(&words);
            last = tok.span.end;
        }
    }
    out.push_str(&text[last..]);
    Ok(out)
}

fn check_unique_ids(seeds: &[SeedRecord]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in seeds {
        if s.id.trim().is_empty() {
            return Err(Error::Invalid("seed with empty id".into()));
        }
        if s.reference.trim().is_empty() {
            return Err(Error::MissingField { seed_id: s.id.clone(), field: "ref" });
        }
        if !seen.insert(s.id.as_str()) {
            return Err(Error::DuplicateId(s.id.clone()));
        }
    }
    Ok(())
}

fn apply(text: &str, phenomenon: &PhenomenonSet, lex: &Lexicon, seed: u64) -> Result<PerturbationResult> {
    let s = tokenize_with(text, None, lex)?;
    match phenomenon.0.as_slice() {
        [single] => perturb(&s, *single, lex, seed),
        kinds => compose(&s, kinds, lex, seed),
    }
}

type SeedOutcome = Vec<(usize, Option<AdversarialInstance>)>;

fn assemble(name: &str, config: GenerationConfig, per_seed: Vec<SeedOutcome>) -> Result<TestSuite> {
    let mut counts: BTreeMap<String, PhenomenonCount> =
        config.phenomena.iter().map(|p| (p.label(), PhenomenonCount::default())).collect();
    let mut instances = Vec::new();
    for outcomes in per_seed {
        for (k, inst) in outcomes {
            let count = counts.get_mut(&config.phenomena[k].label()).expect("configured");
            match inst {
                Some(inst) => {
                    count.generated += 1;
                    instances.push(inst);
                }
                None => count.skipped += 1,
            }
        }
    }
    let suite = TestSuite { name: name.to_string(), config, counts, instances };
    suite.validate()?;
    Ok(suite)
}

fn dedup_phenomena(phenomena: &[PhenomenonSet]) -> Result<Vec<PhenomenonSet>> {
    if phenomena.is_empty() {
        return Err(Error::EmptyInput("no phenomena requested"));
    }
    let mut seen = HashSet::new();
    Ok(phenomena.iter().filter(|p| seen.insert(p.label())).cloned().collect())
}

/// Perturbs the reference; the good candidate follows `para_mode`.
/// Inapplicable (seed, phenomenon) pairs are skipped and tallied.
pub fn build_ref_based(
    name: &str,
    seeds: &[SeedRecord],
    phenomena: &[PhenomenonSet],
    lex: &Lexicon,
    seed: u64,
    para_mode: ParaMode,
) -> Result<TestSuite> {
    check_unique_ids(seeds)?;
    let phenomena = dedup_phenomena(phenomena)?;
    let needs_para = phenomena.iter().any(|p| !p.contains(Phenomenon::NumberError));
    if para_mode != ParaMode::NumberWords && needs_para {
        if let Some(s) = seeds.iter().find(|s| s.para.as_deref().map_or(true, |p| p.trim().is_empty())) {
            return Err(Error::MissingParaphrase { seed_id: s.id.clone() });
        }
    }
    let per_seed = seeds
        .par_iter()
        .map(|rec| -> Result<SeedOutcome> {
            let mut verbalized: Option<String> = None;
            let mut out = Vec::with_capacity(phenomena.len());
            for (k, phen) in phenomena.iter().enumerate() {
                let (cand_para, para_source) = if para_mode == ParaMode::NumberWords || phen.contains(Phenomenon::NumberError) {
                    if verbalized.is_none() {
                        verbalized = Some(verbalize_numbers(&rec.reference, lex)?);
                    }
                    (verbalized.clone().expect("set"), ParaSource::NumberWords)
                } else {
                    let source = match para_mode {
                        ParaMode::Original => ParaSource::Original,
                        _ => ParaSource::Backtranslation,
                    };
                    (rec.para.clone().expect("checked"), source)
                };
                let rng_seed = derive_seed(seed, &rec.id, phen);
                let inst = match apply(&rec.reference, phen, lex, rng_seed) {
                    Ok(p) => Some(AdversarialInstance {
                        id: instance_id(&rec.id, phen),
                        phenomenon: phen.clone(),
                        setting: Setting::RefBased,
                        anchor: rec.reference.clone(),
                        cand_para,
                        cand_adv: p.perturbed.clone(),
                        seed_id: rec.id.clone(),
                        para_source,
                        perturbation: p,
                    }),
                    Err(Error::NotApplicable(_)) => None,
                    Err(e) => return Err(e),
                };
                // A perturbation that happens to reproduce the paraphrase
                // carries no preference signal.
                let inst = inst.filter(|i| i.cand_adv != i.cand_para && i.cand_adv != i.anchor);
                out.push((k, inst));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let config = GenerationConfig { seed, setting: Setting::RefBased, phenomena, para_mode: Some(para_mode) };
    assemble(name, config, per_seed)
}

/// Anchor is the source, the good candidate is the reference and the
/// adversarial candidate perturbs `pivot_r`. The source is never perturbed.
pub fn build_ref_free(
    name: &str,
    seeds: &[SeedRecord],
    phenomena: &[PhenomenonSet],
    lex: &Lexicon,
    seed: u64,
) -> Result<TestSuite> {
    check_unique_ids(seeds)?;
    let phenomena = dedup_phenomena(phenomena)?;
    for s in seeds {
        for (field, value) in [("src", &s.src), ("pivot_r", &s.pivot_r)] {
            if value.as_deref().map_or(true, |v| v.trim().is_empty()) {
                return Err(Error::MissingField { seed_id: s.id.clone(), field });
            }
        }
    }
    let per_seed = seeds
        .par_iter()
        .map(|rec| -> Result<SeedOutcome> {
            let src = rec.src.as_deref().expect("checked");
            let pivot = rec.pivot_r.as_deref().expect("checked");
            let mut out = Vec::with_capacity(phenomena.len());
            for (k, phen) in phenomena.iter().enumerate() {
                let rng_seed = derive_seed(seed, &rec.id, phen);
                let inst = match apply(pivot, phen, lex, rng_seed) {
                    Ok(p) => Some(AdversarialInstance {
                        id: instance_id(&rec.id, phen),
                        phenomenon: phen.clone(),
                        setting: Setting::RefFree,
                        anchor: src.to_string(),
                        cand_para: rec.reference.clone(),
                        cand_adv: p.perturbed.clone(),
                        seed_id: rec.id.clone(),
                        para_source: ParaSource::Reference,
                        perturbation: p,
                    }),
                    Err(Error::NotApplicable(_)) => None,
                    Err(e) => return Err(e),
                };
                let inst = inst.filter(|i| i.cand_adv != i.cand_para && i.cand_adv != i.anchor);
                out.push((k, inst));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let config = GenerationConfig { seed, setting: Setting::RefFree, phenomena, para_mode: None };
    assemble(name, config, per_seed)
}

/// Picks the reference with the highest mean ROUGE-L F1 against the other
/// ten (ties to the lowest index). Returns its index, the pivot and the
/// remaining ten in their original order.
pub fn select_summeval_reference(refs: &[String]) -> Result<(usize, String, Vec<String>)> {
    if refs.len() != 11 {
        return Err(Error::WrongArity { expected: 11, got: refs.len() });
    }
    let toks = refs.iter().map(|r| rouge_tokens(r)).collect::<Result<Vec<_>>>()?;
    let f1 = |a: &[String], b: &[String]| {
        if a.is_empty() || b.is_empty() {
            0.0
        } else {
            crate::textops::lcs_f1(lcs_len(a, b), a.len(), b.len())
        }
    };
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..refs.len() {
        let mean = (0..refs.len()).filter(|&j| j != i).map(|j| f1(&toks[i], &toks[j])).sum::<f64>() / 10.0;
        if mean > best.1 {
            best = (i, mean);
        }
    }
    let remaining = refs.iter().enumerate().filter(|(j, _)| *j != best.0).map(|(_, r)| r.clone()).collect();
    Ok((best.0, refs[best.0].clone(), remaining))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub count: usize,
    /// Mean normalized edit distance from the perturbation source to the
    /// good candidate.
    pub mean_para_distance: Option<f64>,
    pub mean_adv_distance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteStats {
    pub overall: DistanceStats,
    pub per_phenomenon: BTreeMap<String, DistanceStats>,
    pub skipped: BTreeMap<String, usize>,
}

/// Per-phenomenon counts and mean normalized edit distances. Distances are
/// measured from the text that was perturbed (the reference, or the pivot
/// translation for reference-free suites).
pub fn suite_stats(suite: &TestSuite) -> SuiteStats {
    let mut acc: BTreeMap<String, (usize, f64, f64)> = BTreeMap::new();
    let mut total = (0usize, 0.0, 0.0);
    for inst in &suite.instances {
        let base = inst.adv_source();
        let dp = levenshtein_normalized(base, &inst.cand_para);
        let da = levenshtein_normalized(base, &inst.cand_adv);
        let e = acc.entry(inst.phenomenon.label()).or_default();
        *e = (e.0 + 1, e.1 + dp, e.2 + da);
        total = (total.0 + 1, total.1 + dp, total.2 + da);
    }
    let stats = |(n, p, a): (usize, f64, f64)| DistanceStats {
        count: n,
        mean_para_distance: (n > 0).then(|| p / n as f64),
        mean_adv_distance: (n > 0).then(|| a / n as f64),
    };
    let mut per_phenomenon: BTreeMap<String, DistanceStats> = acc.into_iter().map(|(k, v)| (k, stats(v))).collect();
    for label in suite.counts.keys() {
        per_phenomenon.entry(label.clone()).or_default();
    }
    SuiteStats {
        overall: stats(total),
        per_phenomenon,
        skipped: suite.counts.iter().map(|(k, c)| (k.clone(), c.skipped)).collect(),
    }
}

#[derive(Serialize, Deserialize)]
struct SuiteMeta {
    name: String,
    config: GenerationConfig,
    counts: BTreeMap<String, PhenomenonCount>,
}

/// Header line carries the name, configuration and counts; one instance per
/// following line.
pub fn write_suite(path: &Path, suite: &TestSuite) -> Result<usize> {
    let header = Header::new(SUITE_FORMAT).with(
        "suite",
        SuiteMeta { name: suite.name.clone(), config: suite.config.clone(), counts: suite.counts.clone() },
    )?;
    jsonl::write(path, &header, &suite.instances)
}

pub fn read_suite(path: &Path) -> Result<TestSuite> {
    let (header, records) = jsonl::read::<AdversarialInstance>(path, SUITE_FORMAT, true)?;
    let meta = header
        .and_then(|h| h.extra.get("suite").cloned())
        .ok_or_else(|| Error::parse(path, 1, "suite header lacks the `suite` metadata object"))?;
    let meta: SuiteMeta = serde_json::from_value(meta).map_err(|e| Error::parse(path, 1, e))?;
    let suite = TestSuite {
        name: meta.name,
        config: meta.config,
        counts: meta.counts,
        instances: records.into_iter().map(|(_, r)| r).collect(),
    };
    suite.validate()?;
    Ok(suite)
}

/// Seed files may start with a suite-format header; it is optional.
pub fn read_seeds(path: &Path) -> Result<Vec<SeedRecord>> {
    let (_, records) = jsonl::read::<SeedRecord>(path, SUITE_FORMAT, false)?;
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

pub fn write_seeds(path: &Path, seeds: &[SeedRecord]) -> Result<usize> {
    jsonl::write(path, &Header::new(SUITE_FORMAT), seeds)
}
