//! Input files shared by the score, evaluate and combine commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use menli_core::evalstats::HumanJudgment;
use menli_core::jsonl;
use menli_core::scorer_io::{load_scores, LoadedScores};
use menli_core::suite::{read_suite, TestSuite};

use crate::config::existing;

pub const JUDGMENTS_FORMAT: &str = "menli-judgments";

/// One system output of a judgment dataset, ready to score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment_id: String,
    pub system_id: String,
    /// Reference or source.
    pub text_a: String,
    /// System output.
    pub text_b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_id: Option<String>,
}

pub fn read_segments(path: &Path) -> Result<Vec<SegmentRecord>> {
    let (_, records) = jsonl::read::<SegmentRecord>(path, JUDGMENTS_FORMAT, false)?;
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

pub fn read_judgments(path: &Path) -> Result<Vec<HumanJudgment>> {
    let (_, records) = jsonl::read::<HumanJudgment>(path, JUDGMENTS_FORMAT, false)?;
    let judgments: Vec<HumanJudgment> = records.into_iter().map(|(_, r)| r).collect();
    if let Some(j) = judgments.iter().find(|j| !j.human_score.is_finite()) {
        bail!("judgment {} has a non-finite score", j.key());
    }
    Ok(judgments)
}

/// Splits `NAME=PATH`.
pub fn named_path(spec: &str) -> Result<(String, PathBuf)> {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => bail!("expected NAME=PATH, got `{spec}`"),
    }
}

/// Adversarial suites and judgment sets, keyed by dataset name.
#[derive(Default)]
pub struct Datasets {
    pub adversarial: BTreeMap<String, TestSuite>,
    pub standard: BTreeMap<String, Vec<HumanJudgment>>,
}

impl Datasets {
    pub fn load(suites: &[String], judgments: &[String]) -> Result<Self> {
        let mut out = Datasets::default();
        for spec in suites {
            let (name, path) = named_path(spec)?;
            let suite = read_suite(&existing(path.clone())?).with_context(|| format!("reading suite {}", path.display()))?;
            if out.adversarial.insert(name.clone(), suite).is_some() {
                bail!(menli_core::Error::DuplicateId(name));
            }
        }
        for spec in judgments {
            let (name, path) = named_path(spec)?;
            if out.adversarial.contains_key(&name) || out.standard.contains_key(&name) {
                bail!(menli_core::Error::DuplicateId(name));
            }
            out.standard.insert(name, read_judgments(&existing(path)?)?);
        }
        if out.adversarial.is_empty() && out.standard.is_empty() {
            bail!("no datasets given (use --dataset NAME=SUITE and/or --judgments NAME=FILE)");
        }
        Ok(out)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.adversarial.contains_key(name) || self.standard.contains_key(name)
    }
}

/// Loads `NAME=FILE` score files, checking each names a known dataset.
pub fn load_score_files(specs: &[String], data: &Datasets) -> Result<BTreeMap<String, Vec<LoadedScores>>> {
    let mut out: BTreeMap<String, Vec<LoadedScores>> = BTreeMap::new();
    for spec in specs {
        let (name, path) = named_path(spec)?;
        if !data.contains(&name) {
            bail!("scores given for unknown dataset `{name}`");
        }
        let scores = load_scores(&existing(path.clone())?).with_context(|| format!("reading scores {}", path.display()))?;
        let list = out.entry(name.clone()).or_default();
        if list.iter().any(|s| s.metric_id() == scores.metric_id()) {
            bail!("dataset `{name}` has two score files for metric `{}`", scores.metric_id());
        }
        list.push(scores);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_paths() {
        assert_eq!(named_path("wmt=a/b=c.jsonl").unwrap(), ("wmt".into(), PathBuf::from("a/b=c.jsonl")));
        assert!(named_path("nopath").is_err());
        assert!(named_path("=x").is_err());
    }
}
