//! Optional TOML run file. Command-line flags take precedence over it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use menli_core::scorer_io::{BuiltinScorer, ExternalScorer, Scorer};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub phenomena: Option<Vec<String>>,
    pub setting: Option<String>,
    pub para_mode: Option<String>,
    pub pooling: Option<String>,
    pub level: Option<String>,
    pub aggregation: Option<String>,
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub scorers: BTreeMap<String, ScorerEntry>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub seeds: Option<PathBuf>,
    pub suite: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub judgments: Option<PathBuf>,
    pub reports: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

/// A registered scorer: a bare `{in}`/`{out}` command template, or a table.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScorerEntry {
    Template(String),
    Detailed(ScorerTable),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerTable {
    pub command: Option<String>,
    /// Command speaking the line protocol instead of files.
    pub line: Option<String>,
    pub timeout_secs: Option<f64>,
    pub shards: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading run file {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing run file {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for slot in [&mut p.seeds, &mut p.suite, &mut p.scores, &mut p.judgments, &mut p.reports, &mut p.cache] {
            if let Some(rel) = slot.as_mut().filter(|p| p.is_relative()) {
                *rel = base.join(&*rel);
            }
        }
        if let Some(grid) = &cfg.grid {
            check_grid(grid)?;
        }
        Ok(cfg)
    }

    /// Resolves a scorer name: builtins first, then the registry.
    pub fn scorer(&self, name: &str, timeout: Option<Duration>, shards: Option<usize>) -> Result<Scorer> {
        if let Ok(b) = name.parse::<BuiltinScorer>() {
            return Ok(Scorer::Builtin(b));
        }
        let Some(entry) = self.scorers.get(name) else {
            let mut known: Vec<String> = BuiltinScorer::ALL.iter().map(|b| b.name().to_string()).collect();
            known.extend(self.scorers.keys().cloned());
            bail!(menli_core::Error::UnknownScorer(format!("{name} (known: {})", known.join(", "))));
        };
        Ok(match entry {
            ScorerEntry::Template(t) => Scorer::External(ExternalScorer { template: t.clone(), timeout, shards: shards.unwrap_or(1) }),
            ScorerEntry::Detailed(t) => match (&t.command, &t.line) {
                (Some(cmd), None) => Scorer::External(ExternalScorer {
                    template: cmd.clone(),
                    timeout: timeout.or(t.timeout_secs.map(Duration::from_secs_f64)),
                    shards: shards.or(t.shards).unwrap_or(1),
                }),
                (None, Some(line)) => Scorer::Line(line.clone()),
                _ => bail!("scorer `{name}` needs exactly one of `command` or `line`"),
            },
        })
    }
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        bail!("weight grid is empty");
    }
    if let Some(w) = grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        bail!(menli_core::Error::InvalidWeight(*w));
    }
    Ok(())
}

/// First present value, or an error naming the missing flag.
pub fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("missing {flag} (pass it on the command line or in the run file)"))
}

pub fn existing(path: PathBuf) -> Result<PathBuf> {
    if !path.exists() {
        bail!("input file {} does not exist", path.display());
    }
    Ok(path)
}
