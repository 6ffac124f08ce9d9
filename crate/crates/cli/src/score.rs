use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};

use menli_core::scorer_io::{
    records_from_responses, request_id, suite_requests, write_score_file, ExternalScorer, ScoreMode, ScoreRequest, Scorer,
};
use menli_core::suite::read_suite;

use crate::config::{existing, require, RunConfig};
use crate::data::read_segments;
use crate::ScoreArgs;

pub fn run(args: ScoreArgs, cfg: &RunConfig) -> Result<()> {
    let mode = match (args.mode.as_str(), args.forward_only) {
        ("scalar", false) => ScoreMode::Scalar,
        ("scalar", true) => bail!("--forward-only applies to --mode nli"),
        ("nli", false) => ScoreMode::NliBoth,
        ("nli", true) => ScoreMode::NliForward,
        (other, _) => bail!("unknown mode `{other}` (valid: scalar, nli)"),
    };
    let timeout = args.timeout.map(Duration::from_secs_f64);
    let (scorer, default_id) = match (&args.scorer, &args.command, &args.line) {
        (Some(name), _, _) => (cfg.scorer(name, timeout, args.shards)?, name.clone()),
        (_, Some(t), _) => (
            Scorer::External(ExternalScorer { template: t.clone(), timeout, shards: args.shards.unwrap_or(1) }),
            "external".to_string(),
        ),
        (_, _, Some(c)) => (Scorer::Line(c.clone()), "line".to_string()),
        _ => bail!("pass one of --scorer, --command or --line"),
    };
    if mode.is_nli() && matches!(scorer, Scorer::Builtin(_)) {
        bail!("builtin scorers only produce scalar scores");
    }
    let out: PathBuf = require(args.out.or(cfg.paths.scores.clone()), "--out")?;

    let requests: Vec<ScoreRequest> = if let Some(seg) = &args.segments {
        read_segments(&existing(seg.clone())?)?
            .into_iter()
            .map(|s| {
                let key = menli_core::evalstats::judgment_key(&s.system_id, &s.segment_id);
                ScoreRequest::new(request_id(&key, None, s.reference_id.as_deref()), s.text_a, s.text_b, mode)
            })
            .collect()
    } else {
        let path = existing(require(args.suite.or(cfg.paths.suite.clone()), "--suite or --segments")?)?;
        let suite = read_suite(&path).with_context(|| format!("reading suite {}", path.display()))?;
        suite_requests(&suite, mode)
    };

    let cache = args
        .cache
        .or(cfg.paths.cache.clone())
        .unwrap_or_else(|| out.parent().unwrap_or(std::path::Path::new(".")).join(".menli-cache"));
    let (responses, cached) = scorer.run_cached(&requests, &cache)?;
    let metric_id = args.metric_id.unwrap_or(default_id);
    let records = records_from_responses(&metric_id, &responses);
    write_score_file(&out, &records).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "{} responses from {}{} written to {}",
        responses.len(),
        scorer.identity(),
        if cached { " (cached)" } else { "" },
        out.display()
    );
    Ok(())
}
