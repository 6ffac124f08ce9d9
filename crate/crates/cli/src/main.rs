//! `menli`: build adversarial suites, score them, and evaluate metrics.

mod config;
mod data;
mod evaluate;
mod generate;
mod plot;
mod score;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use menli_core::PhenomenonSet;

#[derive(Parser)]
#[command(name = "menli", version, about = "Adversarial preference testing for text-generation metrics")]
struct Cli {
    /// TOML run file; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Global RNG seed. Every random choice in the pipeline derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an adversarial suite from a seed file.
    Generate(GenerateArgs),
    /// Score both candidates of every suite instance, or a segments file.
    Score(ScoreArgs),
    /// Accuracy, correlations, pooling selection and hardness analysis.
    Evaluate(EvaluateArgs),
    /// Sweep the weighted combination of an NLI metric and a base metric.
    Combine(CombineArgs),
    /// Re-render a saved JSON report as text and plots.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Seed records (JSON lines).
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Comma-separated phenomena; join with `+` to compose, e.g. number+negation.
    #[arg(long, value_delimiter = ',', value_parser = parse_phenomenon)]
    pub phenomena: Option<Vec<PhenomenonSet>>,
    /// ref-based or ref-free.
    #[arg(long)]
    pub setting: Option<String>,
    /// Good-candidate source for ref-based suites: original, backtranslation or number-words.
    #[arg(long)]
    pub para_mode: Option<String>,
    /// Suite name; defaults to the output file stem.
    #[arg(long)]
    pub name: Option<String>,
    /// Output suite file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Suite to score (two requests per instance).
    #[arg(long, conflicts_with = "segments")]
    pub suite: Option<PathBuf>,
    /// Segments of a judgment dataset: {segment_id, system_id, text_a, text_b, reference_id?}.
    #[arg(long)]
    pub segments: Option<PathBuf>,
    /// Builtin scorer (sentbleu, rougeL, neg_edit_distance) or a name from the run file.
    #[arg(long, conflicts_with_all = ["command", "line"])]
    pub scorer: Option<String>,
    /// Ad-hoc external scorer: command template with {in} and {out}.
    #[arg(long, conflicts_with = "line")]
    pub command: Option<String>,
    /// Ad-hoc line-protocol scorer command.
    #[arg(long)]
    pub line: Option<String>,
    /// scalar or nli.
    #[arg(long, default_value = "scalar")]
    pub mode: String,
    /// Request only the forward direction (reference-free summarization).
    #[arg(long)]
    pub forward_only: bool,
    /// Metric name recorded in the score file; defaults to the scorer name.
    #[arg(long)]
    pub metric_id: Option<String>,
    /// Output score file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cache directory for request/response files.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Concurrent shards for external scorers.
    #[arg(long)]
    pub shards: Option<usize>,
    /// Seconds before an external scorer is killed.
    #[arg(long)]
    pub timeout: Option<f64>,
}

#[derive(Args)]
pub struct DataArgs {
    /// Adversarial dataset as NAME=SUITE (repeatable).
    #[arg(long = "dataset", value_name = "NAME=SUITE")]
    pub datasets: Vec<String>,
    /// Judgment dataset as NAME=JUDGMENTS (repeatable).
    #[arg(long = "judgments", value_name = "NAME=FILE")]
    pub judgments: Vec<String>,
    /// Correlation level for judgment datasets: segment or system.
    #[arg(long)]
    pub level: Option<String>,
    /// Multi-reference aggregation: mean or max.
    #[arg(long)]
    pub aggregation: Option<String>,
    /// Pooling for NLI scores: auto, auto-loo or a strategy such as e/bi.
    #[arg(long)]
    pub pooling: Option<String>,
    /// Output directory for report.json, report.txt and plots.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plots: bool,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Score file as NAME=FILE for a dataset (repeatable; one metric per file).
    #[arg(long = "scores", value_name = "NAME=FILE")]
    pub scores: Vec<String>,
}

#[derive(Args)]
pub struct CombineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// NLI metric score file as NAME=FILE (repeatable).
    #[arg(long = "nli", value_name = "NAME=FILE")]
    pub nli: Vec<String>,
    /// Base metric score file as NAME=FILE (repeatable).
    #[arg(long = "base", value_name = "NAME=FILE")]
    pub base: Vec<String>,
    /// Comma-separated NLI weights; default 0, 0.1, ..., 1.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Saved report.json.
    #[arg(long, required_unless_present = "schema")]
    pub input: Option<PathBuf>,
    /// Write SVG plots for the report's sweeps into this directory.
    #[arg(long)]
    pub plots: Option<PathBuf>,
    /// Print the report JSON schema and exit.
    #[arg(long)]
    pub schema: bool,
}

fn parse_phenomenon(s: &str) -> Result<PhenomenonSet, String> {
    s.parse().map_err(|e: menli_core::Error| e.to_string())
}

pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(cfg.seed);
    match cli.command {
        Command::Generate(a) => generate::run(a, &cfg, seed),
        Command::Score(a) => score::run(a, &cfg),
        Command::Evaluate(a) => evaluate::run_evaluate(a, &cfg),
        Command::Combine(a) => evaluate::run_combine(a, &cfg),
        Command::Report(a) => evaluate::run_report(a),
    }
}

fn error_summary(err: &anyhow::Error) -> serde_json::Value {
    let kind = err.chain().find_map(|e| e.downcast_ref::<menli_core::Error>()).map_or("Error", |e| e.kind());
    let context: Vec<String> = err.chain().map(|e| e.to_string()).collect();
    serde_json::json!({ "error": { "kind": kind, "message": err.to_string(), "context": context } })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_summary(&e));
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn error_summary_names_the_kind() {
        let e = anyhow::Error::new(menli_core::Error::EmptyBatch).context("scoring suite");
        let v = error_summary(&e);
        assert_eq!(v["error"]["kind"], "EmptyBatch");
        assert_eq!(v["error"]["message"], "scoring suite");
    }
}
