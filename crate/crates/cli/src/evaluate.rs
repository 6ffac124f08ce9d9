//! The evaluate, combine and report commands.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use menli_core::combine::{default_grid, min_max_normalize, sweep, ScoreBatch};
use menli_core::evalstats::{
    best_strategy, edit_distance_analysis, kendall, leave_one_out_strategy, overall_performance, percentile_summary,
    preference_accuracy, segment_level, system_level, AccuracyReport, AccuracySection, Aggregation, CorrelationRow,
    EvalReport, HumanJudgment, LooSelection, ResultsGrid, SweepCurve,
};
use menli_core::evalstats::winning_table;
use menli_core::nli::PoolingStrategy;
use menli_core::scorer_io::{LoadedScores, ScalarBatches};
use menli_core::suite::TestSuite;
use menli_core::Error;

use crate::config::{check_grid, RunConfig};
use crate::data::{load_score_files, Datasets};
use crate::plot::{scatter_svg, sweep_svg};
use crate::{CombineArgs, DataArgs, EvaluateArgs, ReportArgs, REPORT_SCHEMA};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pooling {
    Auto,
    AutoLoo,
    Fixed(PoolingStrategy),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Level {
    Segment,
    System,
}

impl Level {
    fn name(self) -> &'static str {
        match self {
            Level::Segment => "segment",
            Level::System => "system",
        }
    }
}

struct Options {
    level: Level,
    aggregation: Aggregation,
    pooling: Pooling,
    out: PathBuf,
    plots: bool,
}

impl Options {
    fn new(data: &DataArgs, cfg: &RunConfig) -> Result<Options> {
        let level = match data.level.as_deref().or(cfg.level.as_deref()).unwrap_or("segment") {
            "segment" => Level::Segment,
            "system" => Level::System,
            other => bail!("unknown level `{other}` (valid: segment, system)"),
        };
        let aggregation = match data.aggregation.as_deref().or(cfg.aggregation.as_deref()).unwrap_or("mean") {
            "mean" => Aggregation::Mean,
            "max" => Aggregation::Max,
            other => bail!("unknown aggregation `{other}` (valid: mean, max)"),
        };
        let pooling = match data.pooling.as_deref().or(cfg.pooling.as_deref()).unwrap_or("auto") {
            "auto" => Pooling::Auto,
            "auto-loo" => Pooling::AutoLoo,
            s => Pooling::Fixed(s.parse()?),
        };
        let out = data.out.clone().or(cfg.paths.reports.clone()).unwrap_or_else(|| PathBuf::from("reports"));
        Ok(Options { level, aggregation, pooling, out, plots: data.plots })
    }
}

fn check_coverage(suite: &TestSuite, batch: &ScoreBatch) -> Result<()> {
    let ids: BTreeSet<&str> = suite.instances.iter().map(|i| i.id.as_str()).collect();
    let missing: Vec<String> = ids.iter().filter(|id| batch.get(id).is_none()).map(|s| s.to_string()).collect();
    let extra: Vec<String> = batch.entries.keys().filter(|k| !ids.contains(k.as_str())).cloned().collect();
    if missing.is_empty() && extra.is_empty() {
        Ok(())
    } else {
        Err(Error::CoverageGap { missing, extra }.into())
    }
}

fn accuracy(suite: &TestSuite, b: &ScalarBatches) -> Result<AccuracyReport> {
    check_coverage(suite, &b.para)?;
    check_coverage(suite, &b.adv)?;
    Ok(preference_accuracy(&b.para, &b.adv)?)
}

fn paired(batch: &ScoreBatch, judgments: &[HumanJudgment]) -> Vec<(f64, f64)> {
    judgments.iter().filter_map(|j| batch.get(&j.key()).map(|m| (m, j.human_score))).collect()
}

fn correlation(batch: &ScoreBatch, judgments: &[HumanJudgment], level: Level) -> Result<(f64, Option<f64>, usize, usize, bool)> {
    let c = match level {
        Level::Segment => segment_level(batch, judgments)?,
        Level::System => system_level(batch, judgments)?,
    };
    let tau = match level {
        Level::Segment => {
            let (m, h): (Vec<f64>, Vec<f64>) = paired(batch, judgments).into_iter().unzip();
            kendall(&m, &h).ok()
        }
        Level::System => None,
    };
    Ok((c.pearson, tau, c.n, c.dropped, c.degenerate))
}

/// Batches of one score file under a pooling strategy (ignored for scalar
/// scores).
fn batches(scores: &LoadedScores, strategy: Option<PoolingStrategy>, agg: Aggregation) -> Result<ScalarBatches> {
    Ok(match (scores, strategy) {
        (LoadedScores::Scalar(t), _) => t.batches(agg)?,
        (LoadedScores::Nli(t), Some(s)) => t.pooled(s)?.batches(agg)?,
        (LoadedScores::Nli(t), None) => bail!("NLI scores `{}` need a pooling strategy", t.metric_id),
    })
}

/// Headline performance of a dataset: accuracy for suites, Pearson for
/// judgment sets.
fn performance(data: &Datasets, dataset: &str, b: &ScalarBatches, level: Level) -> Result<f64> {
    if let Some(suite) = data.adversarial.get(dataset) {
        Ok(accuracy(suite, b)?.overall.accuracy())
    } else {
        Ok(correlation(&b.segments, &data.standard[dataset], level)?.0)
    }
}

struct Selection {
    universe: Vec<PoolingStrategy>,
    adv_grid: ResultsGrid,
    std_grid: ResultsGrid,
    global: Option<PoolingStrategy>,
    per_dataset: BTreeMap<String, PoolingStrategy>,
    loo: Vec<LooSelection>,
}

impl Selection {
    fn strategy(&self, dataset: &str) -> Option<PoolingStrategy> {
        self.per_dataset.get(dataset).copied().or(self.global)
    }
}

/// Scores every NLI file under every applicable strategy and picks the
/// strategy per `pooling`.
fn select_pooling(
    data: &Datasets,
    scores: &BTreeMap<String, Vec<LoadedScores>>,
    opts: &Options,
) -> Result<Selection> {
    let nli: Vec<(&str, &LoadedScores)> = scores
        .iter()
        .flat_map(|(d, list)| list.iter().filter(|s| s.is_nli()).map(move |s| (d.as_str(), s)))
        .collect();
    let universe = if nli.iter().all(|(_, s)| matches!(s, LoadedScores::Nli(t) if t.has_backward())) {
        PoolingStrategy::all()
    } else {
        PoolingStrategy::forward_only()
    };
    let mut sel = Selection {
        universe,
        adv_grid: ResultsGrid::new(),
        std_grid: ResultsGrid::new(),
        global: None,
        per_dataset: BTreeMap::new(),
        loo: Vec::new(),
    };
    if nli.is_empty() {
        return Ok(sel);
    }
    if let Pooling::Fixed(s) = opts.pooling {
        if !sel.universe.contains(&s) {
            bail!(Error::MissingDirection(s.to_string()));
        }
    }
    for (d, scores) in &nli {
        let grid = if data.adversarial.contains_key(*d) { &mut sel.adv_grid } else { &mut sel.std_grid };
        for &s in &sel.universe {
            let perf = performance(data, d, &batches(scores, Some(s), opts.aggregation)?, opts.level)
                .with_context(|| format!("evaluating {}[{s}] on {d}", scores.metric_id()))?;
            grid.insert(d, scores.metric_id(), s, perf);
        }
    }
    let mut all = sel.adv_grid.clone();
    all.cells.extend(sel.std_grid.cells.clone());
    if let Pooling::Fixed(s) = opts.pooling {
        sel.global = Some(s);
        return Ok(sel);
    }
    let global = best_strategy(&all, &sel.universe, None)?;
    sel.global = Some(global);
    if opts.pooling == Pooling::AutoLoo {
        let datasets: Vec<String> = all.datasets().into_iter().map(str::to_string).collect();
        for d in datasets {
            let s = leave_one_out_strategy(&all, &d, &sel.universe)?;
            let mean_at = |s: PoolingStrategy| {
                let v: Vec<f64> = all.cells.iter().filter(|((cd, _), _)| *cd == d).map(|(_, perf)| perf[&s]).collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            sel.loo.push(LooSelection { held_out: d.clone(), strategy: s, performance: mean_at(s), global_performance: mean_at(global) });
            sel.per_dataset.insert(d, s);
        }
    }
    Ok(sel)
}

fn write_outputs(report: &EvalReport, out: &Path, plots: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let json = report.to_json()?;
    std::fs::write(out.join("report.json"), json + "\n")?;
    let text = report.render_text();
    std::fs::write(out.join("report.txt"), &text)?;
    for (name, svg) in plots {
        std::fs::write(out.join(name), svg)?;
    }
    print!("{text}");
    Ok(())
}

fn file_safe(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn run_evaluate(args: EvaluateArgs, cfg: &RunConfig) -> Result<()> {
    let opts = Options::new(&args.data, cfg)?;
    let data = Datasets::load(&args.data.datasets, &args.data.judgments)?;
    let scores = load_score_files(&args.scores, &data)?;
    if scores.is_empty() {
        bail!("no score files given (use --scores NAME=FILE)");
    }
    let sel = select_pooling(&data, &scores, &opts)?;
    let mut report = EvalReport::default();
    let mut plots = Vec::new();
    if !sel.adv_grid.cells.is_empty() || !sel.std_grid.cells.is_empty() {
        report.winning = Some(winning_table(&sel.adv_grid, &sel.std_grid, &sel.universe)?);
    }
    report.selected_strategy = sel.global.filter(|_| scores.values().flatten().any(LoadedScores::is_nli));
    report.leave_one_out = sel.loo.clone();

    for (d, list) in &scores {
        for s in list {
            let strategy = if s.is_nli() { sel.strategy(d) } else { None };
            let b = batches(s, strategy, opts.aggregation)?;
            let metric = s.metric_id().to_string();
            let label = match strategy {
                Some(st) => format!("{metric}[{st}]"),
                None => metric.clone(),
            };
            if let Some(suite) = data.adversarial.get(d) {
                let acc = accuracy(suite, &b).with_context(|| format!("accuracy of {label} on {d}"))?;
                report.hardness.insert(format!("{d}/{label}"), edit_distance_analysis(suite, &b.para, &b.adv)?);
                report.accuracy.push(AccuracySection {
                    dataset: d.clone(),
                    metric: metric.clone(),
                    strategy,
                    accuracy: acc.overall.accuracy(),
                    report: acc,
                });
            } else {
                let judgments = &data.standard[d];
                let (pearson, tau, n, dropped, degenerate) =
                    correlation(&b.segments, judgments, opts.level).with_context(|| format!("correlation of {label} on {d}"))?;
                report.correlations.push(CorrelationRow {
                    dataset: d.clone(),
                    metric: metric.clone(),
                    strategy,
                    level: opts.level.name().into(),
                    pearson,
                    kendall: tau,
                    n,
                    dropped,
                    degenerate,
                });
                if opts.plots {
                    let pts = paired(&b.segments, judgments);
                    plots.push((
                        format!("scatter-{}-{}.svg", file_safe(d), file_safe(&label)),
                        scatter_svg(&format!("{label} on {d}"), "metric score", "human score", &pts),
                    ));
                }
            }
        }
    }

    let metrics: BTreeSet<&str> = scores.values().flatten().map(LoadedScores::metric_id).collect();
    if metrics.len() == 1 {
        let accs: Vec<f64> = report.accuracy.iter().map(|a| a.accuracy).collect();
        let corrs: Vec<f64> = report.correlations.iter().map(|c| c.pearson).collect();
        if !accs.is_empty() && !corrs.is_empty() {
            report.overall = Some(overall_performance(&accs, &corrs)?);
        }
        if accs.len() >= 2 {
            report.accuracy_summary = Some(percentile_summary(&accs, 0.95)?);
        }
    }
    write_outputs(&report, &opts.out, &plots)
}

const SEP: char = '\u{1f}';

/// All datasets in one batch: each dataset is min-max normalized on its own,
/// ids become `dataset SEP part SEP id`.
fn union_batch(parts: &BTreeMap<String, ScalarBatches>, data: &Datasets) -> Result<ScoreBatch> {
    let mut named = Vec::new();
    for (d, b) in parts {
        let mut joined = ScoreBatch::new(b.para.metric_id.clone());
        if data.adversarial.contains_key(d) {
            for (part, batch) in [("para", &b.para), ("adv", &b.adv)] {
                joined.entries.extend(batch.entries.iter().map(|(k, v)| (format!("{d}{SEP}{part}{SEP}{k}"), *v)));
            }
        } else {
            joined.entries.extend(b.segments.entries.iter().map(|(k, v)| (format!("{d}{SEP}seg{SEP}{k}"), *v)));
        }
        named.push((d.clone(), min_max_normalize(&joined).with_context(|| format!("normalizing {d}"))?));
    }
    Ok(ScoreBatch::merge(&named)?)
}

fn part_of(batch: &ScoreBatch, dataset: &str, part: &str) -> ScoreBatch {
    let prefix = format!("{dataset}{SEP}{part}{SEP}");
    let mut out = ScoreBatch::new(batch.metric_id.clone());
    out.entries = batch
        .entries
        .iter()
        .filter_map(|(k, v)| k.strip_prefix(&prefix).map(|id| (id.to_string(), *v)))
        .collect();
    out
}

fn one_per_dataset(specs: &[String], data: &Datasets, flag: &str) -> Result<BTreeMap<String, LoadedScores>> {
    let mut out = BTreeMap::new();
    for (d, mut list) in load_score_files(specs, data)? {
        if list.len() != 1 {
            bail!("{flag} takes one score file per dataset; `{d}` has {}", list.len());
        }
        out.insert(d, list.pop().expect("one"));
    }
    Ok(out)
}

pub fn run_combine(args: CombineArgs, cfg: &RunConfig) -> Result<()> {
    let opts = Options::new(&args.data, cfg)?;
    let grid = args.grid.or(cfg.grid.clone()).unwrap_or_else(default_grid);
    check_grid(&grid)?;
    let data = Datasets::load(&args.data.datasets, &args.data.judgments)?;
    if data.adversarial.is_empty() || data.standard.is_empty() {
        bail!("combine needs at least one --dataset and one --judgments dataset");
    }
    let nli = one_per_dataset(&args.nli, &data, "--nli")?;
    let base = one_per_dataset(&args.base, &data, "--base")?;
    for d in data.adversarial.keys().chain(data.standard.keys()) {
        if !nli.contains_key(d) || !base.contains_key(d) {
            bail!("dataset `{d}` needs both --nli and --base scores");
        }
    }
    if let Some(s) = base.values().find(|s| s.is_nli()) {
        bail!("base metric `{}` must be scalar", s.metric_id());
    }
    let nli_lists: BTreeMap<String, Vec<LoadedScores>> = nli.iter().map(|(d, s)| (d.clone(), vec![s.clone()])).collect();
    let sel = select_pooling(&data, &nli_lists, &opts)?;

    let mut n_parts = BTreeMap::new();
    let mut m_parts = BTreeMap::new();
    for (d, s) in &nli {
        let strategy = if s.is_nli() { sel.strategy(d) } else { None };
        n_parts.insert(d.clone(), batches(s, strategy, opts.aggregation)?);
        m_parts.insert(d.clone(), batches(&base[d], None, opts.aggregation)?);
    }
    let n = union_batch(&n_parts, &data)?;
    let m = union_batch(&m_parts, &data)?;
    let points = sweep(&n, &m, &grid, |c| {
        let b = c.as_batch();
        let mut accs = Vec::new();
        for (d, suite) in &data.adversarial {
            let sb = ScalarBatches { para: part_of(&b, d, "para"), adv: part_of(&b, d, "adv"), segments: ScoreBatch::new("") };
            accs.push(accuracy(suite, &sb).map_err(|e| Error::Invalid(format!("{d}: {e:#}")))?.overall.accuracy());
        }
        let mut corrs = Vec::new();
        for (d, judgments) in &data.standard {
            let seg = part_of(&b, d, "seg");
            corrs.push(correlation(&seg, judgments, opts.level).map_err(|e| Error::Invalid(format!("{d}: {e:#}")))?.0);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Ok((mean(&accs), mean(&corrs)))
    })?;
    let mut best = (points[0].w_nli, f64::NEG_INFINITY);
    for p in &points {
        let o = overall_performance(&[p.accuracy], &[p.correlation])?;
        if o > best.1 {
            best = (p.w_nli, o);
        }
    }
    let nli_name = match sel.global {
        Some(s) if nli.values().any(LoadedScores::is_nli) => format!("{}[{s}]", nli.values().next().expect("non-empty").metric_id()),
        _ => nli.values().next().expect("non-empty").metric_id().to_string(),
    };
    let curve = SweepCurve {
        nli_metric: nli_name,
        base_metric: base.values().next().expect("non-empty").metric_id().to_string(),
        points,
        best_w: best.0,
        best_overall: best.1,
    };
    let plots = if opts.plots { vec![("sweep.svg".to_string(), sweep_svg(&curve))] } else { Vec::new() };
    let report = EvalReport {
        selected_strategy: sel.global.filter(|_| nli.values().any(LoadedScores::is_nli)),
        leave_one_out: sel.loo,
        sweeps: vec![curve],
        ..EvalReport::default()
    };
    write_outputs(&report, &opts.out, &plots)
}

pub fn run_report(args: ReportArgs) -> Result<()> {
    if args.schema {
        print!("{REPORT_SCHEMA}");
        return Ok(());
    }
    let path = args.input.expect("required unless --schema");
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let report: EvalReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    report.validate()?;
    if let Some(dir) = args.plots {
        std::fs::create_dir_all(&dir)?;
        for (i, s) in report.sweeps.iter().enumerate() {
            std::fs::write(dir.join(format!("sweep-{i}.svg")), sweep_svg(s))?;
        }
    }
    print!("{}", report.render_text());
    Ok(())
}
