use std::path::PathBuf;

use anyhow::{Context, Result};

use menli_core::perturb::{Lexicon, PhenomenonSet};
use menli_core::suite::{build_ref_based, build_ref_free, read_seeds, suite_stats, write_suite, ParaMode, Setting};

use crate::config::{existing, require, RunConfig};
use crate::GenerateArgs;

pub fn run(args: GenerateArgs, cfg: &RunConfig, seed: Option<u64>) -> Result<()> {
    let seeds_path = existing(require(args.seeds.or(cfg.paths.seeds.clone()), "--seeds")?)?;
    let out: PathBuf = require(args.out.or(cfg.paths.suite.clone()), "--out")?;
    let seed = require(seed, "--seed")?;
    let phenomena: Vec<PhenomenonSet> = match args.phenomena {
        Some(p) => p,
        None => require(cfg.phenomena.as_ref(), "--phenomena")?
            .iter()
            .map(|s| s.parse())
            .collect::<menli_core::Result<_>>()?,
    };
    let setting: Setting = args.setting.or(cfg.setting.clone()).as_deref().unwrap_or("ref-based").parse()?;
    let para_mode: ParaMode = args.para_mode.or(cfg.para_mode.clone()).as_deref().unwrap_or("original").parse()?;
    let name = args
        .name
        .or_else(|| out.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "suite".into());

    let seeds = read_seeds(&seeds_path)?;
    let lex = Lexicon::builtin();
    let suite = match setting {
        Setting::RefBased => build_ref_based(&name, &seeds, &phenomena, lex, seed, para_mode)?,
        Setting::RefFree => build_ref_free(&name, &seeds, &phenomena, lex, seed)?,
    };
    write_suite(&out, &suite).with_context(|| format!("writing {}", out.display()))?;

    let stats = suite_stats(&suite);
    println!("{:<24} {:>9} {:>8} {:>10}", "phenomenon", "generated", "skipped", "para dist");
    for (label, count) in &suite.counts {
        let dist = stats.per_phenomenon.get(label).and_then(|d| d.mean_para_distance);
        println!(
            "{label:<24} {:>9} {:>8} {:>10}",
            count.generated,
            count.skipped,
            dist.map_or("-".into(), |d| format!("{d:.3}"))
        );
    }
    println!("{} instances from {} seeds written to {}", suite.len(), seeds.len(), out.display());
    Ok(())
}
