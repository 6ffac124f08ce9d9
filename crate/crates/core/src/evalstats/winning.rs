//! Pooling-strategy selection by winning frequency.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nli::PoolingStrategy;

/// Performance of each strategy per (dataset, NLI metric) cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsGrid {
    pub cells: BTreeMap<(String, String), BTreeMap<PoolingStrategy, f64>>,
}

impl ResultsGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dataset: &str, nli_metric: &str, strategy: PoolingStrategy, performance: f64) {
        self.cells
            .entry((dataset.to_string(), nli_metric.to_string()))
            .or_default()
            .insert(strategy, performance);
    }

    pub fn datasets(&self) -> BTreeSet<&str> {
        self.cells.keys().map(|(d, _)| d.as_str()).collect()
    }
}

fn tally<'a>(
    cells: impl Iterator<Item = (&'a (String, String), &'a BTreeMap<PoolingStrategy, f64>)>,
    universe: &[PoolingStrategy],
) -> Result<BTreeMap<PoolingStrategy, usize>> {
    let mut wins: BTreeMap<PoolingStrategy, usize> = universe.iter().map(|&s| (s, 0)).collect();
    for ((dataset, nli_metric), perf) in cells {
        let mut best = f64::NEG_INFINITY;
        for &s in universe {
            let v = *perf.get(&s).ok_or_else(|| Error::IncompleteGrid {
                dataset: dataset.clone(),
                nli_metric: nli_metric.clone(),
                strategy: s.to_string(),
            })?;
            if v.is_nan() {
                return Err(Error::Invalid(format!("NaN performance for {s} on {dataset}/{nli_metric}")));
            }
            best = best.max(v);
        }
        for &s in universe {
            if perf[&s] == best {
                *wins.get_mut(&s).expect("in universe") += 1;
            }
        }
    }
    Ok(wins)
}

/// Wins per strategy: each cell credits its best strategy, or all of them
/// when several tie.
pub fn winning_frequency(grid: &ResultsGrid, universe: &[PoolingStrategy]) -> Result<BTreeMap<PoolingStrategy, usize>> {
    tally(grid.cells.iter(), universe)
}

/// Most frequent winner over the cells not belonging to `exclude`; ties go
/// to the first strategy in (direction, formula) order.
pub fn best_strategy(grid: &ResultsGrid, universe: &[PoolingStrategy], exclude: Option<&str>) -> Result<PoolingStrategy> {
    let cells: Vec<_> = grid.cells.iter().filter(|((d, _), _)| Some(d.as_str()) != exclude).collect();
    if cells.is_empty() {
        return Err(Error::EmptyInput("no results left to select a pooling strategy from"));
    }
    let wins = tally(cells.into_iter(), universe)?;
    let top = wins.values().copied().max().unwrap_or(0);
    Ok(*wins.iter().find(|(_, &w)| w == top).map(|(s, _)| s).expect("non-empty universe"))
}

/// Strategy chosen without looking at `held_out`.
pub fn leave_one_out_strategy(grid: &ResultsGrid, held_out: &str, universe: &[PoolingStrategy]) -> Result<PoolingStrategy> {
    let n = grid.datasets().len();
    if n < 2 {
        return Err(Error::TooFewDatasets(n));
    }
    best_strategy(grid, universe, Some(held_out))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinningRow {
    pub strategy: PoolingStrategy,
    pub adversarial: usize,
    pub standard: usize,
}

/// Wins on adversarial and standard benchmarks side by side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinningTable {
    pub rows: Vec<WinningRow>,
}

impl WinningTable {
    pub fn get(&self, s: PoolingStrategy) -> Option<(usize, usize)> {
        self.rows.iter().find(|r| r.strategy == s).map(|r| (r.adversarial, r.standard))
    }

    /// Rows with at least one win, as `strategy adv+std`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in self.rows.iter().filter(|r| r.adversarial + r.standard > 0) {
            out.push_str(&format!("{:<10} {}+{}\n", r.strategy.to_string(), r.adversarial, r.standard));
        }
        out
    }
}

pub fn winning_table(adversarial: &ResultsGrid, standard: &ResultsGrid, universe: &[PoolingStrategy]) -> Result<WinningTable> {
    let a = winning_frequency(adversarial, universe)?;
    let s = winning_frequency(standard, universe)?;
    Ok(WinningTable {
        rows: universe
            .iter()
            .map(|&strategy| WinningRow { strategy, adversarial: a[&strategy], standard: s[&strategy] })
            .collect(),
    })
}
