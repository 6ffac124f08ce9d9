//! Pooling NLI probability triples into metric scores.
//!
//! A strategy pairs a direction (which triple to use, or the component-wise
//! average of both) with a formula over the triple.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combine::ScoreBatch;
use crate::error::{Error, Result};

/// Sums further than this from 1 are rejected; closer ones are rescaled.
pub const TRIPLE_TOLERANCE: f64 = 1e-4;

/// Entailment, contradiction and neutral probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTriple")]
pub struct NliTriple {
    pub e: f64,
    pub c: f64,
    pub n: f64,
}

#[derive(Deserialize)]
struct RawTriple {
    e: f64,
    c: f64,
    n: f64,
}

impl TryFrom<RawTriple> for NliTriple {
    type Error = Error;

    fn try_from(r: RawTriple) -> Result<Self> {
        NliTriple::new(r.e, r.c, r.n)
    }
}

impl NliTriple {
    /// Validates and renormalizes to an exact sum of 1.
    pub fn new(e: f64, c: f64, n: f64) -> Result<Self> {
        let bad = |reason| Err(Error::InvalidTriple { e, c, n, reason });
        if !(e.is_finite() && c.is_finite() && n.is_finite()) {
            return bad("non-finite component");
        }
        if e < 0.0 || c < 0.0 || n < 0.0 {
            return bad("negative probability");
        }
        let sum = e + c + n;
        if (sum - 1.0).abs() > TRIPLE_TOLERANCE {
            return bad("components do not sum to 1");
        }
        Ok(NliTriple { e: e / sum, c: c / sum, n: n / sum })
    }

    fn average(a: NliTriple, b: NliTriple) -> NliTriple {
        NliTriple { e: (a.e + b.e) / 2.0, c: (a.c + b.c) / 2.0, n: (a.n + b.n) / 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Anchor as premise, candidate as hypothesis.
    Forward,
    /// Candidate as premise, anchor as hypothesis.
    Backward,
    /// Average of both.
    Bi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    E,
    NegC,
    EMinusN,
    EMinusC,
    EMinusN2C,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Forward, Direction::Backward, Direction::Bi];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
            Direction::Bi => "bi",
        }
    }
}

impl Formula {
    pub const ALL: [Formula; 5] = [Formula::E, Formula::NegC, Formula::EMinusN, Formula::EMinusC, Formula::EMinusN2C];

    pub fn name(self) -> &'static str {
        match self {
            Formula::E => "e",
            Formula::NegC => "-c",
            Formula::EMinusN => "e-n",
            Formula::EMinusC => "e-c",
            Formula::EMinusN2C => "e-n-2c",
        }
    }

    /// Closed range of the formula over valid triples.
    pub fn range(self) -> (f64, f64) {
        match self {
            Formula::E => (0.0, 1.0),
            Formula::NegC => (-1.0, 0.0),
            Formula::EMinusN | Formula::EMinusC => (-1.0, 1.0),
            Formula::EMinusN2C => (-2.0, 1.0),
        }
    }
}

pub fn apply_formula(t: NliTriple, f: Formula) -> f64 {
    match f {
        Formula::E => t.e,
        Formula::NegC => -t.c,
        Formula::EMinusN => t.e - t.n,
        Formula::EMinusC => t.e - t.c,
        Formula::EMinusN2C => t.e - t.n - 2.0 * t.c,
    }
}

/// Ordered by (direction, formula); that order breaks selection ties.
/// Serialized as `formula/direction`, e.g. `"e-n/bi"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PoolingStrategy {
    pub direction: Direction,
    pub formula: Formula,
}

impl PoolingStrategy {
    pub const fn new(direction: Direction, formula: Formula) -> Self {
        PoolingStrategy { direction, formula }
    }

    /// All 15 strategies in (direction, formula) order.
    pub fn all() -> Vec<PoolingStrategy> {
        Direction::ALL
            .iter()
            .flat_map(|&d| Formula::ALL.iter().map(move |&f| PoolingStrategy::new(d, f)))
            .collect()
    }

    /// The 5 forward-only strategies used when the backward direction is
    /// not computed (reference-free summarization).
    pub fn forward_only() -> Vec<PoolingStrategy> {
        Formula::ALL.iter().map(|&f| PoolingStrategy::new(Direction::Forward, f)).collect()
    }

    pub fn needs_backward(self) -> bool {
        self.direction != Direction::Forward
    }
}

impl fmt::Display for PoolingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.formula.name(), self.direction.name())
    }
}

impl FromStr for PoolingStrategy {
    type Err = Error;

    /// Parses `formula/direction`, e.g. `e-n-2c/bi`.
    fn from_str(s: &str) -> Result<Self> {
        let invalid = || {
            Error::Invalid(format!(
                "unknown pooling strategy `{s}`; expected formula/direction with formula in {{{}}} and direction in {{{}}}",
                Formula::ALL.map(Formula::name).join(", "),
                Direction::ALL.map(Direction::name).join(", ")
            ))
        };
        let (f, d) = s.trim().rsplit_once('/').ok_or_else(invalid)?;
        let formula = Formula::ALL.into_iter().find(|x| x.name() == f).ok_or_else(invalid)?;
        let direction = Direction::ALL.into_iter().find(|x| x.name() == d).ok_or_else(invalid)?;
        Ok(PoolingStrategy::new(direction, formula))
    }
}

impl From<PoolingStrategy> for String {
    fn from(s: PoolingStrategy) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for PoolingStrategy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Pooled score of one (anchor, candidate) pair.
pub fn pool(fwd: NliTriple, bwd: Option<NliTriple>, strategy: PoolingStrategy) -> Result<f64> {
    let triple = match (strategy.direction, bwd) {
        (Direction::Forward, _) => fwd,
        (Direction::Backward, Some(b)) => b,
        (Direction::Bi, Some(b)) => NliTriple::average(fwd, b),
        (_, None) => return Err(Error::MissingDirection(strategy.to_string())),
    };
    Ok(apply_formula(triple, strategy.formula))
}

/// Triples for one (anchor, candidate) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalTriples {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward: Option<NliTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backward: Option<NliTriple>,
}

impl DirectionalTriples {
    pub fn pool(&self, strategy: PoolingStrategy) -> Result<f64> {
        match (self.forward, self.backward, strategy.direction) {
            (Some(f), b, _) => pool(f, b, strategy),
            (None, Some(b), Direction::Backward) => Ok(apply_formula(b, strategy.formula)),
            _ => Err(Error::MissingDirection(strategy.to_string())),
        }
    }
}

/// Triples of both candidates of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceTriples {
    pub para: DirectionalTriples,
    pub adv: DirectionalTriples,
}

/// Pools every instance of `ids`, giving (para scores, adv scores) keyed by
/// instance id.
pub fn score_suite(
    ids: &[String],
    triples: &BTreeMap<String, InstanceTriples>,
    strategy: PoolingStrategy,
    metric_id: &str,
) -> Result<(ScoreBatch, ScoreBatch)> {
    let missing: Vec<String> = ids.iter().filter(|id| !triples.contains_key(*id)).cloned().collect();
    if !missing.is_empty() {
        return Err(Error::CoverageGap { missing, extra: Vec::new() });
    }
    let pooled = ids
        .par_iter()
        .map(|id| {
            let t = &triples[id];
            Ok((id.clone(), t.para.pool(strategy)?, t.adv.pool(strategy)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let name = format!("{metric_id}[{strategy}]");
    let para = ScoreBatch::from_entries(name.clone(), pooled.iter().map(|(id, p, _)| (id.clone(), *p)));
    let adv = ScoreBatch::from_entries(name, pooled.into_iter().map(|(id, _, a)| (id, a)));
    Ok((para, adv))
}
