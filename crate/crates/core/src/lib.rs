//! Adversarial robustness testing for text-generation evaluation metrics.

pub mod combine;
pub mod error;
pub mod evalstats;
pub mod jsonl;
pub mod nli;
pub mod perturb;
pub mod scorer_io;
pub mod suite;
pub mod textops;

pub use combine::{CombinedBatch, Normalization, ScoreBatch};
pub use error::{Error, Result};
pub use evalstats::{AccuracyReport, EvalReport, HumanJudgment};
pub use nli::{Direction, Formula, NliTriple, PoolingStrategy};
pub use perturb::{Lexicon, Phenomenon, PhenomenonSet, PerturbationResult};
pub use scorer_io::{ScoreMode, ScoreRequest, ScoreResponse};
pub use suite::{AdversarialInstance, SeedRecord, Setting, TestSuite};
