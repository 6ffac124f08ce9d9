//! Deterministic inputs shared by the benchmarks.

use menli_core::suite::SeedRecord;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUBJECTS: &[&str] = &["The company", "Our team", "She", "The old museum", "John", "They", "The committee"];
const VERBS: &[&str] = &["hired", "sold", "visited", "built", "is planning", "has opened", "will need"];
const OBJECTS: &[&str] = &["new workers", "tickets", "paintings", "bridges", "cousins", "games", "eggs"];
const TAILS: &[&str] = &["last spring", "in Boston", "before the concert", "this season", "next week", "at the market"];

/// Template sentences with a number in most of them.
pub fn sentences(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let pick = |xs: &[&str], rng: &mut ChaCha8Rng| xs.choose(rng).copied().unwrap_or_default().to_string();
            let count = if rng.gen_bool(0.8) { format!("{} ", rng.gen_range(2..5000)) } else { String::new() };
            format!("{} {} {count}{} {}.", pick(SUBJECTS, &mut rng), pick(VERBS, &mut rng), pick(OBJECTS, &mut rng), pick(TAILS, &mut rng))
        })
        .collect()
}

/// Seeds whose paraphrase moves the trailing phrase to the front.
pub fn seeds(n: usize, seed: u64) -> Vec<SeedRecord> {
    sentences(n, seed)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let body = s.trim_end_matches('.');
            let para = match TAILS.iter().find(|t| body.ends_with(*t)) {
                Some(t) => format!("{}, {}.", capitalize(t), lower_first(body.trim_end_matches(t).trim_end())),
                None => format!("{body}, indeed."),
            };
            SeedRecord::new(format!("b{i:05}"), s.clone()).with_para(para)
        })
        .collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn lower_first(s: &str) -> String {
    if s.starts_with("John") {
        return s.to_string();
    }
    let mut c = s.chars();
    c.next().map(|f| f.to_lowercase().chain(c).collect()).unwrap_or_default()
}

pub fn vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}
