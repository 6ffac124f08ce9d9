//! Lexical-overlap baselines: character edit distance, sentence BLEU and ROUGE-L.

use std::collections::HashMap;

use super::tokenize::{tokenize, TokenizedSentence};
use crate::error::{Error, Result};

/// Character-level Levenshtein distance divided by the longer length.
pub fn levenshtein_normalized(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(&a, &b) as f64 / longest as f64
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

const MAX_ORDER: usize = 4;

fn tokens_of(text: &str) -> Result<TokenizedSentence> {
    tokenize(text, None)
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Single-reference BLEU over all tokens (case-sensitive), orders 1 to 4.
///
/// Unigram precision is unsmoothed; orders 2..=4 use add-one smoothing on
/// both matched and total counts. Brevity penalty `exp(1 - r/c)` for `c < r`.
pub fn sentence_bleu(candidate: &str, reference: &str) -> Result<f64> {
    let cand = tokens_of(candidate)?;
    let refr = tokens_of(reference)?;
    let cand = cand.surfaces();
    let refr = refr.surfaces();
    if cand.is_empty() || refr.is_empty() {
        return Err(Error::EmptyInput("sentence_bleu needs tokens on both sides"));
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let cand_counts = ngram_counts(&cand, n);
        let ref_counts = ngram_counts(&refr, n);
        let total: usize = cand_counts.values().sum();
        let matched: usize = cand_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        let precision = if n == 1 {
            if matched == 0 {
                return Ok(0.0);
            }
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        log_sum += precision.ln();
    }
    let (c, r) = (cand.len() as f64, refr.len() as f64);
    let brevity = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    Ok(brevity * (log_sum / MAX_ORDER as f64).exp())
}

/// Lowercased word and number tokens, the unit for ROUGE-L.
pub fn rouge_tokens(text: &str) -> Result<Vec<String>> {
    Ok(tokens_of(text)?
        .tokens
        .iter()
        .filter(|t| t.is_lexical())
        .map(|t| t.lower())
        .collect())
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based F1 (beta = 1) over lowercased word tokens.
pub fn rouge_l_f1(candidate: &str, reference: &str) -> Result<f64> {
    let cand = rouge_tokens(candidate)?;
    let refr = rouge_tokens(reference)?;
    if cand.is_empty() || refr.is_empty() {
        return Err(Error::EmptyInput("rouge_l_f1 needs word tokens on both sides"));
    }
    Ok(lcs_f1(lcs_len(&cand, &refr), cand.len(), refr.len()))
}

pub(crate) fn lcs_f1(lcs: usize, cand_len: usize, ref_len: usize) -> f64 {
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / cand_len as f64;
    let r = lcs as f64 / ref_len as f64;
    2.0 * p * r / (p + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edit_distance_examples() {
        assert_eq!(levenshtein_normalized("abc", "abc"), 0.0);
        assert!((levenshtein_normalized("kitten", "sitting") - 3.0 / 7.0).abs() < 1e-12);
        assert_eq!(levenshtein_normalized("", "ab"), 1.0);
        assert_eq!(levenshtein_normalized("", ""), 0.0);
        // Characters, not bytes.
        assert_eq!(levenshtein_normalized("né", "ne"), 0.5);
    }

    #[test]
    fn bleu_examples() {
        let s = "the cat sat on the mat";
        assert!((sentence_bleu(s, s).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(sentence_bleu("dogs bark", "a cat sleeps").unwrap(), 0.0);
        assert!(matches!(sentence_bleu("   ", "x"), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn bleu_short_candidate_hand_value() {
        // cand "the cat sat" (3), ref "the cat sat down" (4):
        // p1 = 3/3, p2 = (2+1)/(2+1), p3 = (1+1)/(1+1), p4 = (0+1)/(0+1)
        // BP = exp(1 - 4/3)
        let got = sentence_bleu("the cat sat", "the cat sat down").unwrap();
        assert!((got - (1.0f64 - 4.0 / 3.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn rouge_examples() {
        assert_eq!(rouge_l_f1("a b c", "a b c").unwrap(), 1.0);
        assert_eq!(rouge_l_f1("a b", "c d").unwrap(), 0.0);
        assert!((rouge_l_f1("a b c d", "a c d e").unwrap() - 0.75).abs() < 1e-12);
        assert!(matches!(rouge_l_f1("...", "a"), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn rouge_is_case_insensitive_and_ignores_punctuation() {
        assert_eq!(rouge_l_f1("The cat, sat.", "the cat sat").unwrap(), 1.0);
    }
}
