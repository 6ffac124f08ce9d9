//! Templates that keep the content but break the form.

use rand::seq::SliceRandom;
use rand::Rng;

use super::lexicon::{inflect_verb, match_case, Lexicon, VerbForm};
use super::{rng_for, Edit, PerturbationResult, Phenomenon};
use crate::error::{Error, Result};
use crate::textops::{Pos, PosLookup, TokenKind, TokenizedSentence};

/// Shuffles the word and number tokens; punctuation stays in place.
pub fn perturb_jumble(s: &TokenizedSentence, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::Jumbling;
    let slots: Vec<usize> = (0..s.tokens.len()).filter(|&i| s.tokens[i].is_lexical()).collect();
    let words: Vec<&str> = slots.iter().map(|&i| s.tokens[i].surface.as_str()).collect();
    if words.len() < 3 || words.iter().all(|w| *w == words[0]) {
        return Err(Error::NotApplicable(format!("{phen}: needs three words to reorder")));
    }
    let mut rng = rng_for(seed);
    let mut shuffled = words.clone();
    loop {
        shuffled.shuffle(&mut rng);
        if shuffled != words {
            break;
        }
    }
    let edits = slots
        .iter()
        .zip(words.iter().zip(&shuffled))
        .filter(|(_, (a, b))| a != b)
        .map(|(&i, (_, b))| Edit::new(s.tokens[i].span.start, s.tokens[i].span.end, *b))
        .collect();
    PerturbationResult::from_edits(s, phen, edits, seed)
}

/// Swaps two adjacent letters or deletes one letter in a word of at least
/// four letters.
pub fn perturb_typo(s: &TokenizedSentence, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::SpellingError;
    let eligible: Vec<usize> = (0..s.tokens.len())
        .filter(|&i| {
            let t = &s.tokens[i];
            t.kind == TokenKind::Word && t.surface.chars().count() >= 4 && t.surface.chars().all(char::is_alphabetic)
        })
        .collect();
    let mut rng = rng_for(seed);
    let &target = eligible
        .choose(&mut rng)
        .ok_or_else(|| Error::NotApplicable(format!("{phen}: no word of four or more letters")))?;
    let tok = &s.tokens[target];
    let mut chars: Vec<char> = tok.surface.chars().collect();
    let swappable: Vec<usize> = (0..chars.len() - 1).filter(|&i| chars[i] != chars[i + 1]).collect();
    if rng.gen_bool(0.5) && !swappable.is_empty() {
        let &i = swappable.choose(&mut rng).expect("non-empty");
        chars.swap(i, i + 1);
    } else {
        chars.remove(rng.gen_range(0..chars.len()));
    }
    let typo: String = chars.into_iter().collect();
    PerturbationResult::from_edits(s, phen, vec![Edit::new(tok.span.start, tok.span.end, typo)], seed)
}

const AGREEMENT_PAIRS: [(&str, &str); 8] = [
    ("is", "are"),
    ("was", "were"),
    ("has", "have"),
    ("does", "do"),
    ("isn't", "aren't"),
    ("wasn't", "weren't"),
    ("hasn't", "haven't"),
    ("doesn't", "don't"),
];

/// Words after which a bare verb is not finite ("to go", "will go", "the
/// walk").
const NON_FINITE_CONTEXT: [&str; 27] = [
    "to", "will", "would", "can", "could", "should", "must", "might", "may", "shall", "do",
    "does", "did", "don't", "doesn't", "didn't", "won't", "can't", "cannot", "wouldn't",
    "couldn't", "shouldn't", "mustn't", "not", "the", "a", "an",
];

fn agreement_flip(lower: &str) -> Option<&'static str> {
    AGREEMENT_PAIRS.iter().find_map(|&(a, b)| {
        if a == lower {
            Some(b)
        } else if b == lower {
            Some(a)
        } else {
            None
        }
    })
}

/// Flips the number agreement of the first finite present-tense verb.
/// Applying it twice gives back the original sentence.
pub fn perturb_svd(s: &TokenizedSentence, lex: &Lexicon, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::SubjectVerbDisagreement;
    let mut prev: Option<String> = None;
    for tok in &s.tokens {
        if !tok.is_lexical() {
            continue;
        }
        let lower = tok.lower();
        let flipped = agreement_flip(&lower).map(str::to_string).or_else(|| {
            let after = prev.as_deref()?;
            if NON_FINITE_CONTEXT.contains(&after) || lex.lookup_pos(&lower) != Some(Pos::Verb) {
                return None;
            }
            match lex.analyze_verb(&lower)? {
                (base, VerbForm::ThirdSingular) => Some(base.to_string()),
                (base, VerbForm::Base) => Some(inflect_verb(base, VerbForm::ThirdSingular)),
                _ => None,
            }
        });
        if let Some(word) = flipped {
            let edit = Edit::new(tok.span.start, tok.span.end, match_case(&tok.surface, &word));
            return PerturbationResult::from_edits(s, phen, vec![edit], seed);
        }
        prev = Some(lower);
    }
    Err(Error::NotApplicable(format!("{phen}: no finite present-tense verb")))
}
