//! Adversarial perturbation templates.
//!
//! Each template rewrites an anchor sentence into a near-copy carrying one
//! kind of error. Nine templates target adequacy (the content is wrong) and
//! three target fluency (the content is intact but the text is ill-formed).
//! Templates are pure functions of `(sentence, lexicon, seed)`; a template
//! that cannot apply returns [`Error::NotApplicable`] instead of forcing an
//! edit.

mod adequacy;
mod fluency;
pub mod lexicon;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textops::{tokenize_with, Pos, Span, TokenizedSentence};

pub use adequacy::{
    is_date_like, perturb_addition, perturb_mismatch, perturb_name, perturb_negation,
    perturb_number, perturb_omission, perturb_pronoun,
};
pub use fluency::{perturb_jumble, perturb_svd, perturb_typo};
pub use lexicon::{Lexicon, LexiconData};

pub(crate) type TemplateRng = ChaCha8Rng;

pub(crate) fn rng_for(seed: u64) -> TemplateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phenomenon {
    Addition,
    Omission,
    MismatchNoun,
    MismatchVerb,
    MismatchAdj,
    Negation,
    NumberError,
    PronounError,
    NameError,
    Jumbling,
    SpellingError,
    SubjectVerbDisagreement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Adequacy,
    Fluency,
}

impl Phenomenon {
    pub const ALL: [Phenomenon; 12] = [
        Phenomenon::Addition,
        Phenomenon::Omission,
        Phenomenon::MismatchNoun,
        Phenomenon::MismatchVerb,
        Phenomenon::MismatchAdj,
        Phenomenon::Negation,
        Phenomenon::NumberError,
        Phenomenon::PronounError,
        Phenomenon::NameError,
        Phenomenon::Jumbling,
        Phenomenon::SpellingError,
        Phenomenon::SubjectVerbDisagreement,
    ];

    pub fn category(self) -> Category {
        match self {
            Phenomenon::Jumbling | Phenomenon::SpellingError | Phenomenon::SubjectVerbDisagreement => {
                Category::Fluency
            }
            _ => Category::Adequacy,
        }
    }

    /// Short command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Phenomenon::Addition => "addition",
            Phenomenon::Omission => "omission",
            Phenomenon::MismatchNoun => "mismatch_noun",
            Phenomenon::MismatchVerb => "mismatch_verb",
            Phenomenon::MismatchAdj => "mismatch_adj",
            Phenomenon::Negation => "negation",
            Phenomenon::NumberError => "number",
            Phenomenon::PronounError => "pronoun",
            Phenomenon::NameError => "name",
            Phenomenon::Jumbling => "jumbling",
            Phenomenon::SpellingError => "spelling",
            Phenomenon::SubjectVerbDisagreement => "svd",
        }
    }

    pub fn valid_names() -> String {
        Phenomenon::ALL.map(Phenomenon::name).join(", ")
    }
}

impl fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phenomenon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let found = match key.as_str() {
            "addition" => Phenomenon::Addition,
            "omission" => Phenomenon::Omission,
            "mismatch_noun" | "noun" => Phenomenon::MismatchNoun,
            "mismatch_verb" | "verb" => Phenomenon::MismatchVerb,
            "mismatch_adj" | "mismatch_adjective" | "adj" => Phenomenon::MismatchAdj,
            "negation" => Phenomenon::Negation,
            "number" | "number_error" | "num" => Phenomenon::NumberError,
            "pronoun" | "pronoun_error" => Phenomenon::PronounError,
            "name" | "name_error" => Phenomenon::NameError,
            "jumbling" | "jumble" => Phenomenon::Jumbling,
            "spelling" | "spelling_error" | "typo" => Phenomenon::SpellingError,
            "svd" | "subject_verb_disagreement" => Phenomenon::SubjectVerbDisagreement,
            _ => {
                return Err(Error::Invalid(format!(
                    "unknown phenomenon `{s}`; valid names: {}",
                    Phenomenon::valid_names()
                )))
            }
        };
        Ok(found)
    }
}

/// One phenomenon or a left-to-right composition such as `number+negation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhenomenonSet(pub Vec<Phenomenon>);

impl PhenomenonSet {
    pub fn single(p: Phenomenon) -> Self {
        PhenomenonSet(vec![p])
    }

    pub fn contains(&self, p: Phenomenon) -> bool {
        self.0.contains(&p)
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|p| p.name()).collect::<Vec<_>>().join("+")
    }
}

impl fmt::Display for PhenomenonSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PhenomenonSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kinds = s.split('+').map(str::parse).collect::<Result<Vec<_>>>()?;
        if kinds.is_empty() {
            return Err(Error::Invalid("empty phenomenon".into()));
        }
        Ok(PhenomenonSet(kinds))
    }
}

impl Serialize for PhenomenonSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PhenomenonSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Replace `span` of the original text with `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub span: Span,
    pub replacement: String,
}

impl Edit {
    pub fn new(start: usize, end: usize, replacement: impl Into<String>) -> Self {
        Edit {
            span: Span::new(start, end),
            replacement: replacement.into(),
        }
    }
}

/// Applies sorted, non-overlapping edits.
pub fn apply_edits(original: &str, edits: &[Edit]) -> Result<String> {
    let mut out = String::with_capacity(original.len() + 16);
    let mut cursor = 0;
    for edit in edits {
        let Span { start, end } = edit.span;
        if start < cursor || end > original.len() || start > end {
            return Err(Error::Invalid(format!(
                "edit {start}..{end} overlaps or is out of bounds"
            )));
        }
        if !original.is_char_boundary(start) || !original.is_char_boundary(end) {
            return Err(Error::Invalid(format!("edit {start}..{end} splits a character")));
        }
        out.push_str(&original[cursor..start]);
        out.push_str(&edit.replacement);
        cursor = end;
    }
    out.push_str(&original[cursor..]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationResult {
    pub original: String,
    pub perturbed: String,
    pub phenomenon: PhenomenonSet,
    /// Edits against `original`, sorted by position.
    pub edits: Vec<Edit>,
    pub rng_seed: u64,
}

impl PerturbationResult {
    pub(crate) fn from_edits(
        s: &TokenizedSentence,
        phenomenon: Phenomenon,
        mut edits: Vec<Edit>,
        seed: u64,
    ) -> Result<Self> {
        edits.sort_by_key(|e| (e.span.start, e.span.end));
        let perturbed = apply_edits(&s.source, &edits)?;
        if perturbed == s.source {
            return Err(Error::NotApplicable(format!(
                "{phenomenon} left the sentence unchanged"
            )));
        }
        Ok(PerturbationResult {
            original: s.source.clone(),
            perturbed,
            phenomenon: PhenomenonSet::single(phenomenon),
            edits,
            rng_seed: seed,
        })
    }

    /// Re-applies the recorded edits; true when they reproduce `perturbed`.
    pub fn replays(&self) -> bool {
        apply_edits(&self.original, &self.edits).is_ok_and(|p| p == self.perturbed)
    }
}

/// Applies a single template.
pub fn perturb(
    s: &TokenizedSentence,
    phenomenon: Phenomenon,
    lex: &Lexicon,
    seed: u64,
) -> Result<PerturbationResult> {
    match phenomenon {
        Phenomenon::Addition => perturb_addition(s, lex, seed),
        Phenomenon::Omission => perturb_omission(s, seed),
        Phenomenon::MismatchNoun => perturb_mismatch(s, Pos::Noun, lex, seed),
        Phenomenon::MismatchVerb => perturb_mismatch(s, Pos::Verb, lex, seed),
        Phenomenon::MismatchAdj => perturb_mismatch(s, Pos::Adjective, lex, seed),
        Phenomenon::Negation => perturb_negation(s, lex, seed),
        Phenomenon::NumberError => perturb_number(s, seed),
        Phenomenon::PronounError => perturb_pronoun(s, lex, seed),
        Phenomenon::NameError => perturb_name(s, lex, seed),
        Phenomenon::Jumbling => perturb_jumble(s, seed),
        Phenomenon::SpellingError => perturb_typo(s, seed),
        Phenomenon::SubjectVerbDisagreement => perturb_svd(s, lex, seed),
    }
}

/// Tokenizes `text` against `lex` and applies one template.
pub fn perturb_text(text: &str, phenomenon: Phenomenon, lex: &Lexicon, seed: u64) -> Result<PerturbationResult> {
    perturb(&tokenize_with(text, None, lex)?, phenomenon, lex, seed)
}

/// Seed for step `i` of a composition.
fn step_seed(seed: u64, i: usize) -> u64 {
    if i == 0 {
        seed
    } else {
        seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Applies `kinds` left to right, each to the previous output. Edits are
/// rebased onto the original text; when two steps touch the same region
/// those steps are recorded as one merged edit.
pub fn compose(
    s: &TokenizedSentence,
    kinds: &[Phenomenon],
    lex: &Lexicon,
    seed: u64,
) -> Result<PerturbationResult> {
    let (&first, rest) = kinds
        .split_first()
        .ok_or_else(|| Error::Invalid("compose needs at least one phenomenon".into()))?;
    let mut acc = perturb(s, first, lex, step_seed(seed, 0))?;
    for (i, &kind) in rest.iter().enumerate() {
        let current = tokenize_with(&acc.perturbed, None, lex)?;
        let step = perturb(&current, kind, lex, step_seed(seed, i + 1))?;
        let edits = rebase_edits(&acc.original, &acc.edits, &step.edits, &step.perturbed);
        acc = PerturbationResult {
            original: acc.original,
            perturbed: step.perturbed,
            phenomenon: PhenomenonSet(kinds[..i + 2].to_vec()),
            edits,
            rng_seed: seed,
        };
    }
    acc.rng_seed = seed;
    if acc.perturbed == acc.original {
        return Err(Error::NotApplicable("composition restored the original".into()));
    }
    Ok(acc)
}

/// Expresses `later` (edits against the text produced by `prior`) as edits
/// against `original`.
fn rebase_edits(original: &str, prior: &[Edit], later: &[Edit], final_text: &str) -> Vec<Edit> {
    // Intermediate-text span of each prior edit.
    let mut mapped = Vec::with_capacity(prior.len());
    let mut shift: isize = 0;
    for e in prior {
        let start = (e.span.start as isize + shift) as usize;
        mapped.push((start, start + e.replacement.len()));
        shift += e.replacement.len() as isize - e.span.len() as isize;
    }
    let mut out: Vec<Edit> = prior.to_vec();
    for l in later {
        let (a, b) = (l.span.start, l.span.end);
        let conflict = mapped.iter().any(|&(s, e)| {
            let overlaps = a.max(s) < b.min(e);
            let inside = a == b && s < a && a < e;
            let straddles = s == e && a < s && s < b;
            let double_insert = a == b && s == e && a == s;
            overlaps || inside || straddles || double_insert
        });
        if conflict {
            return vec![single_edit(original, final_text)];
        }
        // Offset accumulated by prior edits that end at or before `a`.
        let offset: isize = prior
            .iter()
            .zip(&mapped)
            .filter(|(_, &(_, e))| e <= a)
            .map(|(p, &(s, e))| (e - s) as isize - p.span.len() as isize)
            .sum();
        let start = (a as isize - offset) as usize;
        let end = (b as isize - offset) as usize;
        out.push(Edit::new(start, end, l.replacement.clone()));
    }
    out.sort_by_key(|e| (e.span.start, e.span.end));
    out
}

fn single_edit(original: &str, target: &str) -> Edit {
    let prefix = original
        .char_indices()
        .zip(target.chars())
        .take_while(|((_, a), b)| a == b)
        .last()
        .map_or(0, |((i, a), _)| i + a.len_utf8());
    let o_rest = &original[prefix..];
    let t_rest = &target[prefix..];
    let suffix = o_rest
        .chars()
        .rev()
        .zip(t_rest.chars().rev())
        .take_while(|(a, b)| a == b)
        .map(|(a, _)| a.len_utf8())
        .sum::<usize>();
    Edit::new(
        prefix,
        original.len() - suffix,
        &target[prefix..target.len() - suffix],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_phenomena_nine_adequacy() {
        assert_eq!(Phenomenon::ALL.len(), 12);
        let adequacy = Phenomenon::ALL.iter().filter(|p| p.category() == Category::Adequacy).count();
        assert_eq!(adequacy, 9);
        assert!(Phenomenon::ALL[9..].iter().all(|p| p.category() == Category::Fluency));
    }

    #[test]
    fn names_round_trip() {
        for p in Phenomenon::ALL {
            assert_eq!(p.name().parse::<Phenomenon>().unwrap(), p);
        }
        let err = "colour".parse::<Phenomenon>().unwrap_err().to_string();
        assert!(err.contains("mismatch_noun") && err.contains("svd"));
        let set: PhenomenonSet = "number+negation".parse().unwrap();
        assert_eq!(set.0, [Phenomenon::NumberError, Phenomenon::Negation]);
        assert_eq!(set.label(), "number+negation");
    }

    #[test]
    fn apply_edits_rejects_overlap() {
        let edits = [Edit::new(0, 3, "x"), Edit::new(2, 4, "y")];
        assert!(apply_edits("abcdef", &edits).is_err());
        let edits = [Edit::new(0, 0, "<"), Edit::new(3, 3, "|"), Edit::new(6, 6, ">")];
        assert_eq!(apply_edits("abcdef", &edits).unwrap(), "<abc|def>");
    }

    #[test]
    fn rebase_shifts_later_edits() {
        let original = "a 100 b will c";
        let prior = [Edit::new(2, 5, "7")];
        let mid = apply_edits(original, &prior).unwrap();
        assert_eq!(mid, "a 7 b will c");
        let later = [Edit::new(6, 10, "won't")];
        let fin = apply_edits(&mid, &later).unwrap();
        let rebased = rebase_edits(original, &prior, &later, &fin);
        assert_eq!(rebased.len(), 2);
        assert_eq!(apply_edits(original, &rebased).unwrap(), fin);
    }

    #[test]
    fn rebase_merges_conflicts() {
        let original = "one two three";
        let prior = [Edit::new(4, 7, "TWO")];
        let mid = apply_edits(original, &prior).unwrap();
        let later = [Edit::new(5, 6, "w")];
        let fin = apply_edits(&mid, &later).unwrap();
        let rebased = rebase_edits(original, &prior, &later, &fin);
        assert_eq!(rebased.len(), 1);
        assert_eq!(apply_edits(original, &rebased).unwrap(), fin);
    }
}
