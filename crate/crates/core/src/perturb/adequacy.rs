//! Templates that change what the sentence says.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::lexicon::{
    guess_verb, inflect_noun, inflect_verb, is_participle_like, match_case, Lexicon, NounNumber,
    PronounSlot, VerbForm,
};
use super::{rng_for, Edit, PerturbationResult, Phenomenon};
use crate::error::{Error, Result};
use crate::textops::{random_number_same_format, NumberLiteral, Pos, TokenKind, TokenizedSentence};

const MONTHS: [&str; 24] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep",
    "sept", "oct", "nov", "dec",
];

const DO_FORMS: [(&str, VerbForm); 3] = [
    ("does", VerbForm::ThirdSingular),
    ("do", VerbForm::Base),
    ("did", VerbForm::Past),
];

const NEGATED_DO: [(&str, VerbForm); 3] = [
    ("doesn't", VerbForm::ThirdSingular),
    ("don't", VerbForm::Base),
    ("didn't", VerbForm::Past),
];

/// Contractions recognized for removal even when the rule table spells the
/// negation out.
const EXTRA_NEGATIONS: [(&str, &str); 15] = [
    ("isn't", "is"),
    ("aren't", "are"),
    ("wasn't", "was"),
    ("weren't", "were"),
    ("cannot", "can"),
    ("can't", "can"),
    ("won't", "will"),
    ("wouldn't", "would"),
    ("couldn't", "could"),
    ("shouldn't", "should"),
    ("mustn't", "must"),
    ("hasn't", "has"),
    ("haven't", "have"),
    ("hadn't", "had"),
    ("shan't", "shall"),
];

const HAVE_FAMILY: [(&str, VerbForm); 3] = [
    ("has", VerbForm::ThirdSingular),
    ("have", VerbForm::Base),
    ("had", VerbForm::Past),
];

fn not_applicable(phenomenon: Phenomenon, why: &str) -> Error {
    Error::NotApplicable(format!("{phenomenon}: {why}"))
}

fn indices_where(s: &TokenizedSentence, pred: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..s.tokens.len()).filter(|&i| pred(i)).collect()
}

fn next_lexical(s: &TokenizedSentence, i: usize) -> Option<usize> {
    (i + 1..s.tokens.len()).find(|&j| s.tokens[j].is_lexical())
}

fn prev_lexical(s: &TokenizedSentence, i: usize) -> Option<usize> {
    (0..i).rev().find(|&j| s.tokens[j].is_lexical())
}

fn noun_analysis(lex: &Lexicon, lower: &str) -> (String, NounNumber) {
    match lex.analyze_noun(lower) {
        Some((base, number)) => (base.to_string(), number),
        None if lower.len() > 3 && lower.ends_with('s') && !lower.ends_with("ss") => {
            (lower[..lower.len() - 1].to_string(), NounNumber::Plural)
        }
        None => (lower.to_string(), NounNumber::Singular),
    }
}

fn verb_analysis(lex: &Lexicon, lower: &str) -> (String, VerbForm) {
    match lex.analyze_verb(lower) {
        Some((base, form)) => (base.to_string(), form),
        None => guess_verb(lower),
    }
}

/// Inserts "and <noun>" after a randomly chosen noun.
pub fn perturb_addition(s: &TokenizedSentence, lex: &Lexicon, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::Addition;
    let hosts = indices_where(s, |i| s.tokens[i].pos == Some(Pos::Noun));
    let mut rng = rng_for(seed);
    let &host = hosts.choose(&mut rng).ok_or_else(|| not_applicable(phen, "no noun"))?;
    let (base, number) = noun_analysis(lex, &s.tokens[host].lower());
    let pool: Vec<&String> = lex.nouns.iter().filter(|n| **n != base).collect();
    let noun = pool.choose(&mut rng).ok_or_else(|| not_applicable(phen, "empty noun pool"))?;
    let at = s.tokens[host].span.end;
    let edit = Edit::new(at, at, format!(" and {}", inflect_noun(noun, number)));
    PerturbationResult::from_edits(s, phen, vec![edit], seed)
}

/// Drops `max(1, round(rate * W))` of the W words, rate ~ U[0.01, 0.20].
pub fn perturb_omission(s: &TokenizedSentence, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::Omission;
    let words = indices_where(s, |i| s.tokens[i].is_lexical());
    if words.len() < 5 {
        return Err(not_applicable(phen, "fewer than 5 words"));
    }
    let mut rng = rng_for(seed);
    let rate: f64 = rng.gen_range(0.01..=0.20);
    let k = ((rate * words.len() as f64).round() as usize).max(1);
    let mut removed = vec![false; s.tokens.len()];
    for pick in index::sample(&mut rng, words.len(), k) {
        removed[words[pick]] = true;
    }
    let mut edits = Vec::new();
    let mut i = 0;
    while i < s.tokens.len() {
        if !removed[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < s.tokens.len() && removed[j + 1] {
            j += 1;
        }
        let edit = if i > 0 {
            Edit::new(s.tokens[i - 1].span.end, s.tokens[j].span.end, "")
        } else {
            let end = s.tokens.get(j + 1).map_or(s.tokens[j].span.end, |t| t.span.start);
            Edit::new(s.tokens[0].span.start, end, "")
        };
        edits.push(edit);
        i = j + 1;
    }
    PerturbationResult::from_edits(s, phen, edits, seed)
}

/// Replaces one noun, verb or adjective with a different pool word of the
/// same part of speech, keeping its inflection.
pub fn perturb_mismatch(
    s: &TokenizedSentence,
    pos: Pos,
    lex: &Lexicon,
    seed: u64,
) -> Result<PerturbationResult> {
    let (phen, pool) = match pos {
        Pos::Noun => (Phenomenon::MismatchNoun, &lex.nouns),
        Pos::Verb => (Phenomenon::MismatchVerb, &lex.verbs),
        Pos::Adjective => (Phenomenon::MismatchAdj, &lex.adjectives),
        other => {
            return Err(Error::Invalid(format!("mismatch is defined for nouns, verbs and adjectives, not {other:?}")))
        }
    };
    let targets = indices_where(s, |i| s.tokens[i].pos == Some(pos));
    let mut rng = rng_for(seed);
    let &target = targets
        .choose(&mut rng)
        .ok_or_else(|| not_applicable(phen, "no token with the requested part of speech"))?;
    let tok = &s.tokens[target];
    let lower = tok.lower();
    let inflect: Box<dyn Fn(&str) -> String> = match pos {
        Pos::Noun => {
            let (_, number) = noun_analysis(lex, &lower);
            Box::new(move |w| inflect_noun(w, number))
        }
        Pos::Verb => {
            let (_, form) = verb_analysis(lex, &lower);
            Box::new(move |w| inflect_verb(w, form))
        }
        _ => Box::new(|w| w.to_string()),
    };
    let base = match pos {
        Pos::Noun => noun_analysis(lex, &lower).0,
        Pos::Verb => verb_analysis(lex, &lower).0,
        _ => lower.clone(),
    };
    let choices: Vec<String> = pool
        .iter()
        .filter(|w| **w != base)
        .map(|w| inflect(w))
        .filter(|w| *w != lower)
        .collect();
    let word = choices
        .choose(&mut rng)
        .ok_or_else(|| not_applicable(phen, "no alternative in the pool"))?;
    let edit = Edit::new(tok.span.start, tok.span.end, match_case(&tok.surface, word));
    PerturbationResult::from_edits(s, phen, vec![edit], seed)
}

/// Removes the negation of the finite verb if there is one, otherwise adds
/// one via the rule table or do-support.
pub fn perturb_negation(s: &TokenizedSentence, lex: &Lexicon, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::Negation;
    let edit = remove_negation(s, lex)
        .or_else(|| add_negation(s, lex))
        .ok_or_else(|| not_applicable(phen, "no negation rule matches"))?;
    PerturbationResult::from_edits(s, phen, vec![edit], seed)
}

fn is_aux(lex: &Lexicon, lower: &str) -> bool {
    lex.negation_rules().iter().any(|(src, _)| src == lower)
        || DO_FORMS.iter().any(|(d, _)| *d == lower)
}

/// `doesn't like` -> `likes`, spanning both tokens.
fn undo_do_support(s: &TokenizedSentence, lex: &Lexicon, aux: usize, form: VerbForm) -> Option<Edit> {
    let verb = next_lexical(s, aux)?;
    let vt = &s.tokens[verb];
    if vt.kind != TokenKind::Word || lex.is_function_word(&vt.lower()) || lex.is_pronoun(&vt.lower()) {
        return None;
    }
    let (base, _) = verb_analysis(lex, &vt.lower());
    let inflected = inflect_verb(&base, form);
    Some(Edit::new(
        s.tokens[aux].span.start,
        vt.span.end,
        match_case(&s.tokens[aux].surface, &inflected),
    ))
}

fn remove_negation(s: &TokenizedSentence, lex: &Lexicon) -> Option<Edit> {
    let mut contractions: Vec<(String, String)> = lex
        .negation_rules()
        .iter()
        .filter(|(_, neg)| !neg.contains(' '))
        .map(|(pos, neg)| (neg.to_lowercase(), pos.clone()))
        .collect();
    contractions.extend(EXTRA_NEGATIONS.iter().map(|(n, p)| (n.to_string(), p.to_string())));

    for (i, tok) in s.tokens.iter().enumerate() {
        let lower = tok.lower();
        if let Some(&(_, form)) = NEGATED_DO.iter().find(|(d, _)| *d == lower) {
            if let Some(edit) = undo_do_support(s, lex, i, form) {
                return Some(edit);
            }
            let plain = &lower[..lower.len() - 3];
            return Some(Edit::new(tok.span.start, tok.span.end, match_case(&tok.surface, plain)));
        }
        if let Some((_, positive)) = contractions.iter().find(|(neg, _)| *neg == lower) {
            return Some(Edit::new(tok.span.start, tok.span.end, match_case(&tok.surface, positive)));
        }
        if lower == "not" {
            let Some(aux) = prev_lexical(s, i) else { continue };
            let aux_lower = s.tokens[aux].lower();
            if !is_aux(lex, &aux_lower) {
                continue;
            }
            if let Some(&(_, form)) = DO_FORMS.iter().find(|(d, _)| *d == aux_lower) {
                if let Some(mut edit) = undo_do_support(s, lex, i, form) {
                    edit.span.start = s.tokens[aux].span.start;
                    edit.replacement = match_case(&s.tokens[aux].surface, &edit.replacement);
                    return Some(edit);
                }
            }
            return Some(Edit::new(s.tokens[aux].span.end, tok.span.end, ""));
        }
    }
    None
}

fn add_negation(s: &TokenizedSentence, lex: &Lexicon) -> Option<Edit> {
    for (i, tok) in s.tokens.iter().enumerate() {
        if !tok.is_word() {
            continue;
        }
        let lower = tok.lower();
        let Some((_, negated)) = lex.negation_rules().iter().find(|(src, _)| *src == lower) else {
            continue;
        };
        if let Some(&(_, form)) = HAVE_FAMILY.iter().find(|(h, _)| *h == lower) {
            let participle = next_lexical(s, i).is_some_and(|j| is_participle_like(lex, &s.tokens[j].lower()));
            if !participle {
                // Main-verb "has": do-support on "have".
                let aux = NEGATED_DO.iter().find(|(_, f)| *f == form).expect("form").0;
                let text = format!("{aux} have");
                return Some(Edit::new(tok.span.start, tok.span.end, match_case(&tok.surface, &text)));
            }
        }
        return Some(Edit::new(tok.span.start, tok.span.end, match_case(&tok.surface, negated)));
    }
    // Do-support on the first finite main verb.
    for (i, tok) in s.tokens.iter().enumerate() {
        if tok.pos != Some(Pos::Verb) {
            continue;
        }
        let prev = prev_lexical(s, i).map(|p| &s.tokens[p]);
        if prev.is_some_and(|p| p.lower() == "to") {
            continue;
        }
        let (base, form) = verb_analysis(lex, &tok.lower());
        let aux = match form {
            VerbForm::ThirdSingular => "doesn't",
            VerbForm::Past => "didn't",
            VerbForm::Base if prev.is_some_and(|p| matches!(p.pos, Some(Pos::Pronoun | Pos::Noun))) => "don't",
            _ => continue,
        };
        let text = format!("{aux} {base}");
        return Some(Edit::new(tok.span.start, tok.span.end, match_case(&tok.surface, &text)));
    }
    None
}

/// Years (4-digit integers in 1000..=2100) and numbers next to a month name.
pub fn is_date_like(s: &TokenizedSentence, i: usize) -> bool {
    let tok = &s.tokens[i];
    if tok.kind != TokenKind::Number {
        return false;
    }
    if let Some(lit) = NumberLiteral::parse(&tok.surface) {
        if lit.sign.is_none() && !lit.grouped && lit.int_digits.len() == 4 {
            if let Some(v) = lit.as_integer() {
                if (1000..=2100).contains(&v) {
                    return true;
                }
            }
        }
    }
    let near_month = |j: Option<usize>| {
        j.is_some_and(|j| {
            let l = s.tokens[j].lower();
            MONTHS.contains(&l.trim_end_matches('.'))
        })
    };
    near_month(prev_lexical(s, i)) || near_month(next_lexical(s, i))
}

/// Replaces every non-date number with a random number of the same format.
pub fn perturb_number(s: &TokenizedSentence, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::NumberError;
    let targets = indices_where(s, |i| s.tokens[i].kind == TokenKind::Number && !is_date_like(s, i));
    if targets.is_empty() {
        return Err(not_applicable(phen, "no non-date number"));
    }
    let mut rng = rng_for(seed);
    let edits = targets
        .into_iter()
        .map(|i| {
            let tok = &s.tokens[i];
            random_number_same_format(&tok.surface, &mut rng)
                .map(|n| Edit::new(tok.span.start, tok.span.end, n))
        })
        .collect::<Result<Vec<_>>>()?;
    PerturbationResult::from_edits(s, phen, edits, seed)
}

fn pronoun_slot(s: &TokenizedSentence, lex: &Lexicon, i: usize, lower: &str) -> PronounSlot {
    if !lex.pronoun_is_ambiguous(lower) {
        return PronounSlot::Any;
    }
    let before_content_word = s.tokens.get(i + 1).is_some_and(|t| {
        t.is_lexical() && !lex.is_function_word(&t.lower()) && !lex.is_pronoun(&t.lower())
    });
    if before_content_word {
        PronounSlot::Determiner
    } else if lex.pronoun_targets(lower, PronounSlot::Object).is_some() {
        PronounSlot::Object
    } else {
        PronounSlot::Independent
    }
}

/// Replaces every covered pronoun, consistently per (pronoun, slot).
pub fn perturb_pronoun(s: &TokenizedSentence, lex: &Lexicon, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::PronounError;
    let mut rng = rng_for(seed);
    let mut chosen: BTreeMap<(String, PronounSlot), String> = BTreeMap::new();
    let mut edits = Vec::new();
    for (i, tok) in s.tokens.iter().enumerate() {
        if !tok.is_word() {
            continue;
        }
        let lower = tok.lower();
        let slot = pronoun_slot(s, lex, i, &lower);
        let Some(targets) = lex.pronoun_targets(&lower, slot) else { continue };
        let target = chosen
            .entry((lower.clone(), slot))
            .or_insert_with(|| targets.choose(&mut rng).expect("non-empty").clone());
        edits.push(Edit::new(tok.span.start, tok.span.end, match_case(&tok.surface, target)));
    }
    if edits.is_empty() {
        return Err(not_applicable(phen, "no covered pronoun"));
    }
    PerturbationResult::from_edits(s, phen, edits, seed)
}

/// Replaces exactly one name occurrence with another name of the same gender.
pub fn perturb_name(s: &TokenizedSentence, lex: &Lexicon, seed: u64) -> Result<PerturbationResult> {
    let phen = Phenomenon::NameError;
    let found = indices_where(s, |i| s.tokens[i].is_word() && lex.gender_of(&s.tokens[i].surface).is_some());
    let mut rng = rng_for(seed);
    let &target = found.choose(&mut rng).ok_or_else(|| not_applicable(phen, "no known name"))?;
    let tok = &s.tokens[target];
    let gender = lex.gender_of(&tok.surface).expect("filtered");
    let pool: Vec<&String> = lex.names_of(gender).iter().filter(|n| **n != tok.surface).collect();
    let name = pool.choose(&mut rng).ok_or_else(|| not_applicable(phen, "single-name pool"))?;
    PerturbationResult::from_edits(s, phen, vec![Edit::new(tok.span.start, tok.span.end, name.as_str())], seed)
}
