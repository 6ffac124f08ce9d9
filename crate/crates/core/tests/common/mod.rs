//! Synthetic sentences shared by the integration tests and the acceptance run.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NAMES: &[&str] = &["Mary", "Patricia", "Jennifer", "Linda", "James", "Robert", "John", "Michael"];
pub const NOUNS: &[&str] = &["house", "market", "company", "student", "teacher", "doctor", "farmer", "car", "tree", "city"];
pub const ADJECTIVES: &[&str] = &["old", "new", "strong", "weak", "happy", "important", "large", "small"];
pub const MONTHS: &[&str] = &["January", "March", "May", "July", "October", "December"];
const AUX: &[&str] = &["will", "can", "should", "could", "might"];
const BASE_VERBS: &[&str] = &["visit", "watch", "help", "call", "need", "want"];
const PAST_VERBS: &[&str] = &["visited", "watched", "helped", "called", "bought", "sold", "built"];
const SUBJECTS: &[&str] = &["He", "She", "They", "We"];
const OBJECTS: &[&str] = &["him", "her", "them", "us"];

fn pick<'a>(xs: &[&'a str], rng: &mut ChaCha8Rng) -> &'a str {
    xs.choose(rng).copied().expect("non-empty pool")
}

fn plural(noun: &str) -> String {
    if noun.ends_with('y') && !noun.ends_with("ey") {
        format!("{}ies", &noun[..noun.len() - 1])
    } else {
        format!("{noun}s")
    }
}

/// A count that is never mistaken for a year.
fn count(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(2..100).to_string(),
        1 => format!("{}.{}", rng.gen_range(1..50), rng.gen_range(1..10)),
        2 => {
            let n: u32 = rng.gen_range(10_000..9_999_999);
            let digits = n.to_string();
            let mut out = String::new();
            for (i, c) in digits.chars().enumerate() {
                if i > 0 && (digits.len() - i) % 3 == 0 {
                    out.push(',');
                }
                out.push(c);
            }
            out
        }
        _ => rng.gen_range(101..999).to_string(),
    }
}

/// Varied templated sentences mixing names, pronouns, counts, years and
/// month dates, modal and finite verbs.
pub fn corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| match i % 5 {
            0 => format!(
                "{} {} {} {} {} {} in {}.",
                pick(NAMES, &mut rng),
                pick(AUX, &mut rng),
                pick(BASE_VERBS, &mut rng),
                count(&mut rng),
                pick(ADJECTIVES, &mut rng),
                plural(pick(NOUNS, &mut rng)),
                rng.gen_range(1990..2030)
            ),
            1 => format!(
                "{} {} the {} {} on {} {}.",
                pick(SUBJECTS, &mut rng),
                pick(PAST_VERBS, &mut rng),
                pick(ADJECTIVES, &mut rng),
                pick(NOUNS, &mut rng),
                pick(MONTHS, &mut rng),
                rng.gen_range(1..29)
            ),
            2 => format!(
                "The {} is {} and {} likes the {} {} {}.",
                pick(NOUNS, &mut rng),
                pick(ADJECTIVES, &mut rng),
                pick(NAMES, &mut rng),
                count(&mut rng),
                pick(ADJECTIVES, &mut rng),
                plural(pick(NOUNS, &mut rng))
            ),
            3 => {
                let name = pick(NAMES, &mut rng);
                format!(
                    "{name} told {} that {} {} were sold, so {name} has called the {}.",
                    pick(OBJECTS, &mut rng),
                    count(&mut rng),
                    plural(pick(NOUNS, &mut rng)),
                    pick(NOUNS, &mut rng)
                )
            }
            _ => format!(
                "{} {} {} {} {} for {} {} last year.",
                pick(SUBJECTS, &mut rng),
                pick(PAST_VERBS, &mut rng),
                count(&mut rng),
                pick(ADJECTIVES, &mut rng),
                plural(pick(NOUNS, &mut rng)),
                pick(NAMES, &mut rng),
                pick(&["quickly", "together"], &mut rng)
            ),
        })
        .collect()
}

use menli_core::perturb::{Lexicon, Phenomenon, PerturbationResult};
use menli_core::textops::{levenshtein, tokenize, NumberLiteral, TokenKind};

const COVERED_PRONOUNS: &[&str] = &[
    "he", "she", "we", "they", "him", "her", "us", "them", "me", "his", "hers", "my", "our", "their", "ours", "theirs",
    "himself", "herself", "ourselves", "themselves",
];

fn toks(text: &str) -> Vec<(String, TokenKind)> {
    tokenize(text, None).expect("tokenizable").tokens.into_iter().map(|t| (t.surface, t.kind)).collect()
}

fn surfaces(t: &[(String, TokenKind)]) -> Vec<&str> {
    t.iter().map(|(s, _)| s.as_str()).collect()
}

fn sorted(mut v: Vec<&str>) -> Vec<&str> {
    v.sort_unstable();
    v
}

fn differing(a: &[(String, TokenKind)], b: &[(String, TokenKind)]) -> Vec<usize> {
    (0..a.len()).filter(|&i| a[i].0 != b[i].0).collect()
}

fn negation_markers(t: &[(String, TokenKind)]) -> usize {
    t.iter().filter(|(s, _)| s.eq_ignore_ascii_case("not") || s.to_ascii_lowercase().ends_with("n't")).count()
}

fn looks_like_date(t: &[(String, TokenKind)], i: usize) -> bool {
    let near_month = |j: Option<usize>| j.and_then(|j| t.get(j)).is_some_and(|(s, _)| MONTHS.contains(&s.as_str()));
    let year = t[i].0.len() == 4 && t[i].0.parse::<u32>().is_ok_and(|y| (1000..=2100).contains(&y));
    year || near_month(i.checked_sub(1)) || near_month(Some(i + 1))
}

/// Checks the edit shape of one perturbation against its phenomenon.
pub fn check_shape(phenomenon: Phenomenon, r: &PerturbationResult, lex: &Lexicon) -> Result<(), String> {
    if r.perturbed == r.original {
        return Err("unchanged".into());
    }
    if !r.replays() {
        return Err("edits do not replay".into());
    }
    let (a, b) = (toks(&r.original), toks(&r.perturbed));
    let same_len = |what: &str| if a.len() == b.len() { Ok(()) } else { Err(format!("{what}: token count changed")) };
    let single_word = |what: &str| -> Result<usize, String> {
        same_len(what)?;
        match differing(&a, &b).as_slice() {
            [i] if a[*i].1 == TokenKind::Word => Ok(*i),
            d => Err(format!("{what}: {} tokens differ", d.len())),
        }
    };
    match phenomenon {
        Phenomenon::Addition => {
            if r.edits.len() != 1 || !r.edits[0].span.is_empty() {
                return Err("addition must be one insertion".into());
            }
            let added: Vec<&str> = r.edits[0].replacement.split_whitespace().collect();
            let [and, noun] = added.as_slice() else { return Err(format!("inserted {added:?}")) };
            let host = r.original[..r.edits[0].span.start].split_whitespace().last().unwrap_or_default();
            if *and != "and" || noun.eq_ignore_ascii_case(host) {
                return Err(format!("inserted {added:?} after {host:?}"));
            }
            let mut expect = surfaces(&a);
            expect.extend(["and", noun]);
            if sorted(expect) != sorted(surfaces(&b)) {
                return Err("addition changed other tokens".into());
            }
        }
        Phenomenon::Omission => {
            let words = |t: &[(String, TokenKind)]| -> Vec<String> {
                t.iter().filter(|(_, k)| *k != TokenKind::Punctuation).map(|(s, _)| s.clone()).collect()
            };
            let puncts = |t: &[(String, TokenKind)]| -> Vec<String> {
                t.iter().filter(|(_, k)| *k == TokenKind::Punctuation).map(|(s, _)| s.clone()).collect()
            };
            let (wa, wb) = (words(&a), words(&b));
            let dropped = wa.len() - wb.len().min(wa.len());
            let cap = ((wa.len() as f64) * 0.2).round().max(1.0) as usize;
            if dropped == 0 || dropped > cap {
                return Err(format!("dropped {dropped} of {} words", wa.len()));
            }
            let mut it = wa.iter();
            if !wb.iter().all(|w| it.any(|x| x == w)) {
                return Err("remaining words out of order".into());
            }
            if puncts(&a) != puncts(&b) {
                return Err("punctuation touched".into());
            }
        }
        Phenomenon::MismatchNoun | Phenomenon::MismatchVerb | Phenomenon::MismatchAdj => {
            single_word("mismatch")?;
        }
        Phenomenon::Negation => {
            if a.len().abs_diff(b.len()) > 2 {
                return Err("negation changed too many tokens".into());
            }
            if negation_markers(&a) == negation_markers(&b) {
                return Err("no negation added or removed".into());
            }
        }
        Phenomenon::NumberError => {
            same_len("number")?;
            let mut replaced = 0;
            for i in 0..a.len() {
                let changed = a[i].0 != b[i].0;
                if a[i].1 != TokenKind::Number {
                    if changed {
                        return Err(format!("non-number {:?} changed", a[i].0));
                    }
                    continue;
                }
                let date = looks_like_date(&a, i);
                if date == changed {
                    return Err(format!("number {:?} (date: {date}) changed: {changed}", a[i].0));
                }
                if changed {
                    let (x, y) = (NumberLiteral::parse(&a[i].0).unwrap(), NumberLiteral::parse(&b[i].0).unwrap());
                    let shape = |n: &NumberLiteral| (n.sign, n.grouped, n.int_digits.len(), n.frac_digits.as_ref().map(|f| f.len()));
                    if shape(&x) != shape(&y) {
                        return Err(format!("{:?} -> {:?} changed shape", a[i].0, b[i].0));
                    }
                    replaced += 1;
                }
            }
            if replaced == 0 {
                return Err("no number replaced".into());
            }
        }
        Phenomenon::PronounError => {
            same_len("pronoun")?;
            for i in 0..a.len() {
                let (x, y) = (a[i].0.to_lowercase(), b[i].0.to_lowercase());
                let covered = COVERED_PRONOUNS.contains(&x.as_str());
                if covered != (x != y) {
                    return Err(format!("pronoun slot {i}: {:?} -> {:?}", a[i].0, b[i].0));
                }
                if covered && !lex.is_pronoun(&y) {
                    return Err(format!("{y:?} is not a pronoun"));
                }
                if a[i].0.starts_with(char::is_uppercase) != b[i].0.starts_with(char::is_uppercase) {
                    return Err(format!("capitalization lost: {:?} -> {:?}", a[i].0, b[i].0));
                }
            }
        }
        Phenomenon::NameError => {
            if r.edits.len() != 1 {
                return Err(format!("{} name edits", r.edits.len()));
            }
            let i = single_word("name")?;
            let (old, new) = (&a[i].0, &b[i].0);
            match (lex.gender_of(old), lex.gender_of(new)) {
                (Some(g), Some(h)) if g == h => {}
                _ => return Err(format!("{old} -> {new} is not a same-gender name swap")),
            }
        }
        Phenomenon::Jumbling => {
            if sorted(surfaces(&a)) != sorted(surfaces(&b)) {
                return Err("jumbling changed the token multiset".into());
            }
            if a.last().map(|t| &t.0) != b.last().map(|t| &t.0) {
                return Err("terminal punctuation moved".into());
            }
        }
        Phenomenon::SpellingError => {
            let i = single_word("typo")?;
            let (x, y): (Vec<char>, Vec<char>) = (a[i].0.chars().collect(), b[i].0.chars().collect());
            if x.len() < 4 || levenshtein(&x, &y) > 2 || x.len().abs_diff(y.len()) > 1 {
                return Err(format!("typo {:?} -> {:?}", a[i].0, b[i].0));
            }
        }
        Phenomenon::SubjectVerbDisagreement => {
            single_word("agreement")?;
        }
    }
    Ok(())
}

// Definitional correlation formulas; `None` where the coefficient is undefined.

pub fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// Rank = number of smaller values plus the mean position among equals.
pub fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

pub fn oracle_kendall(x: &[f64], y: &[f64]) -> Option<f64> {
    let sign = |a: f64, b: f64| (a > b) as i64 - (a < b) as i64;
    let (mut num, mut untied_x, mut untied_y) = (0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let (sx, sy) = (sign(x[i], x[j]), sign(y[i], y[j]));
            num += sx * sy;
            untied_x += sx * sx;
            untied_y += sy * sy;
        }
    }
    (untied_x > 0 && untied_y > 0).then(|| num as f64 / ((untied_x as f64) * (untied_y as f64)).sqrt())
}

/// Compares an implementation result with an oracle value: both undefined,
/// or both defined and within `tol`.
pub fn agrees(got: &menli_core::Result<f64>, want: Option<f64>, tol: f64) -> bool {
    match (got, want) {
        (Ok(g), Some(w)) => (g - w).abs() < tol,
        (Err(_), None) => true,
        _ => false,
    }
}

/// A random valid triple.
pub fn random_triple(rng: &mut ChaCha8Rng) -> menli_core::NliTriple {
    let (a, b): (f64, f64) = (rng.gen(), rng.gen());
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    menli_core::NliTriple::new(lo, hi - lo, 1.0 - hi).expect("valid triple")
}
