//! Word pools and rule tables that drive the perturbation templates.
//!
//! Every table is a plain-text file: one word per line for pools, and
//! `source<TAB>target` pairs for the pronoun map and negation rules. Lines
//! starting with `#` are comments. The built-in tables are compiled in and
//! any of them can be replaced by a file of the same name in a directory
//! passed to [`Lexicon::from_dir`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::textops::{Pos, PosLookup};

pub const NOUNS_FILE: &str = "nouns.txt";
pub const VERBS_FILE: &str = "verbs.txt";
pub const ADJECTIVES_FILE: &str = "adjectives.txt";
pub const FEMALE_NAMES_FILE: &str = "names_female.txt";
pub const MALE_NAMES_FILE: &str = "names_male.txt";
pub const FUNCTION_WORDS_FILE: &str = "function_words.txt";
pub const PRONOUNS_FILE: &str = "pronouns.tsv";
pub const NEGATION_FILE: &str = "negation.tsv";

const BUILTIN: [(&str, &str); 8] = [
    (NOUNS_FILE, include_str!("../../data/nouns.txt")),
    (VERBS_FILE, include_str!("../../data/verbs.txt")),
    (ADJECTIVES_FILE, include_str!("../../data/adjectives.txt")),
    (FEMALE_NAMES_FILE, include_str!("../../data/names_female.txt")),
    (MALE_NAMES_FILE, include_str!("../../data/names_male.txt")),
    (FUNCTION_WORDS_FILE, include_str!("../../data/function_words.txt")),
    (PRONOUNS_FILE, include_str!("../../data/pronouns.tsv")),
    (NEGATION_FILE, include_str!("../../data/negation.tsv")),
];

/// Pronouns that are recognized (tagged) but never rewritten.
const UNMAPPED_PRONOUNS: [&str; 7] = ["i", "you", "it", "its", "your", "yours", "myself"];

/// base, third singular, past, past participle, gerund
const IRREGULAR_VERBS: [[&str; 5]; 40] = [
    ["go", "goes", "went", "gone", "going"],
    ["say", "says", "said", "said", "saying"],
    ["make", "makes", "made", "made", "making"],
    ["take", "takes", "took", "taken", "taking"],
    ["come", "comes", "came", "come", "coming"],
    ["see", "sees", "saw", "seen", "seeing"],
    ["know", "knows", "knew", "known", "knowing"],
    ["get", "gets", "got", "gotten", "getting"],
    ["give", "gives", "gave", "given", "giving"],
    ["find", "finds", "found", "found", "finding"],
    ["think", "thinks", "thought", "thought", "thinking"],
    ["tell", "tells", "told", "told", "telling"],
    ["become", "becomes", "became", "become", "becoming"],
    ["leave", "leaves", "left", "left", "leaving"],
    ["feel", "feels", "felt", "felt", "feeling"],
    ["bring", "brings", "brought", "brought", "bringing"],
    ["begin", "begins", "began", "begun", "beginning"],
    ["keep", "keeps", "kept", "kept", "keeping"],
    ["hold", "holds", "held", "held", "holding"],
    ["write", "writes", "wrote", "written", "writing"],
    ["stand", "stands", "stood", "stood", "standing"],
    ["hear", "hears", "heard", "heard", "hearing"],
    ["meet", "meets", "met", "met", "meeting"],
    ["run", "runs", "ran", "run", "running"],
    ["pay", "pays", "paid", "paid", "paying"],
    ["sit", "sits", "sat", "sat", "sitting"],
    ["speak", "speaks", "spoke", "spoken", "speaking"],
    ["lead", "leads", "led", "led", "leading"],
    ["grow", "grows", "grew", "grown", "growing"],
    ["lose", "loses", "lost", "lost", "losing"],
    ["fall", "falls", "fell", "fallen", "falling"],
    ["send", "sends", "sent", "sent", "sending"],
    ["build", "builds", "built", "built", "building"],
    ["spend", "spends", "spent", "spent", "spending"],
    ["rise", "rises", "rose", "risen", "rising"],
    ["buy", "buys", "bought", "bought", "buying"],
    ["win", "wins", "won", "won", "winning"],
    ["sell", "sells", "sold", "sold", "selling"],
    ["teach", "teaches", "taught", "taught", "teaching"],
    ["eat", "eats", "ate", "eaten", "eating"],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerbForm {
    Base,
    ThirdSingular,
    Past,
    Participle,
    Gerund,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NounNumber {
    Singular,
    Plural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Female,
    Male,
}

/// Syntactic slot of a pronoun, used to disambiguate `her` and `his`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PronounSlot {
    /// Any slot; the source surface is unambiguous.
    Any,
    Object,
    Determiner,
    Independent,
}

/// Raw table contents, before indexing.
#[derive(Debug, Clone, Default)]
pub struct LexiconData {
    pub nouns: Vec<String>,
    pub verbs: Vec<String>,
    pub adjectives: Vec<String>,
    pub female_names: Vec<String>,
    pub male_names: Vec<String>,
    pub function_words: Vec<String>,
    /// `(source, slot, target)`; several rows per source form a replacement set.
    pub pronoun_map: Vec<(String, PronounSlot, String)>,
    /// `(affirmative, negated)` surface pairs.
    pub negation_rules: Vec<(String, String)>,
}

impl LexiconData {
    pub fn builtin() -> Self {
        let get = |name: &str| BUILTIN.iter().find(|(n, _)| *n == name).expect("table").1;
        Self::from_tables(|name| Ok(get(name).to_string())).expect("built-in lexicon parses")
    }

    fn from_tables(mut read: impl FnMut(&str) -> Result<String>) -> Result<Self> {
        let words = |text: String| -> Vec<String> {
            data_lines(&text).map(str::to_string).collect()
        };
        let pairs = |name: &str, text: String| -> Result<Vec<(String, String)>> {
            data_lines(&text)
                .enumerate()
                .map(|(i, line)| {
                    line.split_once('\t')
                        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                        .ok_or_else(|| Error::parse(name, i + 1, "expected source<TAB>target"))
                })
                .collect()
        };
        let pronoun_map = pairs(PRONOUNS_FILE, read(PRONOUNS_FILE)?)?
            .into_iter()
            .map(|(src, tgt)| {
                let (word, slot) = match src.split_once(':') {
                    None => (src.as_str(), PronounSlot::Any),
                    Some((w, "obj")) => (w, PronounSlot::Object),
                    Some((w, "det")) => (w, PronounSlot::Determiner),
                    Some((w, "pron")) => (w, PronounSlot::Independent),
                    Some((w, "subj")) => (w, PronounSlot::Any),
                    Some((_, other)) => {
                        return Err(Error::Invalid(format!("unknown pronoun slot `{other}`")))
                    }
                };
                Ok((word.to_lowercase(), slot, tgt.to_lowercase()))
            })
            .collect::<Result<_>>()?;
        Ok(LexiconData {
            nouns: words(read(NOUNS_FILE)?),
            verbs: words(read(VERBS_FILE)?),
            adjectives: words(read(ADJECTIVES_FILE)?),
            female_names: words(read(FEMALE_NAMES_FILE)?),
            male_names: words(read(MALE_NAMES_FILE)?),
            function_words: words(read(FUNCTION_WORDS_FILE)?),
            pronoun_map,
            negation_rules: pairs(NEGATION_FILE, read(NEGATION_FILE)?)?,
        })
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim_end)
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub nouns: Vec<String>,
    pub verbs: Vec<String>,
    pub adjectives: Vec<String>,
    pub female_names: Vec<String>,
    pub male_names: Vec<String>,
    function_words: BTreeSet<String>,
    pronoun_map: BTreeMap<(String, PronounSlot), Vec<String>>,
    pronouns: BTreeSet<String>,
    negation_rules: Vec<(String, String)>,
    noun_forms: HashMap<String, (String, NounNumber)>,
    verb_forms: HashMap<String, (String, VerbForm)>,
    adjective_set: BTreeSet<String>,
    names: HashMap<String, Gender>,
}

impl Lexicon {
    pub fn builtin() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::new(LexiconData::builtin()).expect("built-in lexicon is valid"))
    }

    /// Loads tables from `dir`, falling back to the built-in table for any
    /// file that is not present.
    pub fn from_dir(dir: &Path) -> Result<Lexicon> {
        let data = LexiconData::from_tables(|name| {
            let path = dir.join(name);
            if path.exists() {
                Ok(std::fs::read_to_string(path)?)
            } else {
                Ok(BUILTIN.iter().find(|(n, _)| *n == name).expect("table").1.to_string())
            }
        })?;
        Lexicon::new(data)
    }

    pub fn new(data: LexiconData) -> Result<Lexicon> {
        let dedup = |v: Vec<String>| -> Vec<String> {
            let mut seen = BTreeSet::new();
            v.into_iter()
                .map(|w| w.trim().to_string())
                .filter(|w| !w.is_empty() && seen.insert(w.to_lowercase()))
                .collect()
        };
        let lower = |v: Vec<String>| dedup(v.into_iter().map(|w| w.to_lowercase()).collect());
        let nouns = lower(data.nouns);
        let verbs = lower(data.verbs);
        let adjectives = lower(data.adjectives);
        let female_names = dedup(data.female_names);
        let male_names = dedup(data.male_names);

        let mut pronoun_map: BTreeMap<(String, PronounSlot), Vec<String>> = BTreeMap::new();
        for (src, slot, tgt) in data.pronoun_map {
            if src == tgt {
                return Err(Error::Invalid(format!("pronoun map sends `{src}` to itself")));
            }
            let targets = pronoun_map.entry((src, slot)).or_default();
            if !targets.contains(&tgt) {
                targets.push(tgt);
            }
        }
        for (src, tgt) in &data.negation_rules {
            if src.eq_ignore_ascii_case(tgt) {
                return Err(Error::Invalid(format!("negation rule sends `{src}` to itself")));
            }
        }

        let mut noun_forms = HashMap::new();
        for n in &nouns {
            noun_forms.insert(pluralize(n), (n.clone(), NounNumber::Plural));
        }
        for n in &nouns {
            noun_forms.insert(n.clone(), (n.clone(), NounNumber::Singular));
        }
        let mut verb_forms = HashMap::new();
        for v in &verbs {
            for form in [VerbForm::ThirdSingular, VerbForm::Past, VerbForm::Participle, VerbForm::Gerund] {
                verb_forms.entry(inflect_verb(v, form)).or_insert((v.clone(), form));
            }
        }
        for v in &verbs {
            verb_forms.insert(v.clone(), (v.clone(), VerbForm::Base));
        }

        let mut names = HashMap::new();
        for n in &female_names {
            names.insert(n.clone(), Gender::Female);
        }
        for n in &male_names {
            names.entry(n.clone()).or_insert(Gender::Male);
        }
        for name in names.keys() {
            let l = name.to_lowercase();
            if noun_forms.contains_key(&l) {
                return Err(Error::Invalid(format!("name `{name}` is also a common noun")));
            }
        }

        let mut pronouns: BTreeSet<String> = UNMAPPED_PRONOUNS.iter().map(|s| s.to_string()).collect();
        for ((src, _), targets) in &pronoun_map {
            pronouns.insert(src.clone());
            pronouns.extend(targets.iter().cloned());
        }
        let function_words = data
            .function_words
            .into_iter()
            .map(|w| w.to_lowercase())
            .filter(|w| !pronouns.contains(w))
            .collect();

        Ok(Lexicon {
            adjective_set: adjectives.iter().cloned().collect(),
            nouns,
            verbs,
            adjectives,
            female_names,
            male_names,
            function_words,
            pronoun_map,
            pronouns,
            negation_rules: data.negation_rules,
            noun_forms,
            verb_forms,
            names,
        })
    }

    pub fn is_function_word(&self, lower: &str) -> bool {
        self.function_words.contains(lower)
    }

    pub fn is_pronoun(&self, lower: &str) -> bool {
        self.pronouns.contains(lower)
    }

    pub fn analyze_noun(&self, lower: &str) -> Option<(&str, NounNumber)> {
        self.noun_forms.get(lower).map(|(b, n)| (b.as_str(), *n))
    }

    pub fn analyze_verb(&self, lower: &str) -> Option<(&str, VerbForm)> {
        if let Some((b, f)) = self.verb_forms.get(lower) {
            return Some((b.as_str(), *f));
        }
        None
    }

    pub fn gender_of(&self, name: &str) -> Option<Gender> {
        self.names.get(name).copied()
    }

    pub fn names_of(&self, gender: Gender) -> &[String] {
        match gender {
            Gender::Female => &self.female_names,
            Gender::Male => &self.male_names,
        }
    }

    /// Replacement set for a pronoun in a slot, if covered.
    pub fn pronoun_targets(&self, lower: &str, slot: PronounSlot) -> Option<&[String]> {
        self.pronoun_map
            .get(&(lower.to_string(), slot))
            .or_else(|| self.pronoun_map.get(&(lower.to_string(), PronounSlot::Any)))
            .map(Vec::as_slice)
    }

    /// True when `lower` needs its slot resolved from context.
    pub fn pronoun_is_ambiguous(&self, lower: &str) -> bool {
        self.pronoun_map
            .keys()
            .any(|(w, slot)| w == lower && *slot != PronounSlot::Any)
    }

    pub fn negation_rules(&self) -> &[(String, String)] {
        &self.negation_rules
    }
}

impl PosLookup for Lexicon {
    fn lookup_pos(&self, lower: &str) -> Option<Pos> {
        if self.function_words.contains(lower) {
            Some(Pos::Other)
        } else if self.pronouns.contains(lower) {
            Some(Pos::Pronoun)
        } else if self.adjective_set.contains(lower) {
            Some(Pos::Adjective)
        } else if self.verb_forms.contains_key(lower) {
            Some(Pos::Verb)
        } else if self.noun_forms.contains_key(lower) {
            Some(Pos::Noun)
        } else {
            None
        }
    }
}

fn ends_consonant_y(w: &str) -> bool {
    let b = w.as_bytes();
    b.len() >= 2 && b[b.len() - 1] == b'y' && !b"aeiou".contains(&b[b.len() - 2])
}

pub fn pluralize(noun: &str) -> String {
    if ends_consonant_y(noun) {
        format!("{}ies", &noun[..noun.len() - 1])
    } else if ["s", "x", "z", "ch", "sh"].iter().any(|s| noun.ends_with(s)) {
        format!("{noun}es")
    } else {
        format!("{noun}s")
    }
}

pub fn inflect_noun(base: &str, number: NounNumber) -> String {
    match number {
        NounNumber::Singular => base.to_string(),
        NounNumber::Plural => pluralize(base),
    }
}

pub fn inflect_verb(base: &str, form: VerbForm) -> String {
    if let Some(row) = IRREGULAR_VERBS.iter().find(|r| r[0] == base) {
        return match form {
            VerbForm::Base => row[0],
            VerbForm::ThirdSingular => row[1],
            VerbForm::Past => row[2],
            VerbForm::Participle => row[3],
            VerbForm::Gerund => row[4],
        }
        .to_string();
    }
    match form {
        VerbForm::Base => base.to_string(),
        VerbForm::ThirdSingular => {
            if ends_consonant_y(base) {
                format!("{}ies", &base[..base.len() - 1])
            } else if ["s", "x", "z", "ch", "sh", "o"].iter().any(|s| base.ends_with(s)) {
                format!("{base}es")
            } else {
                format!("{base}s")
            }
        }
        VerbForm::Past | VerbForm::Participle => {
            if base.ends_with('e') {
                format!("{base}d")
            } else if ends_consonant_y(base) {
                format!("{}ied", &base[..base.len() - 1])
            } else {
                format!("{base}ed")
            }
        }
        VerbForm::Gerund => {
            if base.ends_with('e') && !base.ends_with("ee") {
                format!("{}ing", &base[..base.len() - 1])
            } else {
                format!("{base}ing")
            }
        }
    }
}

/// Base form and tense of an inflected verb outside the pool, using the
/// irregular table first and regular suffix stripping as a fallback.
pub fn guess_verb(lower: &str) -> (String, VerbForm) {
    for row in IRREGULAR_VERBS.iter() {
        for (i, form) in [
            VerbForm::Base,
            VerbForm::ThirdSingular,
            VerbForm::Past,
            VerbForm::Participle,
            VerbForm::Gerund,
        ]
        .into_iter()
        .enumerate()
        {
            if row[i] == lower {
                return (row[0].to_string(), form);
            }
        }
    }
    (lower.to_string(), VerbForm::Base)
}

/// Whether `lower` looks like a past participle ("called", "gone", "taken").
pub fn is_participle_like(lexicon: &Lexicon, lower: &str) -> bool {
    if let Some((_, form)) = lexicon.analyze_verb(lower) {
        return matches!(form, VerbForm::Past | VerbForm::Participle);
    }
    if IRREGULAR_VERBS.iter().any(|r| r[3] == lower) {
        return true;
    }
    (lower.len() > 3 && lower.ends_with("ed")) || (lower.len() > 4 && lower.ends_with("en"))
}

/// Copies the capitalization pattern of `like` onto `word`.
pub fn match_case(like: &str, word: &str) -> String {
    let mut chars = like.chars();
    let first_upper = chars.next().is_some_and(char::is_uppercase);
    let all_upper = like.chars().count() > 1 && like.chars().all(|c| !c.is_lowercase());
    if all_upper {
        word.to_uppercase()
    } else if first_upper {
        let mut w = word.chars();
        match w.next() {
            Some(f) => f.to_uppercase().chain(w).collect(),
            None => String::new(),
        }
    } else {
        word.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_loads_and_tags() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.lookup_pos("dogs"), Some(Pos::Noun));
        assert_eq!(lex.lookup_pos("believes"), Some(Pos::Verb));
        assert_eq!(lex.lookup_pos("weak"), Some(Pos::Adjective));
        assert_eq!(lex.lookup_pos("he"), Some(Pos::Pronoun));
        assert_eq!(lex.lookup_pos("will"), Some(Pos::Other));
        assert_eq!(lex.lookup_pos("zyzzyva"), None);
    }

    #[test]
    fn pronoun_map_never_maps_to_self() {
        let mut data = LexiconData::builtin();
        data.pronoun_map.push(("he".into(), PronounSlot::Any, "he".into()));
        assert!(Lexicon::new(data).is_err());
        for ((src, _), targets) in &Lexicon::builtin().pronoun_map {
            assert!(!targets.contains(src));
        }
    }

    #[test]
    fn names_disjoint_from_nouns() {
        let mut data = LexiconData::builtin();
        data.female_names.push("Dog".into());
        assert!(matches!(Lexicon::new(data), Err(Error::Invalid(_))));
    }

    #[test]
    fn inflection() {
        assert_eq!(pluralize("economy"), "economies");
        assert_eq!(pluralize("match"), "matches");
        assert_eq!(pluralize("dog"), "dogs");
        assert_eq!(inflect_verb("believe", VerbForm::ThirdSingular), "believes");
        assert_eq!(inflect_verb("watch", VerbForm::ThirdSingular), "watches");
        assert_eq!(inflect_verb("study", VerbForm::Past), "studied");
        assert_eq!(inflect_verb("go", VerbForm::Past), "went");
        assert_eq!(inflect_verb("create", VerbForm::Gerund), "creating");
        assert_eq!(guess_verb("went"), ("go".to_string(), VerbForm::Past));
    }

    #[test]
    fn analysis_round_trips_pool() {
        let lex = Lexicon::builtin();
        for v in &lex.verbs {
            assert_eq!(lex.analyze_verb(v), Some((v.as_str(), VerbForm::Base)), "{v}");
            let third = inflect_verb(v, VerbForm::ThirdSingular);
            assert_eq!(lex.analyze_verb(&third).map(|x| x.0), Some(v.as_str()));
        }
        for n in &lex.nouns {
            assert_eq!(lex.analyze_noun(&pluralize(n)), Some((n.as_str(), NounNumber::Plural)));
        }
    }

    #[test]
    fn case_matching() {
        assert_eq!(match_case("He", "she"), "She");
        assert_eq!(match_case("he", "she"), "she");
        assert_eq!(match_case("US", "them"), "THEM");
        assert_eq!(match_case("I", "we"), "We");
    }

    #[test]
    fn from_dir_overrides_single_table() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(NOUNS_FILE), "# tiny\ndog\ncat\n").unwrap();
        let lex = Lexicon::from_dir(dir.path()).unwrap();
        assert_eq!(lex.nouns, ["dog", "cat"]);
        assert!(!lex.verbs.is_empty());
    }
}
