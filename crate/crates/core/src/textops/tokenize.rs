use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturb::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Pronoun,
    Other,
}

/// Anything that can assign a part of speech to a lowercased word.
pub trait PosLookup {
    fn lookup_pos(&self, lower: &str) -> Option<Pos>;
}

/// Byte offsets `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
    pub pos: Option<Pos>,
    pub span: Span,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    /// Words and numbers, i.e. everything except punctuation.
    pub fn is_lexical(&self) -> bool {
        self.kind != TokenKind::Punctuation
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedSentence {
    pub source: String,
    pub tokens: Vec<Token>,
}

impl TokenizedSentence {
    /// Whitespace (or other skipped text) that precedes token `i`.
    pub fn gap_before(&self, i: usize) -> &str {
        let start = if i == 0 { 0 } else { self.tokens[i - 1].span.end };
        &self.source[start..self.tokens[i].span.start]
    }

    pub fn trailing(&self) -> &str {
        let start = self.tokens.last().map_or(0, |t| t.span.end);
        &self.source[start..]
    }

    /// Rebuilds the source from token surfaces and recorded gaps.
    pub fn detokenize(&self) -> String {
        let mut out = String::with_capacity(self.source.len());
        for (i, tok) in self.tokens.iter().enumerate() {
            out.push_str(self.gap_before(i));
            out.push_str(&tok.surface);
        }
        out.push_str(self.trailing());
        out
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_lexical()).count()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }
}

/// Tokenizes with the built-in lexicon for part-of-speech lookup.
pub fn tokenize(text: &str, tags: Option<&[Pos]>) -> Result<TokenizedSentence> {
    tokenize_with(text, tags, Lexicon::builtin())
}

/// Tokenizes on whitespace and punctuation. POS comes from `tags` when given
/// (one per token), otherwise from `lookup`, otherwise `Other`.
pub fn tokenize_with(
    text: &str,
    tags: Option<&[Pos]>,
    lookup: &dyn PosLookup,
) -> Result<TokenizedSentence> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput("text is empty or whitespace-only"));
    }
    let mut tokens = scan(text);
    if let Some(tags) = tags {
        if tags.len() != tokens.len() {
            return Err(Error::Invalid(format!(
                "{} POS tags supplied for {} tokens",
                tags.len(),
                tokens.len()
            )));
        }
        for (tok, tag) in tokens.iter_mut().zip(tags) {
            tok.pos = Some(*tag);
        }
    } else {
        for tok in tokens.iter_mut().filter(|t| t.is_word()) {
            tok.pos = Some(lookup.lookup_pos(&tok.lower()).unwrap_or(Pos::Other));
        }
    }
    Ok(TokenizedSentence {
        source: text.to_string(),
        tokens,
    })
}

fn scan(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let signed = (c == '-' || c == '+')
            && chars.get(i + 1).is_some_and(|&(_, d)| d.is_ascii_digit())
            && (i == 0 || chars[i - 1].1.is_whitespace() || chars[i - 1].1 == '(');
        if c.is_ascii_digit() || signed {
            let start = if signed { i + 1 } else { i };
            let end = match_number(&chars, start);
            let glued = chars.get(end).is_some_and(|&(_, d)| d.is_alphabetic());
            if !glued {
                tokens.push(make(text, byte_at(i), byte_at(end), TokenKind::Number));
                i = end;
                continue;
            }
            if !signed {
                // "3rd", "1990s": an alphanumeric word.
                let end = match_word(&chars, i);
                tokens.push(make(text, byte_at(i), byte_at(end), TokenKind::Word));
                i = end;
                continue;
            }
        }
        if c.is_alphabetic() {
            let end = match_word(&chars, i);
            tokens.push(make(text, byte_at(i), byte_at(end), TokenKind::Word));
            i = end;
            continue;
        }
        tokens.push(make(text, byte_at(i), byte_at(i + 1), TokenKind::Punctuation));
        i += 1;
    }
    tokens
}

fn make(text: &str, start: usize, end: usize, kind: TokenKind) -> Token {
    Token {
        surface: text[start..end].to_string(),
        kind,
        pos: None,
        span: Span::new(start, end),
    }
}

fn digit_at(chars: &[(usize, char)], i: usize) -> bool {
    chars.get(i).is_some_and(|&(_, c)| c.is_ascii_digit())
}

/// Returns the char index one past the longest numeric literal starting at `i`.
fn match_number(chars: &[(usize, char)], i: usize) -> usize {
    let mut j = i;
    while digit_at(chars, j) {
        j += 1;
    }
    if j - i <= 3 {
        // Thousands groups: ",ddd" not followed by another digit.
        let mut k = j;
        while chars.get(k).is_some_and(|&(_, c)| c == ',')
            && (1..=3).all(|d| digit_at(chars, k + d))
            && !digit_at(chars, k + 4)
        {
            k += 4;
        }
        j = k;
    }
    if chars.get(j).is_some_and(|&(_, c)| c == '.') && digit_at(chars, j + 1) {
        j += 1;
        while digit_at(chars, j) {
            j += 1;
        }
    }
    j
}

fn match_word(chars: &[(usize, char)], i: usize) -> usize {
    let mut j = i;
    loop {
        match chars.get(j) {
            Some(&(_, c)) if c.is_alphanumeric() => j += 1,
            Some(&(_, c))
                if j > i
                    && match c {
                        '\'' | '\u{2019}' => chars.get(j + 1).is_some_and(|&(_, d)| d.is_alphabetic()),
                        '-' => chars.get(j + 1).is_some_and(|&(_, d)| d.is_alphanumeric()),
                        _ => false,
                    } =>
            {
                j += 1
            }
            _ => return j,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &TokenizedSentence) -> Vec<TokenKind> {
        s.tokens.iter().map(|t| t.kind).collect()
    }

    #[test]
    fn splits_words_and_punctuation() {
        let s = tokenize("I love dogs.", None).unwrap();
        assert_eq!(s.surfaces(), ["I", "love", "dogs", "."]);
        use TokenKind::*;
        assert_eq!(kinds(&s), [Word, Word, Word, Punctuation]);
    }

    #[test]
    fn currency_sigil_is_separate() {
        let s = tokenize("$100 billion", None).unwrap();
        assert_eq!(s.surfaces(), ["$", "100", "billion"]);
        assert_eq!(s.tokens[1].kind, TokenKind::Number);
    }

    #[test]
    fn percent_after_decimal() {
        let s = tokenize("5.3%", None).unwrap();
        assert_eq!(s.surfaces(), ["5.3", "%"]);
        assert_eq!(s.tokens[0].kind, TokenKind::Number);
    }

    #[test]
    fn thousands_and_sentence_final_period() {
        let s = tokenize("It cost 1,250,000 in 2012.", None).unwrap();
        assert_eq!(s.surfaces(), ["It", "cost", "1,250,000", "in", "2012", "."]);
        let s = tokenize("dogs, 1,2 and 12,3456", None).unwrap();
        assert_eq!(s.surfaces(), ["dogs", ",", "1", ",", "2", "and", "12", ",", "3456"]);
    }

    #[test]
    fn contractions_hyphens_and_ordinals_stay_whole() {
        let s = tokenize("It won't be face-to-face on the 3rd.", None).unwrap();
        assert_eq!(s.surfaces(), ["It", "won't", "be", "face-to-face", "on", "the", "3rd", "."]);
        assert_eq!(s.tokens[6].kind, TokenKind::Word);
    }

    #[test]
    fn signed_numbers() {
        let s = tokenize("fell to -5 (-2.5) a-3", None).unwrap();
        assert_eq!(s.surfaces(), ["fell", "to", "-5", "(", "-2.5", ")", "a-3"]);
        assert_eq!(s.tokens[2].kind, TokenKind::Number);
        assert_eq!(s.tokens[4].kind, TokenKind::Number);
    }

    #[test]
    fn whitespace_only_is_rejected() {
        assert!(matches!(tokenize(" \t\n", None), Err(Error::EmptyInput(_))));
        assert!(matches!(tokenize("", None), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn external_tags_override_lookup() {
        let tags = [Pos::Noun, Pos::Noun, Pos::Other];
        let s = tokenize("run fast .", Some(&tags)).unwrap();
        assert_eq!(s.tokens[0].pos, Some(Pos::Noun));
        assert!(tokenize("run fast .", Some(&tags[..2])).is_err());
    }

    #[test]
    fn builtin_lookup_tags_common_words() {
        let s = tokenize("He loves dogs", None).unwrap();
        assert_eq!(s.tokens[0].pos, Some(Pos::Pronoun));
        assert_eq!(s.tokens[1].pos, Some(Pos::Verb));
        assert_eq!(s.tokens[2].pos, Some(Pos::Noun));
    }

    #[test]
    fn detokenize_is_lossless() {
        for text in [
            "  Bilateral trade has increased to more than $100 billion a year.  ",
            "Who serves as president \u{201c}is\u{201d} critically important\tfor Mexicans!",
            "In 2012, engagement declined by 7%...",
        ] {
            let s = tokenize(text, None).unwrap();
            assert_eq!(s.detokenize(), text);
            for w in s.tokens.windows(2) {
                assert!(w[0].span.end <= w[1].span.start);
            }
        }
    }
}
