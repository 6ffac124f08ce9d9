//! Deterministic text utilities shared by the rest of the crate.

mod numbers;
mod overlap;
mod tokenize;

pub use numbers::{is_numeric_literal, number_to_words, random_number_same_format, NumberLiteral};
pub use overlap::{
    lcs_len, levenshtein, levenshtein_normalized, rouge_l_f1, rouge_tokens, sentence_bleu,
};
pub(crate) use overlap::lcs_f1;
pub use tokenize::{tokenize, tokenize_with, Pos, PosLookup, Span, Token, TokenKind, TokenizedSentence};
