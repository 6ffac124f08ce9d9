//! Numeric literals: parsing, English verbalization, and same-format resampling.

use rand::Rng;

use crate::error::{Error, Result};

/// A literal matching `[+-]? (d{1,3}(,ddd)+ | d+) (.d+)?`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberLiteral {
    pub sign: Option<char>,
    /// Integer digits with separators removed.
    pub int_digits: String,
    pub grouped: bool,
    pub frac_digits: Option<String>,
}

impl NumberLiteral {
    pub fn parse(text: &str) -> Option<Self> {
        let (sign, body) = match text.chars().next()? {
            c @ ('+' | '-') => (Some(c), &text[1..]),
            _ => (None, text),
        };
        let (int_part, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        if let Some(f) = frac {
            if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
        }
        let grouped = int_part.contains(',');
        if grouped {
            let mut groups = int_part.split(',');
            let head = groups.next()?;
            if head.is_empty() || head.len() > 3 || !head.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            if !groups.all(|g| g.len() == 3 && g.bytes().all(|b| b.is_ascii_digit())) {
                return None;
            }
        } else if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(NumberLiteral {
            sign,
            int_digits: int_part.replace(',', ""),
            grouped,
            frac_digits: frac.map(str::to_string),
        })
    }

    pub fn is_integer(&self) -> bool {
        self.frac_digits.is_none()
    }

    /// Integer value, if the literal has no fractional part and fits.
    pub fn as_integer(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        let v: i64 = self.int_digits.parse().ok()?;
        Some(if self.sign == Some('-') { -v } else { v })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(s) = self.sign {
            out.push(s);
        }
        if self.grouped {
            out.push_str(&group_thousands(&self.int_digits));
        } else {
            out.push_str(&self.int_digits);
        }
        if let Some(f) = &self.frac_digits {
            out.push('.');
            out.push_str(f);
        }
        out
    }
}

fn group_thousands(digits: &str) -> String {
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

pub fn is_numeric_literal(text: &str) -> bool {
    NumberLiteral::parse(text).is_some()
}

const ONES: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];
const SCALES: [(u64, &str); 3] = [
    (1_000_000_000, "billion"),
    (1_000_000, "million"),
    (1_000, "thousand"),
];

fn below_thousand(n: u64, out: &mut Vec<String>) {
    debug_assert!(n < 1000);
    let hundreds = n / 100;
    let rest = n % 100;
    if hundreds > 0 {
        out.push(ONES[hundreds as usize].to_string());
        out.push("hundred".to_string());
    }
    match rest {
        0 => {}
        1..=19 => out.push(ONES[rest as usize].to_string()),
        _ if rest % 10 == 0 => out.push(TENS[(rest / 10) as usize].to_string()),
        _ => out.push(format!("{}-{}", TENS[(rest / 10) as usize], ONES[(rest % 10) as usize])),
    }
}

fn integer_words(mut n: u64) -> String {
    if n == 0 {
        return "zero".to_string();
    }
    let mut words = Vec::new();
    for (scale, name) in SCALES {
        if n >= scale {
            below_thousand(n / scale, &mut words);
            words.push(name.to_string());
            n %= scale;
        }
    }
    below_thousand(n, &mut words);
    words.join(" ")
}

/// Verbalizes a numeric literal in American English: "1,250" becomes
/// "one thousand two hundred fifty", "5.30" becomes "five point three zero".
pub fn number_to_words(literal: &str) -> Result<String> {
    let num = NumberLiteral::parse(literal)
        .ok_or_else(|| Error::Unsupported(format!("not a numeric literal: `{literal}`")))?;
    let digits = num.int_digits.trim_start_matches('0');
    if digits.len() > 12 {
        return Err(Error::Unsupported(format!("magnitude too large: `{literal}`")));
    }
    let value: u64 = if digits.is_empty() { 0 } else { digits.parse().expect("digits") };
    if value >= 1_000_000_000_000 {
        return Err(Error::Unsupported(format!("magnitude too large: `{literal}`")));
    }
    let mut out = String::new();
    if num.sign == Some('-') {
        out.push_str("minus ");
    }
    out.push_str(&integer_words(value));
    if let Some(frac) = &num.frac_digits {
        out.push_str(" point");
        for d in frac.bytes() {
            out.push(' ');
            out.push_str(ONES[(d - b'0') as usize]);
        }
    }
    Ok(out)
}

/// Draws a new literal of the same shape (sign, digit count, grouping and
/// decimal places) whose value differs from `literal`.
pub fn random_number_same_format<R: Rng + ?Sized>(literal: &str, rng: &mut R) -> Result<String> {
    let num = NumberLiteral::parse(literal)
        .ok_or_else(|| Error::Unsupported(format!("not a numeric literal: `{literal}`")))?;
    let allow_leading_zero = num.int_digits.len() == 1 || num.int_digits.starts_with('0');
    let original = num.render();
    loop {
        let int_digits: String = (0..num.int_digits.len())
            .map(|i| {
                let lo = if i == 0 && !allow_leading_zero { 1 } else { 0 };
                char::from(b'0' + rng.gen_range(lo..10u8))
            })
            .collect();
        let frac_digits = num.frac_digits.as_ref().map(|f| {
            (0..f.len())
                .map(|_| char::from(b'0' + rng.gen_range(0..10u8)))
                .collect::<String>()
        });
        let candidate = NumberLiteral {
            int_digits,
            frac_digits,
            ..num.clone()
        }
        .render();
        // Same shape, so distinct strings are distinct values.
        if candidate != original {
            return Ok(candidate);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grammar() {
        for ok in ["0", "100", "1,000", "12,345,678", "-5", "+3.25", "1.50", "007"] {
            assert!(is_numeric_literal(ok), "{ok}");
        }
        for bad in ["", "1,00", "1234,567", ",123", "1.", ".5", "1.2.3", "12a", "--1", "1,2345"] {
            assert!(!is_numeric_literal(bad), "{bad}");
        }
    }

    #[test]
    fn verbalizes() {
        assert_eq!(number_to_words("100").unwrap(), "one hundred");
        assert_eq!(number_to_words("0").unwrap(), "zero");
        assert_eq!(number_to_words("5.3").unwrap(), "five point three");
        assert_eq!(number_to_words("1.3").unwrap(), "one point three");
        assert_eq!(number_to_words("21").unwrap(), "twenty-one");
        assert_eq!(
            number_to_words("1,250,017").unwrap(),
            "one million two hundred fifty thousand seventeen"
        );
        assert_eq!(number_to_words("-40.05").unwrap(), "minus forty point zero five");
        assert_eq!(
            number_to_words("999999999999").unwrap(),
            "nine hundred ninety-nine billion nine hundred ninety-nine million \
             nine hundred ninety-nine thousand nine hundred ninety-nine"
        );
    }

    #[test]
    fn verbalize_rejects_out_of_range() {
        assert!(matches!(number_to_words("1000000000000"), Err(Error::Unsupported(_))));
        assert!(matches!(number_to_words("1,000,000,000,000"), Err(Error::Unsupported(_))));
        assert!(matches!(number_to_words("twelve"), Err(Error::Unsupported(_))));
    }

    #[test]
    fn resample_keeps_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = random_number_same_format("100", &mut rng).unwrap();
        assert_eq!(out.len(), 3);
        assert_ne!(out, "100");
        assert!(!out.starts_with('0'));

        let out = random_number_same_format("1.50", &mut rng).unwrap();
        let (_, frac) = out.split_once('.').unwrap();
        assert_eq!(frac.len(), 2);
        assert_ne!(out, "1.50");

        let out = random_number_same_format("-12,500", &mut rng).unwrap();
        assert!(out.starts_with('-'));
        assert_eq!(out.len(), "-12,500".len());
        assert_eq!(&out[3..4], ",");
    }

    #[test]
    fn resample_is_deterministic() {
        let a = random_number_same_format("4821.7", &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_number_same_format("4821.7", &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resample_rejects_malformed() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random_number_same_format("1,0", &mut rng).is_err());
    }
}
