use crate::error::{Error, Result};

use super::Token;

const ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Sr.", "Jr.", "vs.", "etc.", "Inc.", "Ltd.", "No.",
];

/// Non-ASCII punctuation that splits like its ASCII counterparts. Devanagari
/// and Bengali sentence enders are included so target-side text splits too.
const EXTRA_PUNCT: &[char] = &[
    '\u{0964}', '\u{0965}', '\u{201C}', '\u{201D}', '\u{2018}', '\u{2019}', '\u{00AB}', '\u{00BB}',
    '\u{2013}', '\u{2014}', '\u{2026}', '\u{00BF}', '\u{00A1}',
];

pub(crate) fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || EXTRA_PUNCT.contains(&c)
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !is_punct(c)
}

/// Punctuation that stays inside a word when flanked on both sides:
/// decimal separators between digits, apostrophes, hyphens and periods
/// between word characters.
fn keeps_inside(prev: char, c: char, next: char) -> bool {
    match c {
        '.' | ',' if prev.is_numeric() && next.is_numeric() => true,
        '\'' | '\u{2019}' | '-' | '.' => is_word_char(prev) && is_word_char(next),
        _ => false,
    }
}

/// `U.S.`-style initialisms: two or more single letters each followed by a period.
fn is_initialism(chunk: &str) -> bool {
    let chars: Vec<char> = chunk.chars().collect();
    chars.len() >= 4
        && chars.len().is_multiple_of(2)
        && chars.chunks(2).all(|p| p[0].is_alphabetic() && p[1] == '.')
}

fn split_chunk(chunk: &str, out: &mut Vec<Token>) {
    if ABBREVIATIONS.contains(&chunk) || is_initialism(chunk) {
        out.push(Token::new(chunk));
        return;
    }
    let chars: Vec<char> = chunk.chars().collect();
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if is_word_char(c) {
            word.push(c);
            continue;
        }
        let inner = i > 0
            && i + 1 < chars.len()
            && !word.is_empty()
            && keeps_inside(chars[i - 1], c, chars[i + 1]);
        if inner {
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push(Token::new(std::mem::take(&mut word)));
            }
            out.push(Token::new(c.to_string()));
        }
    }
    if !word.is_empty() {
        out.push(Token::new(word));
    }
}

/// Splits one line of running text into tokens.
///
/// Punctuation is separated from words, numbers such as `3.5` or `1,000`
/// stay whole, and common abbreviations keep their trailing period.
pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    if out.is_empty() {
        return Err(Error::EmptySentence);
    }
    Ok(out)
}
