//! Splitting raw records into analysis units.
//!
//! The sentence splitter is a rule-based scanner: a boundary is terminal
//! punctuation (`.`, `!`, `?`) followed by whitespace and an uppercase
//! letter or digit, unless the word ending at a period is on the
//! abbreviation guard list ("et al.", "e.g.", ...).

use crate::corpus::{RawRecord, Unit};

/// Single-token abbreviations that never terminate a sentence.
const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "fig.", "figs.", "eq.", "eqs.", "sec.", "no.", "vol.",
    "pp.", "dr.", "mr.", "mrs.", "ms.", "prof.", "st.",
];

/// Two-token abbreviations, checked against the last two whitespace tokens.
const ABBREVIATIONS_TWO: &[&str] = &["et al."];

/// Split a record into analysis units.
///
/// `Unit::Document` returns the record unchanged as a singleton.
/// `Unit::Sentence` splits the text, deriving unit ids as `parent#k`
/// (k counted from 0) and copying the metadata onto every unit. A text
/// with no detected boundary yields one unit.
pub fn split_units(record: &RawRecord, unit: Unit) -> Vec<RawRecord> {
    match unit {
        Unit::Document => vec![record.clone()],
        Unit::Sentence => split_sentences(&record.text)
            .into_iter()
            .enumerate()
            .map(|(k, sentence)| RawRecord {
                id: format!("{}#{}", record.id, k),
                text: sentence.to_string(),
                meta: record.meta.clone(),
                label: record.label,
            })
            .collect(),
    }
}

fn split_sentences(text: &str) -> Vec<&str> {
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let chars: Vec<(usize, char)> = text.char_indices().collect();

    for (i, &(pos, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        // Require whitespace, then an uppercase letter or digit.
        let mut j = i + 1;
        let mut saw_ws = false;
        while j < chars.len() && chars[j].1.is_whitespace() {
            saw_ws = true;
            j += 1;
        }
        if !saw_ws || j >= chars.len() {
            continue;
        }
        let next = chars[j].1;
        if !(next.is_uppercase() || next.is_ascii_digit()) {
            continue;
        }
        if c == '.' && is_guarded(&text[start..pos + c.len_utf8()]) {
            continue;
        }
        let end = pos + c.len_utf8();
        let sentence = text[start..end].trim();
        if !sentence.is_empty() {
            sentences.push(sentence);
        }
        start = chars[j].0;
    }

    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail);
    }
    if sentences.is_empty() && !text.trim().is_empty() {
        sentences.push(text.trim());
    }
    sentences
}

/// Is the final whitespace token of `prefix` (which ends in '.') a guarded
/// abbreviation?
fn is_guarded(prefix: &str) -> bool {
    let mut tokens = prefix.split_whitespace().rev();
    let Some(last) = tokens.next() else {
        return false;
    };
    let last = last.to_lowercase();
    if ABBREVIATIONS.contains(&last.as_str()) {
        return true;
    }
    if let Some(prev) = tokens.next() {
        let pair = format!("{} {}", prev.to_lowercase(), last);
        if ABBREVIATIONS_TWO.contains(&pair.as_str()) {
            return true;
        }
    }
    false
}
