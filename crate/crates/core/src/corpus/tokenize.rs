//! Reduction of raw text to filtered vocabulary tokens.
//!
//! Words are split on whitespace and stripped of leading/trailing
//! punctuation; inner hyphens and apostrophes survive. Duplicates collapse:
//! the output is a set, ordered by first occurrence so that vocabulary ids
//! assigned downstream are deterministic.

use std::collections::HashSet;

use crate::corpus::{Lexicon, VocabFilterConfig, Vocabulary};
use crate::error::Result;

/// Case/length normalization shared by training- and target-side tokenization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TextNorm {
    pub lowercase: bool,
    pub min_token_len: usize,
}

impl Default for TextNorm {
    fn default() -> Self {
        TextNorm {
            lowercase: true,
            min_token_len: 1,
        }
    }
}

fn normalized_words<'a>(text: &'a str, norm: &'a TextNorm) -> impl Iterator<Item = String> + 'a {
    text.split_whitespace().filter_map(move |raw| {
        let word = raw.trim_matches(|c: char| !c.is_alphanumeric());
        if word.is_empty() || word.chars().count() < norm.min_token_len {
            return None;
        }
        Some(if norm.lowercase {
            word.to_lowercase()
        } else {
            word.to_string()
        })
    })
}

/// Extract the filtered token set of `text` using an already-loaded lexicon.
///
/// Keeps words whose lexicon part of speech matches `filter.pos_class`,
/// minus the exclusion list. First-occurrence order, no duplicates.
pub fn extract_tokens_with_lexicon(
    text: &str,
    lexicon: &Lexicon,
    filter: &VocabFilterConfig,
) -> Vec<String> {
    let norm = filter.norm();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for word in normalized_words(text, &norm) {
        // POS lookup and exclusion always run on the lowercase form.
        let key = if norm.lowercase {
            word.clone()
        } else {
            word.to_lowercase()
        };
        if !lexicon.matches(&key, filter.pos_class) || filter.exclusion_list.contains(&key) {
            continue;
        }
        if seen.insert(word.clone()) {
            out.push(word);
        }
    }
    out
}

/// Extract the token set of `text`, loading the lexicon from `filter`.
pub fn extract_tokens(text: &str, filter: &VocabFilterConfig) -> Result<Vec<String>> {
    filter.validate()?;
    let lexicon = Lexicon::load(&filter.lexicon_path)?;
    Ok(extract_tokens_with_lexicon(text, &lexicon, filter))
}

/// Extract the tokens of `text` that belong to an existing vocabulary.
///
/// Used for target corpora: membership in a vocabulary built under a POS
/// filter is equivalent to re-applying that filter, and tokens outside the
/// vocabulary carry no signal for the occurrence model anyway.
pub fn extract_tokens_in_vocab(text: &str, norm: &TextNorm, vocab: &Vocabulary) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for word in normalized_words(text, norm) {
        if vocab.get(&word).is_some() && seen.insert(word.clone()) {
            out.push(word);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn fixture_lexicon() -> (tempfile::NamedTempFile, Lexicon) {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        // `transformer` is deliberately tagged ADJ so the exclusion list is
        // what removes it, not the POS filter.
        f.write_all(
            b"commendable\tADJ\nmeticulous\tADJ\nintricate\tADJ\nsolid\tADJ\n\
              transformer\tADJ\narchitecture\tNOUN\nwork\tNOUN\nnovel\tADJ\nnovel\tNOUN\n",
        )
        .unwrap();
        f.flush().unwrap();
        let lex = Lexicon::load(f.path()).unwrap();
        (f, lex)
    }

    fn filter_for(f: &tempfile::NamedTempFile) -> VocabFilterConfig {
        VocabFilterConfig::new(f.path())
    }

    #[test]
    fn adjective_filter_collapses_duplicates() {
        let (f, lex) = fixture_lexicon();
        let tokens = extract_tokens_with_lexicon(
            "This commendable and meticulous work is commendable.",
            &lex,
            &filter_for(&f),
        );
        assert_eq!(tokens, vec!["commendable", "meticulous"]);
    }

    #[test]
    fn empty_text_yields_empty_set() {
        let (f, lex) = fixture_lexicon();
        assert!(extract_tokens_with_lexicon("", &lex, &filter_for(&f)).is_empty());
    }

    #[test]
    fn exclusion_list_applies_after_pos_filter() {
        let (f, lex) = fixture_lexicon();
        let mut filter = filter_for(&f);
        filter.exclusion_list.insert("transformer".into());
        let tokens =
            extract_tokens_with_lexicon("intricate transformer architecture", &lex, &filter);
        // `transformer` excluded by list, `architecture` filtered as noun.
        assert_eq!(tokens, vec!["intricate"]);
    }

    #[test]
    fn punctuation_is_stripped_and_case_folded() {
        let (f, lex) = fixture_lexicon();
        let tokens =
            extract_tokens_with_lexicon("(Commendable!) — \"solid\".", &lex, &filter_for(&f));
        assert_eq!(tokens, vec!["commendable", "solid"]);
    }

    #[test]
    fn ambiguous_word_matches_adjective_and_noun_classes() {
        let (f, lex) = fixture_lexicon();
        let mut filter = filter_for(&f);
        let adj = extract_tokens_with_lexicon("a novel approach", &lex, &filter);
        assert_eq!(adj, vec!["novel"]);
        filter.pos_class = crate::corpus::PosClass::Noun;
        let noun = extract_tokens_with_lexicon("a novel approach", &lex, &filter);
        assert_eq!(noun, vec!["novel"]);
    }

    #[test]
    fn min_token_len_drops_short_words() {
        let (f, lex) = fixture_lexicon();
        let mut filter = filter_for(&f);
        filter.min_token_len = 6;
        let tokens = extract_tokens_with_lexicon("solid commendable", &lex, &filter);
        assert_eq!(tokens, vec!["commendable"]);
    }

    #[test]
    fn extraction_is_idempotent_on_retained_words() {
        let (f, lex) = fixture_lexicon();
        let filter = filter_for(&f);
        let text = "The intricate, commendable and solid work";
        let once = extract_tokens_with_lexicon(text, &lex, &filter);
        let again = extract_tokens_with_lexicon(&once.join(" "), &lex, &filter);
        assert_eq!(once, again);
    }

    #[test]
    fn vocab_membership_extraction_matches_lexicon_route() {
        let (f, lex) = fixture_lexicon();
        let filter = filter_for(&f);
        let text = "A commendable, solid and intricate transformer design.";
        let via_lexicon = extract_tokens_with_lexicon(text, &lex, &filter);
        let vocab = Vocabulary::from_tokens(via_lexicon.clone()).unwrap();
        let via_vocab = extract_tokens_in_vocab(text, &filter.norm(), &vocab);
        assert_eq!(via_lexicon, via_vocab);
    }

    #[test]
    fn extract_tokens_reports_missing_lexicon() {
        let filter = VocabFilterConfig::new("/nonexistent/lexicon.tsv");
        assert!(matches!(
            extract_tokens("text", &filter).unwrap_err(),
            crate::error::Error::MissingLexicon { .. }
        ));
    }
}
