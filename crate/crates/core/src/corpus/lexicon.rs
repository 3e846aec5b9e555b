//! Static word-to-part-of-speech lexicon.
//!
//! The file format is one entry per line, `word<TAB>POS`, with POS one of
//! ADJ, ADV, VERB, NOUN. A word may appear on several lines with different
//! tags; it then matches any of them. Blank lines and lines starting with
//! `#` are skipped.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::corpus::PosClass;
use crate::error::{Error, Result};

const ADJ: u8 = 1 << 0;
const ADV: u8 = 1 << 1;
const VERB: u8 = 1 << 2;
const NOUN: u8 = 1 << 3;

fn pos_bit(class: PosClass) -> u8 {
    match class {
        PosClass::Adjective => ADJ,
        PosClass::Adverb => ADV,
        PosClass::Verb => VERB,
        PosClass::Noun => NOUN,
    }
}

/// A loaded lexicon. Keys are stored lowercased; lookups expect lowercase.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, u8>,
}

impl Lexicon {
    pub fn load(path: &Path) -> Result<Lexicon> {
        let file = File::open(path).map_err(|source| Error::MissingLexicon {
            path: path.to_path_buf(),
            source,
        })?;
        let reader = BufReader::new(file);
        let mut entries: HashMap<String, u8> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::parse(path, line_no, e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| {
                Error::parse(path, line_no, "expected `word<TAB>POS`".to_string())
            })?;
            let bit = match tag.trim() {
                "ADJ" => ADJ,
                "ADV" => ADV,
                "VERB" => VERB,
                "NOUN" => NOUN,
                other => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("unknown POS tag {other:?} (expected ADJ, ADV, VERB or NOUN)"),
                    ))
                }
            };
            let word = word.trim().to_lowercase();
            if word.is_empty() {
                return Err(Error::parse(path, line_no, "empty word".to_string()));
            }
            *entries.entry(word).or_insert(0) |= bit;
        }
        Ok(Lexicon { entries })
    }

    /// Does `word` (already lowercased) carry the given part of speech?
    ///
    /// Ambiguous words match if any of their entries matches.
    pub fn matches(&self, word: &str, class: PosClass) -> bool {
        self.entries
            .get(word)
            .is_some_and(|mask| mask & pos_bit(class) != 0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
