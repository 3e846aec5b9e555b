//! Corpus ingestion: raw records, analysis units, vocabulary filtering.
//!
//! A corpus enters as JSONL of raw text records, is split into analysis
//! units (whole documents or sentences), and each unit is reduced to the
//! set of vocabulary tokens it contains. Everything downstream operates
//! on those token sets.

mod generate;
mod ingest;
mod lexicon;
mod split;
mod tokenize;

pub use generate::{generate_ai_reference, GenEndpointConfig};
pub use ingest::{
    load_corpus, load_corpus_into, load_target_corpus, read_units, CorpusFormat, LoadedUnit,
};
pub use lexicon::Lexicon;
pub use split::split_units;
pub use tokenize::{
    extract_tokens, extract_tokens_in_vocab, extract_tokens_with_lexicon, TextNorm,
};

use std::collections::BTreeSet;
use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analysis granularity: treat each record as one unit, or split into sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Sentence,
    Document,
}

/// Provenance label carried by raw records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceLabel {
    Human,
    Ai,
    #[default]
    Unknown,
}

/// Scalar metadata value attached to a record or document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Bool(bool),
    Num(f64),
    Str(String),
}

/// Flat string-to-scalar metadata map. Ordered so serialization is stable.
pub type Metadata = BTreeMap<String, MetaValue>;

/// A raw text record as found in an input corpus file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub meta: Metadata,
    #[serde(default)]
    pub label: SourceLabel,
}

/// Dense identifier of a vocabulary token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u32);

impl TokenId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// An analysis unit reduced to its set of vocabulary tokens.
///
/// Token ids are kept sorted and duplicate-free; order and counts carry no
/// information in the occurrence representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    tokens: Vec<TokenId>,
    pub meta: Metadata,
    pub unit: Unit,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        tokens: impl IntoIterator<Item = TokenId>,
        meta: Metadata,
        unit: Unit,
    ) -> Self {
        let mut tokens: Vec<TokenId> = tokens.into_iter().collect();
        tokens.sort_unstable();
        tokens.dedup();
        Document {
            id: id.into(),
            tokens,
            meta,
            unit,
        }
    }

    /// Sorted, duplicate-free token ids.
    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn contains(&self, token: TokenId) -> bool {
        self.tokens.binary_search(&token).is_ok()
    }
}

/// Bijective token-to-id mapping with ids contiguous from 0 in first-seen order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::new();
        for token in tokens {
            let token = token.into();
            if vocab.index.contains_key(&token) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate vocabulary token {token:?}"
                )));
            }
            vocab.intern(&token);
        }
        Ok(vocab)
    }

    /// Return the id of `token`, assigning the next free id on first sight.
    pub fn intern(&mut self, token: &str) -> TokenId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = TokenId(self.tokens.len() as u32);
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn get(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id.idx()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens in id order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        Vocabulary::from_tokens(tokens)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(vocab: Vocabulary) -> Vec<String> {
        vocab.tokens
    }
}

/// Part-of-speech class a vocabulary filter keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosClass {
    #[default]
    Adjective,
    Adverb,
    Verb,
    Noun,
}

impl PosClass {
    /// Tag used for this class in lexicon files.
    pub fn lexicon_tag(self) -> &'static str {
        match self {
            PosClass::Adjective => "ADJ",
            PosClass::Adverb => "ADV",
            PosClass::Verb => "VERB",
            PosClass::Noun => "NOUN",
        }
    }
}

/// Configuration of the vocabulary filter applied during ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VocabFilterConfig {
    pub pos_class: PosClass,
    pub lexicon_path: PathBuf,
    /// Lowercase tokens to drop even when their part of speech matches
    /// (e.g. domain-specific technical keywords). Applied after lowercasing.
    pub exclusion_list: BTreeSet<String>,
    pub lowercase: bool,
    pub min_token_len: usize,
}

impl VocabFilterConfig {
    pub fn new(lexicon_path: impl Into<PathBuf>) -> Self {
        VocabFilterConfig {
            pos_class: PosClass::default(),
            lexicon_path: lexicon_path.into(),
            exclusion_list: BTreeSet::new(),
            lowercase: true,
            min_token_len: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_token_len < 1 {
            return Err(Error::InvalidConfig(
                "min_token_len must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// The plain-text normalization this filter implies.
    pub fn norm(&self) -> TextNorm {
        TextNorm {
            lowercase: self.lowercase,
            min_token_len: self.min_token_len,
        }
    }
}
