//! Streaming JSONL corpus ingestion.
//!
//! One JSON object per line: `{"id": str, "text": str, "meta": {...},
//! "label": "human"|"ai"|"unknown"}`. Only `text` is required; a missing
//! `id` is derived from the 1-based line number. Records are split into
//! units, tokenized, and reduced to documents over a vocabulary.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::corpus::{
    extract_tokens_in_vocab, extract_tokens_with_lexicon, split_units, Document, Lexicon,
    MetaValue, Metadata, RawRecord, SourceLabel, TextNorm, Unit, VocabFilterConfig, Vocabulary,
};
use crate::error::{Error, Result};

/// Supported corpus file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
}

/// Metadata key holding the precomputed "text contains et al." flag.
///
/// Documents retain only vocabulary tokens, so substring predicates over the
/// raw text must be materialized at load time.
pub const META_CONTAINS_ET_AL: &str = "contains_et_al";

#[derive(Deserialize)]
struct WireRecord {
    id: Option<String>,
    text: String,
    #[serde(default)]
    meta: Metadata,
    #[serde(default)]
    label: SourceLabel,
}

/// A unit after splitting and tokenization, before vocabulary id mapping.
#[derive(Debug, Clone)]
pub struct LoadedUnit {
    pub id: String,
    pub tokens: Vec<String>,
    pub meta: Metadata,
    pub unit: Unit,
    pub label: SourceLabel,
}

/// Stream a JSONL file into tokenized units.
///
/// `extract` maps unit text to its token set; parse failures abort with the
/// offending line number.
pub fn read_units(
    path: &Path,
    unit: Unit,
    extract: impl Fn(&str) -> Vec<String>,
) -> Result<Vec<LoadedUnit>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut units = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if wire.text.trim().is_empty() {
            return Err(Error::parse(path, line_no, "blank \"text\" field"));
        }
        let record = RawRecord {
            id: wire.id.unwrap_or_else(|| line_no.to_string()),
            text: wire.text,
            meta: wire.meta,
            label: wire.label,
        };
        if !seen_ids.insert(record.id.clone()) {
            return Err(Error::parse(
                path,
                line_no,
                format!("duplicate record id {:?}", record.id),
            ));
        }
        for piece in split_units(&record, unit) {
            let mut meta = piece.meta;
            meta.insert(
                META_CONTAINS_ET_AL.to_string(),
                MetaValue::Bool(piece.text.contains("et al.")),
            );
            units.push(LoadedUnit {
                id: piece.id,
                tokens: extract(&piece.text),
                meta,
                unit,
                label: piece.label,
            });
        }
    }
    Ok(units)
}

fn documents_from_units(units: Vec<LoadedUnit>, vocab: &mut Vocabulary) -> Vec<Document> {
    units
        .into_iter()
        .map(|u| {
            let ids = u.tokens.iter().map(|t| vocab.intern(t));
            Document::new(u.id, ids, u.meta, u.unit)
        })
        .collect()
}

/// Load a corpus file, growing `vocab` with first-seen token ids.
///
/// Use this to build one vocabulary as the union of several reference
/// corpora (call once per file, same `vocab`).
pub fn load_corpus_into(
    path: &Path,
    unit: Unit,
    filter: &VocabFilterConfig,
    vocab: &mut Vocabulary,
) -> Result<Vec<Document>> {
    filter.validate()?;
    let lexicon = Lexicon::load(&filter.lexicon_path)?;
    let units = read_units(path, unit, |text| {
        extract_tokens_with_lexicon(text, &lexicon, filter)
    })?;
    if units.is_empty() {
        return Err(Error::EmptyCorpus(format!("{}", path.display())));
    }
    Ok(documents_from_units(units, vocab))
}

/// Load a corpus file and build its vocabulary in one pass.
pub fn load_corpus(
    path: &Path,
    format: CorpusFormat,
    unit: Unit,
    filter: &VocabFilterConfig,
) -> Result<(Vocabulary, Vec<Document>)> {
    let CorpusFormat::Jsonl = format;
    let mut vocab = Vocabulary::new();
    let docs = load_corpus_into(path, unit, filter, &mut vocab)?;
    Ok((vocab, docs))
}

/// Load a target corpus against a fixed vocabulary.
///
/// Tokens outside the vocabulary are ignored; they carry no signal for the
/// occurrence model. The normalization must match the one used at fit time.
pub fn load_target_corpus(
    path: &Path,
    unit: Unit,
    norm: &TextNorm,
    vocab: &Vocabulary,
) -> Result<Vec<Document>> {
    let units = read_units(path, unit, |text| {
        extract_tokens_in_vocab(text, norm, vocab)
    })?;
    if units.is_empty() {
        return Err(Error::EmptyCorpus(format!("{}", path.display())));
    }
    let mut docs = Vec::with_capacity(units.len());
    for u in units {
        let ids = u.tokens.iter().map(|t| {
            vocab
                .get(t)
                .expect("extract_tokens_in_vocab only yields vocabulary members")
        });
        docs.push(Document::new(u.id, ids, u.meta, u.unit));
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn adjective_filter(lexicon: &tempfile::NamedTempFile) -> VocabFilterConfig {
        VocabFilterConfig::new(lexicon.path())
    }

    fn small_lexicon() -> tempfile::NamedTempFile {
        write_file("commendable\tADJ\nsolid\tADJ\nintricate\tADJ\nwork\tNOUN\n")
    }

    #[test]
    fn two_line_file_builds_first_seen_vocabulary() {
        let lex = small_lexicon();
        let corpus = write_file(
            r#"{"id":"a","text":"commendable work"}
{"id":"b","text":"solid work"}
"#,
        );
        let (vocab, docs) = load_corpus(
            corpus.path(),
            CorpusFormat::Jsonl,
            Unit::Document,
            &adjective_filter(&lex),
        )
        .unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(
            vocab.tokens(),
            &["commendable".to_string(), "solid".to_string()]
        );
        assert_eq!(docs[0].tokens(), &[crate::corpus::TokenId(0)]);
        assert_eq!(docs[1].tokens(), &[crate::corpus::TokenId(1)]);
    }

    #[test]
    fn blank_text_aborts_with_line_number() {
        let lex = small_lexicon();
        let corpus = write_file(
            r#"{"id":"a","text":"commendable work"}
{"id":"b","text":"   "}
"#,
        );
        let err = load_corpus(
            corpus.path(),
            CorpusFormat::Jsonl,
            Unit::Document,
            &adjective_filter(&lex),
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn malformed_json_aborts_with_line_number() {
        let lex = small_lexicon();
        let corpus = write_file("{\"id\":\"a\",\"text\":\"solid\"}\nnot json\n");
        let err = load_corpus(
            corpus.path(),
            CorpusFormat::Jsonl,
            Unit::Document,
            &adjective_filter(&lex),
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_file_is_an_empty_corpus_error() {
        let lex = small_lexicon();
        let corpus = write_file("");
        assert!(matches!(
            load_corpus(
                corpus.path(),
                CorpusFormat::Jsonl,
                Unit::Document,
                &adjective_filter(&lex)
            )
            .unwrap_err(),
            Error::EmptyCorpus(_)
        ));
    }

    #[test]
    fn loading_twice_is_byte_identical() {
        let lex = small_lexicon();
        let corpus = write_file(
            r#"{"text":"solid commendable work"}
{"text":"intricate work. Solid stuff."}
"#,
        );
        let load = || {
            load_corpus(
                corpus.path(),
                CorpusFormat::Jsonl,
                Unit::Sentence,
                &adjective_filter(&lex),
            )
            .unwrap()
        };
        let (v1, d1) = load();
        let (v2, d2) = load();
        let ser1 = serde_json::to_string(&(&v1, &d1)).unwrap();
        let ser2 = serde_json::to_string(&(&v2, &d2)).unwrap();
        assert_eq!(ser1, ser2);
    }

    #[test]
    fn missing_id_derives_from_line_number() {
        let lex = small_lexicon();
        let corpus = write_file("{\"text\":\"solid\"}\n{\"text\":\"commendable\"}\n");
        let (_, docs) = load_corpus(
            corpus.path(),
            CorpusFormat::Jsonl,
            Unit::Document,
            &adjective_filter(&lex),
        )
        .unwrap();
        assert_eq!(docs[0].id, "1");
        assert_eq!(docs[1].id, "2");
    }

    #[test]
    fn sentence_units_get_suffixed_ids_and_et_al_flag() {
        let lex = small_lexicon();
        let corpus = write_file(
            r#"{"id":"r","text":"Solid work by Park et al. 2024 here. Commendable effort."}
"#,
        );
        let (_, docs) = load_corpus(
            corpus.path(),
            CorpusFormat::Jsonl,
            Unit::Sentence,
            &adjective_filter(&lex),
        )
        .unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "r#0");
        assert_eq!(docs[1].id, "r#1");
        assert_eq!(
            docs[0].meta.get(META_CONTAINS_ET_AL),
            Some(&MetaValue::Bool(true))
        );
        assert_eq!(
            docs[1].meta.get(META_CONTAINS_ET_AL),
            Some(&MetaValue::Bool(false))
        );
    }

    #[test]
    fn target_corpus_ignores_out_of_vocabulary_tokens() {
        let vocab = Vocabulary::from_tokens(["solid", "commendable"]).unwrap();
        let corpus = write_file(
            r#"{"text":"solid unseen commendable brilliant"}
"#,
        );
        let docs = load_target_corpus(corpus.path(), Unit::Document, &TextNorm::default(), &vocab)
            .unwrap();
        assert_eq!(docs[0].tokens().len(), 2);
    }

    #[test]
    fn union_vocabulary_spans_multiple_files() {
        let lex = small_lexicon();
        let human = write_file("{\"text\":\"commendable work\"}\n");
        let ai = write_file("{\"text\":\"solid and intricate\"}\n");
        let filter = adjective_filter(&lex);
        let mut vocab = Vocabulary::new();
        let h = load_corpus_into(human.path(), Unit::Document, &filter, &mut vocab).unwrap();
        let a = load_corpus_into(ai.path(), Unit::Document, &filter, &mut vocab).unwrap();
        assert_eq!(vocab.len(), 3);
        assert_eq!(h.len(), 1);
        assert_eq!(a.len(), 1);
        assert_eq!(vocab.get("commendable"), Some(crate::corpus::TokenId(0)));
        assert_eq!(vocab.get("intricate"), Some(crate::corpus::TokenId(2)));
    }

    #[test]
    fn duplicate_record_ids_are_rejected() {
        let lex = small_lexicon();
        let corpus = write_file(
            "{\"id\":\"r\",\"text\":\"solid\"}\n{\"id\":\"r\",\"text\":\"commendable\"}\n",
        );
        let err = load_corpus(
            corpus.path(),
            CorpusFormat::Jsonl,
            Unit::Document,
            &adjective_filter(&lex),
        )
        .unwrap_err();
        match err {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("unexpected error: {other}"),
        }
    }
}
