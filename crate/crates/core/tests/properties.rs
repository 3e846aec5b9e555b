//! Property tests for the pipeline invariants.

use std::collections::HashSet;
use std::io::Write;
use std::sync::OnceLock;

use proptest::prelude::*;

use textmix::corpus::{
    extract_tokens_with_lexicon, split_units, Document, Lexicon, Metadata, RawRecord, SourceLabel,
    TokenId, Unit, VocabFilterConfig, Vocabulary,
};
use textmix::distribution::{
    build_likelihood_table, fit_occurrence_model, LikelihoodEntry, LikelihoodTable,
    OccurrenceModel, SmoothingConfig,
};
use textmix::estimator::{corpus_log_likelihood, mle_alpha, SolverConfig};
use textmix::validation::{synthesize_mixture, META_MIX_SOURCE};

const ADJECTIVES: &[&str] = &[
    "commendable",
    "meticulous",
    "intricate",
    "solid",
    "novel",
    "notable",
    "thorough",
    "innovative",
];
const FILLER: &[&str] = &[
    "the", "work", "results", "method", "Section", "analysis", "2024",
];

fn lexicon_file() -> &'static tempfile::NamedTempFile {
    static FILE: OnceLock<tempfile::NamedTempFile> = OnceLock::new();
    FILE.get_or_init(|| {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for adj in ADJECTIVES {
            writeln!(f, "{adj}\tADJ").unwrap();
        }
        writeln!(f, "work\tNOUN").unwrap();
        writeln!(f, "analysis\tNOUN").unwrap();
        f.flush().unwrap();
        f
    })
}

fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon::load(lexicon_file().path()).unwrap())
}

fn filter() -> VocabFilterConfig {
    VocabFilterConfig::new(lexicon_file().path())
}

fn word_strategy() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(ADJECTIVES).prop_map(str::to_string),
        prop::sample::select(FILLER).prop_map(str::to_string),
        prop::sample::select(ADJECTIVES).prop_map(|w| format!("({w},")),
    ]
}

fn text_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(word_strategy(), 1..60).prop_map(|words| words.join(" "))
}

proptest! {
    /// Re-extracting from the retained words changes nothing.
    #[test]
    fn extraction_is_idempotent(text in text_strategy()) {
        let filter = filter();
        let once = extract_tokens_with_lexicon(&text, lexicon(), &filter);
        let again = extract_tokens_with_lexicon(&once.join(" "), lexicon(), &filter);
        prop_assert_eq!(once, again);
    }

    /// Sentence splitting never loses or invents vocabulary tokens.
    #[test]
    fn unit_splitting_preserves_the_token_set(
        sentences in prop::collection::vec(text_strategy(), 1..6),
    ) {
        let text = sentences
            .iter()
            .map(|s| format!("{}{}.", s[..1].to_uppercase(), &s[1..]))
            .collect::<Vec<_>>()
            .join(" ");
        let record = RawRecord {
            id: "r".into(),
            text: text.clone(),
            meta: Metadata::new(),
            label: SourceLabel::Unknown,
        };
        let units = split_units(&record, Unit::Sentence);
        let rejoined: String = units
            .iter()
            .map(|u| u.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let filter = filter();
        let direct: HashSet<String> =
            extract_tokens_with_lexicon(&text, lexicon(), &filter).into_iter().collect();
        let via_units: HashSet<String> =
            extract_tokens_with_lexicon(&rejoined, lexicon(), &filter).into_iter().collect();
        prop_assert_eq!(direct, via_units);
    }
}

fn probs_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.99, len..=len)
}

fn small_model_strategy() -> impl Strategy<Value = (OccurrenceModel, Vec<Document>)> {
    (1usize..=12).prop_flat_map(|vocab_size| {
        (
            probs_strategy(vocab_size),
            probs_strategy(vocab_size),
            prop::collection::vec(
                prop::collection::vec(any::<bool>(), vocab_size..=vocab_size),
                1..=20,
            ),
        )
            .prop_map(move |(p, q, presence)| {
                let vocab =
                    Vocabulary::from_tokens((0..vocab_size).map(|i| format!("w{i}"))).unwrap();
                let model = OccurrenceModel::from_probabilities(vocab, p, q).unwrap();
                let docs: Vec<Document> = presence
                    .iter()
                    .enumerate()
                    .map(|(k, present)| {
                        let tokens = present
                            .iter()
                            .enumerate()
                            .filter(|(_, &in_doc)| in_doc)
                            .map(|(t, _)| TokenId(t as u32));
                        Document::new(format!("d{k}"), tokens, Metadata::new(), Unit::Document)
                    })
                    .collect();
                (model, docs)
            })
    })
}

/// The direct product form of the document likelihood; only usable on
/// vocabularies small enough not to underflow.
fn direct_likelihood(probs: &[f64], doc: &Document) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(t, &p)| {
            if doc.contains(TokenId(t as u32)) {
                p
            } else {
                1.0 - p
            }
        })
        .product()
}

proptest! {
    /// Log-space likelihoods match the direct product on small instances.
    #[test]
    fn log_space_equals_direct_products((model, docs) in small_model_strategy()) {
        let p: Vec<f64> = (0..model.vocab().len())
            .map(|i| model.p_hat(TokenId(i as u32)))
            .collect();
        let q: Vec<f64> = (0..model.vocab().len())
            .map(|i| model.q_hat(TokenId(i as u32)))
            .collect();
        for doc in &docs {
            let (log_p, log_q) = model.doc_log_likelihoods(doc).unwrap();
            let direct_p = direct_likelihood(&p, doc);
            let direct_q = direct_likelihood(&q, doc);
            prop_assert!((log_p.exp() - direct_p).abs() <= 1e-10 * direct_p.abs());
            prop_assert!((log_q.exp() - direct_q).abs() <= 1e-10 * direct_q.abs());
        }
    }

    /// Fitted probabilities stay strictly interior and normalized.
    #[test]
    fn fitted_models_are_normalized(
        presence_h in prop::collection::vec(prop::collection::vec(any::<bool>(), 5), 1..15),
        presence_a in prop::collection::vec(prop::collection::vec(any::<bool>(), 5), 1..15),
        pseudocount in 0.1f64..4.0,
    ) {
        let vocab = Vocabulary::from_tokens((0..5).map(|i| format!("w{i}"))).unwrap();
        let to_docs = |rows: &[Vec<bool>], prefix: &str| -> Vec<Document> {
            rows.iter()
                .enumerate()
                .map(|(k, row)| {
                    let tokens = row
                        .iter()
                        .enumerate()
                        .filter(|(_, &b)| b)
                        .map(|(t, _)| TokenId(t as u32));
                    Document::new(format!("{prefix}{k}"), tokens, Metadata::new(), Unit::Document)
                })
                .collect()
        };
        let human = to_docs(&presence_h, "h");
        let ai = to_docs(&presence_a, "a");
        let model =
            fit_occurrence_model(&human, &ai, &vocab, SmoothingConfig { pseudocount }).unwrap();
        for t in 0..5u32 {
            let p = model.p_hat(TokenId(t));
            let q = model.q_hat(TokenId(t));
            prop_assert!(p > 0.0 && p < 1.0);
            prop_assert!(q > 0.0 && q < 1.0);
        }
    }
}

fn table_strategy() -> impl Strategy<Value = LikelihoodTable> {
    prop::collection::vec((-40.0f64..-2.0, -6.0f64..6.0), 2..80).prop_map(|rows| {
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, &(base, gap))| LikelihoodEntry {
                doc_id: format!("d{i}"),
                log_p: base,
                log_q: base + gap,
            })
            .collect();
        LikelihoodTable::from_entries(entries, "prop".into()).unwrap()
    })
}

proptest! {
    /// Second differences of the corpus log-likelihood are non-positive.
    #[test]
    fn log_likelihood_is_concave(table in table_strategy(), center in 0.05f64..0.95) {
        let h = center.min(1.0 - center) / 2.0;
        let (a, c) = (center - h, center + h);
        let second = corpus_log_likelihood(&table, a)
            - 2.0 * corpus_log_likelihood(&table, center)
            + corpus_log_likelihood(&table, c);
        prop_assert!(second <= 1e-9 * corpus_log_likelihood(&table, center).abs());
    }

    /// Adding one constant to both log-likelihood columns moves the argmax
    /// by at most the solver tolerance.
    #[test]
    fn argmax_is_shift_invariant(table in table_strategy(), shift in -20.0f64..20.0) {
        let cfg = SolverConfig::default();
        let shifted_entries = table
            .entries()
            .iter()
            .map(|e| LikelihoodEntry {
                doc_id: e.doc_id.clone(),
                log_p: e.log_p + shift,
                log_q: e.log_q + shift,
            })
            .collect();
        let shifted = LikelihoodTable::from_entries(shifted_entries, "prop".into()).unwrap();
        let a = mle_alpha(&table, &cfg);
        let b = mle_alpha(&shifted, &cfg);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!((a.alpha_hat - b.alpha_hat).abs() <= cfg.tol_alpha),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one side degenerate: {a:?} vs {b:?}"),
        }
    }

    /// If one reference dominates on every row (strictly somewhere), the
    /// estimate sits exactly on the corresponding boundary.
    #[test]
    fn dominance_pins_the_boundary(
        bases in prop::collection::vec(-30.0f64..-2.0, 2..40),
        gaps in prop::collection::vec(0.01f64..4.0, 2..40),
    ) {
        let n = bases.len().min(gaps.len());
        let entries = (0..n)
            .map(|i| LikelihoodEntry {
                doc_id: format!("d{i}"),
                log_p: bases[i],
                log_q: bases[i] + gaps[i],
            })
            .collect();
        let table = LikelihoodTable::from_entries(entries, "prop".into()).unwrap();
        let est = mle_alpha(&table, &SolverConfig::default()).unwrap();
        prop_assert_eq!(est.alpha_hat, 1.0);
        prop_assert!(est.at_boundary);
    }
}

fn tiny_docs(n: usize, prefix: &str) -> Vec<Document> {
    (0..n)
        .map(|i| {
            Document::new(
                format!("{prefix}{i}"),
                [TokenId((i % 3) as u32)],
                Metadata::new(),
                Unit::Document,
            )
        })
        .collect()
}

proptest! {
    /// Source tags of synthesized mixtures conserve the rounded AI count.
    #[test]
    fn mixture_tags_conserve_counts(
        alpha in 0.0f64..=1.0,
        n in 1usize..200,
        seed in any::<u64>(),
    ) {
        let human = tiny_docs(7, "h");
        let ai = tiny_docs(5, "a");
        let mix = synthesize_mixture(&human, &ai, alpha, n, seed);
        prop_assert_eq!(mix.len(), n);
        let expected_ai = ((alpha * n as f64).round_ties_even() as usize).min(n);
        let tagged_ai = mix
            .iter()
            .filter(|d| {
                d.meta.get(META_MIX_SOURCE)
                    == Some(&textmix::corpus::MetaValue::Str("ai".into()))
            })
            .count();
        prop_assert_eq!(tagged_ai, expected_ai);
    }

    /// Table construction is insensitive to document order.
    #[test]
    fn table_rows_follow_corpus_order(perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let vocab = Vocabulary::from_tokens(["a", "b", "c"]).unwrap();
        let model = OccurrenceModel::from_probabilities(
            vocab,
            vec![0.2, 0.4, 0.6],
            vec![0.3, 0.3, 0.3],
        )
        .unwrap();
        let mut docs = tiny_docs(12, "d");
        docs.shuffle(&mut textmix::rng::seeded(perm_seed));
        let table = build_likelihood_table(&model, &docs).unwrap();
        let table_ids: Vec<&str> = table.entries().iter().map(|e| e.doc_id.as_str()).collect();
        let doc_ids: Vec<&str> = docs.iter().map(|d| d.id.as_str()).collect();
        prop_assert_eq!(table_ids, doc_ids);
    }
}
