//! Email corpus handling: parsing, cleaning, vocabulary, encoding, splits.
//!
//! An email moves through three representations: [`RawEmail`] (as loaded),
//! [`CleanDoc`] (lowercased, stripped, stemmed tokens) and [`TokenSeq`]
//! (fixed-length id sequence).

mod csv_io;
mod synthetic;

pub use csv_io::{load_csv_corpus, write_csv_corpus};
pub use synthetic::{generate_synthetic_corpus, HAM_POOL, NEUTRAL_POOL, SPAM_POOL};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{porter_stem, StopwordSet};
use crate::rng::SeedSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Spam,
    Ham,
}

impl Label {
    /// Case-insensitive parse, the CSV contract.
    pub fn parse(s: &str) -> Result<Label> {
        match s.to_ascii_lowercase().as_str() {
            "spam" => Ok(Label::Spam),
            "ham" => Ok(Label::Ham),
            other => Err(Error::Validation(format!(
                "unknown label {other:?}, expected spam or ham"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Spam => "spam",
            Label::Ham => "ham",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An email as loaded from disk or the generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEmail {
    pub id: String,
    pub label: Label,
    pub text: String,
}

/// An email after the cleaning pipeline: lowercase stemmed tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanDoc {
    pub id: String,
    pub label: Label,
    pub tokens: Vec<String>,
}

/// One sentence of a raw email, the unit sentence attacks insert.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSpan {
    pub source_email_id: String,
    pub raw_text: String,
    pub clean_tokens: Vec<String>,
}

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;

/// Surface marker that always encodes to [`UNK_ID`]; contains non-letters so
/// it can never collide with a corpus token.
pub const UNK_SURFACE: &str = "<unk>";

const PAD_SURFACE: &str = "<pad>";

/// Token/id bijection with reserved pad=0 and unk=1, plus the sequence
/// length every encoded document is padded or truncated to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    id_to_token: Vec<String>,
    token_to_id: HashMap<String, u32>,
    max_len: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    tokens: Vec<String>,
    max_len: usize,
}

impl From<VocabularyData> for Vocabulary {
    fn from(data: VocabularyData) -> Self {
        let token_to_id = data
            .tokens
            .iter()
            .enumerate()
            .skip(2)
            .map(|(id, tok)| (tok.clone(), id as u32))
            .collect();
        Vocabulary {
            id_to_token: data.tokens,
            token_to_id,
            max_len: data.max_len,
        }
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData {
            tokens: v.id_to_token,
            max_len: v.max_len,
        }
    }
}

pub const DEFAULT_MAX_LEN: usize = 350;

impl Vocabulary {
    /// Total number of ids, reserved ones included.
    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    /// Number of real corpus tokens (ids >= 2).
    pub fn token_count(&self) -> usize {
        self.size() - 2
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn id_of(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token_of(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    /// Real tokens in id order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.id_to_token.iter().skip(2).map(String::as_str)
    }
}

/// Fixed-length encoded document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    pub ids: Vec<u32>,
    pub true_len: usize,
}

/// Run the cleaning pipeline. Order is fixed: lowercase, URL deletion,
/// non-letters to spaces, whitespace split, stopword removal, Porter stem.
pub fn clean(raw: &RawEmail, stopwords: &StopwordSet) -> CleanDoc {
    CleanDoc {
        id: raw.id.clone(),
        label: raw.label,
        tokens: clean_text(&raw.text, stopwords),
    }
}

/// Cleaning pipeline on bare text; `clean` and sentence splitting share it.
pub fn clean_text(text: &str, stopwords: &StopwordSet) -> Vec<String> {
    let lowered = text.to_lowercase();
    let no_urls = strip_urls(&lowered);
    let spaced: String = no_urls
        .chars()
        .map(|c| if c.is_ascii_lowercase() { c } else { ' ' })
        .collect();
    spaced
        .split_whitespace()
        .filter(|w| !stopwords.contains(w))
        .map(porter_stem)
        .collect()
}

/// Delete `http://...`, `https://...` and `www....` substrings up to the
/// next whitespace. Expects already-lowercased input.
fn strip_urls(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        if rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www.")
        {
            let end = rest
                .find(|c: char| c.is_whitespace())
                .unwrap_or(rest.len());
            rest = &rest[end..];
        } else {
            let mut chars = rest.char_indices();
            chars.next();
            let next = chars.next().map_or(rest.len(), |(i, _)| i);
            out.push_str(&rest[..next]);
            rest = &rest[next..];
        }
    }
    out
}

/// Rank tokens by (descending frequency, ascending lexicographic) and keep
/// the top `max_vocab`.
pub fn build_vocabulary(docs: &[CleanDoc], max_vocab: usize, max_len: usize) -> Vocabulary {
    assert!(max_vocab >= 1, "max_vocab must be >= 1");
    assert!(max_len >= 1, "max_len must be >= 1");
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for doc in docs {
        for tok in &doc.tokens {
            *freq.entry(tok.as_str()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_vocab);

    let mut id_to_token = Vec::with_capacity(ranked.len() + 2);
    id_to_token.push(PAD_SURFACE.to_string());
    id_to_token.push(UNK_SURFACE.to_string());
    id_to_token.extend(ranked.iter().map(|(tok, _)| tok.to_string()));
    let token_to_id = id_to_token
        .iter()
        .enumerate()
        .skip(2)
        .map(|(id, tok)| (tok.clone(), id as u32))
        .collect();
    Vocabulary {
        id_to_token,
        token_to_id,
        max_len,
    }
}

/// Map tokens to ids (unknown -> unk), truncate at the tail, right-pad.
pub fn encode(doc: &CleanDoc, vocab: &Vocabulary) -> TokenSeq {
    let max_len = vocab.max_len;
    let true_len = doc.tokens.len().min(max_len);
    let mut ids = Vec::with_capacity(max_len);
    for tok in doc.tokens.iter().take(true_len) {
        ids.push(vocab.id_of(tok).unwrap_or(UNK_ID));
    }
    ids.resize(max_len, PAD_ID);
    TokenSeq { ids, true_len }
}

/// Stratified deterministic split. Per label the indices are shuffled by a
/// seed-derived stream and the last `ceil(fraction * count)` become test;
/// both halves keep original corpus order.
pub fn split_corpus(
    corpus: &[RawEmail],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<RawEmail>, Vec<RawEmail>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Validation(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let space = SeedSpace::new(seed);
    let mut test_indices = std::collections::HashSet::new();
    for label in [Label::Spam, Label::Ham] {
        let mut indices: Vec<usize> = corpus
            .iter()
            .enumerate()
            .filter(|(_, e)| e.label == label)
            .map(|(i, _)| i)
            .collect();
        if indices.is_empty() {
            continue;
        }
        let mut rng = space.stream(&["split", label.as_str()]);
        shuffle(&mut indices, &mut rng);
        let n_test = (test_fraction * indices.len() as f64).ceil() as usize;
        let start = indices.len() - n_test;
        test_indices.extend(indices[start..].iter().copied());
    }
    let mut train = Vec::with_capacity(corpus.len() - test_indices.len());
    let mut test = Vec::with_capacity(test_indices.len());
    for (i, email) in corpus.iter().enumerate() {
        if test_indices.contains(&i) {
            test.push(email.clone());
        } else {
            train.push(email.clone());
        }
    }
    Ok((train, test))
}

fn shuffle<T>(items: &mut [T], rng: &mut rand_chacha::ChaCha8Rng) {
    use rand::Rng;
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// Split raw text on `.`, `!`, `?` and newline; trim; drop empty spans.
/// Text with no terminator yields a single span.
pub fn split_sentences(raw: &RawEmail, stopwords: &StopwordSet) -> Vec<SentenceSpan> {
    raw.text
        .split(['.', '!', '?', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| SentenceSpan {
            source_email_id: raw.id.clone(),
            raw_text: s.to_string(),
            clean_tokens: clean_text(s, stopwords),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn email(id: &str, label: Label, text: &str) -> RawEmail {
        RawEmail {
            id: id.into(),
            label,
            text: text.into(),
        }
    }

    #[test]
    fn clean_pipeline_hand_traced() {
        let sw = StopwordSet::default_english();
        let raw = email(
            "e1",
            Label::Spam,
            "FREE Money!!! visit http://spam.example today 100",
        );
        let doc = clean(&raw, &sw);
        assert_eq!(doc.tokens, vec!["free", "money", "visit", "today"]);
    }

    #[test]
    fn clean_all_stopwords_is_empty() {
        let sw = StopwordSet::default_english();
        let doc = clean(&email("e", Label::Ham, "the a an in"), &sw);
        assert!(doc.tokens.is_empty());
    }

    #[test]
    fn clean_stems_survivors() {
        let sw = StopwordSet::default_english();
        let doc = clean(&email("e", Label::Ham, "Cats running"), &sw);
        assert_eq!(doc.tokens, vec!["cat", "run"]);
    }

    #[test]
    fn clean_strips_www_urls_and_splits_on_punctuation() {
        let sw = StopwordSet::default_english();
        let doc = clean(
            &email("e", Label::Spam, "free!!!money www.offers.example/x deal"),
            &sw,
        );
        assert_eq!(doc.tokens, vec!["free", "money", "deal"]);
    }

    #[test]
    fn vocabulary_ranking_frequency_then_lexicographic() {
        let docs = vec![
            CleanDoc {
                id: "1".into(),
                label: Label::Spam,
                tokens: vec!["a".into(), "b".into(), "a".into()],
            },
            CleanDoc {
                id: "2".into(),
                label: Label::Ham,
                tokens: vec!["b".into(), "c".into()],
            },
        ];
        let v = build_vocabulary(&docs, 10, 5);
        assert_eq!(v.id_of("a"), Some(2));
        assert_eq!(v.id_of("b"), Some(3));
        assert_eq!(v.id_of("c"), Some(4));
        assert_eq!(v.size(), 5);

        let v1 = build_vocabulary(&docs, 1, 5);
        assert_eq!(v1.id_of("a"), Some(2));
        assert_eq!(v1.id_of("b"), None);
        assert_eq!(v1.size(), 3);
    }

    #[test]
    fn vocabulary_of_empty_docs_is_reserved_only() {
        let v = build_vocabulary(&[], 10, 5);
        assert_eq!(v.size(), 2);
        assert_eq!(v.token_count(), 0);
    }

    #[test]
    fn encode_pads_unks_and_truncates() {
        let docs = vec![CleanDoc {
            id: "1".into(),
            label: Label::Spam,
            tokens: vec!["a".into(), "a".into(), "b".into()],
        }];
        let v = build_vocabulary(&docs, 10, 5);
        let seq = encode(
            &CleanDoc {
                id: "x".into(),
                label: Label::Spam,
                tokens: vec!["a".into(), "b".into()],
            },
            &v,
        );
        assert_eq!(seq.ids, vec![2, 3, 0, 0, 0]);
        assert_eq!(seq.true_len, 2);

        let v3 = build_vocabulary(&docs, 10, 3);
        let unk = encode(
            &CleanDoc {
                id: "x".into(),
                label: Label::Spam,
                tokens: vec!["z".into()],
            },
            &v3,
        );
        assert_eq!(unk.ids, vec![UNK_ID, 0, 0]);
        assert_eq!(unk.true_len, 1);

        let long = CleanDoc {
            id: "x".into(),
            label: Label::Spam,
            tokens: vec!["a".into(); 400],
        };
        let v350 = build_vocabulary(&docs, 10, 350);
        let seq = encode(&long, &v350);
        assert_eq!(seq.true_len, 350);
        assert_eq!(seq.ids.len(), 350);
        assert!(seq.ids.iter().all(|&id| id == 2));
    }

    #[test]
    fn encode_decode_identity_on_real_ids() {
        let docs = vec![CleanDoc {
            id: "1".into(),
            label: Label::Spam,
            tokens: vec!["alpha".into(), "beta".into(), "gamma".into()],
        }];
        let v = build_vocabulary(&docs, 10, 8);
        let seq = encode(&docs[0], &v);
        for (&id, tok) in seq.ids[..seq.true_len].iter().zip(&docs[0].tokens) {
            assert_eq!(v.id_of(v.token_of(id).unwrap()), Some(id));
            assert_eq!(v.token_of(id).unwrap(), tok);
        }
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let mut corpus = Vec::new();
        for i in 0..100 {
            corpus.push(email(&format!("s{i}"), Label::Spam, "win cash"));
        }
        for i in 0..100 {
            corpus.push(email(&format!("h{i}"), Label::Ham, "lunch meeting"));
        }
        let (train, test) = split_corpus(&corpus, 0.2, 9).unwrap();
        let count = |v: &[RawEmail], l: Label| v.iter().filter(|e| e.label == l).count();
        assert_eq!(count(&train, Label::Spam), 80);
        assert_eq!(count(&train, Label::Ham), 80);
        assert_eq!(count(&test, Label::Spam), 20);
        assert_eq!(count(&test, Label::Ham), 20);

        let (train2, test2) = split_corpus(&corpus, 0.2, 9).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        let (train3, _) = split_corpus(&corpus, 0.2, 10).unwrap();
        assert_ne!(train, train3);
    }

    #[test]
    fn split_ceiling_rule_single_email() {
        let corpus = vec![email("s0", Label::Spam, "win")];
        let (train, test) = split_corpus(&corpus, 0.5, 1).unwrap();
        assert!(train.is_empty());
        assert_eq!(test.len(), 1);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let corpus = vec![email("s0", Label::Spam, "win")];
        assert!(split_corpus(&corpus, 0.0, 1).is_err());
        assert!(split_corpus(&corpus, 1.0, 1).is_err());
    }

    #[test]
    fn sentences_split_trim_drop_empty() {
        let sw = StopwordSet::default_english();
        let spans = split_sentences(&email("e", Label::Spam, "Buy now! Limited offer."), &sw);
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].raw_text, "Buy now");
        assert_eq!(spans[1].raw_text, "Limited offer");
        assert_eq!(spans[0].clean_tokens, vec!["buy"]);

        assert_eq!(split_sentences(&email("e", Label::Ham, "hello"), &sw).len(), 1);
        assert_eq!(split_sentences(&email("e", Label::Ham, "..."), &sw).len(), 0);
    }

    #[test]
    fn cleaning_is_idempotent_on_cleaned_docs() {
        let sw = StopwordSet::default_english();
        let corpus = generate_synthetic_corpus(30, 30, 123);
        for raw in &corpus {
            let doc = clean(raw, &sw);
            let rejoined = email(&raw.id, raw.label, &doc.tokens.join(" "));
            let again = clean(&rejoined, &sw);
            assert_eq!(doc.tokens, again.tokens, "idempotence broke for {}", raw.id);
        }
    }

    #[test]
    fn clean_tokens_are_alphabetic_non_stopword() {
        let sw = StopwordSet::default_english();
        let corpus = generate_synthetic_corpus(20, 20, 5);
        for raw in &corpus {
            for tok in &clean(raw, &sw).tokens {
                assert!(crate::lexicon::is_lower_alpha(tok));
                assert!(!sw.contains(tok), "stopword {tok} survived cleaning");
            }
        }
    }
}
