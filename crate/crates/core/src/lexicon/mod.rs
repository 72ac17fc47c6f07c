//! Linguistic side-tables: stemmer, stopwords, synonym/antonym thesaurus.

mod porter;

pub use porter::porter_stem;

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};

/// Default stopword list bundled with the crate.
pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Small thesaurus covering the synthetic corpus pools.
pub const DEFAULT_THESAURUS: &str = include_str!("../../data/thesaurus.tsv");

/// Lowercase words dropped during cleaning.
#[derive(Debug, Clone)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    /// Parse the one-token-per-line format (`#` comments allowed).
    pub fn parse(text: &str) -> Result<Self> {
        let mut words = HashSet::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !is_lower_alpha(line) {
                return Err(Error::Parse {
                    line: idx as u64 + 1,
                    msg: format!("stopword {line:?} is not lowercase alphabetic"),
                });
            }
            words.insert(line.to_string());
        }
        Ok(StopwordSet { words })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn default_english() -> Self {
        Self::parse(DEFAULT_STOPWORDS).expect("bundled stopword list is valid")
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Replacement mode for word-level substitution attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThesaurusMode {
    Synonym,
    Antonym,
}

/// Synonym and antonym candidate lists, file order preserved.
#[derive(Debug, Clone, Default)]
pub struct Thesaurus {
    synonyms: HashMap<String, Vec<String>>,
    antonyms: HashMap<String, Vec<String>>,
}

impl Thesaurus {
    /// Parse the TSV format: `syn|ant<TAB>head<TAB>cand1<TAB>cand2...`.
    /// A duplicate head within one mode is overwritten by the later line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut t = Thesaurus::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = raw.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let mode = fields.next().unwrap_or("");
            let map = match mode {
                "syn" => &mut t.synonyms,
                "ant" => &mut t.antonyms,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected 'syn' or 'ant', got {other:?}"),
                    })
                }
            };
            let head = fields.next().unwrap_or("").to_string();
            let candidates: Vec<String> = fields.map(str::to_string).collect();
            if head.is_empty() || candidates.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "need a head word and at least one candidate".into(),
                });
            }
            for w in std::iter::once(&head).chain(candidates.iter()) {
                if !is_lower_alpha(w) {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("{w:?} is not lowercase alphabetic"),
                    });
                }
            }
            if candidates[0] == head {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("head {head:?} may not be its own first candidate"),
                });
            }
            if map.insert(head.clone(), candidates).is_some() {
                eprintln!("warning: duplicate thesaurus head {head:?} at line {line_no}, later line wins");
            }
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_THESAURUS).expect("bundled thesaurus is valid")
    }

    /// First candidate whose Porter stem differs from the query's stem.
    /// Candidates sharing the query's stem would be no-ops after cleaning.
    pub fn lookup(&self, word: &str, mode: ThesaurusMode) -> Option<&str> {
        let map = match mode {
            ThesaurusMode::Synonym => &self.synonyms,
            ThesaurusMode::Antonym => &self.antonyms,
        };
        let candidates = map.get(word)?;
        let query_stem = porter_stem(word);
        candidates
            .iter()
            .find(|c| porter_stem(c) != query_stem)
            .map(String::as_str)
    }

    pub fn synonym_heads(&self) -> impl Iterator<Item = &str> {
        self.synonyms.keys().map(String::as_str)
    }
}

pub(crate) fn is_lower_alpha(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase())
}
