//! Perturbation attacks at character, word and sentence level, plus the
//! replayable edit log they all emit.

mod chars;

pub use chars::{
    perturb_word_chars, CharAttackKind, CharOp, CharPerturbation, DEFAULT_CHAR_FRACTION,
};

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CleanDoc, Label, RawEmail, UNK_SURFACE};
use crate::error::{Error, Result};
use crate::lexicon::{Thesaurus, ThesaurusMode};
use crate::rng::SeedSpace;
use crate::scoring::SentencePools;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordAttackKind {
    Oov,
    WordDeletion,
    Synonym,
    Antonym,
}

impl WordAttackKind {
    pub fn name(self) -> &'static str {
        match self {
            WordAttackKind::Oov => "oov",
            WordAttackKind::WordDeletion => "word_deletion",
            WordAttackKind::Synonym => "synonym",
            WordAttackKind::Antonym => "antonym",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceAttackKind {
    AddHam,
    AddSpam,
    AddHamSpam,
}

impl SentenceAttackKind {
    pub fn name(self) -> &'static str {
        match self {
            SentenceAttackKind::AddHam => "add_ham",
            SentenceAttackKind::AddSpam => "add_spam",
            SentenceAttackKind::AddHamSpam => "add_ham_spam",
        }
    }
}

/// Where an edit happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditSlot {
    /// Token position in the cleaned document, pre-attack indexing.
    Token(usize),
    /// Sentence appended to the raw text.
    SentenceAppend,
}

/// One perturbation. `before == after` records a skipped target (word too
/// short, no thesaurus entry); replaying it is a no-op.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub email_id: String,
    pub slot: EditSlot,
    pub before: String,
    pub after: String,
    pub kind: &'static str,
}

impl Edit {
    pub fn is_skip(&self) -> bool {
        self.before == self.after
    }
}

/// Replayable record of every edit an attack made.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PerturbationLog {
    pub edits: Vec<Edit>,
}

impl PerturbationLog {
    pub fn emails_touched(&self) -> usize {
        let mut ids: Vec<&str> = self
            .edits
            .iter()
            .filter(|e| !e.is_skip())
            .map(|e| e.email_id.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    pub fn applied_edits(&self) -> usize {
        self.edits.iter().filter(|e| !e.is_skip()).count()
    }

    pub fn merge(&mut self, other: PerturbationLog) {
        self.edits.extend(other.edits);
    }

    /// Line-delimited export: `email_id TAB slot TAB kind TAB before TAB after`,
    /// with before/after JSON-quoted so embedded tabs survive.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for edit in &self.edits {
            let slot = match edit.slot {
                EditSlot::Token(i) => i.to_string(),
                EditSlot::SentenceAppend => "append".to_string(),
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                edit.email_id,
                slot,
                edit.kind,
                serde_json::to_string(&edit.before)?,
                serde_json::to_string(&edit.after)?,
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Apply a character attack to the targeted positions. Only targets change;
/// the RNG stream should be the per-(email, attack) substream.
pub fn apply_char_attack(
    doc: &CleanDoc,
    targets: &[usize],
    kind: &CharAttackKind,
    rng: &mut ChaCha8Rng,
) -> (CleanDoc, PerturbationLog, usize) {
    let mut attacked = doc.clone();
    let mut log = PerturbationLog::default();
    let mut chars_total = 0;
    for &pos in targets {
        let original = attacked.tokens[pos].clone();
        let (after, affected) = match perturb_word_chars(&original, kind, rng) {
            CharPerturbation::Applied {
                word,
                chars_affected,
            } => (word, chars_affected),
            CharPerturbation::Skipped => (original.clone(), 0),
        };
        chars_total += affected;
        log.edits.push(Edit {
            email_id: doc.id.clone(),
            slot: EditSlot::Token(pos),
            before: original.clone(),
            after: after.clone(),
            kind: match kind.op {
                CharOp::Swap => "char_swap",
                CharOp::Delete => "char_delete",
                CharOp::Insert => "char_insert",
                CharOp::Replace => "char_replace",
            },
        });
        attacked.tokens[pos] = after;
    }
    (attacked, log, chars_total)
}

/// Derive the canonical per-(email, attack) character stream.
pub fn char_attack_stream(seeds: &SeedSpace, email_id: &str, kind: &CharAttackKind) -> ChaCha8Rng {
    seeds.stream(&["attack", email_id, "char", kind.op.name()])
}

/// Apply a word attack to the targeted positions.
///
/// OOV swaps targets for the UNK marker; deletion removes them; synonym and
/// antonym substitute the first stem-differing thesaurus candidate and log
/// a skip when none exists.
pub fn apply_word_attack(
    doc: &CleanDoc,
    targets: &[usize],
    kind: WordAttackKind,
    thesaurus: &Thesaurus,
) -> (CleanDoc, PerturbationLog) {
    let mut log = PerturbationLog::default();
    let mut replacements: HashMap<usize, String> = HashMap::new();
    let mut deletions: Vec<usize> = Vec::new();

    for &pos in targets {
        let original = &doc.tokens[pos];
        match kind {
            WordAttackKind::Oov => {
                replacements.insert(pos, UNK_SURFACE.to_string());
            }
            WordAttackKind::WordDeletion => deletions.push(pos),
            WordAttackKind::Synonym | WordAttackKind::Antonym => {
                let mode = match kind {
                    WordAttackKind::Synonym => ThesaurusMode::Synonym,
                    _ => ThesaurusMode::Antonym,
                };
                if let Some(repl) = thesaurus.lookup(original, mode) {
                    replacements.insert(pos, repl.to_string());
                }
            }
        }
        let after = match kind {
            WordAttackKind::WordDeletion => String::new(),
            _ => replacements.get(&pos).cloned().unwrap_or_else(|| original.clone()),
        };
        log.edits.push(Edit {
            email_id: doc.id.clone(),
            slot: EditSlot::Token(pos),
            before: original.clone(),
            after,
            kind: kind.name(),
        });
    }

    let mut attacked = doc.clone();
    for (&pos, repl) in &replacements {
        attacked.tokens[pos] = repl.clone();
    }
    deletions.sort_unstable();
    for &pos in deletions.iter().rev() {
        attacked.tokens.remove(pos);
    }
    (attacked, log)
}

/// Append pool sentences to the test set. `add_ham` appends the rank-th
/// ham-pool sentence to every spam email, `add_spam` the rank-th spam-pool
/// sentence to every ham email, `add_ham_spam` does both. Labels never
/// change and untargeted emails stay byte-identical.
pub fn apply_sentence_attack(
    test: &[RawEmail],
    pools: &SentencePools,
    kind: SentenceAttackKind,
    rank: usize,
) -> Result<(Vec<RawEmail>, PerturbationLog)> {
    let need_ham = matches!(
        kind,
        SentenceAttackKind::AddHam | SentenceAttackKind::AddHamSpam
    );
    let need_spam = matches!(
        kind,
        SentenceAttackKind::AddSpam | SentenceAttackKind::AddHamSpam
    );
    let ham_sentence = if need_ham {
        Some(pick_ranked(&pools.ham_pool, rank, "ham")?)
    } else {
        None
    };
    let spam_sentence = if need_spam {
        Some(pick_ranked(&pools.spam_pool, rank, "spam")?)
    } else {
        None
    };

    let mut log = PerturbationLog::default();
    let mut attacked = Vec::with_capacity(test.len());
    for email in test {
        let insert = match email.label {
            Label::Spam => ham_sentence,
            Label::Ham => spam_sentence,
        };
        match insert {
            Some(sentence) => {
                let mut out = email.clone();
                out.text.push_str(". ");
                out.text.push_str(sentence);
                log.edits.push(Edit {
                    email_id: email.id.clone(),
                    slot: EditSlot::SentenceAppend,
                    before: String::new(),
                    after: sentence.to_string(),
                    kind: kind.name(),
                });
                attacked.push(out);
            }
            None => attacked.push(email.clone()),
        }
    }
    Ok((attacked, log))
}

fn pick_ranked<'a>(
    pool: &'a [crate::scoring::RankedSentence],
    rank: usize,
    which: &str,
) -> Result<&'a str> {
    pool.get(rank)
        .map(|r| r.span.raw_text.as_str())
        .ok_or_else(|| {
            Error::Attack(format!(
                "{which} sentence pool has {} sentences, rank {rank} unavailable",
                pool.len()
            ))
        })
}

/// Identical contract to `load_csv_corpus`; the harness tags the loaded set
/// as a paragraph-level attack.
pub fn load_paragraph_testset(path: &Path) -> Result<Vec<RawEmail>> {
    crate::corpus::load_csv_corpus(path)
}

/// Reconstruct attacked documents from the original ones plus the log.
pub fn replay_on_docs(log: &PerturbationLog, originals: &[CleanDoc]) -> Vec<CleanDoc> {
    let mut by_email: HashMap<&str, Vec<&Edit>> = HashMap::new();
    for edit in &log.edits {
        by_email.entry(edit.email_id.as_str()).or_default().push(edit);
    }
    originals
        .iter()
        .map(|doc| {
            let mut out = doc.clone();
            let Some(edits) = by_email.get(doc.id.as_str()) else {
                return out;
            };
            let mut deletions = Vec::new();
            for edit in edits {
                let EditSlot::Token(pos) = edit.slot else {
                    continue;
                };
                if edit.kind == "word_deletion" && edit.after.is_empty() {
                    deletions.push(pos);
                } else {
                    out.tokens[pos] = edit.after.clone();
                }
            }
            deletions.sort_unstable();
            for &pos in deletions.iter().rev() {
                out.tokens.remove(pos);
            }
            out
        })
        .collect()
}

/// Reconstruct attacked raw emails (sentence attacks) from the log.
pub fn replay_on_raw(log: &PerturbationLog, originals: &[RawEmail]) -> Vec<RawEmail> {
    let mut by_email: HashMap<&str, Vec<&Edit>> = HashMap::new();
    for edit in &log.edits {
        by_email.entry(edit.email_id.as_str()).or_default().push(edit);
    }
    originals
        .iter()
        .map(|email| {
            let mut out = email.clone();
            if let Some(edits) = by_email.get(email.id.as_str()) {
                for edit in edits {
                    if edit.slot == EditSlot::SentenceAppend {
                        out.text.push_str(". ");
                        out.text.push_str(&edit.after);
                    }
                }
            }
            out
        })
        .collect()
}
