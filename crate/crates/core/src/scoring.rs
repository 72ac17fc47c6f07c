//! Token-importance scoring and the policies that turn scores into targets.
//!
//! Three scoring channels feed the attacks: spam weights (one oracle query
//! per vocabulary word, reused for every document), replace-one scores
//! (1 + n queries per document) and attention weights (gray-box, free).

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::corpus::{CleanDoc, Label, RawEmail, SentenceSpan, Vocabulary, UNK_SURFACE};
use crate::error::{Error, Result};
use crate::lexicon::StopwordSet;
use crate::models::{AttentionModel, OracleHandle};

/// Per-vocabulary-token spam weights: the oracle's score on the
/// single-token document.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    entries: BTreeMap<String, f64>,
    pub provenance: String,
    pub queries_spent: u64,
}

impl ScoreTable {
    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(t, &w)| (t.as_str(), w))
    }

    /// Total spam weight of a token list; unscored tokens contribute 0.
    pub fn total(&self, tokens: &[String]) -> f64 {
        tokens.iter().filter_map(|t| self.get(t)).sum()
    }

    /// Two-column TSV export (`token<TAB>weight`), full round-trip precision.
    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# provenance: {}", self.provenance)?;
        writeln!(out, "# queries: {}", self.queries_spent)?;
        for (token, weight) in &self.entries {
            writeln!(out, "{token}\t{weight}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load_tsv(path: &Path) -> Result<ScoreTable> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut entries = BTreeMap::new();
        let mut provenance = String::from("imported");
        let mut queries_spent = 0;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx as u64 + 1;
            if let Some(rest) = line.strip_prefix("# provenance: ") {
                provenance = rest.to_string();
                continue;
            }
            if let Some(rest) = line.strip_prefix("# queries: ") {
                queries_spent = rest.trim().parse().unwrap_or(0);
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, weight) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected token<TAB>weight".into(),
            })?;
            let weight: f64 = weight.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad weight {weight:?}"),
            })?;
            entries.insert(token.to_string(), weight);
        }
        Ok(ScoreTable {
            entries,
            provenance,
            queries_spent,
        })
    }
}

/// SW build: query the oracle once per vocabulary token on the
/// single-token document. Exactly `vocab.token_count()` queries.
pub fn build_spam_weights(scoring_oracle: &OracleHandle, vocab: &Vocabulary) -> Result<ScoreTable> {
    let total = vocab.token_count();
    let mut entries = BTreeMap::new();
    for token in vocab.tokens() {
        let probe = CleanDoc {
            id: format!("sw-probe-{token}"),
            label: Label::Ham,
            tokens: vec![token.to_string()],
        };
        match scoring_oracle.predict(&probe) {
            Ok(score) => {
                entries.insert(token.to_string(), score);
            }
            Err(e) => {
                return Err(Error::Oracle(format!(
                    "spam-weight build aborted with {} of {} entries built: {e}",
                    entries.len(),
                    total
                )));
            }
        }
    }
    Ok(ScoreTable {
        entries,
        provenance: format!("{scoring_oracle:?}"),
        queries_spent: total as u64,
    })
}

/// Per-position scores aligned with a document's tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenScoreList {
    pub entries: Vec<(String, f64)>,
}

impl TokenScoreList {
    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, s)| *s)
    }
}

/// Replace-one scoring: baseline query plus one query per position with the
/// token swapped for the UNK marker; score is the drop in spam score.
/// Exactly 1 + n queries.
pub fn replace_one_scores(oracle: &OracleHandle, doc: &CleanDoc) -> Result<TokenScoreList> {
    if doc.tokens.is_empty() {
        return Err(Error::Validation(format!(
            "cannot compute replace-one scores for empty document {:?}",
            doc.id
        )));
    }
    let baseline = oracle.predict(doc)?;
    let mut entries = Vec::with_capacity(doc.tokens.len());
    let mut perturbed = doc.clone();
    for i in 0..doc.tokens.len() {
        let original = std::mem::replace(&mut perturbed.tokens[i], UNK_SURFACE.to_string());
        let score = oracle.predict(&perturbed)?;
        perturbed.tokens[i] = original;
        entries.push((doc.tokens[i].clone(), baseline - score));
    }
    Ok(TokenScoreList { entries })
}

/// Attention-weight scoring: position-aligned softmax weights from the
/// model's attention layer. Costs zero oracle queries.
pub fn attention_token_scores(model: &AttentionModel, doc: &CleanDoc) -> Result<TokenScoreList> {
    let readout = model.readout(doc)?;
    let entries = doc
        .tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            // positions truncated out of the sequence carry no weight
            let w = if i < readout.true_len {
                readout.weights[i]
            } else {
                0.0
            };
            (tok.clone(), w)
        })
        .collect();
    Ok(TokenScoreList { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionLevel {
    Word,
    Char,
}

/// How many positions an attack may touch, and at which granularity the
/// perturbation applies afterwards. Spam documents target their
/// highest-scoring positions, ham documents their lowest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionPolicy {
    pub level: SelectionLevel,
    pub fraction: f64,
}

impl SelectionPolicy {
    pub fn new(level: SelectionLevel, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Validation(format!(
                "selection fraction must be in (0, 1], got {fraction}"
            )));
        }
        Ok(SelectionPolicy { level, fraction })
    }
}

/// Score source for target selection.
#[derive(Debug, Clone, Copy)]
pub enum Scores<'a> {
    Table(&'a ScoreTable),
    PerToken(&'a TokenScoreList),
}

impl Scores<'_> {
    fn score_at(&self, doc: &CleanDoc, position: usize) -> Option<f64> {
        match self {
            Scores::Table(table) => table.get(&doc.tokens[position]),
            Scores::PerToken(list) => list.entries.get(position).map(|(_, s)| *s),
        }
    }

    fn distinct_scored(&self, doc: &CleanDoc) -> usize {
        let mut seen = HashSet::new();
        for (i, tok) in doc.tokens.iter().enumerate() {
            if self.score_at(doc, i).is_some() {
                seen.insert(tok.as_str());
            }
        }
        seen.len()
    }
}

/// Pick the positions an attack will touch.
///
/// `k = max(1, ceil(fraction * distinct scored tokens))`; positions are
/// ranked by score (descending for spam documents, ascending for ham),
/// unscored positions rank last, ties break on ascending position. Empty
/// documents yield an empty selection. Returned positions are sorted.
pub fn select_target_words(
    doc: &CleanDoc,
    scores: Scores<'_>,
    policy: &SelectionPolicy,
) -> Vec<usize> {
    if doc.tokens.is_empty() {
        return Vec::new();
    }
    let distinct = scores.distinct_scored(doc);
    let k = ((policy.fraction * distinct as f64).ceil() as usize).max(1);

    let mut positions: Vec<(usize, Option<f64>)> = (0..doc.tokens.len())
        .map(|i| (i, scores.score_at(doc, i)))
        .collect();
    let spam_doc = doc.label == Label::Spam;
    positions.sort_by(|(ia, sa), (ib, sb)| {
        let ord = match (sa, sb) {
            (Some(a), Some(b)) => {
                if spam_doc {
                    b.total_cmp(a)
                } else {
                    a.total_cmp(b)
                }
            }
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        ord.then(ia.cmp(ib))
    });

    let mut picked: Vec<usize> = positions.iter().take(k).map(|(i, _)| *i).collect();
    picked.sort_unstable();
    picked
}

/// Corpus-global selection variant: the top (and bottom) `fraction` of the
/// score table's tokens form fixed target sets, and a document's targets
/// are every occurrence of a set member. No per-document floor.
#[derive(Debug, Clone)]
pub struct GlobalSelection {
    spam_doc_targets: HashSet<String>,
    ham_doc_targets: HashSet<String>,
    pub fraction: f64,
}

pub fn build_global_selection(table: &ScoreTable, fraction: f64) -> Result<GlobalSelection> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Validation(format!(
            "selection fraction must be in (0, 1], got {fraction}"
        )));
    }
    let mut ranked: Vec<(&str, f64)> = table.iter().collect();
    let k = ((fraction * ranked.len() as f64).ceil() as usize).min(ranked.len());
    ranked.sort_by(|(ta, sa), (tb, sb)| sb.total_cmp(sa).then(ta.cmp(tb)));
    let spam_doc_targets = ranked[..k].iter().map(|(t, _)| t.to_string()).collect();
    ranked.sort_by(|(ta, sa), (tb, sb)| sa.total_cmp(sb).then(ta.cmp(tb)));
    let ham_doc_targets = ranked[..k].iter().map(|(t, _)| t.to_string()).collect();
    Ok(GlobalSelection {
        spam_doc_targets,
        ham_doc_targets,
        fraction,
    })
}

pub fn select_global(doc: &CleanDoc, selection: &GlobalSelection) -> Vec<usize> {
    let targets = match doc.label {
        Label::Spam => &selection.spam_doc_targets,
        Label::Ham => &selection.ham_doc_targets,
    };
    doc.tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| targets.contains(*t))
        .map(|(i, _)| i)
        .collect()
}

/// A pooled training sentence with its total spam weight.
#[derive(Debug, Clone)]
pub struct RankedSentence {
    pub span: SentenceSpan,
    pub weight_total: f64,
    pub sentence_index: usize,
}

/// Insertion material for sentence attacks. The ham pool ranks ascending by
/// total spam weight (rank 0 = hammiest), the spam pool descending
/// (rank 0 = spammiest); ties break on (email id, sentence index).
#[derive(Debug, Clone)]
pub struct SentencePools {
    pub ham_pool: Vec<RankedSentence>,
    pub spam_pool: Vec<RankedSentence>,
}

pub fn build_sentence_pools(
    train: &[RawEmail],
    table: &ScoreTable,
    stopwords: &StopwordSet,
) -> SentencePools {
    let mut ham_pool = Vec::new();
    let mut spam_pool = Vec::new();
    for email in train {
        let pool = match email.label {
            Label::Ham => &mut ham_pool,
            Label::Spam => &mut spam_pool,
        };
        for (idx, span) in crate::corpus::split_sentences(email, stopwords)
            .into_iter()
            .enumerate()
        {
            let weight_total = table.total(&span.clean_tokens);
            pool.push(RankedSentence {
                span,
                weight_total,
                sentence_index: idx,
            });
        }
    }
    let tie = |s: &RankedSentence| (s.span.source_email_id.clone(), s.sentence_index);
    ham_pool.sort_by(|a, b| {
        a.weight_total
            .total_cmp(&b.weight_total)
            .then_with(|| tie(a).cmp(&tie(b)))
    });
    spam_pool.sort_by(|a, b| {
        b.weight_total
            .total_cmp(&a.weight_total)
            .then_with(|| tie(a).cmp(&tie(b)))
    });
    SentencePools {
        ham_pool,
        spam_pool,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;
    use crate::models::test_support::{doc, toy_corpus};
    use crate::models::{train_naive_bayes, NativeModel, OracleHandle};

    fn toy_oracle() -> OracleHandle {
        let (docs, vocab) = toy_corpus();
        let model = train_naive_bayes(&docs, &vocab, 1.0).unwrap();
        OracleHandle::native(NativeModel::NaiveBayes(model))
    }

    #[test]
    fn spam_weight_of_win_matches_nb_closed_form() {
        let (_, vocab) = toy_corpus();
        let oracle = toy_oracle();
        let table = build_spam_weights(&oracle, &vocab).unwrap();
        assert!((table.get("win").unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((table.get("hi").unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_vocabulary_builds_empty_table_with_zero_queries() {
        let vocab = build_vocabulary(&[], 10, 4);
        let oracle = toy_oracle();
        let table = build_spam_weights(&oracle, &vocab).unwrap();
        assert!(table.is_empty());
        assert_eq!(oracle.query_count(), 0);
        assert_eq!(table.queries_spent, 0);
    }

    #[test]
    fn sw_build_costs_one_query_per_token() {
        let docs: Vec<CleanDoc> = (0..100)
            .map(|i| {
                doc(
                    &format!("d{i}"),
                    if i % 2 == 0 { Label::Spam } else { Label::Ham },
                    &[&format!("tok{i:03}")],
                )
            })
            .collect();
        let vocab = build_vocabulary(&docs, 1000, 8);
        assert_eq!(vocab.size(), 102);
        let model = train_naive_bayes(&docs, &vocab, 1.0).unwrap();
        let oracle = OracleHandle::native(NativeModel::NaiveBayes(model));
        let before = oracle.query_count();
        let table = build_spam_weights(&oracle, &vocab).unwrap();
        assert_eq!(oracle.query_count() - before, 100);
        assert_eq!(table.len(), 100);
    }

    #[test]
    fn r1s_costs_one_plus_n_queries() {
        let oracle = toy_oracle();
        let d = doc("q", Label::Spam, &["win", "hi", "win", "zzz", "hi"]);
        let before = oracle.query_count();
        let list = replace_one_scores(&oracle, &d).unwrap();
        assert_eq!(oracle.query_count() - before, 6);
        assert_eq!(list.entries.len(), 5);
    }

    #[test]
    fn r1s_is_zero_when_replacement_changes_nothing() {
        let oracle = toy_oracle();
        // "zzz" is already out-of-vocabulary, swapping it for UNK is a no-op
        let d = doc("q", Label::Spam, &["win", "zzz"]);
        let list = replace_one_scores(&oracle, &d).unwrap();
        assert_eq!(list.entries[1].1, 0.0);
    }

    /// Independent brute-force oracle: two fresh queries per position.
    fn brute_force_r1s(oracle: &OracleHandle, d: &CleanDoc, i: usize) -> f64 {
        let base = oracle.predict(d).unwrap();
        let mut perturbed = d.clone();
        perturbed.tokens[i] = UNK_SURFACE.to_string();
        base - oracle.predict(&perturbed).unwrap()
    }

    #[test]
    fn r1s_matches_brute_force_bit_exactly() {
        let oracle = toy_oracle();
        let d = doc("q", Label::Spam, &["win", "hi", "zzz", "win"]);
        let list = replace_one_scores(&oracle, &d).unwrap();
        for (i, (_, engine)) in list.entries.iter().enumerate() {
            let brute = brute_force_r1s(&oracle, &d, i);
            assert_eq!(engine.to_bits(), brute.to_bits(), "position {i}");
        }
    }

    #[test]
    fn r1s_rejects_empty_doc() {
        let oracle = toy_oracle();
        assert!(replace_one_scores(&oracle, &doc("e", Label::Ham, &[])).is_err());
    }

    fn make_table(pairs: &[(&str, f64)]) -> ScoreTable {
        ScoreTable {
            entries: pairs.iter().map(|(t, w)| (t.to_string(), *w)).collect(),
            provenance: "test".into(),
            queries_spent: pairs.len() as u64,
        }
    }

    #[test]
    fn selection_follows_direction_rule() {
        let table = make_table(&[("a", 0.9), ("b", 0.5), ("c", 0.1)]);
        let policy = SelectionPolicy::new(SelectionLevel::Word, 0.01).unwrap();
        let spam = doc("s", Label::Spam, &["a", "b", "c"]);
        assert_eq!(
            select_target_words(&spam, Scores::Table(&table), &policy),
            vec![0]
        );
        let ham = doc("h", Label::Ham, &["a", "b", "c"]);
        assert_eq!(
            select_target_words(&ham, Scores::Table(&table), &policy),
            vec![2]
        );
    }

    #[test]
    fn selection_ties_break_on_earliest_position() {
        let table = make_table(&[("a", 0.5), ("b", 0.5)]);
        let policy = SelectionPolicy::new(SelectionLevel::Word, 0.01).unwrap();
        let d = doc("s", Label::Spam, &["b", "a"]);
        assert_eq!(
            select_target_words(&d, Scores::Table(&table), &policy),
            vec![0]
        );
    }

    #[test]
    fn selection_unscored_tokens_rank_last() {
        let table = make_table(&[("a", 0.2)]);
        let policy = SelectionPolicy::new(SelectionLevel::Word, 1.0).unwrap();
        let spam = doc("s", Label::Spam, &["zzz", "a"]);
        // distinct scored = 1, k = 1; the scored token wins over the unscored
        assert_eq!(
            select_target_words(&spam, Scores::Table(&table), &policy),
            vec![1]
        );
        let ham = doc("h", Label::Ham, &["zzz", "a"]);
        assert_eq!(
            select_target_words(&ham, Scores::Table(&table), &policy),
            vec![1]
        );
    }

    #[test]
    fn selection_empty_doc_is_empty() {
        let table = make_table(&[("a", 0.2)]);
        let policy = SelectionPolicy::new(SelectionLevel::Word, 0.5).unwrap();
        assert!(
            select_target_words(&doc("e", Label::Spam, &[]), Scores::Table(&table), &policy)
                .is_empty()
        );
    }

    #[test]
    fn selection_enlarging_fraction_is_prefix_monotone() {
        let table = make_table(&[
            ("a", 0.9),
            ("b", 0.7),
            ("c", 0.5),
            ("d", 0.3),
            ("e", 0.1),
        ]);
        let d = doc("s", Label::Spam, &["e", "d", "c", "b", "a"]);
        let mut previous: Vec<usize> = Vec::new();
        for pct in 1..=100 {
            let policy = SelectionPolicy::new(SelectionLevel::Word, pct as f64 / 100.0).unwrap();
            let picked = select_target_words(&d, Scores::Table(&table), &policy);
            for p in &previous {
                assert!(picked.contains(p), "{pct}% dropped position {p}");
            }
            previous = picked;
        }
        assert_eq!(previous.len(), 5);
    }

    #[test]
    fn per_token_scores_drive_selection() {
        let list = TokenScoreList {
            entries: vec![("x".into(), 0.1), ("y".into(), 0.8), ("z".into(), 0.3)],
        };
        let policy = SelectionPolicy::new(SelectionLevel::Char, 0.01).unwrap();
        let spam = doc("s", Label::Spam, &["x", "y", "z"]);
        assert_eq!(
            select_target_words(&spam, Scores::PerToken(&list), &policy),
            vec![1]
        );
    }

    #[test]
    fn global_selection_targets_all_occurrences_without_floor() {
        let table = make_table(&[("a", 0.9), ("b", 0.6), ("c", 0.4), ("d", 0.1)]);
        let selection = build_global_selection(&table, 0.25).unwrap();
        let spam = doc("s", Label::Spam, &["a", "c", "a"]);
        assert_eq!(select_global(&spam, &selection), vec![0, 2]);
        let ham = doc("h", Label::Ham, &["d", "b", "d"]);
        assert_eq!(select_global(&ham, &selection), vec![0, 2]);
        // no floor: a doc without set members gets no targets
        let other = doc("s", Label::Spam, &["b", "c"]);
        assert!(select_global(&other, &selection).is_empty());
    }

    #[test]
    fn attention_scores_are_aligned_normalized_and_free() {
        use crate::models::{train_attention, AttentionHyper};
        let docs = vec![
            doc("s1", Label::Spam, &["win", "cash"]),
            doc("h1", Label::Ham, &["lunch", "meet"]),
        ];
        let vocab = build_vocabulary(&docs, 100, 6);
        let hyper = AttentionHyper {
            dim: 4,
            learning_rate: 0.5,
            epochs: 5,
            seed: 3,
        };
        let model = train_attention(&docs, &vocab, &hyper).unwrap();

        let same = doc("q", Label::Spam, &["win", "win", "win", "win"]);
        let list = attention_token_scores(&model, &same).unwrap();
        for (_, s) in &list.entries {
            assert!((s - 0.25).abs() < 1e-12);
        }

        let mixed = doc("q", Label::Spam, &["win", "cash", "lunch"]);
        let list = attention_token_scores(&model, &mixed).unwrap();
        let sum: f64 = list.scores().sum();
        assert!((sum - 1.0).abs() < 1e-9);

        // argmax agrees with the raw pre-softmax alignment scores
        let raw = model.alignment_scores(&mixed);
        let argmax_scores = list
            .scores()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        let argmax_raw = raw
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax_scores, argmax_raw);
    }

    #[test]
    fn sentence_pools_rank_by_total_weight() {
        let sw = StopwordSet::default_english();
        let table = make_table(&[("win", 0.9), ("cash", 0.8), ("meet", 0.1), ("noon", 0.2)]);
        let train = vec![
            RawEmail {
                id: "h1".into(),
                label: Label::Ham,
                text: "hi. meeting at noon.".into(),
            },
            RawEmail {
                id: "s1".into(),
                label: Label::Spam,
                text: "win cash. win.".into(),
            },
        ];
        let pools = build_sentence_pools(&train, &table, &sw);
        assert_eq!(pools.ham_pool.len(), 2);
        assert_eq!(pools.spam_pool.len(), 2);
        // spam rank 0: "win cash" (1.7) over "win" (0.9)
        assert_eq!(pools.spam_pool[0].span.raw_text, "win cash");
        assert!((pools.spam_pool[0].weight_total - 1.7).abs() < 1e-12);
        // ham rank 0: "hi" cleans to zero scored tokens, key 0
        assert_eq!(pools.ham_pool[0].span.raw_text, "hi");
        assert_eq!(pools.ham_pool[0].weight_total, 0.0);
    }

    #[test]
    fn score_table_tsv_round_trips() {
        let table = make_table(&[("win", 2.0 / 3.0), ("hi", 1.0 / 3.0)]);
        let file = tempfile::NamedTempFile::new().unwrap();
        table.save_tsv(file.path()).unwrap();
        let back = ScoreTable::load_tsv(file.path()).unwrap();
        assert_eq!(back.entries, table.entries);
        assert_eq!(back.queries_spent, table.queries_spent);
    }
}
