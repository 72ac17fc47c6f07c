//! Experiment orchestration: train, score, attack, evaluate, report.

mod metrics;
mod report;

pub use metrics::{compute_confusion, compute_metrics, ConfusionMatrix, MetricsBundle};
pub use report::{AttackReport, EvalSection, PerturbationSummary, QuerySection, ReportFormat};

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{
    apply_char_attack, apply_sentence_attack, apply_word_attack, char_attack_stream,
    load_paragraph_testset, CharAttackKind, CharOp, PerturbationLog, SentenceAttackKind,
    WordAttackKind, DEFAULT_CHAR_FRACTION,
};
use crate::corpus::{
    build_vocabulary, clean, generate_synthetic_corpus, load_csv_corpus, CleanDoc, Label,
    RawEmail, DEFAULT_MAX_LEN,
};
use crate::error::{Error, Result};
use crate::lexicon::{StopwordSet, Thesaurus};
use crate::models::{
    train_attention, train_logistic, train_naive_bayes, AttentionHyper, AttentionModel,
    LogisticHyper, NativeModel, OracleHandle,
};
use crate::rng::SeedSpace;
use crate::scoring::{
    attention_token_scores, build_global_selection, build_sentence_pools, build_spam_weights,
    replace_one_scores, select_global, select_target_words, GlobalSelection, Scores, ScoreTable,
    SelectionLevel, SelectionPolicy,
};

pub const DEFAULT_WORD_FRACTION: f64 = 0.03;
pub const DEFAULT_SPLIT_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum CorpusSource {
    Csv {
        path: PathBuf,
    },
    Synthetic {
        n_spam: usize,
        n_ham: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NaiveBayes,
    Logistic,
    Attention,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::Logistic => "logistic",
            ModelKind::Attention => "attention",
        }
    }

    pub fn parse(s: &str) -> Result<ModelKind> {
        match s {
            "naive_bayes" | "nb" => Ok(ModelKind::NaiveBayes),
            "logistic" => Ok(ModelKind::Logistic),
            "attention" => Ok(ModelKind::Attention),
            other => Err(Error::Validation(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringFunction {
    Sw,
    R1s,
    Aw,
}

impl ScoringFunction {
    pub fn parse(s: &str) -> Result<ScoringFunction> {
        match s {
            "sw" => Ok(ScoringFunction::Sw),
            "r1s" => Ok(ScoringFunction::R1s),
            "aw" => Ok(ScoringFunction::Aw),
            other => Err(Error::Validation(format!(
                "unknown scoring function {other:?}, expected sw, r1s or aw"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "level", rename_all = "snake_case")]
pub enum AttackSpec {
    None,
    Word { kind: WordAttackKind },
    Char { op: CharOp },
    Sentence { kind: SentenceAttackKind },
    Paragraph { path: PathBuf },
}

impl AttackSpec {
    /// CLI and config-file notation: `none`, `oov`, `word-deletion`,
    /// `synonym`, `antonym`, `char-swap`, `char-delete`, `char-insert`,
    /// `char-replace`, `add-ham`, `add-spam`, `add-ham-spam`,
    /// `paragraph:<csv path>`.
    pub fn parse(s: &str) -> Result<AttackSpec> {
        if let Some(path) = s.strip_prefix("paragraph:") {
            return Ok(AttackSpec::Paragraph {
                path: PathBuf::from(path),
            });
        }
        let spec = match s {
            "none" => AttackSpec::None,
            "oov" => AttackSpec::Word {
                kind: WordAttackKind::Oov,
            },
            "word-deletion" => AttackSpec::Word {
                kind: WordAttackKind::WordDeletion,
            },
            "synonym" => AttackSpec::Word {
                kind: WordAttackKind::Synonym,
            },
            "antonym" => AttackSpec::Word {
                kind: WordAttackKind::Antonym,
            },
            "char-swap" => AttackSpec::Char { op: CharOp::Swap },
            "char-delete" => AttackSpec::Char { op: CharOp::Delete },
            "char-insert" => AttackSpec::Char { op: CharOp::Insert },
            "char-replace" => AttackSpec::Char {
                op: CharOp::Replace,
            },
            "add-ham" => AttackSpec::Sentence {
                kind: SentenceAttackKind::AddHam,
            },
            "add-spam" => AttackSpec::Sentence {
                kind: SentenceAttackKind::AddSpam,
            },
            "add-ham-spam" => AttackSpec::Sentence {
                kind: SentenceAttackKind::AddHamSpam,
            },
            other => {
                return Err(Error::Validation(format!("unknown attack {other:?}")));
            }
        };
        Ok(spec)
    }

    pub fn level_name(&self) -> &'static str {
        match self {
            AttackSpec::None => "-",
            AttackSpec::Word { .. } => "word",
            AttackSpec::Char { .. } => "char",
            AttackSpec::Sentence { .. } => "sentence",
            AttackSpec::Paragraph { .. } => "paragraph",
        }
    }

    pub fn attack_name(&self) -> String {
        match self {
            AttackSpec::None => "none".into(),
            AttackSpec::Word { kind } => kind.name().into(),
            AttackSpec::Char { op } => format!("char_{}", op.name()),
            AttackSpec::Sentence { kind } => kind.name().into(),
            AttackSpec::Paragraph { .. } => "paragraph".into(),
        }
    }
}

/// Full description of one experiment. Serialized verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub corpus: CorpusSource,
    pub split_fraction: f64,
    pub split_seed: u64,
    pub model: ModelKind,
    /// Laplace smoothing for the naive Bayes target.
    pub alpha: f64,
    pub logistic: LogisticHyper,
    pub attention: AttentionHyper,
    pub scoring: ScoringFunction,
    /// Scoring oracle model; None reuses the target oracle.
    pub scoring_model: Option<ModelKind>,
    pub attack: AttackSpec,
    pub word_fraction: f64,
    pub char_fraction: f64,
    pub sentence_rank: usize,
    /// Select k% of the score table globally instead of k% per document.
    pub global_selection: bool,
    pub max_vocab: usize,
    pub max_len: usize,
    /// Master seed for attack randomness.
    pub seed: u64,
    /// Optional stopword file replacing the bundled list.
    pub stopword_file: Option<PathBuf>,
    /// Optional thesaurus file replacing the bundled one.
    pub thesaurus_file: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: CorpusSource::Synthetic {
                n_spam: 1000,
                n_ham: 1000,
                seed: 7,
            },
            split_fraction: DEFAULT_SPLIT_FRACTION,
            split_seed: 1,
            model: ModelKind::NaiveBayes,
            alpha: 1.0,
            logistic: LogisticHyper::default(),
            attention: AttentionHyper::default(),
            scoring: ScoringFunction::Sw,
            scoring_model: None,
            attack: AttackSpec::None,
            word_fraction: DEFAULT_WORD_FRACTION,
            char_fraction: DEFAULT_CHAR_FRACTION,
            sentence_rank: 0,
            global_selection: false,
            max_vocab: 50_000,
            max_len: DEFAULT_MAX_LEN,
            seed: 0,
            stopword_file: None,
            thesaurus_file: None,
        }
    }
}

impl ExperimentConfig {
    pub fn effective_scoring_model(&self) -> ModelKind {
        self.scoring_model.unwrap_or(self.model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Validation(format!(
                "split_fraction must be in (0, 1), got {}",
                self.split_fraction
            )));
        }
        if !(self.word_fraction > 0.0 && self.word_fraction <= 1.0) {
            return Err(Error::Validation(format!(
                "word_fraction must be in (0, 1], got {}",
                self.word_fraction
            )));
        }
        if !(self.char_fraction > 0.0 && self.char_fraction <= 1.0) {
            return Err(Error::Validation(format!(
                "char_fraction must be in (0, 1], got {}",
                self.char_fraction
            )));
        }
        if self.scoring == ScoringFunction::Aw
            && self.effective_scoring_model() != ModelKind::Attention
        {
            return Err(Error::Validation(
                "attention-weight scoring requires an attention scoring model".into(),
            ));
        }
        if matches!(self.attack, AttackSpec::Sentence { .. })
            && self.scoring != ScoringFunction::Sw
        {
            return Err(Error::Validation(
                "sentence attacks rank pool sentences by spam-weight totals; use sw scoring"
                    .into(),
            ));
        }
        if self.global_selection && self.scoring != ScoringFunction::Sw {
            return Err(Error::Validation(
                "global selection needs a spam-weight table; use sw scoring".into(),
            ));
        }
        Ok(())
    }
}

/// Attacked corpus plus edit log, alongside the report.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub report: AttackReport,
    /// The attacked test set. Word/char attacks render cleaned tokens
    /// space-joined; sentence and paragraph attacks keep raw text.
    pub attacked: Vec<RawEmail>,
    pub log: PerturbationLog,
}

/// Shared state for train-once-attack-many runs.
struct Prepared {
    stopwords: StopwordSet,
    thesaurus: Thesaurus,
    train_raw: Vec<RawEmail>,
    test_raw: Vec<RawEmail>,
    test_docs: Vec<CleanDoc>,
    target: OracleHandle,
    /// Present only when the scoring model differs from the target.
    scoring_handle: Option<OracleHandle>,
    scoring_attention: Option<AttentionModel>,
    table: Option<ScoreTable>,
    table_queries: u64,
    baseline: EvalSection,
    baseline_queries: u64,
    build_ms: u64,
}

impl Prepared {
    fn scoring_oracle(&self) -> &OracleHandle {
        self.scoring_handle.as_ref().unwrap_or(&self.target)
    }

    fn build(config: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Prepared> {
        let started = Instant::now();
        config.validate().map_err(|e| e.at_stage("validate"))?;

        let stopwords = match &config.stopword_file {
            Some(path) => StopwordSet::load(path),
            None => Ok(StopwordSet::default_english()),
        }
        .map_err(|e| e.at_stage("load"))?;
        let thesaurus = match &config.thesaurus_file {
            Some(path) => Thesaurus::load(path),
            None => Ok(Thesaurus::bundled()),
        }
        .map_err(|e| e.at_stage("load"))?;

        let corpus = match &config.corpus {
            CorpusSource::Csv { path } => {
                load_csv_corpus(path).map_err(|e| e.at_stage("load"))?
            }
            CorpusSource::Synthetic {
                n_spam,
                n_ham,
                seed,
            } => generate_synthetic_corpus(*n_spam, *n_ham, *seed),
        };

        let (train_raw, mut test_raw) =
            crate::corpus::split_corpus(&corpus, config.split_fraction, config.split_seed)
                .map_err(|e| e.at_stage("split"))?;

        // a paragraph-level run swaps in the externally supplied test set
        if let AttackSpec::Paragraph { path } = &config.attack {
            test_raw = load_paragraph_testset(path).map_err(|e| e.at_stage("load"))?;
        }

        let clean_all = |raws: &[RawEmail]| -> Vec<CleanDoc> {
            pool.install(|| raws.par_iter().map(|r| clean(r, &stopwords)).collect())
        };
        let train_docs = clean_all(&train_raw);
        let test_docs = clean_all(&test_raw);

        let vocab = build_vocabulary(&train_docs, config.max_vocab, config.max_len);

        let train_model = |kind: ModelKind| -> Result<NativeModel> {
            let model = match kind {
                ModelKind::NaiveBayes => {
                    NativeModel::NaiveBayes(train_naive_bayes(&train_docs, &vocab, config.alpha)?)
                }
                ModelKind::Logistic => {
                    NativeModel::Logistic(train_logistic(&train_docs, &vocab, &config.logistic)?)
                }
                ModelKind::Attention => NativeModel::Attention(train_attention(
                    &train_docs,
                    &vocab,
                    &config.attention,
                )?),
            };
            Ok(model)
        };

        let target_model = train_model(config.model).map_err(|e| e.at_stage("train"))?;
        let target = OracleHandle::native(target_model);

        let scoring_handle = match config.scoring_model {
            Some(kind) if kind != config.model => Some(OracleHandle::native(
                train_model(kind).map_err(|e| e.at_stage("train-scoring"))?,
            )),
            _ => None,
        };
        let scoring_attention = {
            let handle = scoring_handle.as_ref().unwrap_or(&target);
            handle.attention_model().cloned()
        };

        let needs_table = config.global_selection
            || matches!(config.attack, AttackSpec::Sentence { .. })
            || (config.scoring == ScoringFunction::Sw
                && matches!(config.attack, AttackSpec::Word { .. } | AttackSpec::Char { .. }));
        let (table, table_queries) = if needs_table {
            let oracle = scoring_handle.as_ref().unwrap_or(&target);
            let before = oracle.query_count();
            let table = build_spam_weights(oracle, &vocab).map_err(|e| e.at_stage("score"))?;
            (Some(table), oracle.query_count() - before)
        } else {
            (None, 0)
        };

        let before = target.query_count();
        let baseline =
            evaluate(&target, &test_docs, pool).map_err(|e| e.at_stage("evaluate"))?;
        let baseline_queries = target.query_count() - before;

        Ok(Prepared {
            stopwords,
            thesaurus,
            train_raw,
            test_raw,
            test_docs,
            target,
            scoring_handle,
            scoring_attention,
            table,
            table_queries,
            baseline,
            baseline_queries,
            build_ms: started.elapsed().as_millis() as u64,
        })
    }

    fn targets_for(
        &self,
        config: &ExperimentConfig,
        doc: &CleanDoc,
        level: SelectionLevel,
        global: Option<&GlobalSelection>,
    ) -> Result<Vec<usize>> {
        if doc.tokens.is_empty() {
            return Ok(Vec::new());
        }
        if let Some(global) = global {
            return Ok(select_global(doc, global));
        }
        let policy = SelectionPolicy::new(level, config.word_fraction)?;
        match config.scoring {
            ScoringFunction::Sw => {
                let table = self.table.as_ref().expect("sw scoring builds a table");
                Ok(select_target_words(doc, Scores::Table(table), &policy))
            }
            ScoringFunction::R1s => {
                let list = replace_one_scores(self.scoring_oracle(), doc)?;
                Ok(select_target_words(doc, Scores::PerToken(&list), &policy))
            }
            ScoringFunction::Aw => {
                let model = self
                    .scoring_attention
                    .as_ref()
                    .expect("aw scoring validated an attention model");
                let list = attention_token_scores(model, doc)?;
                Ok(select_target_words(doc, Scores::PerToken(&list), &policy))
            }
        }
    }

    /// Attack the shared test set under `config` and assemble the outcome.
    fn run_attack(
        &self,
        config: &ExperimentConfig,
        pool: &rayon::ThreadPool,
    ) -> Result<ExperimentOutcome> {
        let started = Instant::now();
        let seeds = SeedSpace::new(config.seed);

        let global = if config.global_selection {
            let table = self.table.as_ref().expect("global selection builds a table");
            Some(build_global_selection(table, config.word_fraction)?)
        } else {
            None
        };

        let scoring_before = self.scoring_oracle().query_count();
        let mut attacked_raw: Option<Vec<RawEmail>> = None;
        let (attacked_docs, log, chars_edited) = match &config.attack {
            AttackSpec::None | AttackSpec::Paragraph { .. } => {
                attacked_raw = Some(self.test_raw.clone());
                (self.test_docs.clone(), PerturbationLog::default(), 0)
            }
            AttackSpec::Word { kind } => {
                let results: Result<Vec<(CleanDoc, PerturbationLog)>> = pool.install(|| {
                    self.test_docs
                        .par_iter()
                        .map(|doc| {
                            let targets = self.targets_for(
                                config,
                                doc,
                                SelectionLevel::Word,
                                global.as_ref(),
                            )?;
                            Ok(apply_word_attack(doc, &targets, *kind, &self.thesaurus))
                        })
                        .collect()
                });
                let mut docs = Vec::with_capacity(self.test_docs.len());
                let mut log = PerturbationLog::default();
                for (doc, l) in results? {
                    docs.push(doc);
                    log.merge(l);
                }
                (docs, log, 0)
            }
            AttackSpec::Char { op } => {
                let kind = CharAttackKind::new(*op, config.char_fraction)?;
                let results: Result<Vec<(CleanDoc, PerturbationLog, usize)>> =
                    pool.install(|| {
                        self.test_docs
                            .par_iter()
                            .map(|doc| {
                                let targets = self.targets_for(
                                    config,
                                    doc,
                                    SelectionLevel::Char,
                                    global.as_ref(),
                                )?;
                                let mut rng = char_attack_stream(&seeds, &doc.id, &kind);
                                Ok(apply_char_attack(doc, &targets, &kind, &mut rng))
                            })
                            .collect()
                    });
                let mut docs = Vec::with_capacity(self.test_docs.len());
                let mut log = PerturbationLog::default();
                let mut chars = 0u64;
                for (doc, l, c) in results? {
                    docs.push(doc);
                    log.merge(l);
                    chars += c as u64;
                }
                (docs, log, chars)
            }
            AttackSpec::Sentence { kind } => {
                let table = self.table.as_ref().expect("sentence attack builds a table");
                let pools = build_sentence_pools(&self.train_raw, table, &self.stopwords);
                let (raws, log) =
                    apply_sentence_attack(&self.test_raw, &pools, *kind, config.sentence_rank)?;
                let docs = pool.install(|| {
                    raws.par_iter().map(|r| clean(r, &self.stopwords)).collect()
                });
                attacked_raw = Some(raws);
                (docs, log, 0)
            }
        };
        let r1s_queries = self.scoring_oracle().query_count() - scoring_before;

        let eval_before = self.target.query_count();
        let attacked = evaluate(&self.target, &attacked_docs, pool)
            .map_err(|e| e.at_stage("evaluate-attacked"))?;
        let attacked_eval_queries = self.target.query_count() - eval_before;

        let sentences_added = if matches!(config.attack, AttackSpec::Sentence { .. }) {
            log.applied_edits() as u64
        } else {
            0
        };
        let words_edited = if matches!(config.attack, AttackSpec::Sentence { .. }) {
            0
        } else {
            log.applied_edits() as u64
        };

        let report = AttackReport {
            config: config.clone(),
            attack_free: self.baseline,
            attacked,
            queries: QuerySection {
                scoring: self.table_queries + r1s_queries,
                evaluation: self.baseline_queries + attacked_eval_queries,
            },
            perturbation: PerturbationSummary {
                emails_touched: log.emails_touched() as u64,
                words_edited,
                chars_edited,
                sentences_added,
            },
            wall_time_ms: self.build_ms + started.elapsed().as_millis() as u64,
        };
        let attacked = attacked_raw.unwrap_or_else(|| {
            attacked_docs
                .iter()
                .map(|d| RawEmail {
                    id: d.id.clone(),
                    label: d.label,
                    text: d.tokens.join(" "),
                })
                .collect()
        });
        Ok(ExperimentOutcome {
            report,
            attacked,
            log,
        })
    }
}

fn evaluate(
    oracle: &OracleHandle,
    docs: &[CleanDoc],
    pool: &rayon::ThreadPool,
) -> Result<EvalSection> {
    let predictions: Result<Vec<Label>> = pool.install(|| {
        docs.par_iter()
            .map(|doc| oracle.predict_label(doc))
            .collect()
    });
    let predictions = predictions?;
    let truth: Vec<Label> = docs.iter().map(|d| d.label).collect();
    let confusion = compute_confusion(&predictions, &truth)?;
    let metrics = compute_metrics(&confusion)?;
    Ok(EvalSection { confusion, metrics })
}

fn make_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("cannot build thread pool: {e}")))
}

/// Run the full pipeline: load, split, clean, train, score, evaluate
/// attack-free, attack, evaluate attacked. Deterministic from the config;
/// `threads` only changes scheduling, never results.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<AttackReport> {
    Ok(run_experiment_with_artifacts(config, threads)?.report)
}

/// Like `run_experiment`, additionally returning the attacked corpus and
/// the perturbation log for export.
pub fn run_experiment_with_artifacts(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentOutcome> {
    let pool = make_pool(threads)?;
    let prepared = Prepared::build(config, &pool)?;
    prepared.run_attack(config, &pool)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    WordFraction,
    CharFraction,
}

impl SweepParameter {
    pub fn parse(s: &str) -> Result<SweepParameter> {
        match s {
            "word_fraction" => Ok(SweepParameter::WordFraction),
            "char_fraction" => Ok(SweepParameter::CharFraction),
            other => Err(Error::Validation(format!(
                "unknown sweep parameter {other:?}"
            ))),
        }
    }
}

/// One report per value, sharing the trained model, score table and
/// attack-free evaluation. Values must be sorted ascending.
pub fn run_sweep(
    config: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
    threads: usize,
) -> Result<Vec<AttackReport>> {
    if values.is_empty() {
        return Err(Error::Validation("sweep needs at least one value".into()));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Validation(
            "sweep values must be sorted ascending".into(),
        ));
    }
    let pool = make_pool(threads)?;
    let prepared = Prepared::build(config, &pool)?;
    values
        .iter()
        .map(|&value| {
            let mut point = config.clone();
            match parameter {
                SweepParameter::WordFraction => point.word_fraction = value,
                SweepParameter::CharFraction => point.char_fraction = value,
            }
            point.validate()?;
            Ok(prepared.run_attack(&point, &pool)?.report)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(attack: AttackSpec) -> ExperimentConfig {
        ExperimentConfig {
            corpus: CorpusSource::Synthetic {
                n_spam: 60,
                n_ham: 60,
                seed: 7,
            },
            split_seed: 1,
            seed: 3,
            attack,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn none_attack_reproduces_baseline_metrics() {
        let report = run_experiment(&small_config(AttackSpec::None), 1).unwrap();
        assert_eq!(report.attack_free, report.attacked);
        assert_eq!(report.perturbation, PerturbationSummary::default());
    }

    #[test]
    fn same_config_gives_identical_reports() {
        let config = small_config(AttackSpec::Word {
            kind: WordAttackKind::Oov,
        });
        let a = run_experiment(&config, 1).unwrap();
        let b = run_experiment(&config, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.to_structured_string().unwrap(),
            b.to_structured_string().unwrap()
        );
    }

    #[test]
    fn thread_count_does_not_change_the_report() {
        let config = small_config(AttackSpec::Char { op: CharOp::Delete });
        let single = run_experiment(&config, 1).unwrap();
        let many = run_experiment(&config, 4).unwrap();
        assert_eq!(single, many);
        assert_eq!(
            single.to_structured_string().unwrap(),
            many.to_structured_string().unwrap()
        );
    }

    #[test]
    fn oov_attack_damages_the_synthetic_corpus() {
        let config = small_config(AttackSpec::Word {
            kind: WordAttackKind::Oov,
        });
        let report = run_experiment(&config, 2).unwrap();
        // 96 training docs leave noisy NB estimates; the full-size corpus
        // is held to a much higher bar in the acceptance suite
        assert!(report.attack_free.metrics.accuracy > 0.8);
        assert!(report.attacked.metrics.accuracy < report.attack_free.metrics.accuracy);
        assert!(report.perturbation.emails_touched > 0);
    }

    #[test]
    fn sweep_shares_baseline_and_requires_sorted_values() {
        let config = small_config(AttackSpec::Word {
            kind: WordAttackKind::WordDeletion,
        });
        let reports = run_sweep(
            &config,
            SweepParameter::WordFraction,
            &[0.01, 0.03, 0.05],
            2,
        )
        .unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert_eq!(r.attack_free, reports[0].attack_free);
        }
        assert!(run_sweep(
            &config,
            SweepParameter::WordFraction,
            &[0.05, 0.01],
            1
        )
        .is_err());

        // a degenerate single-value sweep equals the plain experiment
        let single = run_sweep(&config, SweepParameter::WordFraction, &[0.03], 1).unwrap();
        let direct = run_experiment(&config, 1).unwrap();
        assert_eq!(single[0], direct);
    }

    #[test]
    fn sentence_attack_requires_sw_scoring() {
        let mut config = small_config(AttackSpec::Sentence {
            kind: SentenceAttackKind::AddSpam,
        });
        config.scoring = ScoringFunction::R1s;
        assert!(matches!(
            run_experiment(&config, 1),
            Err(Error::Stage { stage: "validate", .. })
        ));
    }

    #[test]
    fn aw_scoring_requires_attention_model() {
        let mut config = small_config(AttackSpec::Word {
            kind: WordAttackKind::Oov,
        });
        config.scoring = ScoringFunction::Aw;
        assert!(run_experiment(&config, 1).is_err());
        config.scoring_model = Some(ModelKind::Attention);
        config.attention.epochs = 5;
        let report = run_experiment(&config, 2).unwrap();
        assert_eq!(report.queries.scoring, 0, "aw scoring is query-free");
    }

    #[test]
    fn stage_errors_name_the_stage() {
        let mut config = small_config(AttackSpec::None);
        config.corpus = CorpusSource::Csv {
            path: PathBuf::from("/nonexistent/corpus.csv"),
        };
        let err = run_experiment(&config, 1).unwrap_err();
        assert!(err.to_string().contains("load"), "{err}");
    }

    #[test]
    fn report_emit_is_byte_stable_and_round_trips() {
        let config = small_config(AttackSpec::Word {
            kind: WordAttackKind::Oov,
        });
        let report = run_experiment(&config, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        report.emit(ReportFormat::Structured, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        report.emit(ReportFormat::Structured, &path).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());

        let reloaded = AttackReport::load(&path).unwrap();
        assert_eq!(reloaded, report);

        let table = report.to_table_string();
        let header_cols = table.lines().next().unwrap().split('|').count();
        assert_eq!(header_cols, 11);
        for line in table.lines().skip(1) {
            assert_eq!(line.split('|').count(), 11);
        }
    }
}
