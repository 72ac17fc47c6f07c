//! Command-line front end: corpus generation, training, scoring, attacks,
//! evaluation, sweeps and report formatting.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mailsting::corpus::{
    build_vocabulary, clean, generate_synthetic_corpus, load_csv_corpus, split_corpus,
    write_csv_corpus,
};
use mailsting::harness::{
    run_experiment_with_artifacts, run_sweep, AttackReport, AttackSpec, CorpusSource,
    ExperimentConfig, ModelKind, ReportFormat, ScoringFunction, SweepParameter,
};
use mailsting::lexicon::StopwordSet;
use mailsting::models::{
    connect_remote_oracle, train_attention, train_logistic, train_naive_bayes, NativeModel,
    OracleHandle, RemoteSpec,
};
use mailsting::scoring::build_spam_weights;
use mailsting::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mailsting",
    version,
    about = "Black-box adversarial attack engine for text spam classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus CSV.
    GenCorpus {
        #[arg(long)]
        n_spam: usize,
        #[arg(long)]
        n_ham: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the configured target model and dump its parameters.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a spam-weight table (one oracle query per vocabulary token).
    Score {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Score against a remote oracle instead of the native model:
        /// `tcp:host:port` or a command line.
        #[arg(long)]
        remote: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attack the test split and write the attacked corpus plus edit log.
    Attack {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        out_corpus: PathBuf,
        #[arg(long)]
        out_log: PathBuf,
        /// Also write the full evaluation report here.
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Run the full experiment and emit the report.
    Eval {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Structured (JSON) report path.
        #[arg(long)]
        out: PathBuf,
        /// Optional text-table report path.
        #[arg(long)]
        out_table: Option<PathBuf>,
    },
    /// Sweep word or char fraction, train-once attack-many.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// `word_fraction` or `char_fraction`.
        #[arg(long)]
        param: String,
        /// Comma-separated ascending values, e.g. `0.01,0.02,0.03`.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Re-render a structured report.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// `table` or `structured`.
        #[arg(long, default_value = "table")]
        format: String,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Experiment parameters. Every flag can also appear in the `--config`
/// key-value file under the same name without the leading dashes; flags win.
#[derive(Args, Debug, Default)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Labeled corpus CSV (header `label,text`).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Synthetic corpus `n_spam,n_ham,seed`.
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long)]
    split_fraction: Option<f64>,
    #[arg(long)]
    split_seed: Option<u64>,
    /// `naive_bayes` (or `nb`), `logistic`, `attention`.
    #[arg(long)]
    model: Option<String>,
    /// Laplace smoothing for naive Bayes.
    #[arg(long)]
    alpha: Option<f64>,
    /// Logistic learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Logistic epochs.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    /// Seed for logistic/attention initialization.
    #[arg(long)]
    model_seed: Option<u64>,
    /// Attention embedding dimension.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    attn_lr: Option<f64>,
    #[arg(long)]
    attn_epochs: Option<usize>,
    /// `sw`, `r1s` or `aw`.
    #[arg(long)]
    scoring: Option<String>,
    /// Scoring oracle model when different from the target.
    #[arg(long)]
    scoring_model: Option<String>,
    /// Attack spec, e.g. `oov`, `char-swap`, `add-spam`, `paragraph:<csv>`.
    #[arg(long)]
    attack: Option<String>,
    #[arg(long)]
    word_fraction: Option<f64>,
    #[arg(long)]
    char_fraction: Option<f64>,
    #[arg(long)]
    sentence_rank: Option<usize>,
    /// Select k% of the score table globally instead of per document.
    #[arg(long)]
    global_selection: bool,
    #[arg(long)]
    max_vocab: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    /// Master seed for attack randomness (mandatory for attack/sweep).
    #[arg(long)]
    seed: Option<u64>,
    /// Stopword file replacing the bundled list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Thesaurus TSV replacing the bundled one.
    #[arg(long)]
    thesaurus: Option<PathBuf>,
    /// Worker threads (scheduling only, never results).
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCorpus {
            n_spam,
            n_ham,
            seed,
            out,
        } => {
            let corpus = generate_synthetic_corpus(n_spam, n_ham, seed);
            write_csv_corpus(&out, &corpus)?;
            eprintln!("wrote {} emails to {}", corpus.len(), out.display());
            Ok(())
        }
        Command::Train { exp, out } => {
            let (config, _) = exp.build_config(false)?;
            let model = train_target(&config)?;
            std::fs::write(&out, serde_json::to_string_pretty(&model)?)?;
            eprintln!("wrote {} model to {}", model.kind_name(), out.display());
            Ok(())
        }
        Command::Score { exp, remote, out } => {
            let (config, _) = exp.build_config(false)?;
            let stopwords = load_stopwords(&config)?;
            let corpus = load_corpus(&config)?;
            let (train_raw, _) =
                split_corpus(&corpus, config.split_fraction, config.split_seed)?;
            let train_docs: Vec<_> = train_raw.iter().map(|r| clean(r, &stopwords)).collect();
            let vocab = build_vocabulary(&train_docs, config.max_vocab, config.max_len);
            let oracle = match remote {
                Some(spec) => connect_remote_oracle(&RemoteSpec::parse(&spec)?)?,
                None => OracleHandle::native(train_target(&config)?),
            };
            let table = build_spam_weights(&oracle, &vocab)?;
            table.save_tsv(&out)?;
            eprintln!(
                "wrote {} spam weights to {} ({} queries)",
                table.len(),
                out.display(),
                table.queries_spent
            );
            Ok(())
        }
        Command::Attack {
            exp,
            out_corpus,
            out_log,
            out_report,
        } => {
            let (config, threads) = exp.build_config(true)?;
            let outcome = run_experiment_with_artifacts(&config, threads)?;
            write_csv_corpus(&out_corpus, &outcome.attacked)?;
            outcome.log.save(&out_log)?;
            if let Some(path) = out_report {
                outcome.report.emit(ReportFormat::Structured, &path)?;
            }
            eprintln!(
                "attacked {} emails ({} edits) in {} ms",
                outcome.report.perturbation.emails_touched,
                outcome.log.applied_edits(),
                outcome.report.wall_time_ms
            );
            Ok(())
        }
        Command::Eval {
            exp,
            out,
            out_table,
        } => {
            let (config, threads) = exp.build_config(false)?;
            let outcome = run_experiment_with_artifacts(&config, threads)?;
            outcome.report.emit(ReportFormat::Structured, &out)?;
            if let Some(path) = out_table {
                outcome.report.emit(ReportFormat::Table, &path)?;
            }
            print!("{}", outcome.report.to_table_string());
            eprintln!(
                "scoring queries {}, evaluation queries {}, {} ms",
                outcome.report.queries.scoring,
                outcome.report.queries.evaluation,
                outcome.report.wall_time_ms
            );
            Ok(())
        }
        Command::Sweep {
            exp,
            param,
            values,
            out_dir,
        } => {
            let (config, threads) = exp.build_config(true)?;
            let parameter = SweepParameter::parse(&param)?;
            let values = parse_values(&values)?;
            let reports = run_sweep(&config, parameter, &values, threads)?;
            std::fs::create_dir_all(&out_dir)?;
            let mut summary = String::from("value\taccuracy\ttp\ttn\tfp\tfn\n");
            for (i, report) in reports.iter().enumerate() {
                let path = out_dir.join(format!("report-{i:02}.json"));
                report.emit(ReportFormat::Structured, &path)?;
                let cm = &report.attacked.confusion;
                summary.push_str(&format!(
                    "{}\t{:.4}\t{}\t{}\t{}\t{}\n",
                    values[i],
                    report.attacked.metrics.accuracy,
                    cm.tp,
                    cm.tn,
                    cm.fp,
                    cm.fn_
                ));
            }
            std::fs::write(out_dir.join("sweep.tsv"), &summary)?;
            print!("{summary}");
            Ok(())
        }
        Command::Report { input, format, out } => {
            let report = AttackReport::load(&input)?;
            let text = match format.as_str() {
                "table" => report.to_table_string(),
                "structured" => report.to_structured_string()?,
                other => {
                    return Err(Error::Validation(format!(
                        "unknown report format {other:?}"
                    )))
                }
            };
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn train_target(config: &ExperimentConfig) -> Result<NativeModel> {
    let stopwords = load_stopwords(config)?;
    let corpus = load_corpus(config)?;
    let (train_raw, _) = split_corpus(&corpus, config.split_fraction, config.split_seed)?;
    let train_docs: Vec<_> = train_raw.iter().map(|r| clean(r, &stopwords)).collect();
    let vocab = build_vocabulary(&train_docs, config.max_vocab, config.max_len);
    Ok(match config.model {
        ModelKind::NaiveBayes => {
            NativeModel::NaiveBayes(train_naive_bayes(&train_docs, &vocab, config.alpha)?)
        }
        ModelKind::Logistic => {
            NativeModel::Logistic(train_logistic(&train_docs, &vocab, &config.logistic)?)
        }
        ModelKind::Attention => {
            NativeModel::Attention(train_attention(&train_docs, &vocab, &config.attention)?)
        }
    })
}

fn load_corpus(config: &ExperimentConfig) -> Result<Vec<mailsting::corpus::RawEmail>> {
    match &config.corpus {
        CorpusSource::Csv { path } => load_csv_corpus(path),
        CorpusSource::Synthetic {
            n_spam,
            n_ham,
            seed,
        } => Ok(generate_synthetic_corpus(*n_spam, *n_ham, *seed)),
    }
}

fn load_stopwords(config: &ExperimentConfig) -> Result<StopwordSet> {
    match &config.stopword_file {
        Some(path) => StopwordSet::load(path),
        None => Ok(StopwordSet::default_english()),
    }
}

fn parse_values(csv: &str) -> Result<Vec<f64>> {
    csv.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Validation(format!("bad sweep value {v:?}")))
        })
        .collect()
}

impl ExperimentArgs {
    /// Defaults, then the config file, then flags. `seed_required` enforces
    /// an explicit seed for attack and sweep runs.
    fn build_config(&self, seed_required: bool) -> Result<(ExperimentConfig, usize)> {
        let mut config = ExperimentConfig::default();
        let mut seed_given = false;

        if let Some(path) = &self.config {
            for (line_no, key, value) in parse_config_file(path)? {
                set_key(&mut config, &key, &value).map_err(|e| match e {
                    Error::Validation(msg) => Error::Parse { line: line_no, msg },
                    other => other,
                })?;
                if key == "seed" {
                    seed_given = true;
                }
            }
        }

        if self.corpus.is_some() && self.synthetic.is_some() {
            return Err(Error::Validation(
                "--corpus and --synthetic are mutually exclusive".into(),
            ));
        }
        if let Some(path) = &self.corpus {
            config.corpus = CorpusSource::Csv { path: path.clone() };
        }
        if let Some(spec) = &self.synthetic {
            set_key(&mut config, "synthetic", spec)?;
        }
        if let Some(v) = self.split_fraction {
            config.split_fraction = v;
        }
        if let Some(v) = self.split_seed {
            config.split_seed = v;
        }
        if let Some(v) = &self.model {
            config.model = ModelKind::parse(v)?;
        }
        if let Some(v) = self.alpha {
            config.alpha = v;
        }
        if let Some(v) = self.lr {
            config.logistic.learning_rate = v;
        }
        if let Some(v) = self.epochs {
            config.logistic.epochs = v;
        }
        if let Some(v) = self.l2 {
            config.logistic.l2 = v;
        }
        if let Some(v) = self.model_seed {
            config.logistic.seed = v;
            config.attention.seed = v;
        }
        if let Some(v) = self.dim {
            config.attention.dim = v;
        }
        if let Some(v) = self.attn_lr {
            config.attention.learning_rate = v;
        }
        if let Some(v) = self.attn_epochs {
            config.attention.epochs = v;
        }
        if let Some(v) = &self.scoring {
            config.scoring = ScoringFunction::parse(v)?;
        }
        if let Some(v) = &self.scoring_model {
            config.scoring_model = Some(ModelKind::parse(v)?);
        }
        if let Some(v) = &self.attack {
            config.attack = AttackSpec::parse(v)?;
        }
        if let Some(v) = self.word_fraction {
            config.word_fraction = v;
        }
        if let Some(v) = self.char_fraction {
            config.char_fraction = v;
        }
        if let Some(v) = self.sentence_rank {
            config.sentence_rank = v;
        }
        if self.global_selection {
            config.global_selection = true;
        }
        if let Some(v) = self.max_vocab {
            config.max_vocab = v;
        }
        if let Some(v) = self.max_len {
            config.max_len = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
            seed_given = true;
        }
        if let Some(v) = &self.stopwords {
            config.stopword_file = Some(v.clone());
        }
        if let Some(v) = &self.thesaurus {
            config.thesaurus_file = Some(v.clone());
        }

        if seed_required && !seed_given {
            return Err(Error::Validation(
                "--seed is mandatory for attack and sweep runs".into(),
            ));
        }
        config.validate()?;
        Ok((config, self.threads))
    }
}

/// `key = value` lines, `#` comments. Keys match the flag names without
/// the leading dashes.
fn parse_config_file(path: &Path) -> Result<Vec<(u64, String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx as u64 + 1,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        entries.push((
            idx as u64 + 1,
            key.trim().to_string(),
            value.trim().to_string(),
        ));
    }
    Ok(entries)
}

fn set_key(config: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    let bad = |what: &str| Error::Validation(format!("bad {what} value {value:?}"));
    match key {
        "corpus" => config.corpus = CorpusSource::Csv { path: value.into() },
        "synthetic" => {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::Validation(format!(
                    "synthetic expects n_spam,n_ham,seed, got {value:?}"
                )));
            }
            config.corpus = CorpusSource::Synthetic {
                n_spam: parts[0].parse().map_err(|_| bad("n_spam"))?,
                n_ham: parts[1].parse().map_err(|_| bad("n_ham"))?,
                seed: parts[2].parse().map_err(|_| bad("seed"))?,
            };
        }
        "split-fraction" => config.split_fraction = value.parse().map_err(|_| bad(key))?,
        "split-seed" => config.split_seed = value.parse().map_err(|_| bad(key))?,
        "model" => config.model = ModelKind::parse(value)?,
        "alpha" => config.alpha = value.parse().map_err(|_| bad(key))?,
        "lr" => config.logistic.learning_rate = value.parse().map_err(|_| bad(key))?,
        "epochs" => config.logistic.epochs = value.parse().map_err(|_| bad(key))?,
        "l2" => config.logistic.l2 = value.parse().map_err(|_| bad(key))?,
        "model-seed" => {
            let seed = value.parse().map_err(|_| bad(key))?;
            config.logistic.seed = seed;
            config.attention.seed = seed;
        }
        "dim" => config.attention.dim = value.parse().map_err(|_| bad(key))?,
        "attn-lr" => config.attention.learning_rate = value.parse().map_err(|_| bad(key))?,
        "attn-epochs" => config.attention.epochs = value.parse().map_err(|_| bad(key))?,
        "scoring" => config.scoring = ScoringFunction::parse(value)?,
        "scoring-model" => config.scoring_model = Some(ModelKind::parse(value)?),
        "attack" => config.attack = AttackSpec::parse(value)?,
        "word-fraction" => config.word_fraction = value.parse().map_err(|_| bad(key))?,
        "char-fraction" => config.char_fraction = value.parse().map_err(|_| bad(key))?,
        "sentence-rank" => config.sentence_rank = value.parse().map_err(|_| bad(key))?,
        "global-selection" => {
            config.global_selection = value.parse().map_err(|_| bad(key))?;
        }
        "max-vocab" => config.max_vocab = value.parse().map_err(|_| bad(key))?,
        "max-len" => config.max_len = value.parse().map_err(|_| bad(key))?,
        "seed" => config.seed = value.parse().map_err(|_| bad(key))?,
        "stopwords" => config.stopword_file = Some(value.into()),
        "thesaurus" => config.thesaurus_file = Some(value.into()),
        other => {
            return Err(Error::Validation(format!("unknown config key {other:?}")));
        }
    }
    Ok(())
}
