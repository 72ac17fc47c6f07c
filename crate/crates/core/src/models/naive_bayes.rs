//! Multinomial naive Bayes over bag-of-words counts.

use serde::{Deserialize, Serialize};

use crate::corpus::{encode, CleanDoc, Label, Vocabulary, UNK_ID};
use crate::error::{Error, Result};

/// Laplace-smoothed multinomial NB.
///
/// Likelihoods are smoothed over the real vocabulary (ids >= 2), so per
/// class they sum to one exactly. An out-of-vocabulary token gets the
/// unseen mass `alpha / (class_tokens + alpha * V)`; it sits outside the
/// normalized set but depends on the class token totals, which is what
/// makes the OOV attack observably different from word deletion here.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    vocab: Vocabulary,
    alpha: f64,
    log_prior_spam: f64,
    log_prior_ham: f64,
    /// Indexed by vocabulary id; slot 1 holds the unseen (unk) mass and
    /// slot 0 is never read.
    log_lik_spam: Vec<f64>,
    log_lik_ham: Vec<f64>,
}

/// Train on token counts. Deterministic: no randomness anywhere.
pub fn train_naive_bayes(
    train: &[CleanDoc],
    vocab: &Vocabulary,
    alpha: f64,
) -> Result<NaiveBayesModel> {
    if !(alpha > 0.0) {
        return Err(Error::Training(format!("alpha must be > 0, got {alpha}")));
    }
    if train.is_empty() {
        return Err(Error::Training("empty training corpus".into()));
    }
    let n_spam = train.iter().filter(|d| d.label == Label::Spam).count();
    let n_ham = train.len() - n_spam;
    if n_spam == 0 || n_ham == 0 {
        return Err(Error::Training(format!(
            "both labels required, got {n_spam} spam / {n_ham} ham"
        )));
    }

    let v = vocab.size();
    let real_tokens = vocab.token_count() as f64;
    let mut counts_spam = vec![0u64; v];
    let mut counts_ham = vec![0u64; v];
    for doc in train {
        let seq = encode(doc, vocab);
        let counts = match doc.label {
            Label::Spam => &mut counts_spam,
            Label::Ham => &mut counts_ham,
        };
        for &id in &seq.ids[..seq.true_len] {
            if id >= 2 {
                counts[id as usize] += 1;
            }
        }
    }
    let total_spam: u64 = counts_spam.iter().sum();
    let total_ham: u64 = counts_ham.iter().sum();

    let fill = |counts: &[u64], total: u64| -> Vec<f64> {
        let denom = total as f64 + alpha * real_tokens;
        let mut log_lik = vec![f64::NEG_INFINITY; v];
        log_lik[UNK_ID as usize] = (alpha / denom).ln();
        for id in 2..v {
            log_lik[id] = ((counts[id] as f64 + alpha) / denom).ln();
        }
        log_lik
    };

    Ok(NaiveBayesModel {
        vocab: vocab.clone(),
        alpha,
        log_prior_spam: (n_spam as f64 / train.len() as f64).ln(),
        log_prior_ham: (n_ham as f64 / train.len() as f64).ln(),
        log_lik_spam: fill(&counts_spam, total_spam),
        log_lik_ham: fill(&counts_ham, total_ham),
    })
}

impl NaiveBayesModel {
    /// Posterior P(spam | doc). A document with no scored token returns the
    /// prior.
    pub fn predict(&self, doc: &CleanDoc) -> f64 {
        let seq = encode(doc, &self.vocab);
        let mut log_spam = self.log_prior_spam;
        let mut log_ham = self.log_prior_ham;
        for &id in &seq.ids[..seq.true_len] {
            if id >= 1 {
                log_spam += self.log_lik_spam[id as usize];
                log_ham += self.log_lik_ham[id as usize];
            }
        }
        // P(spam) = 1 / (1 + exp(log_ham - log_spam)), stable in both tails
        let diff = log_ham - log_spam;
        1.0 / (1.0 + diff.exp())
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Per-class likelihoods over real tokens, for the normalization check.
    pub fn likelihood_sums(&self) -> (f64, f64) {
        let sum = |lik: &[f64]| lik.iter().skip(2).map(|l| l.exp()).sum();
        (sum(&self.log_lik_spam), sum(&self.log_lik_ham))
    }
}
