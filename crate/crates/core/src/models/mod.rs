//! Target classifiers behind a uniform, query-counted black-box oracle.
//!
//! Three native desk-scale models (multinomial naive Bayes, bag-of-words
//! logistic regression, a single-layer attention network) plus a remote
//! adapter speaking a newline-delimited JSON protocol, so full-scale
//! external filters can stand in as targets.

mod attention;
mod logistic;
mod naive_bayes;
mod remote;

pub use attention::{train_attention, AttentionHyper, AttentionModel, AttentionReadout};
pub use logistic::{train_logistic, LogisticHyper, LogisticModel};
pub use naive_bayes::{train_naive_bayes, NaiveBayesModel};
pub use remote::{connect_remote_oracle, RemoteOracle, RemoteSpec};

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::corpus::{CleanDoc, Label, Vocabulary};
use crate::error::Result;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Spam iff `score >= threshold`; the boundary counts as spam.
pub fn classify(score: f64, threshold: f64) -> Label {
    debug_assert!((0.0..=1.0).contains(&score), "score {score} out of range");
    if score >= threshold {
        Label::Spam
    } else {
        Label::Ham
    }
}

/// A trained classifier. Serializable so the CLI can dump and reload it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NativeModel {
    NaiveBayes(NaiveBayesModel),
    Logistic(LogisticModel),
    Attention(AttentionModel),
}

impl NativeModel {
    pub fn predict(&self, doc: &CleanDoc) -> f64 {
        match self {
            NativeModel::NaiveBayes(m) => m.predict(doc),
            NativeModel::Logistic(m) => m.predict(doc),
            NativeModel::Attention(m) => m.predict(doc),
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        match self {
            NativeModel::NaiveBayes(m) => m.vocabulary(),
            NativeModel::Logistic(m) => m.vocabulary(),
            NativeModel::Attention(m) => m.vocabulary(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NativeModel::NaiveBayes(_) => "naive_bayes",
            NativeModel::Logistic(_) => "logistic",
            NativeModel::Attention(_) => "attention",
        }
    }

    /// The attention model when this model has one (the AW gray-box channel).
    pub fn as_attention(&self) -> Option<&AttentionModel> {
        match self {
            NativeModel::Attention(m) => Some(m),
            _ => None,
        }
    }
}

enum Backend {
    Native(NativeModel),
    Remote(RemoteOracle),
}

/// Query-counted black-box interface over any classifier.
///
/// Every `predict` bumps the counter by exactly one; the counter never
/// resets. The attention readout channel deliberately bypasses it.
pub struct OracleHandle {
    backend: Backend,
    query_count: AtomicU64,
    threshold: f64,
}

impl OracleHandle {
    pub fn native(model: NativeModel) -> Self {
        OracleHandle {
            backend: Backend::Native(model),
            query_count: AtomicU64::new(0),
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn remote(oracle: RemoteOracle) -> Self {
        OracleHandle {
            backend: Backend::Remote(oracle),
            query_count: AtomicU64::new(0),
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// Spam score in [0, 1] for the document. Counts one query.
    pub fn predict(&self, doc: &CleanDoc) -> Result<f64> {
        self.query_count.fetch_add(1, Ordering::Relaxed);
        match &self.backend {
            Backend::Native(model) => Ok(model.predict(doc)),
            Backend::Remote(remote) => remote.predict(&doc.tokens),
        }
    }

    pub fn predict_label(&self, doc: &CleanDoc) -> Result<Label> {
        Ok(classify(self.predict(doc)?, self.threshold))
    }

    pub fn query_count(&self) -> u64 {
        self.query_count.load(Ordering::Relaxed)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn native_model(&self) -> Option<&NativeModel> {
        match &self.backend {
            Backend::Native(m) => Some(m),
            Backend::Remote(_) => None,
        }
    }

    /// Gray-box channel: per-token attention weights, not query-counted.
    pub fn attention_model(&self) -> Option<&AttentionModel> {
        self.native_model().and_then(NativeModel::as_attention)
    }
}

impl std::fmt::Debug for OracleHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.backend {
            Backend::Native(m) => m.kind_name(),
            Backend::Remote(_) => "remote",
        };
        f.debug_struct("OracleHandle")
            .field("backend", &kind)
            .field("query_count", &self.query_count())
            .field("threshold", &self.threshold)
            .finish()
    }
}

/// Extract per-position attention weights for the document.
///
/// Errors on documents with no in-sequence token: no distribution exists.
pub fn attention_readout(model: &AttentionModel, doc: &CleanDoc) -> Result<AttentionReadout> {
    model.readout(doc)
}
