//! L2-regularized logistic regression on bag-of-words counts.

use serde::{Deserialize, Serialize};

use crate::corpus::{encode, CleanDoc, Label, Vocabulary, PAD_ID};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        LogisticHyper {
            learning_rate: 0.5,
            epochs: 200,
            l2: 1e-4,
            seed: 0,
        }
    }
}

/// One weight per vocabulary id plus a bias. Weights start at zero, so a
/// zero-epoch model scores every document 0.5.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel {
    vocab: Vocabulary,
    weights: Vec<f64>,
    bias: f64,
    hyper: LogisticHyper,
}

/// Sparse bag-of-words: (id, count) over the non-pad prefix.
fn featurize(doc: &CleanDoc, vocab: &Vocabulary) -> Vec<(usize, f64)> {
    let seq = encode(doc, vocab);
    let mut counts: std::collections::BTreeMap<u32, f64> = std::collections::BTreeMap::new();
    for &id in &seq.ids[..seq.true_len] {
        if id != PAD_ID {
            *counts.entry(id).or_insert(0.0) += 1.0;
        }
    }
    counts.into_iter().map(|(id, c)| (id as usize, c)).collect()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable binary cross-entropy from the logit.
fn cross_entropy(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Full-batch gradient descent on mean log-loss plus (l2/2)*||w||^2.
/// The bias is not regularized. Deterministic given the hyperparameters.
pub fn train_logistic(
    train: &[CleanDoc],
    vocab: &Vocabulary,
    hyper: &LogisticHyper,
) -> Result<LogisticModel> {
    if train.is_empty() {
        return Err(Error::Training("empty training corpus".into()));
    }
    let n_spam = train.iter().filter(|d| d.label == Label::Spam).count();
    if n_spam == 0 || n_spam == train.len() {
        return Err(Error::Training("both labels required".into()));
    }

    let data: Vec<(Vec<(usize, f64)>, f64)> = train
        .iter()
        .map(|d| (featurize(d, vocab), label_target(d.label)))
        .collect();

    let mut model = LogisticModel {
        vocab: vocab.clone(),
        weights: vec![0.0; vocab.size()],
        bias: 0.0,
        hyper: *hyper,
    };
    for epoch in 0..hyper.epochs {
        let (grad_w, grad_b, loss) = model.batch_grad(&data);
        if !loss.is_finite() {
            return Err(Error::Training(format!(
                "non-finite loss at epoch {epoch}"
            )));
        }
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= hyper.learning_rate * g;
        }
        model.bias -= hyper.learning_rate * grad_b;
    }
    Ok(model)
}

fn label_target(label: Label) -> f64 {
    match label {
        Label::Spam => 1.0,
        Label::Ham => 0.0,
    }
}

impl LogisticModel {
    pub fn predict(&self, doc: &CleanDoc) -> f64 {
        sigmoid(self.logit(&featurize(doc, &self.vocab)))
    }

    fn logit(&self, features: &[(usize, f64)]) -> f64 {
        let mut z = self.bias;
        for &(id, count) in features {
            z += self.weights[id] * count;
        }
        z
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mean regularized loss over documents; the quantity training descends.
    pub fn loss_on(&self, docs: &[CleanDoc]) -> f64 {
        let data: Vec<(Vec<(usize, f64)>, f64)> = docs
            .iter()
            .map(|d| (featurize(d, &self.vocab), label_target(d.label)))
            .collect();
        self.batch_loss(&data)
    }

    /// Analytic gradient of `loss_on` with respect to (weights, bias).
    pub fn grad_on(&self, docs: &[CleanDoc]) -> (Vec<f64>, f64) {
        let data: Vec<(Vec<(usize, f64)>, f64)> = docs
            .iter()
            .map(|d| (featurize(d, &self.vocab), label_target(d.label)))
            .collect();
        let (gw, gb, _) = self.batch_grad(&data);
        (gw, gb)
    }

    /// Test hook: nudge one parameter (index == vocab size means the bias).
    pub fn perturb_param(&mut self, index: usize, delta: f64) {
        if index == self.weights.len() {
            self.bias += delta;
        } else {
            self.weights[index] += delta;
        }
    }

    fn batch_loss(&self, data: &[(Vec<(usize, f64)>, f64)]) -> f64 {
        let n = data.len() as f64;
        let ce: f64 = data
            .iter()
            .map(|(x, y)| cross_entropy(self.logit(x), *y))
            .sum();
        let reg: f64 = 0.5 * self.hyper.l2 * self.weights.iter().map(|w| w * w).sum::<f64>();
        ce / n + reg
    }

    fn batch_grad(&self, data: &[(Vec<(usize, f64)>, f64)]) -> (Vec<f64>, f64, f64) {
        let n = data.len() as f64;
        let mut grad_w = vec![0.0; self.weights.len()];
        let mut grad_b = 0.0;
        let mut ce = 0.0;
        for (x, y) in data {
            let z = self.logit(x);
            ce += cross_entropy(z, *y);
            let dz = sigmoid(z) - y;
            for &(id, count) in x {
                grad_w[id] += dz * count;
            }
            grad_b += dz;
        }
        let mut loss = ce / n;
        for (g, w) in grad_w.iter_mut().zip(&self.weights) {
            *g = *g / n + self.hyper.l2 * w;
            loss += 0.5 * self.hyper.l2 * w * w;
        }
        (grad_w, grad_b / n, loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;
    use crate::models::test_support::doc;

    fn separable_corpus() -> Vec<CleanDoc> {
        vec![
            doc("s1", Label::Spam, &["win", "cash"]),
            doc("s2", Label::Spam, &["win", "prize"]),
            doc("h1", Label::Ham, &["lunch", "meet"]),
            doc("h2", Label::Ham, &["lunch", "agenda"]),
        ]
    }

    #[test]
    fn separable_corpus_reaches_perfect_training_accuracy() {
        let docs = separable_corpus();
        let vocab = build_vocabulary(&docs, 100, 10);
        let hyper = LogisticHyper {
            learning_rate: 0.5,
            epochs: 200,
            l2: 0.0,
            seed: 0,
        };
        let model = train_logistic(&docs, &vocab, &hyper).unwrap();
        for d in &docs {
            let label = crate::models::classify(model.predict(d), 0.5);
            assert_eq!(label, d.label, "misclassified {}", d.id);
        }
    }

    #[test]
    fn huge_l2_crushes_weights() {
        let docs = separable_corpus();
        let vocab = build_vocabulary(&docs, 100, 10);
        let hyper = LogisticHyper {
            learning_rate: 1e-7,
            epochs: 200,
            l2: 1e6,
            seed: 0,
        };
        let model = train_logistic(&docs, &vocab, &hyper).unwrap();
        let max = model
            .weights()
            .iter()
            .fold(0.0f64, |acc, w| acc.max(w.abs()));
        assert!(max < 1e-2, "max |weight| = {max}");
    }

    #[test]
    fn zero_epochs_scores_half_everywhere() {
        let docs = separable_corpus();
        let vocab = build_vocabulary(&docs, 100, 10);
        let hyper = LogisticHyper {
            epochs: 0,
            ..Default::default()
        };
        let model = train_logistic(&docs, &vocab, &hyper).unwrap();
        for d in &docs {
            assert_eq!(model.predict(d), 0.5);
        }
        assert_eq!(model.predict(&doc("e", Label::Ham, &[])), 0.5);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let docs = separable_corpus();
        let vocab = build_vocabulary(&docs, 100, 10);
        let hyper = LogisticHyper {
            learning_rate: 0.3,
            epochs: 7,
            l2: 0.05,
            seed: 0,
        };
        let model = train_logistic(&docs, &vocab, &hyper).unwrap();
        let (grad_w, grad_b) = model.grad_on(&docs);
        let h = 1e-5;
        let n_params = model.weights().len() + 1;
        for index in 0..n_params {
            let analytic = if index == model.weights().len() {
                grad_b
            } else {
                grad_w[index]
            };
            let mut plus = model.clone();
            plus.perturb_param(index, h);
            let mut minus = model.clone();
            minus.perturb_param(index, -h);
            let numeric = (plus.loss_on(&docs) - minus.loss_on(&docs)) / (2.0 * h);
            let denom = analytic.abs().max(numeric.abs()).max(1e-5);
            assert!(
                (analytic - numeric).abs() / denom < 1e-4,
                "param {index}: analytic {analytic} vs numeric {numeric}"
            );
        }
    }
}
