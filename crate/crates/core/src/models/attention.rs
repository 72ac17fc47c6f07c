//! Single-layer additive attention classifier.
//!
//! Per-token states are embedding rows; an alignment score
//! `e_i = v^T tanh(W h_i + b)` feeds a pad-masked softmax whose weights mix
//! the states into a context vector, and a sigmoid output head reads it.
//! Trained full-batch with hand-derived gradients (checked against central
//! finite differences in the tests).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{encode, CleanDoc, Label, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::SeedSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionHyper {
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for AttentionHyper {
    fn default() -> Self {
        AttentionHyper {
            dim: 16,
            learning_rate: 1.0,
            epochs: 150,
            seed: 0,
        }
    }
}

/// Per-position attention distribution. `weights` spans the full padded
/// sequence; pad positions hold exactly 0 and the rest sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionReadout {
    pub weights: Vec<f64>,
    pub true_len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttentionModel {
    vocab: Vocabulary,
    dim: usize,
    /// V x d embedding matrix, row-major.
    embed: Vec<f64>,
    /// d x d attention projection, row-major.
    w_attn: Vec<f64>,
    /// d attention bias.
    b_attn: Vec<f64>,
    /// d attention query vector.
    v_attn: Vec<f64>,
    /// d output weights.
    out_w: Vec<f64>,
    out_b: f64,
    hyper: AttentionHyper,
}

struct Forward {
    ids: Vec<u32>,
    /// tanh(W h_i + b) per position, row-major L x d.
    tanhs: Vec<f64>,
    /// softmax weights per position.
    attn: Vec<f64>,
    context: Vec<f64>,
    logit: f64,
    prob: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn cross_entropy(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

fn label_target(label: Label) -> f64 {
    match label {
        Label::Spam => 1.0,
        Label::Ham => 0.0,
    }
}

/// Full-batch gradient descent on mean log-loss; parameters start uniform
/// in [-0.1, 0.1] from the seed.
pub fn train_attention(
    train: &[CleanDoc],
    vocab: &Vocabulary,
    hyper: &AttentionHyper,
) -> Result<AttentionModel> {
    if hyper.dim == 0 {
        return Err(Error::Training("attention dim must be >= 1".into()));
    }
    if train.is_empty() {
        return Err(Error::Training("empty training corpus".into()));
    }
    let n_spam = train.iter().filter(|d| d.label == Label::Spam).count();
    if n_spam == 0 || n_spam == train.len() {
        return Err(Error::Training("both labels required".into()));
    }

    let mut model = AttentionModel::init(vocab.clone(), *hyper);
    let data: Vec<(&CleanDoc, f64)> = train.iter().map(|d| (d, label_target(d.label))).collect();
    for epoch in 0..hyper.epochs {
        let (grad, loss) = model.batch_grad(&data);
        if !loss.is_finite() {
            return Err(Error::Training(format!(
                "non-finite loss at epoch {epoch}"
            )));
        }
        model.step(&grad, hyper.learning_rate);
    }
    Ok(model)
}

impl AttentionModel {
    fn init(vocab: Vocabulary, hyper: AttentionHyper) -> Self {
        let d = hyper.dim;
        let v = vocab.size();
        let mut rng = SeedSpace::new(hyper.seed).stream(&["attention-init"]);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-0.1..=0.1)).collect()
        };
        let embed = draw(v * d);
        let w_attn = draw(d * d);
        let b_attn = draw(d);
        let v_attn = draw(d);
        let out_w = draw(d);
        let out_b = draw(1)[0];
        AttentionModel {
            vocab,
            dim: d,
            embed,
            w_attn,
            b_attn,
            v_attn,
            out_w,
            out_b,
            hyper,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict(&self, doc: &CleanDoc) -> f64 {
        self.forward(doc).prob
    }

    /// Attention weights over the padded sequence; errors on documents with
    /// no in-sequence token.
    pub fn readout(&self, doc: &CleanDoc) -> Result<AttentionReadout> {
        let fwd = self.forward(doc);
        if fwd.ids.is_empty() {
            return Err(Error::Validation(format!(
                "document {:?} has no in-sequence token, no attention distribution exists",
                doc.id
            )));
        }
        let mut weights = vec![0.0; self.vocab.max_len()];
        weights[..fwd.attn.len()].copy_from_slice(&fwd.attn);
        Ok(AttentionReadout {
            weights,
            true_len: fwd.ids.len(),
        })
    }

    /// Pre-softmax alignment scores per position, for monotonicity checks.
    pub fn alignment_scores(&self, doc: &CleanDoc) -> Vec<f64> {
        let seq = encode(doc, &self.vocab);
        let ids = &seq.ids[..seq.true_len];
        ids.iter().map(|&id| self.alignment(id)).collect()
    }

    fn alignment(&self, id: u32) -> f64 {
        let d = self.dim;
        let h = &self.embed[id as usize * d..(id as usize + 1) * d];
        let mut e = 0.0;
        for r in 0..d {
            let mut g = self.b_attn[r];
            for c in 0..d {
                g += self.w_attn[r * d + c] * h[c];
            }
            e += self.v_attn[r] * g.tanh();
        }
        e
    }

    fn forward(&self, doc: &CleanDoc) -> Forward {
        let d = self.dim;
        let seq = encode(doc, &self.vocab);
        let ids: Vec<u32> = seq.ids[..seq.true_len].to_vec();
        let len = ids.len();

        let mut tanhs = vec![0.0; len * d];
        let mut scores = vec![0.0; len];
        for (i, &id) in ids.iter().enumerate() {
            let h = &self.embed[id as usize * d..(id as usize + 1) * d];
            let mut e = 0.0;
            for r in 0..d {
                let mut g = self.b_attn[r];
                for c in 0..d {
                    g += self.w_attn[r * d + c] * h[c];
                }
                let t = g.tanh();
                tanhs[i * d + r] = t;
                e += self.v_attn[r] * t;
            }
            scores[i] = e;
        }

        let attn = if len == 0 {
            Vec::new()
        } else {
            let max = scores.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
            let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / sum).collect()
        };

        let mut context = vec![0.0; d];
        for (i, &id) in ids.iter().enumerate() {
            let h = &self.embed[id as usize * d..(id as usize + 1) * d];
            for c in 0..d {
                context[c] += attn[i] * h[c];
            }
        }

        let logit = self.out_b
            + self
                .out_w
                .iter()
                .zip(&context)
                .map(|(w, c)| w * c)
                .sum::<f64>();
        Forward {
            ids,
            tanhs,
            attn,
            context,
            logit,
            prob: sigmoid(logit),
        }
    }

    /// Mean log-loss over documents.
    pub fn loss_on(&self, docs: &[CleanDoc]) -> f64 {
        let total: f64 = docs
            .iter()
            .map(|doc| cross_entropy(self.forward(doc).logit, label_target(doc.label)))
            .sum();
        total / docs.len() as f64
    }

    /// Analytic gradient of `loss_on`, flattened in parameter order
    /// (embed, w_attn, b_attn, v_attn, out_w, out_b).
    pub fn grad_on(&self, docs: &[CleanDoc]) -> Vec<f64> {
        let data: Vec<(&CleanDoc, f64)> =
            docs.iter().map(|d| (d, label_target(d.label))).collect();
        self.batch_grad(&data).0
    }

    fn batch_grad(&self, data: &[(&CleanDoc, f64)]) -> (Vec<f64>, f64) {
        let d = self.dim;
        let mut grad = vec![0.0; self.param_count()];
        let mut loss = 0.0;
        let (o_embed, o_w, o_b, o_v, o_u, o_ob) = self.offsets();

        for (doc, y) in data {
            let fwd = self.forward(doc);
            loss += cross_entropy(fwd.logit, *y);
            let dz = fwd.prob - y;

            // output head
            for c in 0..d {
                grad[o_u + c] += dz * fwd.context[c];
            }
            grad[o_ob] += dz;

            let len = fwd.ids.len();
            if len == 0 {
                continue;
            }
            let dcontext: Vec<f64> = self.out_w.iter().map(|u| dz * u).collect();

            // softmax backward
            let mut da = vec![0.0; len];
            for (i, &id) in fwd.ids.iter().enumerate() {
                let h = &self.embed[id as usize * d..(id as usize + 1) * d];
                da[i] = dcontext.iter().zip(h).map(|(dc, hv)| dc * hv).sum();
            }
            let weighted: f64 = fwd.attn.iter().zip(&da).map(|(a, g)| a * g).sum();
            for (i, &id) in fwd.ids.iter().enumerate() {
                let de = fwd.attn[i] * (da[i] - weighted);
                let h = &self.embed[id as usize * d..(id as usize + 1) * d];
                let t = &fwd.tanhs[i * d..(i + 1) * d];

                // dh starts with the direct context path
                let mut dh: Vec<f64> = dcontext.iter().map(|dc| fwd.attn[i] * dc).collect();
                for r in 0..d {
                    grad[o_v + r] += de * t[r];
                    let dg = de * self.v_attn[r] * (1.0 - t[r] * t[r]);
                    grad[o_b + r] += dg;
                    for c in 0..d {
                        grad[o_w + r * d + c] += dg * h[c];
                        dh[c] += dg * self.w_attn[r * d + c];
                    }
                }
                let row = o_embed + id as usize * d;
                for c in 0..d {
                    grad[row + c] += dh[c];
                }
            }
        }

        let n = data.len() as f64;
        for g in &mut grad {
            *g /= n;
        }
        (grad, loss / n)
    }

    fn step(&mut self, grad: &[f64], lr: f64) {
        let (o_embed, o_w, o_b, o_v, o_u, o_ob) = self.offsets();
        let d = self.dim;
        let v = self.vocab.size();
        for i in 0..v * d {
            self.embed[i] -= lr * grad[o_embed + i];
        }
        for i in 0..d * d {
            self.w_attn[i] -= lr * grad[o_w + i];
        }
        for i in 0..d {
            self.b_attn[i] -= lr * grad[o_b + i];
            self.v_attn[i] -= lr * grad[o_v + i];
            self.out_w[i] -= lr * grad[o_u + i];
        }
        self.out_b -= lr * grad[o_ob];
    }

    pub fn param_count(&self) -> usize {
        let d = self.dim;
        self.vocab.size() * d + d * d + 3 * d + 1
    }

    fn offsets(&self) -> (usize, usize, usize, usize, usize, usize) {
        let d = self.dim;
        let o_embed = 0;
        let o_w = o_embed + self.vocab.size() * d;
        let o_b = o_w + d * d;
        let o_v = o_b + d;
        let o_u = o_v + d;
        let o_ob = o_u + d;
        (o_embed, o_w, o_b, o_v, o_u, o_ob)
    }

    /// Test hook: nudge one flat-indexed parameter.
    pub fn perturb_param(&mut self, index: usize, delta: f64) {
        let (_, o_w, o_b, o_v, o_u, o_ob) = self.offsets();
        if index < o_w {
            self.embed[index] += delta;
        } else if index < o_b {
            self.w_attn[index - o_w] += delta;
        } else if index < o_v {
            self.b_attn[index - o_b] += delta;
        } else if index < o_u {
            self.v_attn[index - o_v] += delta;
        } else if index < o_ob {
            self.out_w[index - o_u] += delta;
        } else {
            self.out_b += delta;
        }
    }

    /// Flat indices of the embedding row for `id`, for targeted grad probes.
    pub fn embedding_indices(&self, id: u32) -> std::ops::Range<usize> {
        let d = self.dim;
        id as usize * d..(id as usize + 1) * d
    }

    /// First flat index past the embedding block.
    pub fn non_embedding_range(&self) -> std::ops::Range<usize> {
        let (_, o_w, ..) = self.offsets();
        o_w..self.param_count()
    }
}
