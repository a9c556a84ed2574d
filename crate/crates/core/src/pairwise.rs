//! Log-linear mention-pair similarity and the distance functions built on it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{doc_similarity, Corpus, Document, Mention};
use crate::error::{Error, Result};
use crate::features::{FeatureSpace, FeatureVector};
use crate::lexical::LexicalResources;

pub const DEFAULT_SIGMA: f64 = 0.4;
pub const DEFAULT_L2: f64 = 1.0;
pub const DEFAULT_TRUNCATION: f64 = 0.5;
pub const DEFAULT_GAMMA: f64 = 1.0;

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(t)` without overflow.
fn log_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    Coreferent,
    NotCoreferent,
}

impl PairLabel {
    fn sign(self) -> f64 {
        match self {
            PairLabel::Coreferent => 1.0,
            PairLabel::NotCoreferent => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub a: String,
    pub b: String,
    pub label: PairLabel,
}

/// Training pairs: every within-document pair with the later mention first,
/// plus every unordered cross-document pair whose documents have similarity
/// at least `sigma`.
pub fn build_training_pairs(corpus: &Corpus, sigma: f64) -> Result<Vec<TrainingPair>> {
    let gold = corpus.gold_labels()?;
    let label = |i: usize, j: usize| {
        if gold[i] == gold[j] {
            PairLabel::Coreferent
        } else {
            PairLabel::NotCoreferent
        }
    };
    let pair = |i: usize, j: usize| TrainingPair {
        a: corpus.mention(i).mention_id.clone(),
        b: corpus.mention(j).mention_id.clone(),
        label: label(i, j),
    };
    let mut pairs = Vec::new();
    for d in 0..corpus.num_documents() {
        let range = corpus.doc_range(d);
        for i in range.clone() {
            for j in range.start..i {
                pairs.push(pair(i, j));
            }
        }
    }
    let docs = corpus.documents();
    for d in 0..docs.len() {
        for e in d + 1..docs.len() {
            if doc_similarity(&docs[d], &docs[e]) < sigma {
                continue;
            }
            for i in corpus.doc_range(d) {
                for j in corpus.doc_range(e) {
                    pairs.push(pair(i, j));
                }
            }
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: FeatureVector,
    pub label: PairLabel,
}

/// `Σ ln σ(y θᵀψ) − l2 ‖θ‖²`.
pub fn penalized_log_likelihood(theta: &[f64], examples: &[Example], l2: f64) -> f64 {
    let fit: f64 = examples
        .iter()
        .map(|e| log_sigmoid(e.label.sign() * e.features.dot(theta)))
        .sum();
    fit - l2 * theta.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`penalized_log_likelihood`].
pub fn gradient(theta: &[f64], examples: &[Example], l2: f64) -> Vec<f64> {
    let mut g: Vec<f64> = theta.iter().map(|w| -2.0 * l2 * w).collect();
    for e in examples {
        let y = e.label.sign();
        let scale = y * sigmoid(-y * e.features.dot(theta));
        for (gk, x) in g.iter_mut().zip(e.features.values()) {
            *gk += scale * x;
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingOptions {
    pub l2: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        Self {
            l2: DEFAULT_L2,
            tolerance: 1e-6,
            max_iterations: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSummary {
    pub iterations: usize,
    pub converged: bool,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub gradient_max_norm: f64,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes the penalized log-likelihood from θ = 0.
///
/// Full-batch gradient ascent with Barzilai-Borwein step proposals guarded by
/// an Armijo backtracking test, so every accepted step increases the
/// objective.
pub fn fit_weights(examples: &[Example], dim: usize, opts: &TrainingOptions) -> Result<(Vec<f64>, TrainingSummary)> {
    if !(opts.l2 >= 0.0 && opts.l2.is_finite()) {
        return Err(Error::InvalidArgument(format!("l2 strength must be nonnegative, got {}", opts.l2)));
    }
    let positives = examples.iter().filter(|e| e.label == PairLabel::Coreferent).count();
    if positives == 0 || positives == examples.len() {
        return Err(Error::Training(format!(
            "need pairs of both labels ({positives} coreferent of {})",
            examples.len()
        )));
    }
    for e in examples {
        if e.features.len() != dim {
            return Err(Error::Training("feature vectors of inconsistent length".into()));
        }
        if e.features.values().iter().any(|x| !x.is_finite()) {
            return Err(Error::Training("non-finite feature value".into()));
        }
    }

    let mut theta = vec![0.0; dim];
    let mut value = penalized_log_likelihood(&theta, examples, opts.l2);
    let initial_objective = value;
    let mut grad = gradient(&theta, examples, opts.l2);
    let mut step = 1.0 / examples.len() as f64;
    let mut iterations = 0;
    while iterations < opts.max_iterations && max_norm(&grad) >= opts.tolerance {
        iterations += 1;
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let (next, next_value) = loop {
            let candidate: Vec<f64> = theta.iter().zip(&grad).map(|(w, g)| w + step * g).collect();
            let v = penalized_log_likelihood(&candidate, examples, opts.l2);
            if v >= value + 0.5 * step * g2 {
                break (candidate, v);
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::Training("line search failed".into()));
            }
        };
        let next_grad = gradient(&next, examples, opts.l2);
        // Barzilai-Borwein proposal for the next step: s·s / s·(-Δg).
        let (mut ss, mut sy) = (0.0, 0.0);
        for k in 0..dim {
            let s = next[k] - theta[k];
            ss += s * s;
            sy -= s * (next_grad[k] - grad[k]);
        }
        step = if sy > 0.0 { ss / sy } else { step * 2.0 };
        theta = next;
        value = next_value;
        grad = next_grad;
    }
    if theta.iter().any(|w| !w.is_finite()) {
        return Err(Error::Training("weights diverged".into()));
    }
    let gradient_max_norm = max_norm(&grad);
    Ok((
        theta,
        TrainingSummary {
            iterations,
            converged: gradient_max_norm < opts.tolerance,
            initial_objective,
            final_objective: value,
            gradient_max_norm,
        },
    ))
}

/// The trained similarity model together with its distance settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseModel {
    pub theta: Vec<f64>,
    pub space: FeatureSpace,
    pub l2: f64,
    pub truncation_threshold: f64,
    pub gamma: f64,
}

impl PairwiseModel {
    /// An untrained model: θ = 0.
    pub fn zero(space: FeatureSpace) -> Self {
        Self {
            theta: vec![0.0; space.len()],
            space,
            l2: DEFAULT_L2,
            truncation_threshold: DEFAULT_TRUNCATION,
            gamma: DEFAULT_GAMMA,
        }
    }

    /// Builds the feature space from `pairs`, extracts their features and fits θ.
    pub fn train(
        corpus: &Corpus,
        pairs: &[TrainingPair],
        resources: &LexicalResources,
        opts: &TrainingOptions,
    ) -> Result<(Self, TrainingSummary)> {
        let lookup = |id: &str| {
            corpus
                .index_of(id)
                .map(|g| corpus.mention(g))
                .ok_or_else(|| Error::Validation(format!("training pair references unknown mention `{id}`")))
        };
        let resolved = pairs
            .iter()
            .map(|p| Ok((lookup(&p.a)?, lookup(&p.b)?, p.label)))
            .collect::<Result<Vec<_>>>()?;
        let space = FeatureSpace::from_pairs(resolved.iter().map(|(a, b, _)| (*a, *b)));
        let examples: Vec<Example> = resolved
            .iter()
            .map(|(a, b, label)| Example {
                features: space.extract(a, b, resources),
                label: *label,
            })
            .collect();
        let (theta, summary) = fit_weights(&examples, space.len(), opts)?;
        Ok((
            Self {
                theta,
                space,
                l2: opts.l2,
                truncation_threshold: DEFAULT_TRUNCATION,
                gamma: DEFAULT_GAMMA,
            },
            summary,
        ))
    }

    pub fn score(&self, a: &Mention, b: &Mention, r: &LexicalResources) -> f64 {
        self.space.extract(a, b, r).dot(&self.theta)
    }

    /// `σ(θᵀψ(a, b))`.
    pub fn pair_similarity(&self, a: &Mention, b: &Mention, r: &LexicalResources) -> f64 {
        sigmoid(self.score(a, b, r))
    }

    /// Zero below the truncation threshold, the value itself otherwise.
    pub fn truncate(&self, similarity: f64) -> f64 {
        if similarity >= self.truncation_threshold {
            similarity
        } else {
            0.0
        }
    }

    /// Within-document distance from `a` to an earlier mention `b`.
    pub fn within_doc_distance(&self, a: &Mention, b: &Mention, r: &LexicalResources) -> Result<f64> {
        if a.doc_id != b.doc_id {
            return Err(Error::InvalidArgument(format!(
                "within-document distance between `{}` and `{}` from different documents",
                a.mention_id, b.mention_id
            )));
        }
        if b.order_index >= a.order_index {
            return Err(Error::InvalidArgument(format!(
                "`{}` does not precede `{}`",
                b.mention_id, a.mention_id
            )));
        }
        Ok(self.truncate(self.pair_similarity(a, b, r)))
    }

    /// Document weight `exp(γ · sim(d, d2))`.
    pub fn document_weight(&self, d: &Document, d2: &Document) -> f64 {
        (self.gamma * doc_similarity(d, d2)).exp()
    }

    /// Cross-document distance: the document weight times the truncated
    /// mention similarity.
    pub fn cross_doc_distance(
        &self,
        a: &Mention,
        da: &Document,
        b: &Mention,
        db: &Document,
        r: &LexicalResources,
    ) -> Result<f64> {
        if da.doc_id == db.doc_id || a.doc_id == b.doc_id {
            return Err(Error::InvalidArgument(format!(
                "cross-document distance between `{}` and `{}` in the same document",
                a.mention_id, b.mention_id
            )));
        }
        if a.doc_id != da.doc_id || b.doc_id != db.doc_id {
            return Err(Error::InvalidArgument("mention does not belong to the given document".into()));
        }
        let t = self.truncate(self.pair_similarity(a, b, r));
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.document_weight(da, db) * t)
    }

    /// Fraction of `pairs` on which `σ(θᵀψ) ≥ 0.5` agrees with the label.
    pub fn accuracy(&self, corpus: &Corpus, pairs: &[TrainingPair], resources: &LexicalResources) -> Result<f64> {
        if pairs.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0;
        for p in pairs {
            let (a, b) = match (corpus.index_of(&p.a), corpus.index_of(&p.b)) {
                (Some(a), Some(b)) => (corpus.mention(a), corpus.mention(b)),
                _ => return Err(Error::Validation(format!("pair ({}, {}) references unknown mentions", p.a, p.b))),
            };
            let predicted = self.pair_similarity(a, b, resources) >= 0.5;
            if predicted == (p.label == PairLabel::Coreferent) {
                correct += 1;
            }
        }
        Ok(correct as f64 / pairs.len() as f64)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            theta: self.theta.clone(),
            feature_index: self.space.index_map(),
            l2: self.l2,
            truncation_threshold: self.truncation_threshold,
            gamma: self.gamma,
            training: None,
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        let space = FeatureSpace::from_index_map(&file.feature_index)?;
        if file.theta.len() != space.len() {
            return Err(Error::Validation(format!(
                "theta has {} weights but the feature index has {}",
                file.theta.len(),
                space.len()
            )));
        }
        if file.theta.iter().any(|w| !w.is_finite()) {
            return Err(Error::Validation("non-finite weight in model".into()));
        }
        Ok(Self {
            theta: file.theta.clone(),
            space,
            l2: file.l2,
            truncation_threshold: file.truncation_threshold,
            gamma: file.gamma,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file(&serde_json::from_str(&text)?)
    }
}

/// On-disk model: `{theta, feature_index, l2, truncation_threshold, gamma}`
/// plus an optional record of how it was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub theta: Vec<f64>,
    pub feature_index: BTreeMap<String, usize>,
    pub l2: f64,
    pub truncation_threshold: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<serde_json::Value>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn examples(rows: &[(&[f64], bool)]) -> Vec<Example> {
        rows.iter()
            .map(|(x, pos)| Example {
                features: FeatureVector::from(x.to_vec()),
                label: if *pos { PairLabel::Coreferent } else { PairLabel::NotCoreferent },
            })
            .collect()
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(4f64.ln()) - 0.8).abs() < 1e-15);
        assert!((sigmoid(1.3863) - 0.8).abs() < 1e-5);
        assert!(sigmoid(800.0) == 1.0 && sigmoid(-800.0) >= 0.0);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn single_label_data_rejected() {
        let ex = examples(&[(&[1.0, 1.0], true), (&[0.5, 1.0], true)]);
        assert!(matches!(fit_weights(&ex, 2, &TrainingOptions::default()), Err(Error::Training(_))));
    }

    #[test]
    fn non_finite_features_rejected() {
        let ex = examples(&[(&[f64::NAN, 1.0], true), (&[0.5, 1.0], false)]);
        assert!(fit_weights(&ex, 2, &TrainingOptions::default()).is_err());
    }

    #[test]
    fn separable_data_trains_to_finite_weights() {
        let ex = examples(&[(&[1.0, 1.0], true), (&[0.9, 1.0], true), (&[0.1, 1.0], false), (&[0.0, 1.0], false)]);
        let (theta, summary) = fit_weights(&ex, 2, &TrainingOptions::default()).unwrap();
        assert!(theta.iter().all(|w| w.is_finite()));
        assert!(summary.converged);
        assert!(summary.final_objective > summary.initial_objective);
        for e in &ex {
            let p = sigmoid(e.features.dot(&theta));
            assert_eq!(p > 0.5, e.label == PairLabel::Coreferent);
        }
    }

    #[test]
    fn truncation_is_inclusive() {
        let m = PairwiseModel::zero(FeatureSpace::default());
        assert_eq!(m.truncate(0.4), 0.0);
        assert_eq!(m.truncate(0.5), 0.5);
        assert_eq!(m.truncate(0.9), 0.9);
    }
}
