//! Deterministic comparison systems: same-head-lemma grouping and two-phase
//! single-link agglomerative clustering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lexical::LexicalResources;
use crate::links::{ClusterAssignment, DisjointSets};
use crate::pairwise::PairwiseModel;

/// Groups mentions corpus-wide by identical head lemma.
pub fn lemma_baseline(corpus: &Corpus) -> ClusterAssignment {
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    let raw: Vec<usize> = corpus
        .mentions()
        .map(|m| {
            let next = ids.len();
            *ids.entry(m.head_lemma.as_str()).or_insert(next)
        })
        .collect();
    ClusterAssignment::from_labels(corpus, &raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgglomerativeConfig {
    pub wd_threshold: f64,
    pub cd_threshold: f64,
}

impl Default for AgglomerativeConfig {
    fn default() -> Self {
        Self {
            wd_threshold: 0.5,
            cd_threshold: 0.5,
        }
    }
}

impl AgglomerativeConfig {
    /// Thresholds must lie in `[0, 1]`, or just above 1 to disable merging.
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("wd_threshold", self.wd_threshold), ("cd_threshold", self.cd_threshold)] {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} must be a nonnegative number, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    WithinDocument,
    CrossDocument,
}

/// One merge of two clusters, identified by the mention pair that linked them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub phase: Phase,
    pub a: usize,
    pub b: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgglomerativeResult {
    pub clustering: ClusterAssignment,
    pub merges: Vec<Merge>,
}

/// Single-link merging over the given scored pairs: repeatedly joins the two
/// clusters with the highest cross-cluster pair while it clears `threshold`.
/// Ties go to the pair with the smallest indices.
fn single_link(sets: &mut DisjointSets, mut pairs: Vec<(usize, usize, f64)>, threshold: f64, phase: Phase, trace: &mut Vec<Merge>) {
    pairs.retain(|p| p.2 >= threshold);
    pairs.sort_by(|x, y| y.2.total_cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    for (a, b, similarity) in pairs {
        if sets.union(a, b) {
            trace.push(Merge { phase, a, b, similarity });
        }
    }
}

/// Two-phase single-link clustering with arbitrary similarity functions over
/// global mention indices: within each document with `wd_sim`, then across
/// documents with `cd_sim` on pairs from different documents.
pub fn agglomerative_with(
    corpus: &Corpus,
    cfg: &AgglomerativeConfig,
    mut wd_sim: impl FnMut(usize, usize) -> f64,
    mut cd_sim: impl FnMut(usize, usize) -> f64,
) -> Result<AgglomerativeResult> {
    cfg.validate()?;
    let n = corpus.num_mentions();
    let mut sets = DisjointSets::new(n);
    let mut merges = Vec::new();
    for d in 0..corpus.num_documents() {
        let range = corpus.doc_range(d);
        let pairs = range
            .clone()
            .flat_map(|i| (range.start..i).map(move |j| (j, i)))
            .map(|(j, i)| (j, i, wd_sim(j, i)))
            .collect();
        single_link(&mut sets, pairs, cfg.wd_threshold, Phase::WithinDocument, &mut merges);
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..i {
            if corpus.doc_of(i) != corpus.doc_of(j) {
                pairs.push((j, i, cd_sim(j, i)));
            }
        }
    }
    single_link(&mut sets, pairs, cfg.cd_threshold, Phase::CrossDocument, &mut merges);
    Ok(AgglomerativeResult {
        clustering: ClusterAssignment::from_labels(corpus, &sets.labels()),
        merges,
    })
}

/// Agglomerative baseline driven by a trained pairwise model: predicted
/// similarity within documents, truncated similarity across them.
pub fn agglomerative(
    corpus: &Corpus,
    model: &PairwiseModel,
    resources: &LexicalResources,
    cfg: &AgglomerativeConfig,
) -> Result<AgglomerativeResult> {
    let sim = |a: usize, b: usize| model.pair_similarity(corpus.mention(a), corpus.mention(b), resources);
    agglomerative_with(corpus, cfg, sim, |a, b| model.truncate(sim(a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Mention};

    fn corpus(heads: &[&[&str]]) -> Corpus {
        let docs = heads
            .iter()
            .enumerate()
            .map(|(d, hs)| {
                let mentions = hs
                    .iter()
                    .enumerate()
                    .map(|(i, h)| Mention {
                        mention_id: format!("d{d}m{i}"),
                        doc_id: String::new(),
                        order_index: i,
                        head_lemma: (*h).into(),
                        head_pos: "NN".into(),
                        span_lemmas: vec![(*h).into()],
                        context_lemmas: vec![],
                        arguments: Default::default(),
                    })
                    .collect();
                Document::new(format!("d{d}"), None, mentions)
            })
            .collect();
        Corpus::new(docs, None).unwrap()
    }

    #[test]
    fn lemma_groups_equal_heads() {
        let c = corpus(&[&["bomb", "bomb"], &["strike"]]);
        let z = lemma_baseline(&c);
        assert_eq!(z.get("d0m0"), z.get("d0m1"));
        assert_ne!(z.get("d0m0"), z.get("d1m0"));
        let c = corpus(&[&["a", "b"], &["c"]]);
        assert_eq!(lemma_baseline(&c).num_clusters(), 3);
    }

    #[test]
    fn thresholds_bound_merging() {
        let c = corpus(&[&["a", "b"], &["c", "d"]]);
        let none = AgglomerativeConfig {
            wd_threshold: 1.0 + 1e-9,
            cd_threshold: 1.0 + 1e-9,
        };
        let r = agglomerative_with(&c, &none, |_, _| 1.0, |_, _| 1.0).unwrap();
        assert_eq!(r.clustering.num_clusters(), 4);
        assert!(r.merges.is_empty());

        let wd_only = AgglomerativeConfig {
            wd_threshold: 0.0,
            cd_threshold: 1.0 + 1e-9,
        };
        let r = agglomerative_with(&c, &wd_only, |_, _| 0.0, |_, _| 0.0).unwrap();
        assert_eq!(r.clustering.num_clusters(), 2);

        let all = AgglomerativeConfig {
            wd_threshold: 0.0,
            cd_threshold: 0.0,
        };
        let r = agglomerative_with(&c, &all, |_, _| 0.0, |_, _| 0.0).unwrap();
        assert_eq!(r.clustering.num_clusters(), 1);
    }

    #[test]
    fn hand_traced_merge_sequence() {
        // Mentions 0,1 in doc 0; 2,3 in doc 1.
        let c = corpus(&[&["a", "b"], &["c", "d"]]);
        let sim = |a: usize, b: usize| match (a, b) {
            (0, 1) => 0.9,
            (2, 3) => 0.4,
            (1, 2) => 0.7,
            (0, 3) => 0.7,
            (0, 2) => 0.6,
            _ => 0.1,
        };
        let cfg = AgglomerativeConfig::default();
        let r = agglomerative_with(&c, &cfg, sim, sim).unwrap();
        let seq: Vec<(usize, usize)> = r.merges.iter().map(|m| (m.a, m.b)).collect();
        assert_eq!(seq, [(0, 1), (0, 3), (1, 2)]);
        assert_eq!(r.clustering.num_clusters(), 1);
    }
}
