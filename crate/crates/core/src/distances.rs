//! Precomputed link-prior weights for every mention.
//!
//! Only strictly positive weights are stored, so a target absent from a list
//! has prior probability zero.

use crate::corpus::Corpus;
use crate::error::Result;
use crate::lexical::LexicalResources;
use crate::pairwise::PairwiseModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Distances {
    /// Per mention: earlier mentions of the same document.
    within: Vec<Vec<(usize, f64)>>,
    /// Per mention: mentions of other documents.
    cross: Vec<Vec<(usize, f64)>>,
    /// Per mention: every other mention of the corpus, ignoring documents.
    flat: Vec<Vec<(usize, f64)>>,
}

fn push_positive(list: &mut Vec<(usize, f64)>, j: usize, w: f64) {
    if w > 0.0 && w.is_finite() {
        list.push((j, w));
    }
}

impl Distances {
    /// Builds the tables from arbitrary weight functions over global indices.
    ///
    /// `within(i, j)` is queried for `j < i` in the same document,
    /// `cross(i, j)` for mentions of different documents and `flat(i, j)`
    /// for every `j != i`.
    pub fn from_fns(
        corpus: &Corpus,
        mut within: impl FnMut(usize, usize) -> f64,
        mut cross: impl FnMut(usize, usize) -> f64,
        mut flat: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let n = corpus.num_mentions();
        let mut t = Self {
            within: vec![Vec::new(); n],
            cross: vec![Vec::new(); n],
            flat: vec![Vec::new(); n],
        };
        for i in 0..n {
            let di = corpus.doc_of(i);
            for j in 0..n {
                if j == i {
                    continue;
                }
                if corpus.doc_of(j) == di {
                    if j < i {
                        push_positive(&mut t.within[i], j, within(i, j));
                    }
                } else {
                    push_positive(&mut t.cross[i], j, cross(i, j));
                }
                push_positive(&mut t.flat[i], j, flat(i, j));
            }
        }
        t
    }

    /// The same weight for every admissible pair.
    pub fn uniform(corpus: &Corpus, within: f64, cross: f64) -> Self {
        Self::from_fns(corpus, |_, _| within, |_, _| cross, |i, j| {
            if corpus.doc_of(i) == corpus.doc_of(j) {
                within
            } else {
                cross
            }
        })
    }

    /// Distances from a trained model. Flat weights reuse the truncated
    /// pair similarity without any document weighting.
    pub fn from_model(corpus: &Corpus, model: &PairwiseModel, resources: &LexicalResources) -> Result<Self> {
        let n = corpus.num_mentions();
        let mut sim = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let s = model.truncate(model.pair_similarity(corpus.mention(i), corpus.mention(j), resources));
                sim[i * n + j] = s;
                sim[j * n + i] = s;
            }
        }
        let docs = corpus.documents();
        let nd = docs.len();
        let mut weight = vec![0.0; nd * nd];
        for d in 0..nd {
            for e in 0..nd {
                weight[d * nd + e] = model.document_weight(&docs[d], &docs[e]);
            }
        }
        Ok(Self::from_fns(
            corpus,
            |i, j| sim[i * n + j],
            |i, j| weight[corpus.doc_of(i) * nd + corpus.doc_of(j)] * sim[i * n + j],
            |i, j| sim[i * n + j],
        ))
    }

    pub fn num_mentions(&self) -> usize {
        self.within.len()
    }

    pub fn within(&self, i: usize) -> &[(usize, f64)] {
        &self.within[i]
    }

    pub fn cross(&self, i: usize) -> &[(usize, f64)] {
        &self.cross[i]
    }

    pub fn flat(&self, i: usize) -> &[(usize, f64)] {
        &self.flat[i]
    }
}
