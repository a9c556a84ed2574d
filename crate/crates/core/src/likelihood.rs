//! Collapsed Dirichlet-multinomial likelihood over mention span lemmas.

use std::collections::BTreeMap;

use libm::lgamma;

use crate::corpus::{Corpus, Mention};
use crate::error::{Error, Result};
use crate::links::ClusterAssignment;

pub const DEFAULT_LAMBDA: f64 = 1e-7;

/// Closed vocabulary of span lemmas.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    ids: BTreeMap<String, u32>,
}

impl Vocabulary {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut ids = BTreeMap::new();
        for m in corpus.mentions() {
            for w in &m.span_lemmas {
                ids.entry(w.clone()).or_insert(0);
            }
        }
        for (i, v) in ids.values_mut().enumerate() {
            *v = i as u32;
        }
        Self { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn mention_stats(&self, m: &Mention) -> ClusterStats {
        let mut s = ClusterStats::default();
        for w in &m.span_lemmas {
            s.add_word(self.id(w).expect("span lemma outside vocabulary"), 1);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodParams {
    pub lambda: f64,
    pub vocab_size: usize,
}

impl LikelihoodParams {
    pub fn new(lambda: f64, vocab_size: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        if vocab_size == 0 {
            return Err(Error::InvalidArgument("vocabulary is empty".into()));
        }
        Ok(Self { lambda, vocab_size })
    }

    pub fn for_corpus(corpus: &Corpus, lambda: f64) -> Result<Self> {
        Self::new(lambda, Vocabulary::from_corpus(corpus).len())
    }

    fn concentration(&self) -> f64 {
        self.lambda * self.vocab_size as f64
    }
}

/// Word counts of a cluster. `members` optionally records which mentions
/// contributed, for overlap checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterStats {
    counts: BTreeMap<u32, u32>,
    total: u32,
    members: Vec<usize>,
}

impl ClusterStats {
    pub fn from_counts(counts: &[u32]) -> Self {
        let mut s = Self::default();
        for (w, &c) in counts.iter().enumerate() {
            s.add_word(w as u32, c);
        }
        s
    }

    pub fn for_mention(vocab: &Vocabulary, m: &Mention, index: usize) -> Self {
        let mut s = vocab.mention_stats(m);
        s.members.push(index);
        s
    }

    pub fn add_word(&mut self, word: u32, count: u32) {
        if count > 0 {
            *self.counts.entry(word).or_insert(0) += count;
            self.total += count;
        }
    }

    pub fn count(&self, word: u32) -> u32 {
        self.counts.get(&word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0 && self.members.is_empty()
    }

    pub fn absorb(&mut self, other: &ClusterStats) {
        for (&w, &c) in &other.counts {
            self.add_word(w, c);
        }
        let mut members = Vec::with_capacity(self.members.len() + other.members.len());
        let (mut i, mut j) = (0, 0);
        while i < self.members.len() || j < other.members.len() {
            if j == other.members.len() || (i < self.members.len() && self.members[i] < other.members[j]) {
                members.push(self.members[i]);
                i += 1;
            } else {
                members.push(other.members[j]);
                j += 1;
            }
        }
        self.members = members;
    }

    /// Inverse of [`absorb`](Self::absorb) for a contained sub-cluster.
    pub fn remove(&mut self, other: &ClusterStats) {
        for (&w, &c) in &other.counts {
            let e = self.counts.get_mut(&w).expect("removing absent word");
            *e -= c;
            if *e == 0 {
                self.counts.remove(&w);
            }
            self.total -= c;
        }
        self.members.retain(|m| other.members.binary_search(m).is_err());
    }

    fn overlaps(&self, other: &ClusterStats) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.members.len() && j < other.members.len() {
            match self.members[i].cmp(&other.members[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// `ln [Γ(Vλ)/Γ(Vλ+N) · Π_w Γ(λ+n_w)/Γ(λ)]`.
pub fn log_marginal(stats: &ClusterStats, p: &LikelihoodParams) -> f64 {
    if stats.total == 0 {
        return 0.0;
    }
    let a = p.concentration();
    let lg_lambda = lgamma(p.lambda);
    let words: f64 = stats
        .counts
        .values()
        .map(|&n| lgamma(p.lambda + f64::from(n)) - lg_lambda)
        .sum();
    lgamma(a) - lgamma(a + f64::from(stats.total)) + words
}

/// Log likelihood ratio of merging two disjoint clusters:
/// `ln p(a ∪ b) − ln p(a) − ln p(b)`.
pub fn log_ratio_for_merge(a: &ClusterStats, b: &ClusterStats, p: &LikelihoodParams) -> Result<f64> {
    if a.overlaps(b) {
        return Err(Error::InvalidArgument("merging clusters that share mentions".into()));
    }
    Ok(merge_ratio_unchecked(a, b, p))
}

pub(crate) fn merge_ratio_unchecked(a: &ClusterStats, b: &ClusterStats, p: &LikelihoodParams) -> f64 {
    if a.total == 0 || b.total == 0 {
        return 0.0;
    }
    let (small, large) = if a.counts.len() <= b.counts.len() { (a, b) } else { (b, a) };
    let conc = p.concentration();
    let (na, nb) = (f64::from(a.total), f64::from(b.total));
    let mut r = lgamma(conc + na) + lgamma(conc + nb) - lgamma(conc) - lgamma(conc + na + nb);
    let lg_lambda = lgamma(p.lambda);
    for (&w, &cs) in &small.counts {
        let cl = large.count(w);
        if cl > 0 {
            let (cs, cl) = (f64::from(cs), f64::from(cl));
            r += lgamma(p.lambda + cs + cl) - lgamma(p.lambda + cs) - lgamma(p.lambda + cl) + lg_lambda;
        }
    }
    r
}

/// Stats of every cluster of `z` over the mentions of `corpus`.
pub fn cluster_stats(z: &ClusterAssignment, corpus: &Corpus) -> Result<Vec<ClusterStats>> {
    let vocab = Vocabulary::from_corpus(corpus);
    let labels = z.labels_for(corpus)?;
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut stats = vec![ClusterStats::default(); k];
    for (g, &l) in labels.iter().enumerate() {
        stats[l].absorb(&ClusterStats::for_mention(&vocab, corpus.mention(g), g));
    }
    Ok(stats)
}

/// `Σ_k ln p(x_{z=k} | λ)`.
pub fn corpus_log_likelihood(z: &ClusterAssignment, corpus: &Corpus, p: &LikelihoodParams) -> Result<f64> {
    Ok(cluster_stats(z, corpus)?.iter().map(|s| log_marginal(s, p)).sum())
}
