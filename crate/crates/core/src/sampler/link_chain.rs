//! Link-graph Gibbs sampler for the hierarchical and the flat DDCRP.
//!
//! The clustering is the set of connected components of the undirected graph
//! whose edges are all customer links plus the active table links. Each
//! cluster keeps its word counts and log marginal. Resampling one link first
//! detaches the mention's edges and rebuilds only the component that
//! contained it; each candidate link then either merges two components or
//! leaves the clustering unchanged, so its likelihood ratio is a single merge
//! ratio.

use rand::seq::{IndexedRandom, SliceRandom};

use super::{normalize_log_weights, sample_log_weights, Chain, ChainRng, Emission, ModelKind, SamplerConfig, SamplerState, ScanOrder};
use crate::corpus::Corpus;
use crate::distances::Distances;
use crate::error::{Error, Result};
use crate::likelihood::{corpus_log_likelihood, ClusterStats, Vocabulary};
use crate::links::{clusters_from_links, DisjointSets, LinkState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Hierarchical,
    Flat { sequential: bool },
}

#[derive(Debug, Clone)]
struct Cluster {
    stats: ClusterStats,
    log_marginal: f64,
}

/// Largest discrepancy seen between incremental ratios and recomputation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AuditReport {
    pub checks: usize,
    pub max_abs_error: f64,
}

pub struct LinkChain<'a> {
    corpus: &'a Corpus,
    distances: &'a Distances,
    mode: Mode,
    alpha_self: f64,
    alpha_0: f64,
    emission: Emission,
    scan: ScanOrder,
    mention_stats: Vec<ClusterStats>,
    state: LinkState,
    cluster_of: Vec<usize>,
    clusters: Vec<Option<Cluster>>,
    free: Vec<usize>,
    audit: Option<AuditReport>,
}

impl<'a> LinkChain<'a> {
    fn empty(corpus: &'a Corpus, distances: &'a Distances, cfg: &SamplerConfig) -> Result<Self> {
        let (mode, alpha_self) = match cfg.model {
            ModelKind::Hddcrp => (Mode::Hierarchical, cfg.alpha_d),
            ModelKind::DdcrpFlat => (
                Mode::Flat {
                    sequential: cfg.sequential_flat,
                },
                cfg.alpha_0,
            ),
            m => return Err(Error::InvalidArgument(format!("{m} is not a link-graph model"))),
        };
        let vocab = Vocabulary::from_corpus(corpus);
        let n = corpus.num_mentions();
        Ok(Self {
            corpus,
            distances,
            mode,
            alpha_self,
            alpha_0: cfg.alpha_0,
            emission: Emission::new(corpus, cfg)?,
            scan: cfg.scan,
            mention_stats: (0..n).map(|g| ClusterStats::for_mention(&vocab, corpus.mention(g), g)).collect(),
            state: LinkState::all_self(n),
            cluster_of: vec![0; n],
            clusters: Vec::new(),
            free: Vec::new(),
            audit: None,
        })
    }

    /// Draws every link uniformly from its positive-prior support.
    pub fn init(corpus: &'a Corpus, distances: &'a Distances, cfg: &SamplerConfig, rng: &mut ChainRng) -> Result<Self> {
        let mut chain = Self::empty(corpus, distances, cfg)?;
        let n = corpus.num_mentions();
        for i in 0..n {
            let support = chain.customer_candidates(i);
            chain.state.customer_links[i] = support.choose(rng).expect("self is always supported").0;
            if chain.mode == Mode::Hierarchical {
                let support = chain.table_candidates(i);
                chain.state.table_links[i] = support.choose(rng).expect("self is always supported").0;
            }
        }
        chain.rebuild();
        Ok(chain)
    }

    /// Starts from an explicit state; every link must have positive prior.
    pub fn from_state(corpus: &'a Corpus, distances: &'a Distances, cfg: &SamplerConfig, state: LinkState) -> Result<Self> {
        let mut chain = Self::empty(corpus, distances, cfg)?;
        if state.len() != corpus.num_mentions() {
            return Err(Error::Validation("link state does not match the corpus".into()));
        }
        for i in 0..state.len() {
            if !chain.customer_candidates(i).iter().any(|&(j, _)| j == state.customer_links[i]) {
                return Err(Error::Validation(format!("customer link of {i} has zero prior")));
            }
            let table_ok = match chain.mode {
                Mode::Hierarchical => chain.table_candidates(i).iter().any(|&(j, _)| j == state.table_links[i]),
                Mode::Flat { .. } => state.table_links[i] == i,
            };
            if !table_ok {
                return Err(Error::Validation(format!("table link of {i} has zero prior")));
            }
        }
        chain.state = state;
        chain.rebuild();
        Ok(chain)
    }

    /// Turns on recomputation of every candidate's likelihood from scratch.
    pub fn enable_audit(&mut self) {
        self.audit = Some(AuditReport::default());
    }

    pub fn audit_report(&self) -> Option<AuditReport> {
        self.audit
    }

    pub fn link_state(&self) -> &LinkState {
        &self.state
    }

    /// Self first, then earlier mentions (hierarchical) or any positive
    /// target (flat).
    fn customer_candidates(&self, i: usize) -> Vec<(usize, f64)> {
        let mut c = vec![(i, self.alpha_self)];
        match self.mode {
            Mode::Hierarchical => c.extend_from_slice(self.distances.within(i)),
            Mode::Flat { sequential } => c.extend(self.distances.flat(i).iter().filter(|(j, _)| !sequential || *j < i)),
        }
        c
    }

    fn table_candidates(&self, i: usize) -> Vec<(usize, f64)> {
        let mut c = vec![(i, self.alpha_0)];
        if self.mode == Mode::Hierarchical {
            c.extend_from_slice(self.distances.cross(i));
        }
        c
    }

    fn new_cluster(&mut self, members: &[usize]) -> usize {
        let mut stats = ClusterStats::default();
        for &m in members {
            stats.absorb(&self.mention_stats[m]);
        }
        let log_marginal = self.emission.log_marginal(&stats);
        let cluster = Cluster { stats, log_marginal };
        let id = match self.free.pop() {
            Some(id) => {
                self.clusters[id] = Some(cluster);
                id
            }
            None => {
                self.clusters.push(Some(cluster));
                self.clusters.len() - 1
            }
        };
        for &m in members {
            self.cluster_of[m] = id;
        }
        id
    }

    fn cluster(&self, id: usize) -> &Cluster {
        self.clusters[id].as_ref().expect("live cluster")
    }

    fn rebuild(&mut self) {
        self.clusters.clear();
        self.free.clear();
        let mut sets = DisjointSets::new(self.state.len());
        for i in 0..self.state.len() {
            let a = self.state.customer_links[i];
            if a != i {
                sets.union(i, a);
            } else if self.state.table_links[i] != i {
                sets.union(i, self.state.table_links[i]);
            }
        }
        let labels = sets.labels();
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            groups[l].push(i);
        }
        for g in groups {
            self.new_cluster(&g);
        }
    }

    /// Splits the cluster of `i` as if its customer edge (when `customer`) or
    /// table edge (when `table`) were absent.
    fn detach(&mut self, i: usize, customer: bool, table: bool) {
        let c = self.cluster_of[i];
        if self.cluster(c).stats.members().len() == 1 {
            return;
        }
        let removed = self.clusters[c].take().expect("live cluster");
        self.free.push(c);
        let members = removed.stats.members();
        let local = |m: usize| members.binary_search(&m).expect("link target inside its cluster");
        let mut sets = DisjointSets::new(members.len());
        for (li, &m) in members.iter().enumerate() {
            let a = self.state.customer_links[m];
            if a != m {
                if !(customer && m == i) {
                    sets.union(li, local(a));
                }
            } else {
                let t = self.state.table_links[m];
                if t != m && !(table && m == i) {
                    sets.union(li, local(t));
                }
            }
        }
        let labels = sets.labels();
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); k];
        for (li, &l) in labels.iter().enumerate() {
            groups[l].push(members[li]);
        }
        for g in groups {
            self.new_cluster(&g);
        }
    }

    fn merge(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (keep, gone) = if self.cluster(a).stats.members().len() >= self.cluster(b).stats.members().len() {
            (a, b)
        } else {
            (b, a)
        };
        let gone_cluster = self.clusters[gone].take().expect("live cluster");
        self.free.push(gone);
        for &m in gone_cluster.stats.members() {
            self.cluster_of[m] = keep;
        }
        let emission = self.emission;
        let kept = self.clusters[keep].as_mut().expect("live cluster");
        kept.stats.absorb(&gone_cluster.stats);
        kept.log_marginal = emission.log_marginal(&kept.stats);
    }

    /// Log ratio of joining the current components of `i` and `partner`.
    fn join_ratio(&self, i: usize, partner: usize) -> f64 {
        let (ci, cp) = (self.cluster_of[i], self.cluster_of[partner]);
        if ci == cp {
            0.0
        } else {
            self.emission.merge_ratio(&self.cluster(ci).stats, &self.cluster(cp).stats)
        }
    }

    fn scratch_log_likelihood(&self, state: &LinkState) -> f64 {
        match self.emission {
            Emission::Dirichlet(p) => {
                corpus_log_likelihood(&clusters_from_links(state, self.corpus), self.corpus, &p).expect("state covers corpus")
            }
            Emission::Flat => 0.0,
        }
    }

    fn audit_candidates(&mut self, i: usize, customer: bool, cands: &[(usize, f64)], ratios: &[f64]) {
        if self.audit.is_none() {
            return;
        }
        let mut base_state = self.state.clone();
        if customer {
            base_state.customer_links[i] = i;
        }
        base_state.table_links[i] = i;
        let base = self.scratch_log_likelihood(&base_state);
        let mut report = self.audit.expect("audit enabled");
        for (&(target, _), &ratio) in cands.iter().zip(ratios) {
            let mut s = self.state.clone();
            if customer {
                s.customer_links[i] = target;
            } else {
                s.table_links[i] = target;
            }
            let err = (self.scratch_log_likelihood(&s) - (base + ratio)).abs();
            report.checks += 1;
            report.max_abs_error = report.max_abs_error.max(err);
        }
        self.audit = Some(report);
    }

    /// Candidates and log weights for `i`'s customer link, with `i` detached.
    fn customer_conditional(&mut self, i: usize) -> (Vec<(usize, f64)>, Vec<f64>) {
        self.detach(i, true, true);
        let cands = self.customer_candidates(i);
        let ratios: Vec<f64> = cands
            .iter()
            .map(|&(j, _)| {
                if j != i {
                    self.join_ratio(i, j)
                } else if self.state.table_links[i] != i {
                    self.join_ratio(i, self.state.table_links[i])
                } else {
                    0.0
                }
            })
            .collect();
        self.audit_candidates(i, true, &cands, &ratios);
        let logw = cands.iter().zip(&ratios).map(|(&(_, w), r)| w.ln() + r).collect();
        (cands, logw)
    }

    fn attach_customer(&mut self, i: usize, target: usize) {
        self.state.customer_links[i] = target;
        let partner = if target != i { target } else { self.state.table_links[i] };
        if partner != i {
            self.merge(self.cluster_of[i], self.cluster_of[partner]);
        }
    }

    /// Resamples `a_i` from prior × likelihood.
    pub fn sample_customer_link(&mut self, i: usize, rng: &mut ChainRng) {
        let (cands, logw) = self.customer_conditional(i);
        let pick = cands[sample_log_weights(&logw, rng)].0;
        self.attach_customer(i, pick);
    }

    /// Exact conditional of `a_i` given everything else; leaves the state as is.
    pub fn customer_link_probabilities(&mut self, i: usize) -> Vec<(usize, f64)> {
        let current = self.state.customer_links[i];
        let (cands, logw) = self.customer_conditional(i);
        self.attach_customer(i, current);
        cands.iter().map(|c| c.0).zip(normalize_log_weights(&logw)).collect()
    }

    fn table_conditional(&mut self, i: usize) -> (Vec<(usize, f64)>, Vec<f64>) {
        let cands = self.table_candidates(i);
        let ratios: Vec<f64> = if self.state.is_head(i) {
            self.detach(i, false, true);
            cands.iter().map(|&(j, _)| if j == i { 0.0 } else { self.join_ratio(i, j) }).collect()
        } else {
            vec![0.0; cands.len()]
        };
        if self.state.is_head(i) {
            self.audit_candidates(i, false, &cands, &ratios);
        }
        let logw = cands.iter().zip(&ratios).map(|(&(_, w), r)| w.ln() + r).collect();
        (cands, logw)
    }

    fn attach_table(&mut self, i: usize, target: usize) {
        self.state.table_links[i] = target;
        if self.state.is_head(i) && target != i {
            self.merge(self.cluster_of[i], self.cluster_of[target]);
        }
    }

    /// Resamples `c_i`. For a non-head the likelihood ratio is 1 and the draw
    /// follows the prior.
    pub fn sample_table_link(&mut self, i: usize, rng: &mut ChainRng) {
        let (cands, logw) = self.table_conditional(i);
        let pick = cands[sample_log_weights(&logw, rng)].0;
        self.attach_table(i, pick);
    }

    pub fn table_link_probabilities(&mut self, i: usize) -> Vec<(usize, f64)> {
        let current = self.state.table_links[i];
        let (cands, logw) = self.table_conditional(i);
        self.attach_table(i, current);
        cands.iter().map(|c| c.0).zip(normalize_log_weights(&logw)).collect()
    }

    fn scan_order(&self, rng: &mut ChainRng) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.state.len()).collect();
        if self.scan == ScanOrder::Randomized {
            order.shuffle(rng);
        }
        order
    }

    fn log_prior(&self) -> f64 {
        let term = |cands: &[(usize, f64)], target: usize| {
            let total: f64 = cands.iter().map(|c| c.1).sum();
            let w = cands.iter().find(|c| c.0 == target).expect("link inside support").1;
            (w / total).ln()
        };
        let mut lp = 0.0;
        for i in 0..self.state.len() {
            lp += term(&self.customer_candidates(i), self.state.customer_links[i]);
            if self.mode == Mode::Hierarchical {
                lp += term(&self.table_candidates(i), self.state.table_links[i]);
            }
        }
        lp
    }

    pub fn log_likelihood(&self) -> f64 {
        self.clusters.iter().flatten().map(|c| c.log_marginal).sum()
    }
}

impl Chain for LinkChain<'_> {
    /// Customer links for every mention, then table links for every mention.
    fn sweep(&mut self, rng: &mut ChainRng) {
        for i in self.scan_order(rng) {
            self.sample_customer_link(i, rng);
        }
        if self.mode == Mode::Hierarchical {
            for i in self.scan_order(rng) {
                self.sample_table_link(i, rng);
            }
        }
    }

    fn labels(&self) -> Vec<usize> {
        self.cluster_of.clone()
    }

    fn joint_log_score(&self) -> f64 {
        self.log_prior() + self.log_likelihood()
    }

    fn state(&self) -> SamplerState {
        SamplerState::Links(self.state.clone())
    }
}
