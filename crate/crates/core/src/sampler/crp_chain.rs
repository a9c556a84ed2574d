//! Two-level sampler where tables are grouped by a plain Chinese restaurant
//! process: the within-document-only hierarchical variant (customer links
//! weighted by within-document distances) and the lexical HDP (uniform
//! customer links).
//!
//! When a customer link is resampled the mention's subtree leaves its table.
//! Choosing an earlier mention seats the subtree at that mention's table;
//! choosing itself opens a new table whose top-level cluster is drawn jointly,
//! so the self candidate expands into one option per existing cluster plus a
//! new one.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{normalize_log_weights, sample_log_weights, Chain, ChainRng, Emission, ModelKind, SamplerConfig, SamplerState, ScanOrder};
use crate::corpus::Corpus;
use crate::distances::Distances;
use crate::error::{Error, Result};
use crate::likelihood::{ClusterStats, Vocabulary};
use crate::links::{tables_from_customer_links, DisjointSets};

#[derive(Debug, Clone)]
struct TableData {
    stats: ClusterStats,
    dish: usize,
}

#[derive(Debug, Clone)]
struct Dish {
    stats: ClusterStats,
    tables: usize,
    log_marginal: f64,
}

/// Where a new table (or a reseated one) goes at the top level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DishChoice {
    Existing(usize),
    New,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Link(usize),
    OwnTable(DishChoice),
}

pub struct TableCrpChain<'a> {
    corpus: &'a Corpus,
    distances: &'a Distances,
    uniform_within: bool,
    alpha_d: f64,
    alpha_0: f64,
    emission: Emission,
    scan: ScanOrder,
    mention_stats: Vec<ClusterStats>,
    customer_links: Vec<usize>,
    table_of: Vec<usize>,
    tables: Vec<Option<TableData>>,
    dishes: Vec<Option<Dish>>,
    free_dishes: Vec<usize>,
    num_tables: usize,
}

impl<'a> TableCrpChain<'a> {
    fn empty(corpus: &'a Corpus, distances: &'a Distances, cfg: &SamplerConfig) -> Result<Self> {
        let uniform_within = match cfg.model {
            ModelKind::HddcrpStar => false,
            ModelKind::HdpLex => true,
            m => return Err(Error::InvalidArgument(format!("{m} is not a table-CRP model"))),
        };
        let vocab = Vocabulary::from_corpus(corpus);
        let n = corpus.num_mentions();
        Ok(Self {
            corpus,
            distances,
            uniform_within,
            alpha_d: cfg.alpha_d,
            alpha_0: cfg.alpha_0,
            emission: Emission::new(corpus, cfg)?,
            scan: cfg.scan,
            mention_stats: (0..n).map(|g| ClusterStats::for_mention(&vocab, corpus.mention(g), g)).collect(),
            customer_links: (0..n).collect(),
            table_of: (0..n).collect(),
            tables: vec![None; n],
            dishes: Vec::new(),
            free_dishes: Vec::new(),
            num_tables: 0,
        })
    }

    /// Draws customer links uniformly from their supports, then seats the
    /// resulting tables by the top-level CRP prior.
    pub fn init(corpus: &'a Corpus, distances: &'a Distances, cfg: &SamplerConfig, rng: &mut ChainRng) -> Result<Self> {
        let mut chain = Self::empty(corpus, distances, cfg)?;
        for i in 0..corpus.num_mentions() {
            chain.customer_links[i] = chain.customer_candidates(i).choose(rng).expect("self is always supported").0;
        }
        let mut dish_of = vec![0; corpus.num_mentions()];
        let mut sizes: Vec<f64> = Vec::new();
        for d in 0..corpus.num_documents() {
            for t in tables_from_customer_links(&chain.customer_links, corpus, d) {
                let total: f64 = sizes.iter().sum::<f64>() + chain.alpha_0;
                let mut u = rng.random::<f64>() * total;
                let k = sizes
                    .iter()
                    .position(|&s| {
                        let hit = u < s;
                        u -= s;
                        hit
                    })
                    .unwrap_or(sizes.len());
                if k == sizes.len() {
                    sizes.push(0.0);
                }
                sizes[k] += 1.0;
                dish_of[t.head] = k;
            }
        }
        chain.rebuild(&dish_of);
        Ok(chain)
    }

    /// Starts from explicit customer links and a top-level cluster label per
    /// table head (entries of non-heads are ignored).
    pub fn from_state(
        corpus: &'a Corpus,
        distances: &'a Distances,
        cfg: &SamplerConfig,
        customer_links: Vec<usize>,
        dish_of_head: &[usize],
    ) -> Result<Self> {
        let mut chain = Self::empty(corpus, distances, cfg)?;
        if customer_links.len() != corpus.num_mentions() || dish_of_head.len() != corpus.num_mentions() {
            return Err(Error::Validation("state does not match the corpus".into()));
        }
        for (i, &a) in customer_links.iter().enumerate() {
            if !chain.customer_candidates(i).iter().any(|&(j, _)| j == a) {
                return Err(Error::Validation(format!("customer link of {i} has zero prior")));
            }
        }
        chain.customer_links = customer_links;
        chain.rebuild(dish_of_head);
        Ok(chain)
    }

    fn customer_candidates(&self, i: usize) -> Vec<(usize, f64)> {
        let mut c = vec![(i, self.alpha_d)];
        if self.uniform_within {
            let range = self.corpus.doc_range(self.corpus.doc_of(i));
            c.extend((range.start..i).map(|j| (j, 1.0)));
        } else {
            c.extend_from_slice(self.distances.within(i));
        }
        c
    }

    fn rebuild(&mut self, dish_of_head: &[usize]) {
        let n = self.corpus.num_mentions();
        self.tables = vec![None; n];
        self.dishes.clear();
        self.free_dishes.clear();
        self.num_tables = 0;
        let mut slot_of_label = std::collections::BTreeMap::new();
        for d in 0..self.corpus.num_documents() {
            for t in tables_from_customer_links(&self.customer_links, self.corpus, d) {
                let mut stats = ClusterStats::default();
                for &m in &t.members {
                    stats.absorb(&self.mention_stats[m]);
                    self.table_of[m] = t.head;
                }
                let label = dish_of_head[t.head];
                let dish = match slot_of_label.get(&label) {
                    Some(&k) => k,
                    None => {
                        let k = self.new_dish();
                        slot_of_label.insert(label, k);
                        k
                    }
                };
                self.seat_table(t.head, stats, dish);
            }
        }
    }

    fn new_dish(&mut self) -> usize {
        let dish = Dish {
            stats: ClusterStats::default(),
            tables: 0,
            log_marginal: 0.0,
        };
        match self.free_dishes.pop() {
            Some(k) => {
                self.dishes[k] = Some(dish);
                k
            }
            None => {
                self.dishes.push(Some(dish));
                self.dishes.len() - 1
            }
        }
    }

    fn dish(&self, k: usize) -> &Dish {
        self.dishes[k].as_ref().expect("live dish")
    }

    fn dish_mut(&mut self, k: usize) -> &mut Dish {
        self.dishes[k].as_mut().expect("live dish")
    }

    fn live_dishes(&self) -> Vec<usize> {
        self.dishes.iter().enumerate().filter_map(|(k, d)| d.as_ref().map(|_| k)).collect()
    }

    fn add_to_dish(&mut self, k: usize, stats: &ClusterStats, tables: usize) {
        let emission = self.emission;
        let d = self.dish_mut(k);
        d.stats.absorb(stats);
        d.tables += tables;
        d.log_marginal = emission.log_marginal(&d.stats);
    }

    fn remove_from_dish(&mut self, k: usize, stats: &ClusterStats, tables: usize) {
        let emission = self.emission;
        let d = self.dish_mut(k);
        d.stats.remove(stats);
        d.tables -= tables;
        if d.tables == 0 {
            debug_assert!(d.stats.is_empty());
            self.dishes[k] = None;
            self.free_dishes.push(k);
        } else {
            d.log_marginal = emission.log_marginal(&d.stats);
        }
    }

    fn seat_table(&mut self, head: usize, stats: ClusterStats, dish: usize) {
        for &m in stats.members() {
            self.table_of[m] = head;
        }
        self.add_to_dish(dish, &stats, 1);
        self.tables[head] = Some(TableData { stats, dish });
        self.num_tables += 1;
    }

    fn resolve(&mut self, choice: DishChoice) -> usize {
        match choice {
            DishChoice::Existing(k) => k,
            DishChoice::New => self.new_dish(),
        }
    }

    /// Removes the subtree rooted at `i` from its table and returns its stats.
    fn detach_subtree(&mut self, i: usize) -> ClusterStats {
        let head = self.table_of[i];
        let table = self.tables[head].take().expect("live table");
        let dish = table.dish;
        if head == i {
            self.num_tables -= 1;
            self.remove_from_dish(dish, &table.stats, 1);
            return table.stats;
        }
        let members = table.stats.members();
        let local = |m: usize| members.binary_search(&m).expect("link target inside its table");
        let mut sets = DisjointSets::new(members.len());
        for (li, &m) in members.iter().enumerate() {
            let a = self.customer_links[m];
            if a != m && m != i {
                sets.union(li, local(a));
            }
        }
        let root = sets.find(local(i));
        let mut subtree = ClusterStats::default();
        let mut rest = ClusterStats::default();
        for (li, &m) in members.iter().enumerate() {
            if sets.find(li) == root {
                subtree.absorb(&self.mention_stats[m]);
            } else {
                rest.absorb(&self.mention_stats[m]);
            }
        }
        self.remove_from_dish(dish, &subtree, 0);
        self.tables[head] = Some(TableData { stats: rest, dish });
        subtree
    }

    fn dish_ratio(&self, stats: &ClusterStats, k: usize) -> f64 {
        self.emission.merge_ratio(stats, &self.dish(k).stats)
    }

    /// Options for seating a detached table of `stats`, with their log prior
    /// weights under the top-level CRP (up to a shared constant) plus the
    /// likelihood ratio.
    fn dish_options(&self, stats: &ClusterStats) -> Vec<(DishChoice, f64)> {
        let mut opts: Vec<(DishChoice, f64)> = self
            .live_dishes()
            .into_iter()
            .map(|k| (DishChoice::Existing(k), (self.dish(k).tables as f64).ln() + self.dish_ratio(stats, k)))
            .collect();
        opts.push((DishChoice::New, self.alpha_0.ln()));
        opts
    }

    fn customer_moves(&mut self, i: usize) -> (ClusterStats, Vec<Move>, Vec<f64>) {
        let subtree = self.detach_subtree(i);
        let mut moves = Vec::new();
        let mut logw = Vec::new();
        let cands = self.customer_candidates(i);
        let norm = (self.num_tables as f64 + self.alpha_0).ln();
        for &(j, w) in &cands {
            if j == i {
                for (choice, lw) in self.dish_options(&subtree) {
                    moves.push(Move::OwnTable(choice));
                    logw.push(w.ln() + lw - norm);
                }
            } else {
                let k = self.tables[self.table_of[j]].as_ref().expect("live table").dish;
                moves.push(Move::Link(j));
                logw.push(w.ln() + self.dish_ratio(&subtree, k));
            }
        }
        (subtree, moves, logw)
    }

    fn apply_customer(&mut self, i: usize, subtree: ClusterStats, mv: Move) {
        match mv {
            Move::Link(j) => {
                self.customer_links[i] = j;
                let head = self.table_of[j];
                for &m in subtree.members() {
                    self.table_of[m] = head;
                }
                let mut table = self.tables[head].take().expect("live table");
                table.stats.absorb(&subtree);
                self.add_to_dish(table.dish, &subtree, 0);
                self.tables[head] = Some(table);
            }
            Move::OwnTable(choice) => {
                self.customer_links[i] = i;
                let k = self.resolve(choice);
                self.seat_table(i, subtree, k);
            }
        }
    }

    /// Resamples `a_i`, drawing a top-level cluster when `i` opens a table.
    pub fn sample_customer_link(&mut self, i: usize, rng: &mut ChainRng) {
        let (subtree, moves, logw) = self.customer_moves(i);
        let mv = moves[sample_log_weights(&logw, rng)];
        self.apply_customer(i, subtree, mv);
    }

    /// Marginal conditional of `a_i`; leaves the state unchanged.
    pub fn customer_link_probabilities(&mut self, i: usize) -> Vec<(usize, f64)> {
        let current = self.customer_links[i];
        let current_dish = self.tables[self.table_of[i]].as_ref().expect("live table").dish;
        let (subtree, moves, logw) = self.customer_moves(i);
        let probs = normalize_log_weights(&logw);
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (mv, p) in moves.iter().zip(probs) {
            let target = match mv {
                Move::Link(j) => *j,
                Move::OwnTable(_) => i,
            };
            match out.iter_mut().find(|(t, _)| *t == target) {
                Some(e) => e.1 += p,
                None => out.push((target, p)),
            }
        }
        let restore = if current == i {
            Move::OwnTable(if self.dishes.get(current_dish).is_some_and(Option::is_some) {
                DishChoice::Existing(current_dish)
            } else {
                DishChoice::New
            })
        } else {
            Move::Link(current)
        };
        self.apply_customer(i, subtree, restore);
        out
    }

    fn detach_table(&mut self, head: usize) -> ClusterStats {
        let table = self.tables[head].take().expect("head owns a table");
        self.num_tables -= 1;
        self.remove_from_dish(table.dish, &table.stats, 1);
        table.stats
    }

    /// Probabilities of each top-level option for the table headed by
    /// `head`; leaves the state unchanged.
    pub fn table_assignment_probabilities(&mut self, head: usize) -> Vec<(DishChoice, f64)> {
        let current = self.tables[head].as_ref().expect("head owns a table").dish;
        let stats = self.detach_table(head);
        let opts = self.dish_options(&stats);
        let probs = normalize_log_weights(&opts.iter().map(|o| o.1).collect::<Vec<_>>());
        let k = if self.dishes.get(current).is_some_and(Option::is_some) {
            current
        } else {
            self.new_dish()
        };
        self.seat_table(head, stats, k);
        opts.into_iter().map(|o| o.0).zip(probs).collect()
    }

    /// Resamples the top-level cluster of the table headed by `head` and
    /// returns the chosen cluster slot.
    pub fn sample_table_assignment(&mut self, head: usize, rng: &mut ChainRng) -> usize {
        let stats = self.detach_table(head);
        let opts = self.dish_options(&stats);
        let pick = sample_log_weights(&opts.iter().map(|o| o.1).collect::<Vec<_>>(), rng);
        let k = self.resolve(opts[pick].0);
        self.seat_table(head, stats, k);
        k
    }

    pub fn num_tables(&self) -> usize {
        self.num_tables
    }

    /// Tables per live top-level cluster, by slot.
    pub fn cluster_sizes(&self) -> Vec<(usize, usize)> {
        self.live_dishes().into_iter().map(|k| (k, self.dish(k).tables)).collect()
    }

    pub fn customer_links(&self) -> &[usize] {
        &self.customer_links
    }

    fn scan_order(&self, rng: &mut ChainRng) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.customer_links.len()).collect();
        if self.scan == ScanOrder::Randomized {
            order.shuffle(rng);
        }
        order
    }

    fn log_prior(&self) -> f64 {
        let mut lp = 0.0;
        for i in 0..self.customer_links.len() {
            let cands = self.customer_candidates(i);
            let total: f64 = cands.iter().map(|c| c.1).sum();
            let w = cands.iter().find(|c| c.0 == self.customer_links[i]).expect("link inside support").1;
            lp += (w / total).ln();
        }
        let live = self.live_dishes();
        let t = self.num_tables as f64;
        lp += live.len() as f64 * self.alpha_0.ln() + libm::lgamma(self.alpha_0) - libm::lgamma(self.alpha_0 + t);
        lp += live.iter().map(|&k| libm::lgamma(self.dish(k).tables as f64)).sum::<f64>();
        lp
    }
}

impl Chain for TableCrpChain<'_> {
    fn sweep(&mut self, rng: &mut ChainRng) {
        for i in self.scan_order(rng) {
            self.sample_customer_link(i, rng);
        }
        for i in self.scan_order(rng) {
            if self.customer_links[i] == i {
                self.sample_table_assignment(i, rng);
            }
        }
    }

    fn labels(&self) -> Vec<usize> {
        self.table_of
            .iter()
            .map(|&h| self.tables[h].as_ref().expect("live table").dish)
            .collect()
    }

    fn joint_log_score(&self) -> f64 {
        self.log_prior() + self.dishes.iter().flatten().map(|d| d.log_marginal).sum::<f64>()
    }

    fn state(&self) -> SamplerState {
        SamplerState::TableClusters {
            customer_links: self.customer_links.clone(),
            table_cluster: self.tables.iter().map(|t| t.as_ref().map(|t| t.dish)).collect(),
        }
    }
}
