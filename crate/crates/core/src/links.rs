//! Customer and table links, and the clusterings they induce.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Path-halving, union-by-size disjoint sets.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Component label per element, numbered by first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|x| {
                let r = self.find(x);
                if map[r] == usize::MAX {
                    map[r] = next;
                    next += 1;
                }
                map[r]
            })
            .collect()
    }
}

/// Latent link variables over global mention indices.
///
/// `customer_links[i]` is `i` itself or an earlier mention of the same
/// document; `table_links[i]` is `i` itself or a mention of another document.
/// A table link only affects the clustering when its customer link is a
/// self-link.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinkState {
    pub customer_links: Vec<usize>,
    pub table_links: Vec<usize>,
}

impl LinkState {
    pub fn all_self(n: usize) -> Self {
        Self {
            customer_links: (0..n).collect(),
            table_links: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.customer_links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.customer_links.is_empty()
    }

    pub fn is_head(&self, i: usize) -> bool {
        self.customer_links[i] == i
    }

    /// A table link is active iff its customer starts a table.
    pub fn is_active_table_link(&self, i: usize) -> bool {
        self.is_head(i) && self.table_links[i] != i
    }

    /// Checks sequentiality and the cross-document table-link constraint.
    pub fn validate(&self, corpus: &Corpus) -> Result<()> {
        let n = corpus.num_mentions();
        if self.customer_links.len() != n || self.table_links.len() != n {
            return Err(Error::Validation(format!("link state covers {} mentions, corpus has {n}", self.len())));
        }
        for i in 0..n {
            let a = self.customer_links[i];
            if a > i || corpus.doc_of(a) != corpus.doc_of(i) {
                return Err(Error::Validation(format!("customer link {i} -> {a} is not to an earlier mention of the same document")));
            }
            let c = self.table_links[i];
            if c >= n || (c != i && corpus.doc_of(c) == corpus.doc_of(i)) {
                return Err(Error::Validation(format!("table link {i} -> {c} stays inside its document")));
            }
        }
        Ok(())
    }
}

/// A within-document cluster: its head (the self-linked customer) and members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub head: usize,
    pub members: Vec<usize>,
}

/// Tables of document `d`: connected components of its customer links.
pub fn tables_from_customer_links(customer_links: &[usize], corpus: &Corpus, d: usize) -> Vec<Table> {
    let range = corpus.doc_range(d);
    let base = range.start;
    let mut sets = DisjointSets::new(range.len());
    for i in range.clone() {
        let a = customer_links[i];
        if a != i {
            sets.union(i - base, a - base);
        }
    }
    let labels = sets.labels();
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut tables: Vec<Table> = (0..count)
        .map(|_| Table {
            head: usize::MAX,
            members: Vec::new(),
        })
        .collect();
    for i in range {
        let t = &mut tables[labels[i - base]];
        t.members.push(i);
        // Sequential links make the earliest member the only self-link.
        if customer_links[i] == i && t.head == usize::MAX {
            t.head = i;
        }
    }
    tables
}

/// Connected components over customer links and active table links, as raw
/// labels indexed by global mention index.
pub fn component_labels(state: &LinkState) -> Vec<usize> {
    let n = state.len();
    let mut sets = DisjointSets::new(n);
    for i in 0..n {
        let a = state.customer_links[i];
        if a != i {
            sets.union(i, a);
        } else if state.table_links[i] != i {
            sets.union(i, state.table_links[i]);
        }
    }
    sets.labels()
}

/// Renumbers raw labels so cluster indices follow the first member in
/// canonical `(doc_id, order_index)` order. Returns labels indexed by global
/// mention index.
pub fn canonical_labels(corpus: &Corpus, raw: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = vec![0; raw.len()];
    for &g in corpus.canonical_order() {
        let next = map.len();
        out[g] = *map.entry(raw[g]).or_insert(next);
    }
    out
}

/// A partition of mentions, keyed by mention id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterAssignment(BTreeMap<String, usize>);

impl ClusterAssignment {
    /// Canonical assignment from raw labels over global mention indices.
    pub fn from_labels(corpus: &Corpus, raw: &[usize]) -> Self {
        let labels = canonical_labels(corpus, raw);
        Self(
            labels
                .iter()
                .enumerate()
                .map(|(g, &l)| (corpus.mention(g).mention_id.clone(), l))
                .collect(),
        )
    }

    /// Wraps an arbitrary id → label map without renumbering.
    pub fn from_map(map: BTreeMap<String, usize>) -> Self {
        Self(map)
    }

    pub fn singletons(corpus: &Corpus) -> Self {
        Self::from_labels(corpus, &(0..corpus.num_mentions()).collect::<Vec<_>>())
    }

    pub fn gold(corpus: &Corpus) -> Result<Self> {
        Ok(Self::from_labels(corpus, &corpus.gold_labels()?))
    }

    pub fn get(&self, mention_id: &str) -> Option<usize> {
        self.0.get(mention_id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn num_clusters(&self) -> usize {
        let mut labels: Vec<usize> = self.0.values().copied().collect();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    /// Members of each cluster, ordered by label.
    pub fn clusters(&self) -> Vec<Vec<&str>> {
        let mut groups: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        for (id, &l) in &self.0 {
            groups.entry(l).or_default().push(id);
        }
        groups.into_values().collect()
    }

    /// Labels per global mention index of `corpus`.
    pub fn labels_for(&self, corpus: &Corpus) -> Result<Vec<usize>> {
        if self.0.len() != corpus.num_mentions() {
            return Err(Error::UniverseMismatch(format!(
                "clustering covers {} mentions, corpus has {}",
                self.0.len(),
                corpus.num_mentions()
            )));
        }
        corpus
            .mentions()
            .map(|m| {
                self.get(&m.mention_id)
                    .ok_or_else(|| Error::UniverseMismatch(format!("mention `{}` missing from clustering", m.mention_id)))
            })
            .collect()
    }

    /// Restriction to the given mention ids.
    pub fn restrict<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        ids.into_iter()
            .map(|id| {
                self.get(id)
                    .map(|l| (id.to_owned(), l))
                    .ok_or_else(|| Error::UniverseMismatch(format!("mention `{id}` missing from clustering")))
            })
            .collect::<Result<BTreeMap<_, _>>>()
            .map(Self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Global clustering induced by a link state.
pub fn clusters_from_links(state: &LinkState, corpus: &Corpus) -> ClusterAssignment {
    ClusterAssignment::from_labels(corpus, &component_labels(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Mention};

    fn corpus(sizes: &[usize]) -> Corpus {
        let docs = sizes
            .iter()
            .enumerate()
            .map(|(d, &n)| {
                let mentions = (0..n)
                    .map(|i| Mention {
                        mention_id: format!("d{}m{}", d + 1, i + 1),
                        doc_id: String::new(),
                        order_index: i,
                        head_lemma: "x".into(),
                        head_pos: "NN".into(),
                        span_lemmas: vec!["x".into()],
                        context_lemmas: vec![],
                        arguments: Default::default(),
                    })
                    .collect();
                Document::new(format!("d{}", d + 1), Some("e".into()), mentions)
            })
            .collect();
        Corpus::new(docs, None).unwrap()
    }

    #[test]
    fn self_links_give_singleton_tables() {
        let c = corpus(&[3]);
        let tables = tables_from_customer_links(&[0, 1, 2], &c, 0);
        assert_eq!(tables.len(), 3);
        assert!(tables.iter().all(|t| t.members == [t.head]));
    }

    #[test]
    fn chain_forms_one_table() {
        let c = corpus(&[3]);
        let tables = tables_from_customer_links(&[0, 0, 1], &c, 0);
        assert_eq!(tables, vec![Table { head: 0, members: vec![0, 1, 2] }]);
    }

    #[test]
    fn active_table_link_joins_documents() {
        let c = corpus(&[2, 1]);
        let s = LinkState {
            customer_links: vec![0, 0, 2],
            table_links: vec![2, 1, 2],
        };
        s.validate(&c).unwrap();
        let z = clusters_from_links(&s, &c);
        assert_eq!(z.num_clusters(), 1);
    }

    #[test]
    fn inactive_table_link_is_ignored() {
        let c = corpus(&[2, 1]);
        let s = LinkState {
            customer_links: vec![0, 0, 2],
            table_links: vec![0, 2, 2],
        };
        let z = clusters_from_links(&s, &c);
        assert_eq!(z, ClusterAssignment::from_labels(&c, &[0, 0, 1]));
    }

    #[test]
    fn validate_rejects_bad_links() {
        let c = corpus(&[2, 1]);
        let forward = LinkState {
            customer_links: vec![1, 1, 2],
            table_links: vec![0, 1, 2],
        };
        assert!(forward.validate(&c).is_err());
        let same_doc = LinkState {
            customer_links: vec![0, 1, 2],
            table_links: vec![1, 1, 2],
        };
        assert!(same_doc.validate(&c).is_err());
    }

    #[test]
    fn canonical_numbering_by_smallest_member() {
        let c = corpus(&[2, 2]);
        let z = ClusterAssignment::from_labels(&c, &[7, 3, 3, 7]);
        assert_eq!(z.get("d1m1"), Some(0));
        assert_eq!(z.get("d1m2"), Some(1));
        assert_eq!(z.get("d2m2"), Some(0));
    }
}
