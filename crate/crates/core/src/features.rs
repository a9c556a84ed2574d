//! Mention-pair feature vectors.
//!
//! Layout, in index order:
//!
//! | name | kind |
//! |------|------|
//! | `head_match` | indicator |
//! | `pos_pair=A|B` for each training POS pair, then `pos_pair=<other>` | one-hot |
//! | `head_embedding_cosine` | similarity |
//! | `span_tf_cosine` | similarity |
//! | `synonym_jaccard` | similarity |
//! | `context_tf_cosine` | similarity |
//! | `<role>_tf_cosine`, `<role>_both_present` for each argument role | similarity, indicator |
//! | `bias` | constant 1 |
//!
//! Every component lies in `[0, 1]` and every component is symmetric in the
//! two mentions.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Mention, Role, TermCounts};
use crate::error::{Error, Result};
use crate::lexical::LexicalResources;

const POS_PREFIX: &str = "pos_pair=";
const POS_OTHER: &str = "<other>";
const TRAILING: [&str; 4] = [
    "head_embedding_cosine",
    "span_tf_cosine",
    "synonym_jaccard",
    "context_tf_cosine",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.0.iter().zip(theta).map(|(x, w)| x * w).sum()
    }
}

impl From<Vec<f64>> for FeatureVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

fn pos_key(a: &str, b: &str) -> String {
    if a <= b {
        format!("{a}|{b}")
    } else {
        format!("{b}|{a}")
    }
}

/// The frozen feature configuration: the POS-pair vocabulary seen in training.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureSpace {
    pos_pairs: Vec<String>,
}

impl FeatureSpace {
    /// Collects the unordered POS pairs of the given mention pairs.
    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a Mention, &'a Mention)>,
    {
        let set: BTreeSet<String> = pairs
            .into_iter()
            .map(|(a, b)| pos_key(&a.head_pos, &b.head_pos))
            .collect();
        Self {
            pos_pairs: set.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        1 + self.pos_pairs.len() + 1 + TRAILING.len() + 2 * Role::ALL.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Feature names in index order.
    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        names.push("head_match".to_owned());
        names.extend(self.pos_pairs.iter().map(|p| format!("{POS_PREFIX}{p}")));
        names.push(format!("{POS_PREFIX}{POS_OTHER}"));
        names.extend(TRAILING.iter().map(|s| (*s).to_owned()));
        for role in Role::ALL {
            names.push(format!("{role}_tf_cosine"));
            names.push(format!("{role}_both_present"));
        }
        names.push("bias".to_owned());
        names
    }

    pub fn index_map(&self) -> BTreeMap<String, usize> {
        self.names().into_iter().enumerate().map(|(i, n)| (n, i)).collect()
    }

    /// Rebuilds a space from an exported index map, checking that it is one
    /// this module could have produced.
    pub fn from_index_map(map: &BTreeMap<String, usize>) -> Result<Self> {
        let mut by_index: Vec<(&usize, &String)> = map.iter().map(|(n, i)| (i, n)).collect();
        by_index.sort();
        let pos_pairs: Vec<String> = by_index
            .iter()
            .filter_map(|(_, n)| n.strip_prefix(POS_PREFIX))
            .filter(|p| *p != POS_OTHER)
            .map(str::to_owned)
            .collect();
        let space = Self { pos_pairs };
        if space.index_map() != *map {
            return Err(Error::Validation("feature index map does not match the known layout".into()));
        }
        Ok(space)
    }

    fn pos_index(&self, a: &str, b: &str) -> usize {
        let key = pos_key(a, b);
        1 + self
            .pos_pairs
            .binary_search(&key)
            .unwrap_or(self.pos_pairs.len())
    }

    pub fn extract(&self, a: &Mention, b: &Mention, r: &LexicalResources) -> FeatureVector {
        let mut v = vec![0.0; self.len()];
        v[0] = f64::from(u8::from(a.head_lemma == b.head_lemma));
        v[self.pos_index(&a.head_pos, &b.head_pos)] = 1.0;
        let mut k = 2 + self.pos_pairs.len();
        v[k] = r.embedding_cosine(&a.head_lemma, &b.head_lemma);
        v[k + 1] = TermCounts::from_tokens(&a.span_lemmas).cosine(&TermCounts::from_tokens(&b.span_lemmas));
        v[k + 2] = r.synonym_jaccard(&a.head_lemma, &b.head_lemma);
        v[k + 3] =
            TermCounts::from_tokens(&a.context_lemmas).cosine(&TermCounts::from_tokens(&b.context_lemmas));
        k += TRAILING.len();
        for role in Role::ALL {
            if a.has_role(role) && b.has_role(role) {
                v[k] = TermCounts::from_tokens(a.role_lemmas(role))
                    .cosine(&TermCounts::from_tokens(b.role_lemmas(role)));
                v[k + 1] = 1.0;
            }
            k += 2;
        }
        v[k] = 1.0;
        FeatureVector(v)
    }
}

/// Feature vector of a mention pair under `space`.
pub fn extract_pair_features(
    space: &FeatureSpace,
    a: &Mention,
    b: &Mention,
    r: &LexicalResources,
) -> FeatureVector {
    space.extract(a, b, r)
}
