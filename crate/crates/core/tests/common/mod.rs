#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use hddcrp::corpus::{load_corpus, GoldChains};
use hddcrp::sampler::{build_chain, chain_rng, SamplerConfig};
use hddcrp::{ClusterAssignment, Corpus, Distances, Document, Mention};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn tiny() -> Corpus {
    load_corpus(data("tiny.jsonl")).unwrap()
}

pub fn mention(id: &str, words: &[&str]) -> Mention {
    Mention {
        mention_id: id.into(),
        doc_id: String::new(),
        order_index: 0,
        head_lemma: words[0].into(),
        head_pos: "NN".into(),
        span_lemmas: words.iter().map(|w| w.to_string()).collect(),
        context_lemmas: vec![],
        arguments: BTreeMap::new(),
    }
}

/// One document per entry; each mention is given by its span words.
pub fn corpus_of(docs: &[&[&[&str]]], gold: Option<Vec<Vec<&str>>>) -> Corpus {
    let docs = docs
        .iter()
        .enumerate()
        .map(|(d, ms)| {
            let mentions = ms
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let mut m = mention(&format!("d{d}m{i}"), w);
                    m.order_index = i;
                    m
                })
                .collect();
            Document::new(format!("d{d}"), Some("e".into()), mentions)
        })
        .collect();
    let gold = gold.map(|g| GoldChains {
        chains: g.into_iter().map(|c| c.into_iter().map(String::from).collect()).collect(),
    });
    Corpus::new(docs, gold).unwrap()
}

/// Empirical distribution of the clustering over `sweeps` recorded sweeps.
pub fn empirical(
    corpus: &Corpus,
    distances: &Distances,
    cfg: &SamplerConfig,
    burn_in: usize,
    sweeps: usize,
) -> BTreeMap<ClusterAssignment, f64> {
    let mut rng = chain_rng(cfg.seed, 0);
    let mut chain = build_chain(corpus, distances, cfg, &mut rng).unwrap();
    for _ in 0..burn_in {
        chain.sweep(&mut rng);
    }
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..sweeps {
        chain.sweep(&mut rng);
        *counts.entry(chain.labels()).or_insert(0) += 1;
    }
    let mut out = BTreeMap::new();
    for (labels, c) in counts {
        *out.entry(ClusterAssignment::from_labels(corpus, &labels)).or_insert(0.0) += c as f64 / sweeps as f64;
    }
    out
}

pub fn total_variation(a: &BTreeMap<ClusterAssignment, f64>, b: &BTreeMap<ClusterAssignment, f64>) -> f64 {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}
