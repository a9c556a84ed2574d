//! Regenerates the bundled fixtures in `crates/core/data/`.
//!
//! ```text
//! cargo run -p hddcrp --example make_synthetic -- crates/core/data
//! ```
//!
//! `synthetic.jsonl` has three seminal events with two documents each. Every
//! topic contains two distinct events that share a head lemma; their mentions
//! differ in context, arguments and one span modifier.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use hddcrp::corpus::{write_corpus, GoldChains, Role};
use hddcrp::{Corpus, Document, Mention};

struct Spec {
    event: &'static str,
    head: &'static str,
    pos: &'static str,
    span: &'static [&'static str],
    context: &'static [&'static str],
    args: &'static [(Role, &'static [&'static str])],
}

const fn m(
    event: &'static str,
    head: &'static str,
    span: &'static [&'static str],
    context: &'static [&'static str],
    args: &'static [(Role, &'static [&'static str])],
) -> Spec {
    Spec {
        event,
        head,
        pos: "VB",
        span,
        context,
        args,
    }
}

const fn n(
    event: &'static str,
    head: &'static str,
    span: &'static [&'static str],
    context: &'static [&'static str],
    args: &'static [(Role, &'static [&'static str])],
) -> Spec {
    Spec {
        event,
        head,
        pos: "NN",
        span,
        context,
        args,
    }
}

use Role::{Location as L, Participant as P, Time as T};

/// A document id and its mentions.
type Doc = (&'static str, &'static [Spec]);
/// A seminal event id and its documents.
type Topic = (&'static str, &'static [Doc]);

const TOPIC_1: [Doc; 2] = [
    (
        "bombing_1",
        &[
            n("kabul_bomb", "bomb", &["car", "bomb"], &["market", "kabul", "explode", "crowd"], &[(L, &["kabul"]), (T, &["monday"])]),
            m("kabul_kill", "kill", &["kill"], &["blast", "twelve", "people", "market"], &[(P, &["twelve", "people"]), (L, &["kabul"])]),
            n("kabul_bomb", "bomb", &["bomb"], &["detonate", "market", "kabul", "crowd"], &[(L, &["market"]), (T, &["monday"])]),
            n("embassy_bomb", "bomb", &["embassy", "bomb"], &["embassy", "last", "year", "similar"], &[(L, &["embassy"]), (T, &["2009"])]),
            m("kabul_arrest", "arrest", &["arrest"], &["police", "suspect", "tuesday", "raid"], &[(P, &["police", "suspect"])]),
            n("kabul_bomb", "bomb", &["bomb"], &["monday", "market", "crowd", "attack"], &[(L, &["kabul"]), (T, &["monday"])]),
            n("embassy_bomb", "bomb", &["embassy", "bomb"], &["embassy", "2009", "wound", "guard"], &[(L, &["embassy"]), (T, &["2009"])]),
        ],
    ),
    (
        "bombing_2",
        &[
            n("kabul_bomb", "bomb", &["bomb"], &["market", "kabul", "crowd", "explode"], &[(L, &["kabul", "market"]), (T, &["monday"])]),
            n("embassy_bomb", "bomb", &["embassy", "bomb"], &["recall", "embassy", "2009", "attack"], &[(L, &["embassy"]), (T, &["2009"])]),
            m("kabul_arrest", "arrest", &["arrest"], &["police", "suspect", "raid", "home"], &[(P, &["police", "suspect"]), (T, &["tuesday"])]),
            m("kabul_kill", "kill", &["kill"], &["twelve", "people", "market", "blast"], &[(P, &["twelve", "people"])]),
            n("kabul_bomb", "bomb", &["bomb"], &["kabul", "market", "monday", "detonate"], &[(L, &["kabul"]), (T, &["monday"])]),
            n("kabul_blast", "blast", &["blast"], &["shake", "market", "kabul", "monday"], &[(L, &["kabul"])]),
            n("embassy_bomb", "bomb", &["embassy", "bomb"], &["embassy", "guard", "wound", "2009"], &[(L, &["embassy"])]),
        ],
    ),
];

const TOPIC_2: [Doc; 2] = [
    (
        "quake_1",
        &[
            n("chile_quake", "quake", &["quake"], &["chile", "magnitude", "coast", "saturday"], &[(L, &["chile"]), (T, &["saturday"])]),
            m("chile_evacuate", "evacuate", &["evacuate"], &["coast", "resident", "tsunami", "warning"], &[(P, &["resident"]), (L, &["coast"])]),
            n("haiti_quake", "quake", &["haiti", "quake"], &["haiti", "january", "devastate", "capital"], &[(L, &["haiti"]), (T, &["january"])]),
            n("chile_quake", "quake", &["quake"], &["saturday", "chile", "magnitude", "strike"], &[(L, &["chile"])]),
            m("chile_die", "die", &["die"], &["hundred", "people", "collapse", "chile"], &[(P, &["hundred", "people"]), (L, &["chile"])]),
            n("haiti_quake", "quake", &["haiti", "quake"], &["haiti", "capital", "january", "compare"], &[(L, &["haiti"])]),
            n("chile_quake", "quake", &["quake"], &["coast", "chile", "saturday", "magnitude"], &[(T, &["saturday"])]),
        ],
    ),
    (
        "quake_2",
        &[
            n("chile_quake", "quake", &["quake"], &["strike", "chile", "saturday", "coast"], &[(L, &["chile"]), (T, &["saturday"])]),
            n("haiti_quake", "quake", &["haiti", "quake"], &["january", "haiti", "devastate", "recall"], &[(L, &["haiti"]), (T, &["january"])]),
            m("chile_die", "die", &["die"], &["people", "hundred", "chile", "collapse"], &[(P, &["hundred", "people"])]),
            m("chile_evacuate", "evacuate", &["evacuate"], &["resident", "coast", "tsunami", "order"], &[(P, &["resident"])]),
            n("chile_quake", "quake", &["quake"], &["magnitude", "chile", "coast", "saturday"], &[(L, &["chile"])]),
            n("chile_tremor", "tremor", &["tremor"], &["chile", "coast", "saturday", "feel"], &[(L, &["chile"])]),
            n("haiti_quake", "quake", &["haiti", "quake"], &["haiti", "january", "capital", "devastate"], &[(L, &["haiti"])]),
        ],
    ),
];

const TOPIC_3: [Doc; 2] = [
    (
        "merger_1",
        &[
            m("acme_buy", "buy", &["buy"], &["acme", "widgetco", "billion", "deal"], &[(P, &["acme", "widgetco"]), (T, &["friday"])]),
            m("acme_announce", "announce", &["announce"], &["acme", "statement", "friday", "deal"], &[(P, &["acme"]), (T, &["friday"])]),
            m("gizmo_buy", "buy", &["buy", "gizmo"], &["acme", "gizmo", "2005", "previous"], &[(P, &["acme", "gizmo"]), (T, &["2005"])]),
            m("acme_buy", "buy", &["buy"], &["widgetco", "billion", "acme", "friday"], &[(P, &["widgetco"])]),
            m("ceo_fire", "fire", &["fire"], &["board", "ceo", "after", "deal"], &[(P, &["board", "ceo"])]),
            m("gizmo_buy", "buy", &["buy", "gizmo"], &["gizmo", "2005", "acme", "purchase"], &[(P, &["gizmo"]), (T, &["2005"])]),
        ],
    ),
    (
        "merger_2",
        &[
            m("acme_buy", "buy", &["buy"], &["acme", "widgetco", "deal", "billion"], &[(P, &["acme", "widgetco"])]),
            m("gizmo_buy", "buy", &["buy", "gizmo"], &["gizmo", "2005", "acme", "earlier"], &[(P, &["gizmo"]), (T, &["2005"])]),
            m("acme_announce", "announce", &["announce"], &["statement", "acme", "deal", "friday"], &[(P, &["acme"])]),
            m("ceo_fire", "fire", &["fire"], &["ceo", "board", "deal", "week"], &[(P, &["ceo"])]),
            m("acme_acquire", "acquire", &["acquire"], &["widgetco", "acme", "billion", "friday"], &[(P, &["widgetco"])]),
            m("acme_announce", "announce", &["announce"], &["acme", "friday", "statement", "confirm"], &[(P, &["acme"])]),
        ],
    ),
];

fn build(topics: &[Topic]) -> Corpus {
    let mut docs = Vec::new();
    let mut chains: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (topic, topic_docs) in topics {
        for (doc_id, specs) in *topic_docs {
            let mentions = specs
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let id = format!("{doc_id}_m{}", i + 1);
                    chains.entry(s.event).or_default().push(id.clone());
                    let mut arguments: BTreeMap<Role, Vec<Vec<String>>> = BTreeMap::new();
                    for (role, words) in s.args {
                        arguments.entry(*role).or_default().push(words.iter().map(|w| w.to_string()).collect());
                    }
                    Mention {
                        mention_id: id,
                        doc_id: String::new(),
                        order_index: i,
                        head_lemma: s.head.into(),
                        head_pos: s.pos.into(),
                        span_lemmas: s.span.iter().map(|w| w.to_string()).collect(),
                        context_lemmas: s.context.iter().map(|w| w.to_string()).collect(),
                        arguments,
                    }
                })
                .collect();
            docs.push(Document::new(*doc_id, Some(topic.to_string()), mentions));
        }
    }
    let gold = GoldChains {
        chains: chains.into_values().collect(),
    };
    Corpus::new(docs, Some(gold)).expect("fixture is valid")
}

fn tiny() -> Corpus {
    let mention = |id: &str, head: &str, context: &[&str]| Mention {
        mention_id: id.into(),
        doc_id: String::new(),
        order_index: 0,
        head_lemma: head.into(),
        head_pos: "NN".into(),
        span_lemmas: vec![head.into()],
        context_lemmas: context.iter().map(|w| w.to_string()).collect(),
        arguments: BTreeMap::new(),
    };
    let doc = |id: &str, ms: Vec<Mention>| {
        let ms = ms
            .into_iter()
            .enumerate()
            .map(|(i, mut m)| {
                m.order_index = i;
                m
            })
            .collect();
        Document::new(id, Some("t".into()), ms)
    };
    let docs = vec![
        doc(
            "a",
            vec![
                mention("a1", "bomb", &["market"]),
                mention("a2", "bomb", &["market"]),
                mention("a3", "arrest", &["police"]),
            ],
        ),
        doc(
            "b",
            vec![
                mention("b1", "blast", &["market"]),
                mention("b2", "arrest", &["police"]),
                mention("b3", "kill", &["victim"]),
            ],
        ),
    ];
    let gold = GoldChains {
        chains: vec![
            vec!["a1".into(), "a2".into(), "b1".into()],
            vec!["a3".into(), "b2".into()],
        ],
    };
    Corpus::new(docs, Some(gold)).expect("fixture is valid")
}

const EMBEDDINGS: &[(&str, [f64; 4])] = &[
    ("bomb", [0.9, 0.3, 0.1, 0.0]),
    ("blast", [0.8, 0.5, 0.1, 0.1]),
    ("kill", [0.1, 0.9, 0.3, 0.0]),
    ("die", [0.2, 0.9, 0.2, 0.1]),
    ("arrest", [0.1, 0.2, 0.9, 0.1]),
    ("quake", [0.6, 0.1, 0.0, 0.7]),
    ("tremor", [0.5, 0.2, 0.0, 0.8]),
    ("evacuate", [0.1, 0.3, 0.5, 0.6]),
    ("buy", [0.0, 0.1, 0.3, 0.2]),
    ("acquire", [0.1, 0.1, 0.3, 0.2]),
    ("announce", [0.0, 0.0, 0.2, 0.9]),
    ("fire", [0.3, 0.3, 0.6, 0.1]),
];

const SYNONYMS: &[(&str, &[&str])] = &[
    ("bomb", &["blast", "explosive"]),
    ("blast", &["bomb", "explosion"]),
    ("kill", &["slay"]),
    ("die", &["perish"]),
    ("quake", &["tremor", "earthquake"]),
    ("tremor", &["quake", "earthquake"]),
    ("buy", &["acquire", "purchase"]),
    ("acquire", &["buy", "purchase"]),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/data".into()));
    std::fs::create_dir_all(&dir)?;
    let topics: [Topic; 3] = [("bombing", &TOPIC_1), ("quake", &TOPIC_2), ("merger", &TOPIC_3)];
    write_corpus(&build(&topics), BufWriter::new(File::create(dir.join("synthetic.jsonl"))?))?;
    write_corpus(&tiny(), BufWriter::new(File::create(dir.join("tiny.jsonl"))?))?;
    let mut out = BufWriter::new(File::create(dir.join("synthetic.vectors"))?);
    for (w, v) in EMBEDDINGS {
        writeln!(out, "{w} {} {} {} {}", v[0], v[1], v[2], v[3])?;
    }
    let mut out = BufWriter::new(File::create(dir.join("synthetic.synonyms"))?);
    for (w, syns) in SYNONYMS {
        writeln!(out, "{w}\t{}", syns.join(","))?;
    }
    Ok(())
}
