//! Documents, event mentions, gold chains and their JSON-lines file format.
//!
//! A corpus file holds one document object per line. Gold chains are carried
//! either by a footer line of the form `{"gold_chains": [[id, ...], ...]}` or
//! by a sidecar file with the same object.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Argument roles attached to an event mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Participant,
    Time,
    Location,
    SrlArg0,
    SrlArg1,
    SrlArg2,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::Participant,
        Role::Time,
        Role::Location,
        Role::SrlArg0,
        Role::SrlArg1,
        Role::SrlArg2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Participant => "participant",
            Role::Time => "time",
            Role::Location => "location",
            Role::SrlArg0 => "srl_arg0",
            Role::SrlArg1 => "srl_arg1",
            Role::SrlArg2 => "srl_arg2",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown argument role `{s}`")))
    }
}

/// Sparse term-frequency vector.
///
/// Backed by an ordered map so that every floating point reduction over it
/// runs in a fixed order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermCounts(BTreeMap<String, u32>);

impl TermCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tokens<'a, I>(tokens: I) -> Self
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut tf = Self::new();
        tf.extend(tokens);
        tf
    }

    pub fn add(&mut self, token: &str) {
        *self.0.entry(token.to_owned()).or_insert(0) += 1;
    }

    pub fn extend<'a, I>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = &'a String>,
    {
        for t in tokens {
            self.add(t);
        }
    }

    pub fn get(&self, token: &str) -> u32 {
        self.0.get(token).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.values().map(|&c| u64::from(c)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    fn norm(&self) -> f64 {
        self.0
            .values()
            .map(|&c| f64::from(c) * f64::from(c))
            .sum::<f64>()
            .sqrt()
    }

    /// Cosine of two raw-count vectors; 0 when either is empty.
    pub fn cosine(&self, other: &TermCounts) -> f64 {
        if self.is_empty() || other.is_empty() {
            return 0.0;
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small
            .0
            .iter()
            .map(|(k, &c)| f64::from(c) * f64::from(large.get(k)))
            .sum();
        if dot == 0.0 {
            return 0.0;
        }
        (dot / (self.norm() * other.norm())).clamp(0.0, 1.0)
    }
}

/// One event mention.
#[derive(Debug, Clone, PartialEq)]
pub struct Mention {
    pub mention_id: String,
    pub doc_id: String,
    pub order_index: usize,
    pub head_lemma: String,
    pub head_pos: String,
    pub span_lemmas: Vec<String>,
    pub context_lemmas: Vec<String>,
    pub arguments: BTreeMap<Role, Vec<Vec<String>>>,
}

impl Mention {
    /// Lemmas of every argument span filling `role`, flattened.
    pub fn role_lemmas(&self, role: Role) -> impl Iterator<Item = &String> {
        self.arguments
            .get(&role)
            .into_iter()
            .flat_map(|spans| spans.iter().flatten())
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.role_lemmas(role).next().is_some()
    }
}

/// A document: its event mentions in appearance order plus the TF vector over
/// every event-related span.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub seminal_event_id: Option<String>,
    mentions: Vec<Mention>,
    tf_vector: TermCounts,
}

impl Document {
    /// Builds a document, sorting mentions by `order_index` and computing the
    /// TF vector.
    pub fn new(doc_id: impl Into<String>, seminal_event_id: Option<String>, mut mentions: Vec<Mention>) -> Self {
        let doc_id = doc_id.into();
        mentions.sort_by_key(|m| m.order_index);
        for m in &mut mentions {
            m.doc_id.clone_from(&doc_id);
        }
        let mut tf_vector = TermCounts::new();
        for m in &mentions {
            tf_vector.extend(&m.span_lemmas);
            for spans in m.arguments.values() {
                tf_vector.extend(spans.iter().flatten());
            }
        }
        Self {
            doc_id,
            seminal_event_id,
            mentions,
            tf_vector,
        }
    }

    pub fn mentions(&self) -> &[Mention] {
        &self.mentions
    }

    pub fn tf_vector(&self) -> &TermCounts {
        &self.tf_vector
    }
}

/// Gold coreference chains, each a set of mention ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldChains {
    #[serde(rename = "gold_chains")]
    pub chains: Vec<Vec<String>>,
}

/// Cosine similarity of two documents' TF vectors.
pub fn doc_similarity(d: &Document, d2: &Document) -> f64 {
    d.tf_vector.cosine(&d2.tf_vector)
}

/// A validated, indexed collection of documents.
///
/// Mentions are addressed by a global index: documents in corpus order, then
/// mentions in `order_index` order.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    gold: Option<GoldChains>,
    offsets: Vec<usize>,
    doc_of: Vec<usize>,
    by_id: HashMap<String, usize>,
    canonical: Vec<usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.documents == other.documents && self.gold == other.gold
    }
}

impl Corpus {
    pub fn new(documents: Vec<Document>, gold: Option<GoldChains>) -> Result<Self> {
        let mut seen_docs = BTreeSet::new();
        let mut by_id = HashMap::new();
        let mut offsets = Vec::with_capacity(documents.len() + 1);
        let mut doc_of = Vec::new();
        offsets.push(0);
        for (d, doc) in documents.iter().enumerate() {
            if !seen_docs.insert(doc.doc_id.as_str()) {
                return Err(Error::Validation(format!("duplicate doc_id `{}`", doc.doc_id)));
            }
            for (pos, m) in doc.mentions.iter().enumerate() {
                if m.order_index != pos {
                    return Err(Error::Validation(format!(
                        "document `{}`: order_index values must be 0..{} without gaps (mention `{}` has {})",
                        doc.doc_id,
                        doc.mentions.len(),
                        m.mention_id,
                        m.order_index
                    )));
                }
                if m.span_lemmas.is_empty() {
                    return Err(Error::Validation(format!("mention `{}` has an empty span", m.mention_id)));
                }
                if !m.span_lemmas.contains(&m.head_lemma) {
                    return Err(Error::Validation(format!(
                        "mention `{}`: head lemma `{}` not in span",
                        m.mention_id, m.head_lemma
                    )));
                }
                if by_id.insert(m.mention_id.clone(), doc_of.len()).is_some() {
                    return Err(Error::Validation(format!("duplicate mention_id `{}`", m.mention_id)));
                }
                doc_of.push(d);
            }
            offsets.push(doc_of.len());
        }
        if let Some(gold) = &gold {
            let mut claimed = BTreeSet::new();
            for chain in &gold.chains {
                for id in chain {
                    if !by_id.contains_key(id) {
                        return Err(Error::Validation(format!("gold chain references unknown mention `{id}`")));
                    }
                    if !claimed.insert(id.as_str()) {
                        return Err(Error::Validation(format!("mention `{id}` appears in more than one gold chain")));
                    }
                }
            }
        }
        let mut canonical: Vec<usize> = (0..doc_of.len()).collect();
        canonical.sort_by(|&a, &b| {
            let (da, db) = (&documents[doc_of[a]].doc_id, &documents[doc_of[b]].doc_id);
            da.cmp(db).then(a.cmp(&b))
        });
        Ok(Self {
            documents,
            gold,
            offsets,
            doc_of,
            by_id,
            canonical,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn gold(&self) -> Option<&GoldChains> {
        self.gold.as_ref()
    }

    pub fn with_gold(self, gold: GoldChains) -> Result<Self> {
        Corpus::new(self.documents, Some(gold))
    }

    pub fn num_mentions(&self) -> usize {
        self.doc_of.len()
    }

    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn mention(&self, g: usize) -> &Mention {
        let d = self.doc_of[g];
        &self.documents[d].mentions[g - self.offsets[d]]
    }

    pub fn mentions(&self) -> impl Iterator<Item = &Mention> {
        self.documents.iter().flat_map(|d| d.mentions.iter())
    }

    /// Document index of the mention at global index `g`.
    pub fn doc_of(&self, g: usize) -> usize {
        self.doc_of[g]
    }

    /// Global indices of the mentions of document `d`.
    pub fn doc_range(&self, d: usize) -> Range<usize> {
        self.offsets[d]..self.offsets[d + 1]
    }

    pub fn index_of(&self, mention_id: &str) -> Option<usize> {
        self.by_id.get(mention_id).copied()
    }

    /// Global indices sorted by `(doc_id, order_index)`.
    pub fn canonical_order(&self) -> &[usize] {
        &self.canonical
    }

    /// Gold cluster label per global mention index; mentions outside every
    /// chain are singletons.
    pub fn gold_labels(&self) -> Result<Vec<usize>> {
        let gold = self.gold.as_ref().ok_or(Error::MissingGold)?;
        let mut labels = vec![usize::MAX; self.num_mentions()];
        for (k, chain) in gold.chains.iter().enumerate() {
            for id in chain {
                labels[self.by_id[id]] = k;
            }
        }
        let mut next = gold.chains.len();
        for l in &mut labels {
            if *l == usize::MAX {
                *l = next;
                next += 1;
            }
        }
        Ok(labels)
    }
}

#[derive(Serialize, Deserialize)]
struct MentionRecord {
    mention_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order_index: Option<usize>,
    head_lemma: String,
    head_pos: String,
    span_lemmas: Vec<String>,
    #[serde(default)]
    context_lemmas: Vec<String>,
    #[serde(default)]
    arguments: BTreeMap<Role, Vec<Vec<String>>>,
}

#[derive(Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seminal_event_id: Option<String>,
    mentions: Vec<MentionRecord>,
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

/// Parses a corpus from JSON-lines text. `path` is used only in messages.
pub fn parse_corpus(reader: impl BufRead, path: &Path) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut gold = None;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| parse_error(path, lineno, e.to_string()))?;
        if value.get("gold_chains").is_some() && value.get("doc_id").is_none() {
            if gold.is_some() {
                return Err(parse_error(path, lineno, "second gold_chains footer"));
            }
            gold = Some(serde_json::from_value::<GoldChains>(value).map_err(|e| parse_error(path, lineno, e.to_string()))?);
            continue;
        }
        let record: DocumentRecord =
            serde_json::from_value(value).map_err(|e| parse_error(path, lineno, e.to_string()))?;
        let mentions = record
            .mentions
            .into_iter()
            .enumerate()
            .map(|(pos, m)| Mention {
                mention_id: m.mention_id,
                doc_id: record.doc_id.clone(),
                order_index: m.order_index.unwrap_or(pos),
                head_lemma: m.head_lemma,
                head_pos: m.head_pos,
                span_lemmas: m.span_lemmas,
                context_lemmas: m.context_lemmas,
                arguments: m.arguments,
            })
            .collect();
        documents.push(Document::new(record.doc_id, record.seminal_event_id, mentions));
    }
    Corpus::new(documents, gold)
}

/// Loads and validates a JSON-lines corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    parse_corpus(BufReader::new(file), path)
}

/// Loads a gold sidecar file (`{"gold_chains": [...]}`).
pub fn load_gold(path: impl AsRef<Path>) -> Result<GoldChains> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes the corpus in the same JSON-lines format `load_corpus` reads.
pub fn write_corpus(corpus: &Corpus, mut out: impl Write) -> Result<()> {
    for doc in &corpus.documents {
        let record = DocumentRecord {
            doc_id: doc.doc_id.clone(),
            seminal_event_id: doc.seminal_event_id.clone(),
            mentions: doc
                .mentions
                .iter()
                .map(|m| MentionRecord {
                    mention_id: m.mention_id.clone(),
                    order_index: Some(m.order_index),
                    head_lemma: m.head_lemma.clone(),
                    head_pos: m.head_pos.clone(),
                    span_lemmas: m.span_lemmas.clone(),
                    context_lemmas: m.context_lemmas.clone(),
                    arguments: m.arguments.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    if let Some(gold) = &corpus.gold {
        serde_json::to_writer(&mut out, gold)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Merges all documents sharing a seminal event into one meta-document.
///
/// Meta-documents are emitted in seminal-event order; their mentions follow
/// `(doc_id, order_index)` order and are renumbered from 0.
pub fn build_meta_documents(corpus: &Corpus) -> Result<Corpus> {
    let mut groups: BTreeMap<&str, Vec<&Document>> = BTreeMap::new();
    for doc in &corpus.documents {
        let event = doc
            .seminal_event_id
            .as_deref()
            .ok_or_else(|| Error::Validation(format!("document `{}` has no seminal_event_id", doc.doc_id)))?;
        groups.entry(event).or_default().push(doc);
    }
    let documents = groups
        .into_iter()
        .map(|(event, mut docs)| {
            docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
            let mentions = docs
                .iter()
                .flat_map(|d| d.mentions.iter())
                .enumerate()
                .map(|(pos, m)| Mention {
                    order_index: pos,
                    ..m.clone()
                })
                .collect();
            Document::new(event, Some(event.to_owned()), mentions)
        })
        .collect();
    Corpus::new(documents, corpus.gold.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mention(id: &str, head: &str) -> Mention {
        Mention {
            mention_id: id.into(),
            doc_id: String::new(),
            order_index: 0,
            head_lemma: head.into(),
            head_pos: "NN".into(),
            span_lemmas: vec![head.into()],
            context_lemmas: vec![],
            arguments: BTreeMap::new(),
        }
    }

    fn doc(id: &str, event: &str, heads: &[(&str, &str)]) -> Document {
        let mentions = heads
            .iter()
            .enumerate()
            .map(|(i, (mid, h))| Mention {
                order_index: i,
                ..mention(mid, h)
            })
            .collect();
        Document::new(id, Some(event.into()), mentions)
    }

    fn tf(pairs: &[(&str, u32)]) -> TermCounts {
        let mut t = TermCounts::new();
        for &(k, c) in pairs {
            for _ in 0..c {
                t.add(k);
            }
        }
        t
    }

    #[test]
    fn cosine_cases() {
        let a = tf(&[("a", 1), ("b", 1)]);
        assert!((a.cosine(&a) - 1.0).abs() < 1e-15);
        assert_eq!(a.cosine(&tf(&[("c", 2)])), 0.0);
        assert!((a.cosine(&tf(&[("a", 1)])) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(a.cosine(&TermCounts::new()), 0.0);
    }

    #[test]
    fn parse_two_documents() {
        let text = r#"{"doc_id":"d1","seminal_event_id":"e","mentions":[{"mention_id":"a","head_lemma":"x","head_pos":"NN","span_lemmas":["x"]},{"mention_id":"b","head_lemma":"y","head_pos":"NN","span_lemmas":["y"]},{"mention_id":"c","head_lemma":"z","head_pos":"NN","span_lemmas":["z"]}]}
{"doc_id":"d2","seminal_event_id":"e","mentions":[{"mention_id":"d","head_lemma":"x","head_pos":"NN","span_lemmas":["x"]},{"mention_id":"e","head_lemma":"y","head_pos":"NN","span_lemmas":["y"]},{"mention_id":"f","head_lemma":"z","head_pos":"NN","span_lemmas":["z"]}]}
{"gold_chains":[["a","d"]]}
"#;
        let c = parse_corpus(text.as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(c.num_mentions(), 6);
        assert_eq!(c.mention(4).mention_id, "e");
        assert_eq!(c.mention(4).order_index, 1);
        assert_eq!(c.mention(4).doc_id, "d2");
        assert_eq!(c.gold().unwrap().chains.len(), 1);
    }

    #[test]
    fn duplicate_mention_id_is_named() {
        let text = r#"{"doc_id":"d1","mentions":[{"mention_id":"a","head_lemma":"x","head_pos":"NN","span_lemmas":["x"]}]}
{"doc_id":"d2","mentions":[{"mention_id":"a","head_lemma":"x","head_pos":"NN","span_lemmas":["x"]}]}
"#;
        let err = parse_corpus(text.as_bytes(), Path::new("mem")).unwrap_err();
        assert!(matches!(&err, Error::Validation(m) if m.contains("`a`")), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"doc_id\":\"d1\",\"mentions\":[]}\n{not json\n";
        match parse_corpus(text.as_bytes(), Path::new("c.jsonl")).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_role_rejected() {
        let text = r#"{"doc_id":"d1","mentions":[{"mention_id":"a","head_lemma":"x","head_pos":"NN","span_lemmas":["x"],"arguments":{"agent":[["y"]]}}]}"#;
        assert!(matches!(parse_corpus(text.as_bytes(), Path::new("m")), Err(Error::Parse { .. })));
    }

    #[test]
    fn gold_with_unknown_mention_rejected() {
        let d = doc("d1", "e", &[("a", "x")]);
        let gold = GoldChains {
            chains: vec![vec!["a".into(), "zz".into()]],
        };
        assert!(matches!(Corpus::new(vec![d], Some(gold)), Err(Error::Validation(_))));
    }

    #[test]
    fn head_must_be_in_span() {
        let mut m = mention("a", "x");
        m.span_lemmas = vec!["y".into()];
        let d = Document::new("d", None, vec![m]);
        assert!(Corpus::new(vec![d], None).is_err());
    }

    #[test]
    fn order_gaps_rejected() {
        let mut m = mention("a", "x");
        m.order_index = 2;
        assert!(Corpus::new(vec![Document::new("d", None, vec![m])], None).is_err());
    }

    #[test]
    fn tf_vector_counts_spans_and_arguments() {
        let mut m = mention("a", "strike");
        m.span_lemmas = vec!["air".into(), "strike".into()];
        m.arguments.insert(Role::Participant, vec![vec!["plane".into()], vec!["air".into()]]);
        let d = Document::new("d", None, vec![m]);
        assert_eq!(d.tf_vector().get("air"), 2);
        assert_eq!(d.tf_vector().get("plane"), 1);
        assert_eq!(d.tf_vector().total(), 4);
    }

    #[test]
    fn meta_documents_merge_by_event() {
        let c = Corpus::new(
            vec![
                doc("d2", "e1", &[("d", "x"), ("e", "y"), ("f", "z")]),
                doc("d1", "e1", &[("a", "x"), ("b", "y"), ("c", "z")]),
            ],
            Some(GoldChains {
                chains: vec![vec!["a".into(), "d".into()]],
            }),
        )
        .unwrap();
        let meta = build_meta_documents(&c).unwrap();
        assert_eq!(meta.num_documents(), 1);
        let ids: Vec<_> = meta.mentions().map(|m| m.mention_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c", "d", "e", "f"]);
        assert_eq!(meta.mention(5).order_index, 5);
        assert_eq!(meta.gold(), c.gold());
    }

    #[test]
    fn meta_documents_identity_when_events_distinct() {
        let c = Corpus::new(
            vec![doc("d1", "e1", &[("a", "x")]), doc("d2", "e2", &[("b", "y")])],
            None,
        )
        .unwrap();
        let meta = build_meta_documents(&c).unwrap();
        assert_eq!(meta.num_documents(), 2);
        for (m, o) in meta.mentions().zip(c.mentions()) {
            assert_eq!(m.mention_id, o.mention_id);
            assert_eq!(m.span_lemmas, o.span_lemmas);
        }
    }

    #[test]
    fn meta_documents_require_event() {
        let c = Corpus::new(vec![Document::new("d", None, vec![mention("a", "x")])], None).unwrap();
        assert!(build_meta_documents(&c).is_err());
    }

    #[test]
    fn canonical_order_follows_doc_id() {
        let c = Corpus::new(
            vec![doc("b", "e", &[("m1", "x"), ("m2", "y")]), doc("a", "e", &[("m3", "x")])],
            None,
        )
        .unwrap();
        assert_eq!(c.canonical_order(), &[2, 0, 1]);
    }
}
