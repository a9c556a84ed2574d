//! Event coreference with a hierarchical distance-dependent Chinese
//! restaurant process.
//!
//! Mentions link to earlier mentions of their own document (customer links)
//! and table heads link to mentions of other documents (table links); the
//! connected components of those links are the coreference clusters. Link
//! priors come from a trained pairwise logistic model, and cluster words are
//! scored by a collapsed Dirichlet-multinomial.
//!
//! ```
//! use hddcrp::corpus::parse_corpus;
//! use hddcrp::distances::Distances;
//! use hddcrp::metrics::{score, Setting};
//! use hddcrp::sampler::{run_chains, ModelKind, SamplerConfig};
//! use hddcrp::ClusterAssignment;
//!
//! let jsonl = r#"{"doc_id":"d1","seminal_event_id":"e1","mentions":[{"mention_id":"a","head_lemma":"strike","head_pos":"NN","span_lemmas":["strike"]},{"mention_id":"b","head_lemma":"strike","head_pos":"NN","span_lemmas":["strike"]}]}
//! {"doc_id":"d2","seminal_event_id":"e1","mentions":[{"mention_id":"c","head_lemma":"strike","head_pos":"NN","span_lemmas":["strike"]}]}
//! {"gold_chains":[["a","b","c"]]}"#;
//! let corpus = parse_corpus(jsonl.as_bytes(), "inline.jsonl".as_ref())?;
//! let distances = Distances::uniform(&corpus, 1.0, 1.0);
//! let mut cfg = SamplerConfig::new(ModelKind::Hddcrp);
//! cfg.iterations = 20;
//! cfg.chains = 2;
//! let runs = run_chains(&corpus, &distances, &cfg, 2)?;
//! let gold = ClusterAssignment::gold(&corpus)?;
//! let report = score(&corpus, &gold, &runs[0].estimate, Setting::CrossDocument)?;
//! assert!(report.conll_f1 >= 0.0 && report.conll_f1 <= 1.0);
//! # Ok::<(), hddcrp::Error>(())
//! ```

pub mod baselines;
pub mod corpus;
pub mod distances;
mod error;
pub mod features;
pub mod lexical;
pub mod likelihood;
pub mod links;
pub mod metrics;
pub mod pairwise;
pub mod sampler;

pub use corpus::{Corpus, Document, Mention};
pub use distances::Distances;
pub use error::{Error, Result};
pub use links::{ClusterAssignment, LinkState};
