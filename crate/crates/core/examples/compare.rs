//! Trains the pairwise model on the bundled synthetic corpus and prints the
//! cross-document scores of every system.
//!
//! ```text
//! cargo run --release -p hddcrp --example compare [seed]
//! ```

use std::path::Path;

use hddcrp::baselines::{agglomerative, lemma_baseline, AgglomerativeConfig};
use hddcrp::corpus::load_corpus;
use hddcrp::lexical::LexicalResources;
use hddcrp::metrics::{results_table, score, ScoreReport, Setting};
use hddcrp::pairwise::{build_training_pairs, PairwiseModel, TrainingOptions, DEFAULT_SIGMA};
use hddcrp::sampler::{run_chains, ModelKind, SamplerConfig};
use hddcrp::{ClusterAssignment, Distances};

fn main() -> hddcrp::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let corpus = load_corpus(dir.join("synthetic.jsonl"))?;
    let resources = LexicalResources::load(Some(&dir.join("synthetic.vectors")), Some(&dir.join("synthetic.synonyms")))?;
    let pairs = build_training_pairs(&corpus, DEFAULT_SIGMA)?;
    let (model, _) = PairwiseModel::train(&corpus, &pairs, &resources, &TrainingOptions::default())?;
    let distances = Distances::from_model(&corpus, &model, &resources)?;
    let gold = ClusterAssignment::gold(&corpus)?;
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);

    for setting in [Setting::WithinDocument, Setting::CrossDocument] {
        let mut rows = vec![("lemma".to_string(), score(&corpus, &gold, &lemma_baseline(&corpus), setting)?)];
        let agg = agglomerative(&corpus, &model, &resources, &AgglomerativeConfig::default())?;
        rows.push(("agglomerative".into(), score(&corpus, &gold, &agg.clustering, setting)?));
        for kind in ModelKind::ALL {
            let mut cfg = SamplerConfig::new(kind);
            cfg.seed = seed;
            let runs = run_chains(&corpus, &distances, &cfg, 5)?;
            let reports = runs
                .iter()
                .map(|r| score(&corpus, &gold, &r.estimate, setting))
                .collect::<hddcrp::Result<Vec<_>>>()?;
            rows.push((kind.name().into(), ScoreReport::mean(&reports)?));
        }
        println!("{setting}\n{}", results_table(&rows));
    }
    Ok(())
}
