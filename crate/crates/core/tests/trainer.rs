use hddcrp::corpus::load_corpus;
use hddcrp::features::FeatureVector;
use hddcrp::lexical::LexicalResources;
use hddcrp::pairwise::{build_training_pairs, fit_weights, gradient, penalized_log_likelihood, Example, PairLabel, PairwiseModel, TrainingOptions, DEFAULT_SIGMA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_examples(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Example> {
    (0..n)
        .map(|_| Example {
            features: FeatureVector::from((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>()),
            label: if rng.random::<bool>() { PairLabel::Coreferent } else { PairLabel::NotCoreferent },
        })
        .collect()
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dim = 6;
    let examples = random_examples(&mut rng, 40, dim);
    for _ in 0..20 {
        let theta: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
        let g = gradient(&theta, &examples, 0.7);
        for k in 0..dim {
            let h = 1e-5;
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[k] += h;
            down[k] -= h;
            let fd = (penalized_log_likelihood(&up, &examples, 0.7) - penalized_log_likelihood(&down, &examples, 0.7)) / (2.0 * h);
            let rel = (g[k] - fd).abs() / g[k].abs().max(fd.abs()).max(1e-8);
            assert!(rel < 1e-5, "component {k}: {} vs {fd}", g[k]);
        }
    }
}

#[test]
fn fit_reaches_a_stationary_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let examples = random_examples(&mut rng, 60, 4);
    let (theta, summary) = fit_weights(&examples, 4, &TrainingOptions::default()).unwrap();
    assert!(summary.converged);
    assert!(summary.final_objective > summary.initial_objective);
    assert!(gradient(&theta, &examples, 1.0).iter().all(|g| g.abs() < 1e-6));
}

#[test]
fn synthetic_pairs_are_separated() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let corpus = load_corpus(dir.join("synthetic.jsonl")).unwrap();
    let resources = LexicalResources::load(Some(&dir.join("synthetic.vectors")), Some(&dir.join("synthetic.synonyms"))).unwrap();
    let pairs = build_training_pairs(&corpus, DEFAULT_SIGMA).unwrap();
    let (model, summary) = PairwiseModel::train(&corpus, &pairs, &resources, &TrainingOptions::default()).unwrap();
    assert!(summary.converged);
    let acc = model.accuracy(&corpus, &pairs, &resources).unwrap();
    assert!(acc >= 0.99, "pair accuracy {acc}");
}
