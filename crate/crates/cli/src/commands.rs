use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hddcrp::baselines::{agglomerative, lemma_baseline, AgglomerativeConfig};
use hddcrp::corpus::{load_corpus, load_gold};
use hddcrp::lexical::LexicalResources;
use hddcrp::metrics::{results_table, score, ScoreReport, Setting};
use hddcrp::pairwise::{build_training_pairs, PairLabel, PairwiseModel, TrainingOptions};
use hddcrp::sampler::{chain_rng, enumerate_exact_posterior, run_chains, ModelKind, PointEstimate, SamplerConfig, ScanOrder};
use hddcrp::{ClusterAssignment, Corpus, Distances};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::*;
use crate::InputError;

fn require_exists(paths: &[Option<&Path>]) -> Result<()> {
    for p in paths.iter().flatten() {
        if !p.exists() {
            return Err(InputError(format!("{} does not exist", p.display())).into());
        }
    }
    Ok(())
}

fn display(p: Option<&Path>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

fn load(args: &CorpusArgs) -> Result<Corpus> {
    require_exists(&[Some(&args.corpus), args.gold.as_deref()])?;
    let corpus = load_corpus(&args.corpus).with_context(|| format!("loading {}", args.corpus.display()))?;
    match &args.gold {
        Some(g) => Ok(corpus.with_gold(load_gold(g).with_context(|| format!("loading {}", g.display()))?)?),
        None => Ok(corpus),
    }
}

fn resources(args: &ResourceArgs) -> Result<LexicalResources> {
    require_exists(&[args.embeddings.as_deref(), args.synonyms.as_deref()])?;
    Ok(LexicalResources::load(args.embeddings.as_deref(), args.synonyms.as_deref())?)
}

fn input_paths(c: &CorpusArgs, r: Option<&ResourceArgs>) -> serde_json::Value {
    json!({
        "corpus": c.corpus.display().to_string(),
        "gold": display(c.gold.as_deref()),
        "embeddings": r.and_then(|r| display(r.embeddings.as_deref())),
        "synonyms": r.and_then(|r| display(r.synonyms.as_deref())),
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn train_distance(args: &TrainArgs) -> Result<()> {
    if !(0.0..1.0).contains(&args.holdout) {
        bail!(InputError(format!("--holdout must lie in [0, 1), got {}", args.holdout)));
    }
    let corpus = load(&args.corpus)?;
    let res = resources(&args.resources)?;
    let mut pairs = build_training_pairs(&corpus, args.sigma)?;
    let within = pairs
        .iter()
        .filter(|p| corpus.doc_of(corpus.index_of(&p.a).expect("pair over corpus")) == corpus.doc_of(corpus.index_of(&p.b).expect("pair over corpus")))
        .count();
    let positives = pairs.iter().filter(|p| p.label == PairLabel::Coreferent).count();
    eprintln!(
        "training pairs: {} ({within} within-document, {} cross-document at sigma={}), {positives} coreferent",
        pairs.len(),
        pairs.len() - within,
        args.sigma
    );
    pairs.shuffle(&mut chain_rng(args.seed, 0));
    let held = (pairs.len() as f64 * args.holdout).round() as usize;
    let (test, train) = pairs.split_at(held);
    let opts = TrainingOptions {
        l2: args.l2,
        ..TrainingOptions::default()
    };
    let (model, summary) = PairwiseModel::train(&corpus, train, &res, &opts)?;
    let train_accuracy = model.accuracy(&corpus, train, &res)?;
    let heldout_accuracy = if test.is_empty() { None } else { Some(model.accuracy(&corpus, test, &res)?) };
    match heldout_accuracy {
        Some(a) => println!("held-out pair accuracy: {a:.4} ({} pairs)", test.len()),
        None => println!("held-out pair accuracy: n/a (no pairs held out)"),
    }
    println!("training pair accuracy: {train_accuracy:.4} ({} pairs)", train.len());
    let mut file = model.to_file();
    file.training = Some(json!({
        "inputs": input_paths(&args.corpus, Some(&args.resources)),
        "sigma": args.sigma,
        "l2": args.l2,
        "holdout": args.holdout,
        "seed": args.seed,
        "train_pairs": train.len(),
        "heldout_pairs": test.len(),
        "train_accuracy": train_accuracy,
        "heldout_accuracy": heldout_accuracy,
        "iterations": summary.iterations,
        "converged": summary.converged,
        "final_objective": summary.final_objective,
        "gradient_max_norm": summary.gradient_max_norm,
    }));
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_json(&args.out, &file)?;
    write_json(&sidecar(&args.out), &json!({ "features": model.space.names() }))?;
    Ok(())
}

/// `model.json` → `model.features.json`.
fn sidecar(model: &Path) -> PathBuf {
    let stem = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    model.with_file_name(format!("{stem}.features.json"))
}

/// Sampler settings accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: Option<String>,
    alpha_d: Option<f64>,
    alpha_0: Option<f64>,
    lambda: Option<f64>,
    iterations: Option<usize>,
    chains: Option<usize>,
    seed: Option<u64>,
    burn_in: Option<usize>,
    point_estimate: Option<PointEstimate>,
    scan: Option<ScanOrder>,
}

fn parse_model(name: &str) -> Result<ModelKind> {
    name.parse::<ModelKind>().map_err(|e| InputError(e.to_string()).into())
}

/// Flags over config file over per-model defaults.
fn resolve_sampler(args: &SampleArgs) -> Result<SamplerConfig> {
    let file: ConfigFile = match &args.config {
        Some(p) => {
            require_exists(&[Some(p)])?;
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    let model = match args.model.as_deref().or(file.model.as_deref()) {
        Some(m) => parse_model(m)?,
        None => bail!(InputError("no model given: pass --model or set it in --config".into())),
    };
    let mut cfg = SamplerConfig::new(model);
    cfg.alpha_d = args.alpha_d.or(file.alpha_d).unwrap_or(cfg.alpha_d);
    cfg.alpha_0 = args.alpha_0.or(file.alpha_0).unwrap_or(cfg.alpha_0);
    cfg.lambda = args.lambda.or(file.lambda).unwrap_or(cfg.lambda);
    cfg.iterations = args.iterations.or(file.iterations).unwrap_or(cfg.iterations);
    cfg.chains = args.chains.or(file.chains).unwrap_or(cfg.chains);
    cfg.seed = args.seed.or(file.seed).unwrap_or(cfg.seed);
    cfg.burn_in = args.burn_in.or(file.burn_in).unwrap_or(cfg.burn_in);
    cfg.point_estimate = match args.point_estimate {
        Some(PointEstimateArg::Final) => PointEstimate::Final,
        Some(PointEstimateArg::Map) => PointEstimate::Map,
        None => file.point_estimate.unwrap_or(cfg.point_estimate),
    };
    cfg.scan = match args.scan {
        Some(ScanArg::Fixed) => ScanOrder::Fixed,
        Some(ScanArg::Randomized) => ScanOrder::Randomized,
        None => file.scan.unwrap_or(cfg.scan),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn distances_for(corpus: &Corpus, model: ModelKind, distance: Option<&Path>, res: &LexicalResources) -> Result<Distances> {
    match distance {
        Some(p) => {
            require_exists(&[Some(p)])?;
            let m = PairwiseModel::load(p).with_context(|| format!("loading {}", p.display()))?;
            Ok(Distances::from_model(corpus, &m, res)?)
        }
        None if !model.uses_distances() => Ok(Distances::uniform(corpus, 1.0, 1.0)),
        None => bail!(InputError(format!("--distance is required for {model}"))),
    }
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    let cfg = resolve_sampler(args)?;
    let corpus = load(&args.corpus)?;
    let res = resources(&args.resources)?;
    let distances = distances_for(&corpus, cfg.model, args.distance.as_deref(), &res)?;
    let runs = run_chains(&corpus, &distances, &cfg, args.jobs.max(1))?;
    create_dir(&args.out_dir)?;
    let mut files = Vec::new();
    for r in &runs {
        let clustering = format!("chain_{}.clustering.json", r.chain);
        let trace = format!("chain_{}.trace.json", r.chain);
        std::fs::write(args.out_dir.join(&clustering), r.estimate.to_json()?)?;
        write_json(
            &args.out_dir.join(&trace),
            &json!({
                "chain": r.chain,
                "config": &cfg,
                "joint_log_score": &r.loglik_trace,
                "final_state": &r.final_state,
            }),
        )?;
        files.push(json!({ "chain": r.chain, "clustering": clustering, "trace": trace }));
    }
    write_json(
        &args.out_dir.join("run.json"),
        &json!({
            "command": "sample",
            "config": &cfg,
            "inputs": input_paths(&args.corpus, Some(&args.resources)),
            "distance": display(args.distance.as_deref()),
            "outputs": files,
        }),
    )?;
    println!("{} chains of {} written to {}", runs.len(), cfg.model, args.out_dir.display());
    Ok(())
}

pub fn baseline(args: &BaselineArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let cfg = AgglomerativeConfig {
        wd_threshold: args.wd_threshold,
        cd_threshold: args.cd_threshold,
    };
    let (clustering, extra) = match args.method {
        BaselineMethod::Lemma => (lemma_baseline(&corpus), json!({})),
        BaselineMethod::Agglomerative => {
            let Some(distance) = args.distance.as_deref() else {
                bail!(InputError("--distance is required for the agglomerative baseline".into()));
            };
            require_exists(&[Some(distance)])?;
            let res = resources(&args.resources)?;
            let model = PairwiseModel::load(distance).with_context(|| format!("loading {}", distance.display()))?;
            let r = agglomerative(&corpus, &model, &res, &cfg).map_err(|e| InputError(e.to_string()))?;
            (r.clustering, json!({ "thresholds": cfg, "merges": r.merges }))
        }
    };
    create_dir(&args.out_dir)?;
    std::fs::write(args.out_dir.join("clustering.json"), clustering.to_json()?)?;
    let method = match args.method {
        BaselineMethod::Lemma => "lemma",
        BaselineMethod::Agglomerative => "agglomerative",
    };
    write_json(
        &args.out_dir.join("run.json"),
        &json!({
            "command": "baseline",
            "method": method,
            "inputs": input_paths(&args.corpus, Some(&args.resources)),
            "distance": display(args.distance.as_deref()),
            "details": extra,
            "outputs": ["clustering.json"],
        }),
    )?;
    println!("{method} baseline: {} clusters over {} mentions", clustering.num_clusters(), clustering.len());
    Ok(())
}

pub fn score_cmd(args: &ScoreArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let gold = ClusterAssignment::gold(&corpus).map_err(|e| InputError(e.to_string()))?;
    let preds = args
        .preds
        .iter()
        .map(|p| {
            require_exists(&[Some(p)])?;
            ClusterAssignment::load(p).with_context(|| format!("loading {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let settings: &[Setting] = match args.setting {
        SettingArg::Wd => &[Setting::WithinDocument],
        SettingArg::Cd => &[Setting::CrossDocument],
        SettingArg::Both => &[Setting::WithinDocument, Setting::CrossDocument],
    };
    let mut averaged = BTreeMap::new();
    let mut per_prediction = BTreeMap::new();
    let mut rows = Vec::new();
    for &setting in settings {
        let reports = preds
            .iter()
            .zip(&args.preds)
            .map(|(p, path)| score(&corpus, &gold, p, setting).with_context(|| format!("scoring {}", path.display())))
            .collect::<Result<Vec<_>>>()?;
        let mean = ScoreReport::mean(&reports)?;
        rows.push((setting.to_string(), mean));
        averaged.insert(setting.to_string(), mean);
        per_prediction.insert(setting.to_string(), reports);
    }
    print!("{}", results_table(&rows));
    if let Some(out) = &args.out {
        write_json(
            out,
            &json!({
                "command": "score",
                "inputs": input_paths(&args.corpus, None),
                "predictions": args.preds.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
                "averaged": averaged,
                "per_prediction": per_prediction,
            }),
        )?;
    }
    Ok(())
}

pub fn oracle_posterior(args: &OracleArgs) -> Result<()> {
    let model = parse_model(&args.model)?;
    let mut cfg = SamplerConfig::new(model);
    cfg.alpha_d = args.alpha_d.unwrap_or(cfg.alpha_d);
    cfg.alpha_0 = args.alpha_0.unwrap_or(cfg.alpha_0);
    cfg.lambda = args.lambda.unwrap_or(cfg.lambda);
    cfg.flat_likelihood = args.flat_likelihood;
    cfg.sequential_flat = args.sequential;
    let corpus = load(&args.corpus)?;
    let res = resources(&args.resources)?;
    let distances = match &args.distance {
        Some(_) => distances_for(&corpus, model, args.distance.as_deref(), &res)?,
        None => Distances::uniform(&corpus, 1.0, 1.0),
    };
    let post = enumerate_exact_posterior(&corpus, &distances, &cfg).map_err(|e| InputError(e.to_string()))?;
    let mut entries: Vec<(ClusterAssignment, f64)> = post.into_iter().collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let list: Vec<_> = entries
        .iter()
        .map(|(z, p)| json!({ "probability": p, "clustering": z }))
        .collect();
    write_json(
        &args.out,
        &json!({
            "command": "oracle-posterior",
            "config": &cfg,
            "inputs": input_paths(&args.corpus, Some(&args.resources)),
            "distance": display(args.distance.as_deref()),
            "posterior": list,
        }),
    )?;
    println!("{} clusterings with positive posterior mass", entries.len());
    Ok(())
}
