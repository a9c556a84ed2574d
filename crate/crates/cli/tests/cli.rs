use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn hddcrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hddcrp"))
        .args(args)
        .env_remove("HDDCRP_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hddcrp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn train(dir: &Path) -> PathBuf {
    let model = dir.join("model.json");
    ok(&[
        "train-distance",
        "--corpus",
        s(&data("synthetic.jsonl")),
        "--embeddings",
        s(&data("synthetic.vectors")),
        "--synonyms",
        s(&data("synthetic.synonyms")),
        "--out",
        s(&model),
    ]);
    model
}

/// Writes `lines` as a corpus file under `dir`.
fn write(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, lines.join("\n") + "\n").unwrap();
    p
}

fn mention(doc: &str, id: &str, k: usize, head: &str) -> String {
    format!(
        r#"{{"doc_id":"{doc}","mention_id":"{id}","order_index":{k},"head_lemma":"{head}","head_pos":"NN","span_lemmas":["{head}"],"context_lemmas":[],"arguments":{{}}}}"#
    )
}

/// Two documents whose gold chains coincide with head-lemma groups.
fn lemma_fixture(dir: &Path) -> PathBuf {
    let doc = |d: &str, heads: &[&str]| {
        let ms: Vec<String> = heads
            .iter()
            .enumerate()
            .map(|(k, h)| mention(d, &format!("{d}{k}"), k, h))
            .collect();
        format!(r#"{{"doc_id":"{d}","seminal_event_id":"e","mentions":[{}]}}"#, ms.join(","))
    };
    let a = doc("a", &["bomb", "arrest", "bomb"]);
    let b = doc("b", &["arrest", "kill"]);
    write(dir, "lemma.jsonl", &[&a, &b, r#"{"gold_chains":[["a0","a2"],["a1","b0"],["b1"]]}"#])
}

#[test]
fn training_writes_one_weight_per_feature() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let file = json(&model);
    let theta = file["theta"].as_array().unwrap().len();
    assert_eq!(theta, file["feature_index"].as_object().unwrap().len());
    let sidecar = json(&dir.path().join("model.features.json"));
    assert_eq!(sidecar["features"].as_array().unwrap().len(), theta);
}

#[test]
fn training_logs_the_default_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let out = hddcrp(&["train-distance", "--corpus", s(&data("synthetic.jsonl")), "--out", s(&dir.path().join("m.json"))]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma=0.4"));
}

#[test]
fn training_without_gold_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("tiny.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.contains("gold_chains")).collect();
    let corpus = write(dir.path(), "nogold.jsonl", &lines);
    let out = hddcrp(&["train-distance", "--corpus", s(&corpus), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_inputs_and_bad_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let tiny = data("tiny.jsonl");
    let cases: [Vec<&str>; 4] = [
        vec!["sample", "--corpus", s(&tiny), "--model", "hddcrp", "--out-dir", s(&out_dir)],
        vec!["sample", "--corpus", s(&tiny), "--model", "nonsense", "--out-dir", s(&out_dir)],
        vec!["sample", "--corpus", "/nonexistent/corpus.jsonl", "--model", "hdp-lex", "--out-dir", s(&out_dir)],
        vec!["baseline", "--corpus", s(&tiny), "--method", "agglomerative", "--out-dir", s(&out_dir)],
    ];
    for args in cases {
        assert_eq!(hddcrp(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn scoring_a_foreign_clustering_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.json");
    std::fs::write(&pred, r#"{"a1":0,"zz":1}"#).unwrap();
    let out = hddcrp(&["score", "--corpus", s(&data("tiny.jsonl")), "--pred", s(&pred)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sample_records_each_model_default_concentration() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let corpus = data("synthetic.jsonl");
    for (name, alpha_0) in [("hddcrp", 0.001), ("hddcrp-star", 1.0), ("hdp-lex", 1.0)] {
        let out = dir.path().join(name);
        ok(&[
            "sample", "--corpus", s(&corpus), "--model", name, "--distance", s(&model), "--iterations", "2", "--chains", "1",
            "--burn-in", "0", "--out-dir", s(&out),
        ]);
        let run = json(&out.join("run.json"));
        assert_eq!(run["config"]["alpha_0"].as_f64(), Some(alpha_0), "{name}");
        assert_eq!(run["config"]["alpha_d"].as_f64(), Some(0.5), "{name}");
    }
}

#[test]
fn flags_override_config_file_and_environment_seed_applies() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"iterations": 4, "lambda": 0.25, "chains": 2}"#).unwrap();
    let out = dir.path().join("o");
    let status = Command::new(env!("CARGO_BIN_EXE_hddcrp"))
        .args(["sample", "--corpus", s(&data("tiny.jsonl")), "--model", "hdp-lex", "--config", s(&config), "--lambda", "0.5"])
        .args(["--out-dir", s(&out)])
        .env("HDDCRP_SEED", "42")
        .output()
        .unwrap();
    assert!(status.status.success());
    let cfg = &json(&out.join("run.json"))["config"];
    assert_eq!(cfg["iterations"].as_u64(), Some(4));
    assert_eq!(cfg["chains"].as_u64(), Some(2));
    assert_eq!(cfg["lambda"].as_f64(), Some(0.5));
    assert_eq!(cfg["seed"].as_u64(), Some(42));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"iteration": 4}"#).unwrap();
    let out = hddcrp(&[
        "sample", "--corpus", s(&data("tiny.jsonl")), "--model", "hdp-lex", "--config", s(&config), "--out-dir",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parallel_chains_match_sequential_chains() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(dir.path());
    let run = |jobs: &str| {
        let out = dir.path().join(format!("jobs{jobs}"));
        ok(&[
            "sample", "--corpus", s(&data("synthetic.jsonl")), "--model", "hddcrp", "--distance", s(&model), "--iterations", "20",
            "--chains", "3", "--jobs", jobs, "--out-dir", s(&out),
        ]);
        (0..3)
            .map(|k| std::fs::read(out.join(format!("chain_{k}.clustering.json"))).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn lemma_baseline_is_perfect_when_gold_follows_lemmas() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = lemma_fixture(dir.path());
    let out = dir.path().join("lemma");
    ok(&["baseline", "--corpus", s(&corpus), "--method", "lemma", "--out-dir", s(&out)]);
    let report = dir.path().join("score.json");
    ok(&["score", "--corpus", s(&corpus), "--pred", s(&out.join("clustering.json")), "--out", s(&report)]);
    let r = json(&report);
    for setting in ["WD", "CD"] {
        assert_eq!(r["averaged"][setting]["conll_f1"].as_f64(), Some(1.0), "{setting}");
    }
}

#[test]
fn averaging_identical_predictions_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let tiny = data("tiny.jsonl");
    let pred = dir.path().join("pred.json");
    std::fs::write(&pred, r#"{"a1":0,"a2":0,"a3":1,"b1":2,"b2":1,"b3":2}"#).unwrap();
    let one = dir.path().join("one.json");
    let five = dir.path().join("five.json");
    ok(&["score", "--corpus", s(&tiny), "--pred", s(&pred), "--out", s(&one)]);
    let mut args = vec!["score", "--corpus", s(&tiny), "--out", s(&five)];
    for _ in 0..5 {
        args.extend(["--pred", s(&pred)]);
    }
    ok(&args);
    assert_eq!(json(&one)["averaged"], json(&five)["averaged"]);
    assert_eq!(json(&five)["per_prediction"]["CD"].as_array().unwrap().len(), 5);
}

#[test]
fn score_prints_a_table_for_the_requested_setting() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("gold.json");
    std::fs::write(&pred, r#"{"a1":0,"a2":0,"a3":1,"b1":0,"b2":1,"b3":2}"#).unwrap();
    let stdout = ok(&["score", "--corpus", s(&data("tiny.jsonl")), "--pred", s(&pred), "--setting", "cd"]);
    assert!(stdout.contains("CoNLL"));
    assert!(stdout.lines().any(|l| l.starts_with("CD") && l.contains("100.0")));
}

#[test]
fn oracle_posterior_sums_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("post.json");
    ok(&["oracle-posterior", "--corpus", s(&data("tiny.jsonl")), "--model", "hddcrp-star", "--lambda", "0.5", "--out", s(&out)]);
    let v = json(&out);
    let entries = v["posterior"].as_array().unwrap();
    let total: f64 = entries.iter().map(|e| e["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let probs: Vec<f64> = entries.iter().map(|e| e["probability"].as_f64().unwrap()).collect();
    assert!(probs.windows(2).all(|w| w[0] >= w[1]));
}
