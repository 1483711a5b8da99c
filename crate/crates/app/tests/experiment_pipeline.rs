use std::path::Path;
use std::sync::Arc;

use sdea::config::Config;
use sdea::experiment::{run_experiment, ExperimentError, NotFoundPolicy, Runner};
use sdea::report::{ExperimentReport, SDEA, VANILLA};
use sdea_core::corpus::{Prompt, PromptSet};
use sdea_core::generation::DecodingParams;
use sdea_core::reranker::Protocol;
use sdea_core::{FixtureBackend, Lexicon, SdLevel};

fn write(dir: &Path, name: &str, content: &str) {
    std::fs::write(dir.join(name), content).unwrap();
}

const FOUR_PROMPTS: &str = r#"{
  "first prompt here": "I like that a lot<|endoftext|>Sure<|endoftext|>",
  "second prompt here": "Nice<|endoftext|>My day was long<|endoftext|>",
  "third prompt here": "Okay then<|endoftext|>We did it<|endoftext|>",
  "fourth prompt here": "Thanks<|endoftext|>Sure thing<|endoftext|>"
}"#;

fn four_prompt_dir(extra: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "fx.json", FOUR_PROMPTS);
    write(
        dir.path(),
        "corpus.txt",
        "first prompt here\n\nsecond prompt here\n\nthird prompt here\n\nuh\nfourth prompt here\n",
    );
    write(
        dir.path(),
        "config.toml",
        &format!(
            "[backend]\nfixture = \"fx.json\"\n[corpus]\npath = \"corpus.txt\"\nformat = \"linewise\"\n\
             [output]\nreport = \"out/report.json\"\ntable = \"out/report.txt\"\ncsv = \"out/records.csv\"\n{extra}"
        ),
    );
    dir
}

#[tokio::test]
async fn four_prompt_hand_trace() {
    let dir = four_prompt_dir("");
    let cfg = Config::parse(
        &std::fs::read_to_string(dir.path().join("config.toml")).unwrap(),
        dir.path(),
        Vec::new(),
    )
    .unwrap();
    let report = run_experiment(&cfg).await.unwrap();
    assert_eq!(report.prompt_count, 4);
    assert_eq!(report.counts(VANILLA).unwrap().as_array(), [3, 1, 0]);
    assert_eq!(report.counts(SDEA).unwrap().as_array(), [1, 3, 0]);
    assert_eq!(report.not_found, 1);
    assert_eq!(report.records[3].turn, 1);
    assert!(report.records[3].enhanced.is_none());
    assert_eq!(report.lexicon_version, "sdea-default-1");

    // outputs persisted and self-consistent
    let json = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    let reloaded: ExperimentReport = serde_json::from_str(&json).unwrap();
    assert_eq!(reloaded, report);
    assert_eq!(reloaded.recompute_statistics(), reloaded.statistics);
    assert_eq!(reloaded.config["experiment"]["target"], "M");
    let csv = std::fs::read_to_string(dir.path().join("out/records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let table = std::fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(table.contains("not found: 1"));
}

#[tokio::test]
async fn exclude_policy_drops_not_found() {
    let dir = four_prompt_dir("[experiment]\nnot_found = \"exclude\"\n");
    let cfg = Config::load(&dir.path().join("config.toml")).unwrap();
    let report = run_experiment(&cfg).await.unwrap();
    assert_eq!(report.not_found_policy, NotFoundPolicy::Exclude);
    assert_eq!(report.counts(SDEA).unwrap().as_array(), [0, 3, 0]);
}

#[tokio::test]
async fn empty_prompt_set_fails_before_backend() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "corpus.txt", "uh\n\num-hum\n");
    // unreachable backend: the run must fail on the prompt set first
    write(
        dir.path(),
        "config.toml",
        "[backend]\nurl = \"http://127.0.0.1:9\"\n[corpus]\npath = \"corpus.txt\"\nformat = \"linewise\"\n",
    );
    let cfg = Config::load(&dir.path().join("config.toml")).unwrap();
    assert!(matches!(
        run_experiment(&cfg).await,
        Err(ExperimentError::EmptyPromptSet)
    ));
}

#[tokio::test]
async fn backend_failure_writes_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "fx.json", r#"{"first prompt here": "Fine<|endoftext|>"}"#);
    write(dir.path(), "corpus.txt", "first prompt here\n\nsecond prompt here\n");
    write(
        dir.path(),
        "config.toml",
        "[backend]\nfixture = \"fx.json\"\n[corpus]\npath = \"corpus.txt\"\nformat = \"linewise\"\n\
         [experiment]\nparallelism = 1\n[output]\nreport = \"report.json\"\n",
    );
    let cfg = Config::load(&dir.path().join("config.toml")).unwrap();
    let err = run_experiment(&cfg).await.unwrap_err();
    let ExperimentError::Backend {
        index,
        completed,
        checkpoint,
        ..
    } = err
    else {
        panic!("unexpected {err}");
    };
    assert_eq!((index, completed), (1, 1));
    let checkpoint: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(checkpoint.unwrap()).unwrap()).unwrap();
    assert_eq!(checkpoint["failed_index"], 1);
    assert_eq!(checkpoint["completed"].as_array().unwrap().len(), 1);
    assert!(!dir.path().join("report.json").exists());
}

fn synthetic(n: usize) -> (PromptSet, FixtureBackend) {
    let texts = [
        "Nice one<eos>My turn<eos>",
        "Thanks<eos>Sure<eos>",
        "I agree<eos>",
        "Well<eos>The blue one<eos>I'm lonely<eos>We went<eos>",
    ];
    let prompts: Vec<Prompt> = (0..n)
        .map(|i| Prompt {
            conv_id: i.to_string(),
            turn: 0,
            text: format!("prompt number {i}"),
        })
        .collect();
    let backend = FixtureBackend::new(
        "synthetic",
        "<eos>",
        (0..n).map(|i| (format!("prompt number {i}"), texts[i % texts.len()].to_string())),
    );
    (
        PromptSet {
            dataset_id: "s".into(),
            prompts,
            skipped: 0,
        },
        backend,
    )
}

fn runner(backend: FixtureBackend, parallelism: usize) -> Runner {
    Runner {
        backend: Arc::new(backend),
        lexicon: Arc::new(Lexicon::default_lexicon()),
        params: DecodingParams::default(),
        target: SdLevel::Medium,
        parallelism,
        protocol: Protocol::SingleSequence,
    }
}

#[tokio::test]
async fn records_invariant_under_parallelism_and_permutation() {
    let (prompts, backend) = synthetic(60);
    let reference = serde_json::to_string(&runner(backend.clone(), 1).run(&prompts).await.unwrap()).unwrap();
    for p in [2, 7, 32] {
        let records = runner(backend.clone(), p).run(&prompts).await.unwrap();
        assert_eq!(serde_json::to_string(&records).unwrap(), reference);
    }

    let mut shuffled = prompts.clone();
    shuffled.prompts.reverse();
    shuffled.prompts.swap(3, 40);
    let mut a = runner(backend.clone(), 4).run(&prompts).await.unwrap();
    let mut b = runner(backend, 4).run(&shuffled).await.unwrap();
    a.sort_by(|x, y| x.conv_id.cmp(&y.conv_id));
    b.sort_by(|x, y| x.conv_id.cmp(&y.conv_id));
    assert_eq!(a, b);
}
