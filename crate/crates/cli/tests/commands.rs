use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use aztext::corpus::{load_csv, save_csv, CleanReport, Corpus, Document};
use aztext::evaluate::EvalReport;
use aztext::synthetic::{cleaning_fixture, separable_fixture};
use tempfile::TempDir;

fn aztext(args: &[&str]) -> Output {
    aztext_with(args, None, &[])
}

fn aztext_with(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aztext"));
    cmd.args(args).env_remove("AZTEXT_SEED").env("RUST_LOG", "warn");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_corpus(dir: &TempDir, name: &str, corpus: &Corpus) -> PathBuf {
    let path = dir.path().join(name);
    save_csv(corpus, &path).unwrap();
    path
}

#[test]
fn clean_fixture_and_idempotence() {
    let dir = TempDir::new().unwrap();
    let input = write_corpus(&dir, "raw.csv", &cleaning_fixture());
    let out1 = dir.path().join("clean1.csv");
    let o = aztext(&["clean", "-i", p(&input), "-o", p(&out1)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: CleanReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((report.input_count, report.output_count, report.dropped_duplicates), (50, 40, 7));
    assert_eq!(report.dropped_too_short_chars + report.dropped_too_few_sentences + report.dropped_too_many_sentences, 3);
    assert_eq!(load_csv(&out1).unwrap().len(), 40);

    // explicit thresholds equal to the defaults change nothing
    let out2 = dir.path().join("clean2.csv");
    let report_file = dir.path().join("report.json");
    let o = aztext(&[
        "clean", "-i", p(&input), "-o", p(&out2), "--report", p(&report_file),
        "--min-chars", "30", "--max-chars", "10000", "--min-sentences", "3", "--max-sentences", "100",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
    let from_file: CleanReport = serde_json::from_str(&std::fs::read_to_string(&report_file).unwrap()).unwrap();
    assert_eq!(from_file, report);

    // second pass drops nothing
    let out3 = dir.path().join("clean3.csv");
    let o = aztext(&["clean", "-i", p(&out1), "-o", p(&out3)]);
    let again: CleanReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(again.total_dropped(), 0);
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out3).unwrap());
}

#[test]
fn clean_with_mapping() {
    let dir = TempDir::new().unwrap();
    let input = write_corpus(&dir, "raw.csv", &cleaning_fixture());
    let mapping = dir.path().join("map.tsv");
    std::fs::write(&mapping, "idman\tgündəm\n").unwrap();
    let out = dir.path().join("out.csv");
    let o = aztext(&["clean", "-i", p(&input), "-o", p(&out), "--mapping", p(&mapping)]);
    assert_eq!(o.status.code(), Some(0));
    let labels = load_csv(&out).unwrap().labels().clone();
    assert!(labels.contains("gündəm") && !labels.contains("idman"));
    let o = aztext(&["clean", "-i", p(&input), "-o", p(&out), "--mapping", p(&mapping), "--strict-mapping"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn clean_missing_input_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("never.csv");
    let o = aztext(&["clean", "-i", p(&dir.path().join("missing.csv")), "-o", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert!(o.stdout.is_empty());
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.trim().lines().count(), 1, "{stderr}");
}

#[test]
fn stats_output() {
    let dir = TempDir::new().unwrap();
    let corpus = Corpus::new(vec![
        Document::new("1", "a", "Bir. İki."),
        Document::new("2", "a", "Bir. İki. Üç. Dörd."),
        Document::new("3", "b", "A. B. C. D. E. F."),
    ]);
    let input = write_corpus(&dir, "s.csv", &corpus);
    let o = aztext(&["stats", "-i", p(&input), "--max-bucket", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["sentences"]["mean"], 4.0);
    assert_eq!(v["sentences"]["std"], 2.0);
    assert_eq!(v["sentences"]["p25"], 3.0);
    assert_eq!(v["total_sentences"], 12);
    let buckets: Vec<u64> = serde_json::from_value(v["histogram"]["counts"].clone()).unwrap();
    assert_eq!(buckets, vec![0, 0, 1, 0, 1, 1]);

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "id,source,published_at,category,title,body\n").unwrap();
    let o = aztext(&["stats", "-i", p(&empty)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn train_predict_evaluate() {
    let dir = TempDir::new().unwrap();
    let corpus = separable_fixture(4);
    let input = write_corpus(&dir, "sep.csv", &corpus);
    let model = dir.path().join("svm.aztx");
    let o = aztext(&["train", "-i", p(&input), "--model-out", p(&model), "--model", "svm", "--vectorizer", "tfidf", "--test-fraction", "0.1", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: EvalReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report.accuracy >= 0.95);
    assert_eq!(report.matrix.total(), 60);

    let lines: Vec<&str> = corpus.iter().take(30).map(|d| d.body.as_str()).collect();
    let mut input_text = lines.join("\n");
    input_text.push_str("\n\nson\n");
    let o = aztext_with(&["predict", "-m", p(&model)], Some(&input_text), &[]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 32);
    for (row, doc) in rows.iter().take(30).zip(corpus.iter()) {
        let (label, score) = row.split_once('\t').unwrap();
        assert_eq!(label, doc.category);
        score.parse::<f64>().unwrap();
    }
    assert_eq!(rows[30], "ERROR:empty_input");
    assert!(rows[31].contains('\t'));

    let file = dir.path().join("docs.txt");
    std::fs::write(&file, &input_text).unwrap();
    let o2 = aztext(&["predict", "-m", p(&model), "-i", p(&file)]);
    assert_eq!(stdout(&o2), out);

    let o = aztext(&["evaluate", "-m", p(&model), "-i", p(&input)]);
    let full: EvalReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(full.matrix.total(), 600);
}

#[test]
fn train_guards_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let input = write_corpus(&dir, "sep.csv", &separable_fixture(4));
    let model = dir.path().join("m.aztx");
    let o = aztext(&["train", "-i", p(&input), "--model-out", p(&model), "--model", "nb", "--alpha", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!model.exists());
    let o = aztext(&["train", "-i", p(&input), "--model-out", p(&model), "--test-fraction", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = aztext(&["train", "-i", p(&input), "--model-out", p(&model), "--model", "forest"]);
    assert_eq!(o.status.code(), Some(2));

    let one_class: Corpus = separable_fixture(4).iter().filter(|d| d.category == "idman").cloned().collect();
    let single = write_corpus(&dir, "single.csv", &one_class);
    let o = aztext(&["train", "-i", p(&single), "--model-out", p(&model)]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn corrupted_model_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.aztx");
    std::fs::write(&bad, b"AZTY\x01\x00\x00\x00\x00").unwrap();
    let o = aztext_with(&["predict", "-m", p(&bad)], Some("salam\n"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let mut future = b"AZTX".to_vec();
    future.extend(99u32.to_le_bytes());
    std::fs::write(&bad, &future).unwrap();
    let o = aztext_with(&["predict", "-m", p(&bad)], Some("salam\n"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("99"));
}

#[test]
fn deterministic_and_seed_sources() {
    let dir = TempDir::new().unwrap();
    let input = write_corpus(&dir, "sep.csv", &separable_fixture(6));
    let run = |name: &str, extra: &[&str], env: &[(&str, &str)]| {
        let model = dir.path().join(name);
        let mut args = vec!["train", "-i", p(&input), "--model-out", p(&model), "--model", "svm", "--epochs", "3"];
        args.extend_from_slice(extra);
        let o = aztext_with(&args, None, env);
        assert_eq!(o.status.code(), Some(0));
        (stdout(&o), std::fs::read(&model).unwrap())
    };
    let a = run("a.aztx", &["--seed", "11"], &[]);
    let b = run("b.aztx", &["--seed", "11"], &[]);
    assert_eq!(a, b);
    let from_env = run("c.aztx", &[], &[("AZTEXT_SEED", "11")]);
    assert_eq!(from_env, a);
    let flag_wins = run("d.aztx", &["--seed", "11"], &[("AZTEXT_SEED", "12")]);
    assert_eq!(flag_wins, a);

    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"subcommand": "train", "seed": 11, "model": "svm", "hyperparameters": {"epochs": 3}}"#).unwrap();
    let model = dir.path().join("e.aztx");
    let o = aztext_with(&["train", "--config", p(&config), "-i", p(&input), "--model-out", p(&model)], None, &[("AZTEXT_SEED", "12")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!((stdout(&o), std::fs::read(&model).unwrap()), a);

    // flags override the file
    let o = aztext(&["train", "--config", p(&config), "-i", p(&input), "--model-out", p(&model), "--model", "nb"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(aztext::load_model(&model).unwrap().kind(), aztext::ModelKind::Nb);

    let o = aztext(&["stats", "--config", p(&config), "-i", p(&input)]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&config, "{not json").unwrap();
    assert_eq!(aztext(&["train", "--config", p(&config)]).status.code(), Some(2));
}

#[test]
fn serve_subcommand() {
    let dir = TempDir::new().unwrap();
    let input = write_corpus(&dir, "sep.csv", &separable_fixture(4));
    let model = dir.path().join("nb.aztx");
    assert_eq!(aztext(&["train", "-i", p(&input), "--model-out", p(&model)]).status.code(), Some(0));

    let bad = dir.path().join("bad.aztx");
    std::fs::write(&bad, b"junk").unwrap();
    assert_ne!(aztext(&["serve", "-m", p(&bad), "--port", "0"]).status.code(), Some(0));

    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_aztext"))
        .args(["serve", "-m", p(&model), "--port", &port.to_string()])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let ok = rt.block_on(async {
        let client = reqwest::Client::new();
        for _ in 0..100 {
            if let Ok(resp) = client.get(format!("http://127.0.0.1:{port}/v1/health")).send().await {
                return resp.status() == 200;
            }
            tokio::time::sleep(std::time::Duration::from_millis(50)).await;
        }
        false
    });
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(ok);
}
