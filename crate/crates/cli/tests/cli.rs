use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn diacritix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diacritix"))
        .args(args)
        .output()
        .unwrap()
}

fn diacritix_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_diacritix"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn strip(text: &str) -> String {
    diacritix::Corpus::from_text(text, true).stripped().to_text()
}

#[test]
fn dataset_matches_golden_file() {
    let out = diacritix(&["dataset", path(&fixture("igbo.txt"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let golden = fs::read(fixture("igbo.jsonl")).unwrap();
    assert_eq!(out.stdout, golden);
}

#[test]
fn empty_input_restores_to_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let corpus = fixture("igbo.txt");
    let st = diacritix(&[
        "train",
        "ngram",
        "--corpus",
        path(&corpus),
        "-n",
        "3",
        "-o",
        path(&model),
    ]);
    assert!(st.status.success());
    let out = diacritix_stdin(&["restore", "--model", path(&model)], b"");
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = diacritix(&["stats", "--no-such-flag", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(diacritix(&[]).status.code(), Some(1));
    assert_eq!(diacritix(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_and_model_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(diacritix(&["stats", "/no/such/corpus.txt"]).status.code(), Some(2));
    let bad = dir.path().join("bad.bin");
    fs::write(&bad, [b'a', 0xff, b'\n']).unwrap();
    assert_eq!(diacritix(&["stats", path(&bad)]).status.code(), Some(2));
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"not\": \"a model\"}").unwrap();
    assert_eq!(diacritix(&["restore", "--model", path(&junk)]).status.code(), Some(3));
    assert_eq!(
        diacritix(&["restore", "--model", "/no/such/model.json"]).status.code(),
        Some(3)
    );
}

#[test]
fn train_restore_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("igbo.txt");
    let gold = fs::read_to_string(&corpus).unwrap();
    let stripped = dir.path().join("stripped.txt");
    fs::write(&stripped, strip(&gold)).unwrap();

    for (kind, extra) in [("ngram", vec!["-n", "3"]), ("clf", vec!["--kind", "perceptron"])] {
        let model = dir.path().join(format!("{kind}.json"));
        let mut args = vec!["--window", "5", "train", kind, "--corpus", path(&corpus)];
        args.extend(&extra);
        args.extend(["-o", path(&model)]);
        let st = diacritix(&args);
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));

        let restored = dir.path().join(format!("{kind}.out"));
        let st = diacritix(&[
            "restore",
            "--model",
            path(&model),
            "--in",
            path(&stripped),
            "--out",
            path(&restored),
        ]);
        assert!(st.status.success());
        let first = fs::read_to_string(&restored).unwrap();
        let again = diacritix(&["restore", "--model", path(&model), "--in", path(&stripped)]);
        assert_eq!(again.stdout, first.as_bytes());
        assert_eq!(first.lines().count(), gold.lines().count());
        assert_eq!(strip(&first), strip(&gold));

        let score = diacritix(&[
            "eval",
            "fulltext",
            "--restored",
            path(&restored),
            "--gold",
            path(&corpus),
        ]);
        assert!(score.status.success());
        let report: serde_json::Value = serde_json::from_slice(&score.stdout).unwrap();
        let acc = report["scores"]["accuracy"].as_f64().unwrap();
        let base = report["baseline"]["accuracy"].as_f64().unwrap();
        assert!(acc > base, "{kind}: {acc} <= {base}");
    }
}

#[test]
fn cross_validation_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("cv.json");
    let out = diacritix(&[
        "eval",
        "cv",
        "--corpus",
        path(&fixture("igbo.txt")),
        "--dataset",
        path(&fixture("igbo.jsonl")),
        "-k",
        "3",
        "--report",
        path(&report),
        "ngram",
        "-n",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tsv = String::from_utf8(out.stdout).unwrap();
    assert!(tsv.starts_with("wordkey\tcount\taccuracy"));
    assert_eq!(tsv.lines().count(), 5);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["outcomes"].as_array().unwrap().len(), 3);
    assert_eq!(json["outcomes"][0]["folds"].as_array().unwrap().len(), 3);
}
