use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use affixprod::corpus_index::{build_index, FrequencyIndex, TokenizerConfig};
use affixprod::pipeline::REPORT_HEADER;
use affixprod::synthetic::{generate_corpus, SynthConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affixprod"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn affixprod")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synthetic corpus with "un" attached to half the bases, indexed to `dir`.
fn synthetic_index(dir: &Path) -> PathBuf {
    let corpus = generate_corpus(&SynthConfig {
        base_vocab_size: 400,
        total_tokens: 30_000,
        seed: 5,
        ..SynthConfig::default()
    })
    .unwrap();
    let text = dir.join("corpus.txt");
    std::fs::write(&text, corpus.text).unwrap();
    let idx = dir.join("corpus.tsv");
    let o = run(&["index", s(&text), "-o", s(&idx)]);
    assert!(o.status.success(), "{}", stderr(&o));
    idx
}

#[test]
fn index_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("a.txt");
    std::fs::write(&text, "The cat sat. The cat.\nUn-do un-do UNDO").unwrap();
    let out = dir.path().join("a.tsv");
    let o = run(&["index", s(&text), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "tokens=8 types=5 hapaxes=2");
    let idx = FrequencyIndex::load(&out).unwrap();
    assert_eq!(idx.lookup("the"), 2);
    assert_eq!(idx.lookup("un-do"), 2);
    assert_eq!(idx.lookup("undo"), 1);
}

#[test]
fn index_missing_file_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    let o = run(&["index", s(&missing), "-o", s(&dir.path().join("x.tsv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.txt"));
    assert!(!dir.path().join("x.tsv").exists());
}

#[test]
fn index_two_files_equals_merge() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    std::fs::write(&a, "alpha beta beta gamma").unwrap();
    std::fs::write(&b, "beta delta Alpha-beta").unwrap();
    let out = dir.path().join("ab.tsv");
    let o = run(&["index", s(&a), s(&b), "-o", s(&out), "--label", "ab"]);
    assert!(o.status.success());
    let cfg = TokenizerConfig::without_stoplist();
    let merged = build_index("alpha beta beta gamma", &cfg, "ab")
        .merge(&build_index("beta delta Alpha-beta", &cfg, "ab"))
        .unwrap();
    assert_eq!(FrequencyIndex::load(&out).unwrap(), merged);
}

#[test]
fn measure_writes_sorted_deterministic_report() {
    let dir = tempfile::tempdir().unwrap();
    let idx = synthetic_index(dir.path());
    let (o1, o2) = (dir.path().join("r1"), dir.path().join("r2"));
    for out in [&o1, &o2] {
        let o = run(&[
            "measure",
            "--index",
            s(&idx),
            "--seed",
            "9",
            "--out",
            s(out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let r1 = std::fs::read(o1.join("report.csv")).unwrap();
    assert_eq!(r1, std::fs::read(o2.join("report.csv")).unwrap());

    let report = String::from_utf8(r1).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some(REPORT_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    let prods: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(prods.windows(2).all(|w| w[0] <= w[1]));

    // Vowel-initial prefixes never combine with the consonant-initial bases:
    // (0.997, 0.002, 0.001) sorts as 0_1_2, an unattested order.
    let em = rows.iter().find(|r| r[1] == "em-").unwrap();
    assert_eq!(em[0], "other");
    assert_eq!(
        &em[3..10],
        ["0.997000", "0.002000", "0.001000", "0_1", "0.995000", "1_2", "0.001000"]
    );
    assert!((em[2].parse::<f64>().unwrap() - 0.003).abs() < 1e-6);
    let un = rows.iter().find(|r| r[1] == "un-").unwrap();
    assert!(un[2].parse::<f64>().unwrap() > 0.1);

    let traj = std::fs::read_to_string(o1.join("trajectories").join("un.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t,p0,p1,p2"));
    assert_eq!(traj.lines().count(), 101);
    assert!(o1.join("trials").join("un.csv").exists());

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(o1.join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["settings"]["sample"]["master_seed"], 9);
    assert!(meta["rng"].as_str().unwrap().contains("ChaCha20"));
}

#[test]
fn measure_failures_leave_no_report() {
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("tiny.txt");
    std::fs::write(&text, "just a handful of content words here").unwrap();
    let idx = dir.path().join("tiny.tsv");
    assert!(run(&["index", s(&text), "-o", s(&idx)]).status.success());
    let out = dir.path().join("out");
    let o = run(&["measure", "--index", s(&idx), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eligible"));
    assert!(!out.join("report.csv").exists());

    let inv = dir.path().join("bad.txt");
    std::fs::write(&inv, "un-\nun-\n").unwrap();
    let o = run(&[
        "measure",
        "--index",
        s(&idx),
        "--inventory",
        s(&inv),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = run(&["measure", "--index", s(&idx), "-q", "1.5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_tables() {
    let o = run(&["replay", "--builtin", "en", "--builtin", "ru"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("builtin:en: 25/25 rows match"));
    assert!(out.contains("builtin:ru: 27/27 rows match"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn replay_reports_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let table = affixprod::cli::TABLE_EN.replacen("2_0,0.149", "2_0,0.249", 1);
    let path = dir.path().join("t.csv");
    std::fs::write(&path, table).unwrap();
    let o = run(&["replay", s(&path)]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(out.matches("FAIL").count(), 1);
    assert!(out.contains("24/25"));

    std::fs::write(
        &path,
        format!("{}\nbroken\n", affixprod::cli::FIXTURE_HEADER),
    )
    .unwrap();
    let o = run(&["replay", s(&path)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn synth_and_correlate() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, truth) = (dir.path().join("c.txt"), dir.path().join("t.csv"));
    let o = run(&[
        "synth",
        "--vocab",
        "200",
        "--tokens",
        "5000",
        "--pi",
        "0.5",
        "--seed",
        "3",
        "-o",
        s(&corpus),
        "--truth",
        s(&truth),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = std::fs::read_to_string(&truth).unwrap();
    assert_eq!(t.lines().next(), Some("base,attached"));
    assert_eq!(t.lines().count(), 201);
    assert!(std::fs::read_to_string(&corpus).unwrap().contains("un"));

    let report = dir.path().join("r.csv");
    std::fs::write(&report, "a,b,c\n1,3,x\n2,2,x\n3,1,x\n").unwrap();
    let o = run(&["correlate", "--report", s(&report), "--x", "a", "--y", "b"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).starts_with("n=3 r=-1.000000 p=0.000000"),
        "{}",
        stdout(&o)
    );
    let o = run(&["correlate", "--report", s(&report), "--x", "a", "--y", "z"]);
    assert_eq!(o.status.code(), Some(2));
}
