use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gchs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gchs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = gchs(args);
    assert!(
        out.status.success(),
        "gchs {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fails(args: &[&str]) -> String {
    let out = gchs(args);
    assert!(!out.status.success(), "gchs {args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&read(p)).unwrap()
}

/// Small, fast model settings shared by the training tests.
const TINY: [&str; 8] = ["--hidden-dim", "8", "--out-dim", "4", "--no-info-p-epochs", "3", "--lr", "0.01"];

fn write_dataset(dir: &Path, n: usize, edges: &[(usize, usize)], labels: &[usize]) {
    fs::create_dir_all(dir).unwrap();
    let e: String = edges.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
    fs::write(dir.join("edges.txt"), e).unwrap();
    let x: String = (0..n).map(|i| format!("{},{}\n", i % 3, (i * 7) % 5)).collect();
    fs::write(dir.join("features.csv"), x).unwrap();
    let y: String = labels.iter().map(|c| format!("{c}\n")).collect();
    fs::write(dir.join("labels.txt"), y).unwrap();
}

/// Two disjoint cliques of `m` nodes labeled 0 and 1.
fn two_cliques(dir: &Path, m: usize) -> usize {
    let mut edges = Vec::new();
    for block in 0..2 {
        for i in 0..m {
            for j in (i + 1)..m {
                edges.push((block * m + i, block * m + j));
            }
        }
    }
    let labels: Vec<usize> = (0..2 * m).map(|i| i / m).collect();
    write_dataset(dir, 2 * m, &edges, &labels);
    edges.len()
}

#[test]
fn generate_writes_reloadable_deterministic_files() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["generate", "--seed", "3", "--out", s(&a)]);
    ok(&["generate", "--seed", "3", "--out", s(&b)]);
    for f in ["edges.txt", "features.csv", "labels.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(read(&a.join("labels.txt")).lines().count(), 300);

    // Loading and re-exporting reproduces the canonical files.
    let c = tmp.path().join("c");
    ok(&["attack", "--data", s(&a), "--power", "0.01", "--out", s(&c)]);
    let g = gchs_core::io::load_graph(&a.join("edges.txt"), &a.join("features.csv"), Some(&a.join("labels.txt"))).unwrap();
    assert_eq!(gchs_core::io::format_edge_list(g.edges()), read(&a.join("edges.txt")));
    assert_eq!(read(&c.join("features.csv")), read(&a.join("features.csv")));

    let other = tmp.path().join("d");
    ok(&["generate", "--seed", "4", "--out", s(&other)]);
    assert_ne!(read(&a.join("edges.txt")), read(&other.join("edges.txt")));
}

#[test]
fn generate_rejects_empty_graph() {
    let tmp = TempDir::new().unwrap();
    let err = fails(&["generate", "--n", "0", "--out", s(tmp.path())]);
    assert!(err.contains("n > 0"), "{err}");
}

#[test]
fn attack_audit_counts_and_classes() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    // 100 edges: a path through 101 nodes, alternating labels every 50.
    let edges: Vec<(usize, usize)> = (0..100).map(|i| (i, i + 1)).collect();
    let labels: Vec<usize> = (0..101).map(|i| (i / 50).min(1)).collect();
    write_dataset(&data, 101, &edges, &labels);
    let out = tmp.path().join("out");
    ok(&["attack", "--data", s(&data), "--power", "0.05", "--seed", "9", "--out", s(&out)]);
    let audit = read(&out.join("audit.txt"));
    assert_eq!(audit.lines().filter(|l| l.starts_with("+ ")).count(), 5);
    assert_eq!(read(&out.join("edges.txt")).lines().count(), 105);

    let cliques = tmp.path().join("cliques");
    let m = two_cliques(&cliques, 6);
    let out = tmp.path().join("out2");
    ok(&["attack", "--data", s(&cliques), "--power", "0.2", "--out", s(&out)]);
    let audit = read(&out.join("audit.txt"));
    assert_eq!(audit.lines().count(), (0.2 * m as f64).round() as usize);
    for line in audit.lines() {
        let v: Vec<usize> = line[2..].split(' ').map(|t| t.parse().unwrap()).collect();
        assert_ne!(v[0] / 6, v[1] / 6, "intra-class insertion {line}");
    }
}

#[test]
fn attack_rejects_zero_power_and_unknown_kind() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    two_cliques(&data, 4);
    let out = tmp.path().join("out");
    let err = fails(&["attack", "--data", s(&data), "--power", "0", "--out", s(&out)]);
    assert!(err.contains("power"), "{err}");
    fails(&["attack", "--data", s(&data), "--power", "0.1", "--kind", "nope", "--out", s(&out)]);
}

#[test]
fn train_writes_artifacts_reproducibly() {
    let tmp = TempDir::new().unwrap();
    let run = |dir: &Path, extra: &[&str]| {
        let mut args = vec!["train", "--sbm", "--n", "40", "--seed", "5", "--out", s(dir)];
        args.extend_from_slice(&TINY);
        args.extend_from_slice(extra);
        ok(&args);
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&a, &["--epochs", "4"]);
    run(&b, &["--epochs", "4"]);
    assert_eq!(read(&a.join("history.jsonl")), read(&b.join("history.jsonl")));
    assert_eq!(read(&a.join("embeddings.txt")), read(&b.join("embeddings.txt")));
    assert_eq!(read(&a.join("history.jsonl")).lines().count(), 4);
    for f in ["p.txt", "retention.txt", "weights.txt", "resolved-config.txt"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let report = json(&a.join("report.json"));
    assert!(report["accuracy"].as_f64().is_some());
    assert!(report["nmi"].as_f64().is_some());
    assert!(report["best_epoch"].as_u64().unwrap() < 4);
    let config = read(&a.join("resolved-config.txt"));
    assert!(config.contains("epochs=4\n") && config.contains("mode=full\n"), "{config}");

    let one = tmp.path().join("one");
    run(&one, &["--epochs", "1"]);
    assert_eq!(read(&one.join("history.jsonl")).lines().count(), 1);
}

#[test]
fn baseline_keeps_initial_probabilities() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("base");
    let mut args = vec![
        "train", "--sbm", "--n", "30", "--mode", "baseline", "--budget", "4", "--epochs", "2", "--out", s(&dir),
    ];
    args.extend_from_slice(&TINY);
    ok(&args);
    let p = gchs_core::io::read_vector(&dir.join("p.txt")).unwrap();
    let m = p.len() as f64;
    assert!(p.iter().all(|&v| v == 4.0 / (2.0 * m)), "{p:?}");
}

#[test]
fn failed_training_keeps_partial_history() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("nan");
    let mut args = vec!["train", "--sbm", "--n", "30", "--epochs", "50", "--out", s(&dir)];
    args.extend_from_slice(&TINY[..6]);
    args.extend_from_slice(&["--lr", "1e300"]);
    let err = fails(&args);
    assert!(err.contains("non-finite") || err.contains("history"), "{err}");
    let lines = read(&dir.join("history.jsonl")).lines().count();
    assert!(lines < 50, "{lines} lines");
    assert!(!dir.join("report.json").exists());
}

#[test]
fn config_file_and_overrides() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# tiny run\nepochs = 2\nhidden-dim=8\nout_dim=4\nn=30\nsbm=true\neta=0.25\n").unwrap();
    let dir = tmp.path().join("out");
    ok(&["train", "--config", s(&cfg), "--eta", "0.5", "--out", s(&dir)]);
    let resolved = read(&dir.join("resolved-config.txt"));
    assert!(resolved.contains("eta=0.5\n"), "{resolved}");
    assert!(resolved.contains("epochs=2\n"), "{resolved}");
    assert_eq!(read(&dir.join("history.jsonl")).lines().count(), 2);

    fs::write(&cfg, "epochs=2\ntypo=1\nsbm=true\n").unwrap();
    let err = fails(&["train", "--config", s(&cfg), "--out", s(&dir)]);
    assert!(err.contains("typo"), "{err}");
}

#[test]
fn dataset_source_must_be_unique() {
    let tmp = TempDir::new().unwrap();
    let err = fails(&["train", "--out", s(tmp.path())]);
    assert!(err.contains("exactly one"), "{err}");
}

#[test]
fn sweep_selects_and_reports() {
    let tmp = TempDir::new().unwrap();
    let single = tmp.path().join("single");
    let mut args = vec!["sweep", "--sbm", "--n", "30", "--epochs", "2", "--grid", "0.3", "--out", s(&single)];
    args.extend_from_slice(&TINY);
    ok(&args);
    let sel = json(&single.join("selection.json"));
    assert_eq!(sel["best_eta"].as_f64(), Some(0.3));
    assert!(sel.get("pearson").is_some());

    let full = tmp.path().join("full");
    let mut args = vec!["sweep", "--sbm", "--n", "30", "--epochs", "2", "--out", s(&full)];
    args.extend_from_slice(&TINY);
    ok(&args);
    let subdirs = fs::read_dir(&full).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(subdirs, 8);
    assert_eq!(read(&full.join("sweep.csv")).lines().count(), 9);
    let sel = json(&full.join("selection.json"));
    let best = sel["best_index"].as_u64().unwrap() as usize;
    let rows: Vec<String> = read(&full.join("sweep.csv")).lines().skip(1).map(String::from).collect();
    let pnc: Vec<f64> = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(pnc.iter().all(|&v| v >= pnc[best]));
}

#[test]
fn eval_accuracy_grv_and_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let n = 300;
    let y: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let emb: String = std::iter::once(format!("{n} 3\n"))
        .chain(y.iter().map(|&c| {
            let row: Vec<&str> = (0..3).map(|k| if k == c { "1" } else { "0" }).collect();
            row.join(" ") + "\n"
        }))
        .collect();
    let (h, l) = (tmp.path().join("h.txt"), tmp.path().join("y.txt"));
    fs::write(&h, emb).unwrap();
    fs::write(&l, y.iter().map(|c| format!("{c}\n")).collect::<String>()).unwrap();
    let out = tmp.path().join("rep");
    ok(&["eval", "--embeddings", s(&h), "--labels", s(&l), "--accuracy", "--nmi", "--out", s(&out)]);
    let rep = json(&out.join("report.json"));
    assert_eq!(rep["accuracy"].as_f64(), Some(1.0));
    assert_eq!(rep["nmi"].as_f64(), Some(1.0));

    let err = fails(&["eval", "--embeddings", s(&h), "--accuracy"]);
    assert!(err.contains("--labels"), "{err}");
    fails(&["eval"]);

    let data = tmp.path().join("g");
    two_cliques(&data, 5);
    let mut args = vec![
        "eval", "--clean", s(&data), "--poisoned", s(&data), "--epochs", "2", "--mi-samples", "3", "--data", s(&data),
    ];
    args.extend_from_slice(&TINY);
    let stdout = String::from_utf8(ok(&args).stdout).unwrap();
    let rep: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(rep["grv"].as_f64(), Some(0.0));
    assert_eq!(rep["h_y_before"].as_f64(), Some(1.0));
    fails(&["eval", "--clean", s(&data)]);
}

#[test]
fn gradcheck_passes() {
    let out = ok(&["gradcheck"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("gradcheck passed"), "{text}");
    assert_eq!(text.lines().filter(|l| l.ends_with(" ok")).count(), 7);
    assert!(!gchs(&["gradcheck", "--tol", "0"]).status.success());
}
