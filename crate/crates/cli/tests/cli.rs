// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::Command;

fn fraudbench(args: &[&str], dir: &Path) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_fraudbench"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "fraudbench {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const CONFIG: &str = "\
graph.source = sbm_clique
graph.n_fraud = 10
graph.n_benign = 150
graph.p_fraud = 0.4
graph.p_benign = 0.03
graph.clique_size = 5
detectors = degree, neg_clustering, svd_error_sum(5)
mode = leaderboard
mechanism = synth
mechanism.method = agm_triangles
epsilon = 2
trials = 3
";

#[test]
fn experiment_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), CONFIG).unwrap();
    fraudbench(
        &["experiment", "run.cfg", "--seed", "11", "--out", "a.csv"],
        dir.path(),
    );
    fraudbench(
        &["experiment", "run.cfg", "--seed", "11", "--out", "b.csv"],
        dir.path(),
    );
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let la = std::fs::read(dir.path().join("a.csv.ledger.json")).unwrap();
    let lb = std::fs::read(dir.path().join("b.csv.ledger.json")).unwrap();
    assert_eq!(la, lb);

    fraudbench(
        &["experiment", "run.cfg", "--seed", "12", "--out", "c.csv"],
        dir.path(),
    );
    assert_ne!(a, std::fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn experiment_writes_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), CONFIG).unwrap();
    let text = fraudbench(&["experiment", "run.cfg"], dir.path());
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("trial,mechanism,mode,detector,value,noiseless_value,eps_charged,seed")
    );
    assert_eq!(lines.count(), 3 * 3);
}

#[test]
fn generated_graph_round_trips_through_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    fraudbench(
        &[
            "generate",
            "--n-fraud",
            "10",
            "--n-benign",
            "90",
            "--p-fraud",
            "0.5",
            "--p-benign",
            "0.05",
            "--seed",
            "4",
            "--out",
            "g",
        ],
        dir.path(),
    );
    let labels = std::fs::read_to_string(dir.path().join("g/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 1 + 100);
    let text = fraudbench(
        &[
            "evaluate",
            "--edges",
            "g/edges.txt",
            "--labels",
            "g/labels.csv",
            "--detectors",
            "degree, random(1)",
        ],
        dir.path(),
    );
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "rank,detector,auc");
    assert!(rows[1].starts_with("1,degree,"), "{text}");
}

#[test]
fn pda_top1_releases_only_a_name() {
    let dir = tempfile::tempdir().unwrap();
    let text = fraudbench(
        &[
            "pda",
            "--n-fraud",
            "10",
            "--n-benign",
            "100",
            "--k",
            "4",
            "--detectors",
            "degree,neg_degree",
            "--top1",
            "--epsilon",
            "1",
        ],
        dir.path(),
    );
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "winner,eps_charged");
    let (name, eps) = rows[1].split_once(',').unwrap();
    assert!(["degree", "neg_degree"].contains(&name));
    assert_eq!(eps, "1");
}

#[test]
fn attack_writes_roc_csv() {
    let dir = tempfile::tempdir().unwrap();
    fraudbench(
        &[
            "attack",
            "--n-fraud",
            "10",
            "--n-benign",
            "100",
            "--p-fraud",
            "0.5",
            "--p-benign",
            "0.02",
            "--positives",
            "5",
            "--negatives",
            "5",
            "--out",
            "roc.csv",
        ],
        dir.path(),
    );
    let roc = std::fs::read_to_string(dir.path().join("roc.csv")).unwrap();
    let mut lines = roc.lines();
    assert_eq!(lines.next(), Some("fpr,tpr,threshold"));
    assert_eq!(lines.next(), Some("0,0,inf"));
    assert_eq!(
        roc.lines().last().map(|l| l.starts_with("1,1,")),
        Some(true)
    );
}

#[test]
fn bad_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "graph.colour = red\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fraudbench"))
        .args(["experiment", "bad.cfg"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}
