// SPDX-License-Identifier: Apache-2.0

use fraudbench::attack::{roc_curve, run_attack_trials, AttackSpec, EdgeFamily, ServerMode};
use fraudbench::detectors::{builtin_suite, DetectorKind, DetectorSpec};
use fraudbench::dp::BudgetLedger;
use fraudbench::graph::{load_graph, sample_sbm, write_graph, Metadata, SbmParams};
use fraudbench::harness::{run_decomposition, ExperimentConfig};
use fraudbench::metrics::Leaderboard;
use fraudbench::pda::{pda_top1, Accuracy, PdaConfig};
use fraudbench::rng::rng_from_seed;
use rand::Rng;

fn sbm(nf: usize, nb: usize, pf: f64, pb: f64, px: f64) -> SbmParams {
    SbmParams {
        n_fraud: nf,
        n_benign: nb,
        p_fraud: pf,
        p_benign: pb,
        p_cross: px,
    }
}

#[test]
fn graph_files_round_trip() {
    let g = sample_sbm(&sbm(15, 60, 0.4, 0.05, 0.02), 3).unwrap();
    let mut rng = rng_from_seed(1);
    let rows = (0..g.len())
        .map(|_| vec![rng.gen::<f64>(), -rng.gen::<f64>() * 1e-7])
        .collect();
    let g = g.with_metadata(Metadata::from_rows(rows).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (e, l, m) = (
        dir.path().join("e.txt"),
        dir.path().join("l.csv"),
        dir.path().join("m.csv"),
    );
    write_graph(&g, &e, &l, Some(&m)).unwrap();
    assert_eq!(load_graph(&e, &l, Some(&m)).unwrap(), g);
}

const N_BENIGN: usize = 400;

/// Attack AUC and its standard error (Hanley and McNeil).
fn attack_auc(epsilon: f64, seed: u64) -> (f64, f64) {
    let family = EdgeFamily::between_first_benign(sbm(40, N_BENIGN, 0.25, 0.0125, 0.0));
    let spec = AttackSpec::new(
        DetectorSpec::new("degree", DetectorKind::Degree),
        family.query(),
        0.7,
    );
    let server = ServerMode::Pda {
        k: 2,
        rho: 0.5,
        epsilon,
    };
    let n = 150;
    let trials = run_attack_trials(&server, &family, &spec, n, n, seed).unwrap();
    let a = roc_curve(&trials).unwrap().auc;
    let (q1, q2) = (a / (2.0 - a), 2.0 * a * a / (1.0 + a));
    let nf = n as f64;
    let var = (a * (1.0 - a) + (nf - 1.0) * (q1 - a * a) + (nf - 1.0) * (q2 - a * a)) / (nf * nf);
    (a, var.max(0.0).sqrt())
}

#[test]
fn attack_weakens_as_privacy_grows() {
    let (weak, mid, strong) = (attack_auc(100.0, 1), attack_auc(1.0, 2), attack_auc(0.1, 3));
    // The edge only changes the release when both endpoints land in the
    // same benign part; otherwise positives look exactly like negatives.
    let half = N_BENIGN as f64 / 2.0;
    let share = (half - 1.0) / (N_BENIGN as f64 - 1.0);
    let ceiling = 0.5 + share / 2.0;
    let z = 2.33;
    assert!(
        weak.0 <= ceiling + z * weak.1,
        "eps 100: {weak:?}, ceiling {ceiling}"
    );
    assert!(
        weak.0 - strong.0 > z * weak.1.hypot(strong.1),
        "{weak:?} vs {strong:?}"
    );
    assert!(
        weak.0 - mid.0 > -z * weak.1.hypot(mid.1),
        "{weak:?} vs {mid:?}"
    );
    assert!(
        mid.0 - strong.0 > -z * mid.1.hypot(strong.1),
        "{mid:?} vs {strong:?}"
    );
}

#[test]
fn top1_with_huge_budget_returns_best_partition_mean() {
    let g = sample_sbm(&sbm(30, 600, 0.3, 0.01, 0.005), 5).unwrap();
    let detectors = builtin_suite();
    for seed in 0..3 {
        let config = PdaConfig::new(5, 0.5, 1e12);
        let mut ledger = BudgetLedger::new(1e12).unwrap();
        let (winner, means) =
            pda_top1(&detectors, &g, &config, Accuracy::Auc, &mut ledger, seed).unwrap();
        let best = Leaderboard::new(&means, false).unwrap();
        assert_eq!(Some(winner.as_str()), best.winner());
        assert_eq!(ledger.entries().len(), 1);
    }
}

#[test]
fn sbm_synthesis_beats_agm_triangles_on_dense_sbm() {
    let config = ExperimentConfig::parse(
        "graph.n_fraud = 40\n\
         graph.n_benign = 400\n\
         graph.p_fraud = 0.4\n\
         graph.p_benign = 0.08\n\
         graph.p_cross = 0.03\n\
         detectors = degree, neg_degree, neg_clustering, svd_error_sum(5), random(1)\n\
         mode = leaderboard\n\
         epsilon = 5\n\
         trials = 10\n\
         seed = 2\n\
         run = decomposition\n\
         decomposition.mechanisms = sbm, agm_triangles\n",
    )
    .unwrap();
    let rows = run_decomposition(&config).unwrap();
    let (sbm_row, agm_row) = (&rows[0], &rows[1]);
    assert_eq!(sbm_row.mechanism, "sbm");
    assert!(sbm_row.noisy_mean <= agm_row.noisy_mean, "{rows:?}");
}
