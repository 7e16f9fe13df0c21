// SPDX-License-Identifier: Apache-2.0

//! Detector accuracy and release-error metrics.
//!
//! [`auc`] uses the strict indicator `score(fraud) > score(benign)`; tied
//! pairs contribute 0, not the usual 1/2. A detector that scores every
//! vertex equally therefore has AUC 0.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detectors::ScoreVector;
use crate::graph::LabeledGraph;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("graph has no fraud vertices")]
    NoFraud,
    #[error("graph has no benign vertices")]
    NoBenign,
    #[error("{scores} scores for {vertices} vertices")]
    LengthMismatch { scores: usize, vertices: usize },
    #[error("non-finite score at vertex {0}")]
    NonFinite(usize),
    #[error("unknown detector `{0}`")]
    UnknownDetector(String),
    #[error("detector sets differ")]
    MismatchedDetectors,
    #[error("need at least {0} detectors")]
    TooFewDetectors(usize),
    #[error("non-finite value for detector `{0}`")]
    NonFiniteValue(String),
}

pub type MetricsResult<T> = std::result::Result<T, MetricsError>;

fn check_scores(scores: &[f64], fraud: &[bool]) -> MetricsResult<()> {
    if scores.len() != fraud.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            vertices: fraud.len(),
        });
    }
    if let Some(v) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFinite(v));
    }
    Ok(())
}

/// Strict-inequality AUC over raw score and label slices.
pub fn auc_from_labels(scores: &[f64], fraud: &[bool]) -> MetricsResult<f64> {
    check_scores(scores, fraud)?;
    let mut benign: Vec<f64> = Vec::new();
    let mut fraud_scores: Vec<f64> = Vec::new();
    for (&s, &f) in scores.iter().zip(fraud) {
        if f {
            fraud_scores.push(s);
        } else {
            benign.push(s);
        }
    }
    if fraud_scores.is_empty() {
        return Err(MetricsError::NoFraud);
    }
    if benign.is_empty() {
        return Err(MetricsError::NoBenign);
    }
    benign.sort_by(f64::total_cmp);
    let wins: u64 = fraud_scores
        .iter()
        .map(|&s| benign.partition_point(|&b| b < s) as u64)
        .sum();
    Ok(wins as f64 / (fraud_scores.len() as f64 * benign.len() as f64))
}

/// Probability that a random fraud vertex scores strictly above a random
/// benign vertex.
pub fn auc(scores: &ScoreVector, graph: &LabeledGraph) -> MetricsResult<f64> {
    auc_from_labels(scores.as_slice(), graph.labels())
}

/// Best F1 over thresholds "fraud iff score >= t", t ranging over the
/// distinct observed scores.
pub fn f1_from_labels(scores: &[f64], fraud: &[bool]) -> MetricsResult<f64> {
    check_scores(scores, fraud)?;
    let n_fraud = fraud.iter().filter(|&&f| f).count();
    if n_fraud == 0 {
        return Err(MetricsError::NoFraud);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp, mut best) = (0usize, 0usize, 0.0f64);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if fraud[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let fn_ = n_fraud - tp;
        let f1 = (2 * tp) as f64 / (2 * tp + fp + fn_) as f64;
        best = best.max(f1);
    }
    Ok(best)
}

pub fn f1_best_threshold(scores: &ScoreVector, graph: &LabeledGraph) -> MetricsResult<f64> {
    f1_from_labels(scores.as_slice(), graph.labels())
}

pub fn l1_error(true_value: f64, noisy_value: f64) -> f64 {
    (true_value - noisy_value).abs()
}

/// Mean L1 error over `(true, noisy)` pairs; `None` when empty.
pub fn mean_l1_error(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    Some(pairs.iter().map(|&(t, n)| l1_error(t, n)).sum::<f64>() / pairs.len() as f64)
}

/// True AUC of the true best detector minus true AUC of the released one.
pub fn top1_error(true_aucs: &BTreeMap<String, f64>, released_best: &str) -> MetricsResult<f64> {
    let released = *true_aucs
        .get(released_best)
        .ok_or_else(|| MetricsError::UnknownDetector(released_best.to_string()))?;
    let best = true_aucs
        .values()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best - released)
}

/// Detectors ordered by value, descending, ties broken by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    entries: Vec<(String, f64)>,
    noisy: bool,
}

fn by_value_then_name(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

impl Leaderboard {
    pub fn new(values: &BTreeMap<String, f64>, noisy: bool) -> MetricsResult<Self> {
        if let Some((name, _)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(MetricsError::NonFiniteValue(name.clone()));
        }
        let mut entries: Vec<(String, f64)> = values.iter().map(|(k, &v)| (k.clone(), v)).collect();
        entries.sort_by(by_value_then_name);
        Ok(Self { entries, noisy })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn is_noisy(&self) -> bool {
        self.noisy
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn winner(&self) -> Option<&str> {
        self.entries.first().map(|(n, _)| n.as_str())
    }

    /// 0-based position of `name`.
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }
}

fn true_order(true_aucs: &BTreeMap<String, f64>) -> Vec<(String, f64)> {
    let mut order: Vec<(String, f64)> = true_aucs.iter().map(|(k, &v)| (k.clone(), v)).collect();
    order.sort_by(by_value_then_name);
    order
}

/// Inversions between the true and noisy rankings, each weighted by the
/// true AUC gap of the swapped pair.
pub fn weighted_kendall_tau(
    true_aucs: &BTreeMap<String, f64>,
    noisy: &Leaderboard,
) -> MetricsResult<f64> {
    let true_names: BTreeSet<&str> = true_aucs.keys().map(String::as_str).collect();
    let noisy_names: BTreeSet<&str> = noisy.names().collect();
    if true_names != noisy_names || noisy_names.len() != noisy.entries().len() {
        return Err(MetricsError::MismatchedDetectors);
    }
    let order = true_order(true_aucs);
    let noisy_rank: Vec<usize> = order
        .iter()
        .map(|(n, _)| noisy.rank_of(n).expect("checked above"))
        .collect();
    let mut total = 0.0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if noisy_rank[i] > noisy_rank[j] {
                total += order[i].1 - order[j].1;
            }
        }
    }
    Ok(total)
}

/// Expected weighted Kendall-Tau distance between the true ranking and a
/// uniformly random permutation: every pair is inverted with probability 1/2.
pub fn random_permutation_baseline(true_aucs: &BTreeMap<String, f64>) -> MetricsResult<f64> {
    if true_aucs.len() < 2 {
        return Err(MetricsError::TooFewDetectors(2));
    }
    let order = true_order(true_aucs);
    let mut total = 0.0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            total += order[i].1 - order[j].1;
        }
    }
    Ok(total / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(scores: &[f64], fraud: &[bool]) -> f64 {
        let (mut wins, mut nf, mut nb) = (0u64, 0u64, 0u64);
        for (i, &fi) in fraud.iter().enumerate() {
            if fi {
                nf += 1;
            } else {
                nb += 1;
            }
            if !fi {
                continue;
            }
            for (j, &fj) in fraud.iter().enumerate() {
                if !fj && scores[i] > scores[j] {
                    wins += 1;
                }
            }
        }
        wins as f64 / (nf as f64 * nb as f64)
    }

    fn brute_f1(scores: &[f64], fraud: &[bool]) -> f64 {
        let mut thresholds = scores.to_vec();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let nf = fraud.iter().filter(|&&f| f).count();
        thresholds
            .iter()
            .map(|&t| {
                let tp = (0..scores.len())
                    .filter(|&v| fraud[v] && scores[v] >= t)
                    .count();
                let fp = (0..scores.len())
                    .filter(|&v| !fraud[v] && scores[v] >= t)
                    .count();
                (2 * tp) as f64 / (2 * tp + fp + (nf - tp)) as f64
            })
            .fold(0.0, f64::max)
    }

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn auc_examples() {
        let fraud = [true, true, false, false, false];
        assert_eq!(auc_from_labels(&[1.0, 1.0, 0.0, 0.0, 0.0], &fraud), Ok(1.0));
        assert_eq!(auc_from_labels(&[0.3; 5], &fraud), Ok(0.0));
        let scores = [0.9, 0.1, 0.4, 0.4, 0.7, 0.2];
        let fraud = [true, false, true, false, false, true];
        assert_eq!(
            auc_from_labels(&scores, &fraud).unwrap(),
            brute_auc(&scores, &fraud)
        );
    }

    #[test]
    fn auc_errors() {
        assert_eq!(
            auc_from_labels(&[1.0, 2.0], &[false, false]),
            Err(MetricsError::NoFraud)
        );
        assert_eq!(
            auc_from_labels(&[1.0, 2.0], &[true, true]),
            Err(MetricsError::NoBenign)
        );
        assert!(matches!(
            auc_from_labels(&[1.0], &[true, false]),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert_eq!(
            auc_from_labels(&[f64::NAN, 0.0], &[true, false]),
            Err(MetricsError::NonFinite(0))
        );
    }

    #[test]
    fn f1_examples() {
        assert_eq!(
            f1_from_labels(&[0.9, 0.8, 0.1], &[true, true, false]),
            Ok(1.0)
        );
        assert_eq!(
            f1_from_labels(&[0.3, 0.9, 0.1], &[true, true, true]),
            Ok(1.0)
        );
        let scores = [0.5, 0.2, 0.9, 0.2, 0.6];
        let fraud = [true, false, false, true, false];
        assert_eq!(
            f1_from_labels(&scores, &fraud).unwrap(),
            brute_f1(&scores, &fraud)
        );
        assert_eq!(f1_from_labels(&[0.1], &[false]), Err(MetricsError::NoFraud));
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_error(0.7, 0.7), 0.0);
        assert!((l1_error(0.9, 0.4) - 0.5).abs() < 1e-15);
        // (0.1 + 0.2 + 0.3) / 3
        let m = mean_l1_error(&[(0.5, 0.4), (0.5, 0.7), (0.2, 0.5)]).unwrap();
        assert!((m - 0.2).abs() < 1e-12);
        assert_eq!(mean_l1_error(&[]), None);
    }

    #[test]
    fn top1_examples() {
        let aucs = map(&[("A", 0.9), ("B", 0.7)]);
        assert_eq!(top1_error(&aucs, "A"), Ok(0.0));
        assert!((top1_error(&aucs, "B").unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(
            top1_error(&aucs, "C"),
            Err(MetricsError::UnknownDetector("C".into()))
        );
    }

    #[test]
    fn top1_matches_direct_formula() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(4);
        for _ in 0..50 {
            let aucs: BTreeMap<String, f64> = (0..10)
                .map(|i| (format!("d{i}"), rng.gen::<f64>()))
                .collect();
            let pick = format!("d{}", rng.gen_range(0..10));
            let max = aucs.values().cloned().fold(f64::MIN, f64::max);
            assert_eq!(top1_error(&aucs, &pick).unwrap(), max - aucs[&pick]);
        }
    }

    #[test]
    fn leaderboard_sorts_with_name_tiebreak() {
        let lb = Leaderboard::new(&map(&[("b", 0.5), ("a", 0.5), ("c", 0.9)]), true).unwrap();
        assert_eq!(lb.names().collect::<Vec<_>>(), vec!["c", "a", "b"]);
        assert_eq!(lb.winner(), Some("c"));
        assert!(Leaderboard::new(&map(&[("a", f64::NAN)]), false).is_err());
    }

    #[test]
    fn kendall_tau_examples() {
        let aucs = map(&[("A", 0.9), ("B", 0.7), ("C", 0.5)]);
        let same = Leaderboard::new(&aucs, false).unwrap();
        assert_eq!(weighted_kendall_tau(&aucs, &same), Ok(0.0));
        let swapped = Leaderboard::new(&map(&[("B", 3.0), ("A", 2.0), ("C", 1.0)]), true).unwrap();
        assert!((weighted_kendall_tau(&aucs, &swapped).unwrap() - 0.2).abs() < 1e-12);
        let other = Leaderboard::new(&map(&[("A", 1.0), ("B", 0.0)]), true).unwrap();
        assert_eq!(
            weighted_kendall_tau(&aucs, &other),
            Err(MetricsError::MismatchedDetectors)
        );
    }

    #[test]
    fn baseline_examples() {
        let b = random_permutation_baseline(&map(&[("A", 0.8), ("B", 0.4)])).unwrap();
        assert!((b - 0.2).abs() < 1e-12);
        assert_eq!(
            random_permutation_baseline(&map(&[("A", 0.6), ("B", 0.6), ("C", 0.6)])),
            Ok(0.0)
        );
        assert!(random_permutation_baseline(&map(&[("A", 0.6)])).is_err());
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..50).prop_flat_map(|n| {
            (
                prop::collection::vec((0u8..6).prop_map(|x| f64::from(x) / 5.0), n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn sort_auc_equals_brute_force((scores, fraud) in instance()) {
            prop_assume!(fraud.iter().any(|&f| f) && fraud.iter().any(|&f| !f));
            prop_assert_eq!(auc_from_labels(&scores, &fraud).unwrap(), brute_auc(&scores, &fraud));
        }

        #[test]
        fn f1_equals_threshold_scan((scores, fraud) in instance()) {
            prop_assume!(fraud.iter().any(|&f| f));
            prop_assert_eq!(f1_from_labels(&scores, &fraud).unwrap(), brute_f1(&scores, &fraud));
        }

        #[test]
        fn complement_identity((scores, fraud) in instance()) {
            prop_assume!(fraud.iter().any(|&f| f) && fraud.iter().any(|&f| !f));
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let sum = auc_from_labels(&scores, &fraud).unwrap() + auc_from_labels(&neg, &fraud).unwrap();
            let tied = (0..scores.len()).any(|i| fraud[i] && (0..scores.len()).any(|j| !fraud[j] && scores[i] == scores[j]));
            prop_assert!(sum <= 1.0 + 1e-12);
            prop_assert_eq!((sum - 1.0).abs() < 1e-12, !tied);
        }

        #[test]
        fn auc_invariant_under_monotone_maps((scores, fraud) in instance()) {
            prop_assume!(fraud.iter().any(|&f| f) && fraud.iter().any(|&f| !f));
            let mapped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            prop_assert_eq!(auc_from_labels(&scores, &fraud), auc_from_labels(&mapped, &fraud));
        }

        #[test]
        fn kendall_tau_zero_iff_sorted(values in prop::collection::vec(0u8..5, 2..7), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let aucs: BTreeMap<String, f64> = values.iter().enumerate()
                .map(|(i, &v)| (format!("d{i}"), f64::from(v) / 4.0)).collect();
            let mut names: Vec<String> = aucs.keys().cloned().collect();
            names.shuffle(&mut crate::rng::rng_from_seed(seed));
            let noisy: BTreeMap<String, f64> = names.iter().enumerate()
                .map(|(i, n)| (n.clone(), -(i as f64))).collect();
            let lb = Leaderboard::new(&noisy, true).unwrap();
            let tau = weighted_kendall_tau(&aucs, &lb).unwrap();
            let sorted = names.windows(2).all(|w| aucs[&w[0]] >= aucs[&w[1]]);
            prop_assert_eq!(tau == 0.0, sorted);
        }
    }
}
