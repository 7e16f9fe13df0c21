// SPDX-License-Identifier: Apache-2.0

//! Partition-Duplicate-Aggregate.
//!
//! Benign vertices are split into `k` disjoint parts; each part is joined by
//! its own random subset of the fraud vertices. The detector is scored on
//! every induced part and the mean accuracy is released with
//! Laplace(1/(k eps)) noise. Rewiring one benign vertex touches a single
//! part, so the mean moves by at most 1/k.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::detectors::{DetectorKind, DetectorSpec, ScoreVector};
use crate::dp::{report_noisy_argmax, sample_laplace, BudgetLedger};
use crate::error::{Error, Result};
use crate::graph::{sample_sbm, LabeledGraph, SbmParams};
use crate::metrics::{auc, f1_best_threshold, MetricsResult};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdaConfig {
    pub k: usize,
    pub rho: f64,
    pub epsilon: f64,
    pub noise_enabled: bool,
}

impl PdaConfig {
    pub fn new(k: usize, rho: f64, epsilon: f64) -> Self {
        Self {
            k,
            rho,
            epsilon,
            noise_enabled: true,
        }
    }

    pub fn without_noise(self) -> Self {
        Self {
            noise_enabled: false,
            ..self
        }
    }

    pub fn validate(&self, n_fraud: usize, n_benign: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k = {} must be at least 2", self.k)));
        }
        if self.k > n_benign {
            return Err(Error::Config(format!(
                "k = {} exceeds {n_benign} benign vertices",
                self.k
            )));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Config(format!(
                "rho = {} is outside (0, 1]",
                self.rho
            )));
        }
        if self.noise_enabled && !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if n_fraud == 0 {
            return Err(Error::InvalidInput("graph has no fraud vertices".into()));
        }
        Ok(())
    }

    /// Laplace scale of the released mean.
    pub fn noise_scale(&self) -> f64 {
        1.0 / (self.k as f64 * self.epsilon)
    }
}

/// `round(rho * n_fraud)`, at least 1.
pub fn fraud_subset_size(rho: f64, n_fraud: usize) -> usize {
    ((rho * n_fraud as f64).round() as usize).clamp(1, n_fraud.max(1))
}

/// Benign vertex sets and fraud subsets of each part, as sorted vertex
/// indices of `graph`. Depends only on the vertex labels and the seed, never
/// on the edges.
pub fn partition_assignment(
    graph: &LabeledGraph,
    config: &PdaConfig,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    config.validate(graph.n_fraud(), graph.n_benign())?;
    let mut rng = rng_from_seed(seed);
    let mut benign = graph.benign_vertices();
    benign.shuffle(&mut rng);
    let fraud = graph.fraud_vertices();
    let m = fraud_subset_size(config.rho, fraud.len());
    let (base, extra) = (benign.len() / config.k, benign.len() % config.k);
    let mut start = 0;
    let mut parts = Vec::with_capacity(config.k);
    for i in 0..config.k {
        let size = base + usize::from(i < extra);
        let mut b = benign[start..start + size].to_vec();
        start += size;
        b.sort_unstable();
        let mut f: Vec<usize> = index::sample(&mut rng, fraud.len(), m)
            .into_iter()
            .map(|j| fraud[j])
            .collect();
        f.sort_unstable();
        parts.push((b, f));
    }
    Ok(parts)
}

/// The `k` induced subgraphs of Partition-Duplicate.
pub fn partition_duplicate(
    graph: &LabeledGraph,
    config: &PdaConfig,
    seed: u64,
) -> Result<Vec<LabeledGraph>> {
    Ok(partition_assignment(graph, config, seed)?
        .into_iter()
        .map(|(b, f)| {
            let mut keep = b;
            keep.extend(f);
            keep.sort_unstable();
            graph.induced_subgraph(&keep)
        })
        .collect())
}

/// Accuracy statistic with range [0, 1].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accuracy {
    #[default]
    Auc,
    F1,
}

impl Accuracy {
    pub fn evaluate(self, scores: &ScoreVector, graph: &LabeledGraph) -> MetricsResult<f64> {
        match self {
            Accuracy::Auc => auc(scores, graph),
            Accuracy::F1 => f1_best_threshold(scores, graph),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Accuracy::Auc => "auc",
            Accuracy::F1 => "f1",
        }
    }
}

/// Accuracy of `detector` on the whole graph.
pub fn full_accuracy(
    detector: &DetectorSpec,
    graph: &LabeledGraph,
    accuracy: Accuracy,
) -> Result<f64> {
    let scores = detector.score(graph)?;
    Ok(accuracy.evaluate(&scores, graph)?)
}

/// Per-part accuracies, in part order.
pub fn partition_accuracies(
    detector: &DetectorSpec,
    graph: &LabeledGraph,
    config: &PdaConfig,
    accuracy: Accuracy,
    seed: u64,
) -> Result<Vec<f64>> {
    partition_duplicate(graph, config, seed)?
        .par_iter()
        .map(|part| full_accuracy(detector, part, accuracy))
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdaRelease {
    /// Released value (partition mean plus noise when enabled).
    pub value: f64,
    pub partition_mean: f64,
    pub partition_values: Vec<f64>,
    pub noise_scale: f64,
    pub epsilon_charged: f64,
}

/// One run of Partition-Duplicate-Aggregate. Charges `config.epsilon` to
/// `ledger` when noise is enabled; nothing is charged on error.
pub fn pda_release(
    detector: &DetectorSpec,
    graph: &LabeledGraph,
    config: &PdaConfig,
    accuracy: Accuracy,
    ledger: &mut BudgetLedger,
    seed: u64,
) -> Result<PdaRelease> {
    let values = partition_accuracies(detector, graph, config, accuracy, derive_seed(seed, &[0]))?;
    let partition_mean = mean(&values);
    if !config.noise_enabled {
        return Ok(PdaRelease {
            value: partition_mean,
            partition_mean,
            partition_values: values,
            noise_scale: 0.0,
            epsilon_charged: 0.0,
        });
    }
    ledger.charge(format!("pda:{}", detector.name), config.epsilon, 0.0)?;
    let scale = config.noise_scale();
    let noise = sample_laplace(scale, &mut rng_from_seed(derive_seed(seed, &[1])))?;
    Ok(PdaRelease {
        value: partition_mean + noise,
        partition_mean,
        partition_values: values,
        noise_scale: scale,
        epsilon_charged: config.epsilon,
    })
}

/// Report Noisy Arg Max over the partition means of several detectors.
/// Returns the winner and the (unreleased) partition means. Charges
/// `config.epsilon` once when noise is enabled.
pub fn pda_top1(
    detectors: &[DetectorSpec],
    graph: &LabeledGraph,
    config: &PdaConfig,
    accuracy: Accuracy,
    ledger: &mut BudgetLedger,
    seed: u64,
) -> Result<(String, BTreeMap<String, f64>)> {
    let mut means = BTreeMap::new();
    for (i, d) in detectors.iter().enumerate() {
        let values = partition_accuracies(
            d,
            graph,
            config,
            accuracy,
            derive_seed(seed, &[0, i as u64]),
        )?;
        if means.insert(d.name.clone(), mean(&values)).is_some() {
            return Err(Error::Config(format!(
                "duplicate detector name `{}`",
                d.name
            )));
        }
    }
    let scale = if config.noise_enabled {
        ledger.charge("pda:top1", config.epsilon, 0.0)?;
        config.noise_scale()
    } else {
        0.0
    };
    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
    let winner = report_noisy_argmax(&means, scale, &mut rng)?;
    Ok((winner, means))
}

/// Normal approximation of the degree detector's AUC on an SBM graph:
/// `Phi(E / SD)` for the degree gap between a random fraud and a random
/// benign vertex. Accurate when both expected degrees are large.
pub fn expected_auc_sbm_degree(params: &SbmParams) -> Result<f64> {
    params.validate()?;
    let (nf, nb) = (params.n_fraud as f64, params.n_benign as f64);
    let (pf, pb) = (params.p_fraud, params.p_benign);
    let mean = (nf - 1.0) * pf - (nb - 1.0) * pb;
    let var = (nf - 1.0) * pf * (1.0 - pf) + (nb - 1.0) * pb * (1.0 - pb);
    if !(var > 0.0) {
        return Err(Error::InvalidInput("degree gap has zero variance".into()));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.cdf(mean / var.sqrt()))
}

/// The degree detector: score = degree.
pub fn degree_detector() -> DetectorSpec {
    DetectorSpec::new("degree", DetectorKind::Degree)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub rho: f64,
    pub mean_bias: f64,
    pub std_err: f64,
}

/// Noise-free bias of PDA for the degree detector on SBM graphs: for each
/// rho, the mean over `trials` graphs of (mean partition AUC - full AUC).
/// Every rho is evaluated on the same graphs.
pub fn bias_simulation(
    params: &SbmParams,
    k: usize,
    rho_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<BiasRow>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let detector = degree_detector();
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = sample_sbm(params, derive_seed(seed, &[t, 0]))?;
            let full = full_accuracy(&detector, &g, Accuracy::Auc)?;
            rho_grid
                .iter()
                .enumerate()
                .map(|(j, &rho)| {
                    let config = PdaConfig::new(k, rho, 1.0).without_noise();
                    let parts = partition_accuracies(
                        &detector,
                        &g,
                        &config,
                        Accuracy::Auc,
                        derive_seed(seed, &[t, 1 + j as u64]),
                    )?;
                    Ok(mean(&parts) - full)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rho_grid
        .iter()
        .enumerate()
        .map(|(j, &rho)| {
            let xs: Vec<f64> = per_trial.iter().map(|row| row[j]).collect();
            let m = mean(&xs);
            let std_err = if xs.len() > 1 {
                let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
                (var / xs.len() as f64).sqrt()
            } else {
                0.0
            };
            BiasRow {
                rho,
                mean_bias: m,
                std_err,
            }
        })
        .collect())
}

/// First rho at which the bias changes sign from negative to non-negative,
/// by linear interpolation between grid points. Rows must be sorted by rho.
pub fn zero_crossing(rows: &[BiasRow]) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        (a.mean_bias < 0.0 && b.mean_bias >= 0.0)
            .then(|| a.rho + (b.rho - a.rho) * (-a.mean_bias) / (b.mean_bias - a.mean_bias))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Metadata;
    use std::collections::BTreeSet;

    fn sbm(nf: usize, nb: usize, pf: f64, pb: f64, px: f64) -> SbmParams {
        SbmParams {
            n_fraud: nf,
            n_benign: nb,
            p_fraud: pf,
            p_benign: pb,
            p_cross: px,
        }
    }

    fn with_metadata(g: LabeledGraph, seed: u64) -> LabeledGraph {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let rows = (0..g.len())
            .map(|v| vec![rng.gen::<f64>() + if g.is_fraud(v) { 0.3 } else { 0.0 }])
            .collect();
        g.with_metadata(Metadata::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn subset_size_rounds_with_floor_of_one() {
        assert_eq!(fraud_subset_size(0.5, 5), 3);
        assert_eq!(fraud_subset_size(0.01, 10), 1);
        assert_eq!(fraud_subset_size(1.0, 7), 7);
        assert_eq!(fraud_subset_size(0.3, 100), 30);
    }

    #[test]
    fn rho_one_duplicates_all_fraud() {
        let g = sample_sbm(&sbm(6, 30, 0.5, 0.1, 0.1), 1).unwrap();
        let parts = partition_duplicate(&g, &PdaConfig::new(4, 1.0, 1.0), 2).unwrap();
        for p in &parts {
            assert_eq!(p.n_fraud(), 6);
        }
    }

    #[test]
    fn two_parts_of_four_benign() {
        let g = sample_sbm(&sbm(1, 4, 0.0, 0.5, 0.5), 1).unwrap();
        let parts = partition_assignment(&g, &PdaConfig::new(2, 1.0, 1.0), 0).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0.len(), 2);
        assert_eq!(parts[1].0.len(), 2);
        let all: BTreeSet<usize> = parts.iter().flat_map(|p| p.0.clone()).collect();
        assert_eq!(all, g.benign_vertices().into_iter().collect());
    }

    #[test]
    fn parts_are_balanced_and_disjoint() {
        let g = sample_sbm(&sbm(10, 103, 0.3, 0.1, 0.05), 3).unwrap();
        let config = PdaConfig::new(10, 0.3, 1.0);
        let parts = partition_assignment(&g, &config, 9).unwrap();
        let mut seen = BTreeSet::new();
        for (b, f) in &parts {
            assert!(b.len() == 10 || b.len() == 11);
            assert_eq!(f.len(), 3);
            for v in b {
                assert!(seen.insert(*v));
            }
        }
        assert_eq!(seen.len(), 103);
        assert_eq!(parts.iter().filter(|p| p.0.len() == 11).count(), 3);
        assert!(parts[..3].iter().all(|p| p.0.len() == 11));
    }

    #[test]
    fn benign_edges_are_split_not_duplicated() {
        let g = sample_sbm(&sbm(5, 60, 0.5, 0.2, 0.1), 4).unwrap();
        let parts = partition_duplicate(&g, &PdaConfig::new(3, 0.6, 1.0), 5).unwrap();
        let mut seen = BTreeSet::new();
        for p in &parts {
            for (u, v) in p.edges() {
                if !p.is_fraud(u) && !p.is_fraud(v) {
                    let (a, b) = (g.index_of(p.id(u)).unwrap(), g.index_of(p.id(v)).unwrap());
                    assert!(g.has_edge(a, b));
                    assert!(seen.insert((a.min(b), a.max(b))));
                }
            }
        }
    }

    #[test]
    fn invalid_configs() {
        let g = sample_sbm(&sbm(2, 3, 0.0, 0.0, 0.0), 0).unwrap();
        assert!(partition_duplicate(&g, &PdaConfig::new(4, 0.5, 1.0), 0).is_err());
        assert!(partition_duplicate(&g, &PdaConfig::new(1, 0.5, 1.0), 0).is_err());
        assert!(partition_duplicate(&g, &PdaConfig::new(2, 0.0, 1.0), 0).is_err());
        let no_fraud = sample_sbm(&sbm(0, 10, 0.0, 0.0, 0.0), 0).unwrap();
        assert!(partition_duplicate(&no_fraud, &PdaConfig::new(2, 0.5, 1.0), 0).is_err());
    }

    #[test]
    fn rewiring_one_benign_vertex_changes_one_part() {
        let g = sample_sbm(&sbm(5, 40, 0.5, 0.15, 0.1), 6).unwrap();
        let v = g.benign_vertices()[7];
        let rewired: Vec<(usize, usize)> = g
            .edges()
            .filter(|&(a, b)| a != v && b != v)
            .chain(
                g.benign_vertices()
                    .into_iter()
                    .filter(|&w| w != v)
                    .take(5)
                    .map(|w| (v, w)),
            )
            .collect();
        let h = g.with_edges(rewired).unwrap();
        let config = PdaConfig::new(5, 0.6, 1.0);
        let (pg, ph) = (
            partition_duplicate(&g, &config, 11).unwrap(),
            partition_duplicate(&h, &config, 11).unwrap(),
        );
        let changed = pg.iter().zip(&ph).filter(|(a, b)| a != b).count();
        assert!(changed <= 1, "{changed} parts changed");
    }

    #[test]
    fn tabular_detector_is_exact_with_full_duplication() {
        let g = with_metadata(sample_sbm(&sbm(7, 40, 0.4, 0.1, 0.1), 2).unwrap(), 3);
        let d = DetectorSpec::new("meta", DetectorKind::MetadataLinear { weights: vec![1.0] });
        let full = full_accuracy(&d, &g, Accuracy::Auc).unwrap();
        for k in [2, 4, 5, 8] {
            let config = PdaConfig::new(k, 1.0, 1.0).without_noise();
            let mut ledger = BudgetLedger::new(1.0).unwrap();
            let r = pda_release(&d, &g, &config, Accuracy::Auc, &mut ledger, 1).unwrap();
            assert!(
                (r.value - full).abs() < 1e-12,
                "k={k}: {} vs {full}",
                r.value
            );
            assert!(ledger.entries().is_empty());
        }
    }

    #[test]
    fn release_charges_and_adds_noise() {
        let g = sample_sbm(&sbm(5, 40, 0.5, 0.1, 0.1), 2).unwrap();
        let d = degree_detector();
        let config = PdaConfig::new(4, 0.6, 2.0);
        let mut ledger = BudgetLedger::new(3.0).unwrap();
        let r = pda_release(&d, &g, &config, Accuracy::Auc, &mut ledger, 5).unwrap();
        assert_eq!(ledger.entries().len(), 1);
        assert_eq!(r.epsilon_charged, 2.0);
        assert_eq!(r.noise_scale, 1.0 / 8.0);
        assert_ne!(r.value, r.partition_mean);
        // Overdraft leaves the ledger untouched.
        assert!(pda_release(&d, &g, &config, Accuracy::Auc, &mut ledger, 6).is_err());
        assert_eq!(ledger.entries().len(), 1);
        // Huge epsilon: release equals the partition mean up to tiny noise.
        let config = PdaConfig::new(4, 0.6, 1e12);
        let mut ledger = BudgetLedger::new(1e12).unwrap();
        let r = pda_release(&d, &g, &config, Accuracy::Auc, &mut ledger, 5).unwrap();
        assert!((r.value - r.partition_mean).abs() < 1e-9);
    }

    #[test]
    fn noise_std_matches_laplace() {
        // Laplace(1/(k eps)) with k=20, eps=5 has std sqrt(2) * 0.01.
        let config = PdaConfig::new(20, 1.0, 5.0);
        let reps = 1000;
        let draws: Vec<f64> = (0..reps)
            .map(|i| {
                sample_laplace(
                    config.noise_scale(),
                    &mut rng_from_seed(derive_seed(i, &[1])),
                )
                .unwrap()
            })
            .collect();
        let m = mean(&draws);
        let sd = (draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        let target = 2f64.sqrt() * 0.01;
        assert!((sd - target).abs() < 0.1 * target, "{sd} vs {target}");
    }

    #[test]
    fn top1_without_noise_is_argmax_of_means() {
        let g = sample_sbm(&sbm(8, 60, 0.6, 0.05, 0.05), 3).unwrap();
        let detectors = vec![
            degree_detector(),
            DetectorSpec::new("neg_degree", DetectorKind::NegDegree),
            DetectorSpec::new("random", DetectorKind::Random { seed: 2 }),
        ];
        let config = PdaConfig::new(3, 0.5, 1.0).without_noise();
        let mut ledger = BudgetLedger::new(1.0).unwrap();
        let (winner, means) =
            pda_top1(&detectors, &g, &config, Accuracy::Auc, &mut ledger, 1).unwrap();
        let best = means
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(n, _)| n.clone())
            .unwrap();
        assert_eq!(winner, best);
        assert_eq!(winner, "degree");
        assert!(ledger.entries().is_empty());
        let mut ledger = BudgetLedger::new(1.0).unwrap();
        pda_top1(
            &detectors,
            &g,
            &PdaConfig::new(3, 0.5, 1.0),
            Accuracy::Auc,
            &mut ledger,
            1,
        )
        .unwrap();
        assert_eq!(ledger.entries().len(), 1);
        assert_eq!(ledger.spent_epsilon(), 1.0);
    }

    #[test]
    fn expected_auc_examples() {
        let symmetric = sbm(11, 11, 0.3, 0.3, 0.0);
        assert!((expected_auc_sbm_degree(&symmetric).unwrap() - 0.5).abs() < 1e-15);
        let p = sbm(100, 1000, 10.0 / 99.0, 5.0 / 999.0, 0.0);
        let (e, sd) = (
            10.0 - 5.0,
            (10.0_f64 * (1.0 - 10.0 / 99.0) + 5.0 * (1.0 - 5.0 / 999.0)).sqrt(),
        );
        let z: f64 = e / sd;
        let a = expected_auc_sbm_degree(&p).unwrap();
        // Independent evaluation of Phi via the complementary error function.
        let phi = 0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2);
        assert!((a - phi).abs() < 1e-12);
        assert!(a > 0.9 && a < 0.95, "{a}");
        assert!(expected_auc_sbm_degree(&sbm(5, 5, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn zero_crossing_interpolates() {
        let rows = [
            BiasRow {
                rho: 0.1,
                mean_bias: -0.2,
                std_err: 0.0,
            },
            BiasRow {
                rho: 0.3,
                mean_bias: -0.1,
                std_err: 0.0,
            },
            BiasRow {
                rho: 0.5,
                mean_bias: 0.1,
                std_err: 0.0,
            },
        ];
        assert!((zero_crossing(&rows).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(zero_crossing(&rows[..2]), None);
    }

    #[test]
    fn bias_signs_on_small_model() {
        let p = sbm(40, 400, 10.0 / 39.0, 5.0 / 399.0, 0.0);
        let rows = bias_simulation(&p, 10, &[0.1, 1.0], 20, 7).unwrap();
        assert!(rows[0].mean_bias < 0.0, "{rows:?}");
        assert!(rows[1].mean_bias > 0.0, "{rows:?}");
    }
}
