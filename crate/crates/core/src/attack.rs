// SPDX-License-Identifier: Apache-2.0

//! The accuracy-encoding attack.
//!
//! The adversary submits a detector that is accurate when a secret yes/no
//! question about the graph holds and random otherwise. A high released
//! accuracy then reveals the answer. Here the question is whether a given
//! edge (or vertex) is present.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorKind, DetectorSpec, GraphQuery};
use crate::dp::BudgetLedger;
use crate::error::{Error, Result};
use crate::graph::{sample_sbm, LabeledGraph, SbmParams};
use crate::metrics::auc;
use crate::pda::{pda_release, Accuracy, PdaConfig};
use crate::rng::derive_seed;
use crate::synth::{synthesize, SynthConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub accurate: DetectorSpec,
    pub inaccurate: DetectorSpec,
    pub query: GraphQuery,
    /// Released values at or above this are read as "query true".
    pub threshold: f64,
}

impl AttackSpec {
    /// Attack with a random detector (seed 0) as the inaccurate branch.
    pub fn new(accurate: DetectorSpec, query: GraphQuery, threshold: f64) -> Self {
        Self {
            accurate,
            inaccurate: DetectorSpec::new("random", DetectorKind::Random { seed: 0 }),
            query,
            threshold,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.accurate == self.inaccurate {
            return Err(Error::Config(
                "accurate and inaccurate detectors must differ".into(),
            ));
        }
        self.accurate.validate()?;
        self.inaccurate.validate()?;
        Ok(())
    }

    pub fn decide(&self, released: f64) -> bool {
        released >= self.threshold
    }
}

/// The detector the adversary submits: accurate iff the query holds on the
/// graph it is run on.
pub fn make_attack_detector(spec: &AttackSpec) -> Result<DetectorSpec> {
    spec.validate()?;
    Ok(DetectorSpec::new(
        format!("attack[{}|{}]", spec.accurate.name, spec.inaccurate.name),
        DetectorKind::Conditional {
            query: spec.query.clone(),
            if_true: Box::new(spec.accurate.clone()),
            if_false: Box::new(spec.inaccurate.clone()),
        },
    ))
}

/// How the benchmark server answers a submission.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerMode {
    /// Exact AUC on the private graph.
    Exact,
    /// Partition-Duplicate-Aggregate AUC.
    Pda { k: usize, rho: f64, epsilon: f64 },
    /// Exact AUC on a synthetic graph generated from the private one.
    Synthetic(SynthConfig),
}

/// SBM graphs with the edge `(u, v)` forced present or absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeFamily {
    pub params: SbmParams,
    pub u: String,
    pub v: String,
}

impl EdgeFamily {
    /// Target edge between the first two benign vertices.
    pub fn between_first_benign(params: SbmParams) -> Self {
        Self {
            params,
            u: "b0".into(),
            v: "b1".into(),
        }
    }

    pub fn query(&self) -> GraphQuery {
        GraphQuery::Edge {
            u: self.u.clone(),
            v: self.v.clone(),
        }
    }

    /// One graph with the target edge present iff `truth`.
    pub fn sample(&self, truth: bool, seed: u64) -> Result<LabeledGraph> {
        let g = sample_sbm(&self.params, seed)?;
        let (a, b) = match (g.index_of(&self.u), g.index_of(&self.v)) {
            (Some(a), Some(b)) if a != b => (a, b),
            _ => {
                return Err(Error::Config(format!(
                    "target ({}, {}) is not a pair of distinct vertices",
                    self.u, self.v
                )))
            }
        };
        let edges = g
            .edges()
            .filter(|&(x, y)| (x, y) != (a.min(b), a.max(b)))
            .chain(truth.then_some((a, b)));
        Ok(g.with_edges(edges.collect::<Vec<_>>())?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackTrial {
    pub truth: bool,
    pub released: f64,
}

/// Released accuracy of `detector` on `graph` under `server`.
pub fn serve(
    server: &ServerMode,
    detector: &DetectorSpec,
    graph: &LabeledGraph,
    seed: u64,
) -> Result<f64> {
    match *server {
        ServerMode::Exact => Ok(auc(&detector.score(graph)?, graph)?),
        ServerMode::Pda { k, rho, epsilon } => {
            let config = PdaConfig::new(k, rho, epsilon);
            let mut ledger = BudgetLedger::new(epsilon)?;
            Ok(pda_release(detector, graph, &config, Accuracy::Auc, &mut ledger, seed)?.value)
        }
        ServerMode::Synthetic(config) => {
            let synthetic = synthesize(graph, &config, seed)?.graph;
            Ok(auc(&detector.score(&synthetic)?, &synthetic)?)
        }
    }
}

/// Runs `n_positive` trials with the target edge present and `n_negative`
/// with it absent, each on a fresh graph. Positives come first in the
/// output. Trial `i` of class `c` uses seed `derive_seed(seed, [c, i])`.
pub fn run_attack_trials(
    server: &ServerMode,
    family: &EdgeFamily,
    spec: &AttackSpec,
    n_positive: usize,
    n_negative: usize,
    seed: u64,
) -> Result<Vec<AttackTrial>> {
    let detector = make_attack_detector(spec)?;
    let jobs: Vec<(bool, u64)> = (0..n_positive as u64)
        .map(|i| (true, i))
        .chain((0..n_negative as u64).map(|i| (false, i)))
        .collect();
    jobs.par_iter()
        .map(|&(truth, i)| {
            let trial_seed = derive_seed(seed, &[u64::from(!truth), i]);
            let graph = family.sample(truth, derive_seed(trial_seed, &[0]))?;
            let released = serve(server, &detector, &graph, derive_seed(trial_seed, &[1]))?;
            Ok(AttackTrial { truth, released })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Roc {
    pub points: Vec<RocPoint>,
    /// Area under the curve, ties counted as one half.
    pub auc: f64,
}

impl Roc {
    /// Largest TPR reached without any false positive.
    pub fn tpr_at_zero_fpr(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| p.fpr == 0.0)
            .map(|p| p.tpr)
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fpr", "tpr", "threshold"])
            .map_err(|e| Error::Io(e.into()))?;
        for p in &self.points {
            w.write_record([
                p.fpr.to_string(),
                p.tpr.to_string(),
                p.threshold.to_string(),
            ])
            .map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Threshold sweep "predict true iff released >= t" over the distinct
/// released values, starting from `t = +inf` at (0, 0).
pub fn roc_curve(trials: &[AttackTrial]) -> Result<Roc> {
    let pos = trials.iter().filter(|t| t.truth).count();
    let neg = trials.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidInput("ROC needs both classes".into()));
    }
    if trials.iter().any(|t| !t.released.is_finite()) {
        return Err(Error::InvalidInput("non-finite released value".into()));
    }
    let mut sorted: Vec<&AttackTrial> = trials.iter().collect();
    sorted.sort_by(|a, b| b.released.total_cmp(&a.released));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].released;
        let (tp0, fp0) = (tp, fp);
        while i < sorted.len() && sorted[i].released == t {
            if sorted[i].truth {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // Trapezoid over a tie block gives each tied pair half credit.
        area += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: t,
        });
    }
    Ok(Roc {
        points,
        auc: area / (pos * neg) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SynthMethod;

    fn small_family() -> EdgeFamily {
        EdgeFamily::between_first_benign(SbmParams {
            n_fraud: 20,
            n_benign: 200,
            p_fraud: 0.5,
            p_benign: 0.02,
            p_cross: 0.0,
        })
    }

    fn degree_attack(family: &EdgeFamily) -> AttackSpec {
        AttackSpec::new(
            DetectorSpec::new("degree", DetectorKind::Degree),
            family.query(),
            0.7,
        )
    }

    fn brute_half_credit(trials: &[AttackTrial]) -> f64 {
        let (mut s, mut n) = (0.0, 0.0);
        for p in trials.iter().filter(|t| t.truth) {
            for q in trials.iter().filter(|t| !t.truth) {
                n += 1.0;
                s += if p.released > q.released {
                    1.0
                } else if p.released == q.released {
                    0.5
                } else {
                    0.0
                };
            }
        }
        s / n
    }

    fn trial(truth: bool, released: f64) -> AttackTrial {
        AttackTrial { truth, released }
    }

    #[test]
    fn branch_follows_query() {
        let family = small_family();
        let spec = degree_attack(&family);
        let detector = make_attack_detector(&spec).unwrap();
        let with = family.sample(true, 3).unwrap();
        let without = family.sample(false, 3).unwrap();
        assert_eq!(
            detector.score(&with).unwrap(),
            spec.accurate.score(&with).unwrap()
        );
        assert_eq!(
            detector.score(&without).unwrap(),
            spec.inaccurate.score(&without).unwrap()
        );
        // The pair differs only in the target edge.
        let (a, b) = (with.index_of("b0").unwrap(), with.index_of("b1").unwrap());
        assert!(with.has_edge(a, b) && !without.has_edge(a, b));
        assert_eq!(with.edge_count(), without.edge_count() + 1);
    }

    #[test]
    fn identical_branches_are_rejected() {
        let family = small_family();
        let mut spec = degree_attack(&family);
        spec.inaccurate = spec.accurate.clone();
        assert!(make_attack_detector(&spec).is_err());
    }

    #[test]
    fn roc_examples() {
        let separated = [
            trial(true, 0.9),
            trial(true, 0.8),
            trial(false, 0.5),
            trial(false, 0.4),
        ];
        let roc = roc_curve(&separated).unwrap();
        assert_eq!(roc.auc, 1.0);
        assert_eq!(roc.tpr_at_zero_fpr(), 1.0);
        let tied = [trial(true, 0.5), trial(false, 0.5)];
        assert_eq!(roc_curve(&tied).unwrap().auc, 0.5);
        assert!(roc_curve(&[trial(true, 0.3)]).is_err());
        let mut buf = Vec::new();
        roc_curve(&tied).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "fpr,tpr,threshold\n0,0,inf\n1,1,0.5\n"
        );
    }

    #[test]
    fn roc_auc_matches_pair_count() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(8);
        for _ in 0..200 {
            let n = rng.gen_range(2..30);
            let mut trials: Vec<AttackTrial> = (0..n)
                .map(|_| trial(rng.gen::<bool>(), rng.gen_range(0..5) as f64))
                .collect();
            trials.push(trial(true, 1.0));
            trials.push(trial(false, 1.0));
            let roc = roc_curve(&trials).unwrap();
            assert!((roc.auc - brute_half_credit(&trials)).abs() < 1e-12);
        }
    }

    #[test]
    fn no_positives_records_negatives_only() {
        let family = small_family();
        let trials = run_attack_trials(
            &ServerMode::Exact,
            &family,
            &degree_attack(&family),
            0,
            4,
            1,
        )
        .unwrap();
        assert_eq!(trials.len(), 4);
        assert!(trials.iter().all(|t| !t.truth));
    }

    #[test]
    fn exact_server_leaks_the_edge() {
        let family = small_family();
        let spec = degree_attack(&family);
        let trials = run_attack_trials(&ServerMode::Exact, &family, &spec, 30, 30, 2).unwrap();
        let roc = roc_curve(&trials).unwrap();
        assert_eq!(roc.auc, 1.0);
        assert!(trials.iter().all(|t| spec.decide(t.released) == t.truth));
    }

    #[test]
    fn equally_accurate_detectors_leak_nothing() {
        let family = small_family();
        let spec = AttackSpec {
            accurate: DetectorSpec::new("a", DetectorKind::Random { seed: 1 }),
            inaccurate: DetectorSpec::new("b", DetectorKind::Random { seed: 1 }),
            query: family.query(),
            threshold: 0.5,
        };
        let trials = run_attack_trials(&ServerMode::Exact, &family, &spec, 20, 20, 3).unwrap();
        assert_eq!(roc_curve(&trials).unwrap().auc, 0.5);
    }

    #[test]
    fn synthetic_server_runs() {
        let family = small_family();
        let spec = degree_attack(&family);
        let server = ServerMode::Synthetic(SynthConfig::new(SynthMethod::Sbm, 1.0, 1.0));
        let trials = run_attack_trials(&server, &family, &spec, 3, 3, 4).unwrap();
        assert_eq!(trials.len(), 6);
        assert!(trials.iter().all(|t| (0.0..=1.0).contains(&t.released)));
    }

    #[test]
    fn trials_are_reproducible() {
        let family = small_family();
        let spec = degree_attack(&family);
        let server = ServerMode::Pda {
            k: 2,
            rho: 0.5,
            epsilon: 1.0,
        };
        assert_eq!(
            run_attack_trials(&server, &family, &spec, 5, 5, 9).unwrap(),
            run_attack_trials(&server, &family, &spec, 5, 5, 9).unwrap()
        );
    }
}
