// SPDX-License-Identifier: Apache-2.0

//! Config-driven experiments over the three release modes.
//!
//! Trial `t` of an experiment with master seed `s` uses the seed
//! `derive_seed(s, [t])`, so a trial's output does not depend on how many
//! trials run or in which order. Each trial is an independent release with
//! its own budget of `epsilon`.

mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::DetectorSpec;
use crate::dp::BudgetLedger;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::metrics::{l1_error, top1_error, Leaderboard};
use crate::pda::{full_accuracy, partition_accuracies, pda_release, pda_top1, Accuracy, PdaConfig};
use crate::rng::derive_seed;
use crate::synth::{synthesize, SynthConfig};

pub use config::{parse_detectors, ExperimentConfig, GraphSource, Mechanism, Mode, RunKind};

/// Header of the release CSV.
pub const RELEASE_HEADER: [&str; 8] = [
    "trial",
    "mechanism",
    "mode",
    "detector",
    "value",
    "noiseless_value",
    "eps_charged",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorRelease {
    pub detector: String,
    /// Released value; `None` in top-1 records.
    pub value: Option<f64>,
    /// Same mechanism and seed with noise disabled; `None` in top-1 records.
    pub noiseless_value: Option<f64>,
    /// Budget consumed while producing this row.
    pub eps_charged: f64,
}

/// One privatized benchmark release.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReleaseRecord {
    pub trial: usize,
    pub seed: u64,
    pub mode: Mode,
    pub mechanism: String,
    pub rows: Vec<DetectorRelease>,
    /// Released winner (top-1 mode only).
    pub winner: Option<String>,
    pub epsilon_charged: f64,
    pub delta_charged: f64,
    pub ledger: BudgetLedger,
    #[serde(skip)]
    pub wall_time: Duration,
    /// Winner with noise disabled. Kept in memory for error decomposition,
    /// never serialized.
    #[serde(skip)]
    noiseless_winner: Option<String>,
}

impl ReleaseRecord {
    /// Released leaderboard, sorted by value (one-shot and leaderboard
    /// modes).
    pub fn leaderboard(&self) -> Result<Leaderboard> {
        let values = self
            .rows
            .iter()
            .map(|r| {
                r.value
                    .map(|v| (r.detector.clone(), v))
                    .ok_or_else(|| Error::InvalidInput("record has no per-detector values".into()))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Leaderboard::new(&values, true)?)
    }
}

fn check_detector_count(mode: Mode, detectors: &[DetectorSpec]) -> Result<()> {
    match mode {
        Mode::OneShot if detectors.len() != 1 => Err(Error::Config(format!(
            "one-shot mode takes exactly one detector, got {}",
            detectors.len()
        ))),
        Mode::Leaderboard | Mode::Top1 if detectors.len() < 2 => Err(Error::Config(format!(
            "{} mode needs at least two detectors",
            mode.name()
        ))),
        _ => Ok(()),
    }
}

/// Exact accuracy of every detector on `graph`.
pub fn true_accuracies(
    detectors: &[DetectorSpec],
    graph: &LabeledGraph,
    accuracy: Accuracy,
) -> Result<BTreeMap<String, f64>> {
    let values: Vec<f64> = detectors
        .par_iter()
        .map(|d| full_accuracy(d, graph, accuracy))
        .collect::<Result<_>>()?;
    Ok(detectors
        .iter()
        .map(|d| d.name.clone())
        .zip(values)
        .collect())
}

fn winner_of(values: &BTreeMap<String, f64>) -> Result<String> {
    Ok(Leaderboard::new(values, false)?
        .winner()
        .expect("at least two detectors")
        .to_string())
}

/// Runs trial `trial` of `config` with `mechanism` on `graph`.
pub fn release_trial(
    config: &ExperimentConfig,
    mechanism: &Mechanism,
    graph: &LabeledGraph,
    trial: usize,
) -> Result<ReleaseRecord> {
    let start = Instant::now();
    check_detector_count(config.mode, &config.detectors)?;
    let seed = derive_seed(config.seed, &[trial as u64]);
    let eps = config.epsilon;
    let mut ledger = BudgetLedger::new(if mechanism.is_exact() { 0.0 } else { eps })?;
    let detectors = &config.detectors;
    let mut rows = Vec::new();
    let (mut winner, mut noiseless_winner) = (None, None);
    let mut delta_charged = 0.0;

    let row = |d: &DetectorSpec, value: f64, noiseless: f64, eps_charged: f64| DetectorRelease {
        detector: d.name.clone(),
        value: Some(value),
        noiseless_value: Some(noiseless),
        eps_charged,
    };
    let winner_row = |name: &str, eps_charged: f64| DetectorRelease {
        detector: name.to_string(),
        value: None,
        noiseless_value: None,
        eps_charged,
    };

    match *mechanism {
        Mechanism::Exact => {
            let values = true_accuracies(detectors, graph, config.accuracy)?;
            if config.mode == Mode::Top1 {
                let w = winner_of(&values)?;
                rows.push(winner_row(&w, 0.0));
                noiseless_winner = Some(w.clone());
                winner = Some(w);
            } else {
                for d in detectors {
                    rows.push(row(d, values[&d.name], values[&d.name], 0.0));
                }
            }
        }
        Mechanism::Pda { k, rho } => {
            if config.mode == Mode::Top1 {
                let pda = PdaConfig::new(k, rho, eps);
                let (w, means) =
                    pda_top1(detectors, graph, &pda, config.accuracy, &mut ledger, seed)?;
                rows.push(winner_row(&w, eps));
                noiseless_winner = Some(winner_of(&means)?);
                winner = Some(w);
            } else {
                // Sequential composition: every detector gets an equal share.
                let share = eps / detectors.len() as f64;
                let pda = PdaConfig::new(k, rho, share);
                for (i, d) in detectors.iter().enumerate() {
                    let r = pda_release(
                        d,
                        graph,
                        &pda,
                        config.accuracy,
                        &mut ledger,
                        derive_seed(seed, &[i as u64]),
                    )?;
                    rows.push(row(d, r.value, r.partition_mean, r.epsilon_charged));
                }
            }
        }
        Mechanism::Synth {
            method,
            d_multiplier,
        } => {
            let synth = SynthConfig {
                delta: config.delta,
                ..SynthConfig::new(method, d_multiplier, eps)
            };
            ledger.charge(format!("synth:{}", method.name()), eps, config.delta)?;
            delta_charged = config.delta;
            let noisy = synthesize(graph, &synth, seed)?.graph;
            let clean = synthesize(graph, &synth.without_noise(), seed)?.graph;
            let noisy_values = true_accuracies(detectors, &noisy, config.accuracy)?;
            let clean_values = true_accuracies(detectors, &clean, config.accuracy)?;
            if config.mode == Mode::Top1 {
                let w = winner_of(&noisy_values)?;
                rows.push(winner_row(&w, eps));
                noiseless_winner = Some(winner_of(&clean_values)?);
                winner = Some(w);
            } else {
                for (i, d) in detectors.iter().enumerate() {
                    // The single generation is charged on the first row.
                    let charged = if i == 0 { eps } else { 0.0 };
                    rows.push(row(
                        d,
                        noisy_values[&d.name],
                        clean_values[&d.name],
                        charged,
                    ));
                }
            }
        }
    }
    Ok(ReleaseRecord {
        trial,
        seed,
        mode: config.mode,
        mechanism: mechanism.to_string(),
        rows,
        winner,
        epsilon_charged: ledger.spent_epsilon(),
        delta_charged,
        ledger,
        wall_time: start.elapsed(),
        noiseless_winner,
    })
}

/// All trials of `config` with its configured mechanism and mode.
pub fn run_release(config: &ExperimentConfig) -> Result<Vec<ReleaseRecord>> {
    config.validate()?;
    let graph = config.graph.load()?;
    run_release_on(config, &graph)
}

/// As [`run_release`] on an already loaded graph.
pub fn run_release_on(
    config: &ExperimentConfig,
    graph: &LabeledGraph,
) -> Result<Vec<ReleaseRecord>> {
    (0..config.trials)
        .into_par_iter()
        .map(|t| release_trial(config, &config.mechanism, graph, t))
        .collect()
}

fn with_mode(config: &ExperimentConfig, mode: Mode) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        ..config.clone()
    }
}

pub fn run_one_shot(config: &ExperimentConfig) -> Result<Vec<ReleaseRecord>> {
    run_release(&with_mode(config, Mode::OneShot))
}

pub fn run_leaderboard(config: &ExperimentConfig) -> Result<Vec<ReleaseRecord>> {
    run_release(&with_mode(config, Mode::Leaderboard))
}

pub fn run_top1(config: &ExperimentConfig) -> Result<Vec<ReleaseRecord>> {
    run_release(&with_mode(config, Mode::Top1))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

pub fn write_release_csv<W: Write>(records: &[ReleaseRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RELEASE_HEADER).map_err(csv_err)?;
    for r in records {
        for row in &r.rows {
            w.write_record([
                r.trial.to_string(),
                r.mechanism.clone(),
                r.mode.name().to_string(),
                row.detector.clone(),
                fmt_opt(row.value),
                fmt_opt(row.noiseless_value),
                row.eps_charged.to_string(),
                r.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LedgerSidecar<'a> {
    trial: usize,
    seed: u64,
    mechanism: &'a str,
    ledger: &'a BudgetLedger,
}

/// JSON array with each trial's budget ledger.
pub fn write_ledger_json<W: Write>(records: &[ReleaseRecord], out: W) -> Result<()> {
    let sidecar: Vec<LedgerSidecar> = records
        .iter()
        .map(|r| LedgerSidecar {
            trial: r.trial,
            seed: r.seed,
            mechanism: &r.mechanism,
            ledger: &r.ledger,
        })
        .collect();
    serde_json::to_writer_pretty(out, &sidecar)?;
    Ok(())
}

/// Error of one mechanism with noise disabled (inductive bias) and enabled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub mechanism: String,
    pub mode: Mode,
    /// `l1` for one-shot, `mean_l1` for leaderboards, `top1` for top-1.
    pub metric: String,
    pub noiseless_mean: f64,
    pub noiseless_se: f64,
    pub noisy_mean: f64,
    pub noisy_se: f64,
    pub trials: usize,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Per-trial `(noiseless error, noisy error)` of a record against the true
/// accuracies.
fn record_errors(record: &ReleaseRecord, truth: &BTreeMap<String, f64>) -> Result<(f64, f64)> {
    match record.mode {
        Mode::Top1 => {
            let clean = record.noiseless_winner.as_deref().expect("top-1 record");
            let noisy = record.winner.as_deref().expect("top-1 record");
            Ok((top1_error(truth, clean)?, top1_error(truth, noisy)?))
        }
        Mode::OneShot | Mode::Leaderboard => {
            let n = record.rows.len() as f64;
            let (mut x, mut y) = (0.0, 0.0);
            for row in &record.rows {
                let t = truth[&row.detector];
                x += l1_error(t, row.noiseless_value.expect("value row"));
                y += l1_error(t, row.value.expect("value row"));
            }
            Ok((x / n, y / n))
        }
    }
}

/// For every mechanism in `config.decomposition_mechanisms`, the mean and
/// standard error over trials of the release error with and without noise.
pub fn run_decomposition(config: &ExperimentConfig) -> Result<Vec<DecompositionRow>> {
    config.validate()?;
    check_detector_count(config.mode, &config.detectors)?;
    let graph = config.graph.load()?;
    let truth = true_accuracies(&config.detectors, &graph, config.accuracy)?;
    let metric = match config.mode {
        Mode::OneShot => "l1",
        Mode::Leaderboard => "mean_l1",
        Mode::Top1 => "top1",
    };
    config
        .decomposition_mechanisms
        .iter()
        .map(|m| {
            let errors: Vec<(f64, f64)> = (0..config.trials)
                .into_par_iter()
                .map(|t| record_errors(&release_trial(config, m, &graph, t)?, &truth))
                .collect::<Result<_>>()?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = errors.into_iter().unzip();
            let (noiseless_mean, noiseless_se) = mean_se(&xs);
            let (noisy_mean, noisy_se) = mean_se(&ys);
            Ok(DecompositionRow {
                mechanism: m.to_string(),
                mode: config.mode,
                metric: metric.to_string(),
                noiseless_mean,
                noiseless_se,
                noisy_mean,
                noisy_se,
                trials: config.trials,
            })
        })
        .collect()
}

pub fn write_decomposition_csv<W: Write>(rows: &[DecompositionRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mechanism",
        "mode",
        "metric",
        "noiseless_mean",
        "noiseless_se",
        "noisy_mean",
        "noisy_se",
        "trials",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.mechanism.clone(),
            r.mode.name().to_string(),
            r.metric.clone(),
            r.noiseless_mean.to_string(),
            r.noiseless_se.to_string(),
            r.noisy_mean.to_string(),
            r.noisy_se.to_string(),
            r.trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Files written by [`run_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub csv: Vec<u8>,
    pub ledger_json: Option<Vec<u8>>,
}

/// Path of the ledger written next to `csv_path`.
pub fn ledger_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".ledger.json");
    PathBuf::from(name)
}

/// Runs the experiment described by `config` and, when `output` is set,
/// writes the CSV (plus the ledger sidecar for releases).
pub fn run_experiment(
    config: &ExperimentConfig,
    output: Option<&Path>,
) -> Result<ExperimentOutput> {
    let result = match config.run {
        RunKind::Release => {
            let records = run_release(config)?;
            let (mut csv, mut json) = (Vec::new(), Vec::new());
            write_release_csv(&records, &mut csv)?;
            write_ledger_json(&records, &mut json)?;
            ExperimentOutput {
                csv,
                ledger_json: Some(json),
            }
        }
        RunKind::Decomposition => {
            let mut csv = Vec::new();
            write_decomposition_csv(&run_decomposition(config)?, &mut csv)?;
            ExperimentOutput {
                csv,
                ledger_json: None,
            }
        }
    };
    if let Some(path) = output.or(config.output.as_deref()) {
        std::fs::write(path, &result.csv)?;
        if let Some(json) = &result.ledger_json {
            std::fs::write(ledger_path(path), json)?;
        }
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub k: usize,
    pub rho: f64,
    /// Mean over detectors and trials of |partition mean - full accuracy|.
    pub mean_abs_bias: f64,
}

/// Noise-free PDA bias of every `(k, rho)` on a validation graph, best
/// first. Combinations invalid for the graph (e.g. `k > n_B`) are skipped.
pub fn pda_validation_grid(
    graph: &LabeledGraph,
    detectors: &[DetectorSpec],
    accuracy: Accuracy,
    ks: &[usize],
    rhos: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<GridRow>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let truth = true_accuracies(detectors, graph, accuracy)?;
    let mut rows = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        for (ri, &rho) in rhos.iter().enumerate() {
            let config = PdaConfig::new(k, rho, 1.0).without_noise();
            if config.validate(graph.n_fraud(), graph.n_benign()).is_err() {
                continue;
            }
            let mut total = 0.0;
            for t in 0..trials {
                for (di, d) in detectors.iter().enumerate() {
                    let s = derive_seed(seed, &[ki as u64, ri as u64, t as u64, di as u64]);
                    let parts = partition_accuracies(d, graph, &config, accuracy, s)?;
                    let m = parts.iter().sum::<f64>() / parts.len() as f64;
                    total += (m - truth[&d.name]).abs();
                }
            }
            rows.push(GridRow {
                k,
                rho,
                mean_abs_bias: total / (trials * detectors.len()) as f64,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.mean_abs_bias
            .total_cmp(&b.mean_abs_bias)
            .then(a.k.cmp(&b.k))
            .then(a.rho.total_cmp(&b.rho))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::weighted_kendall_tau;

    fn small(extra: &str) -> ExperimentConfig {
        let detectors = if extra.contains("detectors =") {
            ""
        } else {
            "detectors = degree, neg_degree, neg_clustering, random(3)\n"
        };
        ExperimentConfig::parse(&format!(
            "graph.n_fraud = 10\n\
             graph.n_benign = 120\n\
             graph.p_fraud = 0.5\n\
             graph.p_benign = 0.04\n\
             graph.p_cross = 0.02\n\
             {detectors}\
             mechanism.k = 4\n\
             mechanism.rho = 0.5\n\
             epsilon = 5\n\
             trials = 3\n\
             seed = 7\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn exact_one_shot_equals_true_auc() {
        let c = small("mode = one_shot\nmechanism = exact\ndetectors = degree");
        let g = c.graph.load().unwrap();
        let recs = run_one_shot(&c).unwrap();
        let truth = full_accuracy(&c.detectors[0], &g, Accuracy::Auc).unwrap();
        for r in &recs {
            assert_eq!(r.rows[0].value, Some(truth));
            assert_eq!(r.epsilon_charged, 0.0);
            assert!(r.ledger.entries().is_empty());
        }
    }

    #[test]
    fn one_shot_needs_one_detector() {
        assert!(run_one_shot(&small("mechanism = exact")).is_err());
        assert!(run_leaderboard(&small("detectors = degree")).is_err());
    }

    #[test]
    fn pda_one_shot_charges_once() {
        let recs = run_one_shot(&small("detectors = degree")).unwrap();
        for r in recs {
            assert_eq!(r.ledger.entries().len(), 1);
            assert_eq!(r.ledger.entries()[0].epsilon, 5.0);
        }
    }

    #[test]
    fn pda_leaderboard_splits_budget() {
        let recs = run_leaderboard(&small("")).unwrap();
        for r in &recs {
            assert_eq!(r.ledger.entries().len(), 4);
            assert!(r.ledger.entries().iter().all(|e| e.epsilon == 1.25));
            let row_sum: f64 = r.rows.iter().map(|x| x.eps_charged).sum();
            assert!((row_sum - r.ledger.spent_epsilon()).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_leaderboard_is_sorted_by_truth() {
        let c = small("mechanism = exact");
        let g = c.graph.load().unwrap();
        let truth = true_accuracies(&c.detectors, &g, Accuracy::Auc).unwrap();
        let r = &run_leaderboard(&c).unwrap()[0];
        let board = r.leaderboard().unwrap();
        assert_eq!(board, Leaderboard::new(&truth, true).unwrap());
        assert_eq!(weighted_kendall_tau(&truth, &board).unwrap(), 0.0);
    }

    #[test]
    fn top1_exposes_only_the_winner() {
        for mech in ["exact", "pda", "synth"] {
            let c = small(&format!("mode = top1\nmechanism = {mech}"));
            let recs = run_top1(&c).unwrap();
            let mut csv = Vec::new();
            write_release_csv(&recs, &mut csv).unwrap();
            let text = String::from_utf8(csv).unwrap();
            for line in text.lines().skip(1) {
                let f: Vec<&str> = line.split(',').collect();
                assert_eq!((f[4], f[5]), ("", ""), "{line}");
            }
            let json = serde_json::to_string(&recs).unwrap();
            assert!(!json.contains("noiseless_winner"));
            for r in &recs {
                assert_eq!(r.rows.len(), 1);
                let expected = if mech == "exact" { 0.0 } else { 5.0 };
                assert_eq!(r.epsilon_charged, expected);
            }
        }
    }

    #[test]
    fn exact_top1_picks_true_best() {
        let c = small("mode = top1\nmechanism = exact");
        let g = c.graph.load().unwrap();
        let truth = true_accuracies(&c.detectors, &g, Accuracy::Auc).unwrap();
        for r in run_top1(&c).unwrap() {
            assert_eq!(
                top1_error(&truth, r.winner.as_deref().unwrap()).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn synth_charges_once_for_all_detectors() {
        let c = small("mechanism = synth\nmechanism.method = agm");
        for r in run_leaderboard(&c).unwrap() {
            assert_eq!(r.ledger.entries().len(), 1);
            assert_eq!(r.ledger.spent_epsilon(), 5.0);
            assert_eq!(r.delta_charged, 1e-8);
            assert_eq!(r.rows.iter().map(|x| x.eps_charged).sum::<f64>(), 5.0);
        }
    }

    #[test]
    fn release_is_reproducible() {
        let c = small("mechanism = synth\nmechanism.method = topm_filter");
        let a = run_experiment(&c, None).unwrap();
        let b = run_experiment(&c, None).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a.csv).unwrap();
        assert!(text
            .starts_with("trial,mechanism,mode,detector,value,noiseless_value,eps_charged,seed\n"));
        assert_eq!(text.lines().count(), 1 + 3 * 4);
    }

    #[test]
    fn decomposition_of_exact_is_zero_and_topm_clean() {
        let c = small("run = decomposition\ndecomposition.mechanisms = exact, topm_filter, pda");
        let rows = run_decomposition(&c).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].noiseless_mean, rows[0].noisy_mean), (0.0, 0.0));
        assert_eq!(rows[1].noiseless_mean, 0.0);
        assert!(rows[1].noisy_mean > 0.0);
        assert!(rows[2].noisy_mean > 0.0);
    }

    #[test]
    fn grid_is_sorted_and_skips_invalid() {
        let c = small("");
        let g = c.graph.load().unwrap();
        let rows = pda_validation_grid(
            &g,
            &c.detectors[..2],
            Accuracy::Auc,
            &[2, 5, 500],
            &[0.2, 1.0],
            2,
            1,
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows
            .windows(2)
            .all(|w| w[0].mean_abs_bias <= w[1].mean_abs_bias));
    }

    #[test]
    fn ledger_sidecar_path() {
        assert_eq!(
            ledger_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.csv.ledger.json")
        );
    }
}
