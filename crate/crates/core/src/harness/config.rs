// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys:
//!
//! | key | values | default |
//! |-----|--------|---------|
//! | `graph.source` | `sbm`, `sbm_clique`, `files` | `sbm` |
//! | `graph.n_fraud`, `graph.n_benign` | counts | `100`, `1000` |
//! | `graph.p_fraud`, `graph.p_benign`, `graph.p_cross` | probabilities | `0.1`, `0.005`, `0.0` |
//! | `graph.clique_size`, `graph.clique_density` | for `sbm_clique` | `22`, `0.8` |
//! | `graph.seed` | integer | derived from `seed` |
//! | `graph.edges`, `graph.labels`, `graph.metadata` | paths for `files` | |
//! | `detectors` | `builtin` or a comma-separated list of detector names | `builtin` |
//! | `mode` | `one_shot`, `leaderboard`, `top1` | `leaderboard` |
//! | `mechanism` | `exact`, `pda`, `synth` | `pda` |
//! | `mechanism.k`, `mechanism.rho` | PDA parameters | `10`, `0.3` |
//! | `mechanism.method` | `sbm`, `agm`, `agm_triangles`, `topm_filter` | `sbm` |
//! | `mechanism.d_multiplier` | truncation threshold over max degree | `1.0` |
//! | `accuracy` | `auc`, `f1` | `auc` |
//! | `epsilon`, `delta` | privacy parameters | `1.0`, `1e-8` |
//! | `trials`, `seed` | | `10`, `0` |
//! | `output` | CSV path | |
//! | `run` | `release`, `decomposition` | `release` |
//! | `decomposition.mechanisms` | comma-separated: `exact`, `pda`, or a synthesis method | all |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detectors::{builtin_suite, DetectorSpec};
use crate::error::{Error, Result};
use crate::graph::{inject_fraud_clique, load_graph, sample_sbm, LabeledGraph, SbmParams};
use crate::pda::Accuracy;
use crate::rng::derive_seed;
use crate::synth::SynthMethod;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    Sbm {
        params: SbmParams,
        seed: u64,
    },
    SbmClique {
        params: SbmParams,
        size: usize,
        density: f64,
        seed: u64,
    },
    Files {
        edges: PathBuf,
        labels: PathBuf,
        metadata: Option<PathBuf>,
    },
}

impl GraphSource {
    pub fn load(&self) -> Result<LabeledGraph> {
        Ok(match self {
            GraphSource::Sbm { params, seed } => sample_sbm(params, *seed)?,
            GraphSource::SbmClique {
                params,
                size,
                density,
                seed,
            } => {
                let g = sample_sbm(params, derive_seed(*seed, &[0]))?;
                inject_fraud_clique(&g, *size, *density, derive_seed(*seed, &[1]))?
            }
            GraphSource::Files {
                edges,
                labels,
                metadata,
            } => load_graph(edges, labels, metadata.as_deref())?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OneShot,
    Leaderboard,
    Top1,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::OneShot => "one_shot",
            Mode::Leaderboard => "leaderboard",
            Mode::Top1 => "top1",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_shot" => Ok(Mode::OneShot),
            "leaderboard" => Ok(Mode::Leaderboard),
            "top1" => Ok(Mode::Top1),
            _ => Err(Error::Config(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Exact,
    Pda {
        k: usize,
        rho: f64,
    },
    Synth {
        method: SynthMethod,
        d_multiplier: f64,
    },
}

impl Mechanism {
    pub fn is_exact(&self) -> bool {
        matches!(self, Mechanism::Exact)
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::Exact => f.write_str("exact"),
            Mechanism::Pda { .. } => f.write_str("pda"),
            Mechanism::Synth { method, .. } => f.write_str(method.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Release,
    Decomposition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub detectors: Vec<DetectorSpec>,
    pub mode: Mode,
    pub mechanism: Mechanism,
    pub accuracy: Accuracy,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub run: RunKind,
    pub decomposition_mechanisms: Vec<Mechanism>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

/// Splits a comma-separated list, ignoring commas inside parentheses.
fn split_list(s: &str) -> Vec<String> {
    let (mut out, mut cur, mut depth) = (Vec::new(), String::new(), 0i32);
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur.trim().to_string());
    out.into_iter().filter(|s| !s.is_empty()).collect()
}

pub fn parse_detectors(s: &str) -> Result<Vec<DetectorSpec>> {
    if s.trim() == "builtin" {
        return Ok(builtin_suite());
    }
    let specs = split_list(s)
        .iter()
        .map(|name| name.parse::<DetectorSpec>().map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    let mut names = std::collections::BTreeSet::new();
    for d in &specs {
        if !names.insert(d.name.clone()) {
            return Err(Error::Config(format!("detector `{}` listed twice", d.name)));
        }
    }
    Ok(specs)
}

const KEYS: &[&str] = &[
    "graph.source",
    "graph.n_fraud",
    "graph.n_benign",
    "graph.p_fraud",
    "graph.p_benign",
    "graph.p_cross",
    "graph.clique_size",
    "graph.clique_density",
    "graph.seed",
    "graph.edges",
    "graph.labels",
    "graph.metadata",
    "detectors",
    "mode",
    "mechanism",
    "mechanism.k",
    "mechanism.rho",
    "mechanism.method",
    "mechanism.d_multiplier",
    "accuracy",
    "epsilon",
    "delta",
    "trials",
    "seed",
    "output",
    "run",
    "decomposition.mechanisms",
];

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_file_with(path, &[])
    }

    /// As [`ExperimentConfig::from_file`], with `overrides` replacing or
    /// adding keys after the file is read.
    pub fn from_file_with(path: &Path, overrides: &[(&str, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::parse_with(&text, overrides)?;
        // Relative graph paths are read relative to the config file.
        if let (
            GraphSource::Files {
                edges,
                labels,
                metadata,
            },
            Some(dir),
        ) = (&mut config.graph, path.parent())
        {
            for p in [Some(edges), Some(labels), metadata.as_mut()]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &[])
    }

    pub fn parse_with(text: &str, overrides: &[(&str, String)]) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key `{k}`", i + 1)));
            }
            if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{k}`",
                    i + 1
                )));
            }
        }
        for (k, v) in overrides {
            if !KEYS.contains(k) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
            kv.insert(k.to_string(), v.clone());
        }
        let kv = &kv;
        let get = |k: &str| kv.get(k).map(String::as_str);
        fn or<T: FromStr>(kv: &BTreeMap<String, String>, k: &str, default: T) -> Result<T> {
            kv.get(k).map_or(Ok(default), |v| parse_value(k, v))
        }
        let seed: u64 = or(kv, "seed", 0)?;
        let graph_seed: u64 = or(kv, "graph.seed", derive_seed(seed, &[u64::MAX]))?;
        let params = SbmParams {
            n_fraud: or(kv, "graph.n_fraud", 100)?,
            n_benign: or(kv, "graph.n_benign", 1000)?,
            p_fraud: or(kv, "graph.p_fraud", 0.1)?,
            p_benign: or(kv, "graph.p_benign", 0.005)?,
            p_cross: or(kv, "graph.p_cross", 0.0)?,
        };
        let graph = match get("graph.source").unwrap_or("sbm") {
            "sbm" => GraphSource::Sbm {
                params,
                seed: graph_seed,
            },
            "sbm_clique" => GraphSource::SbmClique {
                params,
                size: or(kv, "graph.clique_size", 22)?,
                density: or(kv, "graph.clique_density", 0.8)?,
                seed: graph_seed,
            },
            "files" => GraphSource::Files {
                edges: get("graph.edges")
                    .ok_or_else(|| Error::Config("`graph.edges` is required".into()))?
                    .into(),
                labels: get("graph.labels")
                    .ok_or_else(|| Error::Config("`graph.labels` is required".into()))?
                    .into(),
                metadata: get("graph.metadata").map(PathBuf::from),
            },
            other => return Err(Error::Config(format!("unknown graph source `{other}`"))),
        };
        let k = or(kv, "mechanism.k", 10)?;
        let rho = or(kv, "mechanism.rho", 0.3)?;
        let method: SynthMethod = or(kv, "mechanism.method", SynthMethod::Sbm)?;
        let d_multiplier = or(kv, "mechanism.d_multiplier", 1.0)?;
        let mechanism_named = |name: &str| -> Result<Mechanism> {
            Ok(match name {
                "exact" => Mechanism::Exact,
                "pda" => Mechanism::Pda { k, rho },
                "synth" => Mechanism::Synth {
                    method,
                    d_multiplier,
                },
                other => Mechanism::Synth {
                    method: other.parse()?,
                    d_multiplier,
                },
            })
        };
        let mechanism = mechanism_named(get("mechanism").unwrap_or("pda"))?;
        let decomposition_mechanisms = match get("decomposition.mechanisms") {
            Some(list) => split_list(list)
                .iter()
                .map(|m| mechanism_named(m))
                .collect::<Result<_>>()?,
            None => ["exact", "pda", "sbm", "agm", "agm_triangles", "topm_filter"]
                .iter()
                .map(|m| mechanism_named(m))
                .collect::<Result<_>>()?,
        };
        let config = Self {
            graph,
            detectors: parse_detectors(get("detectors").unwrap_or("builtin"))?,
            mode: or(kv, "mode", Mode::Leaderboard)?,
            mechanism,
            accuracy: match get("accuracy").unwrap_or("auc") {
                "auc" => Accuracy::Auc,
                "f1" => Accuracy::F1,
                other => return Err(Error::Config(format!("unknown accuracy `{other}`"))),
            },
            epsilon: or(kv, "epsilon", 1.0)?,
            delta: or(kv, "delta", crate::dp::DEFAULT_DELTA)?,
            trials: or(kv, "trials", 10)?,
            seed,
            output: get("output").map(PathBuf::from),
            run: match get("run").unwrap_or("release") {
                "release" => RunKind::Release,
                "decomposition" => RunKind::Decomposition,
                other => return Err(Error::Config(format!("unknown run kind `{other}`"))),
            },
            decomposition_mechanisms,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::Config("no detectors".into()));
        }
        let needs_budget = !self.mechanism.is_exact()
            || self.decomposition_mechanisms.iter().any(|m| !m.is_exact());
        if needs_budget && !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::Config(format!(
                "delta = {} is outside (0, 1/2)",
                self.delta
            )));
        }
        for m in [&self.mechanism]
            .into_iter()
            .chain(&self.decomposition_mechanisms)
        {
            match *m {
                Mechanism::Pda { k, rho } if k < 2 || !(rho > 0.0 && rho <= 1.0) => {
                    return Err(Error::Config(format!(
                        "invalid PDA parameters k={k}, rho={rho}"
                    )))
                }
                Mechanism::Synth { d_multiplier, .. } if !(d_multiplier > 0.0) => {
                    return Err(Error::Config(format!(
                        "invalid degree multiplier {d_multiplier}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
