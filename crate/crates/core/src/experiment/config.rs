//! Experiment configuration and per-experiment parameter schemas.
//!
//! A config is assembled from an optional TOML file and command-line
//! overrides, then validated into a [`Plan`] before any trial runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristics::{InsertionRule, PivotRule};
use crate::kmedian::KMedianVariant;
use crate::metric::Distribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    TauStats,
    CdfSandwich,
    BallTails,
    ClusterCurve,
    Matching,
    Nn,
    Insertion,
    TwoOpt,
    Kmedian,
    Diameter,
    OracleCrosscheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 11] = [
        ExperimentKind::TauStats,
        ExperimentKind::CdfSandwich,
        ExperimentKind::BallTails,
        ExperimentKind::ClusterCurve,
        ExperimentKind::Matching,
        ExperimentKind::Nn,
        ExperimentKind::Insertion,
        ExperimentKind::TwoOpt,
        ExperimentKind::Kmedian,
        ExperimentKind::Diameter,
        ExperimentKind::OracleCrosscheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::TauStats => "tau-stats",
            ExperimentKind::CdfSandwich => "cdf-sandwich",
            ExperimentKind::BallTails => "ball-tails",
            ExperimentKind::ClusterCurve => "cluster-curve",
            ExperimentKind::Matching => "matching",
            ExperimentKind::Nn => "nn",
            ExperimentKind::Insertion => "insertion",
            ExperimentKind::TwoOpt => "two-opt",
            ExperimentKind::Kmedian => "kmedian",
            ExperimentKind::Diameter => "diameter",
            ExperimentKind::OracleCrosscheck => "oracle-crosscheck",
        }
    }

    /// Parameter keys accepted by this experiment (besides `distribution`).
    pub fn allowed_params(&self) -> &'static [&'static str] {
        match self {
            ExperimentKind::TauStats => &["k"],
            ExperimentKind::CdfSandwich => &["k", "sampler"],
            ExperimentKind::BallTails => &["delta", "c"],
            ExperimentKind::ClusterCurve => &["delta"],
            ExperimentKind::Matching => &["oracle"],
            ExperimentKind::Nn => &["start", "oracle"],
            ExperimentKind::Insertion => &["rule", "oracle"],
            ExperimentKind::TwoOpt => &["pivot", "max_iters"],
            ExperimentKind::Kmedian => &["k", "variant", "oracle"],
            ExperimentKind::Diameter => &["c", "slack"],
            ExperimentKind::OracleCrosscheck => &["k"],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    /// `None` writes to stdout.
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Worker threads; `None` uses rayon's default.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, n: Vec<usize>, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            experiment,
            n,
            trials,
            seed,
            params: BTreeMap::new(),
            output: None,
            format: OutputFormat::Csv,
            workers: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Loads a TOML file. `n` may be an integer or a list; `params` values may
    /// be strings, numbers, booleans, or lists of those.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            One(usize),
            Many(Vec<usize>),
        }

        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct FileConfig {
            experiment: String,
            n: OneOrMany,
            trials: usize,
            #[serde(default)]
            seed: u64,
            #[serde(default)]
            params: BTreeMap<String, toml::Value>,
            output: Option<PathBuf>,
            format: Option<String>,
            workers: Option<usize>,
        }

        let file: FileConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let n = match file.n {
            OneOrMany::One(n) => vec![n],
            OneOrMany::Many(v) => v,
        };
        let mut cfg = ExperimentConfig::new(file.experiment.parse()?, n, file.trials, file.seed);
        for (k, v) in file.params {
            cfg.params.insert(k, toml_value_to_param(&v)?);
        }
        cfg.output = file.output;
        if let Some(f) = file.format {
            cfg.format = f.parse()?;
        }
        cfg.workers = file.workers;
        Ok(cfg)
    }

    /// Validates everything and returns the typed plan.
    pub fn plan(&self) -> Result<Plan> {
        Plan::from_config(self)
    }
}

fn toml_value_to_param(v: &toml::Value) -> Result<String> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(toml_value_to_param)
            .collect::<Result<Vec<_>>>()?
            .join(","),
        other => {
            return Err(Error::Config(format!(
                "unsupported parameter value {other}"
            )))
        }
    })
}

/// Parses `key=value` from the command line.
pub fn parse_param_flag(flag: &str) -> Result<(String, String)> {
    let (k, v) = flag
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("parameter `{flag}` is not key=value")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::Config(format!(
            "parameter `{flag}` has an empty key"
        )));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Validated, typed form of a config.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub kind: ExperimentKind,
    pub distribution: Distribution,
    pub settings: PlanSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CdfSampler {
    Metric,
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanSpec {
    /// `ks = None` means `{2, 10, n/2, n}` clipped to `n`.
    TauStats {
        ks: Option<Vec<usize>>,
    },
    CdfSandwich {
        ks: Vec<usize>,
        sampler: CdfSampler,
    },
    BallTails {
        deltas: Vec<f64>,
        c: f64,
    },
    /// `deltas = None` means `i/n` for `i = 0..=20`.
    ClusterCurve {
        deltas: Option<Vec<f64>>,
    },
    Matching {
        oracle: bool,
    },
    Nn {
        start: usize,
        oracle: bool,
    },
    Insertion {
        rules: Vec<String>,
        oracle: bool,
    },
    TwoOpt {
        pivot: PivotRule,
        max_iters: u64,
    },
    Kmedian {
        ks: Vec<usize>,
        variant: KMedianVariant,
        oracle: bool,
    },
    Diameter {
        c: f64,
        slack: f64,
    },
    OracleCrosscheck {
        k: usize,
    },
}

struct ParamReader<'a> {
    params: &'a BTreeMap<String, String>,
}

impl ParamReader<'_> {
    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.params.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::Config(format!("parameter {key}=`{raw}` has the wrong type"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(raw) = self.params.get(key) else {
            return Ok(None);
        };
        let items: Vec<T> = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::Config(format!("parameter {key}: bad item `{s}`")))
            })
            .collect::<Result<_>>()?;
        if items.is_empty() {
            return Err(Error::Config(format!("parameter {key} is empty")));
        }
        Ok(Some(items))
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Plan {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Plan> {
        let kind = cfg.experiment;
        if cfg.trials == 0 {
            return Err(config_err("trials must be >= 1"));
        }
        if cfg.n.is_empty() {
            return Err(config_err("at least one n is required"));
        }
        for key in cfg.params.keys() {
            if key != "distribution" && !kind.allowed_params().contains(&key.as_str()) {
                return Err(config_err(format!(
                    "experiment {kind} does not take parameter `{key}` (allowed: {})",
                    kind.allowed_params().join(", ")
                )));
            }
        }
        let p = ParamReader {
            params: &cfg.params,
        };
        let distribution: Distribution = match cfg.params.get("distribution") {
            None => Distribution::Exponential1,
            Some(s) => s.parse().map_err(|e: Error| config_err(e.to_string()))?,
        };
        let min_n = *cfg.n.iter().min().expect("nonempty");
        let max_n = *cfg.n.iter().max().expect("nonempty");
        let need_n = |lo: usize, why: &str| -> Result<()> {
            if min_n < lo {
                return Err(config_err(format!(
                    "{kind} needs n >= {lo} ({why}), got {min_n}"
                )));
            }
            Ok(())
        };
        need_n(2, "complete graph")?;

        let settings = match kind {
            ExperimentKind::TauStats => {
                let ks = p.list::<usize>("k")?;
                if let Some(ks) = &ks {
                    if ks.iter().any(|&k| k == 0 || k > min_n) {
                        return Err(config_err(format!("k must lie in 1..={min_n}")));
                    }
                }
                PlanSpec::TauStats { ks }
            }
            ExperimentKind::CdfSandwich => {
                let ks = p
                    .list::<usize>("k")?
                    .unwrap_or_else(|| vec![(min_n / 5).max(1)]);
                if ks.iter().any(|&k| k == 0 || k > min_n) {
                    return Err(config_err(format!("k must lie in 1..={min_n}")));
                }
                let sampler = match p.get::<String>("sampler", "metric".into())?.as_str() {
                    "metric" => CdfSampler::Metric,
                    "direct" => CdfSampler::Direct,
                    other => return Err(config_err(format!("unknown sampler `{other}`"))),
                };
                PlanSpec::CdfSandwich { ks, sampler }
            }
            ExperimentKind::BallTails => {
                need_n(5, "ball tail bound")?;
                let deltas = p.list::<f64>("delta")?.unwrap_or_else(|| vec![0.1, 0.2]);
                if deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
                    return Err(config_err("delta values must be finite and >= 0"));
                }
                let c = p.get("c", 2.0)?;
                if !(c > 1.0) {
                    return Err(config_err("c must be > 1"));
                }
                PlanSpec::BallTails { deltas, c }
            }
            ExperimentKind::ClusterCurve => {
                let deltas = p.list::<f64>("delta")?;
                if deltas
                    .iter()
                    .flatten()
                    .any(|d| !(*d >= 0.0 && d.is_finite()))
                {
                    return Err(config_err("delta values must be finite and >= 0"));
                }
                PlanSpec::ClusterCurve { deltas }
            }
            ExperimentKind::Matching => {
                if cfg.n.iter().any(|n| n % 2 != 0) {
                    return Err(config_err("matching needs even n"));
                }
                PlanSpec::Matching {
                    oracle: p.get("oracle", true)?,
                }
            }
            ExperimentKind::Nn => {
                let start = p.get("start", 0usize)?;
                if start >= min_n {
                    return Err(config_err(format!("start must be < {min_n}")));
                }
                PlanSpec::Nn {
                    start,
                    oracle: p.get("oracle", true)?,
                }
            }
            ExperimentKind::Insertion => {
                let rules = p.list::<String>("rule")?.unwrap_or_else(|| {
                    InsertionRule::NAMES.iter().map(|s| s.to_string()).collect()
                });
                for r in &rules {
                    InsertionRule::parse_with_seed(r, 0).map_err(|e| config_err(e.to_string()))?;
                }
                PlanSpec::Insertion {
                    rules,
                    oracle: p.get("oracle", true)?,
                }
            }
            ExperimentKind::TwoOpt => {
                let pivot = p
                    .get::<String>("pivot", "first".into())?
                    .parse()
                    .map_err(|e: Error| config_err(e.to_string()))?;
                PlanSpec::TwoOpt {
                    pivot,
                    max_iters: p.get("max_iters", 10_000_000u64)?,
                }
            }
            ExperimentKind::Kmedian => {
                let ks = p.list::<usize>("k")?.unwrap_or_else(|| vec![1]);
                if ks.iter().any(|&k| k == 0 || k > min_n) {
                    return Err(config_err(format!("k must lie in 1..={min_n}")));
                }
                let variant = p
                    .get::<String>("variant", "fixed".into())?
                    .parse()
                    .map_err(|e: Error| config_err(e.to_string()))?;
                PlanSpec::Kmedian {
                    ks,
                    variant,
                    oracle: p.get("oracle", true)?,
                }
            }
            ExperimentKind::Diameter => {
                need_n(3, "ln n must be positive")?;
                let c = p.get("c", 4.0)?;
                if !(c > 3.0) {
                    return Err(config_err("c must be > 3"));
                }
                let slack = p.get("slack", 10.0)?;
                if !(slack > 0.0) {
                    return Err(config_err("slack must be > 0"));
                }
                PlanSpec::Diameter { c, slack }
            }
            ExperimentKind::OracleCrosscheck => {
                if max_n > crate::oracles::FULL_RELAXATION_MAX_N {
                    return Err(config_err(format!(
                        "oracle-crosscheck needs n <= {}",
                        crate::oracles::FULL_RELAXATION_MAX_N
                    )));
                }
                let k = p.get("k", 2usize)?;
                if k == 0 || k > min_n {
                    return Err(config_err(format!("k must lie in 1..={min_n}")));
                }
                PlanSpec::OracleCrosscheck { k }
            }
        };
        Ok(Plan {
            kind,
            distribution,
            settings,
        })
    }
}
