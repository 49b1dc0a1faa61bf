//! Config-driven experiment runner: parses a flat key-value config, builds
//! graphs, reward models, and policies, estimates worst-case ratios per
//! policy, and writes deterministic CSV artifacts.
//!
//! Given a fixed config and seed the emitted CSV bytes are identical across
//! runs; timing is logged, never written into the artifacts.

pub mod acceptance;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{
    gen_biregular, gen_complete_bipartite, gen_disjoint_stars, gen_lopsided, gen_random,
    load_graph, AccessGraph, GraphError,
};
use crate::policy::{PolicyError, PolicySpec};
use crate::reward::{parse_values, ClassSequence, RewardError, RewardModel};
use crate::sim::finite::{estimate_gamma_finite, run_finite_trial, FiniteSim, ModelGen};
use crate::sim::infinite::{
    estimate_gamma_infinite, run_infinite, InfiniteConfig, InfiniteError,
};
use crate::stats::{derive_seed, stream_id};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Infinite(#[from] InfiniteError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which simulator an experiment drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Finite,
    Infinite,
}

impl Setting {
    fn name(&self) -> &'static str {
        match self {
            Setting::Finite => "finite",
            Setting::Infinite => "infinite",
        }
    }
}

/// How the access graph is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    CompleteBipartite { n_users: usize, n_items: usize },
    Lopsided { n: usize },
    Biregular { n_users: usize, n_items: usize, user_degree: usize },
    DisjointStars { n_users: usize, items_per_user: usize },
    Random { n_users: usize, n_items: usize, p: f64 },
    File(PathBuf),
}

impl GraphSpec {
    pub fn name(&self) -> String {
        match self {
            GraphSpec::CompleteBipartite { n_users, n_items } => {
                format!("complete_bipartite({n_users}, {n_items})")
            }
            GraphSpec::Lopsided { n } => format!("lopsided({n})"),
            GraphSpec::Biregular {
                n_users,
                n_items,
                user_degree,
            } => format!("biregular({n_users}, {n_items}, {user_degree})"),
            GraphSpec::DisjointStars {
                n_users,
                items_per_user,
            } => format!("disjoint_stars({n_users}, {items_per_user})"),
            GraphSpec::Random { n_users, n_items, p } => {
                format!("random({n_users}, {n_items}, {p})")
            }
            GraphSpec::File(p) => format!("file({})", p.display()),
        }
    }

    /// Materialize the graph. Random graphs draw from a stream derived from
    /// the master seed, so one experiment uses one graph across policies.
    pub fn build(&self, master_seed: u64) -> Result<AccessGraph, GraphError> {
        match self {
            GraphSpec::CompleteBipartite { n_users, n_items } => {
                gen_complete_bipartite(*n_users, *n_items)
            }
            GraphSpec::Lopsided { n } => gen_lopsided(*n),
            GraphSpec::Biregular {
                n_users,
                n_items,
                user_degree,
            } => gen_biregular(*n_users, *n_items, *user_degree),
            GraphSpec::DisjointStars {
                n_users,
                items_per_user,
            } => gen_disjoint_stars(*n_users, *items_per_user),
            GraphSpec::Random { n_users, n_items, p } => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, stream_id("graph")));
                gen_random(*n_users, *n_items, *p, &mut rng)
            }
            GraphSpec::File(path) => load_graph(path),
        }
    }
}

/// Finite-setting reward source.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardSpec {
    /// Redrawn per trial: `k` items at `high`, rest at `low`.
    Planted { k: usize, high: f64, low: f64 },
    /// Redrawn per trial: `k` planted neighbors per user.
    PlantedPerUser { k: usize },
    /// Fixed planted set.
    PlantedSet(Vec<usize>),
    /// Fixed planted range `[start, end)`.
    PlantedRange { start: usize, end: usize },
    /// Fixed universal values from a file.
    ValuesFile(PathBuf),
}

impl RewardSpec {
    pub fn name(&self) -> String {
        match self {
            RewardSpec::Planted { k, high, low } => {
                if *high == 1.0 && *low == 0.0 {
                    format!("planted({k})")
                } else {
                    format!("planted({k}, {high}, {low})")
                }
            }
            RewardSpec::PlantedPerUser { k } => format!("planted_per_user({k})"),
            RewardSpec::PlantedSet(items) => format!(
                "planted_set({})",
                items
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            RewardSpec::PlantedRange { start, end } => format!("planted_range({start}, {end})"),
            RewardSpec::ValuesFile(p) => format!("values_file({})", p.display()),
        }
    }

    pub fn build(&self, g: &AccessGraph) -> Result<ModelGen, ExperimentError> {
        Ok(match self {
            RewardSpec::Planted { k, high, low } => ModelGen::Planted {
                k: *k,
                high: *high,
                low: *low,
            },
            RewardSpec::PlantedPerUser { k } => ModelGen::PlantedPerUser { k: *k },
            RewardSpec::PlantedSet(items) => ModelGen::fixed(RewardModel::binary_planted(
                items.clone(),
                g.n_items(),
            )?),
            RewardSpec::PlantedRange { start, end } => ModelGen::fixed(
                RewardModel::binary_planted((*start..*end).collect(), g.n_items())?,
            ),
            RewardSpec::ValuesFile(path) => {
                let text = std::fs::read_to_string(path)?;
                ModelGen::fixed(RewardModel::universal(parse_values(&text, g.n_items())?)?)
            }
        })
    }
}

/// Infinite-setting class-sequence source (one sequence per class).
#[derive(Debug, Clone, PartialEq)]
pub enum ClassSpec {
    Constant(f64),
    Geometric { initial: f64, ratio: f64 },
    /// Class `c` carries `value` at ordinal `base + stride * c`, `background`
    /// elsewhere.
    PlantedPosition {
        base: u64,
        stride: u64,
        value: f64,
        background: f64,
    },
    /// The same cyclic explicit list for every class.
    Explicit(Vec<f64>),
}

impl ClassSpec {
    pub fn name(&self) -> String {
        match self {
            ClassSpec::Constant(v) => format!("constant({v})"),
            ClassSpec::Geometric { initial, ratio } => format!("geometric({initial}, {ratio})"),
            ClassSpec::PlantedPosition {
                base,
                stride,
                value,
                background,
            } => format!("planted_position({base}, {stride}, {value}, {background})"),
            ClassSpec::Explicit(vs) => format!(
                "explicit({})",
                vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
            ),
        }
    }

    pub fn build(&self, n_classes: usize) -> RewardModel {
        let sequences: Vec<ClassSequence> = (0..n_classes)
            .map(|c| match self {
                ClassSpec::Constant(v) => ClassSequence::Constant(*v),
                ClassSpec::Geometric { initial, ratio } => ClassSequence::GeometricDecay {
                    initial: *initial,
                    ratio: *ratio,
                },
                ClassSpec::PlantedPosition {
                    base,
                    stride,
                    value,
                    background,
                } => ClassSequence::PlantedPosition {
                    position: base + stride * c as u64,
                    value: *value,
                    background: *background,
                },
                ClassSpec::Explicit(vs) => ClassSequence::Explicit(vs.clone()),
            })
            .collect();
        RewardModel::class_sequences(sequences)
    }
}

/// A fully parsed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub setting: Setting,
    pub graph: GraphSpec,
    pub reward: Option<RewardSpec>,
    pub classes: Option<ClassSpec>,
    pub policies: Vec<PolicySpec>,
    pub r: usize,
    pub views_needed: u32,
    pub delta: f64,
    pub p_pred: f64,
    pub trials: u64,
    pub seed: u64,
    pub warm_start: Vec<usize>,
    /// Infinite-setting fields.
    pub user_rates: Option<Vec<f64>>,
    pub class_rates: Option<Vec<f64>>,
    pub tau: f64,
    pub horizon: f64,
    pub warmup: Option<f64>,
}

fn split_call(line: usize, text: &str) -> Result<(String, Vec<String>), ExperimentError> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok((text.to_string(), Vec::new()));
    };
    if !text.ends_with(')') {
        return Err(ExperimentError::Config {
            line,
            msg: format!("missing ')' in '{text}'"),
        });
    }
    let name = text[..open].trim().to_string();
    let args = text[open + 1..text.len() - 1]
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    Ok((name, args))
}

fn arg<T: std::str::FromStr>(line: usize, args: &[String], idx: usize) -> Result<T, ExperimentError>
where
    T::Err: std::fmt::Display,
{
    let raw = args.get(idx).ok_or(ExperimentError::Config {
        line,
        msg: format!("missing argument {}", idx + 1),
    })?;
    raw.parse().map_err(|e| ExperimentError::Config {
        line,
        msg: format!("bad argument '{raw}': {e}"),
    })
}

fn parse_graph_spec(line: usize, text: &str) -> Result<GraphSpec, ExperimentError> {
    let (name, args) = split_call(line, text)?;
    match name.as_str() {
        "complete_bipartite" => Ok(GraphSpec::CompleteBipartite {
            n_users: arg(line, &args, 0)?,
            n_items: arg(line, &args, 1)?,
        }),
        "lopsided" => Ok(GraphSpec::Lopsided {
            n: arg(line, &args, 0)?,
        }),
        "biregular" => Ok(GraphSpec::Biregular {
            n_users: arg(line, &args, 0)?,
            n_items: arg(line, &args, 1)?,
            user_degree: arg(line, &args, 2)?,
        }),
        "disjoint_stars" => Ok(GraphSpec::DisjointStars {
            n_users: arg(line, &args, 0)?,
            items_per_user: arg(line, &args, 1)?,
        }),
        "random" => Ok(GraphSpec::Random {
            n_users: arg(line, &args, 0)?,
            n_items: arg(line, &args, 1)?,
            p: arg(line, &args, 2)?,
        }),
        "file" => Ok(GraphSpec::File(PathBuf::from(
            args.first().cloned().ok_or(ExperimentError::Config {
                line,
                msg: "file() needs a path".into(),
            })?,
        ))),
        other => Err(ExperimentError::Config {
            line,
            msg: format!("unknown graph generator '{other}'"),
        }),
    }
}

fn parse_reward_spec(line: usize, text: &str) -> Result<RewardSpec, ExperimentError> {
    let (name, args) = split_call(line, text)?;
    match (name.as_str(), args.len()) {
        ("planted", 1) => Ok(RewardSpec::Planted {
            k: arg(line, &args, 0)?,
            high: 1.0,
            low: 0.0,
        }),
        ("planted", 3) => Ok(RewardSpec::Planted {
            k: arg(line, &args, 0)?,
            high: arg(line, &args, 1)?,
            low: arg(line, &args, 2)?,
        }),
        ("planted_per_user", 1) => Ok(RewardSpec::PlantedPerUser {
            k: arg(line, &args, 0)?,
        }),
        ("planted_set", _) if !args.is_empty() => {
            let mut items = Vec::new();
            for i in 0..args.len() {
                items.push(arg(line, &args, i)?);
            }
            Ok(RewardSpec::PlantedSet(items))
        }
        ("planted_range", 2) => Ok(RewardSpec::PlantedRange {
            start: arg(line, &args, 0)?,
            end: arg(line, &args, 1)?,
        }),
        ("values_file", 1) => Ok(RewardSpec::ValuesFile(PathBuf::from(args[0].clone()))),
        _ => Err(ExperimentError::Config {
            line,
            msg: format!("unknown reward spec '{text}'"),
        }),
    }
}

fn parse_class_spec(line: usize, text: &str) -> Result<ClassSpec, ExperimentError> {
    let (name, args) = split_call(line, text)?;
    match (name.as_str(), args.len()) {
        ("constant", 1) => Ok(ClassSpec::Constant(arg(line, &args, 0)?)),
        ("geometric", 2) => Ok(ClassSpec::Geometric {
            initial: arg(line, &args, 0)?,
            ratio: arg(line, &args, 1)?,
        }),
        ("planted_position", 4) => Ok(ClassSpec::PlantedPosition {
            base: arg(line, &args, 0)?,
            stride: arg(line, &args, 1)?,
            value: arg(line, &args, 2)?,
            background: arg(line, &args, 3)?,
        }),
        ("explicit", _) if !args.is_empty() => {
            let mut vs = Vec::new();
            for i in 0..args.len() {
                vs.push(arg(line, &args, i)?);
            }
            Ok(ClassSpec::Explicit(vs))
        }
        _ => Err(ExperimentError::Config {
            line,
            msg: format!("unknown class sequence spec '{text}'"),
        }),
    }
}

fn parse_rate_list(line: usize, text: &str) -> Result<Vec<f64>, ExperimentError> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| ExperimentError::Config {
                line,
                msg: format!("bad rate '{}': {e}", s.trim()),
            })
        })
        .collect()
}

impl ExperimentConfig {
    /// Parse the flat `key = value` format; `#` comments and blank lines are
    /// ignored. `policy` may repeat; scalar keys may not.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut setting: Option<(usize, Setting)> = None;
        let mut graph: Option<GraphSpec> = None;
        let mut reward: Option<RewardSpec> = None;
        let mut classes: Option<ClassSpec> = None;
        let mut policies: Vec<PolicySpec> = Vec::new();
        let mut r: Option<usize> = None;
        let mut views_needed: Option<u32> = None;
        let mut delta: Option<f64> = None;
        let mut p_pred: Option<f64> = None;
        let mut trials: Option<u64> = None;
        let mut seed: Option<u64> = None;
        let mut warm_start: Vec<usize> = Vec::new();
        let mut user_rates: Option<Vec<f64>> = None;
        let mut class_rates: Option<Vec<f64>> = None;
        let mut tau: Option<f64> = None;
        let mut horizon: Option<f64> = None;
        let mut warmup: Option<f64> = None;

        let mut seen: std::collections::HashSet<String> = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ExperimentError::Config {
                line: lineno,
                msg: "expected 'key = value'".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(ExperimentError::Config {
                    line: lineno,
                    msg: format!("empty value for '{key}'"),
                });
            }
            if key != "policy" && !seen.insert(key.to_string()) {
                return Err(ExperimentError::Config {
                    line: lineno,
                    msg: format!("duplicate key '{key}'"),
                });
            }
            let parse_num = |what: &str| -> Result<f64, ExperimentError> {
                value.parse().map_err(|e| ExperimentError::Config {
                    line: lineno,
                    msg: format!("bad {what} '{value}': {e}"),
                })
            };
            match key {
                "setting" => {
                    let s = match value {
                        "finite" => Setting::Finite,
                        "infinite" => Setting::Infinite,
                        other => {
                            return Err(ExperimentError::Config {
                                line: lineno,
                                msg: format!("setting must be finite or infinite, got '{other}'"),
                            })
                        }
                    };
                    setting = Some((lineno, s));
                }
                "graph" => graph = Some(parse_graph_spec(lineno, value)?),
                "reward" => reward = Some(parse_reward_spec(lineno, value)?),
                "classes" => classes = Some(parse_class_spec(lineno, value)?),
                "policy" => {
                    policies.push(value.parse::<PolicySpec>().map_err(|e| {
                        ExperimentError::Config {
                            line: lineno,
                            msg: e.to_string(),
                        }
                    })?)
                }
                "r" => r = Some(parse_num("r")? as usize),
                "f" => views_needed = Some(parse_num("f")? as u32),
                "delta" => delta = Some(parse_num("delta")?),
                "p_pred" => p_pred = Some(parse_num("p_pred")?),
                "trials" => trials = Some(parse_num("trials")? as u64),
                "seed" => seed = Some(parse_num("seed")? as u64),
                "warm_start" => {
                    for part in value.split(',') {
                        warm_start.push(part.trim().parse().map_err(|e| {
                            ExperimentError::Config {
                                line: lineno,
                                msg: format!("bad warm_start item '{part}': {e}"),
                            }
                        })?);
                    }
                }
                "user_rate" | "user_rates" => user_rates = Some(parse_rate_list(lineno, value)?),
                "class_rate" | "class_rates" => class_rates = Some(parse_rate_list(lineno, value)?),
                "tau" => tau = Some(parse_num("tau")?),
                "horizon" => horizon = Some(parse_num("horizon")?),
                "warmup" => warmup = Some(parse_num("warmup")?),
                other => {
                    return Err(ExperimentError::Config {
                        line: lineno,
                        msg: format!("unknown key '{other}'"),
                    })
                }
            }
        }

        let (_, setting) = setting.ok_or(ExperimentError::Invalid(
            "missing 'setting' (finite | infinite)".into(),
        ))?;
        let graph = graph.ok_or(ExperimentError::Invalid("missing 'graph'".into()))?;
        if policies.is_empty() {
            return Err(ExperimentError::Invalid("no 'policy' given".into()));
        }
        match setting {
            Setting::Finite => {
                if reward.is_none() {
                    return Err(ExperimentError::Invalid(
                        "finite setting needs a 'reward' spec".into(),
                    ));
                }
                for p in &policies {
                    if !p.supports_finite() {
                        return Err(ExperimentError::Invalid(format!(
                            "policy {} is infinite-only",
                            p.name()
                        )));
                    }
                }
            }
            Setting::Infinite => {
                if classes.is_none() {
                    return Err(ExperimentError::Invalid(
                        "infinite setting needs a 'classes' spec".into(),
                    ));
                }
                for p in &policies {
                    if !p.supports_infinite() {
                        return Err(ExperimentError::Invalid(format!(
                            "policy {} is finite-only",
                            p.name()
                        )));
                    }
                }
            }
        }

        Ok(ExperimentConfig {
            setting,
            graph,
            reward,
            classes,
            policies,
            r: r.unwrap_or(1),
            views_needed: views_needed.unwrap_or(1),
            delta: delta.unwrap_or(0.0),
            p_pred: p_pred.unwrap_or(1.0),
            trials: trials.unwrap_or(1000),
            seed: seed.unwrap_or(0),
            warm_start,
            user_rates,
            class_rates,
            tau: tau.unwrap_or(1.0),
            horizon: horizon.unwrap_or(1000.0),
            warmup,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Ok(Self::parse(&std::fs::read_to_string(path)?)?)
    }

    fn infinite_config(&self, graph: Arc<AccessGraph>) -> InfiniteConfig {
        let expand = |rates: &Option<Vec<f64>>, n: usize| -> Vec<f64> {
            match rates {
                Some(v) if v.len() == 1 => vec![v[0]; n],
                Some(v) => v.clone(),
                None => vec![1.0; n],
            }
        };
        let user_rates = expand(&self.user_rates, graph.n_users());
        let class_rates = expand(&self.class_rates, graph.n_items());
        InfiniteConfig {
            graph,
            user_rates,
            class_rates,
            lifetime: self.tau,
            horizon: self.horizon,
            warmup: self.warmup.unwrap_or(5.0 * self.tau),
            r: self.r,
            delta: self.delta,
        }
    }
}

/// Overrides and output controls for a run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    /// Additionally write per-trial (finite) or per-visit (infinite) rows.
    pub per_trial: bool,
}

/// One aggregate result row.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub policy: String,
    pub setting: String,
    pub graph: String,
    pub reward: String,
    pub gamma: f64,
    pub gamma_ci_half: f64,
    pub min_user: usize,
    pub users_measured: usize,
    pub mean_latest: Option<f64>,
    pub trials: u64,
    pub r: usize,
    pub views_needed: u32,
    pub delta: f64,
    pub seed: u64,
}

pub const AGGREGATE_HEADER: &str =
    "policy,setting,graph,reward,gamma,gamma_ci_half,min_user,users_measured,mean_latest,trials,r,f,delta,seed";

impl AggregateRow {
    pub fn csv_line(&self) -> String {
        let latest = self
            .mean_latest
            .map(|x| x.to_string())
            .unwrap_or_default();
        format!(
            "\"{}\",{},\"{}\",\"{}\",{},{},{},{},{},{},{},{},{},{}",
            self.policy,
            self.setting,
            self.graph,
            self.reward,
            self.gamma,
            self.gamma_ci_half,
            self.min_user,
            self.users_measured,
            latest,
            self.trials,
            self.r,
            self.views_needed,
            self.delta,
            self.seed
        )
    }
}

/// Run every policy of the experiment, returning aggregate rows and writing
/// CSV artifacts when an output directory is set.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<Vec<AggregateRow>, ExperimentError> {
    let seed = opts.seed.unwrap_or(cfg.seed);
    let trials = opts.trials.unwrap_or(cfg.trials);
    let graph = Arc::new(cfg.graph.build(seed)?);

    let mut rows = Vec::new();
    let mut per_trial_rows: Vec<String> = Vec::new();

    match cfg.setting {
        Setting::Finite => {
            let reward_spec = cfg.reward.as_ref().expect("validated");
            let model_gen = reward_spec.build(&graph)?;
            for policy in &cfg.policies {
                let mut sim = FiniteSim::new(graph.clone(), model_gen.clone(), policy, cfg.r)?
                    .with_identification(cfg.views_needed, cfg.delta);
                sim.p_pred = cfg.p_pred;
                sim.warm_start = cfg.warm_start.clone();
                let batch = estimate_gamma_finite(&sim, trials, seed);
                rows.push(AggregateRow {
                    policy: policy.name(),
                    setting: cfg.setting.name().into(),
                    graph: cfg.graph.name(),
                    reward: reward_spec.name(),
                    gamma: batch.estimate.gamma,
                    gamma_ci_half: batch.estimate.gamma_ci_half,
                    min_user: batch.estimate.min_user,
                    users_measured: batch.estimate.per_user.len(),
                    mean_latest: None,
                    trials,
                    r: cfg.r,
                    views_needed: cfg.views_needed,
                    delta: cfg.delta,
                    seed,
                });
                if opts.per_trial {
                    for trial in 0..trials {
                        let t = run_finite_trial(&sim, seed, trial);
                        for u in 0..graph.n_users() {
                            per_trial_rows.push(format!(
                                "{trial},{u},{},{},\"{}\",{},{seed}",
                                t.earned[u],
                                t.optimal[u],
                                policy.name(),
                                cfg.r
                            ));
                        }
                    }
                }
            }
        }
        Setting::Infinite => {
            let class_spec = cfg.classes.as_ref().expect("validated");
            let model = Arc::new(class_spec.build(graph.n_items()));
            let icfg = cfg.infinite_config(graph.clone());
            for policy in &cfg.policies {
                let batch = estimate_gamma_infinite(&icfg, &model, policy, trials, seed)?;
                rows.push(AggregateRow {
                    policy: policy.name(),
                    setting: cfg.setting.name().into(),
                    graph: cfg.graph.name(),
                    reward: class_spec.name(),
                    gamma: batch.estimate.gamma,
                    gamma_ci_half: batch.estimate.gamma_ci_half,
                    min_user: batch.estimate.min_user,
                    users_measured: batch.estimate.per_user.len(),
                    mean_latest: Some(batch.mean_latest),
                    trials,
                    r: cfg.r,
                    views_needed: cfg.views_needed,
                    delta: cfg.delta,
                    seed,
                });
                if opts.per_trial {
                    for trial in 0..trials {
                        let run = run_infinite(&icfg, &model, policy, derive_seed(seed, trial))?;
                        for rec in &run.records {
                            let ratio = rec
                                .ratio()
                                .map(|x| x.to_string())
                                .unwrap_or_default();
                            per_trial_rows.push(format!(
                                "{trial},{},{},{},{},{},{},{ratio},\"{}\"",
                                rec.s,
                                rec.user,
                                rec.time,
                                rec.latest_size,
                                rec.earned,
                                rec.optimal,
                                policy.name()
                            ));
                        }
                    }
                }
            }
        }
    }

    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir)?;
        let mut agg = String::new();
        let _ = writeln!(agg, "{AGGREGATE_HEADER}");
        for row in &rows {
            let _ = writeln!(agg, "{}", row.csv_line());
        }
        std::fs::write(dir.join("aggregate.csv"), agg)?;
        if opts.per_trial {
            let (file, header) = match cfg.setting {
                Setting::Finite => ("trials.csv", "trial,user,reward,optimal,policy,r,seed"),
                Setting::Infinite => (
                    "visits.csv",
                    "trial,s,user,t,L_size,reward,optimal,ratio,policy",
                ),
            };
            let mut body = String::new();
            let _ = writeln!(body, "{header}");
            for row in &per_trial_rows {
                let _ = writeln!(body, "{row}");
            }
            std::fs::write(dir.join(file), body)?;
        }
    }

    Ok(rows)
}
