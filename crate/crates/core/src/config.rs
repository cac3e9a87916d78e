//! Run configuration files.
//!
//! Configs are TOML with five flat sections. Every key is optional and
//! unknown keys are rejected:
//!
//! ```toml
//! [network]
//! topology = "lattice"     # or "small-world"
//! side = 50                # lattice only
//! periodic = true          # lattice only
//! # n = 2500, k = 10, beta = 0.5, graph_seed = 1   (small-world only)
//!
//! [params]
//! b_l = 1.1
//! c = 1.0
//! delta = 0.01
//! p = 0.9
//! m = 0.5
//! kappa = 0.1
//! r_min = 0.0
//! r_max = 2.0
//! shared_cost_variant = false
//! cumulative_payoff = false
//!
//! [init]
//! distribution = "uniform" # or "gaussian", "bimodal"
//! lo = 0.0                 # uniform: lo, hi
//! hi = 2.0                 # gaussian: mu, sigma
//!                          # bimodal: mu1, sigma1, mu2, sigma2, weight
//! cooperator_fraction = 0.5
//!
//! [run]
//! horizon = 5000
//! burn_in = 4500
//! window = 500
//! snapshot_steps = []
//! replicates = 10
//! seed = 42
//!
//! [output]
//! dir = "out"
//! ```
//!
//! A small-world graph without an explicit `graph_seed` gets one derived
//! from the run seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::InitialReputationDist;
use crate::model::ModelParams;
use crate::network::NetworkSpec;
use crate::rng::{derive_seed, tag};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "REPGAME_SEED";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub network: NetworkSpec,
    pub params: ModelParams,
    pub init_dist: InitialReputationDist,
    /// Probability that an agent starts as a cooperator.
    pub cooperator_fraction: f64,
    pub horizon: u64,
    pub burn_in: u64,
    pub window: u64,
    pub snapshot_steps: Vec<u64>,
    pub replicates: u32,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

pub const DEFAULT_SEED: u64 = 42;

/// Seeds are stored as TOML integers, which are signed 64-bit.
pub const MAX_SEED: u64 = i64::MAX as u64;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            network: NetworkSpec::SquareLattice {
                side: 50,
                periodic: true,
            },
            params: ModelParams::default(),
            init_dist: InitialReputationDist::default_uniform(),
            cooperator_fraction: 0.5,
            horizon: 5000,
            burn_in: 4500,
            window: 500,
            snapshot_steps: Vec::new(),
            replicates: 10,
            master_seed: DEFAULT_SEED,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.validate().map_err(|e| match e {
            Error::InvalidSpec(msg) => Error::param("network", msg),
            other => other,
        })?;
        self.params.validate()?;
        self.init_dist.validate()?;
        if !(0.0..=1.0).contains(&self.cooperator_fraction) {
            return Err(Error::param("init.cooperator_fraction", "outside [0, 1]"));
        }
        if self.window == 0 {
            return Err(Error::param("run.window", "must be positive"));
        }
        if self.burn_in + self.window > self.horizon {
            return Err(Error::param(
                "run.horizon",
                format!(
                    "burn_in {} + window {} exceeds horizon {}",
                    self.burn_in, self.window, self.horizon
                ),
            ));
        }
        if let Some(&bad) = self.snapshot_steps.iter().find(|&&s| s > self.horizon) {
            return Err(Error::param(
                "run.snapshot_steps",
                format!("step {bad} beyond horizon {}", self.horizon),
            ));
        }
        if !self.snapshot_steps.is_empty() && self.network.lattice_side().is_none() {
            return Err(Error::param(
                "run.snapshot_steps",
                "snapshots require the lattice topology",
            ));
        }
        if self.master_seed > MAX_SEED {
            return Err(Error::param(
                "run.seed",
                format!("must not exceed {MAX_SEED}"),
            ));
        }
        if let NetworkSpec::SmallWorld { graph_seed, .. } = self.network {
            if graph_seed > MAX_SEED {
                return Err(Error::param(
                    "network.graph_seed",
                    format!("must not exceed {MAX_SEED}"),
                ));
            }
        }
        if self.replicates == 0 {
            return Err(Error::param("run.replicates", "must be at least 1"));
        }
        Ok(())
    }

    /// Parses and validates TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })?;
        let cfg = raw.resolve()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&RawConfig::from(self)).expect("config serializes")
    }

    /// Reads the seed override from [`SEED_ENV`], if set.
    pub fn env_seed() -> Result<Option<u64>> {
        match std::env::var(SEED_ENV) {
            Ok(v) => {
                v.trim().parse().map(Some).map_err(|_| {
                    Error::param(SEED_ENV, format!("`{v}` is not an unsigned integer"))
                })
            }
            Err(_) => Ok(None),
        }
    }
}

/// Loads a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml_str(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn write_config(cfg: &RunConfig, path: &Path) -> Result<()> {
    std::fs::write(path, cfg.to_toml_string()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    network: RawNetwork,
    #[serde(default)]
    params: ModelParams,
    #[serde(default)]
    init: RawInit,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    #[serde(skip_serializing_if = "Option::is_none")]
    topology: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    periodic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    graph_seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInit {
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cooperator_fraction: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    burn_in: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot_steps: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replicates: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
}

fn reject(section: &str, topic: &str, present: &[(&str, bool)]) -> Result<()> {
    match present.iter().find(|(_, set)| *set) {
        Some((key, _)) => Err(Error::param(
            format!("{section}.{key}"),
            format!("not used by {topic}"),
        )),
        None => Ok(()),
    }
}

impl RawConfig {
    fn resolve(self) -> Result<RunConfig> {
        let defaults = RunConfig::default();
        let run = self.run;
        let master_seed = run.seed.unwrap_or(defaults.master_seed);

        let net = self.network;
        let network = match net.topology.as_deref().unwrap_or("lattice") {
            "lattice" => {
                reject(
                    "network",
                    "the lattice",
                    &[
                        ("n", net.n.is_some()),
                        ("k", net.k.is_some()),
                        ("beta", net.beta.is_some()),
                        ("graph_seed", net.graph_seed.is_some()),
                    ],
                )?;
                NetworkSpec::SquareLattice {
                    side: net.side.unwrap_or(50),
                    periodic: net.periodic.unwrap_or(true),
                }
            }
            "small-world" => {
                reject(
                    "network",
                    "the small-world graph",
                    &[
                        ("side", net.side.is_some()),
                        ("periodic", net.periodic.is_some()),
                    ],
                )?;
                NetworkSpec::SmallWorld {
                    n: net.n.unwrap_or(2500),
                    k: net.k.unwrap_or(10),
                    beta: net.beta.unwrap_or(0.5),
                    graph_seed: net
                        .graph_seed
                        .unwrap_or_else(|| derive_seed(master_seed, &[tag::GRAPH]) & MAX_SEED),
                }
            }
            other => {
                return Err(Error::param(
                    "network.topology",
                    format!("unknown topology `{other}` (expected lattice or small-world)"),
                ))
            }
        };

        let init = self.init;
        let init_dist =
            match init.distribution.as_deref().unwrap_or("uniform") {
                "uniform" => {
                    reject(
                        "init",
                        "the uniform distribution",
                        &[
                            ("mu", init.mu.is_some()),
                            ("sigma", init.sigma.is_some()),
                            ("mu1", init.mu1.is_some()),
                            ("sigma1", init.sigma1.is_some()),
                            ("mu2", init.mu2.is_some()),
                            ("sigma2", init.sigma2.is_some()),
                            ("weight", init.weight.is_some()),
                        ],
                    )?;
                    InitialReputationDist::Uniform {
                        lo: init.lo.unwrap_or(0.0),
                        hi: init.hi.unwrap_or(2.0),
                    }
                }
                "gaussian" => {
                    reject(
                        "init",
                        "the gaussian distribution",
                        &[
                            ("lo", init.lo.is_some()),
                            ("hi", init.hi.is_some()),
                            ("mu1", init.mu1.is_some()),
                            ("sigma1", init.sigma1.is_some()),
                            ("mu2", init.mu2.is_some()),
                            ("sigma2", init.sigma2.is_some()),
                            ("weight", init.weight.is_some()),
                        ],
                    )?;
                    InitialReputationDist::Gaussian {
                        mu: init.mu.unwrap_or(1.0),
                        sigma: init.sigma.unwrap_or(0.3),
                    }
                }
                "bimodal" => {
                    reject(
                        "init",
                        "the bimodal distribution",
                        &[
                            ("lo", init.lo.is_some()),
                            ("hi", init.hi.is_some()),
                            ("mu", init.mu.is_some()),
                            ("sigma", init.sigma.is_some()),
                        ],
                    )?;
                    InitialReputationDist::Bimodal {
                        mu1: init.mu1.unwrap_or(0.5),
                        sigma1: init.sigma1.unwrap_or(0.15),
                        mu2: init.mu2.unwrap_or(1.5),
                        sigma2: init.sigma2.unwrap_or(0.15),
                        weight: init.weight.unwrap_or(0.5),
                    }
                }
                other => return Err(Error::param(
                    "init.distribution",
                    format!(
                        "unknown distribution `{other}` (expected uniform, gaussian or bimodal)"
                    ),
                )),
            };

        Ok(RunConfig {
            network,
            params: self.params,
            init_dist,
            cooperator_fraction: init
                .cooperator_fraction
                .unwrap_or(defaults.cooperator_fraction),
            horizon: run.horizon.unwrap_or(defaults.horizon),
            burn_in: run.burn_in.unwrap_or(defaults.burn_in),
            window: run.window.unwrap_or(defaults.window),
            snapshot_steps: run.snapshot_steps.unwrap_or_default(),
            replicates: run.replicates.unwrap_or(defaults.replicates),
            master_seed,
            output_dir: self.output.dir.unwrap_or(defaults.output_dir),
        })
    }
}

impl From<&RunConfig> for RawConfig {
    fn from(cfg: &RunConfig) -> Self {
        let network = match cfg.network {
            NetworkSpec::SquareLattice { side, periodic } => RawNetwork {
                topology: Some("lattice".into()),
                side: Some(side),
                periodic: Some(periodic),
                ..RawNetwork::default()
            },
            NetworkSpec::SmallWorld {
                n,
                k,
                beta,
                graph_seed,
            } => RawNetwork {
                topology: Some("small-world".into()),
                n: Some(n),
                k: Some(k),
                beta: Some(beta),
                graph_seed: Some(graph_seed),
                ..RawNetwork::default()
            },
        };
        let mut init = RawInit {
            distribution: Some(cfg.init_dist.name().into()),
            cooperator_fraction: Some(cfg.cooperator_fraction),
            ..RawInit::default()
        };
        match cfg.init_dist {
            InitialReputationDist::Uniform { lo, hi } => {
                init.lo = Some(lo);
                init.hi = Some(hi);
            }
            InitialReputationDist::Gaussian { mu, sigma } => {
                init.mu = Some(mu);
                init.sigma = Some(sigma);
            }
            InitialReputationDist::Bimodal {
                mu1,
                sigma1,
                mu2,
                sigma2,
                weight,
            } => {
                init.mu1 = Some(mu1);
                init.sigma1 = Some(sigma1);
                init.mu2 = Some(mu2);
                init.sigma2 = Some(sigma2);
                init.weight = Some(weight);
            }
        }
        RawConfig {
            network,
            params: cfg.params.clone(),
            init,
            run: RawRun {
                horizon: Some(cfg.horizon),
                burn_in: Some(cfg.burn_in),
                window: Some(cfg.window),
                snapshot_steps: Some(cfg.snapshot_steps.clone()),
                replicates: Some(cfg.replicates),
                seed: Some(cfg.master_seed),
            },
            output: RawOutput {
                dir: Some(cfg.output_dir.clone()),
            },
        }
    }
}
