//! Experiment harness: time series, steady-state averages, parameter
//! sweeps and lattice snapshots.

use std::sync::Arc;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dynamics::{init_population, mcs_step, PopulationState};
use crate::error::{Error, Result};
use crate::model::{classify, ModelParams, ReputationClass, Strategy};
use crate::network::{Adjacency, NetworkSpec};
use crate::rng::{tag, RngStream};

/// Distribution of initial reputations. Samples are clamped into the
/// reputation bounds by the caller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialReputationDist {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    /// With probability `weight` draw from the first component, otherwise
    /// from the second.
    Bimodal {
        mu1: f64,
        sigma1: f64,
        mu2: f64,
        sigma2: f64,
        weight: f64,
    },
}

impl InitialReputationDist {
    pub fn default_uniform() -> Self {
        Self::Uniform { lo: 0.0, hi: 2.0 }
    }

    pub fn default_gaussian() -> Self {
        Self::Gaussian {
            mu: 1.0,
            sigma: 0.3,
        }
    }

    pub fn default_bimodal() -> Self {
        Self::Bimodal {
            mu1: 0.5,
            sigma1: 0.15,
            mu2: 1.5,
            sigma2: 0.15,
            weight: 0.5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Gaussian { .. } => "gaussian",
            Self::Bimodal { .. } => "bimodal",
        }
    }

    /// Mean before clamping.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Gaussian { mu, .. } => mu,
            Self::Bimodal {
                mu1, mu2, weight, ..
            } => weight * mu1 + (1.0 - weight) * mu2,
        }
    }

    /// Checks parameters; keys in errors are prefixed with `init.`.
    pub fn validate(&self) -> Result<()> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("init.{key}"), "must be finite"))
            }
        };
        let sigma_ok = |key: &str, v: f64| {
            finite(key, v)?;
            if v < 0.0 {
                return Err(Error::param(format!("init.{key}"), "must be non-negative"));
            }
            Ok(())
        };
        match *self {
            Self::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if lo >= hi {
                    return Err(Error::param("init.lo", "must be below init.hi"));
                }
            }
            Self::Gaussian { mu, sigma } => {
                finite("mu", mu)?;
                sigma_ok("sigma", sigma)?;
            }
            Self::Bimodal {
                mu1,
                sigma1,
                mu2,
                sigma2,
                weight,
            } => {
                finite("mu1", mu1)?;
                finite("mu2", mu2)?;
                sigma_ok("sigma1", sigma1)?;
                sigma_ok("sigma2", sigma2)?;
                if !(0.0..=1.0).contains(&weight) {
                    return Err(Error::param("init.weight", "outside [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.uniform(),
            Self::Gaussian { mu, sigma } => gaussian(mu, sigma, rng),
            Self::Bimodal {
                mu1,
                sigma1,
                mu2,
                sigma2,
                weight,
            } => {
                if rng.bernoulli(weight) {
                    gaussian(mu1, sigma1, rng)
                } else {
                    gaussian(mu2, sigma2, rng)
                }
            }
        }
    }
}

fn gaussian(mu: f64, sigma: f64, rng: &mut RngStream) -> f64 {
    if sigma == 0.0 {
        return mu;
    }
    Normal::new(mu, sigma)
        .expect("validated sigma")
        .sample(rng.inner_mut())
}

/// Four strategy/reputation states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StateCode {
    Hc = 0,
    Hd = 1,
    Lc = 2,
    Ld = 3,
}

impl StateCode {
    pub fn of(strategy: Strategy, class: ReputationClass) -> Self {
        match (strategy, class) {
            (Strategy::C, ReputationClass::High) => Self::Hc,
            (Strategy::D, ReputationClass::High) => Self::Hd,
            (Strategy::C, ReputationClass::Low) => Self::Lc,
            (Strategy::D, ReputationClass::Low) => Self::Ld,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Hc),
            1 => Some(Self::Hd),
            2 => Some(Self::Lc),
            3 => Some(Self::Ld),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Hc => "HC",
            Self::Hd => "HD",
            Self::Lc => "LC",
            Self::Ld => "LD",
        }
    }

    /// Palette: HC red, HD dark blue, LC pink, LD light blue.
    pub fn rgb(self) -> [u8; 3] {
        match self {
            Self::Hc => [220, 50, 47],
            Self::Hd => [38, 70, 140],
            Self::Lc => [240, 150, 170],
            Self::Ld => [140, 190, 230],
        }
    }

    pub fn from_rgb(rgb: [u8; 3]) -> Option<Self> {
        [Self::Hc, Self::Hd, Self::Lc, Self::Ld]
            .into_iter()
            .find(|s| s.rgb() == rgb)
    }
}

/// Observables of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub step: u64,
    pub f_c: f64,
    pub theta: f64,
    pub n_hc: usize,
    pub n_hd: usize,
    pub n_lc: usize,
    pub n_ld: usize,
    pub mean_payoff: f64,
}

impl ObservableRecord {
    pub fn of(pop: &PopulationState) -> Self {
        let theta = pop.theta();
        let mut counts = [0usize; 4];
        let mut payoff = 0.0;
        for a in pop.agents() {
            counts[StateCode::of(a.strategy, classify(a.reputation, theta)).code() as usize] += 1;
            payoff += a.round_payoff;
        }
        let n = pop.len();
        Self {
            step: pop.step(),
            f_c: (counts[0] + counts[2]) as f64 / n as f64,
            theta,
            n_hc: counts[0],
            n_hd: counts[1],
            n_lc: counts[2],
            n_ld: counts[3],
            mean_payoff: payoff / n as f64,
        }
    }

    pub fn population(&self) -> usize {
        self.n_hc + self.n_hd + self.n_lc + self.n_ld
    }
}

/// State grid of a square lattice, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotGrid {
    pub step: u64,
    pub side: usize,
    pub cells: Vec<StateCode>,
}

impl SnapshotGrid {
    pub fn count(&self, state: StateCode) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }
}

/// Labels every lattice site with its state. Fails for non-lattice graphs.
pub fn classify_snapshot(pop: &PopulationState, network: &NetworkSpec) -> Result<SnapshotGrid> {
    let side = network.lattice_side().ok_or_else(|| {
        Error::InvalidConfig("snapshots are only defined on the square lattice".into())
    })?;
    if side * side != pop.len() {
        return Err(Error::InvalidConfig(format!(
            "population of {} does not fill a {side}x{side} lattice",
            pop.len()
        )));
    }
    let theta = pop.theta();
    let cells = pop
        .agents()
        .iter()
        .map(|a| StateCode::of(a.strategy, classify(a.reputation, theta)))
        .collect();
    Ok(SnapshotGrid {
        step: pop.step(),
        side,
        cells,
    })
}

/// Output of a single run.
#[derive(Clone, Debug, PartialEq)]
pub struct Timeseries {
    pub records: Vec<ObservableRecord>,
    pub snapshots: Vec<SnapshotGrid>,
    /// Final population, for per-node exports.
    pub final_state: Option<PopulationState>,
}

/// Seed for the dynamics of one replicate of one parameter cell. Depends
/// only on the master seed, the cell's parameters and the replicate index,
/// so results do not depend on scheduling.
pub fn dynamics_seed(master: u64, params: &ModelParams, replicate: u32) -> u64 {
    crate::rng::derive_seed(
        master,
        &[
            tag::DYNAMICS,
            params.p.to_bits(),
            params.m.to_bits(),
            params.b_l.to_bits(),
            replicate as u64,
        ],
    )
}

/// Initial population shared by all replicates of a configuration.
pub fn initial_population(cfg: &RunConfig, adjacency: Arc<Adjacency>) -> PopulationState {
    let mut rng = RngStream::derived(cfg.master_seed, &[tag::INIT]);
    init_population(
        adjacency,
        &cfg.init_dist,
        cfg.cooperator_fraction,
        &cfg.params,
        &mut rng,
    )
}

/// Runs one replicate: one record per step from 0 through `horizon`, with
/// snapshots at the requested steps.
pub fn run_timeseries(cfg: &RunConfig, replicate: u32) -> Result<Timeseries> {
    let adjacency = Arc::new(cfg.network.build()?);
    run_timeseries_on(cfg, adjacency, replicate)
}

/// As [`run_timeseries`] but reusing an already built graph.
pub fn run_timeseries_on(
    cfg: &RunConfig,
    adjacency: Arc<Adjacency>,
    replicate: u32,
) -> Result<Timeseries> {
    if !cfg.snapshot_steps.is_empty() && cfg.network.lattice_side().is_none() {
        return Err(Error::InvalidConfig(
            "snapshot steps requested on a non-lattice topology".into(),
        ));
    }
    let mut pop = initial_population(cfg, adjacency);
    let mut rng = RngStream::new(dynamics_seed(cfg.master_seed, &cfg.params, replicate));
    let mut records = Vec::with_capacity(cfg.horizon as usize + 1);
    let mut snapshots = Vec::with_capacity(cfg.snapshot_steps.len());
    let take_snapshot = |pop: &PopulationState, snapshots: &mut Vec<SnapshotGrid>| {
        if cfg.snapshot_steps.contains(&pop.step()) {
            snapshots.push(classify_snapshot(pop, &cfg.network)?);
        }
        Ok::<_, Error>(())
    };
    records.push(ObservableRecord::of(&pop));
    take_snapshot(&pop, &mut snapshots)?;
    for _ in 0..cfg.horizon {
        mcs_step(&mut pop, &cfg.params, &mut rng);
        records.push(ObservableRecord::of(&pop));
        take_snapshot(&pop, &mut snapshots)?;
    }
    Ok(Timeseries {
        records,
        snapshots,
        final_state: Some(pop),
    })
}

/// Time averages of `f_c` and `theta` over the last `window` records.
pub fn steady_state_estimate(
    records: &[ObservableRecord],
    burn_in: usize,
    window: usize,
) -> Result<(f64, f64)> {
    if window == 0 {
        return Err(Error::InvalidConfig(
            "steady-state window must be positive".into(),
        ));
    }
    if burn_in + window > records.len() {
        return Err(Error::InvalidConfig(format!(
            "burn_in {burn_in} + window {window} exceeds {} records",
            records.len()
        )));
    }
    let tail = &records[records.len() - window..];
    let f_c = tail.iter().map(|r| r.f_c).sum::<f64>() / window as f64;
    let theta = tail.iter().map(|r| r.theta).sum::<f64>() / window as f64;
    Ok((f_c, theta))
}

/// Statistics of one parameter cell over its replicates.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub p: f64,
    pub m: f64,
    pub b_l: f64,
    pub topology: String,
    pub replicates: usize,
    pub f_c_mean: f64,
    pub f_c_std: f64,
    pub theta_mean: f64,
    /// Per-replicate steady-state cooperation densities.
    pub replicate_f_c: Vec<f64>,
    /// Per-replicate steady-state thresholds.
    pub replicate_theta: Vec<f64>,
}

impl SweepCell {
    pub fn from_replicates(params: &ModelParams, topology: &str, outcomes: &[(f64, f64)]) -> Self {
        let replicate_f_c: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
        let replicate_theta: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
        let (f_c_mean, f_c_std) = mean_std(&replicate_f_c);
        let (theta_mean, _) = mean_std(&replicate_theta);
        Self {
            p: params.p,
            m: params.m,
            b_l: params.b_l,
            topology: topology.to_string(),
            replicates: outcomes.len(),
            f_c_mean,
            f_c_std,
            theta_mean,
            replicate_f_c,
            replicate_theta,
        }
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Cartesian grid over `b_l`, `p` and `m` on top of a base configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub base: RunConfig,
    pub p_values: Vec<f64>,
    pub m_values: Vec<f64>,
    pub b_l_values: Vec<f64>,
}

impl GridSpec {
    /// Single-`b_l` grid using the base configuration's temptation.
    pub fn new(base: RunConfig, p_values: Vec<f64>, m_values: Vec<f64>) -> Self {
        let b_l_values = vec![base.params.b_l];
        Self {
            base,
            p_values,
            m_values,
            b_l_values,
        }
    }

    /// Cell parameters in output order: `b_l`, then `p`, then `m`.
    pub fn cell_params(&self) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for &b_l in &self.b_l_values {
            for &p in &self.p_values {
                for &m in &self.m_values {
                    out.push(ModelParams {
                        b_l,
                        p,
                        m,
                        ..self.base.params.clone()
                    });
                }
            }
        }
        out
    }
}

/// Inclusive evenly spaced values, `steps` of them.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| {
                let t = i as f64 / (steps - 1) as f64;
                // Round to 12 decimals so 0.1-spaced grids print and hash cleanly.
                ((lo + (hi - lo) * t) * 1e12).round() / 1e12
            })
            .collect(),
    }
}

/// Steady state of one replicate of one cell.
pub fn replicate_steady_state(
    cfg: &RunConfig,
    adjacency: Arc<Adjacency>,
    replicate: u32,
) -> Result<(f64, f64)> {
    let cfg = RunConfig {
        snapshot_steps: Vec::new(),
        ..cfg.clone()
    };
    let series = run_timeseries_on(&cfg, adjacency, replicate)?;
    steady_state_estimate(&series.records, cfg.burn_in as usize, cfg.window as usize)
}

/// Runs every cell of the grid with `base.replicates` replicates each.
/// Replicates are scheduled over `jobs` workers; output order and values
/// do not depend on `jobs`.
pub fn sweep_grid(grid: &GridSpec, jobs: usize) -> Result<Vec<SweepCell>> {
    grid.base.validate()?;
    let adjacency = Arc::new(grid.base.network.build()?);
    let cells = grid.cell_params();
    let reps = grid.base.replicates;
    let tasks: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|c| (0..reps).map(move |r| (c, r)))
        .collect();
    let run = |&(c, r): &(usize, u32)| {
        let cfg = RunConfig {
            params: cells[c].clone(),
            ..grid.base.clone()
        };
        replicate_steady_state(&cfg, Arc::clone(&adjacency), r)
    };
    let outcomes = parallel_map(&tasks, jobs, run)?;
    let topology = grid.base.network.topology_id();
    Ok(cells
        .iter()
        .zip(outcomes.chunks(reps as usize))
        .map(|(params, chunk)| SweepCell::from_replicates(params, topology, chunk))
        .collect())
}

/// Runs `base.replicates` replicates of one configuration and returns the
/// per-step mean of each record field over replicates.
pub fn averaged_timeseries(cfg: &RunConfig, jobs: usize) -> Result<Vec<ObservableRecord>> {
    cfg.validate()?;
    let adjacency = Arc::new(cfg.network.build()?);
    let cfg = RunConfig {
        snapshot_steps: Vec::new(),
        ..cfg.clone()
    };
    let reps: Vec<u32> = (0..cfg.replicates).collect();
    let runs = parallel_map(&reps, jobs, |&r| {
        run_timeseries_on(&cfg, Arc::clone(&adjacency), r).map(|t| t.records)
    })?;
    Ok(average_records(&runs))
}

/// Field-wise mean of equally long record series. Counts are rounded.
pub fn average_records(runs: &[Vec<ObservableRecord>]) -> Vec<ObservableRecord> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    let k = runs.len() as f64;
    (0..first.len())
        .map(|t| {
            let mean = |f: &dyn Fn(&ObservableRecord) -> f64| {
                runs.iter().map(|r| f(&r[t])).sum::<f64>() / k
            };
            let count = |f: &dyn Fn(&ObservableRecord) -> usize| {
                (runs.iter().map(|r| f(&r[t]) as f64).sum::<f64>() / k).round() as usize
            };
            ObservableRecord {
                step: first[t].step,
                f_c: mean(&|r| r.f_c),
                theta: mean(&|r| r.theta),
                n_hc: count(&|r| r.n_hc),
                n_hd: count(&|r| r.n_hd),
                n_lc: count(&|r| r.n_lc),
                n_ld: count(&|r| r.n_ld),
                mean_payoff: mean(&|r| r.mean_payoff),
            }
        })
        .collect()
}

/// Maps `f` over `items` on up to `jobs` threads, preserving order.
pub fn parallel_map<T, U, F>(items: &[T], jobs: usize, f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
    }
    let _ = jobs;
    items.iter().map(f).collect()
}
