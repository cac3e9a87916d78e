//! Named experiment presets.
//!
//! | name        | what it runs                                                 |
//! |-------------|--------------------------------------------------------------|
//! | `fig2-sl`   | p–m cooperation heatmap on the 50×50 lattice, `b_l = 1.1`    |
//! | `fig2-ws`   | same heatmap on the small-world graph                        |
//! | `fig4-b11`  | lattice snapshots at `m = 0.6, p = 0.9, b_l = 1.1`           |
//! | `fig4-b15`  | same with `b_l = 1.5`                                        |
//! | `fig4-b20`  | same with `b_l = 2.0`                                        |
//! | `fig5-sl`   | steady threshold versus `m` for three `b_l` on the lattice   |
//! | `fig5-ws`   | same on the small-world graph                                |
//! | `fig6`      | cooperation under three initial reputation distributions     |

use std::path::Path;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{
    averaged_timeseries, linspace, run_timeseries, sweep_grid, GridSpec, InitialReputationDist,
    ObservableRecord, SweepCell, Timeseries,
};
use crate::model::ModelParams;
use crate::network::NetworkSpec;
use crate::output;
use crate::rng::{derive_seed, tag};

pub const PRESET_NAMES: [&str; 8] = [
    "fig2-sl", "fig2-ws", "fig4-b11", "fig4-b15", "fig4-b20", "fig5-sl", "fig5-ws", "fig6",
];

/// Steps at which the snapshot presets capture the lattice.
pub const SNAPSHOT_STEPS: [u64; 4] = [0, 500, 2000, 3000];

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub plan: PresetPlan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresetPlan {
    /// Steady-state grid over `b_l`, `p` and `m`.
    Sweep(GridSpec),
    /// Replicate-averaged time series plus lattice snapshots of replicate 0.
    Snapshots(RunConfig),
    /// Replicate-averaged time series for every combination of topology,
    /// `m` and initial distribution.
    Distributions {
        base: RunConfig,
        networks: Vec<NetworkSpec>,
        m_values: Vec<f64>,
        dists: Vec<InitialReputationDist>,
    },
}

pub fn lattice() -> NetworkSpec {
    NetworkSpec::SquareLattice {
        side: 50,
        periodic: true,
    }
}

pub fn small_world(master_seed: u64) -> NetworkSpec {
    NetworkSpec::SmallWorld {
        n: 2500,
        k: 10,
        beta: 0.5,
        graph_seed: derive_seed(master_seed, &[tag::GRAPH]) & crate::config::MAX_SEED,
    }
}

fn base(network: NetworkSpec, params: ModelParams, master_seed: u64) -> RunConfig {
    RunConfig {
        network,
        params,
        master_seed,
        ..RunConfig::default()
    }
}

fn params(p: f64, m: f64, b_l: f64) -> ModelParams {
    ModelParams {
        p,
        m,
        b_l,
        c: 1.0,
        ..ModelParams::default()
    }
}

fn grid(
    cfg: RunConfig,
    p_values: Vec<f64>,
    m_values: Vec<f64>,
    b_l_values: Vec<f64>,
) -> PresetPlan {
    PresetPlan::Sweep(GridSpec {
        base: cfg,
        p_values,
        m_values,
        b_l_values,
    })
}

fn snapshots(b_l: f64, master_seed: u64) -> PresetPlan {
    PresetPlan::Snapshots(RunConfig {
        horizon: 3000,
        burn_in: 2500,
        window: 500,
        replicates: 5,
        snapshot_steps: SNAPSHOT_STEPS.to_vec(),
        ..base(lattice(), params(0.9, 0.6, b_l), master_seed)
    })
}

/// Looks up a preset by name.
pub fn preset(name: &str, master_seed: u64) -> Option<Preset> {
    let tenths = linspace(0.0, 1.0, 11);
    let (summary, plan) = match name {
        "fig2-sl" => (
            "cooperation on the p-m plane, 50x50 lattice, b_l = 1.1",
            grid(
                base(lattice(), params(0.9, 0.5, 1.1), master_seed),
                tenths.clone(),
                tenths,
                vec![1.1],
            ),
        ),
        "fig2-ws" => (
            "cooperation on the p-m plane, small-world N = 2500, k = 10, beta = 0.5, b_l = 1.1",
            grid(
                base(small_world(master_seed), params(0.9, 0.5, 1.1), master_seed),
                tenths.clone(),
                tenths,
                vec![1.1],
            ),
        ),
        "fig4-b11" => ("lattice snapshots at MCS 0/500/2000/3000, p = 0.9, m = 0.6, b_l = 1.1", snapshots(1.1, master_seed)),
        "fig4-b15" => ("lattice snapshots at MCS 0/500/2000/3000, p = 0.9, m = 0.6, b_l = 1.5", snapshots(1.5, master_seed)),
        "fig4-b20" => ("lattice snapshots at MCS 0/500/2000/3000, p = 0.9, m = 0.6, b_l = 2.0", snapshots(2.0, master_seed)),
        "fig5-sl" => (
            "steady threshold vs m for b_l = 1.1, 1.5, 2.0 on the lattice, p = 0.9",
            grid(
                base(lattice(), params(0.9, 0.5, 1.1), master_seed),
                vec![0.9],
                tenths,
                vec![1.1, 1.5, 2.0],
            ),
        ),
        "fig5-ws" => (
            "steady threshold vs m for b_l = 1.1, 1.5, 2.0 on the small-world graph, p = 0.9",
            grid(
                base(small_world(master_seed), params(0.9, 0.5, 1.1), master_seed),
                vec![0.9],
                tenths,
                vec![1.1, 1.5, 2.0],
            ),
        ),
        "fig6" => (
            "cooperation over time for uniform, gaussian and bimodal initial reputations, m = 0, 0.5, 1",
            PresetPlan::Distributions {
                base: base(lattice(), params(0.9, 0.5, 1.5), master_seed),
                networks: vec![lattice(), small_world(master_seed)],
                m_values: vec![0.0, 0.5, 1.0],
                dists: vec![
                    InitialReputationDist::default_uniform(),
                    InitialReputationDist::default_gaussian(),
                    InitialReputationDist::default_bimodal(),
                ],
            },
        ),
        _ => return None,
    };
    let name = *PRESET_NAMES.iter().find(|&&n| n == name)?;
    Some(Preset {
        name,
        summary,
        plan,
    })
}

pub fn all_presets(master_seed: u64) -> Vec<Preset> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n, master_seed).expect("registered preset"))
        .collect()
}

/// One averaged series of the distribution preset.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionRun {
    pub topology: &'static str,
    pub m: f64,
    pub dist: &'static str,
    pub records: Vec<ObservableRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresetResult {
    Sweep(Vec<SweepCell>),
    Snapshots {
        averaged: Vec<ObservableRecord>,
        first: Timeseries,
    },
    Distributions(Vec<DistributionRun>),
}

impl Preset {
    /// Overrides the replicate count of every run in the plan.
    pub fn with_replicates(mut self, replicates: u32) -> Self {
        match &mut self.plan {
            PresetPlan::Sweep(grid) => grid.base.replicates = replicates,
            PresetPlan::Snapshots(cfg) => cfg.replicates = replicates,
            PresetPlan::Distributions { base, .. } => base.replicates = replicates,
        }
        self
    }

    pub fn execute(&self, jobs: usize) -> Result<PresetResult> {
        match &self.plan {
            PresetPlan::Sweep(grid) => sweep_grid(grid, jobs).map(PresetResult::Sweep),
            PresetPlan::Snapshots(cfg) => {
                cfg.validate()?;
                let first = run_timeseries(cfg, 0)?;
                let averaged = averaged_timeseries(cfg, jobs)?;
                Ok(PresetResult::Snapshots { averaged, first })
            }
            PresetPlan::Distributions {
                base,
                networks,
                m_values,
                dists,
            } => {
                let mut runs = Vec::new();
                for network in networks {
                    for &m in m_values {
                        for dist in dists {
                            let cfg = RunConfig {
                                network: network.clone(),
                                params: ModelParams {
                                    m,
                                    ..base.params.clone()
                                },
                                init_dist: dist.clone(),
                                ..base.clone()
                            };
                            runs.push(DistributionRun {
                                topology: network.topology_id(),
                                m,
                                dist: dist.name(),
                                records: averaged_timeseries(&cfg, jobs)?,
                            });
                        }
                    }
                }
                Ok(PresetResult::Distributions(runs))
            }
        }
    }
}

/// Writes a preset's results under `dir`.
pub fn write_result(result: &PresetResult, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    match result {
        PresetResult::Sweep(cells) => {
            let path = dir.join("sweep.csv");
            output::write_sweep_csv(cells, &path)?;
            written.push(path);
        }
        PresetResult::Snapshots { averaged, first } => {
            let path = dir.join("timeseries_mean.csv");
            output::write_timeseries_csv(averaged, &path)?;
            written.push(path);
            let path = dir.join("timeseries.csv");
            output::write_timeseries_csv(&first.records, &path)?;
            written.push(path);
            for grid in &first.snapshots {
                let stem = dir.join(format!("snapshot_{:05}", grid.step));
                output::write_snapshot(grid, &stem)?;
                written.push(stem.with_extension("ppm"));
                written.push(stem.with_extension("csv"));
            }
        }
        PresetResult::Distributions(runs) => {
            for run in runs {
                let path = dir.join(format!(
                    "{}_m{}_{}.csv",
                    run.topology,
                    output::fmt_g6(run.m),
                    run.dist
                ));
                output::write_timeseries_csv(&run.records, &path)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
