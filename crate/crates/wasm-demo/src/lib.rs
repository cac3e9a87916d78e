//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Exposes a steppable lattice simulation rendered as RGBA pixels, the Fermi
//! adoption curve, and a quick cooperation-versus-`m` sweep on a small lattice.

use std::sync::Arc;

use repgame::dynamics::{init_population, mcs_step, PopulationState};
use repgame::experiments::{linspace, InitialReputationDist, StateCode};
use repgame::model::{classify, fermi_adopt_prob, ModelParams};
use repgame::network::build_lattice;
use repgame::rng::{tag, RngStream};
use wasm_bindgen::prelude::*;

fn js_err(e: repgame::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn params(p: f64, m: f64, b_l: f64, delta: f64, kappa: f64) -> Result<ModelParams, JsValue> {
    let params = ModelParams {
        p,
        m,
        b_l,
        delta,
        kappa,
        ..ModelParams::default()
    };
    params.validate().map_err(js_err)?;
    Ok(params)
}

fn random_lattice(
    side: usize,
    params: &ModelParams,
    seed: u64,
) -> Result<PopulationState, JsValue> {
    let adjacency = Arc::new(build_lattice(side, true).map_err(js_err)?);
    let mut rng = RngStream::derived(seed, &[tag::INIT]);
    Ok(init_population(
        adjacency,
        &InitialReputationDist::default_uniform(),
        0.5,
        params,
        &mut rng,
    ))
}

/// A periodic lattice population that the page advances frame by frame.
#[wasm_bindgen]
pub struct Lattice {
    side: usize,
    params: ModelParams,
    pop: PopulationState,
    rng: RngStream,
}

#[wasm_bindgen]
impl Lattice {
    #[wasm_bindgen(constructor)]
    pub fn new(
        side: usize,
        p: f64,
        m: f64,
        b_l: f64,
        delta: f64,
        kappa: f64,
        seed: u64,
    ) -> Result<Lattice, JsValue> {
        let params = params(p, m, b_l, delta, kappa)?;
        let pop = random_lattice(side, &params, seed)?;
        Ok(Lattice {
            side,
            params,
            pop,
            rng: RngStream::derived(seed, &[tag::DYNAMICS]),
        })
    }

    /// Changes `m` mid-run without resetting the population.
    pub fn set_m(&mut self, m: f64) -> Result<(), JsValue> {
        let next = ModelParams {
            m,
            ..self.params.clone()
        };
        next.validate().map_err(js_err)?;
        self.params = next;
        Ok(())
    }

    /// Advances `steps` Monte Carlo steps.
    pub fn advance(&mut self, steps: u32) {
        for _ in 0..steps {
            mcs_step(&mut self.pop, &self.params, &mut self.rng);
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn step(&self) -> u64 {
        self.pop.step()
    }

    pub fn cooperation(&self) -> f64 {
        self.pop.cooperation_density()
    }

    pub fn threshold(&self) -> f64 {
        self.pop.theta()
    }

    /// Counts of HC, HD, LC, LD agents, in that order.
    pub fn counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; 4];
        for code in self.codes() {
            counts[code.code() as usize] += 1;
        }
        counts
    }

    /// Row-major RGBA pixels, one per agent.
    pub fn rgba(&self) -> Vec<u8> {
        self.codes()
            .flat_map(|c| {
                let [r, g, b] = c.rgb();
                [r, g, b, 255]
            })
            .collect()
    }
}

impl Lattice {
    fn codes(&self) -> impl Iterator<Item = StateCode> + '_ {
        let theta = self.pop.theta();
        self.pop
            .agents()
            .iter()
            .map(move |a| StateCode::of(a.strategy, classify(a.reputation, theta)))
    }
}

/// Probability of adopting a neighbour's strategy for fitness differences
/// `f_i - f_j` spaced evenly over `[-span, span]`.
#[wasm_bindgen]
pub fn fermi_curve(kappa: f64, span: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    linspace(-span, span, samples.max(2))
        .into_iter()
        .map(|diff| fermi_adopt_prob(diff, 0.0, kappa).map_err(js_err))
        .collect()
}

/// Final cooperation density after `steps` MCS for `points` values of `m`
/// spread over `[0, 1]`, all from the same initial lattice.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn m_sweep(
    side: usize,
    p: f64,
    b_l: f64,
    delta: f64,
    kappa: f64,
    steps: u32,
    points: usize,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    let base = params(p, 0.0, b_l, delta, kappa)?;
    let start = random_lattice(side, &base, seed)?;
    Ok(linspace(0.0, 1.0, points.max(2))
        .into_iter()
        .map(|m| {
            let params = ModelParams { m, ..base.clone() };
            let mut pop = start.clone();
            let mut rng = RngStream::derived(seed, &[tag::DYNAMICS, m.to_bits()]);
            for _ in 0..steps {
                mcs_step(&mut pop, &params, &mut rng);
            }
            pop.cooperation_density()
        })
        .collect())
}
