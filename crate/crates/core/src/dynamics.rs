//! Monte Carlo engine.
//!
//! One Monte Carlo step (MCS) is an interaction round over every edge
//! followed by `N` asynchronous Fermi imitation attempts.
//!
//! During a round every agent is classified once against the threshold of
//! the previous step, each undirected edge plays exactly one game, and the
//! reputation changes are buffered and applied together once all edges have
//! played. The threshold is then recomputed from the clamped reputations.

use std::sync::Arc;

use crate::experiments::InitialReputationDist;
use crate::model::{
    classify, compute_threshold, fermi, fitness, payoff_pair, reputation_delta, select_game_kind,
    GameKind, ModelParams, ReputationClass, Strategy,
};
use crate::network::Adjacency;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentState {
    pub strategy: Strategy,
    pub reputation: f64,
    /// Payoff collected in the current round.
    pub round_payoff: f64,
    /// Payoff collected since initialization.
    pub total_payoff: f64,
}

/// Encounter counts for one interaction round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundTally {
    pub cc: usize,
    pub cd: usize,
    pub dd: usize,
    pub high_value: usize,
    pub low_value: usize,
}

impl RoundTally {
    pub fn encounters(&self) -> usize {
        self.cc + self.cd + self.dd
    }
}

/// Full simulation state. The adjacency is shared read-only between
/// replicas.
#[derive(Clone, Debug)]
pub struct PopulationState {
    agents: Vec<AgentState>,
    adjacency: Arc<Adjacency>,
    theta: f64,
    step: u64,
    rep_buffer: Vec<f64>,
    high: Vec<bool>,
}

impl PopulationState {
    /// Builds a state from explicit agents. Panics if the agent count does
    /// not match the graph or any reputation is non-finite.
    pub fn from_agents(adjacency: Arc<Adjacency>, agents: Vec<AgentState>) -> Self {
        assert_eq!(
            agents.len(),
            adjacency.node_count(),
            "agent count must match node count"
        );
        let n = agents.len();
        let mut pop = Self {
            agents,
            adjacency,
            theta: 0.0,
            step: 0,
            rep_buffer: vec![0.0; n],
            high: vec![false; n],
        };
        pop.refresh_threshold();
        assert!(pop.theta.is_finite(), "reputations must be finite");
        pop
    }

    /// Uniform population with the given strategies and a single reputation.
    pub fn uniform(adjacency: Arc<Adjacency>, strategies: &[Strategy], reputation: f64) -> Self {
        let agents = strategies
            .iter()
            .map(|&strategy| AgentState {
                strategy,
                reputation,
                round_payoff: 0.0,
                total_payoff: 0.0,
            })
            .collect();
        Self::from_agents(adjacency, agents)
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn shared_adjacency(&self) -> Arc<Adjacency> {
        Arc::clone(&self.adjacency)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn reputations(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.reputation).collect()
    }

    pub fn cooperators(&self) -> usize {
        self.agents
            .iter()
            .filter(|a| a.strategy == Strategy::C)
            .count()
    }

    pub fn cooperation_density(&self) -> f64 {
        self.cooperators() as f64 / self.len() as f64
    }

    pub fn class_of(&self, i: usize) -> ReputationClass {
        classify(self.agents[i].reputation, self.theta)
    }

    pub fn set_strategy(&mut self, i: usize, strategy: Strategy) {
        self.agents[i].strategy = strategy;
    }

    /// Fitness of agent `i` under `params`, from the payoff of the last
    /// round (or the lifetime total when `cumulative_payoff` is set).
    pub fn fitness_of(&self, i: usize, params: &ModelParams) -> f64 {
        let a = &self.agents[i];
        let payoff = if params.cumulative_payoff {
            a.total_payoff
        } else {
            a.round_payoff
        };
        fitness(payoff, a.reputation, params.m)
    }

    /// Probability that `i` copies `j` in an elementary update.
    pub fn adoption_probability(&self, i: usize, j: usize, params: &ModelParams) -> f64 {
        fermi(
            self.fitness_of(i, params),
            self.fitness_of(j, params),
            params.kappa,
        )
    }

    fn refresh_threshold(&mut self) {
        let sum: f64 = self.agents.iter().map(|a| a.reputation).sum();
        self.theta = sum / self.agents.len() as f64;
        debug_assert_eq!(
            Some(self.theta),
            compute_threshold(&self.reputations()).ok()
        );
    }
}

impl PartialEq for PopulationState {
    fn eq(&self, other: &Self) -> bool {
        self.step == other.step
            && self.theta == other.theta
            && self.agents == other.agents
            && self.adjacency == other.adjacency
    }
}

/// Random initial population: each agent cooperates with probability
/// `cooperator_fraction` and draws a reputation from `dist`, clamped into
/// the reputation bounds.
pub fn init_population(
    adjacency: Arc<Adjacency>,
    dist: &InitialReputationDist,
    cooperator_fraction: f64,
    params: &ModelParams,
    rng: &mut RngStream,
) -> PopulationState {
    let n = adjacency.node_count();
    let mut agents = Vec::with_capacity(n);
    for _ in 0..n {
        let strategy = if rng.bernoulli(cooperator_fraction) {
            Strategy::C
        } else {
            Strategy::D
        };
        let reputation = dist.sample(rng).clamp(params.r_min, params.r_max);
        agents.push(AgentState {
            strategy,
            reputation,
            round_payoff: 0.0,
            total_payoff: 0.0,
        });
    }
    PopulationState::from_agents(adjacency, agents)
}

/// Plays every edge once and applies the buffered reputation changes.
pub fn interaction_round(
    pop: &mut PopulationState,
    params: &ModelParams,
    rng: &mut RngStream,
) -> RoundTally {
    let n = pop.agents.len();
    let theta = pop.theta;
    for (flag, agent) in pop.high.iter_mut().zip(&pop.agents) {
        *flag = classify(agent.reputation, theta) == ReputationClass::High;
    }
    for agent in &mut pop.agents {
        agent.round_payoff = 0.0;
    }
    pop.rep_buffer.iter_mut().for_each(|x| *x = 0.0);

    let mut tally = RoundTally::default();
    let adjacency = &*pop.adjacency;
    for i in 0..n {
        for &j in adjacency.neighbors(i) {
            let j = j as usize;
            if j <= i {
                continue;
            }
            let (ai, aj) = (pop.agents[i], pop.agents[j]);
            let (hi, hj) = (pop.high[i], pop.high[j]);
            let kind = if hi == hj {
                if hi {
                    GameKind::HighValue
                } else {
                    GameKind::LowValue
                }
            } else {
                select_game_kind(class(hi), class(hj), params.p, rng.uniform())
            };
            match kind {
                GameKind::HighValue => tally.high_value += 1,
                GameKind::LowValue => tally.low_value += 1,
            }
            match (ai.strategy, aj.strategy) {
                (Strategy::C, Strategy::C) => tally.cc += 1,
                (Strategy::D, Strategy::D) => tally.dd += 1,
                _ => tally.cd += 1,
            }
            let pay = payoff_pair(
                kind,
                ai.strategy,
                aj.strategy,
                ai.reputation,
                aj.reputation,
                params,
            );
            pop.agents[i].round_payoff += pay.pi_i;
            pop.agents[j].round_payoff += pay.pi_j;
            pop.rep_buffer[i] += reputation_delta(ai.strategy, aj.strategy, params.delta);
            pop.rep_buffer[j] += reputation_delta(aj.strategy, ai.strategy, params.delta);
        }
    }

    for (agent, &change) in pop.agents.iter_mut().zip(&pop.rep_buffer) {
        agent.reputation = (agent.reputation + change).clamp(params.r_min, params.r_max);
        agent.total_payoff += agent.round_payoff;
    }
    pop.refresh_threshold();
    tally
}

#[inline]
fn class(high: bool) -> ReputationClass {
    if high {
        ReputationClass::High
    } else {
        ReputationClass::Low
    }
}

/// `N` elementary imitation attempts. Adoptions take effect immediately.
/// Payoffs are not replayed after an adoption. Returns the number of
/// adoptions that changed a strategy.
pub fn strategy_update_async(
    pop: &mut PopulationState,
    params: &ModelParams,
    rng: &mut RngStream,
) -> usize {
    let n = pop.agents.len();
    let mut switches = 0;
    for _ in 0..n {
        let i = rng.index(n);
        let nbrs = pop.adjacency.neighbors(i);
        let j = nbrs[rng.index(nbrs.len())] as usize;
        let (si, sj) = (pop.agents[i].strategy, pop.agents[j].strategy);
        // Copying an identical strategy is a no-op whatever the draw.
        if si == sj {
            continue;
        }
        if rng.uniform() < pop.adoption_probability(i, j, params) {
            pop.agents[i].strategy = sj;
            switches += 1;
        }
    }
    switches
}

/// One Monte Carlo step: an interaction round, then asynchronous imitation.
pub fn mcs_step(
    pop: &mut PopulationState,
    params: &ModelParams,
    rng: &mut RngStream,
) -> RoundTally {
    let tally = interaction_round(pop, params, rng);
    strategy_update_async(pop, params, rng);
    pop.step += 1;
    tally
}
