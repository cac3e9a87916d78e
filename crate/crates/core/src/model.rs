//! Game payoffs, reputation classes and the imitation rule.
//!
//! Everything here is a pure function of its arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    C,
    D,
}

impl Strategy {
    pub fn is_cooperator(self) -> bool {
        self == Strategy::C
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameKind {
    HighValue,
    LowValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReputationClass {
    High,
    Low,
}

/// Scalar model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Temptation of the low-value game.
    pub b_l: f64,
    /// Cost of cooperating.
    pub c: f64,
    /// Reputation step per encounter.
    pub delta: f64,
    /// Probability that a mixed high/low pair plays the high-value game.
    pub p: f64,
    /// Weight of payoff against reputation in fitness.
    pub m: f64,
    /// Imitation noise.
    pub kappa: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Mutual cooperation in the high-value game pays `r̄ - c/2` instead of `r̄ - c`.
    pub shared_cost_variant: bool,
    /// Fitness uses the payoff accumulated over the whole run instead of
    /// the payoff of the current round.
    pub cumulative_payoff: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            b_l: 1.1,
            c: 1.0,
            delta: 0.01,
            p: 0.9,
            m: 0.5,
            kappa: 0.1,
            r_min: 0.0,
            r_max: 2.0,
            shared_cost_variant: false,
            cumulative_payoff: false,
        }
    }
}

impl ModelParams {
    /// Checks hard invariants. Keys in errors are prefixed with `params.`.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("b_l", self.b_l),
            ("c", self.c),
            ("delta", self.delta),
            ("p", self.p),
            ("m", self.m),
            ("kappa", self.kappa),
            ("r_min", self.r_min),
            ("r_max", self.r_max),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(format!("params.{key}"), "must be finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::param(
                "params.p",
                format!("{} outside [0, 1]", self.p),
            ));
        }
        if !(0.0..=1.0).contains(&self.m) {
            return Err(Error::param(
                "params.m",
                format!("{} outside [0, 1]", self.m),
            ));
        }
        if self.kappa <= 0.0 {
            return Err(Error::param("params.kappa", "must be positive"));
        }
        if self.delta <= 0.0 {
            return Err(Error::param("params.delta", "must be positive"));
        }
        if self.r_min >= self.r_max {
            return Err(Error::param("params.r_min", "must be below params.r_max"));
        }
        Ok(())
    }

    /// Soft checks: the model stays well defined but the low-value game is
    /// no longer a prisoner's dilemma.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.b_l > self.c && self.c > 0.0) {
            out.push(format!(
                "b_l = {} and c = {} violate b_l > c > 0; the low-value game is not a prisoner's dilemma",
                self.b_l, self.c
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffPair {
    pub pi_i: f64,
    pub pi_j: f64,
}

/// Adaptive threshold: the mean reputation.
pub fn compute_threshold(reputations: &[f64]) -> Result<f64> {
    if reputations.is_empty() {
        return Err(Error::InvalidInput(
            "threshold of an empty population".into(),
        ));
    }
    Ok(reputations.iter().sum::<f64>() / reputations.len() as f64)
}

/// High iff strictly above the threshold.
#[inline]
pub fn classify(r: f64, theta: f64) -> ReputationClass {
    if r > theta {
        ReputationClass::High
    } else {
        ReputationClass::Low
    }
}

/// Game played by a pair. Same-class pairs are deterministic; a mixed pair
/// plays the high-value game when `draw < p`.
#[inline]
pub fn select_game_kind(
    class_i: ReputationClass,
    class_j: ReputationClass,
    p: f64,
    draw: f64,
) -> GameKind {
    use ReputationClass::*;
    match (class_i, class_j) {
        (High, High) => GameKind::HighValue,
        (Low, Low) => GameKind::LowValue,
        _ if draw < p => GameKind::HighValue,
        _ => GameKind::LowValue,
    }
}

/// Payoffs of one encounter for `i` and `j`.
///
/// The low-value game is a prisoner's dilemma with reward `b_l - c`,
/// temptation `b_l`, sucker's payoff `-c` and punishment `0`. In the
/// high-value game mutual cooperators both get `r̄ - c` with `r̄` the pair's
/// mean reputation, and a defector facing a cooperator gets half of its own
/// reputation.
#[inline]
pub fn payoff_pair(
    kind: GameKind,
    s_i: Strategy,
    s_j: Strategy,
    r_i: f64,
    r_j: f64,
    params: &ModelParams,
) -> PayoffPair {
    use Strategy::*;
    let c = params.c;
    let (pi_i, pi_j) = match kind {
        GameKind::LowValue => {
            let b = params.b_l;
            match (s_i, s_j) {
                (C, C) => (b - c, b - c),
                (C, D) => (-c, b),
                (D, C) => (b, -c),
                (D, D) => (0.0, 0.0),
            }
        }
        GameKind::HighValue => match (s_i, s_j) {
            (C, C) => {
                let reward = 0.5 * (r_i + r_j)
                    - if params.shared_cost_variant {
                        0.5 * c
                    } else {
                        c
                    };
                (reward, reward)
            }
            (C, D) => (-c, 0.5 * r_j),
            (D, C) => (0.5 * r_i, -c),
            (D, D) => (0.0, 0.0),
        },
    };
    PayoffPair { pi_i, pi_j }
}

/// Reputation change for `i` after meeting `j`.
#[inline]
pub fn reputation_delta(s_i: Strategy, s_j: Strategy, delta: f64) -> f64 {
    use Strategy::*;
    match (s_i, s_j) {
        (C, C) => delta,
        (C, D) => 2.0 * delta,
        (D, C) => -2.0 * delta,
        (D, D) => -delta,
    }
}

pub fn clamp_reputation(raw: f64, params: &ModelParams) -> Result<f64> {
    if !raw.is_finite() {
        return Err(Error::Numeric(raw));
    }
    Ok(raw.clamp(params.r_min, params.r_max))
}

#[inline]
pub fn fitness(payoff: f64, r: f64, m: f64) -> f64 {
    m * payoff + (1.0 - m) * r
}

/// Fermi imitation probability `1 / (1 + exp((f_i - f_j) / kappa))`.
pub fn fermi_adopt_prob(f_i: f64, f_j: f64, kappa: f64) -> Result<f64> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::param("kappa", "must be positive"));
    }
    Ok(fermi(f_i, f_j, kappa))
}

/// Smallest distance kept from 0 and 1 so the result stays inside the open
/// unit interval when the exponential saturates.
const FERMI_FLOOR: f64 = f64::MIN_POSITIVE;
const FERMI_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;

/// Unchecked [`fermi_adopt_prob`] for the hot loop; `kappa` must be positive.
#[inline]
pub(crate) fn fermi(f_i: f64, f_j: f64, kappa: f64) -> f64 {
    let x = (f_i - f_j) / kappa;
    let prob = if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    };
    prob.clamp(FERMI_FLOOR, FERMI_CEIL)
}

#[cfg(test)]
mod tests {
    use super::GameKind::*;
    use super::ReputationClass::*;
    use super::Strategy::*;
    use super::{
        clamp_reputation, classify, compute_threshold, fermi_adopt_prob, fitness, payoff_pair,
        reputation_delta, select_game_kind, Error, GameKind, ModelParams, PayoffPair,
    };
    use proptest::prelude::*;

    fn params() -> ModelParams {
        ModelParams {
            b_l: 1.1,
            c: 1.0,
            ..ModelParams::default()
        }
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(compute_threshold(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(compute_threshold(&[0.0, 2.0]).unwrap(), 1.0);
        assert!((compute_threshold(&[0.3, 0.9, 1.8]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            compute_threshold(&[]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn classify_boundary_goes_low() {
        assert_eq!(classify(1.5, 1.0), High);
        assert_eq!(classify(1.0, 1.0), Low);
        assert_eq!(classify(0.0, 0.0), Low);
    }

    #[test]
    fn game_selection_examples() {
        assert_eq!(select_game_kind(High, High, 0.0, 0.99), HighValue);
        assert_eq!(select_game_kind(Low, Low, 1.0, 0.0), LowValue);
        assert_eq!(select_game_kind(High, Low, 1.0, 0.37), HighValue);
        assert_eq!(select_game_kind(Low, High, 0.0, 0.0), LowValue);
        assert_eq!(select_game_kind(Low, High, 0.5, 0.49), HighValue);
        assert_eq!(select_game_kind(Low, High, 0.5, 0.5), LowValue);
    }

    #[test]
    fn mixed_pair_frequency_matches_p() {
        let mut rng = crate::rng::RngStream::new(2024);
        let n = 100_000;
        for p in [0.1, 0.5, 0.9] {
            let hits = (0..n)
                .filter(|_| select_game_kind(High, Low, p, rng.uniform()) == HighValue)
                .count();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((hits as f64 / n as f64 - p).abs() < 3.0 * se, "p = {p}");
        }
    }

    #[test]
    fn payoff_examples() {
        let pr = params();
        let low = payoff_pair(LowValue, C, C, 1.0, 1.0, &pr);
        assert!((low.pi_i - 0.1).abs() < 1e-12 && (low.pi_j - 0.1).abs() < 1e-12);
        assert_eq!(
            payoff_pair(HighValue, D, C, 2.0, 0.8, &pr),
            PayoffPair {
                pi_i: 1.0,
                pi_j: -1.0
            }
        );
        assert_eq!(
            payoff_pair(HighValue, D, D, 1.7, 0.2, &pr),
            PayoffPair {
                pi_i: 0.0,
                pi_j: 0.0
            }
        );
        assert_eq!(
            payoff_pair(HighValue, C, C, 1.2, 1.8, &pr),
            PayoffPair {
                pi_i: 0.5,
                pi_j: 0.5
            }
        );
        let shared = ModelParams {
            shared_cost_variant: true,
            ..pr.clone()
        };
        assert_eq!(
            payoff_pair(HighValue, C, C, 1.2, 1.8, &shared),
            PayoffPair {
                pi_i: 1.0,
                pi_j: 1.0
            }
        );
        assert_eq!(
            payoff_pair(LowValue, C, D, 0.0, 0.0, &pr),
            PayoffPair {
                pi_i: -1.0,
                pi_j: 1.1
            }
        );
    }

    #[test]
    fn reputation_delta_examples() {
        assert_eq!(reputation_delta(C, C, 0.01), 0.01);
        assert_eq!(reputation_delta(D, C, 0.01), -0.02);
        assert_eq!(reputation_delta(C, D, 0.01), 0.02);
        assert_eq!(reputation_delta(D, D, 0.5), -0.5);
    }

    #[test]
    fn clamp_examples() {
        let pr = params();
        assert_eq!(clamp_reputation(2.5, &pr).unwrap(), 2.0);
        assert_eq!(clamp_reputation(-0.3, &pr).unwrap(), 0.0);
        assert_eq!(clamp_reputation(1.37, &pr).unwrap(), 1.37);
        assert!(matches!(
            clamp_reputation(f64::NAN, &pr),
            Err(Error::Numeric(_))
        ));
        assert!(clamp_reputation(f64::INFINITY, &pr).is_err());
    }

    #[test]
    fn fitness_examples() {
        assert_eq!(fitness(4.4, 1.0, 1.0), 4.4);
        assert_eq!(fitness(4.4, 1.0, 0.0), 1.0);
        assert!((fitness(2.0, 1.5, 0.6) - 1.8).abs() < 1e-12);
    }

    #[test]
    fn fermi_examples() {
        assert_eq!(fermi_adopt_prob(0.7, 0.7, 0.3).unwrap(), 0.5);
        // 1 / (1 + e^-10) evaluated independently
        let expected = 1.0 / (1.0 + (-10.0f64).exp());
        let got = fermi_adopt_prob(0.0, 1.0, 0.1).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.9999546).abs() < 1e-7);
        let tiny = fermi_adopt_prob(1000.0, 0.0, 0.1).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-300 && tiny.is_finite());
        let big = fermi_adopt_prob(0.0, 1000.0, 0.1).unwrap();
        assert!(big < 1.0 && big > 1.0 - 1e-15);
        assert!(fermi_adopt_prob(0.0, 1.0, 0.0).is_err());
        assert!(fermi_adopt_prob(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::default().validate().is_ok());
        let bad = ModelParams {
            p: 1.5,
            ..ModelParams::default()
        };
        match bad.validate() {
            Err(Error::InvalidParameter { key, .. }) => assert_eq!(key, "params.p"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ModelParams {
            kappa: 0.0,
            ..ModelParams::default()
        }
        .validate()
        .is_err());
        assert!(ModelParams {
            delta: 0.0,
            ..ModelParams::default()
        }
        .validate()
        .is_err());
        assert!(ModelParams {
            m: -0.1,
            ..ModelParams::default()
        }
        .validate()
        .is_err());
        assert!(ModelParams {
            r_min: 2.0,
            ..ModelParams::default()
        }
        .validate()
        .is_err());
        assert!(ModelParams::default().warnings().is_empty());
        assert_eq!(
            ModelParams {
                b_l: 0.9,
                ..ModelParams::default()
            }
            .warnings()
            .len(),
            1
        );
    }

    fn strategy() -> impl Strategy<Value = super::Strategy> {
        prop_oneof![Just(C), Just(D)]
    }

    fn kind() -> impl Strategy<Value = GameKind> {
        prop_oneof![Just(HighValue), Just(LowValue)]
    }

    proptest! {
        #[test]
        fn threshold_within_range(xs in prop::collection::vec(0.0f64..=2.0, 1..64)) {
            let t = compute_threshold(&xs).unwrap();
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(t >= lo - 1e-12 && t <= hi + 1e-12);
        }

        #[test]
        fn classify_partitions(r in 0.0f64..=2.0, theta in 0.0f64..=2.0) {
            match classify(r, theta) {
                High => prop_assert!(r > theta),
                Low => prop_assert!(r <= theta),
            }
        }

        #[test]
        fn asymmetric_deltas_cancel(delta in 1e-6f64..10.0) {
            prop_assert_eq!(reputation_delta(C, D, delta) + reputation_delta(D, C, delta), 0.0);
            prop_assert_eq!(reputation_delta(C, C, delta), delta);
            prop_assert_eq!(reputation_delta(D, D, delta), -delta);
        }

        #[test]
        fn low_game_is_a_dilemma(c in 0.01f64..5.0, extra in 0.001f64..5.0) {
            let pr = ModelParams { b_l: c + extra, c, ..ModelParams::default() };
            let t = payoff_pair(LowValue, D, C, 1.0, 1.0, &pr).pi_i;
            let r = payoff_pair(LowValue, C, C, 1.0, 1.0, &pr).pi_i;
            let p = payoff_pair(LowValue, D, D, 1.0, 1.0, &pr).pi_i;
            let s = payoff_pair(LowValue, C, D, 1.0, 1.0, &pr).pi_i;
            prop_assert!(t > r && r > p && p > s);
        }

        #[test]
        fn payoff_exchange_symmetric(
            k in kind(), si in strategy(), sj in strategy(),
            ri in 0.0f64..=2.0, rj in 0.0f64..=2.0, shared in any::<bool>(),
        ) {
            let pr = ModelParams { shared_cost_variant: shared, ..params() };
            let a = payoff_pair(k, si, sj, ri, rj, &pr);
            let b = payoff_pair(k, sj, si, rj, ri, &pr);
            prop_assert_eq!(a.pi_i, b.pi_j);
            prop_assert_eq!(a.pi_j, b.pi_i);
            prop_assert!(a.pi_i.is_finite() && a.pi_j.is_finite());
        }

        #[test]
        fn fermi_symmetry_and_range(
            fi in -1e4f64..1e4, fj in -1e4f64..1e4, kappa in 1e-3f64..10.0,
        ) {
            let a = fermi_adopt_prob(fi, fj, kappa).unwrap();
            let b = fermi_adopt_prob(fj, fi, kappa).unwrap();
            prop_assert!(a > 0.0 && a < 1.0);
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn fermi_monotone(
            fi in -50.0f64..50.0, fj in -50.0f64..50.0, step in 0.0f64..5.0, kappa in 0.05f64..5.0,
        ) {
            let base = fermi_adopt_prob(fi, fj, kappa).unwrap();
            prop_assert!(fermi_adopt_prob(fi + step, fj, kappa).unwrap() <= base);
            prop_assert!(fermi_adopt_prob(fi, fj + step, kappa).unwrap() >= base);
        }

        #[test]
        fn clamp_idempotent(raw in -10.0f64..10.0) {
            let pr = params();
            let once = clamp_reputation(raw, &pr).unwrap();
            prop_assert_eq!(clamp_reputation(once, &pr).unwrap(), once);
            prop_assert!((0.0..=2.0).contains(&once));
        }
    }
}
