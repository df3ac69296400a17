//! Domain types shared by the player, the arms, and the engine.
//!
//! Arm indices are zero-based everywhere in the API. Files and reports
//! written for humans use one-based arm numbers.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Beta, Distribution as _};

use crate::bonus::BonusReport;
use crate::error::{Error, Result};
use crate::strategy::StrategyId;

/// Bounded reward law supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Bernoulli { p: f64 },
    Uniform { low: f64, high: f64 },
    Beta { alpha: f64, beta: f64 },
    PointMass { value: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
        let ok = match *self {
            Distribution::Bernoulli { p } => unit(p),
            Distribution::Uniform { low, high } => unit(low) && unit(high) && low <= high,
            Distribution::Beta { alpha, beta } => {
                alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0
            }
            Distribution::PointMass { value } => unit(value),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "{self} is not a valid law on [0, 1]"
            )))
        }
    }

    /// Analytic expectation.
    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Bernoulli { p } => p,
            Distribution::Uniform { low, high } => 0.5 * (low + high),
            Distribution::Beta { alpha, beta } => alpha / (alpha + beta),
            Distribution::PointMass { value } => value,
        }
    }

    /// True when every draw is the same value.
    pub fn is_degenerate(&self) -> bool {
        match *self {
            Distribution::Bernoulli { p } => p == 0.0 || p == 1.0,
            Distribution::Uniform { low, high } => low == high,
            Distribution::Beta { .. } => false,
            Distribution::PointMass { .. } => true,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Bernoulli { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Uniform { low, high } => {
                if low == high {
                    low
                } else {
                    rng.random_range(low..=high)
                }
            }
            Distribution::Beta { alpha, beta } => Beta::new(alpha, beta)
                .expect("validated beta parameters")
                .sample(rng)
                .clamp(0.0, 1.0),
            Distribution::PointMass { value } => value,
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distribution::Bernoulli { p } => write!(f, "Bernoulli({p})"),
            Distribution::Uniform { low, high } => write!(f, "Uniform({low}, {high})"),
            Distribution::Beta { alpha, beta } => write!(f, "Beta({alpha}, {beta})"),
            Distribution::PointMass { value } => write!(f, "PointMass({value})"),
        }
    }
}

/// One arm of the game: its reward law and the law's mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSpec {
    id: usize,
    distribution: Distribution,
    mean: f64,
}

impl ArmSpec {
    pub fn new(id: usize, distribution: Distribution) -> Result<Self> {
        distribution.validate()?;
        Ok(Self {
            id,
            distribution,
            mean: distribution.mean(),
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn distribution(&self) -> Distribution {
        self.distribution
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

/// Draws one reward from `spec`.
pub fn sample_reward<R: Rng + ?Sized>(spec: &ArmSpec, rng: &mut R) -> f64 {
    spec.distribution.sample(rng)
}

/// Which player algorithm runs the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// Successive elimination with defection halting and end-of-game bonuses.
    #[default]
    StrategicSe,
    /// Plain successive elimination; no bonuses, no defection test.
    ClassicSe,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::StrategicSe => "s-se",
            Algorithm::ClassicSe => "classic-se",
        })
    }
}

/// How end-of-game bonuses are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BonusMode {
    #[default]
    Standard,
    /// Every bonus forced to zero. Used to check that the equilibrium
    /// verifier can find a profitable deviation when the mechanism is off.
    Ablated,
}

/// A full game description.
#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    arms: Vec<ArmSpec>,
    horizon: usize,
    strategy_profile: Vec<StrategyId>,
    master_seed: u64,
    epochs: usize,
    algorithm: Algorithm,
    bonus_mode: BonusMode,
}

impl GameConfig {
    pub fn new(
        distributions: Vec<Distribution>,
        horizon: usize,
        strategy_profile: Vec<StrategyId>,
    ) -> Result<Self> {
        let arms = distributions
            .into_iter()
            .enumerate()
            .map(|(i, d)| ArmSpec::new(i, d))
            .collect::<Result<Vec<_>>>()?;
        let cfg = Self {
            arms,
            horizon,
            strategy_profile,
            master_seed: 0,
            epochs: 1,
            algorithm: Algorithm::default(),
            bonus_mode: BonusMode::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same arms and horizon, every arm truthful.
    pub fn truthful(distributions: Vec<Distribution>, horizon: usize) -> Result<Self> {
        let k = distributions.len();
        Self::new(distributions, horizon, vec![StrategyId::Truthful; k])
    }

    fn validate(&self) -> Result<()> {
        if self.arms.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 arms, got {}",
                self.arms.len()
            )));
        }
        if self.horizon < 2 {
            return Err(Error::InvalidConfig(format!(
                "horizon must be at least 2, got {}",
                self.horizon
            )));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.strategy_profile.len() != self.arms.len() {
            return Err(Error::InvalidConfig(format!(
                "strategy profile has {} entries for {} arms",
                self.strategy_profile.len(),
                self.arms.len()
            )));
        }
        for (k, s) in self.strategy_profile.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::InvalidConfig(format!("arm {}: {e}", k + 1)))?;
        }
        Ok(())
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Result<Self> {
        self.epochs = epochs;
        self.validate()?;
        Ok(self)
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_bonus_mode(mut self, bonus_mode: BonusMode) -> Self {
        self.bonus_mode = bonus_mode;
        self
    }

    pub fn with_profile(mut self, strategy_profile: Vec<StrategyId>) -> Result<Self> {
        self.strategy_profile = strategy_profile;
        self.validate()?;
        Ok(self)
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn strategy_profile(&self) -> &[StrategyId] {
        &self.strategy_profile
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn bonus_mode(&self) -> BonusMode {
        self.bonus_mode
    }

    pub fn true_means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmSpec::mean).collect()
    }

    /// Second-highest true mean, the regret comparator under truthful play.
    pub fn second_best_mean(&self) -> f64 {
        let mut m = self.true_means();
        m.sort_by(|a, b| b.total_cmp(a));
        m[1]
    }
}

/// Which phase the player was in when a round was played.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Explore,
    Exploit,
    Halted,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Explore => "explore",
            Phase::Exploit => "exploit",
            Phase::Halted => "halted",
        })
    }
}

/// One round of the game.
///
/// `reward` is private to the pulled arm; only `chosen` and `report` reach
/// the player. `phase` and `active_count` describe the player state at
/// selection time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub chosen: usize,
    pub reward: f64,
    pub report: f64,
    pub phase: Phase,
    pub active_count: usize,
}

/// A played (possibly halted) game.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: Arc<GameConfig>,
    pub rounds: Vec<RoundRecord>,
    pub halted_at: Option<usize>,
    pub bonuses: Option<BonusReport>,
}

impl Trajectory {
    pub fn new(config: Arc<GameConfig>) -> Self {
        Self {
            config,
            rounds: Vec::new(),
            halted_at: None,
            bonuses: None,
        }
    }

    pub fn horizon(&self) -> usize {
        self.config.horizon()
    }

    pub fn num_arms(&self) -> usize {
        self.config.num_arms()
    }

    /// Checks contiguity, the halting cutoff and debt-free reporting.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, r) in self.rounds.iter().enumerate() {
            if r.t != i + 1 {
                return Err(Error::Contract(format!(
                    "round {} stored at position {}",
                    r.t,
                    i + 1
                )));
            }
            if !(0.0 <= r.report && r.report <= r.reward && r.reward <= 1.0) {
                return Err(Error::Contract(format!(
                    "round {} breaks 0 <= report <= reward <= 1 ({} / {})",
                    r.t, r.report, r.reward
                )));
            }
        }
        if let Some(h) = self.halted_at {
            if self.rounds.last().is_some_and(|r| r.t > h) {
                return Err(Error::Contract(format!(
                    "rounds recorded after halt at {h}"
                )));
            }
        }
        if self.rounds.len() > self.horizon() {
            return Err(Error::Contract("more rounds than the horizon".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_of(d: Distribution, n: usize) -> f64 {
        let spec = ArmSpec::new(0, d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..n).map(|_| sample_reward(&spec, &mut rng)).sum::<f64>() / n as f64
    }

    #[test]
    fn degenerate_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pm = ArmSpec::new(0, Distribution::PointMass { value: 0.7 }).unwrap();
        let b1 = ArmSpec::new(1, Distribution::Bernoulli { p: 1.0 }).unwrap();
        for _ in 0..1000 {
            assert_eq!(sample_reward(&pm, &mut rng), 0.7);
            assert_eq!(sample_reward(&b1, &mut rng), 1.0);
        }
    }

    #[test]
    fn sample_means_match_analytic_means() {
        let n = 100_000;
        assert!((mean_of(Distribution::Bernoulli { p: 0.5 }, n) - 0.5).abs() < 0.01);
        assert!(
            (mean_of(
                Distribution::Uniform {
                    low: 0.2,
                    high: 0.6
                },
                n
            ) - 0.4)
                .abs()
                < 0.01
        );
        let beta = Distribution::Beta {
            alpha: 2.0,
            beta: 5.0,
        };
        assert!((beta.mean() - 2.0 / 7.0).abs() < 1e-15);
        assert!((mean_of(beta, n) - 2.0 / 7.0).abs() < 0.01);
    }

    #[test]
    fn supports_stay_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [
            Distribution::Beta {
                alpha: 0.3,
                beta: 0.3,
            },
            Distribution::Uniform {
                low: 0.0,
                high: 1.0,
            },
            Distribution::Bernoulli { p: 0.4 },
        ] {
            for _ in 0..10_000 {
                let x = d.sample(&mut rng);
                assert!((0.0..=1.0).contains(&x));
            }
        }
    }

    #[test]
    fn invalid_laws_rejected() {
        assert!(ArmSpec::new(0, Distribution::Bernoulli { p: 1.2 }).is_err());
        assert!(ArmSpec::new(
            0,
            Distribution::Uniform {
                low: 0.6,
                high: 0.2
            }
        )
        .is_err());
        assert!(ArmSpec::new(
            0,
            Distribution::Uniform {
                low: -0.1,
                high: 0.2
            }
        )
        .is_err());
        assert!(ArmSpec::new(
            0,
            Distribution::Beta {
                alpha: 0.0,
                beta: 1.0
            }
        )
        .is_err());
        assert!(ArmSpec::new(0, Distribution::PointMass { value: f64::NAN }).is_err());
    }

    #[test]
    fn config_rejects_single_arm_and_short_horizon() {
        let one = GameConfig::truthful(vec![Distribution::Bernoulli { p: 0.5 }], 100);
        assert!(matches!(one, Err(Error::InvalidConfig(_))));
        let short = GameConfig::truthful(
            vec![
                Distribution::Bernoulli { p: 0.5 },
                Distribution::Bernoulli { p: 0.2 },
            ],
            1,
        );
        assert!(short.is_err());
        let ok = GameConfig::truthful(
            vec![
                Distribution::Bernoulli { p: 0.5 },
                Distribution::Bernoulli { p: 0.2 },
            ],
            2,
        )
        .unwrap();
        assert!(ok.clone().with_epochs(0).is_err());
        assert_eq!(ok.second_best_mean(), 0.2);
    }
}
