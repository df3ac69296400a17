//! Arm-side reporting strategies.
//!
//! A strategy sees only its own information set (`ArmView`) plus the reward
//! of the current pull, and returns a report. The engine clamps every report
//! into `[0, reward]`, so a buggy strategy can never break debt-free play.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::history::ArmView;

/// Fractions used by the untruthful-arbitrary scenario.
pub const DEFAULT_FRACTIONS: [f64; 5] = [1.0, 0.6, 0.4, 0.1, 0.0];

pub trait ArmStrategy: Send {
    /// Report for the current pull, which yielded `reward`.
    fn report(&mut self, view: &ArmView<'_>, reward: f64) -> f64;
}

/// Identity report.
pub fn truthful_report(reward: f64) -> f64 {
    reward
}

/// `f * reward` for a fraction drawn from `fractions` with the given sampler.
pub fn fractional_report(
    reward: f64,
    fractions: &[f64],
    sampler: &WeightedIndex<f64>,
    rng: &mut ChaCha8Rng,
) -> f64 {
    fractions[sampler.sample(rng)] * reward
}

/// Truthful for the two arms with the highest true means, zero otherwise.
/// `true_rank` is zero-based.
pub fn top_two_truthful_report(true_rank: usize, reward: f64) -> f64 {
    if true_rank < 2 {
        reward
    } else {
        0.0
    }
}

/// Withholds as much as the remaining savings budget allows.
pub fn m_bounded_report(reward: f64, savings: f64, budget: f64) -> f64 {
    let withheld = reward.min((budget - savings).max(0.0));
    reward - withheld
}

/// Named strategy, as written in configuration files.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum StrategyId {
    #[default]
    Truthful,
    /// Report a random fraction of the reward, redrawn on every pull.
    FractionalRandom {
        fractions: Vec<f64>,
        weights: Vec<f64>,
    },
    TopTwoTruthful,
    /// Total savings never exceed `budget`; withholding is front-loaded.
    MBounded {
        budget: f64,
    },
    /// Fixed report per pull; the last entry repeats.
    Scripted(Vec<f64>),
}

impl StrategyId {
    /// Fractional strategy with the default fraction set and uniform weights.
    pub fn untruthful_default() -> Self {
        StrategyId::FractionalRandom {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            weights: vec![1.0; DEFAULT_FRACTIONS.len()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: &f64| x.is_finite() && (0.0..=1.0).contains(x);
        match self {
            StrategyId::Truthful | StrategyId::TopTwoTruthful => Ok(()),
            StrategyId::FractionalRandom { fractions, weights } => {
                if fractions.is_empty() {
                    return Err(Error::InvalidConfig("empty fraction set".into()));
                }
                if let Some(f) = fractions.iter().find(|f| !unit(f)) {
                    return Err(Error::InvalidConfig(format!(
                        "fraction {f} is outside [0, 1]"
                    )));
                }
                if weights.len() != fractions.len() {
                    return Err(Error::InvalidConfig(format!(
                        "{} weights for {} fractions",
                        weights.len(),
                        fractions.len()
                    )));
                }
                WeightedIndex::new(weights)
                    .map(|_| ())
                    .map_err(|e| Error::InvalidConfig(format!("fraction weights: {e}")))
            }
            StrategyId::MBounded { budget } => {
                if budget.is_finite() && *budget >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "savings budget {budget} must be finite and non-negative"
                    )))
                }
            }
            StrategyId::Scripted(reports) => {
                if reports.is_empty() {
                    return Err(Error::InvalidConfig("empty report script".into()));
                }
                match reports.iter().find(|x| !unit(x)) {
                    Some(x) => Err(Error::InvalidConfig(format!(
                        "scripted report {x} is outside [0, 1]"
                    ))),
                    None => Ok(()),
                }
            }
        }
    }

    /// Instantiates the strategy for one arm of one game.
    ///
    /// `true_rank` is the arm's zero-based rank by true mean, and `rng` its
    /// private strategy stream.
    pub fn build(&self, true_rank: usize, rng: ChaCha8Rng) -> Result<Box<dyn ArmStrategy>> {
        self.validate()?;
        Ok(match self {
            StrategyId::Truthful => Box::new(Truthful),
            StrategyId::FractionalRandom { fractions, weights } => Box::new(FractionalRandom {
                fractions: fractions.clone(),
                sampler: WeightedIndex::new(weights).expect("validated weights"),
                rng,
            }),
            StrategyId::TopTwoTruthful => Box::new(TopTwoTruthful { true_rank }),
            StrategyId::MBounded { budget } => Box::new(MBounded { budget: *budget }),
            StrategyId::Scripted(reports) => Box::new(Scripted {
                reports: reports.clone(),
            }),
        })
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyId::Truthful => f.write_str("truthful"),
            StrategyId::FractionalRandom { fractions, .. } => {
                let parts: Vec<String> = fractions.iter().map(f64::to_string).collect();
                write!(f, "fractional[{}]", parts.join(" "))
            }
            StrategyId::TopTwoTruthful => f.write_str("top_two_truthful"),
            StrategyId::MBounded { budget } => write!(f, "m_bounded:{budget}"),
            StrategyId::Scripted(r) => write!(f, "scripted[{}]", r.len()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Truthful;

impl ArmStrategy for Truthful {
    fn report(&mut self, _view: &ArmView<'_>, reward: f64) -> f64 {
        truthful_report(reward)
    }
}

#[derive(Debug, Clone)]
pub struct FractionalRandom {
    fractions: Vec<f64>,
    sampler: WeightedIndex<f64>,
    rng: ChaCha8Rng,
}

impl ArmStrategy for FractionalRandom {
    fn report(&mut self, _view: &ArmView<'_>, reward: f64) -> f64 {
        fractional_report(reward, &self.fractions, &self.sampler, &mut self.rng)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TopTwoTruthful {
    true_rank: usize,
}

impl ArmStrategy for TopTwoTruthful {
    fn report(&mut self, _view: &ArmView<'_>, reward: f64) -> f64 {
        top_two_truthful_report(self.true_rank, reward)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MBounded {
    budget: f64,
}

impl ArmStrategy for MBounded {
    fn report(&mut self, view: &ArmView<'_>, reward: f64) -> f64 {
        m_bounded_report(reward, view.savings(), self.budget)
    }
}

#[derive(Debug, Clone)]
pub struct Scripted {
    reports: Vec<f64>,
}

impl ArmStrategy for Scripted {
    fn report(&mut self, view: &ArmView<'_>, reward: f64) -> f64 {
        let i = view.pulls().min(self.reports.len() - 1);
        self.reports[i].min(reward)
    }
}

/// Reports `fractions[n] * reward` on the `n`-th pull; the last fraction
/// repeats. Used by the equilibrium verifier.
#[derive(Debug, Clone)]
pub struct FractionSchedule {
    pub fractions: Vec<f64>,
}

impl ArmStrategy for FractionSchedule {
    fn report(&mut self, view: &ArmView<'_>, reward: f64) -> f64 {
        let f = match self.fractions.get(view.pulls()) {
            Some(f) => *f,
            None => self.fractions.last().copied().unwrap_or(1.0),
        };
        f * reward
    }
}
