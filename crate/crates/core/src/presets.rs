//! Named strategy profiles and the default six-arm instance.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::strategy::StrategyId;
use crate::types::{Distribution, GameConfig};

/// Bernoulli means of the default six-arm experiment.
pub const DEFAULT_MEANS: [f64; 6] = [0.9, 0.8, 0.6, 0.5, 0.4, 0.3];
pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_EPOCHS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Truthful,
    /// Every arm reports a random fraction of its reward.
    UntruthfulArbitrary,
    /// The two best arms are truthful, the rest report zero.
    OptimalReporting,
    /// Every arm withholds up to the given total.
    MBounded(f64),
}

impl Preset {
    pub fn profile(&self, num_arms: usize) -> Vec<StrategyId> {
        let id = match *self {
            Preset::Truthful => StrategyId::Truthful,
            Preset::UntruthfulArbitrary => StrategyId::untruthful_default(),
            Preset::OptimalReporting => StrategyId::TopTwoTruthful,
            Preset::MBounded(budget) => StrategyId::MBounded { budget },
        };
        vec![id; num_arms]
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Truthful => f.write_str("truthful"),
            Preset::UntruthfulArbitrary => f.write_str("untruthful_arbitrary"),
            Preset::OptimalReporting => f.write_str("optimal_reporting"),
            Preset::MBounded(m) => write!(f, "m_bounded:{m}"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truthful" => Ok(Preset::Truthful),
            "untruthful_arbitrary" => Ok(Preset::UntruthfulArbitrary),
            "optimal_reporting" => Ok(Preset::OptimalReporting),
            _ => {
                let m = s
                    .strip_prefix("m_bounded:")
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown profile preset `{s}`")))?;
                let m: f64 = m
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad savings bound in `{s}`")))?;
                if !(m.is_finite() && m >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "savings bound in `{s}` must be finite and non-negative"
                    )));
                }
                Ok(Preset::MBounded(m))
            }
        }
    }
}

/// Default six Bernoulli arms under `preset`.
pub fn default_config(preset: Preset) -> GameConfig {
    let arms: Vec<Distribution> = DEFAULT_MEANS
        .iter()
        .map(|&p| Distribution::Bernoulli { p })
        .collect();
    GameConfig::new(arms, DEFAULT_HORIZON, preset.profile(DEFAULT_MEANS.len()))
        .and_then(|c| c.with_epochs(DEFAULT_EPOCHS))
        .expect("default instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in [
            Preset::Truthful,
            Preset::UntruthfulArbitrary,
            Preset::OptimalReporting,
            Preset::MBounded(50.0),
            Preset::MBounded(0.5),
        ] {
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert!("m_bounded:-1".parse::<Preset>().is_err());
        assert!("m_bounded:x".parse::<Preset>().is_err());
        assert!("honest".parse::<Preset>().is_err());
    }

    #[test]
    fn default_instance_shape() {
        let c = default_config(Preset::Truthful);
        assert_eq!(c.num_arms(), 6);
        assert_eq!(c.horizon(), 10_000);
        assert_eq!(c.epochs(), 100);
        assert!(c.true_means().windows(2).all(|w| w[0] > w[1]));
    }
}
