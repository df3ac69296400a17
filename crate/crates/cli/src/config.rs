//! Experiment files.
//!
//! ```toml
//! horizon = 10000
//! epochs = 100
//! master_seed = 2024
//! algo = "s_se"                 # or "classic_se"
//! outputs = "out/six_arms"
//! profiles = ["truthful", "m_bounded:50", { name = "mixed", arms = [...] }]
//!
//! [[arms]]
//! dist = "bernoulli"
//! p = 0.9
//! ```
//!
//! Relative `outputs` paths resolve against the config file's directory.

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use toml::Spanned;

use sse_bandit::strategy::DEFAULT_FRACTIONS;
use sse_bandit::{Algorithm, Distribution, GameConfig, Preset, StrategyId};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    arms: Spanned<Vec<Spanned<RawArm>>>,
    horizon: Spanned<usize>,
    epochs: Spanned<usize>,
    #[serde(default)]
    master_seed: u64,
    profile: Option<Spanned<RawProfile>>,
    profiles: Option<Spanned<Vec<Spanned<RawProfile>>>>,
    #[serde(default)]
    algo: Option<Spanned<String>>,
    outputs: PathBuf,
    #[serde(default = "yes")]
    write_trace: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
enum RawArm {
    Bernoulli { p: f64 },
    Uniform { low: f64, high: f64 },
    Beta { alpha: f64, beta: f64 },
    PointMass { value: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawProfile {
    Preset(String),
    Custom(CustomProfile),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomProfile {
    name: String,
    arms: Vec<RawStrategy>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
enum RawStrategy {
    Truthful,
    Fractional {
        fractions: Option<Vec<f64>>,
        weights: Option<Vec<f64>>,
    },
    TopTwoTruthful,
    MBounded {
        m: f64,
    },
    Scripted {
        reports: Vec<f64>,
    },
}

/// A strategy profile with the name used in output files.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedProfile {
    pub name: String,
    pub strategies: Vec<StrategyId>,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub arms: Vec<Distribution>,
    pub horizon: usize,
    pub epochs: usize,
    pub master_seed: u64,
    pub profiles: Vec<NamedProfile>,
    pub algorithm: Algorithm,
    pub outputs: PathBuf,
    pub write_trace: bool,
}

impl ExperimentConfig {
    /// Game configuration of one profile.
    pub fn game_config(&self, profile: &NamedProfile) -> sse_bandit::Result<GameConfig> {
        Ok(
            GameConfig::new(self.arms.clone(), self.horizon, profile.strategies.clone())?
                .with_seed(self.master_seed)
                .with_epochs(self.epochs)?
                .with_algorithm(self.algorithm),
        )
    }

    /// Profile from a preset name, sized to this experiment's arms.
    pub fn preset_profile(&self, name: &str) -> Result<NamedProfile> {
        let preset: Preset = name.parse()?;
        Ok(NamedProfile {
            name: preset.to_string(),
            strategies: preset.profile(self.arms.len()),
        })
    }
}

pub fn parse_algorithm(s: &str) -> Result<Algorithm> {
    match s {
        "s_se" | "s-se" => Ok(Algorithm::StrategicSe),
        "classic_se" | "classic-se" => Ok(Algorithm::ClassicSe),
        _ => bail!("unknown algorithm `{s}` (expected s_se or classic_se)"),
    }
}

/// Reads and validates an experiment file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = parse_str(&text).with_context(|| format!("in {}", path.display()))?;
    if cfg.outputs.is_relative() {
        if let Some(dir) = path.parent() {
            cfg.outputs = dir.join(&cfg.outputs);
        }
    }
    Ok(cfg)
}

/// Line (one-based) holding byte offset `at`.
fn line_of(text: &str, at: usize) -> usize {
    text[..at.min(text.len())].matches('\n').count() + 1
}

fn at_line(text: &str, span: Range<usize>, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("line {}: {msg}", line_of(text, span.start))
}

pub fn parse_str(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;

    let arms_span = raw.arms.span();
    let mut arms = Vec::new();
    for arm in raw.arms.into_inner() {
        let span = arm.span();
        let d = match arm.into_inner() {
            RawArm::Bernoulli { p } => Distribution::Bernoulli { p },
            RawArm::Uniform { low, high } => Distribution::Uniform { low, high },
            RawArm::Beta { alpha, beta } => Distribution::Beta { alpha, beta },
            RawArm::PointMass { value } => Distribution::PointMass { value },
        };
        d.validate().map_err(|e| at_line(text, span, e))?;
        arms.push(d);
    }
    if arms.len() < 2 {
        return Err(at_line(
            text,
            arms_span,
            format!("need at least 2 arms, got {}", arms.len()),
        ));
    }
    let k = arms.len();

    let horizon = *raw.horizon.get_ref();
    if horizon < 2 {
        return Err(at_line(
            text,
            raw.horizon.span(),
            "horizon must be at least 2",
        ));
    }
    let epochs = *raw.epochs.get_ref();
    if epochs < 1 {
        return Err(at_line(
            text,
            raw.epochs.span(),
            "epochs must be at least 1",
        ));
    }
    let algorithm = match &raw.algo {
        Some(a) => parse_algorithm(a.get_ref()).map_err(|e| at_line(text, a.span(), e))?,
        None => Algorithm::StrategicSe,
    };

    let entries: Vec<Spanned<RawProfile>> = match (raw.profile, raw.profiles) {
        (Some(_), Some(p)) => {
            return Err(at_line(
                text,
                p.span(),
                "use either `profile` or `profiles`, not both",
            ))
        }
        (Some(p), None) => vec![p],
        (None, Some(p)) => p.into_inner(),
        (None, None) => bail!("missing `profiles`"),
    };
    if entries.is_empty() {
        bail!("`profiles` is empty");
    }
    let mut profiles: Vec<NamedProfile> = Vec::new();
    for entry in entries {
        let span = entry.span();
        let profile = match entry.into_inner() {
            RawProfile::Preset(name) => {
                let preset: Preset = name.parse().map_err(|e| at_line(text, span.clone(), e))?;
                NamedProfile {
                    name: preset.to_string(),
                    strategies: preset.profile(k),
                }
            }
            RawProfile::Custom(c) => {
                if c.arms.len() != k {
                    return Err(at_line(
                        text,
                        span,
                        format!(
                            "profile `{}` has {} strategies for {k} arms",
                            c.name,
                            c.arms.len()
                        ),
                    ));
                }
                if c.name.is_empty()
                    || !c
                        .name
                        .chars()
                        .all(|ch| ch.is_ascii_alphanumeric() || "_-:.".contains(ch))
                {
                    return Err(at_line(
                        text,
                        span,
                        format!(
                            "profile name `{}` must be non-empty and use only [A-Za-z0-9_-:.]",
                            c.name
                        ),
                    ));
                }
                NamedProfile {
                    name: c.name,
                    strategies: c.arms.into_iter().map(strategy_of).collect(),
                }
            }
        };
        for (a, s) in profile.strategies.iter().enumerate() {
            s.validate().map_err(|e| {
                at_line(
                    text,
                    span.clone(),
                    format!("profile `{}`, arm {}: {e}", profile.name, a + 1),
                )
            })?;
        }
        if profiles.iter().any(|p| p.name == profile.name) {
            return Err(at_line(
                text,
                span,
                format!("duplicate profile `{}`", profile.name),
            ));
        }
        profiles.push(profile);
    }

    Ok(ExperimentConfig {
        arms,
        horizon,
        epochs,
        master_seed: raw.master_seed,
        profiles,
        algorithm,
        outputs: raw.outputs,
        write_trace: raw.write_trace,
    })
}

fn strategy_of(raw: RawStrategy) -> StrategyId {
    match raw {
        RawStrategy::Truthful => StrategyId::Truthful,
        RawStrategy::Fractional { fractions, weights } => {
            let fractions = fractions.unwrap_or_else(|| DEFAULT_FRACTIONS.to_vec());
            let weights = weights.unwrap_or_else(|| vec![1.0; fractions.len()]);
            StrategyId::FractionalRandom { fractions, weights }
        }
        RawStrategy::TopTwoTruthful => StrategyId::TopTwoTruthful,
        RawStrategy::MBounded { m } => StrategyId::MBounded { budget: m },
        RawStrategy::Scripted { reports } => StrategyId::Scripted(reports),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
horizon = 100
epochs = 2
master_seed = 7
outputs = "out"
profiles = ["truthful"]

[[arms]]
dist = "bernoulli"
p = 0.9

[[arms]]
dist = "point_mass"
value = 0.2
"#;

    #[test]
    fn parses_minimal_file() {
        let c = parse_str(BASE).unwrap();
        assert_eq!(c.arms.len(), 2);
        assert_eq!(c.arms[1], Distribution::PointMass { value: 0.2 });
        assert_eq!(c.algorithm, Algorithm::StrategicSe);
        assert_eq!(c.profiles[0].name, "truthful");
        assert!(c.write_trace);
    }

    #[test]
    fn custom_profiles() {
        let text = BASE.replace(
            r#"profiles = ["truthful"]"#,
            r#"profiles = [
  "m_bounded:5",
  { name = "mixed", arms = [
      { strategy = "fractional", fractions = [1.0, 0.5], weights = [3.0, 1.0] },
      { strategy = "scripted", reports = [0.1, 0.0] },
  ] },
]"#,
        );
        let c = parse_str(&text).unwrap();
        assert_eq!(c.profiles.len(), 2);
        assert_eq!(
            c.profiles[0].strategies[0],
            StrategyId::MBounded { budget: 5.0 }
        );
        assert_eq!(
            c.profiles[1].strategies[1],
            StrategyId::Scripted(vec![0.1, 0.0])
        );
    }

    #[test]
    fn single_arm_is_rejected() {
        let text = BASE.replace("[[arms]]\ndist = \"point_mass\"\nvalue = 0.2\n", "");
        let err = parse_str(&text).unwrap_err().to_string();
        assert!(err.contains("at least 2 arms"), "{err}");
        assert!(err.starts_with("line "), "{err}");
    }

    #[test]
    fn out_of_range_fraction_names_its_line() {
        let text = BASE.replace(
            r#"profiles = ["truthful"]"#,
            "profiles = [\n  { name = \"bad\", arms = [\n    { strategy = \"fractional\", fractions = [1.3] },\n    { strategy = \"truthful\" } ] },\n]",
        );
        let err = parse_str(&text).unwrap_err().to_string();
        assert!(err.contains("1.3"), "{err}");
        assert!(err.starts_with("line 7"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_str(&format!("colour = 1\n{BASE}"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("colour"), "{err}");
        let err = parse_str(&BASE.replace("p = 0.9", "p = 0.9\nq = 1"))
            .unwrap_err()
            .to_string();
        assert!(err.contains('q'), "{err}");
    }

    #[test]
    fn bad_law_names_its_line() {
        let err = parse_str(&BASE.replace("p = 0.9", "p = 1.5"))
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("line 8"), "{err}");
    }

    #[test]
    fn algorithm_names() {
        let c = parse_str(&format!("algo = \"classic_se\"\n{BASE}")).unwrap();
        assert_eq!(c.algorithm, Algorithm::ClassicSe);
        assert!(parse_str(&format!("algo = \"ucb\"\n{BASE}")).is_err());
        assert_eq!(parse_algorithm("s-se").unwrap(), Algorithm::StrategicSe);
    }
}
