//! Simulation of the strategic multi-armed bandit game with debt-free
//! reporting: a successive-elimination player that pays end-of-game
//! bonuses, pluggable arm strategies, metrics, and a brute-force checker for
//! the truthful equilibrium.

pub mod bonus;
pub mod engine;
pub mod error;
pub mod history;
pub mod metrics;
pub mod player;
pub mod presets;
pub mod rank;
pub mod rng;
pub mod strategy;
pub mod types;
pub mod verifier;

pub use bonus::{
    assign_bonuses, bonus_best, bonus_suboptimal, BonusEntry, BonusReport, Branch, CapMode,
};
pub use engine::{run_classic_se, run_epochs, run_game, run_with, ClassicOutcome, GameResult};
pub use error::{Error, Result};
pub use history::{arm_view, player_view, ArmHistory, ArmView, OwnRecord, PlayerObservation};
pub use metrics::{
    effective_means, regret, thresholds, utilities, Bound, Comparator, GapReport, RegretReport,
    Thresholds, UtilityReport,
};
pub use player::{confidence_radius, DefectionVerdict, PlayerState};
pub use presets::{default_config, Preset, DEFAULT_MEANS};
pub use rank::{rank_map, RankMap};
pub use rng::{FixedTape, RewardSource, SeededRewards};
pub use strategy::{ArmStrategy, StrategyId};
pub use types::{
    sample_reward, Algorithm, ArmSpec, BonusMode, Distribution, GameConfig, Phase, RoundRecord,
    Trajectory,
};
pub use verifier::{verify_dominance, DeviationSpace, DominanceCertificate, TapeMode};
