//! End-of-game bonuses.
//!
//! The committed (or, without a commit, top-ranked) arm is paid its pull
//! count times its lead over the frozen second-best reported mean. Every
//! other pulled arm is paid `16 ln T / gap`, with the gap measured just
//! before its last pull. Both branches add back the arm's last report.
//! Payments are capped at `T`; a negative best-arm payment is floored at 0;
//! a halted game forfeits the best-arm payment.

use std::fmt;

use crate::error::{Error, Result};
use crate::player::PlayerState;
use crate::rank::argmax_by;
use crate::types::{Algorithm, BonusMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    BestArm,
    Suboptimal,
    Forfeited,
    /// The arm was never pulled, or the algorithm pays no bonuses.
    None,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::BestArm => "best",
            Branch::Suboptimal => "suboptimal",
            Branch::Forfeited => "forfeited",
            Branch::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapMode {
    /// Clamp to the horizon; a non-positive gap pays the cap.
    Capped,
    /// No clamp; a non-positive gap is an error.
    Uncapped,
}

/// One arm's bonus and the statistics it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct BonusEntry {
    pub arm: usize,
    pub value: f64,
    pub branch: Branch,
    pub pulls: u64,
    pub final_mean: Option<f64>,
    /// Leader mean (suboptimal branch) or second-best mean (best branch).
    pub benchmark: Option<f64>,
    /// The arm's own mean before its last pull (suboptimal branch only).
    pub frozen_mean: Option<f64>,
    pub last_report: Option<f64>,
    pub capped: bool,
    pub floored: bool,
}

impl BonusEntry {
    fn unpaid(arm: usize, pulls: u64) -> Self {
        Self {
            arm,
            value: 0.0,
            branch: Branch::None,
            pulls,
            final_mean: None,
            benchmark: None,
            frozen_mean: None,
            last_report: None,
            capped: false,
            floored: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BonusReport {
    pub entries: Vec<BonusEntry>,
}

impl BonusReport {
    /// All-zero report, as paid by classic successive elimination.
    pub fn none(pulls: &[u64]) -> Self {
        Self {
            entries: pulls
                .iter()
                .enumerate()
                .map(|(k, &n)| BonusEntry::unpaid(k, n))
                .collect(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn value(&self, arm: usize) -> f64 {
        self.entries[arm].value
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.value).sum()
    }

    /// Arm on the best-arm branch, forfeited or not.
    pub fn best_arm(&self) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| matches!(e.branch, Branch::BestArm | Branch::Forfeited))
            .map(|e| e.arm)
    }

    pub fn any_capped(&self) -> bool {
        self.entries.iter().any(|e| e.capped)
    }
}

/// Suboptimal-branch payment `16 ln T / (top - own) + last_report`.
pub fn bonus_suboptimal(
    horizon: usize,
    mu_top: f64,
    mu_own: f64,
    last_report: f64,
    cap: CapMode,
) -> Result<f64> {
    suboptimal_entry(horizon, mu_top, mu_own, last_report, cap).map(|(v, _)| v)
}

fn suboptimal_entry(
    horizon: usize,
    mu_top: f64,
    mu_own: f64,
    last_report: f64,
    cap: CapMode,
) -> Result<(f64, bool)> {
    let t = horizon as f64;
    let gap = mu_top - mu_own;
    if gap <= 0.0 {
        return match cap {
            CapMode::Capped => Ok((t, true)),
            CapMode::Uncapped => Err(Error::DegenerateGap { gap }),
        };
    }
    let raw = 16.0 * t.ln() / gap + last_report;
    match cap {
        CapMode::Capped if raw > t => Ok((t, true)),
        _ => Ok((raw, false)),
    }
}

/// Best-arm payment `n (mu_final - second) + last_report`, floored at zero,
/// or zero when the game did not run to completion.
pub fn bonus_best(
    pulls: u64,
    mu_final: f64,
    mu_second: f64,
    last_report: f64,
    completed: bool,
) -> f64 {
    best_entry(pulls, mu_final, mu_second, last_report, completed).0
}

fn best_entry(
    pulls: u64,
    mu_final: f64,
    mu_second: f64,
    last_report: f64,
    completed: bool,
) -> (f64, bool) {
    if !completed {
        return (0.0, false);
    }
    let raw = pulls as f64 * (mu_final - mu_second) + last_report;
    if raw < 0.0 {
        (0.0, true)
    } else {
        (raw, false)
    }
}

/// Bonuses for a finished game.
pub fn assign_bonuses(state: &PlayerState, mode: BonusMode) -> Result<BonusReport> {
    if !state.is_over() {
        return Err(Error::Contract(
            "bonuses assigned before the game ended".into(),
        ));
    }
    if state.algorithm() == Algorithm::ClassicSe {
        return Ok(BonusReport::none(state.pulls()));
    }
    let horizon = state.horizon();
    let best = match state.committed() {
        Some(k) => k,
        None => argmax_by(state.active_arms(), |k| {
            state.reported_mean(k).unwrap_or(0.0)
        })
        .ok_or_else(|| Error::Contract("no active arm at the end of the game".into()))?,
    };
    let completed = state.halted_at().is_none();

    let mut entries = Vec::with_capacity(state.num_arms());
    for k in 0..state.num_arms() {
        let pulls = state.pulls()[k];
        let Some(snap) = state.last_pull(k) else {
            entries.push(BonusEntry::unpaid(k, pulls));
            continue;
        };
        let final_mean = state.reported_mean(k);
        let mut e = BonusEntry {
            final_mean,
            last_report: Some(snap.report),
            ..BonusEntry::unpaid(k, pulls)
        };
        if k == best {
            let second = snap.best_other_mean(k).unwrap_or(0.0);
            let (v, floored) = best_entry(
                pulls,
                final_mean.unwrap_or(0.0),
                second,
                snap.report,
                completed,
            );
            e.benchmark = Some(second);
            e.floored = floored;
            e.branch = if completed {
                Branch::BestArm
            } else {
                Branch::Forfeited
            };
            e.value = v;
            if v > horizon as f64 {
                e.value = horizon as f64;
                e.capped = true;
            }
        } else {
            let own = snap.prior_means[k].unwrap_or(0.0);
            let top = snap.leader_mean().unwrap_or(0.0).max(own);
            let (v, capped) = suboptimal_entry(horizon, top, own, snap.report, CapMode::Capped)?;
            e.benchmark = Some(top);
            e.frozen_mean = Some(own);
            e.branch = Branch::Suboptimal;
            e.value = v;
            e.capped = capped;
        }
        if mode == BonusMode::Ablated {
            e.value = 0.0;
        }
        entries.push(e);
    }
    Ok(BonusReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const LN_1E4: f64 = 4.0 * std::f64::consts::LN_10;

    #[test]
    fn suboptimal_examples() {
        let v = bonus_suboptimal(10_000, 0.8, 0.5, 0.5, CapMode::Uncapped).unwrap();
        assert_relative_eq!(v, 16.0 * LN_1E4 / 0.3 + 0.5, epsilon = 1e-9);
        assert_relative_eq!(v, 491.7182, epsilon = 1e-3);

        let g = 16.0 * LN_1E4;
        assert_relative_eq!(
            bonus_suboptimal(10_000, g, 0.0, 0.0, CapMode::Uncapped).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(
            bonus_suboptimal(10_000, 0.5, 0.5, 0.3, CapMode::Capped).unwrap(),
            10_000.0
        );
        assert!(matches!(
            bonus_suboptimal(10_000, 0.5, 0.5, 0.3, CapMode::Uncapped),
            Err(Error::DegenerateGap { .. })
        ));
        // a tiny positive gap is clamped to the horizon
        assert_eq!(
            bonus_suboptimal(100, 0.5, 0.4999, 0.0, CapMode::Capped).unwrap(),
            100.0
        );
    }

    #[test]
    fn best_examples() {
        assert_relative_eq!(
            bonus_best(9000, 0.8, 0.6, 0.7, true),
            1800.7,
            epsilon = 1e-9
        );
        assert_eq!(bonus_best(9000, 0.8, 0.6, 0.7, false), 0.0);
        assert_relative_eq!(bonus_best(9000, 0.6, 0.6, 0.4, true), 0.4, epsilon = 1e-12);
        // below the benchmark: floored
        assert_eq!(bonus_best(100, 0.5, 0.6, 0.4, true), 0.0);
    }

    proptest! {
        #[test]
        fn reimbursement_is_additive(
            top in 0.01..1.0f64, frac in 0.0..0.99f64, x in 0.0..=1.0f64,
            n in 1u64..10_000, mu in 0.0..=1.0f64, second in 0.0..=1.0f64,
        ) {
            let own = top * frac;
            let core = 16.0 * (10_000f64).ln() / (top - own);
            let v = bonus_suboptimal(10_000, top, own, x, CapMode::Uncapped).unwrap();
            prop_assert!((v - core - x).abs() <= 1e-9 * core.max(1.0));

            let core = n as f64 * (mu - second);
            if core + x >= 0.0 {
                prop_assert!((bonus_best(n, mu, second, x, true) - core - x).abs() < 1e-9);
            }
        }

        #[test]
        fn best_branch_is_linear_in_own_mean(
            n in 1u64..10_000, mu in 0.3..0.9f64, second in 0.0..0.3f64,
            x in 0.0..=1.0f64, delta in 0.0..0.1f64,
        ) {
            let a = bonus_best(n, mu, second, x, true);
            let b = bonus_best(n, mu + delta, second, x, true);
            prop_assert!((b - a - n as f64 * delta).abs() < 1e-7);
        }

        #[test]
        fn bonuses_are_non_negative(
            top in 0.0..=1.0f64, own in 0.0..=1.0f64, x in 0.0..=1.0f64,
            n in 0u64..1000, mu in 0.0..=1.0f64, done in any::<bool>(),
        ) {
            prop_assert!(bonus_suboptimal(1000, top, own, x, CapMode::Capped).unwrap() >= 0.0);
            prop_assert!(bonus_best(n, mu, top, x, done) >= 0.0);
        }
    }
}
