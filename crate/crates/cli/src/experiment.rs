//! Runs every profile of an experiment and writes the CSV and plot files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use csv::Writer;

use sse_bandit::metrics::{aggregate_curves, regret, Comparator, RegretReport};
use sse_bandit::{run_epochs, GameResult};

use crate::config::{ExperimentConfig, NamedProfile};

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

pub fn plot_file(profile: &str) -> String {
    format!("regret_{}.dat", profile.replace(':', "_"))
}

/// Per-profile results kept after the files are written.
#[derive(Debug, Clone)]
pub struct ProfileOutcome {
    pub name: String,
    /// Mean cumulative regret at the horizon, bonuses included.
    pub final_regret: f64,
    pub halted: usize,
    pub committed: usize,
}

/// Runs the experiment and writes its files into `config.outputs`.
///
/// Files are staged in a temporary directory next to the destination and
/// moved into place only once every file is complete.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ProfileOutcome>> {
    let out = &config.outputs;
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = tempfile::Builder::new()
        .prefix(".sse-bandit-")
        .tempdir_in(&parent)
        .context("creating staging directory")?;

    let outcomes = write_all(config, staging.path())?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for entry in fs::read_dir(staging.path())? {
        let entry = entry?;
        let dest = out.join(entry.file_name());
        fs::rename(entry.path(), &dest).with_context(|| format!("moving {}", dest.display()))?;
    }
    Ok(outcomes)
}

fn write_all(config: &ExperimentConfig, dir: &Path) -> Result<Vec<ProfileOutcome>> {
    let k = config.arms.len();
    let mut trace = if config.write_trace {
        let mut w = Writer::from_path(dir.join(TRACE_FILE))?;
        w.write_record([
            "profile",
            "epoch",
            "t",
            "arm",
            "reward",
            "report",
            "phase",
            "active_count",
        ])?;
        Some(w)
    } else {
        None
    };
    let mut summary = Writer::from_path(dir.join(SUMMARY_FILE))?;
    summary.write_record(summary_header(k))?;
    let mut aggregate = Writer::from_path(dir.join(AGGREGATE_FILE))?;
    aggregate.write_record(["profile", "t", "mean_regret", "std_error"])?;

    let mut outcomes = Vec::new();
    for profile in &config.profiles {
        let game = config.game_config(profile)?;
        let results = run_epochs(game).with_context(|| format!("profile {}", profile.name))?;
        let regrets: Vec<RegretReport> = results
            .iter()
            .map(|r| regret(r, Comparator::SecondTrueMean))
            .collect();

        if let Some(w) = trace.as_mut() {
            write_trace(w, profile, &results)?;
        }
        for (r, reg) in results.iter().zip(&regrets) {
            summary.write_record(summary_row(profile, r, reg))?;
        }
        let curve = aggregate_curves(&regrets);
        for (i, m) in curve.iter().enumerate() {
            aggregate.write_record([
                profile.name.clone(),
                (i + 1).to_string(),
                m.mean.to_string(),
                m.se.to_string(),
            ])?;
        }
        let mean_bonus = regrets.iter().map(|r| r.bonus_total).sum::<f64>() / regrets.len() as f64;
        let final_regret = curve.last().map_or(0.0, |m| m.mean) + mean_bonus;
        write_plot(&dir.join(plot_file(&profile.name)), &curve, final_regret)?;

        outcomes.push(ProfileOutcome {
            name: profile.name.clone(),
            final_regret,
            halted: results.iter().filter(|r| r.halted()).count(),
            committed: results.iter().filter(|r| r.tau().is_some()).count(),
        });
    }
    if let Some(mut w) = trace {
        w.flush()?;
    }
    summary.flush()?;
    aggregate.flush()?;
    Ok(outcomes)
}

fn write_trace(
    w: &mut Writer<fs::File>,
    profile: &NamedProfile,
    results: &[GameResult],
) -> Result<()> {
    for r in results {
        let epoch = r.epoch.to_string();
        for rec in &r.trajectory.rounds {
            w.write_record([
                profile.name.as_str(),
                &epoch,
                &rec.t.to_string(),
                &(rec.chosen + 1).to_string(),
                &rec.reward.to_string(),
                &rec.report.to_string(),
                &rec.phase.to_string(),
                &rec.active_count.to_string(),
            ])?;
        }
    }
    Ok(())
}

pub fn summary_header(k: usize) -> Vec<String> {
    let mut h: Vec<String> = ["profile", "epoch", "tau", "halted", "halted_at"]
        .map(String::from)
        .to_vec();
    for field in ["n", "psi", "branch", "savings", "utility"] {
        for a in 1..=k {
            h.push(format!("{field}_{a}"));
        }
    }
    h.extend(
        [
            "comparator",
            "regret_total",
            "regret_exploration",
            "regret_exploitation",
            "regret_bonus",
        ]
        .map(String::from),
    );
    h
}

fn summary_row(profile: &NamedProfile, r: &GameResult, reg: &RegretReport) -> Vec<String> {
    let opt = |v: Option<usize>| v.map_or_else(String::new, |x| x.to_string());
    let mut row = vec![
        profile.name.clone(),
        r.epoch.to_string(),
        opt(r.tau()),
        (r.halted() as u8).to_string(),
        opt(r.trajectory.halted_at),
    ];
    let entries = &r.bonuses.entries;
    row.extend(r.pulls().iter().map(u64::to_string));
    row.extend(entries.iter().map(|e| e.value.to_string()));
    row.extend(entries.iter().map(|e| e.branch.to_string()));
    row.extend(r.savings.iter().map(f64::to_string));
    row.extend(r.utilities().iter().map(f64::to_string));
    row.extend(
        [
            reg.comparator,
            reg.total,
            reg.exploration,
            reg.exploitation,
            reg.bonus_total,
        ]
        .map(|v| v.to_string()),
    );
    row
}

/// Two columns, `t mean_regret`. The extra last row at `t = T` adds the
/// mean bonus total.
fn write_plot(path: &Path, curve: &[sse_bandit::metrics::MeanSe], final_regret: f64) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# t mean_cumulative_regret")?;
    for (i, m) in curve.iter().enumerate() {
        writeln!(w, "{} {}", i + 1, m.mean)?;
    }
    writeln!(w, "{} {}", curve.len(), final_regret)?;
    w.flush()?;
    Ok(())
}
