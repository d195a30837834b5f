//! Number of joint actions with non-trivial probability in each sigma.

use std::io::Write;

use crate::error::{Error, Result};
use crate::jpsro::fmt_f;
use crate::solver::JointDistribution;

pub const SUPPORT_THRESHOLDS: [f64; 3] = [1e-3, 5e-3, 1e-2];

/// Count of joint actions with probability strictly above each threshold.
pub fn support_counts(sigma: &JointDistribution) -> [usize; 3] {
    SUPPORT_THRESHOLDS.map(|t| sigma.probs().iter().filter(|&&p| p > t).count())
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SupportStats {
    /// `(seed, iteration, counts)` for every stored sigma.
    pub rows: Vec<(u64, usize, [usize; 3])>,
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

/// Counts for every sigma of every seed, with the mean and sample standard
/// deviation across all of them.
pub fn support_stats(runs: &[(u64, &[JointDistribution])]) -> Result<SupportStats> {
    let rows: Vec<(u64, usize, [usize; 3])> = runs
        .iter()
        .flat_map(|(seed, sigmas)| sigmas.iter().enumerate().map(move |(k, s)| (*seed, k, support_counts(s))))
        .collect();
    if rows.is_empty() {
        return Err(Error::Parse("no sigma snapshots to summarise".into()));
    }
    let n = rows.len() as f64;
    let mut mean = [0.0; 3];
    let mut std = [0.0; 3];
    for j in 0..3 {
        mean[j] = rows.iter().map(|r| r.2[j] as f64).sum::<f64>() / n;
        if rows.len() > 1 {
            std[j] = (rows.iter().map(|r| (r.2[j] as f64 - mean[j]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        }
    }
    Ok(SupportStats { rows, mean, std })
}

pub fn write_support_table<W: Write>(stats: &SupportStats, mut out: W) -> Result<()> {
    writeln!(out, "seed,iteration,above_1e-3,above_5e-3,above_1e-2")?;
    for (seed, k, c) in &stats.rows {
        writeln!(out, "{seed},{k},{},{},{}", c[0], c[1], c[2])?;
    }
    writeln!(
        out,
        "mean,,{},{},{}",
        fmt_f(stats.mean[0]),
        fmt_f(stats.mean[1]),
        fmt_f(stats.mean[2])
    )?;
    writeln!(out, "std,,{},{},{}", fmt_f(stats.std[0]), fmt_f(stats.std[1]), fmt_f(stats.std[2]))?;
    Ok(())
}
