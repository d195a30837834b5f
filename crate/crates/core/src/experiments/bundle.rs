//! Multi-seed runs and their on-disk result bundle.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::ExtensiveGame;
use crate::jpsro::{
    fmt_f, read_sigmas_jsonl, read_trace_jsonl, run_on_game, write_sigmas_jsonl, write_trace_jsonl, initial_policies,
    IterationRecord, RunOutput, RunStatus,
};
use crate::policy::TabularPolicy;
use crate::population::{parametric, tabular, NeuplConfig, PopulationMode};
use crate::solver::JointDistribution;

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Jpsro,
    NeuplTabular,
    NeuplParametric,
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algo::Jpsro => "jpsro",
            Algo::NeuplTabular => "neupl-tabular",
            Algo::NeuplParametric => "neupl-parametric",
        })
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub algo: Algo,
    /// Population settings; `neupl.run` is the shared run configuration.
    /// Its seed is overridden per run.
    pub neupl: NeuplConfig,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Fingerprint {
    pub crate_version: String,
    pub schema_version: u32,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BundleHeader {
    pub config: ExperimentConfig,
    pub fingerprint: Fingerprint,
}

#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub status: RunStatus,
    pub records: Vec<IterationRecord>,
    pub sigmas: Vec<JointDistribution>,
    /// Final populations, one list per player.
    pub policies: Vec<Vec<TabularPolicy>>,
}

/// Mean and sample standard deviation across seeds at one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub iteration: usize,
    pub seeds: usize,
    pub cce_gap_mean: f64,
    pub cce_gap_std: f64,
    pub value_mean: Vec<f64>,
    pub value_std: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ResultBundle {
    pub header: BundleHeader,
    pub runs: Vec<SeedRun>,
    pub aggregate: Vec<AggregateRow>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::InvalidConfig("seeds must be distinct".into()));
        }
        let mut neupl = self.neupl.clone();
        neupl.mode = match self.algo {
            Algo::NeuplParametric => PopulationMode::SharedParametric,
            _ => PopulationMode::TabularExact,
        };
        neupl.validate()
    }
}

fn population_lists(output: &RunOutput) -> Vec<Vec<TabularPolicy>> {
    (0..output.population.num_players())
        .map(|p| output.population.policies(p).to_vec())
        .collect()
}

/// Run one seed of the configured algorithm.
pub fn run_seed(game: &ExtensiveGame, config: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let mut neupl = config.neupl.clone();
    neupl.run.seed = seed;
    let initial = initial_policies(game, seed)?;
    let output = match config.algo {
        Algo::Jpsro => run_on_game(game, &neupl.run, initial)?,
        Algo::NeuplTabular => {
            neupl.mode = PopulationMode::TabularExact;
            tabular::run(game, &neupl, initial, |_, _| {})?.0
        }
        Algo::NeuplParametric => {
            neupl.mode = PopulationMode::SharedParametric;
            parametric::run(game, &neupl, initial, |_, _| {})?.output
        }
    };
    Ok(SeedRun {
        seed,
        status: output.status,
        policies: population_lists(&output),
        records: output.records,
        sigmas: output.sigmas,
    })
}

/// Run every seed (in parallel) and aggregate in sorted seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultBundle> {
    config.validate()?;
    let game = config.neupl.run.game.build()?;
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    let runs = seeds
        .par_iter()
        .map(|&s| run_seed(&game, config, s))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(&runs.iter().map(|r| r.records.as_slice()).collect::<Vec<_>>())?;
    Ok(ResultBundle {
        header: BundleHeader {
            config: config.clone(),
            fingerprint: Fingerprint {
                crate_version: env!("CARGO_PKG_VERSION").into(),
                schema_version: BUNDLE_SCHEMA_VERSION,
                seeds,
            },
        },
        runs,
        aggregate,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-iteration mean and sample standard deviation across traces. A trace
/// that stopped early contributes its last record to later iterations.
pub fn aggregate(traces: &[&[IterationRecord]]) -> Result<Vec<AggregateRow>> {
    if traces.is_empty() || traces.iter().any(|t| t.is_empty()) {
        return Err(Error::Parse("cannot aggregate an empty trace".into()));
    }
    let n = traces[0][0].values.len();
    if traces.iter().flat_map(|t| t.iter()).any(|r| r.values.len() != n) {
        return Err(Error::DimensionMismatch("traces disagree on the number of players".into()));
    }
    let len = traces.iter().map(|t| t.len()).max().unwrap_or(0);
    Ok((0..len)
        .map(|k| {
            let rows: Vec<&IterationRecord> = traces.iter().map(|t| &t[k.min(t.len() - 1)]).collect();
            let (cce_gap_mean, cce_gap_std) = mean_std(&rows.iter().map(|r| r.cce_gap).collect::<Vec<_>>());
            let (value_mean, value_std) = (0..n)
                .map(|p| mean_std(&rows.iter().map(|r| r.values[p]).collect::<Vec<_>>()))
                .unzip();
            AggregateRow {
                iteration: k,
                seeds: traces.len(),
                cce_gap_mean,
                cce_gap_std,
                value_mean,
                value_std,
            }
        })
        .collect())
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], mut out: W) -> Result<()> {
    let n = rows.first().map_or(0, |r| r.value_mean.len());
    let mut header = vec!["iteration".to_string(), "seeds".into(), "cce_gap_mean".into(), "cce_gap_std".into()];
    for p in 0..n {
        header.push(format!("value_{p}_mean"));
        header.push(format!("value_{p}_std"));
    }
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let mut row = vec![r.iteration.to_string(), r.seeds.to_string(), fmt_f(r.cce_gap_mean), fmt_f(r.cce_gap_std)];
        for p in 0..n {
            row.push(fmt_f(r.value_mean[p]));
            row.push(fmt_f(r.value_std[p]));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_policies<W: Write>(game: &ExtensiveGame, policies: &[Vec<TabularPolicy>], mut out: W) -> Result<()> {
    for list in policies {
        for policy in list {
            out.write_all(policy.to_text(game).as_bytes())?;
        }
    }
    Ok(())
}

/// Inverse of [`write_policies`].
pub fn read_policies(game: &ExtensiveGame, text: &str) -> Result<Vec<Vec<TabularPolicy>>> {
    let mut blocks: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.starts_with("policy ") {
            blocks.push(String::new());
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| Error::Parse("policy file must start with a policy header".into()))?;
        block.push_str(line);
        block.push('\n');
    }
    let mut lists = vec![Vec::new(); game.num_players()];
    for block in blocks {
        let policy = TabularPolicy::from_text(game, &block)?;
        lists[policy.player()].push(policy);
    }
    Ok(lists)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Write `config.json`, per-seed `trace-<seed>.jsonl`, `sigma-<seed>.jsonl`,
/// `policies-<seed>.txt`, and `aggregate.csv` into `dir`.
pub fn write_bundle(bundle: &ResultBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let game = bundle.header.config.neupl.run.game.build()?;
    let mut header = serde_json::to_string_pretty(&bundle.header)?;
    header.push('\n');
    fs::write(dir.join("config.json"), header)?;
    for run in &bundle.runs {
        let mut w = create(&dir.join(format!("trace-{}.jsonl", run.seed)))?;
        write_trace_jsonl(&run.records, &mut w)?;
        w.flush()?;
        let mut w = create(&dir.join(format!("sigma-{}.jsonl", run.seed)))?;
        write_sigmas_jsonl(&run.sigmas, &mut w)?;
        w.flush()?;
        let mut w = create(&dir.join(format!("policies-{}.txt", run.seed)))?;
        write_policies(&game, &run.policies, &mut w)?;
        w.flush()?;
    }
    let mut w = create(&dir.join("aggregate.csv"))?;
    write_aggregate_csv(&bundle.aggregate, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Read a bundle back, recomputing the aggregate from the traces. Sigma and
/// policy files are optional.
pub fn read_bundle(dir: &Path) -> Result<ResultBundle> {
    let header: BundleHeader = serde_json::from_str(&fs::read_to_string(dir.join("config.json"))?)?;
    if header.fingerprint.schema_version != BUNDLE_SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported bundle schema {}",
            header.fingerprint.schema_version
        )));
    }
    let game = header.config.neupl.run.game.build()?;
    let mut runs = Vec::new();
    for &seed in &header.fingerprint.seeds {
        let records = read_trace_jsonl(&fs::read_to_string(dir.join(format!("trace-{seed}.jsonl")))?)?;
        let sigma_path = dir.join(format!("sigma-{seed}.jsonl"));
        let sigmas = if sigma_path.exists() {
            read_sigmas_jsonl(&fs::read_to_string(sigma_path)?)?
        } else {
            Vec::new()
        };
        let policy_path = dir.join(format!("policies-{seed}.txt"));
        let policies = if policy_path.exists() {
            read_policies(&game, &fs::read_to_string(policy_path)?)?
        } else {
            Vec::new()
        };
        runs.push(SeedRun {
            seed,
            status: RunStatus::IterationCap,
            records,
            sigmas,
            policies,
        });
    }
    let aggregate = aggregate(&runs.iter().map(|r| r.records.as_slice()).collect::<Vec<_>>())?;
    Ok(ResultBundle { header, runs, aggregate })
}
