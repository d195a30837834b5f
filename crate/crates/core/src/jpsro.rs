//! The exact JPSRO(CCE) loop and its trace format.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::br::{best_response_to_sigma, sigma_value, BestResponseResult};
use crate::error::{Error, Result};
use crate::game::{ExtensiveGame, GameSpec};
use crate::metagame::{evaluate_payoff_tensor, EvalMode, PayoffTensor, PolicySets, DEFAULT_TENSOR_CAP};
use crate::policy::TabularPolicy;
use crate::solver::{solve_cce, JointDistribution, Objective};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunConfig {
    pub game: GameSpec,
    pub objective: Objective,
    pub solver_epsilon: f64,
    pub termination_epsilon: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// `None` evaluates the metagame exactly; otherwise by this many sampled
    /// episodes per joint entry.
    pub simulated_episodes: Option<usize>,
    pub tensor_cap: usize,
    /// Record wall-clock time per iteration. Off by default so traces are
    /// reproducible byte for byte.
    pub record_timing: bool,
}

impl RunConfig {
    pub fn new(game: GameSpec) -> Self {
        RunConfig {
            game,
            objective: Objective::MaxGini,
            solver_epsilon: 0.01,
            termination_epsilon: 1e-3,
            max_iterations: 60,
            seed: 0,
            simulated_episodes: None,
            tensor_cap: DEFAULT_TENSOR_CAP,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.termination_epsilon > 0.0) || !self.termination_epsilon.is_finite() {
            return Err(Error::InvalidConfig("termination epsilon must be positive".into()));
        }
        if !(self.solver_epsilon >= 0.0) || !self.solver_epsilon.is_finite() {
            return Err(Error::InvalidConfig("solver epsilon must be non-negative".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max iterations must be at least 1".into()));
        }
        if self.simulated_episodes == Some(0) {
            return Err(Error::InvalidConfig("simulated evaluation needs at least one episode".into()));
        }
        Ok(())
    }

    pub fn eval_mode(&self) -> EvalMode {
        match self.simulated_episodes {
            None => EvalMode::Exact,
            Some(episodes) => EvalMode::Simulated { episodes, seed: self.seed },
        }
    }
}

/// Certificate of the meta-distribution `sigma^iteration`, measured by the
/// best responses computed against it.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub deviation_gains: Vec<f64>,
    pub max_deviation_gain: f64,
    /// Full-game CCE gap, the sum of `deviation_gains`.
    pub cce_gap: f64,
    pub values: Vec<f64>,
    pub population_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Deviation gains as estimated by the population's best-response head.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_deviation_gains: Option<Vec<f64>>,
    /// Per-player distillation KL reached on visited infosets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distill_kl: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl IterationRecord {
    pub fn new(iteration: usize, deviation_gains: Vec<f64>, values: Vec<f64>, population_sizes: Vec<usize>) -> Self {
        IterationRecord {
            iteration,
            max_deviation_gain: deviation_gains.iter().copied().fold(0.0, f64::max),
            cce_gap: deviation_gains.iter().sum(),
            deviation_gains,
            values,
            population_sizes,
            mode: None,
            estimated_deviation_gains: None,
            distill_kl: None,
            wall_time_ms: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    IterationCap,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub status: RunStatus,
    /// Final restricted populations; `sigma` is defined over them.
    pub population: PolicySets,
    pub sigma: JointDistribution,
    pub tensor: PayoffTensor,
    /// `sigmas[k]` is the meta-distribution certified by `records[k]`.
    pub sigmas: Vec<JointDistribution>,
    pub records: Vec<IterationRecord>,
}

/// Starting policy of each player: uniform, except in trade_comm where a
/// uniform start gives indifferent best responses, so a deterministic policy
/// is drawn from the seed instead.
pub fn initial_policies(game: &ExtensiveGame, seed: u64) -> Result<Vec<TabularPolicy>> {
    if game.name().starts_with("trade_comm") {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..game.num_players())
            .map(|p| TabularPolicy::random_deterministic(game, p, &mut rng))
            .collect()
    } else {
        (0..game.num_players()).map(|p| TabularPolicy::uniform(game, p)).collect()
    }
}

/// Best responses of every player to sigma, in player order.
pub fn best_responses(
    game: &ExtensiveGame,
    sets: &PolicySets,
    sigma: &JointDistribution,
    tensor: &PayoffTensor,
) -> Result<Vec<BestResponseResult>> {
    (0..game.num_players())
        .into_par_iter()
        .map(|p| best_response_to_sigma(game, sets, sigma, p, Some(tensor)))
        .collect()
}

/// Run JPSRO(CCE) from the configured starting policies.
pub fn jpsro_run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let game = config.game.build()?;
    run_on_game(&game, config, initial_policies(&game, config.seed)?)
}

/// Run JPSRO(CCE) on an already built game from the given starting policies.
pub fn run_on_game(game: &ExtensiveGame, config: &RunConfig, initial: Vec<TabularPolicy>) -> Result<RunOutput> {
    config.validate()?;
    let mode = config.eval_mode();
    let mut sets = PolicySets::singletons(game, initial)?;
    let mut tensor = evaluate_payoff_tensor(game, &sets, mode, config.tensor_cap)?;
    let mut sigma = solve_cce(&tensor, config.objective, config.solver_epsilon)?;
    let mut sigmas = Vec::new();
    let mut records = Vec::new();

    for t in 1..=config.max_iterations {
        let started = Instant::now();
        let brs = best_responses(game, &sets, &sigma, &tensor)?;
        let mut record = IterationRecord::new(
            t - 1,
            brs.iter().map(|b| b.deviation_gain).collect(),
            tensor.expected_values(sigma.probs()),
            sets.sizes(),
        );
        let previous = sets.clone();
        for br in brs {
            sets.push(game, br.policy)?;
        }
        if record.max_deviation_gain < config.termination_epsilon {
            if config.record_timing {
                record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            records.push(record);
            sigmas.push(sigma.clone());
            return Ok(RunOutput {
                status: RunStatus::Converged,
                population: previous,
                sigma,
                tensor,
                sigmas,
                records,
            });
        }
        tensor.extend(game, &sets, mode, config.tensor_cap)?;
        let next = solve_cce(&tensor, config.objective, config.solver_epsilon)?;
        if config.record_timing {
            record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
        records.push(record);
        sigmas.push(std::mem::replace(&mut sigma, next));
    }
    Ok(RunOutput {
        status: RunStatus::IterationCap,
        population: sets,
        sigma,
        tensor,
        sigmas,
        records,
    })
}

/// Recompute deviation gains and values of each stored meta-distribution
/// from the policies alone. `policies[p]` must hold at least as many
/// policies as any sigma uses; sigma `k` is read over the leading entries.
pub fn evaluate_trace(
    game: &ExtensiveGame,
    policies: &[Vec<TabularPolicy>],
    sigmas: &[JointDistribution],
) -> Result<Vec<IterationRecord>> {
    let full = PolicySets::new(game, policies.to_vec())?;
    sigmas
        .iter()
        .enumerate()
        .map(|(k, sigma)| {
            let sets = full.prefix(sigma.shape().dims())?;
            let gains = (0..game.num_players())
                .into_par_iter()
                .map(|p| best_response_to_sigma(game, &sets, sigma, p, None).map(|b| b.deviation_gain))
                .collect::<Result<Vec<f64>>>()?;
            let values = (0..game.num_players())
                .map(|p| sigma_value(game, &sets, sigma, p, None))
                .collect::<Result<Vec<f64>>>()?;
            Ok(IterationRecord::new(k, gains, values, sets.sizes()))
        })
        .collect()
}

#[derive(serde::Serialize, serde::Deserialize)]
struct TraceLine {
    schema_version: u32,
    #[serde(flatten)]
    record: IterationRecord,
}

pub fn write_trace_jsonl<W: Write>(records: &[IterationRecord], mut out: W) -> Result<()> {
    for record in records {
        let line = TraceLine {
            schema_version: TRACE_SCHEMA_VERSION,
            record: record.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl(text: &str) -> Result<Vec<IterationRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let line: TraceLine = serde_json::from_str(l)?;
            if line.schema_version != TRACE_SCHEMA_VERSION {
                return Err(Error::Parse(format!("unsupported trace schema {}", line.schema_version)));
            }
            Ok(line.record)
        })
        .collect()
}

/// One meta-distribution per line, aligned with the trace.
pub fn write_sigmas_jsonl<W: Write>(sigmas: &[JointDistribution], mut out: W) -> Result<()> {
    for sigma in sigmas {
        serde_json::to_writer(&mut out, &sigma.to_json_value())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_sigmas_jsonl(text: &str) -> Result<Vec<JointDistribution>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(JointDistribution::from_json)
        .collect()
}

/// CSV with one column per trace field; per-player fields are expanded.
pub fn write_trace_csv<W: Write>(records: &[IterationRecord], mut out: W) -> Result<()> {
    let n = records.first().map_or(0, |r| r.values.len());
    let timing = records.iter().any(|r| r.wall_time_ms.is_some());
    let estimated = records.iter().any(|r| r.estimated_deviation_gains.is_some());
    let distill = records.iter().any(|r| r.distill_kl.is_some());
    let mut header = vec!["iteration".to_string(), "cce_gap".into(), "max_deviation_gain".into()];
    header.extend((0..n).map(|p| format!("deviation_gain_{p}")));
    header.extend((0..n).map(|p| format!("value_{p}")));
    header.extend((0..n).map(|p| format!("population_size_{p}")));
    if estimated {
        header.extend((0..n).map(|p| format!("estimated_deviation_gain_{p}")));
    }
    if distill {
        header.extend((0..n).map(|p| format!("distill_kl_{p}")));
    }
    if timing {
        header.push("wall_time_ms".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for r in records {
        let mut row = vec![r.iteration.to_string(), fmt_f(r.cce_gap), fmt_f(r.max_deviation_gain)];
        row.extend(r.deviation_gains.iter().map(|&v| fmt_f(v)));
        row.extend(r.values.iter().map(|&v| fmt_f(v)));
        row.extend(r.population_sizes.iter().map(|v| v.to_string()));
        for (on, field) in [(estimated, &r.estimated_deviation_gains), (distill, &r.distill_kl)] {
            if on {
                match field {
                    Some(v) => row.extend(v.iter().map(|&x| fmt_f(x))),
                    None => row.extend((0..n).map(|_| String::new())),
                }
            }
        }
        if timing {
            row.push(r.wall_time_ms.map_or(String::new(), fmt_f));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub(crate) fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::rock_paper_scissors;

    #[test]
    fn rps_from_rock_converges() {
        let g = rock_paper_scissors().unwrap();
        let mut config = RunConfig::new(GameSpec::new("rps"));
        config.solver_epsilon = 0.0;
        let rock = TabularPolicy::deterministic(&g, 0, &[0]).unwrap();
        let rock1 = TabularPolicy::deterministic(&g, 1, &[0]).unwrap();
        let out = run_on_game(&g, &config, vec![rock, rock1]).unwrap();
        assert_eq!(out.status, RunStatus::Converged);
        assert!(out.records.len() <= 6, "{}", out.records.len());
        assert_eq!(out.records[0].cce_gap, 2.0);
        assert!(out.records.last().unwrap().cce_gap < 1e-6);
        for (k, r) in out.records.iter().enumerate() {
            assert_eq!(r.population_sizes, vec![k + 1; 2]);
            assert!((r.values[0] + r.values[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::new(GameSpec::new("rps"));
        c.termination_epsilon = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new(GameSpec::new("rps"));
        c.max_iterations = 0;
        assert!(jpsro_run(&c).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut c = RunConfig::new(GameSpec::new("kuhn_poker"));
        c.max_iterations = 2;
        let out = jpsro_run(&c).unwrap();
        assert_eq!(out.status, RunStatus::IterationCap);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.population.sizes(), vec![3, 3]);
    }

    #[test]
    fn trace_round_trips() {
        let c = RunConfig::new(GameSpec::new("rps"));
        let out = jpsro_run(&c).unwrap();
        let mut buf = Vec::new();
        write_trace_jsonl(&out.records, &mut buf).unwrap();
        let back = read_trace_jsonl(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, out.records);
        let mut buf = Vec::new();
        write_sigmas_jsonl(&out.sigmas, &mut buf).unwrap();
        assert_eq!(read_sigmas_jsonl(std::str::from_utf8(&buf).unwrap()).unwrap(), out.sigmas);
    }
}
