//! Non-stationarity demonstration on avoid_direction.
//!
//! Player 0 starts by always declaring L and player 1 by playing uniformly.
//! Player 1's first best response is only trained where L was declared. With
//! a shared, capacity-limited model, later training moves that strategy at
//! the other infosets (and, without regularisation, at L too).

use super::parametric::{policy_drift, ParametricModel};
use super::{parametric, tabular, NeuplConfig, PopulationMode, TabularPopulation};
use crate::error::Result;
use crate::game::{ExtensiveGame, GameSpec};
use crate::jpsro::RunConfig;
use crate::policy::TabularPolicy;
use crate::solver::Objective;

const FOCAL: usize = 1;
const STRATEGY: usize = 1;

/// KL drift of player 1's first best response after `iteration`, relative
/// to its state at the end of iteration 1.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DriftRecord {
    pub iteration: usize,
    /// Worst infoset KL where the iteration-1 co-player reaches.
    pub visited_kl: f64,
    /// Worst infoset KL at the remaining infosets.
    pub unvisited_kl: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CounterexampleReport {
    pub iterations: usize,
    pub visited_infosets: Vec<String>,
    pub unvisited_infosets: Vec<String>,
    /// Concurrent training without reference regularisation.
    pub regime_a: Vec<DriftRecord>,
    /// Reference-regularised training.
    pub regime_b: Vec<DriftRecord>,
    /// Reference-regularised training with the tabular model.
    pub regime_b_tabular: Vec<DriftRecord>,
}

impl CounterexampleReport {
    pub fn max_visited(records: &[DriftRecord]) -> f64 {
        records.iter().map(|r| r.visited_kl).fold(0.0, f64::max)
    }

    pub fn max_unvisited(records: &[DriftRecord]) -> f64 {
        records.iter().map(|r| r.unvisited_kl).fold(0.0, f64::max)
    }
}

/// Player 1 infosets reached when player 0 plays `opponent`.
fn reached_infosets(game: &ExtensiveGame, opponent: &TabularPolicy) -> Vec<usize> {
    let mut out: Vec<usize> = game
        .terminals()
        .iter()
        .filter(|t| {
            t.path
                .iter()
                .filter(|s| s.player != FOCAL)
                .all(|s| opponent.prob(s.infoset, s.action) > 0.0)
        })
        .flat_map(|t| t.path.iter().filter(|s| s.player == FOCAL).map(|s| s.infoset))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn config(iterations: usize, seed: u64, mode: PopulationMode, regularize_weight: f64) -> NeuplConfig {
    let mut run = RunConfig::new(GameSpec::new("avoid_direction"));
    run.objective = Objective::MaxGini;
    run.solver_epsilon = 0.0;
    run.max_iterations = iterations;
    run.seed = seed;
    let mut c = NeuplConfig::new(run, mode);
    c.check_termination = false;
    c.buckets = Some(2);
    c.embedding_dim = 2;
    c.episodes_per_iteration = 500;
    c.regularize_weight = regularize_weight;
    c
}

struct Tracker {
    visited: Vec<usize>,
    unvisited: Vec<usize>,
    first: Option<TabularPolicy>,
    records: Vec<DriftRecord>,
}

impl Tracker {
    fn observe(&mut self, iteration: usize, policy: TabularPolicy) -> Result<()> {
        if iteration == 1 {
            self.first = Some(policy.clone());
        }
        let first = self.first.as_ref().expect("iteration 1 observed first");
        self.records.push(DriftRecord {
            iteration,
            visited_kl: policy_drift(&policy, first, &self.visited)?,
            unvisited_kl: policy_drift(&policy, first, &self.unvisited)?,
        });
        Ok(())
    }
}

/// Run regimes A and B with a parametric model (two hashed feature buckets,
/// two-dimensional embeddings) and regime B with the tabular model for
/// `iterations` iterations each.
pub fn counterexample_demo(iterations: usize, seed: u64) -> Result<CounterexampleReport> {
    let game = GameSpec::new("avoid_direction").build()?;
    let initial = vec![
        TabularPolicy::deterministic(&game, 0, &[0])?,
        TabularPolicy::uniform(&game, FOCAL)?,
    ];
    let visited = reached_infosets(&game, &initial[0]);
    let unvisited: Vec<usize> = (0..game.num_infosets(FOCAL)).filter(|i| !visited.contains(i)).collect();
    let tracker = || Tracker {
        visited: visited.clone(),
        unvisited: unvisited.clone(),
        first: None,
        records: Vec::new(),
    };

    let mut regimes = Vec::new();
    for weight in [0.0, 1.0] {
        let mut t = tracker();
        let mut failure = None;
        let cfg = config(iterations, seed, PopulationMode::SharedParametric, weight);
        parametric::run(&game, &cfg, initial.clone(), |it, model: &ParametricModel| {
            if failure.is_none() {
                if let Err(e) = model.extract(&game, FOCAL, STRATEGY).and_then(|p| t.observe(it, p)) {
                    failure = Some(e);
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        regimes.push(t.records);
    }

    let mut t = tracker();
    let mut failure = None;
    let cfg = config(iterations, seed, PopulationMode::TabularExact, 1.0);
    tabular::run(&game, &cfg, initial, |it, model: &TabularPopulation| {
        if failure.is_none() {
            if let Err(e) = model.extract(FOCAL, STRATEGY).cloned().and_then(|p| t.observe(it, p)) {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let names = |ids: &[usize]| ids.iter().map(|&i| game.infoset(FOCAL, i).id.clone()).collect();
    let regime_b = regimes.pop().expect("two regimes");
    let regime_a = regimes.pop().expect("two regimes");
    Ok(CounterexampleReport {
        iterations,
        visited_infosets: names(&visited),
        unvisited_infosets: names(&unvisited),
        regime_a,
        regime_b,
        regime_b_tabular: t.records,
    })
}
