//! Tabular-exact population: one frozen table per strategy, exact best
//! responses, distillation as a copy.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::encoder::EmbeddingSets;
use super::{NeuplConfig, MODE_TABULAR};
use crate::error::Result;
use crate::game::ExtensiveGame;
use crate::jpsro::{best_responses, IterationRecord, RunOutput, RunStatus};
use crate::metagame::{evaluate_payoff_tensor, PolicySets};
use crate::policy::TabularPolicy;
use crate::solver::solve_cce;

#[derive(Clone, Debug)]
pub struct TabularPopulation {
    live: PolicySets,
    reference: PolicySets,
    embeddings: EmbeddingSets,
    reference_embeddings: EmbeddingSets,
    rng: ChaCha8Rng,
}

impl TabularPopulation {
    pub fn new(game: &ExtensiveGame, initial: Vec<TabularPolicy>, dim: usize, seed: u64) -> Result<Self> {
        let live = PolicySets::singletons(game, initial)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut embeddings = EmbeddingSets::new(game.num_players(), dim);
        for p in 0..game.num_players() {
            embeddings.sample(p, &mut rng);
        }
        Ok(TabularPopulation {
            reference: live.clone(),
            reference_embeddings: embeddings.clone(),
            live,
            embeddings,
            rng,
        })
    }

    /// `theta_hat <- theta`, `V_hat <- V`.
    pub fn snapshot_reference(&mut self) {
        self.reference = self.live.clone();
        self.reference_embeddings = self.embeddings.clone();
    }

    pub fn reference(&self) -> &PolicySets {
        &self.reference
    }

    pub fn live(&self) -> &PolicySets {
        &self.live
    }

    pub fn embeddings(&self) -> &EmbeddingSets {
        &self.embeddings
    }

    pub fn reference_embeddings(&self) -> &EmbeddingSets {
        &self.reference_embeddings
    }

    /// Action distributions of strategy `index` of `player`.
    pub fn extract(&self, player: usize, index: usize) -> Result<&TabularPolicy> {
        self.live.check_index(player, index)?;
        Ok(self.live.policy(player, index))
    }

    /// Store `policy` under a fresh embedding; returns its strategy index.
    pub fn distill(&mut self, game: &ExtensiveGame, policy: TabularPolicy) -> Result<usize> {
        let p = policy.player();
        self.embeddings.sample(p, &mut self.rng);
        self.live.push(game, policy)
    }

    /// Prior strategies are stored verbatim, so pinning them to the
    /// reference changes nothing.
    pub fn regularize(&mut self) {}
}

/// Tabular NeuPL-JPSRO. Produces the same populations and meta-distributions
/// as the exact driver. `observe(t, model)` is called after the
/// distillation step of every iteration.
pub fn run<F: FnMut(usize, &TabularPopulation)>(
    game: &ExtensiveGame,
    config: &NeuplConfig,
    initial: Vec<TabularPolicy>,
    mut observe: F,
) -> Result<(RunOutput, TabularPopulation)> {
    config.validate()?;
    let run = &config.run;
    let mode = run.eval_mode();
    let mut model = TabularPopulation::new(game, initial, config.embedding_dim, run.seed)?;
    let mut tensor = evaluate_payoff_tensor(game, model.live(), mode, run.tensor_cap)?;
    let mut sigma = solve_cce(&tensor, run.objective, run.solver_epsilon)?;
    let mut sigmas = Vec::new();
    let mut records = Vec::new();

    for t in 1..=run.max_iterations {
        let started = Instant::now();
        model.snapshot_reference();
        let brs = best_responses(game, model.reference(), &sigma, &tensor)?;
        let mut record = IterationRecord::new(
            t - 1,
            brs.iter().map(|b| b.deviation_gain).collect(),
            tensor.expected_values(sigma.probs()),
            model.reference().sizes(),
        );
        record.mode = Some(MODE_TABULAR.into());
        for br in brs {
            model.distill(game, br.policy)?;
        }
        model.regularize();
        observe(t, &model);
        if config.check_termination && record.max_deviation_gain < run.termination_epsilon {
            if run.record_timing {
                record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            records.push(record);
            sigmas.push(sigma.clone());
            let output = RunOutput {
                status: RunStatus::Converged,
                population: model.reference().clone(),
                sigma,
                tensor,
                sigmas,
                records,
            };
            return Ok((output, model));
        }
        tensor.extend(game, model.live(), mode, run.tensor_cap)?;
        let next = solve_cce(&tensor, run.objective, run.solver_epsilon)?;
        if run.record_timing {
            record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
        records.push(record);
        sigmas.push(std::mem::replace(&mut sigma, next));
    }
    let output = RunOutput {
        status: RunStatus::IterationCap,
        population: model.live().clone(),
        sigma,
        tensor,
        sigmas,
        records,
    };
    Ok((output, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{rock_paper_scissors, GameSpec};
    use crate::jpsro::{run_on_game, RunConfig};
    use crate::population::PopulationMode;

    #[test]
    fn snapshot_is_immutable_under_distillation() {
        let g = rock_paper_scissors().unwrap();
        let init = vec![TabularPolicy::uniform(&g, 0).unwrap(), TabularPolicy::uniform(&g, 1).unwrap()];
        let mut model = TabularPopulation::new(&g, init, 4, 0).unwrap();
        model.snapshot_reference();
        let before = model.reference().clone();
        for _ in 0..1000 {
            model.distill(&g, TabularPolicy::deterministic(&g, 0, &[1]).unwrap()).unwrap();
        }
        assert_eq!(model.reference().policies(0), before.policies(0));
        assert_eq!(model.extract(0, 0).unwrap(), before.policy(0, 0));
        assert_eq!(model.reference_embeddings().sizes(), vec![1, 1]);
        model.snapshot_reference();
        let a = model.reference().clone();
        model.snapshot_reference();
        assert_eq!(a.policies(0), model.reference().policies(0));
    }

    #[test]
    fn matches_the_exact_driver_on_rps() {
        let g = rock_paper_scissors().unwrap();
        let mut run = RunConfig::new(GameSpec::new("rps"));
        run.solver_epsilon = 0.0;
        let init = vec![
            TabularPolicy::deterministic(&g, 0, &[0]).unwrap(),
            TabularPolicy::deterministic(&g, 1, &[0]).unwrap(),
        ];
        let exact = run_on_game(&g, &run, init.clone()).unwrap();
        let config = NeuplConfig::new(run, PopulationMode::TabularExact);
        let (neupl, _) = super::run(&g, &config, init, |_, _| {}).unwrap();
        assert_eq!(exact.sigmas, neupl.sigmas);
        for p in 0..2 {
            assert_eq!(exact.population.policies(p), neupl.population.policies(p));
        }
        assert_eq!(neupl.records[0].mode.as_deref(), Some(MODE_TABULAR));
    }
}
