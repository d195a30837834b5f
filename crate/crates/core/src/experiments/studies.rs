//! Payoff-estimator accuracy study on single-decision (matrix) games.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::metagame::{evaluate_payoff_tensor, EvalMode, PolicySets, DEFAULT_TENSOR_CAP};
use crate::policy::TabularPolicy;
use crate::population::estimator::{PayoffEstimator, PayoffSample, DEFAULT_HIDDEN};
use crate::population::{EmbeddingSets, DEFAULT_EMBEDDING_DIM};

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EstimatorStudy {
    pub game: String,
    pub entries: usize,
    pub training_steps: u64,
    pub final_loss: f64,
    /// Largest `|psi_p(a) - G_p(a)|` over every joint pure strategy and player.
    pub max_abs_error: f64,
    /// Largest `|sum_p psi_p(a)|`; the estimator is not constrained to
    /// respect zero-sum structure.
    pub max_sum_residual: f64,
}

/// Fit the estimator to the exact payoffs of every pure joint strategy of a
/// game where each player decides once. Symmetric player groups share their
/// embedding set. Training stops once the worst error is below `tolerance`
/// or after `max_steps` steps.
pub fn estimator_study(spec: &GameSpec, seed: u64, max_steps: usize, tolerance: f64) -> Result<EstimatorStudy> {
    let game = spec.build()?;
    let n = game.num_players();
    let mut lists = Vec::with_capacity(n);
    for p in 0..n {
        if game.num_infosets(p) != 1 {
            return Err(Error::UnsupportedParameters {
                game: spec.to_string(),
                reason: "the estimator study needs one decision per player".into(),
            });
        }
        let actions = game.infoset(p, 0).num_actions();
        lists.push(
            (0..actions)
                .map(|a| TabularPolicy::deterministic(&game, p, &[a]))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let sets = PolicySets::new(&game, lists)?;
    let tensor = evaluate_payoff_tensor(&game, &sets, EvalMode::Exact, DEFAULT_TENSOR_CAP)?;
    let shape = tensor.shape().clone();

    let groups = game.player_groups();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut embeddings = EmbeddingSets::new(n, DEFAULT_EMBEDDING_DIM);
    for group in &groups {
        let leader = group[0];
        for _ in 0..sets.sizes()[leader] {
            embeddings.sample(leader, &mut rng);
        }
        for &q in &group[1..] {
            if sets.sizes()[q] != sets.sizes()[leader] {
                return Err(Error::DimensionMismatch("symmetric players need equal strategy counts".into()));
            }
            for j in 0..sets.sizes()[leader] {
                embeddings.push(q, embeddings.get(leader, j)?.to_vec())?;
            }
        }
    }

    let samples: Vec<PayoffSample> = (0..shape.len())
        .map(|flat| (shape.unravel(flat), tensor.payoffs(flat).to_vec()))
        .collect();
    let mut estimator = PayoffEstimator::new(&groups, DEFAULT_EMBEDDING_DIM, DEFAULT_HIDDEN, 0.01, seed)?;
    let errors = |est: &PayoffEstimator| -> Result<(f64, f64)> {
        let mut worst: f64 = 0.0;
        let mut residual: f64 = 0.0;
        for (index, target) in &samples {
            let pred = est.predict(&embeddings, index)?;
            for (a, b) in pred.iter().zip(target) {
                worst = worst.max((a - b).abs());
            }
            residual = residual.max(pred.iter().sum::<f64>().abs());
        }
        Ok((worst, residual))
    };
    let mut loss = estimator.loss(&embeddings, &samples)?;
    let (mut worst, mut residual) = errors(&estimator)?;
    while worst > tolerance && (estimator.training_steps as usize) < max_steps {
        let chunk = 250.min(max_steps - estimator.training_steps as usize);
        loss = estimator.train(&embeddings, &samples, chunk)?;
        (worst, residual) = errors(&estimator)?;
    }
    Ok(EstimatorStudy {
        game: spec.to_string(),
        entries: samples.len(),
        training_steps: estimator.training_steps,
        final_loss: loss,
        max_abs_error: worst,
        max_sum_residual: residual,
    })
}
