//! NeuPL-JPSRO: a single conditional population model trained with
//! reference snapshots, distillation and regularisation.
//!
//! Two fidelities share the loop structure. [`tabular`] stores one table per
//! strategy and reproduces the exact JPSRO driver; [`parametric`] shares a
//! small softmax scorer over infoset features and strategy embeddings.

pub mod adam;
pub mod checkpoint;
pub mod counterexample;
pub mod encoder;
pub mod estimator;
pub mod parametric;
pub mod schedule;
pub mod tabular;

use crate::error::{Error, Result};
use crate::jpsro::{RunConfig, RunOutput};

pub use counterexample::{counterexample_demo, CounterexampleReport, DriftRecord};
pub use encoder::{aggregate, encode_coplayers, EmbeddingSets, Encoding, DEFAULT_EMBEDDING_DIM, DEFAULT_TOP_K};
pub use estimator::{PayoffEstimator, PayoffSample};
pub use parametric::{ParametricModel, ParametricRun};
pub use schedule::pr_br;
pub use tabular::TabularPopulation;

pub const MODE_TABULAR: &str = "neupl-tabular";
pub const MODE_PARAMETRIC: &str = "neupl-parametric";

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationMode {
    TabularExact,
    SharedParametric,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NeuplConfig {
    pub run: RunConfig,
    pub mode: PopulationMode,
    pub top_k: usize,
    pub embedding_dim: usize,
    /// Episodes generated per iteration for distillation and regularisation.
    pub episodes_per_iteration: usize,
    pub distill_weight: f64,
    pub regularize_weight: f64,
    pub learning_rate: f64,
    /// Adam steps allowed per distillation attempt.
    pub step_budget: usize,
    /// Extra attempts when distillation misses the fidelity gate.
    pub distill_retries: usize,
    /// Largest KL allowed between the distilled and target policy on
    /// visited infosets.
    pub fidelity_kl: f64,
    /// Probability mixed uniformly into best-response targets so the KL
    /// objectives stay finite.
    pub target_floor: f64,
    /// Hash each player's infosets into this many feature buckets instead of
    /// one-hot features.
    pub buckets: Option<usize>,
    /// Replace exact payoff evaluation with the learned payoff estimator.
    pub use_estimator: bool,
    pub estimator_steps: usize,
    /// Extra best-response head targets against Dirichlet-sampled co-player
    /// distributions per iteration.
    pub bayes_priors: usize,
    /// Stop when every estimated deviation gain is below the termination
    /// epsilon. When off the loop runs for the full iteration budget.
    pub check_termination: bool,
}

impl NeuplConfig {
    pub fn new(run: RunConfig, mode: PopulationMode) -> Self {
        NeuplConfig {
            run,
            mode,
            top_k: DEFAULT_TOP_K,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            episodes_per_iteration: 2000,
            distill_weight: 1.0,
            regularize_weight: 1.0,
            learning_rate: 0.05,
            step_budget: 3000,
            distill_retries: 2,
            fidelity_kl: 1e-3,
            target_floor: 1e-4,
            buckets: None,
            use_estimator: false,
            estimator_steps: 2000,
            bayes_priors: 0,
            check_termination: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        if self.top_k == 0 {
            return Err(Error::InvalidConfig("top-K needs K >= 1".into()));
        }
        if self.embedding_dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
        }
        if self.episodes_per_iteration == 0 || self.step_budget == 0 {
            return Err(Error::InvalidConfig("episodes and step budget must be positive".into()));
        }
        for (name, v) in [
            ("distill weight", self.distill_weight),
            ("regularize weight", self.regularize_weight),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative")));
            }
        }
        if !(self.learning_rate > 0.0) || !(self.fidelity_kl > 0.0) {
            return Err(Error::InvalidConfig("learning rate and fidelity KL must be positive".into()));
        }
        if !(self.target_floor > 0.0 && self.target_floor < 1.0) {
            return Err(Error::InvalidConfig("target floor must lie in (0, 1)".into()));
        }
        if self.buckets == Some(0) {
            return Err(Error::InvalidConfig("bucket count must be positive".into()));
        }
        if self.use_estimator && self.mode == PopulationMode::TabularExact {
            return Err(Error::InvalidConfig("the payoff estimator needs the parametric mode".into()));
        }
        if self.use_estimator && self.run.simulated_episodes.is_some() {
            return Err(Error::InvalidConfig("estimator and simulated evaluation are exclusive".into()));
        }
        Ok(())
    }
}

/// Run NeuPL-JPSRO in the configured mode from the default starting policies.
pub fn neupl_jpsro_run(config: &NeuplConfig) -> Result<RunOutput> {
    config.validate()?;
    let game = config.run.game.build()?;
    let initial = crate::jpsro::initial_policies(&game, config.run.seed)?;
    match config.mode {
        PopulationMode::TabularExact => tabular::run(&game, config, initial, |_, _| {}).map(|(out, _)| out),
        PopulationMode::SharedParametric => {
            parametric::run(&game, config, initial, |_, _| {}).map(|r| r.output)
        }
    }
}
