//! Shared-parametric population.
//!
//! Every strategy of player `p` is read from one scorer,
//! `logits(I, nu) = W[b(I)] nu + c[b(I)]`, where `b(I)` is the feature bucket
//! of infoset `I` (one-hot by default, hashed to force sharing) and `nu` is
//! the strategy's trainable embedding. A separate best-response head
//! `Pi_phi(. | I, g)` conditions on the top-K co-player encoding `g`.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::adam::Adam;
use super::encoder::{encode_coplayers, EmbeddingSets};
use super::estimator::{PayoffEstimator, PayoffSample, DEFAULT_HIDDEN};
use super::schedule::pr_br;
use super::{NeuplConfig, MODE_PARAMETRIC};
use crate::br::{exact_maxent_best_response, mixture_value, sigma_value, CoPlayerMixture};
use crate::error::{Error, Result};
use crate::game::ExtensiveGame;
use crate::jpsro::{IterationRecord, RunOutput, RunStatus};
use crate::metagame::{evaluate_payoff_tensor, sample_index, sample_trajectory, PayoffTensor, PolicySets};
use crate::policy::{distribution_kl, TabularPolicy};
use crate::solver::{solve_cce, JointDistribution};

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a.ln() - b.ln()))
        .sum::<f64>()
        .max(0.0)
}

/// Mix `floor` of uniform into a distribution so log-ratios stay finite.
fn floored(dist: &[f64], floor: f64) -> Vec<f64> {
    let u = floor / dist.len() as f64;
    dist.iter().map(|&p| (1.0 - floor) * p + u).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TermKind {
    Distill(usize),
    Regularize,
}

/// One loss term, `weight * (KL(Pi_theta || target) + KL(target || Pi_theta))`
/// at one infoset. The reverse part is the distillation objective; the
/// forward part keeps gradients alive when the softmax starts saturated on
/// the wrong action.
#[derive(Clone, Debug)]
struct Term {
    kind: TermKind,
    player: usize,
    infoset: usize,
    strategy: usize,
    target: Vec<f64>,
    weight: f64,
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct ParametricModel {
    num_players: usize,
    dim: usize,
    max_actions: usize,
    num_actions: Vec<Vec<usize>>,
    buckets: Vec<Vec<usize>>,
    /// Bucket weights, then embeddings, in one trainable vector.
    params: Vec<f64>,
    embedding_offsets: Vec<Vec<usize>>,
    adam: Adam,
    pub iteration: usize,
}

impl ParametricModel {
    /// `buckets = None` gives every infoset its own feature; `Some(b)` hashes
    /// each player's infosets into `b` shared features.
    pub fn new(game: &ExtensiveGame, dim: usize, buckets: Option<usize>, learning_rate: f64) -> Result<Self> {
        if dim == 0 || buckets == Some(0) {
            return Err(Error::InvalidConfig("embedding dimension and bucket count must be positive".into()));
        }
        let n = game.num_players();
        let num_actions: Vec<Vec<usize>> = (0..n)
            .map(|p| game.infosets(p).iter().map(|i| i.num_actions()).collect())
            .collect();
        let max_actions = num_actions.iter().flatten().copied().max().unwrap_or(1);
        let mut next = 0;
        let mut bucket_map = Vec::with_capacity(n);
        for counts in &num_actions {
            let width = buckets.unwrap_or(counts.len()).min(counts.len().max(1));
            bucket_map.push((0..counts.len()).map(|i| next + i % width).collect::<Vec<_>>());
            next += width;
        }
        let params = vec![0.0; next * max_actions * (dim + 1)];
        let len = params.len();
        Ok(ParametricModel {
            num_players: n,
            dim,
            max_actions,
            num_actions,
            buckets: bucket_map,
            params,
            embedding_offsets: vec![Vec::new(); n],
            adam: Adam::new(len, learning_rate),
            iteration: 0,
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.embedding_offsets.iter().map(Vec::len).collect()
    }

    /// Append a standard-normal embedding for a new strategy of `player`.
    pub fn add_strategy<R: Rng + ?Sized>(&mut self, player: usize, rng: &mut R) -> usize {
        let offset = self.params.len();
        for _ in 0..self.dim {
            self.params.push(rng.sample(StandardNormal));
        }
        self.adam.resize(self.params.len());
        self.embedding_offsets[player].push(offset);
        self.embedding_offsets[player].len() - 1
    }

    pub fn embedding(&self, player: usize, strategy: usize) -> Result<&[f64]> {
        let o = *self
            .embedding_offsets
            .get(player)
            .and_then(|s| s.get(strategy))
            .ok_or(Error::UnknownStrategy { player, index: strategy })?;
        Ok(&self.params[o..o + self.dim])
    }

    pub fn embeddings(&self) -> EmbeddingSets {
        let mut v = EmbeddingSets::new(self.num_players, self.dim);
        for (p, offsets) in self.embedding_offsets.iter().enumerate() {
            for &o in offsets {
                v.push(p, self.params[o..o + self.dim].to_vec()).expect("finite embedding");
            }
        }
        v
    }

    fn row(&self, player: usize, infoset: usize, action: usize) -> usize {
        (self.buckets[player][infoset] * self.max_actions + action) * (self.dim + 1)
    }

    fn logits(&self, player: usize, infoset: usize, embedding: usize) -> Vec<f64> {
        let nu = &self.params[embedding..embedding + self.dim];
        (0..self.num_actions[player][infoset])
            .map(|a| {
                let r = self.row(player, infoset, a);
                let w = &self.params[r..r + self.dim];
                w.iter().zip(nu).map(|(x, y)| x * y).sum::<f64>() + self.params[r + self.dim]
            })
            .collect()
    }

    /// Action distribution of strategy `strategy` at `infoset`.
    pub fn dist(&self, player: usize, infoset: usize, strategy: usize) -> Result<Vec<f64>> {
        self.embedding(player, strategy)?;
        Ok(softmax(&self.logits(player, infoset, self.embedding_offsets[player][strategy])))
    }

    /// Policy extraction `Pi_theta(. | ., nu_strategy)` as a table.
    pub fn extract(&self, game: &ExtensiveGame, player: usize, strategy: usize) -> Result<TabularPolicy> {
        let table = (0..self.num_actions[player].len())
            .map(|i| self.dist(player, i, strategy))
            .collect::<Result<Vec<_>>>()?;
        TabularPolicy::new(game, player, table)
    }

    pub fn extract_all(&self, game: &ExtensiveGame) -> Result<PolicySets> {
        let lists = (0..self.num_players)
            .map(|p| (0..self.sizes()[p]).map(|j| self.extract(game, p, j)).collect())
            .collect::<Result<Vec<_>>>()?;
        PolicySets::new(game, lists)
    }

    /// Gradient of the weighted loss; returns each term's
    /// `KL(Pi_theta || target)`.
    fn loss_and_grad(&self, terms: &[Term], grad: &mut [f64]) -> Vec<f64> {
        grad.fill(0.0);
        let d = self.dim;
        terms
            .iter()
            .map(|t| {
                let e = self.embedding_offsets[t.player][t.strategy];
                let p = softmax(&self.logits(t.player, t.infoset, e));
                let value = kl(&p, &t.target);
                for (a, (&pa, &qa)) in p.iter().zip(&t.target).enumerate() {
                    let g = t.weight * (pa * ((pa.ln() - qa.ln()) - value) + pa - qa);
                    if g == 0.0 {
                        continue;
                    }
                    let r = self.row(t.player, t.infoset, a);
                    for k in 0..d {
                        grad[r + k] += g * self.params[e + k];
                        grad[e + k] += g * self.params[r + k];
                    }
                    grad[r + d] += g;
                }
                value
            })
            .collect()
    }

    /// Adam on the summed terms until every distillation term is below
    /// `fidelity` and the mean regularisation KL is too, or the budget runs
    /// out. Returns per-player worst distillation KL.
    fn fit(&mut self, terms: &[Term], fidelity: f64, budget: usize, retries: usize) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.len()];
        let mut worst = vec![0.0; self.num_players];
        for attempt in 0..=retries {
            if attempt > 0 {
                self.adam.reset();
            }
            for _ in 0..budget {
                let kls = self.loss_and_grad(terms, &mut grad);
                if self.gate(terms, &kls, fidelity, &mut worst) {
                    return worst;
                }
                let mut params = std::mem::take(&mut self.params);
                self.adam.update(&mut params, &grad);
                self.params = params;
            }
        }
        let kls = self.loss_and_grad(terms, &mut grad);
        self.gate(terms, &kls, fidelity, &mut worst);
        worst
    }

    fn gate(&self, terms: &[Term], kls: &[f64], fidelity: f64, worst: &mut [f64]) -> bool {
        worst.fill(0.0);
        let (mut reg, mut reg_count) = (0.0, 0usize);
        for (t, &v) in terms.iter().zip(kls) {
            match t.kind {
                TermKind::Distill(p) => worst[p] = f64::max(worst[p], v),
                TermKind::Regularize => {
                    reg += v;
                    reg_count += 1;
                }
            }
        }
        worst.iter().all(|&v| v < fidelity) && reg <= fidelity * reg_count as f64
    }
}

/// Auxiliary best-response head `Pi_phi(. | I, g)`, one softmax row per
/// infoset over `[g; 1]`.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct BrHead {
    input: usize,
    max_actions: usize,
    offsets: Vec<usize>,
    num_actions: Vec<Vec<usize>>,
    params: Vec<f64>,
    adam: Adam,
}

struct HeadTerm {
    player: usize,
    infoset: usize,
    input: Vec<f64>,
    target: Vec<f64>,
}

impl BrHead {
    pub fn for_model(model: &ParametricModel, input: usize, learning_rate: f64) -> Self {
        let mut offsets = Vec::new();
        let mut total = 0;
        for counts in &model.num_actions {
            offsets.push(total);
            total += counts.len();
        }
        let len = total * model.max_actions * (input + 1);
        BrHead {
            input,
            max_actions: model.max_actions,
            offsets,
            num_actions: model.num_actions.clone(),
            params: vec![0.0; len],
            adam: Adam::new(len, learning_rate),
        }
    }

    fn row(&self, player: usize, infoset: usize, action: usize) -> usize {
        ((self.offsets[player] + infoset) * self.max_actions + action) * (self.input + 1)
    }

    fn dist(&self, player: usize, infoset: usize, g: &[f64]) -> Vec<f64> {
        let logits: Vec<f64> = (0..self.num_actions[player][infoset])
            .map(|a| {
                let r = self.row(player, infoset, a);
                self.params[r..r + self.input].iter().zip(g).map(|(w, x)| w * x).sum::<f64>()
                    + self.params[r + self.input]
            })
            .collect();
        softmax(&logits)
    }

    fn policy(&self, game: &ExtensiveGame, player: usize, g: &[f64]) -> Result<TabularPolicy> {
        let table = (0..self.num_actions[player].len()).map(|i| self.dist(player, i, g)).collect();
        TabularPolicy::new(game, player, table)
    }

    /// Cross-entropy toward the targets until every term's
    /// `KL(target || head)` is below `tolerance`.
    fn train(&mut self, terms: &[HeadTerm], tolerance: f64, budget: usize) {
        if terms.is_empty() {
            return;
        }
        let norm = 1.0 / terms.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        for _ in 0..budget {
            grad.fill(0.0);
            let mut worst: f64 = 0.0;
            for t in terms {
                let q = self.dist(t.player, t.infoset, &t.input);
                worst = worst.max(kl(&t.target, &q));
                for (a, (&qa, &pa)) in q.iter().zip(&t.target).enumerate() {
                    let g = norm * (qa - pa);
                    let r = self.row(t.player, t.infoset, a);
                    for (k, &x) in t.input.iter().enumerate() {
                        grad[r + k] += g * x;
                    }
                    grad[r + self.input] += g;
                }
            }
            if worst < tolerance {
                return;
            }
            self.adam.update(&mut self.params, &grad);
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParametricRun {
    pub output: RunOutput,
    pub model: ParametricModel,
    pub head: BrHead,
    pub estimator: Option<PayoffEstimator>,
}

struct Evaluator<'a> {
    game: &'a ExtensiveGame,
    config: &'a NeuplConfig,
    estimator: Option<PayoffEstimator>,
}

impl Evaluator<'_> {
    /// Payoff tensor over every extracted strategy: exact or simulated
    /// evaluation, or the estimator retrained on fresh episodes.
    fn tensor(&mut self, model: &ParametricModel, sets: &PolicySets, rng: &mut ChaCha8Rng) -> Result<PayoffTensor> {
        let run = &self.config.run;
        let Some(est) = self.estimator.as_mut() else {
            return evaluate_payoff_tensor(self.game, sets, run.eval_mode(), run.tensor_cap);
        };
        let shape = sets.shape();
        let n = self.game.num_players();
        let mut sums = vec![(0usize, vec![0.0; n]); shape.len()];
        for _ in 0..self.config.episodes_per_iteration {
            let flat = rng.random_range(0..shape.len());
            let index = shape.unravel(flat);
            let profile: Vec<&TabularPolicy> = index.iter().enumerate().map(|(p, &i)| sets.policy(p, i)).collect();
            let (_, returns) = sample_trajectory(self.game, &profile, rng);
            sums[flat].0 += 1;
            for (s, r) in sums[flat].1.iter_mut().zip(returns) {
                *s += r;
            }
        }
        let samples: Vec<PayoffSample> = sums
            .into_iter()
            .enumerate()
            .filter(|(_, (c, _))| *c > 0)
            .map(|(flat, (c, s))| (shape.unravel(flat), s.into_iter().map(|v| v / c as f64).collect()))
            .collect();
        let v = model.embeddings();
        est.train(&v, &samples, self.config.estimator_steps)?;
        est.estimate_tensor(&v, &shape)
    }
}

fn dirichlet<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / total).collect()
}

/// Parametric NeuPL-JPSRO. `observe(t, model)` is called after the
/// distillation step of every iteration.
pub fn run<F: FnMut(usize, &ParametricModel)>(
    game: &ExtensiveGame,
    config: &NeuplConfig,
    initial: Vec<TabularPolicy>,
    mut observe: F,
) -> Result<ParametricRun> {
    config.validate()?;
    let run = &config.run;
    let n = game.num_players();
    if initial.len() != n {
        return Err(Error::DimensionMismatch("one initial policy per player".into()));
    }
    let groups = game.player_groups();
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let mut model = ParametricModel::new(game, config.embedding_dim, config.buckets, config.learning_rate)?;
    let mut head = BrHead::for_model(&model, groups.len() * config.embedding_dim, config.learning_rate);

    let mut terms = Vec::new();
    for (p, policy) in initial.iter().enumerate() {
        if policy.player() != p {
            return Err(Error::InvalidPolicy(format!("initial policy {p} belongs to player {}", policy.player())));
        }
        model.add_strategy(p, &mut rng);
        let count = game.num_infosets(p).max(1) as f64;
        for i in 0..game.num_infosets(p) {
            terms.push(Term {
                kind: TermKind::Distill(p),
                player: p,
                infoset: i,
                strategy: 0,
                target: floored(policy.dist(i), config.target_floor),
                weight: config.distill_weight.max(1e-12) / count,
            });
        }
    }
    model.fit(&terms, config.fidelity_kl, config.step_budget, config.distill_retries);

    let mut evaluator = Evaluator {
        game,
        config,
        estimator: if config.use_estimator {
            Some(PayoffEstimator::new(&groups, config.embedding_dim, DEFAULT_HIDDEN, 0.01, run.seed)?)
        } else {
            None
        },
    };
    let mut sets = model.extract_all(game)?;
    let mut tensor = evaluator.tensor(&model, &sets, &mut rng)?;
    let mut sigma = solve_cce(&tensor, run.objective, run.solver_epsilon)?;
    let mut sigmas: Vec<JointDistribution> = Vec::new();
    let mut records = Vec::new();
    let mut visited: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];

    for t in 1..=run.max_iterations {
        let started = Instant::now();
        model.iteration = t;
        let reference_embeddings = model.embeddings();
        let reference = sets.clone();

        let mut gains = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut baselines = Vec::with_capacity(n);
        let mut mixtures = Vec::with_capacity(n);
        let mut encodings = Vec::with_capacity(n);
        let mut head_terms = Vec::new();
        for p in 0..n {
            let mixture = CoPlayerMixture::from_sigma(&reference, &sigma, p)?;
            let br = exact_maxent_best_response(game, &reference, &mixture)?;
            let exact_value = if config.use_estimator {
                sigma_value(game, &reference, &sigma, p, None)?
            } else {
                sigma_value(game, &reference, &sigma, p, Some(&tensor))?
            };
            gains.push((br.value - exact_value).max(0.0));
            values.push(exact_value);
            baselines.push(sigma_value(game, &reference, &sigma, p, Some(&tensor))?);
            let g = encode_coplayers(&reference_embeddings, &sigma, p, config.top_k, &groups)?.vector;
            push_head_terms(&mut head_terms, p, &br.policy, &br.infoset_coreach, &g, config.target_floor);
            encodings.push(g);
            mixtures.push(mixture);
        }
        for _ in 0..config.bayes_priors {
            let prior = JointDistribution::new(sigma.shape().clone(), dirichlet(sigma.shape().len(), &mut rng), 0.0)?;
            for p in 0..n {
                let mixture = CoPlayerMixture::from_sigma(&reference, &prior, p)?;
                let br = exact_maxent_best_response(game, &reference, &mixture)?;
                let g = encode_coplayers(&reference_embeddings, &prior, p, config.top_k, &groups)?.vector;
                push_head_terms(&mut head_terms, p, &br.policy, &br.infoset_coreach, &g, config.target_floor);
            }
        }
        head.train(&head_terms, config.fidelity_kl * 0.1, config.step_budget);
        let heads = (0..n)
            .map(|p| head.policy(game, p, &encodings[p]))
            .collect::<Result<Vec<_>>>()?;

        let mut distill_visits: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        let threshold = pr_br(t - 1, t, run.max_iterations);
        for _ in 0..config.episodes_per_iteration {
            let br_episode = rng.random::<f64>() < threshold;
            let (tau_sigma, br_player) = if br_episode {
                (&sigma, Some(rng.random_range(0..n)))
            } else {
                let tau = rng.random_range(0..t);
                (sigmas.get(tau).unwrap_or(&sigma), None)
            };
            let index = tau_sigma.shape().unravel(sample_index(tau_sigma.probs(), &mut rng));
            let profile: Vec<&TabularPolicy> = (0..n)
                .map(|k| if Some(k) == br_player { &heads[k] } else { reference.policy(k, index[k]) })
                .collect();
            let (path, _) = sample_trajectory(game, &profile, &mut rng);
            for step in path {
                if Some(step.player) == br_player {
                    distill_visits[step.player].insert(step.infoset);
                }
                visited[step.player].insert(step.infoset);
            }
        }

        let mut terms = Vec::new();
        for p in 0..n {
            let prior = reference.sizes()[p];
            let fresh = model.add_strategy(p, &mut rng);
            let count = distill_visits[p].len().max(1) as f64;
            for &i in &distill_visits[p] {
                terms.push(Term {
                    kind: TermKind::Distill(p),
                    player: p,
                    infoset: i,
                    strategy: fresh,
                    target: heads[p].dist(i).to_vec(),
                    weight: config.distill_weight / count,
                });
            }
            if config.regularize_weight > 0.0 && !visited[p].is_empty() {
                let weight = config.regularize_weight / (prior * visited[p].len()) as f64;
                for j in 0..prior {
                    for &i in &visited[p] {
                        terms.push(Term {
                            kind: TermKind::Regularize,
                            player: p,
                            infoset: i,
                            strategy: j,
                            target: reference.policy(p, j).dist(i).to_vec(),
                            weight,
                        });
                    }
                }
            }
        }
        let distill_kl = model.fit(&terms, config.fidelity_kl, config.step_budget, config.distill_retries);
        observe(t, &model);

        let estimated = (0..n)
            .map(|p| Ok((mixture_value(game, &reference, &mixtures[p], &heads[p])? - baselines[p]).max(0.0)))
            .collect::<Result<Vec<f64>>>()?;
        let mut record = IterationRecord::new(t - 1, gains, values, reference.sizes());
        record.mode = Some(MODE_PARAMETRIC.into());
        let estimated_max = estimated.iter().copied().fold(0.0, f64::max);
        record.estimated_deviation_gains = Some(estimated);
        record.distill_kl = Some(distill_kl);

        if config.check_termination && estimated_max < run.termination_epsilon {
            if run.record_timing {
                record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            records.push(record);
            sigmas.push(sigma.clone());
            return Ok(ParametricRun {
                output: RunOutput {
                    status: RunStatus::Converged,
                    population: reference,
                    sigma,
                    tensor,
                    sigmas,
                    records,
                },
                model,
                head,
                estimator: evaluator.estimator,
            });
        }
        sets = model.extract_all(game)?;
        tensor = evaluator.tensor(&model, &sets, &mut rng)?;
        let next = solve_cce(&tensor, run.objective, run.solver_epsilon)?;
        if run.record_timing {
            record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
        records.push(record);
        sigmas.push(std::mem::replace(&mut sigma, next));
    }
    Ok(ParametricRun {
        output: RunOutput {
            status: RunStatus::IterationCap,
            population: sets,
            sigma,
            tensor,
            sigmas,
            records,
        },
        model,
        head,
        estimator: evaluator.estimator,
    })
}

fn push_head_terms(
    terms: &mut Vec<HeadTerm>,
    player: usize,
    br: &TabularPolicy,
    coreach: &[f64],
    g: &[f64],
    floor: f64,
) {
    for (i, &c) in coreach.iter().enumerate() {
        if c > 0.0 {
            terms.push(HeadTerm {
                player,
                infoset: i,
                input: g.to_vec(),
                target: floored(br.dist(i), floor),
            });
        }
    }
}

/// Largest per-infoset `KL(now || then)` over `infosets`.
pub fn policy_drift(now: &TabularPolicy, then: &TabularPolicy, infosets: &[usize]) -> Result<f64> {
    infosets.iter().try_fold(0.0, |acc: f64, &i| {
        let d = distribution_kl(now.dist(i), then.dist(i))
            .map_err(|_| Error::InvalidPolicy(format!("support mismatch at infoset {i}")))?;
        Ok(acc.max(d))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{rock_paper_scissors, KuhnPoker};

    #[test]
    fn kl_gradient_matches_finite_differences() {
        let g = KuhnPoker::game(2).unwrap();
        let mut model = ParametricModel::new(&g, 3, Some(2), 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for v in model.params.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        model.add_strategy(0, &mut rng);
        model.add_strategy(0, &mut rng);
        let terms = vec![
            Term { kind: TermKind::Distill(0), player: 0, infoset: 1, strategy: 1, target: vec![0.9, 0.1], weight: 1.0 },
            Term { kind: TermKind::Regularize, player: 0, infoset: 3, strategy: 0, target: vec![0.3, 0.7], weight: 0.5 },
        ];
        let mut grad = vec![0.0; model.params.len()];
        model.loss_and_grad(&terms, &mut grad);
        let loss = |m: &ParametricModel| {
            terms
                .iter()
                .map(|t| {
                    let e = m.embedding_offsets[t.player][t.strategy];
                    let p = softmax(&m.logits(t.player, t.infoset, e));
                    t.weight * (kl(&p, &t.target) + kl(&t.target, &p))
                })
                .sum::<f64>()
        };
        for k in 0..model.params.len() {
            let mut up = model.clone();
            up.params[k] += 1e-6;
            let mut down = model.clone();
            down.params[k] -= 1e-6;
            let fd = (loss(&up) - loss(&down)) / 2e-6;
            assert!((fd - grad[k]).abs() < 1e-6, "param {k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn distills_a_table_to_fidelity() {
        let g = rock_paper_scissors().unwrap();
        let mut model = ParametricModel::new(&g, 4, None, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        model.add_strategy(0, &mut rng);
        let target = floored(&[0.0, 1.0, 0.0], 1e-4);
        let terms = vec![Term { kind: TermKind::Distill(0), player: 0, infoset: 0, strategy: 0, target, weight: 1.0 }];
        let worst = model.fit(&terms, 1e-3, 3000, 0);
        assert!(worst[0] < 1e-3);
        assert!(model.dist(0, 0, 0).unwrap()[1] > 0.99);
        assert!(model.dist(0, 0, 1).is_err());
    }
}
