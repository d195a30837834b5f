//! Payoff estimator `psi_w`: joint strategy embeddings to per-player payoffs.
//!
//! Player `p`'s payoff is read from a one-hidden-layer network applied to
//! `[nu_p; pooled co-members of each group]`. Heads are shared inside a
//! player group, so swapping symmetric players' embeddings swaps their
//! predictions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::adam::Adam;
use super::encoder::{canonical_sum, EmbeddingSets};
use crate::error::{Error, Result};
use crate::metagame::{PayoffTensor, Provenance, Shape};

pub const DEFAULT_HIDDEN: usize = 32;

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct PayoffEstimator {
    num_players: usize,
    dim: usize,
    hidden: usize,
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    params: Vec<f64>,
    adam: Adam,
    pub training_steps: u64,
    pub last_loss: Option<f64>,
}

/// One (joint assignment, realised or expected payoffs) training example.
pub type PayoffSample = (Vec<usize>, Vec<f64>);

impl PayoffEstimator {
    pub fn new(groups: &[Vec<usize>], dim: usize, hidden: usize, learning_rate: f64, seed: u64) -> Result<Self> {
        let num_players = groups.iter().map(Vec::len).sum();
        let mut group_of = vec![usize::MAX; num_players];
        for (g, members) in groups.iter().enumerate() {
            for &p in members {
                if p >= num_players || group_of[p] != usize::MAX {
                    return Err(Error::InvalidConfig("player groups must partition the players".into()));
                }
                group_of[p] = g;
            }
        }
        let input = dim * (1 + groups.len());
        let per_head = hidden * input + 2 * hidden + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (input as f64).sqrt();
        let mut params = Vec::with_capacity(per_head * groups.len());
        for _ in groups {
            for i in 0..per_head {
                let w: f64 = rng.sample(StandardNormal);
                // first-layer weights and output weights random, biases zero
                let is_w1 = i < hidden * input;
                let is_w2 = (hidden * input + hidden..hidden * input + 2 * hidden).contains(&i);
                params.push(if is_w1 {
                    w * scale
                } else if is_w2 {
                    w / (hidden as f64).sqrt()
                } else {
                    0.0
                });
            }
        }
        let len = params.len();
        Ok(PayoffEstimator {
            num_players,
            dim,
            hidden,
            groups: groups.to_vec(),
            group_of,
            params,
            adam: Adam::new(len, learning_rate),
            training_steps: 0,
            last_loss: None,
        })
    }

    fn input_len(&self) -> usize {
        self.dim * (1 + self.groups.len())
    }

    fn head_offset(&self, group: usize) -> usize {
        group * (self.hidden * self.input_len() + 2 * self.hidden + 1)
    }

    fn features(&self, embeddings: &EmbeddingSets, index: &[usize], player: usize) -> Result<Vec<f64>> {
        let mut x = embeddings.get(player, index[player])?.to_vec();
        for group in &self.groups {
            let others = group
                .iter()
                .filter(|&&q| q != player)
                .map(|&q| embeddings.get(q, index[q]))
                .collect::<Result<Vec<_>>>()?;
            let count = others.len();
            let mut pooled = canonical_sum(others, self.dim);
            if count > 0 {
                pooled.iter_mut().for_each(|v| *v /= count as f64);
            }
            x.extend(pooled);
        }
        Ok(x)
    }

    fn check(&self, embeddings: &EmbeddingSets, index: &[usize]) -> Result<()> {
        if index.len() != self.num_players || embeddings.num_players() != self.num_players {
            return Err(Error::DimensionMismatch(format!(
                "joint index {index:?} for a {}-player estimator",
                self.num_players
            )));
        }
        if embeddings.dim() != self.dim {
            return Err(Error::DimensionMismatch("embedding dimension differs from the estimator".into()));
        }
        for (p, &i) in index.iter().enumerate() {
            embeddings.get(p, i)?;
        }
        Ok(())
    }

    /// Returns the hidden activations and the output.
    fn forward(&self, group: usize, x: &[f64]) -> (Vec<f64>, f64) {
        let input = x.len();
        let o = self.head_offset(group);
        let w1 = &self.params[o..o + self.hidden * input];
        let b1 = &self.params[o + self.hidden * input..o + self.hidden * input + self.hidden];
        let w2 = &self.params[o + self.hidden * input + self.hidden..o + self.hidden * input + 2 * self.hidden];
        let b2 = self.params[o + self.hidden * input + 2 * self.hidden];
        let h: Vec<f64> = (0..self.hidden)
            .map(|j| {
                let row = &w1[j * input..(j + 1) * input];
                (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[j]).tanh()
            })
            .collect();
        let y = h.iter().zip(w2).map(|(a, b)| a * b).sum::<f64>() + b2;
        (h, y)
    }

    pub fn predict(&self, embeddings: &EmbeddingSets, index: &[usize]) -> Result<Vec<f64>> {
        self.check(embeddings, index)?;
        (0..self.num_players)
            .map(|p| {
                let x = self.features(embeddings, index, p)?;
                Ok(self.forward(self.group_of[p], &x).1)
            })
            .collect()
    }

    /// Full-batch mean squared error over the samples.
    pub fn loss(&self, embeddings: &EmbeddingSets, samples: &[PayoffSample]) -> Result<f64> {
        let mut total = 0.0;
        for (index, target) in samples {
            let pred = self.predict(embeddings, index)?;
            total += pred.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        Ok(total / (samples.len().max(1) * self.num_players) as f64)
    }

    /// Full-batch Adam steps on the mean squared error. Returns the loss
    /// before the last step.
    pub fn train(&mut self, embeddings: &EmbeddingSets, samples: &[PayoffSample], steps: usize) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::InvalidConfig("no payoff samples to train on".into()));
        }
        let mut inputs = Vec::with_capacity(samples.len() * self.num_players);
        for (index, target) in samples {
            self.check(embeddings, index)?;
            if target.len() != self.num_players || target.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("payoff target must be a finite vector per player".into()));
            }
            for (p, &t) in target.iter().enumerate() {
                inputs.push((self.group_of[p], self.features(embeddings, index, p)?, t));
            }
        }
        let input = self.input_len();
        let norm = 1.0 / inputs.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.params.len()];
        for _ in 0..steps {
            grad.fill(0.0);
            loss = 0.0;
            for (group, x, t) in &inputs {
                let (h, y) = self.forward(*group, x);
                let err = y - t;
                loss += err * err * norm;
                let dy = 2.0 * err * norm;
                let o = self.head_offset(*group);
                let w2o = o + self.hidden * input + self.hidden;
                grad[o + self.hidden * input + 2 * self.hidden] += dy;
                for j in 0..self.hidden {
                    grad[w2o + j] += dy * h[j];
                    let dh = dy * self.params[w2o + j] * (1.0 - h[j] * h[j]);
                    grad[o + self.hidden * input + j] += dh;
                    let row = o + j * input;
                    for (k, &xv) in x.iter().enumerate() {
                        grad[row + k] += dh * xv;
                    }
                }
            }
            self.adam.update(&mut self.params, &grad);
            self.training_steps += 1;
        }
        self.last_loss = Some(loss);
        Ok(loss)
    }

    /// Predicted payoff tensor over every joint assignment of `shape`.
    pub fn estimate_tensor(&self, embeddings: &EmbeddingSets, shape: &Shape) -> Result<PayoffTensor> {
        let mut values = Vec::with_capacity(shape.len() * self.num_players);
        for flat in 0..shape.len() {
            values.extend(self.predict(embeddings, &shape.unravel(flat))?);
        }
        PayoffTensor::from_values(shape.clone(), values, Provenance::Estimated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn embeddings(sizes: &[usize], dim: usize, seed: u64) -> EmbeddingSets {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = EmbeddingSets::new(sizes.len(), dim);
        for (p, &s) in sizes.iter().enumerate() {
            for _ in 0..s {
                v.sample(p, &mut rng);
            }
        }
        v
    }

    #[test]
    fn swap_equivariance_in_a_group() {
        let v = embeddings(&[2, 2], 4, 5);
        let est = PayoffEstimator::new(&[vec![0, 1]], 4, 8, 0.01, 1).unwrap();
        // a shared set: player 1 uses player 0's embeddings
        let mut shared = EmbeddingSets::new(2, 4);
        for p in 0..2 {
            for j in 0..2 {
                shared.push(p, v.get(0, j).unwrap().to_vec()).unwrap();
            }
        }
        let a = est.predict(&shared, &[0, 1]).unwrap();
        let b = est.predict(&shared, &[1, 0]).unwrap();
        assert_eq!(a[0], b[1]);
        assert_eq!(a[1], b[0]);
    }

    #[test]
    fn fits_a_small_table() {
        let v = embeddings(&[2, 2], 4, 6);
        let samples: Vec<PayoffSample> = vec![
            (vec![0, 0], vec![1.0, 0.5]),
            (vec![0, 1], vec![-1.0, 0.0]),
            (vec![1, 0], vec![0.0, 2.0]),
            (vec![1, 1], vec![0.3, -0.3]),
        ];
        let mut est = PayoffEstimator::new(&[vec![0], vec![1]], 4, 16, 0.01, 2).unwrap();
        let before = est.loss(&v, &samples).unwrap();
        est.train(&v, &samples, 3000).unwrap();
        let after = est.loss(&v, &samples).unwrap();
        assert!(after < 1e-4 && after < before);
        assert!(est.predict(&v, &[2, 0]).is_err());
    }
}
