//! Strategy embeddings and the weighted top-K co-player encoder.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::solver::JointDistribution;

pub const DEFAULT_TOP_K: usize = 96;
pub const DEFAULT_EMBEDDING_DIM: usize = 8;

/// Per-player strategy embedding sets `V_p`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EmbeddingSets {
    dim: usize,
    sets: Vec<Vec<Vec<f64>>>,
}

impl EmbeddingSets {
    pub fn new(num_players: usize, dim: usize) -> Self {
        EmbeddingSets {
            dim,
            sets: vec![Vec::new(); num_players],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_players(&self) -> usize {
        self.sets.len()
    }

    pub fn len(&self, player: usize) -> usize {
        self.sets[player].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }

    pub fn push(&mut self, player: usize, embedding: Vec<f64>) -> Result<usize> {
        if embedding.len() != self.dim || embedding.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "embedding must have {} finite entries",
                self.dim
            )));
        }
        self.sets[player].push(embedding);
        Ok(self.sets[player].len() - 1)
    }

    /// Append a standard-normal embedding for `player`.
    pub fn sample<R: Rng + ?Sized>(&mut self, player: usize, rng: &mut R) -> usize {
        let v = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
        self.sets[player].push(v);
        self.sets[player].len() - 1
    }

    pub fn get(&self, player: usize, index: usize) -> Result<&[f64]> {
        self.sets
            .get(player)
            .and_then(|s| s.get(index))
            .map(Vec::as_slice)
            .ok_or(Error::UnknownStrategy { player, index })
    }

    pub fn get_mut(&mut self, player: usize, index: usize) -> &mut [f64] {
        &mut self.sets[player][index]
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Sum of vectors in a canonical order, so the result does not depend on
/// the order the vectors are given in.
pub(crate) fn canonical_sum(mut vectors: Vec<&[f64]>, dim: usize) -> Vec<f64> {
    vectors.sort_by(|a, b| lex_cmp(a, b));
    let mut out = vec![0.0; dim];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    out
}

/// Strategy-assignment aggregator: for each player group, the
/// order-invariant sum of its members' embeddings; groups are concatenated.
/// `embeddings[p]` is `None` for the focal slot, which contributes zero.
pub fn aggregate(embeddings: &[Option<&[f64]>], groups: &[Vec<usize>], dim: usize) -> Vec<f64> {
    let zero = vec![0.0; dim];
    let mut out = Vec::with_capacity(groups.len() * dim);
    for group in groups {
        let members = group.iter().map(|&q| embeddings[q].unwrap_or(&zero)).collect();
        out.extend(canonical_sum(members, dim));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    pub vector: Vec<f64>,
    /// Probability mass of the joint actions kept by the top-K truncation.
    pub captured_mass: f64,
    pub entries_used: usize,
}

/// `g = sum over the K most probable joint actions a of sigma(a) * f(a)`
/// where `f` aggregates every player's embedding except `player`'s.
/// Ties in probability are broken by the aggregated features, so relabelling
/// symmetric players leaves the result bit-identical.
pub fn encode_coplayers(
    embeddings: &EmbeddingSets,
    sigma: &JointDistribution,
    player: usize,
    k: usize,
    groups: &[Vec<usize>],
) -> Result<Encoding> {
    if k == 0 {
        return Err(Error::InvalidConfig("top-K needs K >= 1".into()));
    }
    let n = sigma.num_players();
    if player >= n {
        return Err(Error::PlayerOutOfRange { player, num_players: n });
    }
    if embeddings.num_players() != n {
        return Err(Error::DimensionMismatch("embedding sets do not match sigma".into()));
    }
    let dim = embeddings.dim();
    let shape = sigma.shape();
    let mut entries: Vec<(f64, Vec<f64>)> = Vec::new();
    for (flat, &p) in sigma.probs().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let index = shape.unravel(flat);
        let slots = index
            .iter()
            .enumerate()
            .map(|(q, &i)| if q == player { Ok(None) } else { embeddings.get(q, i).map(Some) })
            .collect::<Result<Vec<_>>>()?;
        entries.push((p, aggregate(&slots, groups, dim)));
    }
    entries.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| lex_cmp(&a.1, &b.1)));
    entries.truncate(k);
    let width = groups.len() * dim;
    let mut vector = vec![0.0; width];
    let mut captured_mass = 0.0;
    for (p, f) in &entries {
        captured_mass += p;
        for (o, x) in vector.iter_mut().zip(f) {
            *o += p * x;
        }
    }
    Ok(Encoding {
        vector,
        captured_mass,
        entries_used: entries.len(),
    })
}
