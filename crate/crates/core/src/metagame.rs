//! Restricted normal-form metagame: per-player policy sets and the payoff
//! tensor over their joint assignments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{ExtensiveGame, Node, NodeId, PathStep};
use crate::policy::TabularPolicy;

pub const DEFAULT_TENSOR_CAP: usize = 1_000_000;

/// Row-major multi-index arithmetic over a tensor shape.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Shape(pub Vec<usize>);

impl Shape {
    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.0.len());
        index
            .iter()
            .zip(&self.0)
            .fold(0, |flat, (&i, &d)| flat * d + i)
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.0.len()];
        for (slot, &d) in index.iter_mut().zip(&self.0).rev() {
            *slot = flat % d;
            flat /= d;
        }
        index
    }

    /// Shape with dimension `p` removed.
    pub fn without(&self, p: usize) -> Shape {
        let mut dims = self.0.clone();
        dims.remove(p);
        Shape(dims)
    }
}

/// Per-player restricted policy sets, with each policy's own-reach
/// probability at every terminal cached on insertion.
#[derive(Clone, Debug)]
pub struct PolicySets {
    policies: Vec<Vec<TabularPolicy>>,
    reach: Vec<Vec<Vec<f64>>>,
}

/// Product of `policy`'s action probabilities along the path to each terminal.
pub fn terminal_reach(game: &ExtensiveGame, policy: &TabularPolicy) -> Vec<f64> {
    let p = policy.player();
    game.terminals()
        .iter()
        .map(|t| {
            t.path
                .iter()
                .filter(|s| s.player == p)
                .fold(1.0, |acc, s| acc * policy.prob(s.infoset, s.action))
        })
        .collect()
}

impl PolicySets {
    pub fn new(game: &ExtensiveGame, lists: Vec<Vec<TabularPolicy>>) -> Result<Self> {
        if lists.len() != game.num_players() {
            return Err(Error::DimensionMismatch(format!(
                "{} policy lists for {} players",
                lists.len(),
                game.num_players()
            )));
        }
        let mut sets = PolicySets {
            policies: vec![Vec::new(); lists.len()],
            reach: vec![Vec::new(); lists.len()],
        };
        for list in lists {
            if list.is_empty() {
                return Err(Error::DimensionMismatch("empty policy list".into()));
            }
            for policy in list {
                sets.push(game, policy)?;
            }
        }
        Ok(sets)
    }

    /// One starting policy per player.
    pub fn singletons(game: &ExtensiveGame, initial: Vec<TabularPolicy>) -> Result<Self> {
        Self::new(game, initial.into_iter().map(|p| vec![p]).collect())
    }

    pub fn push(&mut self, game: &ExtensiveGame, policy: TabularPolicy) -> Result<usize> {
        let p = policy.player();
        game.check_player(p)?;
        if policy.num_infosets() != game.num_infosets(p) {
            return Err(Error::InvalidPolicy("policy does not match the game".into()));
        }
        self.reach[p].push(terminal_reach(game, &policy));
        self.policies[p].push(policy);
        Ok(self.policies[p].len() - 1)
    }

    pub fn num_players(&self) -> usize {
        self.policies.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.policies.iter().map(Vec::len).collect()
    }

    pub fn shape(&self) -> Shape {
        Shape(self.sizes())
    }

    pub fn policy(&self, player: usize, index: usize) -> &TabularPolicy {
        &self.policies[player][index]
    }

    pub fn policies(&self, player: usize) -> &[TabularPolicy] {
        &self.policies[player]
    }

    pub fn own_reach(&self, player: usize, index: usize) -> &[f64] {
        &self.reach[player][index]
    }

    pub fn check_index(&self, player: usize, index: usize) -> Result<()> {
        if player < self.policies.len() && index < self.policies[player].len() {
            Ok(())
        } else {
            Err(Error::UnknownStrategy { player, index })
        }
    }

    /// The first `sizes[p]` policies of each player.
    pub fn prefix(&self, sizes: &[usize]) -> Result<Self> {
        if sizes.len() != self.policies.len()
            || sizes.iter().zip(&self.policies).any(|(&s, l)| s == 0 || s > l.len())
        {
            return Err(Error::DimensionMismatch(format!(
                "cannot take prefix {sizes:?} of sets sized {:?}",
                self.sizes()
            )));
        }
        Ok(PolicySets {
            policies: self
                .policies
                .iter()
                .zip(sizes)
                .map(|(l, &s)| l[..s].to_vec())
                .collect(),
            reach: self
                .reach
                .iter()
                .zip(sizes)
                .map(|(l, &s)| l[..s].to_vec())
                .collect(),
        })
    }

    /// Expected payoff vector of the joint assignment `index`, from the
    /// cached terminal reaches.
    pub fn joint_payoff(&self, game: &ExtensiveGame, index: &[usize]) -> Vec<f64> {
        let n = game.num_players();
        let mut out = vec![0.0; n];
        for (z, t) in game.terminals().iter().enumerate() {
            let mut w = t.chance_prob;
            for (p, &i) in index.iter().enumerate() {
                w *= self.reach[p][i][z];
            }
            if w != 0.0 {
                for (o, u) in out.iter_mut().zip(&t.payoffs) {
                    *o += w * u;
                }
            }
        }
        out
    }
}

/// Exact expected payoffs of a joint policy by a single tree pass.
pub fn exact_expected_payoff(game: &ExtensiveGame, profile: &[&TabularPolicy]) -> Result<Vec<f64>> {
    if profile.len() != game.num_players() {
        return Err(Error::DimensionMismatch(format!(
            "profile has {} policies for {} players",
            profile.len(),
            game.num_players()
        )));
    }
    for (p, policy) in profile.iter().enumerate() {
        if policy.player() != p || policy.num_infosets() != game.num_infosets(p) {
            return Err(Error::InvalidPolicy(format!("policy in slot {p} does not fit the game")));
        }
    }
    let mut out = vec![0.0; game.num_players()];
    accumulate(game, profile, game.root(), 1.0, &mut out);
    Ok(out)
}

fn accumulate(game: &ExtensiveGame, profile: &[&TabularPolicy], node: NodeId, reach: f64, out: &mut [f64]) {
    match game.node(node) {
        Node::Terminal { payoffs } => {
            for (o, u) in out.iter_mut().zip(payoffs) {
                *o += reach * u;
            }
        }
        Node::Chance { outcomes } => {
            for &(child, p) in outcomes {
                if p > 0.0 {
                    accumulate(game, profile, child, reach * p, out);
                }
            }
        }
        Node::Decision {
            player,
            infoset,
            children,
        } => {
            let dist = profile[*player].dist(*infoset);
            for (&child, &p) in children.iter().zip(dist) {
                if p > 0.0 {
                    accumulate(game, profile, child, reach * p, out);
                }
            }
        }
    }
}

/// Sample one playthrough, returning the realised payoffs.
pub fn sample_episode<R: Rng + ?Sized>(
    game: &ExtensiveGame,
    profile: &[&TabularPolicy],
    rng: &mut R,
) -> Vec<f64> {
    sample_trajectory(game, profile, rng).1
}

/// Sample one playthrough, returning the decisions taken along it and the
/// realised payoffs.
pub fn sample_trajectory<R: Rng + ?Sized>(
    game: &ExtensiveGame,
    profile: &[&TabularPolicy],
    rng: &mut R,
) -> (Vec<PathStep>, Vec<f64>) {
    let mut node = game.root();
    let mut path = Vec::new();
    loop {
        match game.node(node) {
            Node::Terminal { payoffs } => return (path, payoffs.clone()),
            Node::Chance { outcomes } => {
                let probs: Vec<f64> = outcomes.iter().map(|&(_, p)| p).collect();
                node = outcomes[sample_index(&probs, rng)].0;
            }
            Node::Decision {
                player,
                infoset,
                children,
            } => {
                let action = sample_index(profile[*player].dist(*infoset), rng);
                path.push(PathStep {
                    player: *player,
                    infoset: *infoset,
                    action,
                });
                node = children[action];
            }
        }
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Exact,
    Simulated { episodes: usize },
    Estimated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    Simulated { episodes: usize, seed: u64 },
}

/// Per-player expected payoffs over every joint assignment of the restricted
/// game, stored row-major with the player index fastest.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PayoffTensor {
    version: u32,
    num_players: usize,
    shape: Shape,
    provenance: Provenance,
    values: Vec<f64>,
}

const TENSOR_VERSION: u32 = 1;

impl PayoffTensor {
    /// Wrap precomputed values (row-major joint index, then player).
    pub fn from_values(shape: Shape, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        let n = shape.dims().len();
        if n == 0 || shape.dims().contains(&0) || values.len() != shape.len() * n {
            return Err(Error::DimensionMismatch(format!(
                "{} values for shape {:?}",
                values.len(),
                shape.dims()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite payoff".into()));
        }
        Ok(PayoffTensor {
            version: TENSOR_VERSION,
            num_players: n,
            shape,
            provenance,
            values,
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn num_entries(&self) -> usize {
        self.shape.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn payoffs(&self, flat: usize) -> &[f64] {
        &self.values[flat * self.num_players..(flat + 1) * self.num_players]
    }

    pub fn payoff(&self, flat: usize, player: usize) -> f64 {
        self.values[flat * self.num_players + player]
    }

    pub fn get(&self, index: &[usize]) -> &[f64] {
        self.payoffs(self.shape.ravel(index))
    }

    /// E_{a~probs}[G_p(a)] for every player.
    pub fn expected_values(&self, probs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_players];
        for (flat, &pr) in probs.iter().enumerate() {
            if pr != 0.0 {
                for (o, g) in out.iter_mut().zip(self.payoffs(flat)) {
                    *o += pr * g;
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: PayoffTensor = serde_json::from_str(text)?;
        if t.version != TENSOR_VERSION {
            return Err(Error::Parse(format!("unsupported tensor version {}", t.version)));
        }
        Self::from_values(t.shape, t.values, t.provenance)
    }
}

fn check_cap(shape: &Shape, cap: usize) -> Result<()> {
    let count = shape
        .dims()
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if count > cap {
        return Err(Error::TensorCap { count, cap });
    }
    Ok(())
}

fn evaluate_entry(game: &ExtensiveGame, sets: &PolicySets, mode: EvalMode, shape: &Shape, flat: usize) -> Vec<f64> {
    let index = shape.unravel(flat);
    match mode {
        EvalMode::Exact => sets.joint_payoff(game, &index),
        EvalMode::Simulated { episodes, seed } => {
            let profile: Vec<&TabularPolicy> = index
                .iter()
                .enumerate()
                .map(|(p, &i)| sets.policy(p, i))
                .collect();
            // seeded per joint entry so results do not depend on scheduling
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (flat as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut sum = vec![0.0; game.num_players()];
            for _ in 0..episodes {
                for (s, r) in sum.iter_mut().zip(sample_episode(game, &profile, &mut rng)) {
                    *s += r;
                }
            }
            sum.iter().map(|s| s / episodes.max(1) as f64).collect()
        }
    }
}

fn provenance_of(mode: EvalMode) -> Provenance {
    match mode {
        EvalMode::Exact => Provenance::Exact,
        EvalMode::Simulated { episodes, .. } => Provenance::Simulated { episodes },
    }
}

/// Evaluate the full tensor over all joint assignments of `sets`.
pub fn evaluate_payoff_tensor(
    game: &ExtensiveGame,
    sets: &PolicySets,
    mode: EvalMode,
    cap: usize,
) -> Result<PayoffTensor> {
    let shape = sets.shape();
    check_cap(&shape, cap)?;
    let values: Vec<f64> = (0..shape.len())
        .into_par_iter()
        .map(|flat| evaluate_entry(game, sets, mode, &shape, flat))
        .collect::<Vec<_>>()
        .concat();
    PayoffTensor::from_values(shape, values, provenance_of(mode))
}

impl PayoffTensor {
    /// Grow the tensor to the current shape of `sets`, evaluating only the
    /// joint entries not already present. Returns the number of new entries.
    pub fn extend(&mut self, game: &ExtensiveGame, sets: &PolicySets, mode: EvalMode, cap: usize) -> Result<usize> {
        if provenance_of(mode) != self.provenance {
            return Err(Error::DimensionMismatch("cannot extend a tensor with a different evaluation mode".into()));
        }
        let new_shape = sets.shape();
        check_cap(&new_shape, cap)?;
        if new_shape.dims().len() != self.num_players
            || new_shape.dims().iter().zip(self.shape.dims()).any(|(n, o)| n < o)
        {
            return Err(Error::DimensionMismatch("tensor can only grow".into()));
        }
        let old = self.shape.clone();
        let n = self.num_players;
        let entries: Vec<(Vec<f64>, bool)> = (0..new_shape.len())
            .into_par_iter()
            .map(|flat| {
                let index = new_shape.unravel(flat);
                if index.iter().zip(old.dims()).all(|(i, d)| i < d) {
                    (self.payoffs(old.ravel(&index)).to_vec(), false)
                } else {
                    (evaluate_entry(game, sets, mode, &new_shape, flat), true)
                }
            })
            .collect();
        let fresh = entries.iter().filter(|(_, f)| *f).count();
        let mut values = Vec::with_capacity(new_shape.len() * n);
        for (v, _) in entries {
            values.extend(v);
        }
        self.values = values;
        self.shape = new_shape;
        Ok(fresh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{rock_paper_scissors, KuhnPoker};

    fn pure_rps_sets(game: &ExtensiveGame) -> PolicySets {
        let lists = (0..2)
            .map(|p| {
                (0..3)
                    .map(|a| TabularPolicy::deterministic(game, p, &[a]).unwrap())
                    .collect()
            })
            .collect();
        PolicySets::new(game, lists).unwrap()
    }

    #[test]
    fn shape_round_trip() {
        let s = Shape(vec![2, 3, 4]);
        assert_eq!(s.len(), 24);
        for flat in 0..24 {
            assert_eq!(s.ravel(&s.unravel(flat)), flat);
        }
        assert_eq!(s.unravel(23), vec![1, 2, 3]);
    }

    #[test]
    fn rps_exact_payoffs() {
        let g = rock_paper_scissors().unwrap();
        let rock = TabularPolicy::deterministic(&g, 0, &[0]).unwrap();
        let paper = TabularPolicy::deterministic(&g, 1, &[1]).unwrap();
        assert_eq!(exact_expected_payoff(&g, &[&rock, &paper]).unwrap(), vec![-1.0, 1.0]);
        let u0 = TabularPolicy::uniform(&g, 0).unwrap();
        let u1 = TabularPolicy::uniform(&g, 1).unwrap();
        let v = exact_expected_payoff(&g, &[&u0, &u1]).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn rps_tensor_is_antisymmetric() {
        let g = rock_paper_scissors().unwrap();
        let t = evaluate_payoff_tensor(&g, &pure_rps_sets(&g), EvalMode::Exact, DEFAULT_TENSOR_CAP).unwrap();
        assert_eq!(t.num_entries(), 9);
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (3 + i - j) % 3 {
                    0 => 0.0,
                    1 => 1.0,
                    _ => -1.0,
                };
                assert_eq!(t.get(&[i, j]), &[expected, -expected]);
                assert_eq!(t.get(&[i, j])[0], -t.get(&[j, i])[0]);
            }
        }
    }

    #[test]
    fn incremental_extension_matches_scratch() {
        let g = KuhnPoker::game(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lists: Vec<Vec<TabularPolicy>> = (0..2)
            .map(|p| (0..3).map(|_| TabularPolicy::random_deterministic(&g, p, &mut rng).unwrap()).collect())
            .collect();
        let small = PolicySets::new(&g, lists.iter().map(|l| l[..2].to_vec()).collect()).unwrap();
        let mut t = evaluate_payoff_tensor(&g, &small, EvalMode::Exact, DEFAULT_TENSOR_CAP).unwrap();
        let full = PolicySets::new(&g, lists).unwrap();
        let fresh = t.extend(&g, &full, EvalMode::Exact, DEFAULT_TENSOR_CAP).unwrap();
        assert_eq!(fresh, 5);
        let scratch = evaluate_payoff_tensor(&g, &full, EvalMode::Exact, DEFAULT_TENSOR_CAP).unwrap();
        assert_eq!(t, scratch);
    }

    #[test]
    fn shape_arithmetic_three_players() {
        let g = KuhnPoker::game(3).unwrap();
        let lists = [2, 3, 4]
            .iter()
            .enumerate()
            .map(|(p, &k)| vec![TabularPolicy::uniform(&g, p).unwrap(); k])
            .collect();
        let sets = PolicySets::new(&g, lists).unwrap();
        let t = evaluate_payoff_tensor(&g, &sets, EvalMode::Exact, DEFAULT_TENSOR_CAP).unwrap();
        assert_eq!(t.num_entries(), 24);
        assert_eq!(t.payoffs(23).len(), 3);
        let err = evaluate_payoff_tensor(&g, &sets, EvalMode::Exact, 10).unwrap_err();
        assert!(matches!(err, Error::TensorCap { count: 24, cap: 10 }));
    }

    #[test]
    fn simulated_mode_is_seeded() {
        let g = KuhnPoker::game(2).unwrap();
        let sets = PolicySets::singletons(
            &g,
            vec![TabularPolicy::uniform(&g, 0).unwrap(), TabularPolicy::uniform(&g, 1).unwrap()],
        )
        .unwrap();
        let mode = EvalMode::Simulated { episodes: 2000, seed: 7 };
        let a = evaluate_payoff_tensor(&g, &sets, mode, DEFAULT_TENSOR_CAP).unwrap();
        let b = evaluate_payoff_tensor(&g, &sets, mode, DEFAULT_TENSOR_CAP).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.provenance(), Provenance::Simulated { episodes: 2000 });
    }

    #[test]
    fn tensor_json_round_trip() {
        let g = KuhnPoker::game(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lists = (0..2)
            .map(|p| (0..2).map(|_| TabularPolicy::random_deterministic(&g, p, &mut rng).unwrap()).collect())
            .collect();
        let sets = PolicySets::new(&g, lists).unwrap();
        let t = evaluate_payoff_tensor(&g, &sets, EvalMode::Exact, DEFAULT_TENSOR_CAP).unwrap();
        let back = PayoffTensor::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
