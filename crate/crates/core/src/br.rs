//! Exact maximum-entropy best responses, deviation gains and CCE gaps.

use crate::error::{Error, Result};
use crate::game::{ExtensiveGame, Node, NodeId};
use crate::metagame::{PayoffTensor, PolicySets};
use crate::policy::TabularPolicy;
use crate::solver::{CoPlayerDistribution, JointDistribution};

/// Actions whose value is within this of the best are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// A distribution over joint co-player assignments, indexing into a
/// [`PolicySets`]. Index tuples list the co-players in player order.
#[derive(Clone, Debug, PartialEq)]
pub struct CoPlayerMixture {
    focal: usize,
    entries: Vec<(Vec<usize>, f64)>,
}

impl CoPlayerMixture {
    pub fn new(sets: &PolicySets, focal: usize, entries: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let n = sets.num_players();
        if focal >= n {
            return Err(Error::PlayerOutOfRange { player: focal, num_players: n });
        }
        if entries.is_empty() {
            return Err(Error::InvalidMixture("empty mixture".into()));
        }
        let mut total = 0.0;
        for (index, w) in &entries {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidMixture(format!("weight {w} is not a probability")));
            }
            if index.len() + 1 != n {
                return Err(Error::DimensionMismatch(format!(
                    "co-player index {index:?} for {n} players"
                )));
            }
            for (q, &i) in co_players(n, focal).zip(index) {
                sets.check_index(q, i)?;
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMixture(format!("weights sum to {total}")));
        }
        Ok(CoPlayerMixture { focal, entries })
    }

    pub fn from_marginal(sets: &PolicySets, marginal: &CoPlayerDistribution) -> Result<Self> {
        Self::new(sets, marginal.focal, marginal.support())
    }

    /// The co-player marginal of `sigma` for `focal`.
    pub fn from_sigma(sets: &PolicySets, sigma: &JointDistribution, focal: usize) -> Result<Self> {
        check_shapes(sets, sigma)?;
        Self::from_marginal(sets, &sigma.marginal(focal)?)
    }

    pub fn focal(&self) -> usize {
        self.focal
    }

    pub fn entries(&self) -> &[(Vec<usize>, f64)] {
        &self.entries
    }
}

fn co_players(n: usize, focal: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&q| q != focal)
}

fn check_shapes(sets: &PolicySets, sigma: &JointDistribution) -> Result<()> {
    if sets.sizes() != sigma.shape().dims() {
        return Err(Error::DimensionMismatch(format!(
            "sigma shape {:?} vs population sizes {:?}",
            sigma.shape().dims(),
            sets.sizes()
        )));
    }
    Ok(())
}

/// Output of the best-response oracle before a baseline is known.
#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub policy: TabularPolicy,
    /// Expected payoff of `policy` against the mixture.
    pub value: f64,
    /// Co-reach weighted action values per focal infoset.
    pub q_values: Vec<Vec<f64>>,
    /// Chance times co-player reach, summed over each focal infoset's histories.
    pub infoset_coreach: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponseResult {
    pub policy: TabularPolicy,
    pub value: f64,
    pub baseline: f64,
    /// `max(value - baseline, 0)`.
    pub deviation_gain: f64,
}

impl BestResponse {
    pub fn with_baseline(self, baseline: f64) -> BestResponseResult {
        BestResponseResult {
            deviation_gain: (self.value - baseline).max(0.0),
            policy: self.policy,
            value: self.value,
            baseline,
        }
    }
}

/// Chance times co-player reach at every node, accumulated over the mixture.
fn node_coreach(game: &ExtensiveGame, sets: &PolicySets, mixture: &CoPlayerMixture) -> Vec<f64> {
    let n = game.num_players();
    let focal = mixture.focal;
    let mut coreach = vec![0.0; game.nodes().len()];
    let mut profile: Vec<Option<&TabularPolicy>> = vec![None; n];
    let mut stack: Vec<(NodeId, f64)> = Vec::new();
    for (index, w) in &mixture.entries {
        if *w == 0.0 {
            continue;
        }
        for (q, &i) in co_players(n, focal).zip(index) {
            profile[q] = Some(sets.policy(q, i));
        }
        stack.push((game.root(), *w));
        while let Some((id, r)) = stack.pop() {
            coreach[id] += r;
            match game.node(id) {
                Node::Terminal { .. } => {}
                Node::Chance { outcomes } => {
                    for &(child, p) in outcomes.iter().rev() {
                        if p > 0.0 {
                            stack.push((child, r * p));
                        }
                    }
                }
                Node::Decision { player, infoset, children } => {
                    if *player == focal {
                        for &child in children.iter().rev() {
                            stack.push((child, r));
                        }
                    } else {
                        let dist = profile[*player].expect("co-player policy").dist(*infoset);
                        for (&child, &p) in children.iter().zip(dist).rev() {
                            if p > 0.0 {
                                stack.push((child, r * p));
                            }
                        }
                    }
                }
            }
        }
    }
    coreach
}

struct Induction<'a> {
    game: &'a ExtensiveGame,
    focal: usize,
    coreach: &'a [f64],
    policy: &'a [Vec<f64>],
    cache: Vec<Option<f64>>,
}

impl Induction<'_> {
    /// Co-reach weighted focal payoff of the subtree at `id` under the
    /// current (partially decided) focal policy.
    fn value(&mut self, id: NodeId) -> f64 {
        match self.game.node(id) {
            Node::Terminal { payoffs } => self.coreach[id] * payoffs[self.focal],
            Node::Chance { outcomes } => outcomes.iter().map(|&(c, _)| self.value(c)).sum(),
            Node::Decision { player, infoset, children } => {
                if *player != self.focal {
                    return children.iter().map(|&c| self.value(c)).sum();
                }
                if let Some(v) = self.cache[id] {
                    return v;
                }
                let dist = &self.policy[*infoset];
                let v = children
                    .iter()
                    .zip(dist)
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(&c, &p)| p * self.value(c))
                    .sum();
                self.cache[id] = Some(v);
                v
            }
        }
    }
}

/// Exact best response of `mixture.focal()` by backward induction over its
/// infosets. Each infoset plays uniformly over its tied-best actions, so the
/// result is a deterministic function of the inputs; infosets the mixture
/// never reaches are uniform.
pub fn exact_maxent_best_response(
    game: &ExtensiveGame,
    sets: &PolicySets,
    mixture: &CoPlayerMixture,
) -> Result<BestResponse> {
    if sets.num_players() != game.num_players() {
        return Err(Error::DimensionMismatch("population does not match game".into()));
    }
    let focal = mixture.focal;
    let coreach = node_coreach(game, sets, mixture);
    let infosets = game.infosets(focal);
    let mut order: Vec<usize> = (0..infosets.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(infosets[i].own_depth));

    let mut table: Vec<Vec<f64>> = infosets
        .iter()
        .map(|i| vec![1.0 / i.num_actions() as f64; i.num_actions()])
        .collect();
    let mut q_values: Vec<Vec<f64>> = infosets.iter().map(|i| vec![0.0; i.num_actions()]).collect();
    let infoset_coreach: Vec<f64> = infosets
        .iter()
        .map(|i| i.nodes.iter().map(|&h| coreach[h]).sum())
        .collect();
    let mut cache = vec![None; game.nodes().len()];

    for &i in &order {
        let info = &infosets[i];
        let mut q = vec![0.0; info.num_actions()];
        {
            let mut ind = Induction { game, focal, coreach: &coreach, policy: &table, cache };
            for &h in &info.nodes {
                if let Node::Decision { children, .. } = game.node(h) {
                    for (qa, &c) in q.iter_mut().zip(children) {
                        *qa += ind.value(c);
                    }
                }
            }
            cache = ind.cache;
        }
        let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<bool> = q.iter().map(|&v| v >= best - TIE_TOLERANCE).collect();
        let count = ties.iter().filter(|&&t| t).count() as f64;
        table[i] = ties.iter().map(|&t| if t { 1.0 / count } else { 0.0 }).collect();
        q_values[i] = q;
    }

    let value = Induction { game, focal, coreach: &coreach, policy: &table, cache }.value(game.root());
    Ok(BestResponse {
        policy: TabularPolicy::new(game, focal, table)?,
        value,
        q_values,
        infoset_coreach,
    })
}

/// Expected payoff of `policy` for the mixture's focal player against the
/// mixture.
pub fn mixture_value(
    game: &ExtensiveGame,
    sets: &PolicySets,
    mixture: &CoPlayerMixture,
    policy: &TabularPolicy,
) -> Result<f64> {
    if policy.player() != mixture.focal || policy.num_infosets() != game.num_infosets(mixture.focal) {
        return Err(Error::InvalidPolicy("policy does not belong to the focal player".into()));
    }
    let coreach = node_coreach(game, sets, mixture);
    let own = crate::metagame::terminal_reach(game, policy);
    Ok(game
        .terminals()
        .iter()
        .zip(own)
        .map(|(t, r)| coreach[t.node] * r * t.payoffs[mixture.focal])
        .sum())
}

/// `E_{a ~ sigma}[G_p(a)]`, from the tensor when given, else by evaluating
/// every joint assignment in sigma's support.
pub fn sigma_value(
    game: &ExtensiveGame,
    sets: &PolicySets,
    sigma: &JointDistribution,
    player: usize,
    tensor: Option<&PayoffTensor>,
) -> Result<f64> {
    check_shapes(sets, sigma)?;
    game.check_player(player)?;
    if let Some(t) = tensor {
        if t.shape() != sigma.shape() {
            return Err(Error::DimensionMismatch("tensor and sigma shapes differ".into()));
        }
        return Ok(sigma
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(flat, &p)| p * t.payoff(flat, player))
            .sum());
    }
    Ok(sigma
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != 0.0)
        .map(|(flat, &p)| p * sets.joint_payoff(game, &sigma.shape().unravel(flat))[player])
        .sum())
}

/// Best response of `player` to sigma's co-player marginal, with its gain
/// over sigma.
pub fn best_response_to_sigma(
    game: &ExtensiveGame,
    sets: &PolicySets,
    sigma: &JointDistribution,
    player: usize,
    tensor: Option<&PayoffTensor>,
) -> Result<BestResponseResult> {
    let mixture = CoPlayerMixture::from_sigma(sets, sigma, player)?;
    let br = exact_maxent_best_response(game, sets, &mixture)?;
    let baseline = sigma_value(game, sets, sigma, player, tensor)?;
    Ok(br.with_baseline(baseline))
}

/// Largest gain `player` can get by deviating from sigma to any policy of
/// the full game, clipped at zero.
pub fn deviation_gain(
    game: &ExtensiveGame,
    sets: &PolicySets,
    sigma: &JointDistribution,
    player: usize,
    tensor: Option<&PayoffTensor>,
) -> Result<f64> {
    Ok(best_response_to_sigma(game, sets, sigma, player, tensor)?.deviation_gain)
}

/// Sum of the players' deviation gains; zero exactly at a CCE.
pub fn cce_gap(
    game: &ExtensiveGame,
    sets: &PolicySets,
    sigma: &JointDistribution,
    tensor: Option<&PayoffTensor>,
) -> Result<f64> {
    (0..game.num_players())
        .map(|p| deviation_gain(game, sets, sigma, p, tensor))
        .sum()
}
