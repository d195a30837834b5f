//! Tabular behaviour policies.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::ExtensiveGame;

const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Action distributions for every infoset of one player, indexed like
/// [`ExtensiveGame::infosets`].
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TabularPolicy {
    player: usize,
    probs: Vec<Vec<f64>>,
}

impl TabularPolicy {
    /// Build a policy from per-infoset distributions, checking coverage and
    /// normalisation against `game`.
    pub fn new(game: &ExtensiveGame, player: usize, probs: Vec<Vec<f64>>) -> Result<Self> {
        game.check_player(player)?;
        let infosets = game.infosets(player);
        if probs.len() != infosets.len() {
            return Err(Error::InvalidPolicy(format!(
                "policy covers {} infosets, player {player} has {}",
                probs.len(),
                infosets.len()
            )));
        }
        for (dist, info) in probs.iter().zip(infosets) {
            if dist.len() != info.num_actions() {
                return Err(Error::InvalidPolicy(format!(
                    "infoset `{}` expects {} actions, got {}",
                    info.id,
                    info.num_actions(),
                    dist.len()
                )));
            }
            if dist.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidPolicy(format!("negative probability at `{}`", info.id)));
            }
            let total: f64 = dist.iter().sum();
            if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
                return Err(Error::InvalidPolicy(format!(
                    "distribution at `{}` sums to {total}",
                    info.id
                )));
            }
        }
        Ok(TabularPolicy { player, probs })
    }

    /// Uniform over legal actions at every infoset.
    pub fn uniform(game: &ExtensiveGame, player: usize) -> Result<Self> {
        game.check_player(player)?;
        let probs = game
            .infosets(player)
            .iter()
            .map(|i| vec![1.0 / i.num_actions() as f64; i.num_actions()])
            .collect();
        Ok(TabularPolicy { player, probs })
    }

    /// A pure policy picking `actions[i]` at infoset `i`.
    pub fn deterministic(game: &ExtensiveGame, player: usize, actions: &[usize]) -> Result<Self> {
        game.check_player(player)?;
        let infosets = game.infosets(player);
        if actions.len() != infosets.len() {
            return Err(Error::InvalidPolicy(format!(
                "need {} actions, got {}",
                infosets.len(),
                actions.len()
            )));
        }
        let mut probs = Vec::with_capacity(infosets.len());
        for (info, &a) in infosets.iter().zip(actions) {
            if a >= info.num_actions() {
                return Err(Error::InvalidPolicy(format!("action {a} illegal at `{}`", info.id)));
            }
            let mut dist = vec![0.0; info.num_actions()];
            dist[a] = 1.0;
            probs.push(dist);
        }
        Ok(TabularPolicy { player, probs })
    }

    /// A pure policy with an independently drawn action at each infoset.
    pub fn random_deterministic<R: Rng + ?Sized>(
        game: &ExtensiveGame,
        player: usize,
        rng: &mut R,
    ) -> Result<Self> {
        game.check_player(player)?;
        let actions: Vec<usize> = game
            .infosets(player)
            .iter()
            .map(|i| rng.random_range(0..i.num_actions()))
            .collect();
        Self::deterministic(game, player, &actions)
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn num_infosets(&self) -> usize {
        self.probs.len()
    }

    pub fn dist(&self, infoset: usize) -> &[f64] {
        &self.probs[infoset]
    }

    pub fn prob(&self, infoset: usize, action: usize) -> f64 {
        self.probs[infoset][action]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Deterministic text format: a header line, then one line per infoset
    /// holding the id, a tab, and probabilities with 17 significant digits.
    pub fn to_text(&self, game: &ExtensiveGame) -> String {
        let mut out = format!("policy player={} infosets={}\n", self.player, self.probs.len());
        for (info, dist) in game.infosets(self.player).iter().zip(&self.probs) {
            out.push_str(&info.id);
            out.push('\t');
            for (i, p) in dist.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "{p:.16e}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(game: &ExtensiveGame, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty policy text".into()))?;
        let player = parse_header(header)?;
        game.check_player(player)?;
        let mut probs = vec![None; game.num_infosets(player)];
        for line in lines.filter(|l| !l.is_empty()) {
            let (id, values) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("bad policy line `{line}`")))?;
            let index = game
                .infoset_index(player, id)
                .ok_or_else(|| Error::Parse(format!("unknown infoset `{id}`")))?;
            let dist = values
                .split(' ')
                .map(|v| v.parse::<f64>().map_err(|e| Error::Parse(format!("`{v}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            probs[index] = Some(dist);
        }
        let probs = probs
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                d.ok_or_else(|| {
                    Error::Parse(format!("missing infoset `{}`", game.infoset(player, i).id))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(game, player, probs)
    }
}

fn parse_header(header: &str) -> Result<usize> {
    let bad = || Error::Parse(format!("bad policy header `{header}`"));
    let rest = header.strip_prefix("policy player=").ok_or_else(bad)?;
    let (player, _) = rest.split_once(' ').ok_or_else(bad)?;
    player.parse().map_err(|_| bad())
}

/// Weighted sum over infosets of KL(p(.|s) || q(.|s)). `weights` is indexed
/// by infoset; a weight of zero skips the infoset.
pub fn kl_divergence(
    game: &ExtensiveGame,
    p: &TabularPolicy,
    q: &TabularPolicy,
    weights: &[f64],
) -> Result<f64> {
    if p.player != q.player {
        return Err(Error::InvalidPolicy("KL between policies of different players".into()));
    }
    if p.probs.len() != q.probs.len() || weights.len() != p.probs.len() {
        return Err(Error::DimensionMismatch("KL inputs cover different infosets".into()));
    }
    let mut total = 0.0;
    for (s, ((pd, qd), &w)) in p.probs.iter().zip(&q.probs).zip(weights).enumerate() {
        if w < 0.0 {
            return Err(Error::InvalidPolicy("negative KL weight".into()));
        }
        if w == 0.0 {
            continue;
        }
        let kl = distribution_kl(pd, qd).map_err(|action| Error::SupportMismatch {
            infoset: game.infoset(p.player, s).id.clone(),
            action,
        })?;
        total += w * kl;
    }
    Ok(total)
}

/// KL(p || q) for two distributions; `Err(a)` names an action where p > 0
/// and q == 0.
pub fn distribution_kl(p: &[f64], q: &[f64]) -> std::result::Result<f64, usize> {
    let mut kl = 0.0;
    for (a, (&pa, &qa)) in p.iter().zip(q).enumerate() {
        if pa > 0.0 {
            if qa <= 0.0 {
                return Err(a);
            }
            kl += pa * (pa / qa).ln();
        }
    }
    Ok(kl.max(0.0))
}

/// Upper bound 2^k - 1 on distinct stochastic policies a unique stochastic
/// policy mapping can produce from k deterministic policies.
pub fn deterministic_policy_count_bound(num_det: u32) -> Result<u64> {
    match num_det {
        0 => Err(Error::InvalidPolicy("need at least one deterministic policy".into())),
        1..=63 => Ok((1u64 << num_det) - 1),
        64 => Ok(u64::MAX),
        _ => Err(Error::Overflow(format!("2^{num_det} - 1 does not fit in 64 bits"))),
    }
}
