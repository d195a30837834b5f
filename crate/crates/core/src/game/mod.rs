//! Finite extensive-form games with chance and imperfect information.
//!
//! Games are built once from a [`GameState`] description by walking every
//! history, interning information-state keys per player in depth-first
//! order. The resulting [`ExtensiveGame`] is an immutable arena of nodes.

mod avoid;
mod goofspiel;
mod kuhn;
mod matrix;
mod spec;
mod trade_comm;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use avoid::AvoidDirection;
pub use goofspiel::Goofspiel;
pub use kuhn::KuhnPoker;
pub use matrix::{common_payoff_diagonal, matrix_game, rock_paper_scissors};
pub use spec::GameSpec;
pub use trade_comm::TradeComm;

pub type NodeId = usize;

const CHANCE_TOLERANCE: f64 = 1e-12;
const PAYOFF_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffStructure {
    ZeroSum,
    GeneralSum,
    CommonPayoff,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameMetadata {
    pub name: String,
    /// Partition of the players into groups with interchangeable roles.
    /// Players not listed form singleton groups.
    pub symmetric_player_groups: Vec<Vec<usize>>,
    pub payoff_structure: PayoffStructure,
}

/// What happens at a history, as reported by a [`GameState`].
pub enum Turn<S> {
    Terminal(Vec<f64>),
    Chance(Vec<(S, f64)>),
    Decision {
        player: usize,
        infoset: String,
        actions: Vec<String>,
    },
}

/// Rules of a game, expressed as a state machine the builder can expand.
pub trait GameState: Clone {
    fn turn(&self) -> Turn<Self>;
    fn apply(&self, action: usize) -> Self;
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Decision {
        player: usize,
        infoset: usize,
        children: Vec<NodeId>,
    },
    Chance {
        outcomes: Vec<(NodeId, f64)>,
    },
    Terminal {
        payoffs: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Infoset {
    pub id: String,
    pub actions: Vec<String>,
    /// Decision nodes belonging to this infoset, in tree order.
    pub nodes: Vec<NodeId>,
    /// Number of own decisions taken before reaching this infoset.
    pub own_depth: usize,
}

impl Infoset {
    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }
}

/// One decision along the path to a terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub player: usize,
    pub infoset: usize,
    pub action: usize,
}

/// Flattened view of a terminal history.
#[derive(Clone, Debug, PartialEq)]
pub struct TerminalInfo {
    pub node: NodeId,
    pub chance_prob: f64,
    pub path: Vec<PathStep>,
    pub payoffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensiveGame {
    num_players: usize,
    nodes: Vec<Node>,
    infosets: Vec<Vec<Infoset>>,
    terminals: Vec<TerminalInfo>,
    metadata: GameMetadata,
}

impl ExtensiveGame {
    /// Expand `root` into a full game tree and validate it.
    pub fn build<S: GameState>(
        root: S,
        num_players: usize,
        metadata: GameMetadata,
    ) -> Result<Self> {
        if num_players == 0 {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        let mut builder = Builder {
            num_players,
            nodes: Vec::new(),
            infosets: vec![Vec::new(); num_players],
            keys: vec![HashMap::new(); num_players],
            own_sequences: vec![Vec::new(); num_players],
        };
        let mut own_history = vec![Vec::new(); num_players];
        builder.expand(&root, &mut own_history)?;
        let game = ExtensiveGame {
            num_players,
            terminals: Vec::new(),
            nodes: builder.nodes,
            infosets: builder.infosets,
            metadata,
        }
        .with_terminals();
        game.validate()?;
        Ok(game)
    }

    fn with_terminals(mut self) -> Self {
        let mut terminals = Vec::new();
        let mut path = Vec::new();
        collect_terminals(&self.nodes, 0, 1.0, &mut path, &mut terminals);
        self.terminals = terminals;
        self
    }

    fn validate(&self) -> Result<()> {
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Chance { outcomes } => {
                    if outcomes.is_empty() {
                        return Err(Error::InvalidGame(format!("chance node {id} has no outcomes")));
                    }
                    if outcomes.iter().any(|&(_, p)| !(p >= 0.0) || !p.is_finite()) {
                        return Err(Error::InvalidGame(format!(
                            "chance node {id} has a negative or non-finite probability"
                        )));
                    }
                    let total: f64 = outcomes.iter().map(|&(_, p)| p).sum();
                    if (total - 1.0).abs() > CHANCE_TOLERANCE {
                        return Err(Error::InvalidGame(format!(
                            "chance node {id} sums to {total}, not 1"
                        )));
                    }
                }
                Node::Terminal { payoffs } => {
                    if payoffs.len() != self.num_players {
                        return Err(Error::InvalidGame(format!(
                            "terminal {id} has {} payoffs for {} players",
                            payoffs.len(),
                            self.num_players
                        )));
                    }
                    if payoffs.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidGame(format!("terminal {id} has a non-finite payoff")));
                    }
                    match self.metadata.payoff_structure {
                        PayoffStructure::ZeroSum => {
                            let sum: f64 = payoffs.iter().sum();
                            if sum.abs() > PAYOFF_TOLERANCE {
                                return Err(Error::InvalidGame(format!(
                                    "terminal {id} of a zero-sum game sums to {sum}"
                                )));
                            }
                        }
                        PayoffStructure::CommonPayoff => {
                            if payoffs.iter().any(|&v| v != payoffs[0]) {
                                return Err(Error::InvalidGame(format!(
                                    "terminal {id} of a common-payoff game has unequal entries"
                                )));
                            }
                        }
                        PayoffStructure::GeneralSum => {}
                    }
                }
                Node::Decision { .. } => {}
            }
        }
        let mut seen = vec![false; self.num_players];
        for group in &self.metadata.symmetric_player_groups {
            for &p in group {
                if p >= self.num_players || seen[p] {
                    return Err(Error::InvalidGame(format!("bad symmetric player group {group:?}")));
                }
                seen[p] = true;
            }
        }
        Ok(())
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn name(&self) -> &str {
        &self.metadata.name
    }

    pub fn metadata(&self) -> &GameMetadata {
        &self.metadata
    }

    pub fn payoff_structure(&self) -> PayoffStructure {
        self.metadata.payoff_structure
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn terminals(&self) -> &[TerminalInfo] {
        &self.terminals
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player < self.num_players {
            Ok(())
        } else {
            Err(Error::PlayerOutOfRange {
                player,
                num_players: self.num_players,
            })
        }
    }

    /// Infosets of `player`, indexed by the per-player infoset index used in
    /// policies.
    pub fn infosets(&self, player: usize) -> &[Infoset] {
        &self.infosets[player]
    }

    pub fn infoset(&self, player: usize, index: usize) -> &Infoset {
        &self.infosets[player][index]
    }

    pub fn num_infosets(&self, player: usize) -> usize {
        self.infosets[player].len()
    }

    /// Infoset ids where `player` acts, in a stable depth-first order.
    pub fn enumerate_infosets(&self, player: usize) -> Result<Vec<String>> {
        self.check_player(player)?;
        Ok(self.infosets[player].iter().map(|i| i.id.clone()).collect())
    }

    pub fn infoset_index(&self, player: usize, id: &str) -> Option<usize> {
        self.infosets[player].iter().position(|i| i.id == id)
    }

    /// Groups of interchangeable players, completed with singletons so every
    /// player appears exactly once. Groups are ordered by their smallest
    /// member.
    pub fn player_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = self
            .metadata
            .symmetric_player_groups
            .iter()
            .filter(|g| !g.is_empty())
            .map(|g| {
                let mut g = g.clone();
                g.sort_unstable();
                g
            })
            .collect();
        for p in 0..self.num_players {
            if !groups.iter().any(|g| g.contains(&p)) {
                groups.push(vec![p]);
            }
        }
        groups.sort_by_key(|g| g[0]);
        groups
    }

    /// Length of the longest root-to-terminal path, counting decision nodes
    /// of each player.
    pub fn decisions_per_player(&self, terminal: &TerminalInfo) -> Vec<usize> {
        let mut counts = vec![0; self.num_players];
        for step in &terminal.path {
            counts[step.player] += 1;
        }
        counts
    }
}

fn collect_terminals(
    nodes: &[Node],
    id: NodeId,
    chance: f64,
    path: &mut Vec<PathStep>,
    out: &mut Vec<TerminalInfo>,
) {
    match &nodes[id] {
        Node::Terminal { payoffs } => out.push(TerminalInfo {
            node: id,
            chance_prob: chance,
            path: path.clone(),
            payoffs: payoffs.clone(),
        }),
        Node::Chance { outcomes } => {
            for &(child, p) in outcomes {
                collect_terminals(nodes, child, chance * p, path, out);
            }
        }
        Node::Decision {
            player,
            infoset,
            children,
        } => {
            for (action, &child) in children.iter().enumerate() {
                path.push(PathStep {
                    player: *player,
                    infoset: *infoset,
                    action,
                });
                collect_terminals(nodes, child, chance, path, out);
                path.pop();
            }
        }
    }
}

struct Builder {
    num_players: usize,
    nodes: Vec<Node>,
    infosets: Vec<Vec<Infoset>>,
    keys: Vec<HashMap<String, usize>>,
    /// Own (infoset, action) sequence leading to each infoset, for the
    /// perfect-recall check.
    own_sequences: Vec<Vec<Vec<(usize, usize)>>>,
}

impl Builder {
    fn expand<S: GameState>(
        &mut self,
        state: &S,
        own_history: &mut Vec<Vec<(usize, usize)>>,
    ) -> Result<NodeId> {
        let id = self.nodes.len();
        // placeholder, filled once children exist
        self.nodes.push(Node::Terminal { payoffs: Vec::new() });
        let node = match state.turn() {
            Turn::Terminal(payoffs) => Node::Terminal { payoffs },
            Turn::Chance(outcomes) => {
                let mut children = Vec::with_capacity(outcomes.len());
                for (next, p) in outcomes {
                    let child = self.expand(&next, own_history)?;
                    children.push((child, p));
                }
                Node::Chance { outcomes: children }
            }
            Turn::Decision {
                player,
                infoset,
                actions,
            } => {
                if player >= self.num_players {
                    return Err(Error::InvalidGame(format!(
                        "decision for player {player} in a {}-player game",
                        self.num_players
                    )));
                }
                if actions.is_empty() {
                    return Err(Error::InvalidGame(format!("infoset `{infoset}` has no actions")));
                }
                let index = self.intern(player, infoset, actions, &own_history[player])?;
                self.infosets[player][index].nodes.push(id);
                let mut children = Vec::new();
                for action in 0..self.infosets[player][index].actions.len() {
                    own_history[player].push((index, action));
                    let child = self.expand(&state.apply(action), own_history)?;
                    own_history[player].pop();
                    children.push(child);
                }
                Node::Decision {
                    player,
                    infoset: index,
                    children,
                }
            }
        };
        self.nodes[id] = node;
        Ok(id)
    }

    fn intern(
        &mut self,
        player: usize,
        key: String,
        actions: Vec<String>,
        own: &[(usize, usize)],
    ) -> Result<usize> {
        if let Some(&index) = self.keys[player].get(&key) {
            let existing = &self.infosets[player][index];
            if existing.actions != actions {
                return Err(Error::InvalidGame(format!(
                    "infoset `{key}` of player {player} exposes different action lists"
                )));
            }
            if self.own_sequences[player][index] != own {
                return Err(Error::InvalidGame(format!(
                    "infoset `{key}` of player {player} merges histories with different own-action sequences"
                )));
            }
            return Ok(index);
        }
        let index = self.infosets[player].len();
        self.keys[player].insert(key.clone(), index);
        self.infosets[player].push(Infoset {
            id: key,
            actions,
            nodes: Vec::new(),
            own_depth: own.len(),
        });
        self.own_sequences[player].push(own.to_vec());
        Ok(index)
    }
}

/// Build one of the built-in games.
pub fn build_game(spec: &GameSpec) -> Result<ExtensiveGame> {
    spec.build()
}
