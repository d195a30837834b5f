//! Two-player goofspiel with imperfect information: each round a point card
//! is revealed (descending order) and players bid a card from their hands.
//! Bids are simultaneous, emulated turn-based. Players only learn who won
//! each round. Infoset keys are egocentric, so both players share one key
//! space. Returns are the point difference; tied bids discard the point card.

use super::{ExtensiveGame, GameMetadata, GameState, PayoffStructure, Turn};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Goofspiel {
    num_cards: usize,
    /// Bids so far, per player, in round order (card values 1..=num_cards).
    bids: [Vec<usize>; 2],
}

impl Goofspiel {
    pub fn game(num_cards: usize) -> Result<ExtensiveGame> {
        if !(3..=5).contains(&num_cards) {
            return Err(Error::UnsupportedParameters {
                game: "goofspiel".into(),
                reason: format!("num_cards must be in 3..=5, got {num_cards}"),
            });
        }
        ExtensiveGame::build(
            Goofspiel {
                num_cards,
                bids: [Vec::new(), Vec::new()],
            },
            2,
            GameMetadata {
                name: format!("goofspiel_2p_{num_cards}c"),
                symmetric_player_groups: vec![vec![0, 1]],
                payoff_structure: PayoffStructure::ZeroSum,
            },
        )
    }

    fn point_card(&self, round: usize) -> usize {
        self.num_cards - round
    }

    fn hand(&self, player: usize) -> Vec<usize> {
        (1..=self.num_cards)
            .filter(|c| !self.bids[player].contains(c))
            .collect()
    }

    /// Outcome of each completed round from `player`'s point of view.
    fn results(&self, player: usize) -> String {
        let rounds = self.bids[1].len();
        (0..rounds)
            .map(|r| {
                let mine = self.bids[player][r];
                let theirs = self.bids[1 - player][r];
                match mine.cmp(&theirs) {
                    std::cmp::Ordering::Greater => 'W',
                    std::cmp::Ordering::Less => 'L',
                    std::cmp::Ordering::Equal => 'T',
                }
            })
            .collect()
    }
}

impl GameState for Goofspiel {
    fn turn(&self) -> Turn<Self> {
        let round = self.bids[1].len();
        if round == self.num_cards {
            let mut points = [0.0f64; 2];
            for r in 0..self.num_cards {
                let (a, b) = (self.bids[0][r], self.bids[1][r]);
                let value = self.point_card(r) as f64;
                if a > b {
                    points[0] += value;
                } else if b > a {
                    points[1] += value;
                }
            }
            let diff = points[0] - points[1];
            return Turn::Terminal(vec![diff, -diff]);
        }
        let player = if self.bids[0].len() == round { 0 } else { 1 };
        let played: Vec<String> = self.bids[player].iter().map(|c| c.to_string()).collect();
        let hand = self.hand(player);
        Turn::Decision {
            player,
            infoset: format!(
                "point{}|played{}|results{}",
                self.point_card(round),
                played.join(","),
                self.results(player)
            ),
            actions: hand.iter().map(|c| c.to_string()).collect(),
        }
    }

    fn apply(&self, action: usize) -> Self {
        let round = self.bids[1].len();
        let player = if self.bids[0].len() == round { 0 } else { 1 };
        let card = self.hand(player)[action];
        let mut next = self.clone();
        next.bids[player].push(card);
        next
    }
}
