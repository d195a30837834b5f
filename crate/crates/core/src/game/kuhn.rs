//! N-player Kuhn poker with a deck of N + 1 cards, one-chip antes and a
//! single one-chip bet.

use super::{ExtensiveGame, GameMetadata, GameState, PayoffStructure, Turn};
use crate::error::{Error, Result};

const PASS: usize = 0;
const BET: usize = 1;

#[derive(Clone, Debug)]
pub struct KuhnPoker {
    num_players: usize,
    cards: Option<Vec<usize>>,
    history: Vec<usize>,
}

impl KuhnPoker {
    pub fn game(num_players: usize) -> Result<ExtensiveGame> {
        if !(2..=3).contains(&num_players) {
            return Err(Error::UnsupportedParameters {
                game: "kuhn_poker".into(),
                reason: format!("players must be 2 or 3, got {num_players}"),
            });
        }
        ExtensiveGame::build(
            KuhnPoker {
                num_players,
                cards: None,
                history: Vec::new(),
            },
            num_players,
            GameMetadata {
                name: format!("kuhn_poker_{num_players}p"),
                symmetric_player_groups: vec![],
                payoff_structure: PayoffStructure::ZeroSum,
            },
        )
    }

    fn first_bet(&self) -> Option<usize> {
        self.history.iter().position(|&a| a == BET)
    }

    fn is_terminal(&self) -> bool {
        match self.first_bet() {
            None => self.history.len() == self.num_players,
            Some(pos) => self.history.len() == pos + self.num_players,
        }
    }

    fn returns(&self, cards: &[usize]) -> Vec<f64> {
        let n = self.num_players;
        let mut contributed = vec![1.0; n];
        for (i, &a) in self.history.iter().enumerate() {
            if a == BET {
                contributed[i % n] = 2.0;
            }
        }
        let in_showdown: Vec<usize> = match self.first_bet() {
            None => (0..n).collect(),
            Some(_) => (0..n).filter(|&p| contributed[p] == 2.0).collect(),
        };
        let winner = *in_showdown
            .iter()
            .max_by_key(|&&p| cards[p])
            .expect("someone reaches showdown");
        let pot: f64 = contributed.iter().sum();
        (0..n)
            .map(|p| {
                if p == winner {
                    pot - contributed[p]
                } else {
                    -contributed[p]
                }
            })
            .collect()
    }
}

fn deals(n: usize, deck: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, deck: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..deck {
            if !cur.contains(&c) {
                cur.push(c);
                rec(n, deck, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, deck, &mut Vec::new(), &mut out);
    out
}

impl GameState for KuhnPoker {
    fn turn(&self) -> Turn<Self> {
        let Some(cards) = &self.cards else {
            let all = deals(self.num_players, self.num_players + 1);
            let p = 1.0 / all.len() as f64;
            return Turn::Chance(
                all.into_iter()
                    .map(|deal| {
                        (
                            KuhnPoker {
                                num_players: self.num_players,
                                cards: Some(deal),
                                history: Vec::new(),
                            },
                            p,
                        )
                    })
                    .collect(),
            );
        };
        if self.is_terminal() {
            return Turn::Terminal(self.returns(cards));
        }
        let player = self.history.len() % self.num_players;
        let betting: String = self
            .history
            .iter()
            .map(|&a| if a == PASS { 'p' } else { 'b' })
            .collect();
        Turn::Decision {
            player,
            infoset: format!("{}{}", cards[player], betting),
            actions: vec!["p".into(), "b".into()],
        }
    }

    fn apply(&self, action: usize) -> Self {
        let mut next = self.clone();
        next.history.push(action);
        next
    }
}
