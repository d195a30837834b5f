//! Two-player common-payoff communication game. Each player privately
//! receives an item, both send one utterance in turn, then both submit a
//! trade offer without seeing the other's offer. The trade succeeds, paying
//! 1 to both, when each offers its own item for the other player's item.

use super::{ExtensiveGame, GameMetadata, GameState, PayoffStructure, Turn};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TradeComm {
    num_items: usize,
    items: Option<[usize; 2]>,
    utterances: Vec<usize>,
    trades: Vec<usize>,
}

impl TradeComm {
    pub fn game(num_items: usize) -> Result<ExtensiveGame> {
        if !(2..=3).contains(&num_items) {
            return Err(Error::UnsupportedParameters {
                game: "trade_comm".into(),
                reason: format!("num_items must be 2 or 3, got {num_items}"),
            });
        }
        ExtensiveGame::build(
            TradeComm {
                num_items,
                items: None,
                utterances: Vec::new(),
                trades: Vec::new(),
            },
            2,
            GameMetadata {
                name: format!("trade_comm_{num_items}i"),
                symmetric_player_groups: vec![],
                payoff_structure: PayoffStructure::CommonPayoff,
            },
        )
    }

    fn trade_labels(&self) -> Vec<String> {
        (0..self.num_items * self.num_items)
            .map(|t| format!("give{}get{}", t / self.num_items, t % self.num_items))
            .collect()
    }
}

impl GameState for TradeComm {
    fn turn(&self) -> Turn<Self> {
        let k = self.num_items;
        let Some(items) = self.items else {
            let p = 1.0 / (k * k) as f64;
            return Turn::Chance(
                (0..k * k)
                    .map(|d| {
                        let mut next = self.clone();
                        next.items = Some([d / k, d % k]);
                        (next, p)
                    })
                    .collect(),
            );
        };
        let utter: String = self.utterances.iter().map(|u| u.to_string()).collect();
        match (self.utterances.len(), self.trades.len()) {
            (u, 0) if u < 2 => Turn::Decision {
                player: u,
                infoset: format!("item{}|said{}", items[u], utter),
                actions: (0..k).map(|i| format!("say{i}")).collect(),
            },
            (2, t) if t < 2 => Turn::Decision {
                player: t,
                infoset: format!("item{}|said{}|trade", items[t], utter),
                actions: self.trade_labels(),
            },
            _ => {
                let offer = |t: usize| (t / k, t % k);
                let ok = offer(self.trades[0]) == (items[0], items[1])
                    && offer(self.trades[1]) == (items[1], items[0]);
                let v = if ok { 1.0 } else { 0.0 };
                Turn::Terminal(vec![v, v])
            }
        }
    }

    fn apply(&self, action: usize) -> Self {
        let mut next = self.clone();
        if next.utterances.len() < 2 {
            next.utterances.push(action);
        } else {
            next.trades.push(action);
        }
        next
    }
}
