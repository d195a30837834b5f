//! Player 0 publicly declares a direction; player 1 is rewarded for avoiding
//! it. Player 1 receives +1 when the choices differ and -1 when they match.

use super::{ExtensiveGame, GameMetadata, GameState, PayoffStructure, Turn};
use crate::error::Result;

const DIRECTIONS: [&str; 3] = ["L", "M", "R"];

#[derive(Clone, Debug, Default)]
pub struct AvoidDirection {
    moves: Vec<usize>,
}

impl AvoidDirection {
    pub fn game() -> Result<ExtensiveGame> {
        ExtensiveGame::build(
            AvoidDirection::default(),
            2,
            GameMetadata {
                name: "avoid_direction".into(),
                symmetric_player_groups: vec![],
                payoff_structure: PayoffStructure::ZeroSum,
            },
        )
    }
}

fn labels() -> Vec<String> {
    DIRECTIONS.iter().map(|s| s.to_string()).collect()
}

impl GameState for AvoidDirection {
    fn turn(&self) -> Turn<Self> {
        match self.moves.as_slice() {
            [] => Turn::Decision {
                player: 0,
                infoset: "declare".into(),
                actions: labels(),
            },
            [d] => Turn::Decision {
                player: 1,
                infoset: format!("declared:{}", DIRECTIONS[*d]),
                actions: labels(),
            },
            [d, r] => {
                let p1 = if d == r { -1.0 } else { 1.0 };
                Turn::Terminal(vec![-p1, p1])
            }
            _ => unreachable!(),
        }
    }

    fn apply(&self, action: usize) -> Self {
        let mut moves = self.moves.clone();
        moves.push(action);
        AvoidDirection { moves }
    }
}
