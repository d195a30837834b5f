//! Two-player normal-form games played turn-based: the second mover's
//! infoset hides the first mover's choice.

use super::{ExtensiveGame, GameMetadata, GameState, PayoffStructure, Turn};
use crate::error::{Error, Result};

#[derive(Clone)]
struct MatrixState<'a> {
    rows: &'a [Vec<f64>],
    cols: &'a [Vec<f64>],
    row_labels: &'a [String],
    col_labels: &'a [String],
    moves: Vec<usize>,
}

impl GameState for MatrixState<'_> {
    fn turn(&self) -> Turn<Self> {
        match self.moves.as_slice() {
            [] => Turn::Decision {
                player: 0,
                infoset: "move".into(),
                actions: self.row_labels.to_vec(),
            },
            [_] => Turn::Decision {
                player: 1,
                infoset: "move".into(),
                actions: self.col_labels.to_vec(),
            },
            [r, c] => Turn::Terminal(vec![self.rows[*r][*c], self.cols[*r][*c]]),
            _ => unreachable!("matrix games end after two moves"),
        }
    }

    fn apply(&self, action: usize) -> Self {
        let mut next = self.clone();
        next.moves.push(action);
        next
    }
}

fn build(
    name: &str,
    row_payoffs: &[Vec<f64>],
    col_payoffs: &[Vec<f64>],
    row_labels: &[String],
    col_labels: &[String],
    structure: PayoffStructure,
    symmetric: bool,
) -> Result<ExtensiveGame> {
    let num_rows = row_payoffs.len();
    let num_cols = row_payoffs.first().map_or(0, Vec::len);
    if num_rows == 0 || num_cols == 0 {
        return Err(Error::InvalidGame("empty payoff matrix".into()));
    }
    let shape_ok = row_payoffs.iter().all(|r| r.len() == num_cols)
        && col_payoffs.len() == num_rows
        && col_payoffs.iter().all(|r| r.len() == num_cols)
        && row_labels.len() == num_rows
        && col_labels.len() == num_cols;
    if !shape_ok {
        return Err(Error::InvalidGame("ragged payoff matrices".into()));
    }
    let root = MatrixState {
        rows: row_payoffs,
        cols: col_payoffs,
        row_labels,
        col_labels,
        moves: Vec::new(),
    };
    ExtensiveGame::build(
        root,
        2,
        GameMetadata {
            name: name.to_string(),
            symmetric_player_groups: if symmetric { vec![vec![0, 1]] } else { vec![] },
            payoff_structure: structure,
        },
    )
}

/// Turn-based encoding of a bimatrix game with numbered action labels.
pub fn matrix_game(
    name: &str,
    row_payoffs: &[Vec<f64>],
    col_payoffs: &[Vec<f64>],
    structure: PayoffStructure,
) -> Result<ExtensiveGame> {
    let rows: Vec<String> = (0..row_payoffs.len()).map(|i| i.to_string()).collect();
    let cols: Vec<String> = (0..row_payoffs.first().map_or(0, Vec::len))
        .map(|i| i.to_string())
        .collect();
    build(name, row_payoffs, col_payoffs, &rows, &cols, structure, false)
}

/// Rock-paper-scissors with win = +1, loss = -1, tie = 0.
pub fn rock_paper_scissors() -> Result<ExtensiveGame> {
    let row: Vec<Vec<f64>> = (0..3)
        .map(|r| {
            (0..3)
                .map(|c| match (3 + r - c) % 3 {
                    0 => 0.0,
                    1 => 1.0,
                    _ => -1.0,
                })
                .collect()
        })
        .collect();
    let col: Vec<Vec<f64>> = row.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    let labels: Vec<String> = ["R", "P", "S"].iter().map(|s| s.to_string()).collect();
    build(
        "rock_paper_scissors",
        &row,
        &col,
        &labels,
        &labels,
        PayoffStructure::ZeroSum,
        true,
    )
}

/// 2x2 common-payoff coordination game: both players get 1 on the diagonal
/// and 0 elsewhere.
pub fn common_payoff_diagonal() -> Result<ExtensiveGame> {
    let m = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    build(
        "common_payoff_diagonal",
        &m,
        &m,
        &["0".to_string(), "1".to_string()],
        &["0".to_string(), "1".to_string()],
        PayoffStructure::CommonPayoff,
        true,
    )
}
