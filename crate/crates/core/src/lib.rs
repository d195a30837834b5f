//! Population learning towards coarse correlated equilibria on small
//! extensive-form games.
//!
//! The crate is organised bottom-up:
//!
//! * [`game`] builds and validates game trees, including the built-in set
//!   (rock-paper-scissors, Kuhn poker, goofspiel, trade_comm and the
//!   avoid-direction counterexample).
//! * [`policy`] holds tabular behaviour policies.
//! * [`br`] computes exact maximum-entropy best responses, deviation gains
//!   and full-game CCE gaps.
//! * [`metagame`] evaluates restricted normal-form payoff tensors.
//! * [`solver`] is the meta-strategy solver (Max-Gini, max-welfare and
//!   max-entropy CCE).
//! * [`jpsro`] is the exact JPSRO(CCE) loop and its trace format.
//! * [`population`] is the NeuPL-JPSRO population in tabular and parametric
//!   form.
//! * [`experiments`] holds the result bundle, plotting and support statistics
//!   used by the command-line tool.

pub mod br;
pub mod error;
pub mod experiments;
pub mod game;
pub mod jpsro;
pub mod metagame;
pub mod policy;
pub mod population;
pub mod solver;

pub use error::{Error, Result};
pub use game::{ExtensiveGame, GameSpec};
pub use policy::TabularPolicy;
