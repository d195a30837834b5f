use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("unsupported parameters for `{game}`: {reason}")]
    UnsupportedParameters { game: String, reason: String },
    #[error("malformed game spec `{0}`")]
    MalformedSpec(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("player {player} out of range for a {num_players}-player game")]
    PlayerOutOfRange { player: usize, num_players: usize },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("support mismatch at infoset `{infoset}`: p puts mass on action {action} where q is zero")]
    SupportMismatch { infoset: String, action: usize },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("joint strategy count {count} exceeds cap {cap}")]
    TensorCap { count: usize, cap: usize },
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unknown strategy index {index} for player {player}")]
    UnknownStrategy { player: usize, index: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
