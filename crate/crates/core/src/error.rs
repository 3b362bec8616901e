use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: self-loop on node '{label}'")]
    SelfLoop { line: usize, label: String },
    #[error("line {line}: expected two node labels, got '{text}'")]
    MalformedLine { line: usize, text: String },
    #[error("graph is disconnected: no path from '{from}' to '{to}'")]
    Disconnected { from: String, to: String },
    #[error("graph has no edges")]
    Empty,
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("bad generator '{spec}': {reason}")]
    BadGenerator { spec: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    MatrixGame(#[from] MatrixGameError),
    #[error("cop count must be at least 1")]
    NoCops,
    #[error("expected {expected} cop locations, got {got}")]
    CopArity { expected: usize, got: usize },
    #[error("position is a capture position")]
    CapturePosition,
    #[error("position is outside the strategy's domain: {0}")]
    OutsideDomain(String),
    #[error("position space of {0} positions is too large")]
    TooLarge(u128),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixGameError {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("solution failed its security check (residual {residual:e})")]
    Inaccurate { residual: f64 },
}
