//! Solvers for cops and robbers on finite graphs, in both the alternating
//! and the simultaneous-move form.

pub mod concurrent;
pub mod error;
pub mod export;
pub mod graph;
pub mod matrix_game;
pub mod position;
pub mod simulation;
pub mod turn_based;

pub use error::{GameError, GraphError, MatrixGameError};
pub use graph::{generate, parse_edge_list, Graph, Node};
pub use position::{Placement, PositionSpace};
pub use turn_based::Side;
