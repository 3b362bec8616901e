//! The simultaneous-move game: transitions with en-passant capture, value
//! iteration over per-position matrix games, and the memoryless mixed
//! strategies read off the last sweep.
//!
//! Values count uncaptured rounds including round zero, so a non-capture
//! position satisfies `v(p) = Val[1 + v(next)]` and capture positions are
//! pinned at zero. Iterating from zero increases monotonically towards the
//! least solution of these equations.

use rayon::prelude::*;

use crate::error::GameError;
use crate::graph::{Graph, Node};
use crate::matrix_game::{solve_matrix_game, GameSolution, MatrixGame};
use crate::position::{joint_cop_moves, Placement, PositionSpace};
use crate::turn_based::Side;

/// One node per cop for cop moves, a single node for robber moves.
pub type Move = Vec<Node>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub next: Placement,
    /// Capture happened this round by a cop and the robber swapping ends
    /// of an edge.
    pub en_passant: bool,
}

impl Step {
    pub fn captured(&self) -> bool {
        self.next.is_capture()
    }
}

/// Applies one simultaneous round.
///
/// Capture positions are absorbing. A token whose move leaves its closed
/// neighbourhood stays put. The robber is caught if a cop lands on the
/// robber's new node, or if a cop and the robber swap nodes across an
/// edge; either way every token then sits on the capture node.
pub fn cccr_transition(
    g: &Graph,
    p: &Placement,
    cop_moves: &[Node],
    robber_move: Node,
) -> Result<Step, GameError> {
    p.validate(g, p.cops.len())?;
    if cop_moves.len() != p.cops.len() {
        return Err(GameError::CopArity {
            expected: p.cops.len(),
            got: cop_moves.len(),
        });
    }
    for &m in cop_moves {
        g.check(m)?;
    }
    g.check(robber_move)?;
    Ok(step_unchecked(g, p, cop_moves, robber_move))
}

pub(crate) fn step_unchecked(g: &Graph, p: &Placement, cop_moves: &[Node], robber_move: Node) -> Step {
    if p.is_capture() {
        return Step {
            next: p.clone(),
            en_passant: false,
        };
    }
    let y = p.robber;
    let new_robber = if g.in_closed_neighborhood(y, robber_move) {
        robber_move
    } else {
        y
    };
    let new_cops: Vec<Node> = p
        .cops
        .iter()
        .zip(cop_moves)
        .map(|(&x, &m)| if g.in_closed_neighborhood(x, m) { m } else { x })
        .collect();
    let collapse = |node: Node| Placement::new(vec![node; new_cops.len()], node);
    if new_cops.contains(&new_robber) {
        return Step {
            next: collapse(new_robber),
            en_passant: false,
        };
    }
    let swapped = p
        .cops
        .iter()
        .zip(&new_cops)
        .any(|(&x, &x2)| x2 == y && new_robber == x);
    if swapped {
        return Step {
            next: collapse(y),
            en_passant: true,
        };
    }
    Step {
        next: Placement::new(new_cops, new_robber),
        en_passant: false,
    }
}

/// Payoff collected by the robber for a round spent at `p`.
pub fn stage_payoff(p: &Placement) -> u32 {
    u32::from(!p.is_capture())
}

/// Legal robber moves and joint cop moves at a position, with the index of
/// the position each pair leads to (row-major, robber rows).
#[derive(Clone, Debug)]
struct Successors {
    robber_moves: Vec<Node>,
    cop_moves: Vec<Move>,
    next: Vec<usize>,
}

fn successors(g: &Graph, space: &PositionSpace, idx: usize) -> Successors {
    let p = space.decode(idx);
    let robber_moves = g.closed(p.robber).to_vec();
    let cop_moves = joint_cop_moves(g, &p.cops);
    let mut next = Vec::with_capacity(robber_moves.len() * cop_moves.len());
    for &rm in &robber_moves {
        for cm in &cop_moves {
            next.push(space.encode(&step_unchecked(g, &p, cm, rm).next));
        }
    }
    Successors {
        robber_moves,
        cop_moves,
        next,
    }
}

fn build_matrix(succ: &Successors, values: &[f64], ceiling: f64) -> MatrixGame {
    let entries = succ
        .next
        .iter()
        .map(|&j| 1.0 + values[j].min(ceiling))
        .collect();
    MatrixGame::from_row_major(succ.robber_moves.len(), succ.cop_moves.len(), entries)
        .expect("entries are finite after clamping")
}

/// The one-round game at a non-capture position.
#[derive(Clone, Debug)]
pub struct LocalGame {
    pub matrix: MatrixGame,
    /// Row labels.
    pub robber_moves: Vec<Node>,
    /// Column labels.
    pub cop_moves: Vec<Move>,
}

/// Builds the matrix game at `p` against the values in `table`: rows are
/// robber moves in `N[y]`, columns joint cop moves, entries `1 + v(next)`
/// with infinite values clamped to the table's ceiling.
pub fn local_game(g: &Graph, p: &Placement, table: &ValueTable) -> Result<LocalGame, GameError> {
    p.validate(g, table.space.cops())?;
    if table.space.nodes() != g.node_count() {
        return Err(GameError::InvalidParameter(
            "value table belongs to a different graph".into(),
        ));
    }
    if p.is_capture() {
        return Err(GameError::CapturePosition);
    }
    let succ = successors(g, &table.space, table.space.encode(p));
    let matrix = build_matrix(&succ, &table.values, table.ceiling);
    Ok(LocalGame {
        matrix,
        robber_moves: succ.robber_moves,
        cop_moves: succ.cop_moves,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationConfig {
    /// Stop once the largest change between sweeps drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Values above this are reported as infinite. Defaults to
    /// `10 * |V|^(K+1)`.
    pub ceiling: Option<f64>,
    /// Tolerance handed to each matrix-game solve.
    pub game_tol: f64,
    pub parallel: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            tol: 1e-2,
            max_iter: 10_000,
            ceiling: None,
            game_tol: 1e-7,
            parallel: true,
        }
    }
}

impl IterationConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

pub fn default_ceiling(n: usize, k: usize) -> f64 {
    10.0 * (n as f64).powi(k as i32 + 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    graph: Graph,
    space: PositionSpace,
    values: Vec<f64>,
    ceiling: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

impl ValueTable {
    /// The all-zero table (the iteration's starting point).
    pub fn zeros(g: &Graph, k: usize) -> Result<Self, GameError> {
        let space = PositionSpace::new(g.node_count(), k)?;
        Ok(Self {
            graph: g.clone(),
            space,
            values: vec![0.0; space.len()],
            ceiling: default_ceiling(g.node_count(), k),
            iterations_used: 0,
            converged: false,
        })
    }

    /// Assembles a table from raw values in position-index order.
    pub fn from_values(
        g: &Graph,
        k: usize,
        values: Vec<f64>,
        ceiling: f64,
        iterations_used: usize,
        converged: bool,
    ) -> Result<Self, GameError> {
        let space = PositionSpace::new(g.node_count(), k)?;
        if values.len() != space.len() {
            return Err(GameError::InvalidParameter(format!(
                "expected {} values, got {}",
                space.len(),
                values.len()
            )));
        }
        Ok(Self {
            graph: g.clone(),
            space,
            values,
            ceiling,
            iterations_used,
            converged,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn space(&self) -> PositionSpace {
        self.space
    }

    pub fn cops(&self) -> usize {
        self.space.cops()
    }

    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    pub fn value(&self, p: &Placement) -> Result<f64, GameError> {
        p.validate(&self.graph, self.space.cops())?;
        Ok(self.values[self.space.encode(p)])
    }

    /// Values in position-index order (see [`PositionSpace`]).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entries(&self) -> impl Iterator<Item = (Placement, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.space.decode(i), v))
    }

    /// Number of positions classified as infinite.
    pub fn divergent(&self) -> usize {
        self.values.iter().filter(|v| v.is_infinite()).count()
    }

    pub fn all_finite(&self) -> bool {
        self.divergent() == 0
    }

    /// Largest value over all positions, infinite if any position is.
    pub fn capture_time(&self) -> f64 {
        capture_time(self)
    }
}

/// `max` of the table's values.
pub fn capture_time(table: &ValueTable) -> f64 {
    table.values.iter().copied().fold(0.0, f64::max)
}

/// A probability distribution over moves of one side.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub entries: Vec<(Move, f64)>,
}

impl Distribution {
    pub fn point(mv: Move) -> Self {
        Self {
            entries: vec![(mv, 1.0)],
        }
    }

    pub fn uniform(moves: Vec<Move>) -> Self {
        let p = 1.0 / moves.len() as f64;
        Self {
            entries: moves.into_iter().map(|m| (m, p)).collect(),
        }
    }

    /// Probability of `mv`, zero when absent.
    pub fn prob(&self, mv: &[Node]) -> f64 {
        self.entries
            .iter()
            .filter(|(m, _)| m.as_slice() == mv)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// Entries with positive probability.
    pub fn support(&self) -> impl Iterator<Item = &(Move, f64)> {
        self.entries.iter().filter(|(_, p)| *p > 0.0)
    }

    /// Picks the move whose cumulative probability first exceeds `u`
    /// (`u` uniform in `[0, 1)`).
    pub fn sample_with(&self, u: f64) -> &Move {
        let target = u * self.total();
        let mut acc = 0.0;
        for (m, p) in &self.entries {
            acc += p;
            if target < acc {
                return m;
            }
        }
        // Rounding can leave `target` a hair above the final sum.
        &self
            .entries
            .iter()
            .rev()
            .find(|(_, p)| *p > 0.0)
            .unwrap_or(&self.entries[self.entries.len() - 1])
            .0
    }
}

/// Per-position mixes for both sides, defined on non-capture positions of
/// finite value.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedStrategyTable {
    space: PositionSpace,
    cop: Vec<Option<Distribution>>,
    robber: Vec<Option<Distribution>>,
}

impl MixedStrategyTable {
    pub fn space(&self) -> PositionSpace {
        self.space
    }

    pub fn get(&self, p: &Placement, side: Side) -> Result<&Distribution, GameError> {
        if p.cops.len() != self.space.cops() {
            return Err(GameError::CopArity {
                expected: self.space.cops(),
                got: p.cops.len(),
            });
        }
        if p.robber >= self.space.nodes() || p.cops.iter().any(|&c| c >= self.space.nodes()) {
            return Err(GameError::OutsideDomain("unknown node".into()));
        }
        if p.is_capture() {
            return Err(GameError::CapturePosition);
        }
        let slot = match side {
            Side::Cop => &self.cop,
            Side::Robber => &self.robber,
        };
        slot[self.space.encode(p)]
            .as_ref()
            .ok_or_else(|| GameError::OutsideDomain("position has infinite value".into()))
    }

    /// Every defined `(position, side, distribution)`.
    pub fn entries(&self) -> impl Iterator<Item = (Placement, Side, &Distribution)> + '_ {
        (0..self.space.len()).flat_map(move |i| {
            let p = self.space.decode(i);
            let cop = self.cop[i].as_ref().map(|d| (p.clone(), Side::Cop, d));
            let rob = self.robber[i].as_ref().map(|d| (p.clone(), Side::Robber, d));
            cop.into_iter().chain(rob)
        })
    }

    /// Assembles a table from per-position distributions (index order).
    pub fn from_parts(
        space: PositionSpace,
        cop: Vec<Option<Distribution>>,
        robber: Vec<Option<Distribution>>,
    ) -> Result<Self, GameError> {
        if cop.len() != space.len() || robber.len() != space.len() {
            return Err(GameError::InvalidParameter("strategy table size mismatch".into()));
        }
        Ok(Self { space, cop, robber })
    }
}

/// The stored distribution for `side` at `p`.
pub fn query_strategy<'a>(
    s: &'a MixedStrategyTable,
    p: &Placement,
    side: Side,
) -> Result<&'a Distribution, GameError> {
    s.get(p, side)
}

/// Runs value iteration from the zero vector until the largest change
/// between sweeps falls below `config.tol` or `max_iter` sweeps are done.
///
/// Each sweep solves every non-capture position's matrix game against an
/// immutable snapshot of the previous iterate, so the parallel and
/// sequential sweeps agree bit for bit. Positions whose value passes the
/// ceiling are frozen at infinity; that classification is numerical, and
/// exact only when `k` is at least the cop number (then nothing diverges).
pub fn value_iterate(
    g: &Graph,
    k: usize,
    config: &IterationConfig,
) -> Result<(ValueTable, MixedStrategyTable), GameError> {
    if !(config.tol > 0.0) {
        return Err(GameError::InvalidParameter("tol must be positive".into()));
    }
    if config.max_iter == 0 {
        return Err(GameError::InvalidParameter("max_iter must be positive".into()));
    }
    let space = PositionSpace::new(g.node_count(), k)?;
    let ceiling = config.ceiling.unwrap_or_else(|| default_ceiling(g.node_count(), k));
    if !(ceiling > 0.0) {
        return Err(GameError::InvalidParameter("ceiling must be positive".into()));
    }

    let active: Vec<usize> = (0..space.len()).filter(|&i| !space.is_capture(i)).collect();
    let succ: Vec<Successors> = if config.parallel {
        active.par_iter().map(|&i| successors(g, &space, i)).collect()
    } else {
        active.iter().map(|&i| successors(g, &space, i)).collect()
    };

    let mut values: Vec<f64> = vec![0.0; space.len()];
    let mut solutions: Vec<Option<GameSolution>> = vec![None; active.len()];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iter {
        let sweep = |slot: usize| -> Result<Option<GameSolution>, GameError> {
            if values[active[slot]].is_infinite() {
                return Ok(None);
            }
            let matrix = build_matrix(&succ[slot], &values, ceiling);
            Ok(Some(solve_matrix_game(&matrix, config.game_tol)?))
        };
        let fresh: Vec<Option<GameSolution>> = if config.parallel {
            (0..active.len()).into_par_iter().map(sweep).collect::<Result<_, _>>()?
        } else {
            (0..active.len()).map(sweep).collect::<Result<_, _>>()?
        };
        iterations += 1;

        let mut delta: f64 = 0.0;
        let mut next = values.clone();
        for (slot, sol) in fresh.into_iter().enumerate() {
            let i = active[slot];
            let Some(sol) = sol else { continue };
            let v = if sol.value > ceiling { f64::INFINITY } else { sol.value };
            delta = delta.max((v - values[i]).abs());
            next[i] = v;
            solutions[slot] = if v.is_finite() { Some(sol) } else { None };
        }
        values = next;
        if delta < config.tol {
            converged = true;
            break;
        }
    }

    let mut cop = vec![None; space.len()];
    let mut robber = vec![None; space.len()];
    for (slot, sol) in solutions.into_iter().enumerate() {
        let Some(sol) = sol else { continue };
        let i = active[slot];
        let s = &succ[slot];
        cop[i] = Some(Distribution {
            entries: s.cop_moves.iter().cloned().zip(sol.col_mix).collect(),
        });
        robber[i] = Some(Distribution {
            entries: s.robber_moves.iter().map(|&m| vec![m]).zip(sol.row_mix).collect(),
        });
    }

    let table = ValueTable {
        graph: g.clone(),
        space,
        values,
        ceiling,
        iterations_used: iterations,
        converged,
    };
    Ok((table, MixedStrategyTable { space, cop, robber }))
}
