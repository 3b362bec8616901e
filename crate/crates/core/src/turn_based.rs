//! Classical alternating-move cops and robbers.
//!
//! Ranks count cop turns to a guaranteed capture under optimal play and are
//! computed as the least fixpoint of the usual backward induction over
//! `V^K × V × {C, R}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::graph::{Graph, Node};
use crate::position::{joint_cop_moves, Placement, PositionSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "C")]
    Cop,
    #[serde(rename = "R")]
    Robber,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Cop => Side::Robber,
            Side::Robber => Side::Cop,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Cop => "C",
            Side::Robber => "R",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" | "c" | "cop" | "cops" => Ok(Side::Cop),
            "R" | "r" | "robber" => Ok(Side::Robber),
            _ => Err(format!("unknown side '{s}' (expected C or R)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TurnPosition {
    pub placement: Placement,
    pub turn: Side,
}

impl TurnPosition {
    pub fn new(cops: impl Into<Vec<Node>>, robber: Node, turn: Side) -> Self {
        Self {
            placement: Placement::new(cops, robber),
            turn,
        }
    }
}

/// Applies one alternating-move step. `mv` holds one node per cop on a cop
/// turn and a single node on a robber turn. Moves outside the mover's
/// closed neighbourhood leave that token in place; once a cop sits on the
/// robber the locations are frozen.
pub fn tbcr_transition(g: &Graph, p: &TurnPosition, mv: &[Node]) -> Result<TurnPosition, GameError> {
    let k = p.placement.cops.len();
    p.placement.validate(g, k)?;
    let expected = match p.turn {
        Side::Cop => k,
        Side::Robber => 1,
    };
    if mv.len() != expected {
        return Err(GameError::CopArity {
            expected,
            got: mv.len(),
        });
    }
    for &m in mv {
        g.check(m)?;
    }
    let mut next = p.placement.clone();
    if !next.is_capture() {
        match p.turn {
            Side::Cop => {
                for (c, &m) in next.cops.iter_mut().zip(mv) {
                    if g.in_closed_neighborhood(*c, m) {
                        *c = m;
                    }
                }
            }
            Side::Robber => {
                if g.in_closed_neighborhood(next.robber, mv[0]) {
                    next.robber = mv[0];
                }
            }
        }
    }
    Ok(TurnPosition {
        placement: next,
        turn: p.turn.other(),
    })
}

/// Cop-turn ranks to capture; `None` means the robber escapes forever.
pub type Rank = Option<u32>;

#[derive(Clone, Debug)]
pub struct CopwinTable {
    graph: Graph,
    space: PositionSpace,
    cop_turn: Vec<Rank>,
    robber_turn: Vec<Rank>,
    /// Successor cop tuples for every cop tuple, indexed like `encode_cops`.
    cop_successors: Vec<Vec<usize>>,
}

/// Solves the alternating game with `k` cops by backward induction.
///
/// A non-capture cop-turn position gets rank `r + 1` once some joint cop
/// move reaches a robber-turn position of rank `<= r`; a robber-turn
/// position gets rank `r` once every robber move reaches a cop-turn
/// position of rank `<= r`. Whatever is unlabelled at the fixpoint is
/// robber-won.
pub fn solve_copwin(g: &Graph, k: usize) -> Result<CopwinTable, GameError> {
    let space = PositionSpace::new(g.node_count(), k)?;
    let n = space.nodes();
    let len = space.len();
    let cop_tuples = len / n;
    let cop_successors: Vec<Vec<usize>> = (0..cop_tuples)
        .map(|ct| {
            joint_cop_moves(g, &space.decode_cops(ct))
                .iter()
                .map(|m| space.encode_cops(m))
                .collect()
        })
        .collect();

    let mut cop_turn: Vec<Rank> = vec![None; len];
    let mut robber_turn: Vec<Rank> = vec![None; len];
    for i in 0..len {
        if space.is_capture(i) {
            cop_turn[i] = Some(0);
            robber_turn[i] = Some(0);
        }
    }

    let mut r: u32 = 0;
    loop {
        let mut changed = false;
        if r >= 1 {
            for i in 0..len {
                if robber_turn[i].is_some() {
                    continue;
                }
                let (ct, y) = (i / n, i % n);
                let worst = g
                    .closed(y)
                    .iter()
                    .map(|&y2| cop_turn[ct * n + y2])
                    .try_fold(0u32, |acc, rank| rank.map(|s| acc.max(s)));
                if let Some(s) = worst {
                    debug_assert_eq!(s, r);
                    robber_turn[i] = Some(s);
                    changed = true;
                }
            }
        }
        for i in 0..len {
            if cop_turn[i].is_some() {
                continue;
            }
            let (ct, y) = (i / n, i % n);
            let reachable = cop_successors[ct]
                .iter()
                .any(|&ct2| matches!(robber_turn[ct2 * n + y], Some(s) if s <= r));
            if reachable {
                cop_turn[i] = Some(r + 1);
                changed = true;
            }
        }
        if !changed && r >= 1 {
            break;
        }
        r += 1;
    }

    Ok(CopwinTable {
        graph: g.clone(),
        space,
        cop_turn,
        robber_turn,
        cop_successors,
    })
}

impl CopwinTable {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn space(&self) -> PositionSpace {
        self.space
    }

    pub fn cops(&self) -> usize {
        self.space.cops()
    }

    pub fn rank(&self, p: &TurnPosition) -> Result<Rank, GameError> {
        p.placement.validate(&self.graph, self.cops())?;
        let i = self.space.encode(&p.placement);
        Ok(match p.turn {
            Side::Cop => self.cop_turn[i],
            Side::Robber => self.robber_turn[i],
        })
    }

    /// Every `(position, rank)` pair, cop turns first.
    pub fn entries(&self) -> impl Iterator<Item = (TurnPosition, Rank)> + '_ {
        let cop = (0..self.space.len()).map(move |i| {
            let p = self.space.decode(i);
            (TurnPosition { placement: p, turn: Side::Cop }, self.cop_turn[i])
        });
        let rob = (0..self.space.len()).map(move |i| {
            let p = self.space.decode(i);
            (TurnPosition { placement: p, turn: Side::Robber }, self.robber_turn[i])
        });
        cop.chain(rob)
    }

    /// Worst case over robber placements for a given cop placement.
    fn placement_time(&self, ct: usize) -> Rank {
        let n = self.space.nodes();
        (0..n)
            .map(|y| self.cop_turn[ct * n + y])
            .try_fold(0u32, |acc, r| r.map(|s| acc.max(s)))
    }

    /// Cop moves needed after optimal placement (cops place first, the
    /// robber replies, then cops move) against optimal evasion.
    pub fn pursuit_moves(&self) -> Rank {
        let tuples = self.space.len() / self.space.nodes();
        (0..tuples).filter_map(|ct| self.placement_time(ct)).min()
    }

    /// Minimax capture time in rounds, counting the placement round as
    /// round one: `1 + pursuit_moves()`.
    pub fn capture_time(&self) -> Rank {
        self.pursuit_moves().map(|m| m + 1)
    }

    /// True when some cop placement wins against every robber placement.
    pub fn cops_win(&self) -> bool {
        self.pursuit_moves().is_some()
    }

    /// True when the cops win from every cop-turn position.
    pub fn cops_win_everywhere(&self) -> bool {
        self.cop_turn.iter().all(Option::is_some)
    }

    pub fn has_robber_win(&self) -> bool {
        self.robber_turn.iter().any(Option::is_none)
    }

    /// Largest finite cop-turn rank: every cop-won position falls within
    /// this many cop phases.
    pub fn horizon(&self) -> u32 {
        self.cop_turn.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn max_rank(&self) -> u32 {
        self.cop_turn
            .iter()
            .chain(&self.robber_turn)
            .flatten()
            .copied()
            .max()
            .unwrap_or(0)
    }
}

/// The cop number if it is at most `k_max`, else `None`.
pub fn cop_number(g: &Graph, k_max: usize) -> Result<Option<usize>, GameError> {
    if k_max == 0 {
        return Err(GameError::InvalidParameter("k_max must be at least 1".into()));
    }
    for k in 1..=k_max {
        if solve_copwin(g, k)?.cops_win() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Minimax capture time of the alternating game, `None` if the robber wins.
pub fn tbcr_capture_time(g: &Graph, k: usize) -> Result<Rank, GameError> {
    Ok(solve_copwin(g, k)?.capture_time())
}

/// A memoryless deterministic strategy for one side of the alternating game.
#[derive(Clone, Debug)]
pub struct DeterministicStrategy {
    side: Side,
    space: PositionSpace,
    moves: Vec<Option<Vec<Node>>>,
    placement: Vec<Option<Node>>,
}

impl DeterministicStrategy {
    pub fn side(&self) -> Side {
        self.side
    }

    /// The prescribed move at `p` (one node per cop for cop strategies, a
    /// single node for robber strategies).
    pub fn get(&self, p: &Placement) -> Result<&[Node], GameError> {
        if p.cops.len() != self.space.cops() {
            return Err(GameError::CopArity {
                expected: self.space.cops(),
                got: p.cops.len(),
            });
        }
        if p.robber >= self.space.nodes() || p.cops.iter().any(|&c| c >= self.space.nodes()) {
            return Err(GameError::OutsideDomain("unknown node".into()));
        }
        self.moves[self.space.encode(p)]
            .as_deref()
            .ok_or_else(|| GameError::OutsideDomain(format!("{:?} to move at {p:?}", self.side)))
    }

    /// Robber strategies only: the robber's placement reply to a cop
    /// placement, choosing a robber-won start.
    pub fn placement_reply(&self, cops: &[Node]) -> Result<Node, GameError> {
        let ct = self.space.encode_cops(cops);
        self.placement
            .get(ct)
            .copied()
            .flatten()
            .ok_or_else(|| GameError::OutsideDomain(format!("no escaping placement against {cops:?}")))
    }

    pub fn domain_size(&self) -> usize {
        self.moves.iter().filter(|m| m.is_some()).count()
    }
}

/// Rank-decreasing cop strategy, defined on every cop-won cop-turn
/// position. Ties go to the lexicographically smallest joint move; at
/// capture positions the cops stay.
pub fn extract_cop_strategy(table: &CopwinTable) -> DeterministicStrategy {
    let space = table.space;
    let n = space.nodes();
    let moves = (0..space.len())
        .map(|i| {
            let rank = table.cop_turn[i]?;
            let (ct, y) = (i / n, i % n);
            if rank == 0 {
                return Some(space.decode_cops(ct));
            }
            table.cop_successors[ct]
                .iter()
                .find(|&&ct2| matches!(table.robber_turn[ct2 * n + y], Some(s) if s < rank))
                .map(|&ct2| space.decode_cops(ct2))
        })
        .collect();
    DeterministicStrategy {
        side: Side::Cop,
        space,
        moves,
        placement: Vec::new(),
    }
}

/// Escaping robber strategy, defined on every robber-won robber-turn
/// position, plus placement replies. Errors when the cops win everywhere.
pub fn extract_robber_strategy(table: &CopwinTable) -> Result<DeterministicStrategy, GameError> {
    if !table.has_robber_win() {
        return Err(GameError::OutsideDomain(
            "the cops win from every position; there is nothing to evade".into(),
        ));
    }
    let space = table.space;
    let n = space.nodes();
    let g = &table.graph;
    let moves = (0..space.len())
        .map(|i| {
            if table.robber_turn[i].is_some() {
                return None;
            }
            let (ct, y) = (i / n, i % n);
            g.closed(y)
                .iter()
                .copied()
                .find(|&y2| table.cop_turn[ct * n + y2].is_none())
                .map(|y2| vec![y2])
        })
        .collect();
    let placement = (0..space.len() / n)
        .map(|ct| (0..n).find(|&y| table.cop_turn[ct * n + y].is_none()))
        .collect();
    Ok(DeterministicStrategy {
        side: Side::Robber,
        space,
        moves,
        placement,
    })
}
