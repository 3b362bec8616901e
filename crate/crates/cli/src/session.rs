//! Play sessions: one human side against the solver's mixed strategy.
//!
//! The engine's move is drawn from the distribution at the current
//! position only. [`Session::submit`] validates the human move, then asks
//! [`Session::engine_distribution`] (which never sees the move) and its
//! private RNG for the engine's move, and only then applies the round.

use std::sync::Arc;

use cccr::concurrent::{cccr_transition, value_iterate, Distribution, IterationConfig, MixedStrategyTable, ValueTable};
use cccr::export::Extended;
use cccr::position::joint_cop_moves;
use cccr::turn_based::solve_copwin;
use cccr::{GameError, Graph, Node, Placement, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

/// A solved arena, shared read-only by every session on it.
#[derive(Debug)]
pub struct Solved {
    pub graph: Graph,
    pub values: ValueTable,
    pub strategies: MixedStrategyTable,
    /// Whether `cops` cops catch the robber in the alternating game.
    pub cops_win: bool,
}

impl Solved {
    pub fn new(graph: Graph, cops: usize, tol: f64) -> Result<Self, GameError> {
        let cops_win = solve_copwin(&graph, cops)?.cops_win();
        let (values, strategies) = value_iterate(&graph, cops, &IterationConfig::with_tol(tol))?;
        Ok(Self {
            graph,
            values,
            strategies,
            cops_win,
        })
    }

    pub fn cops(&self) -> usize {
        self.values.cops()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionError {
    /// Malformed request (unknown node, wrong arity, ...).
    BadRequest(String),
    /// The request contradicts the session state.
    Conflict(String),
    /// A move outside the token's closed neighbourhood.
    IllegalMove(String),
}

impl From<GameError> for SessionError {
    fn from(e: GameError) -> Self {
        SessionError::BadRequest(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionView {
    pub cops: Vec<String>,
    pub robber: String,
}

impl PositionView {
    pub fn new(g: &Graph, p: &Placement) -> Self {
        Self {
            cops: p.cop_labels(g),
            robber: g.label(p.robber).to_string(),
        }
    }

    pub fn resolve(&self, g: &Graph) -> Result<Placement, GameError> {
        Placement::from_labels(g, &self.cops, &self.robber)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub human_move: Vec<String>,
    pub engine_move: Vec<String>,
    pub position: PositionView,
    pub captured: bool,
    pub en_passant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundOutcome {
    pub position: PositionView,
    pub round: u32,
    pub captured: bool,
    pub en_passant: bool,
    pub human_move: Vec<String>,
    pub engine_move: Vec<String>,
    pub value_at_position: Extended,
    pub legal_moves: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoveProbView {
    #[serde(rename = "move")]
    pub mv: Vec<String>,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhatIf {
    pub human_move: Vec<String>,
    /// One entry per engine move in the engine's support.
    pub outcomes: Vec<WhatIfOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhatIfOutcome {
    pub engine_move: Vec<String>,
    pub prob: f64,
    pub value: Extended,
    pub captured: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatCell {
    pub robber: String,
    pub value: Extended,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphView {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub fingerprint: String,
}

impl GraphView {
    pub fn new(g: &Graph) -> Self {
        Self {
            nodes: g.labels().to_vec(),
            edges: g
                .edges()
                .into_iter()
                .map(|(u, v)| (g.label(u).to_string(), g.label(v).to_string()))
                .collect(),
            fingerprint: g.fingerprint(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionView {
    pub session_id: Uuid,
    pub graph: GraphView,
    pub cops: usize,
    pub human_side: Side,
    pub position: PositionView,
    pub round: u32,
    pub captured: bool,
    pub en_passant: bool,
    pub capture_round: Option<u32>,
    pub value_at_position: Extended,
    pub legal_moves: Vec<Vec<String>>,
    pub engine_mix: Vec<MoveProbView>,
    pub what_if: Vec<WhatIf>,
    /// Values with the cops where they are and the robber anywhere.
    pub heatmap: Vec<HeatCell>,
    pub history: Vec<RoundRecord>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Start {
    Random(RandomTag),
    At(PositionView),
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub enum RandomTag {
    #[serde(rename = "random")]
    Random,
}

impl Default for Start {
    fn default() -> Self {
        Start::Random(RandomTag::Random)
    }
}

pub struct Session {
    id: Uuid,
    solved: Arc<Solved>,
    human: Side,
    position: Placement,
    round: u32,
    capture_round: Option<u32>,
    en_passant: bool,
    /// Engine draws only.
    rng: ChaCha8Rng,
    history: Vec<RoundRecord>,
}

impl Session {
    /// Opens a session. Unless `force` is set, the arena must be cop-win
    /// for the chosen number of cops.
    pub fn new(solved: Arc<Solved>, human: Side, start: &Start, seed: u64, force: bool) -> Result<Self, SessionError> {
        if !solved.cops_win && !force {
            return Err(SessionError::Conflict(format!(
                "{} cop(s) cannot catch the robber on this graph; pass force to play anyway",
                solved.cops()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let position = match start {
            Start::At(view) => {
                let p = view.resolve(&solved.graph)?;
                p.validate(&solved.graph, solved.cops())?;
                if !force && solved.values.value(&p)?.is_infinite() {
                    return Err(SessionError::Conflict("start position has infinite value".into()));
                }
                p
            }
            Start::Random(_) => {
                // A separate stream, so the start never shifts engine draws.
                let mut start_rng = rng.clone();
                start_rng.set_stream(1);
                random_start(&solved, &mut start_rng)
            }
        };
        rng.set_stream(0);
        let capture_round = position.is_capture().then_some(0);
        Ok(Self {
            id: Uuid::new_v4(),
            solved,
            human,
            position,
            round: 0,
            capture_round,
            en_passant: false,
            rng,
            history: Vec::new(),
        })
    }

    pub fn id(&self) -> Uuid {
        self.id
    }

    pub fn position(&self) -> &Placement {
        &self.position
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn captured(&self) -> bool {
        self.capture_round.is_some()
    }

    pub fn human_side(&self) -> Side {
        self.human
    }

    fn graph(&self) -> &Graph {
        &self.solved.graph
    }

    pub fn value_at_position(&self) -> f64 {
        self.solved
            .values
            .value(&self.position)
            .expect("session positions are valid")
    }

    /// Legal destinations per human token (one list per cop, or one list
    /// for the robber).
    pub fn legal_moves(&self) -> Vec<Vec<String>> {
        let g = self.graph();
        let tokens: Vec<Node> = match self.human {
            Side::Cop => self.position.cops.clone(),
            Side::Robber => vec![self.position.robber],
        };
        tokens
            .into_iter()
            .map(|t| g.closed(t).iter().map(|&u| g.label(u).to_string()).collect())
            .collect()
    }

    /// The engine's mix at the current position. Where the solver has no
    /// mix (infinite value, only reachable in forced sessions) the engine
    /// moves uniformly at random.
    pub fn engine_distribution(&self) -> Distribution {
        let engine = self.human.other();
        let p = &self.position;
        if p.is_capture() {
            return match engine {
                Side::Cop => Distribution::point(p.cops.clone()),
                Side::Robber => Distribution::point(vec![p.robber]),
            };
        }
        match self.solved.strategies.get(p, engine) {
            Ok(d) => d.clone(),
            Err(_) => Distribution::uniform(match engine {
                Side::Cop => joint_cop_moves(self.graph(), &p.cops),
                Side::Robber => self.graph().closed(p.robber).iter().map(|&y| vec![y]).collect(),
            }),
        }
    }

    /// Checks a human move given as labels, one per human token.
    pub fn parse_move(&self, labels: &[String]) -> Result<Vec<Node>, SessionError> {
        let g = self.graph();
        let tokens: Vec<Node> = match self.human {
            Side::Cop => self.position.cops.clone(),
            Side::Robber => vec![self.position.robber],
        };
        if labels.len() != tokens.len() {
            return Err(SessionError::BadRequest(format!(
                "expected {} node(s) in the move, got {}",
                tokens.len(),
                labels.len()
            )));
        }
        labels
            .iter()
            .zip(tokens)
            .map(|(l, t)| {
                let to = g.node(l).map_err(|e| SessionError::BadRequest(e.to_string()))?;
                if !g.in_closed_neighborhood(t, to) {
                    return Err(SessionError::IllegalMove(format!(
                        "{} cannot move from {} to {}",
                        if self.human == Side::Cop { "a cop" } else { "the robber" },
                        g.label(t),
                        l
                    )));
                }
                Ok(to)
            })
            .collect()
    }

    /// Plays one round. `expected_round`, when given, must be the round
    /// about to be played.
    pub fn submit(&mut self, labels: &[String], expected_round: Option<u32>) -> Result<RoundOutcome, SessionError> {
        if self.captured() {
            return Err(SessionError::Conflict("the robber has already been caught".into()));
        }
        if let Some(r) = expected_round {
            if r != self.round + 1 {
                return Err(SessionError::Conflict(format!(
                    "move is for round {r}, but round {} is being played",
                    self.round + 1
                )));
            }
        }
        let human_move = self.parse_move(labels)?;
        let engine_move = self.draw_engine_move();
        let (cop_move, robber_move) = match self.human {
            Side::Cop => (human_move.clone(), engine_move.clone()),
            Side::Robber => (engine_move.clone(), human_move.clone()),
        };
        let step = cccr_transition(self.graph(), &self.position, &cop_move, robber_move[0])?;
        self.round += 1;
        let captured = step.captured();
        self.position = step.next;
        if captured {
            self.capture_round = Some(self.round);
            self.en_passant = step.en_passant;
        }
        let g = self.graph();
        let names = |m: &[Node]| m.iter().map(|&u| g.label(u).to_string()).collect::<Vec<_>>();
        let record = RoundRecord {
            round: self.round,
            human_move: names(&human_move),
            engine_move: names(&engine_move),
            position: PositionView::new(g, &self.position),
            captured,
            en_passant: step.en_passant,
        };
        self.history.push(record.clone());
        Ok(RoundOutcome {
            position: record.position,
            round: self.round,
            captured: record.captured,
            en_passant: record.en_passant,
            human_move: record.human_move,
            engine_move: record.engine_move,
            value_at_position: Extended(self.value_at_position()),
            legal_moves: self.legal_moves(),
        })
    }

    /// Deliberately takes no human input.
    fn draw_engine_move(&mut self) -> Vec<Node> {
        let dist = self.engine_distribution();
        let u: f64 = self.rng.gen();
        dist.sample_with(u).clone()
    }

    /// Read-only snapshot with the what-if annotations.
    pub fn view(&self) -> SessionView {
        let g = self.graph();
        let names = |m: &[Node]| m.iter().map(|&u| g.label(u).to_string()).collect::<Vec<_>>();
        let engine = self.engine_distribution();
        let engine_mix = engine
            .support()
            .map(|(m, p)| MoveProbView { mv: names(m), prob: *p })
            .collect();
        let what_if = if self.captured() {
            Vec::new()
        } else {
            let human_moves: Vec<Vec<Node>> = match self.human {
                Side::Cop => joint_cop_moves(g, &self.position.cops),
                Side::Robber => g.closed(self.position.robber).iter().map(|&y| vec![y]).collect(),
            };
            human_moves
                .iter()
                .map(|hm| WhatIf {
                    human_move: names(hm),
                    outcomes: engine
                        .support()
                        .map(|(em, prob)| {
                            let (cm, rm) = match self.human {
                                Side::Cop => (hm, em),
                                Side::Robber => (em, hm),
                            };
                            let step = cccr_transition(g, &self.position, cm, rm[0]).expect("legal moves");
                            WhatIfOutcome {
                                engine_move: names(em),
                                prob: *prob,
                                value: Extended(self.solved.values.value(&step.next).expect("valid")),
                                captured: step.captured(),
                            }
                        })
                        .collect(),
                })
                .collect()
        };
        let heatmap = (0..g.node_count())
            .map(|y| HeatCell {
                robber: g.label(y).to_string(),
                value: Extended(
                    self.solved
                        .values
                        .value(&Placement::new(self.position.cops.clone(), y))
                        .expect("valid"),
                ),
            })
            .collect();
        SessionView {
            session_id: self.id,
            graph: GraphView::new(g),
            cops: self.solved.cops(),
            human_side: self.human,
            position: PositionView::new(g, &self.position),
            round: self.round,
            captured: self.captured(),
            en_passant: self.en_passant,
            capture_round: self.capture_round,
            value_at_position: Extended(self.value_at_position()),
            legal_moves: self.legal_moves(),
            engine_mix,
            what_if,
            heatmap,
            history: self.history.clone(),
        }
    }
}

fn random_start(solved: &Solved, rng: &mut ChaCha8Rng) -> Placement {
    let space = solved.values.space();
    let open: Vec<usize> = (0..space.len()).filter(|&i| !space.is_capture(i)).collect();
    let finite: Vec<usize> = open
        .iter()
        .copied()
        .filter(|&i| solved.values.values()[i].is_finite())
        .collect();
    let pool = if finite.is_empty() { &open } else { &finite };
    space.decode(pool[rng.gen_range(0..pool.len())])
}

/// Solved arenas keyed by graph fingerprint, cop count and tolerance.
pub type SolveKey = (String, usize, u64);

pub fn solve_key(g: &Graph, cops: usize, tol: f64) -> SolveKey {
    (g.fingerprint(), cops, tol.to_bits())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cccr::generate;

    fn solved(spec: &str, k: usize) -> Arc<Solved> {
        Arc::new(Solved::new(generate(spec).unwrap(), k, 1e-2).unwrap())
    }

    fn at(cops: &[&str], robber: &str) -> Start {
        Start::At(PositionView {
            cops: cops.iter().map(|s| s.to_string()).collect(),
            robber: robber.into(),
        })
    }

    fn mv(labels: &[&str]) -> Vec<String> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn swap_on_p2_is_reported() {
        let mut s = Session::new(solved("path:2", 1), Side::Robber, &at(&["1"], "2"), 5, false).unwrap();
        let out = s.submit(&mv(&["1"]), None).unwrap();
        assert_eq!(out.engine_move, mv(&["2"]));
        assert!(out.captured && out.en_passant);
        assert_eq!(out.position, PositionView { cops: mv(&["2"]), robber: "2".into() });
        assert!(matches!(s.submit(&mv(&["2"]), None), Err(SessionError::Conflict(_))));
    }

    #[test]
    fn illegal_and_malformed_moves() {
        let mut s = Session::new(solved("path:5", 1), Side::Robber, &at(&["1"], "3"), 5, false).unwrap();
        assert!(matches!(s.submit(&mv(&["5"]), None), Err(SessionError::IllegalMove(_))));
        assert!(matches!(s.submit(&mv(&["9"]), None), Err(SessionError::BadRequest(_))));
        assert!(matches!(s.submit(&mv(&["3", "4"]), None), Err(SessionError::BadRequest(_))));
        assert!(matches!(s.submit(&mv(&["4"]), Some(2)), Err(SessionError::Conflict(_))));
        assert_eq!(s.round(), 0);
        s.submit(&mv(&["4"]), Some(1)).unwrap();
        assert_eq!(s.round(), 1);
    }

    #[test]
    fn too_few_cops_need_force() {
        let arena = solved("cycle:4", 1);
        assert!(matches!(
            Session::new(arena.clone(), Side::Robber, &Start::default(), 1, false),
            Err(SessionError::Conflict(_))
        ));
        let s = Session::new(arena, Side::Robber, &at(&["1"], "3"), 1, true).unwrap();
        assert!(s.value_at_position().is_infinite());
        // The engine cop still moves somewhere legal.
        assert_eq!(s.engine_distribution().entries.len(), 3);
    }

    #[test]
    fn random_starts_are_open_and_reproducible() {
        let arena = solved("gavenciak", 1);
        let a = Session::new(arena.clone(), Side::Cop, &Start::default(), 99, false).unwrap();
        let b = Session::new(arena, Side::Cop, &Start::default(), 99, false).unwrap();
        assert_eq!(a.position(), b.position());
        assert!(!a.position().is_capture());
    }

    #[test]
    fn views_are_stable_and_annotated() {
        let s = Session::new(solved("clique:3", 1), Side::Robber, &at(&["3"], "1"), 3, false).unwrap();
        let v = s.view();
        assert_eq!(v, s.view());
        assert_eq!(v.legal_moves, vec![mv(&["1", "2", "3"])]);
        assert_eq!(v.what_if.len(), 3);
        assert_eq!(v.heatmap.len(), 3);
        let total: f64 = v.engine_mix.iter().map(|m| m.prob).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn human_cops_move_every_token() {
        let mut s = Session::new(solved("cycle:4", 2), Side::Cop, &at(&["1", "1"], "3"), 3, false).unwrap();
        assert_eq!(s.legal_moves().len(), 2);
        let out = s.submit(&mv(&["2", "4"]), None).unwrap();
        assert_eq!(out.round, 1);
    }
}
