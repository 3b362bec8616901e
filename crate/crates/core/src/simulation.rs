//! Seeded episodes and the strategies that drive them.
//!
//! Randomness is ChaCha8. An episode seed `s` gives the cops stream 0 and
//! the robber stream 1 of `ChaCha8Rng::seed_from_u64(s)`; each side draws
//! exactly one uniform per round, whatever its distribution looks like, so
//! the two draws can never influence each other. Batch runs derive
//! episode `i`'s seed as the first word of stream `i` of the batch seed.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::concurrent::{step_unchecked, Distribution, MixedStrategyTable, Move};
use crate::error::GameError;
use crate::graph::{Graph, Node};
use crate::position::{joint_cop_moves, Placement};
use crate::turn_based::{extract_cop_strategy, extract_robber_strategy, CopwinTable, DeterministicStrategy, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    MixedTable,
    GuessingCop,
    DelayedEvasion,
    UniformRandom,
    Stationary,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::MixedTable,
        StrategyKind::GuessingCop,
        StrategyKind::DelayedEvasion,
        StrategyKind::UniformRandom,
        StrategyKind::Stationary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::MixedTable => "mixed-table",
            StrategyKind::GuessingCop => "guessing-cop",
            StrategyKind::DelayedEvasion => "delayed-evasion",
            StrategyKind::UniformRandom => "uniform-random",
            StrategyKind::Stationary => "stationary",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GameError::InvalidParameter(format!("unknown strategy kind '{s}'")))
    }
}

#[derive(Clone, Debug)]
enum Policy {
    Mixed(Arc<MixedStrategyTable>),
    Guessing(Arc<DeterministicStrategy>),
    Delayed(Arc<DeterministicStrategy>),
    Uniform,
    Stationary,
}

/// A memoryless (apart from the round number) randomized strategy for one
/// side. Wherever the underlying table has nothing to say — capture
/// positions, infinite-value positions, positions outside a deterministic
/// strategy's domain — the side stays put.
#[derive(Clone, Debug)]
pub struct StrategyHandle {
    side: Side,
    policy: Policy,
}

impl StrategyHandle {
    /// Plays the solver's optimal mix for `side`.
    pub fn mixed(table: Arc<MixedStrategyTable>, side: Side) -> Self {
        Self {
            side,
            policy: Policy::Mixed(table),
        }
    }

    pub fn uniform_random(side: Side) -> Self {
        Self {
            side,
            policy: Policy::Uniform,
        }
    }

    pub fn stationary(side: Side) -> Self {
        Self {
            side,
            policy: Policy::Stationary,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn kind(&self) -> StrategyKind {
        match self.policy {
            Policy::Mixed(_) => StrategyKind::MixedTable,
            Policy::Guessing(_) => StrategyKind::GuessingCop,
            Policy::Delayed(_) => StrategyKind::DelayedEvasion,
            Policy::Uniform => StrategyKind::UniformRandom,
            Policy::Stationary => StrategyKind::Stationary,
        }
    }

    /// The move distribution at `p` in `round` (the first round is 1).
    /// Always supported on legal moves of `p`.
    pub fn distribution(&self, g: &Graph, p: &Placement, round: u32) -> Distribution {
        let stay = || match self.side {
            Side::Cop => Distribution::point(p.cops.clone()),
            Side::Robber => Distribution::point(vec![p.robber]),
        };
        if p.is_capture() {
            return stay();
        }
        match &self.policy {
            Policy::Stationary => stay(),
            Policy::Uniform => Distribution::uniform(match self.side {
                Side::Cop => joint_cop_moves(g, &p.cops),
                Side::Robber => g.closed(p.robber).iter().map(|&y| vec![y]).collect(),
            }),
            Policy::Mixed(table) => table.get(p, self.side).cloned().unwrap_or_else(|_| stay()),
            Policy::Guessing(sigma) => {
                // Guess the robber's next node uniformly, then answer as if
                // it were known.
                let guesses = g.closed(p.robber);
                let weight = 1.0 / guesses.len() as f64;
                let mut entries: Vec<(Move, f64)> = Vec::new();
                for &guess in guesses {
                    let mv = match p.cops.iter().position(|&c| c == guess) {
                        // A guess that walks into a cop is caught either
                        // way; swapping onto the robber also catches it
                        // standing still.
                        Some(i) => {
                            let mut mv = p.cops.clone();
                            mv[i] = p.robber;
                            mv
                        }
                        None => sigma
                            .get(&Placement::new(p.cops.clone(), guess))
                            .map(<[Node]>::to_vec)
                            .unwrap_or_else(|_| p.cops.clone()),
                    };
                    match entries.iter_mut().find(|(m, _)| *m == mv) {
                        Some((_, w)) => *w += weight,
                        None => entries.push((mv, weight)),
                    }
                }
                Distribution { entries }
            }
            Policy::Delayed(sigma) => {
                if round <= 1 {
                    return stay();
                }
                match sigma.get(p) {
                    Ok(mv) => Distribution::point(mv.to_vec()),
                    Err(_) => stay(),
                }
            }
        }
    }
}

/// The randomized cop strategy that guesses the robber's move uniformly
/// from its closed neighbourhood and replies with the alternating game's
/// rank-decreasing move against the guess.
pub fn guessing_cop_strategy(table: &CopwinTable) -> Result<StrategyHandle, GameError> {
    if !table.cops_win() {
        return Err(GameError::InvalidParameter(format!(
            "the robber escapes {} cop(s); no guessing strategy exists",
            table.cops()
        )));
    }
    Ok(StrategyHandle {
        side: Side::Cop,
        policy: Policy::Guessing(Arc::new(extract_cop_strategy(table))),
    })
}

/// The robber strategy that stays put for one round and then plays the
/// alternating game's escaping reply to the current position, i.e. one
/// round behind the cops.
pub fn delayed_evasion_strategy(table: &CopwinTable) -> Result<StrategyHandle, GameError> {
    let sigma = extract_robber_strategy(table)?;
    Ok(StrategyHandle {
        side: Side::Robber,
        policy: Policy::Delayed(Arc::new(sigma)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EpisodeTrace {
    /// Position before round 1, then after each round. Ends at capture or
    /// at the horizon, whichever comes first.
    pub positions: Vec<Placement>,
    pub capture_round: Option<u32>,
    pub en_passant: bool,
    pub seed: u64,
}

impl EpisodeTrace {
    /// Robber payoff: rounds spent outside capture, counting round zero.
    pub fn payoff(&self) -> u32 {
        self.positions.iter().filter(|p| !p.is_capture()).count() as u32
    }

    pub fn truncated(&self) -> bool {
        self.capture_round.is_none()
    }

    /// One JSON record per position, labels instead of indices.
    pub fn to_json_lines(&self, g: &Graph) -> String {
        let last = self.positions.len() - 1;
        self.positions
            .iter()
            .enumerate()
            .map(|(round, p)| {
                serde_json::json!({
                    "round": round,
                    "cops": p.cop_labels(g),
                    "robber": g.label(p.robber),
                    "captured": p.is_capture(),
                    "en_passant": self.en_passant && round == last && self.capture_round.is_some(),
                })
                .to_string()
                    + "\n"
            })
            .collect()
    }
}

/// Plays up to `horizon` rounds from `start`.
pub fn run_episode(
    g: &Graph,
    cop: &StrategyHandle,
    robber: &StrategyHandle,
    start: &Placement,
    horizon: u32,
    seed: u64,
) -> Result<EpisodeTrace, GameError> {
    if cop.side() != Side::Cop || robber.side() != Side::Robber {
        return Err(GameError::InvalidParameter("strategy handles are for the wrong sides".into()));
    }
    if horizon == 0 {
        return Err(GameError::InvalidParameter("horizon must be at least 1".into()));
    }
    start.validate(g, start.cops.len())?;

    let mut cop_rng = ChaCha8Rng::seed_from_u64(seed);
    cop_rng.set_stream(0);
    let mut robber_rng = ChaCha8Rng::seed_from_u64(seed);
    robber_rng.set_stream(1);

    let mut positions = vec![start.clone()];
    let (mut capture_round, mut en_passant) = (start.is_capture().then_some(0), false);
    let mut round = 0;
    while capture_round.is_none() && round < horizon {
        round += 1;
        let p = positions.last().expect("trace is never empty");
        let cop_dist = cop.distribution(g, p, round);
        let robber_dist = robber.distribution(g, p, round);
        let cop_move = cop_dist.sample_with(cop_rng.gen::<f64>());
        let robber_move = robber_dist.sample_with(robber_rng.gen::<f64>());
        let step = step_unchecked(g, p, cop_move, robber_move[0]);
        if step.captured() {
            capture_round = Some(round);
            en_passant = step.en_passant;
        }
        positions.push(step.next);
    }
    Ok(EpisodeTrace {
        positions,
        capture_round,
        en_passant,
        seed,
    })
}

/// Seed of episode `i` in a batch seeded with `seed`.
pub fn episode_seed(seed: u64, i: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng.next_u64()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub episodes: u64,
    /// Episodes that hit the horizon uncaptured; their payoff is the
    /// truncated sum.
    pub truncated: u64,
    pub truncated_fraction: f64,
    /// Captures that happened by swapping.
    pub en_passant: u64,
}

/// Monte Carlo estimate of the robber's expected payoff.
pub fn estimate_value(
    g: &Graph,
    cop: &StrategyHandle,
    robber: &StrategyHandle,
    start: &Placement,
    episodes: u64,
    horizon: u32,
    seed: u64,
) -> Result<Estimate, GameError> {
    if episodes == 0 {
        return Err(GameError::InvalidParameter("episodes must be at least 1".into()));
    }
    let outcomes = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let t = run_episode(g, cop, robber, start, horizon, episode_seed(seed, i))?;
            Ok((f64::from(t.payoff()), t.truncated(), t.en_passant))
        })
        .collect::<Result<Vec<_>, GameError>>()?;
    let payoffs: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let n = episodes as f64;
    let mean = pairwise_sum(&payoffs) / n;
    let squares: Vec<f64> = payoffs.iter().map(|x| (x - mean).powi(2)).collect();
    let stderr = if episodes > 1 {
        (pairwise_sum(&squares) / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let truncated = outcomes.iter().filter(|o| o.1).count() as u64;
    Ok(Estimate {
        mean,
        stderr,
        episodes,
        truncated,
        truncated_fraction: truncated as f64 / n,
        en_passant: outcomes.iter().filter(|o| o.2).count() as u64,
    })
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Upper envelope on the probability that the guessing cops have not
/// caught the robber after `blocks` blocks of `horizon` rounds on a graph
/// with `nodes` nodes: each block succeeds with probability at least
/// `(1/nodes)^horizon`.
pub fn survival_bound(horizon: u32, nodes: usize, blocks: u32) -> f64 {
    let per_block = (1.0 / nodes as f64).powi(horizon as i32);
    (1.0 - per_block).powi(blocks as i32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvasionReport {
    /// First round in which some cop play catches the robber.
    pub capture_round: Option<u32>,
    pub en_passant: bool,
    /// Distinct positions reachable within the horizon.
    pub reachable: usize,
}

impl EvasionReport {
    pub fn evaded(&self) -> bool {
        self.capture_round.is_none()
    }
}

/// Plays `robber` against every cop move sequence of up to `rounds`
/// rounds at once, following the set of reachable positions. Every move in
/// the robber's support is explored too, so a randomized robber must
/// survive all of its draws.
pub fn exhaustive_evasion(
    g: &Graph,
    robber: &StrategyHandle,
    start: &Placement,
    rounds: u32,
) -> Result<EvasionReport, GameError> {
    if robber.side() != Side::Robber {
        return Err(GameError::InvalidParameter("expected a robber strategy".into()));
    }
    start.validate(g, start.cops.len())?;
    if start.is_capture() {
        return Ok(EvasionReport {
            capture_round: Some(0),
            en_passant: false,
            reachable: 1,
        });
    }
    let mut reached: HashSet<Placement> = HashSet::from([start.clone()]);
    // The robber's rule depends on the round only through round 1, so a
    // position expanded in a later round never needs expanding again.
    let mut expanded: HashSet<Placement> = HashSet::new();
    let mut frontier = vec![start.clone()];
    for round in 1..=rounds {
        let mut next = Vec::new();
        for p in &frontier {
            for (rm, _) in robber.distribution(g, p, round).support() {
                for cm in joint_cop_moves(g, &p.cops) {
                    let step = step_unchecked(g, p, &cm, rm[0]);
                    if step.captured() {
                        return Ok(EvasionReport {
                            capture_round: Some(round),
                            en_passant: step.en_passant,
                            reachable: reached.len(),
                        });
                    }
                    reached.insert(step.next.clone());
                    if !expanded.contains(&step.next) {
                        next.push(step.next);
                    }
                }
            }
        }
        next.sort();
        next.dedup();
        expanded.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(EvasionReport {
        capture_round: None,
        en_passant: false,
        reachable: reached.len(),
    })
}
