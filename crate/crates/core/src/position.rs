//! Cop/robber placements and their dense encoding.

use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::graph::{Graph, Node};

/// Positions above this count are refused by the table-based solvers.
pub const MAX_POSITIONS: u128 = 1 << 26;

/// Locations of `K` cops and one robber.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub cops: Vec<Node>,
    pub robber: Node,
}

impl Placement {
    pub fn new(cops: impl Into<Vec<Node>>, robber: Node) -> Self {
        Self {
            cops: cops.into(),
            robber,
        }
    }

    /// Builds a placement from node labels.
    pub fn from_labels<S: AsRef<str>>(g: &Graph, cops: &[S], robber: &str) -> Result<Self, GameError> {
        let cops = cops
            .iter()
            .map(|c| g.node(c.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(cops, g.node(robber)?))
    }

    /// True when some cop shares the robber's node.
    pub fn is_capture(&self) -> bool {
        self.cops.contains(&self.robber)
    }

    pub fn validate(&self, g: &Graph, k: usize) -> Result<(), GameError> {
        if self.cops.len() != k {
            return Err(GameError::CopArity {
                expected: k,
                got: self.cops.len(),
            });
        }
        for &c in &self.cops {
            g.check(c)?;
        }
        g.check(self.robber)?;
        Ok(())
    }

    pub fn cop_labels(&self, g: &Graph) -> Vec<String> {
        self.cops.iter().map(|&c| g.label(c).to_string()).collect()
    }
}

/// Mixed-radix indexing of `V^K × V`: cops are the high digits, the robber
/// the lowest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositionSpace {
    n: usize,
    k: usize,
    len: usize,
}

impl PositionSpace {
    pub fn new(n: usize, k: usize) -> Result<Self, GameError> {
        if k == 0 {
            return Err(GameError::NoCops);
        }
        let len = (n as u128).pow(k as u32 + 1);
        if len > MAX_POSITIONS {
            return Err(GameError::TooLarge(len));
        }
        Ok(Self {
            n,
            k,
            len: len as usize,
        })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn cops(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn encode(&self, p: &Placement) -> usize {
        self.encode_parts(&p.cops, p.robber)
    }

    pub fn encode_parts(&self, cops: &[Node], robber: Node) -> usize {
        debug_assert_eq!(cops.len(), self.k);
        let mut idx = 0;
        for &c in cops {
            idx = idx * self.n + c;
        }
        idx * self.n + robber
    }

    /// Index of the cop tuple alone, in `0..n^K`.
    pub fn encode_cops(&self, cops: &[Node]) -> usize {
        cops.iter().fold(0, |acc, &c| acc * self.n + c)
    }

    pub fn decode_cops(&self, mut idx: usize) -> Vec<Node> {
        let mut cops = vec![0; self.k];
        for slot in cops.iter_mut().rev() {
            *slot = idx % self.n;
            idx /= self.n;
        }
        cops
    }

    pub fn decode(&self, idx: usize) -> Placement {
        Placement {
            cops: self.decode_cops(idx / self.n),
            robber: idx % self.n,
        }
    }

    pub fn is_capture(&self, idx: usize) -> bool {
        let robber = idx % self.n;
        let mut rest = idx / self.n;
        for _ in 0..self.k {
            if rest % self.n == robber {
                return true;
            }
            rest /= self.n;
        }
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = Placement> + '_ {
        (0..self.len).map(|i| self.decode(i))
    }
}

/// All joint moves of a cop tuple: the product of the cops' closed
/// neighbourhoods, in lexicographic order of node indices.
pub fn joint_cop_moves(g: &Graph, cops: &[Node]) -> Vec<Vec<Node>> {
    let mut out: Vec<Vec<Node>> = vec![Vec::with_capacity(cops.len())];
    for &c in cops {
        let nbhd = g.closed(c);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                nbhd.iter().map(move |&m| {
                    let mut next = prefix.clone();
                    next.push(m);
                    next
                })
            })
            .collect();
    }
    out
}
