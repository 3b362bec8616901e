//! Arena graphs: undirected, simple and connected, with opaque node labels.
//!
//! Labels are kept for I/O only; every solver works on dense node indices
//! `0..n` in order of first appearance.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::GraphError;

/// A dense node index into a [`Graph`].
pub type Node = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, Node>,
    /// Sorted open neighborhoods.
    adjacency: Vec<Vec<Node>>,
    /// Sorted closed neighborhoods, `N[u]`.
    closed: Vec<Vec<Node>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from labelled edges. Node order is the order of first
    /// appearance; duplicate edges (in either orientation) are merged.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self, GraphError> {
        let mut builder = Builder::default();
        for (i, (u, v)) in edges.iter().enumerate() {
            builder.add_edge(u.as_ref(), v.as_ref(), i + 1)?;
        }
        builder.finish()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, u: Node) -> &str {
        &self.labels[u]
    }

    /// Resolves a label to its node index.
    pub fn node(&self, label: &str) -> Result<Node, GraphError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(label.to_string()))
    }

    pub fn contains(&self, u: Node) -> bool {
        u < self.labels.len()
    }

    pub(crate) fn check(&self, u: Node) -> Result<Node, GraphError> {
        if self.contains(u) {
            Ok(u)
        } else {
            Err(GraphError::UnknownNode(format!("#{u}")))
        }
    }

    pub fn neighbors(&self, u: Node) -> &[Node] {
        &self.adjacency[u]
    }

    pub fn is_adjacent(&self, u: Node, v: Node) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// `N[u]`: `u` together with its neighbours, sorted by index.
    pub fn closed_neighborhood(&self, u: Node) -> Result<&[Node], GraphError> {
        self.check(u)?;
        Ok(&self.closed[u])
    }

    /// Unchecked variant of [`Graph::closed_neighborhood`] for hot loops.
    /// Panics if `u` is not a node.
    pub fn closed(&self, u: Node) -> &[Node] {
        &self.closed[u]
    }

    pub fn in_closed_neighborhood(&self, u: Node, v: Node) -> bool {
        u == v || self.is_adjacent(u, v)
    }

    /// Breadth-first distances from `source` to every node.
    pub fn distances_from(&self, source: Node) -> Result<Vec<usize>, GraphError> {
        self.check(source)?;
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Shortest-path length between `u` and `v`.
    pub fn distance(&self, u: Node, v: Node) -> Result<usize, GraphError> {
        self.check(v)?;
        Ok(self.distances_from(u)?[v])
    }

    /// Edges as index pairs `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(Node, Node)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        out
    }

    /// The graph in edge-list text format. Parsing the output yields an
    /// equal graph whenever node order matches first appearance.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&self.labels[u]);
            out.push(' ');
            out.push_str(&self.labels[v]);
            out.push('\n');
        }
        out
    }

    /// Content hash of the labelled graph (hex SHA-256 over the sorted
    /// labels and the sorted label pairs), independent of node order.
    pub fn fingerprint(&self) -> String {
        let mut labels: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        labels.sort_unstable();
        let mut edges: Vec<(&str, &str)> = self
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (self.label(u), self.label(v));
                if a <= b { (a, b) } else { (b, a) }
            })
            .collect();
        edges.sort_unstable();
        let mut hasher = Sha256::new();
        for label in labels {
            hasher.update(label.as_bytes());
            hasher.update([0u8]);
        }
        hasher.update([0xffu8]);
        for (a, b) in edges {
            hasher.update(a.as_bytes());
            hasher.update([0u8]);
            hasher.update(b.as_bytes());
            hasher.update([0u8]);
        }
        hex::encode(hasher.finalize())
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "graph with {} nodes and {} edges",
            self.node_count(),
            self.edge_count
        )
    }
}

#[derive(Default)]
struct Builder {
    labels: Vec<String>,
    index: HashMap<String, Node>,
    adjacency: Vec<Vec<Node>>,
}

impl Builder {
    fn intern(&mut self, label: &str) -> Node {
        if let Some(&u) = self.index.get(label) {
            return u;
        }
        let u = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), u);
        self.adjacency.push(Vec::new());
        u
    }

    fn add_edge(&mut self, a: &str, b: &str, line: usize) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop {
                line,
                label: a.to_string(),
            });
        }
        let u = self.intern(a);
        let v = self.intern(b);
        if !self.adjacency[u].contains(&v) {
            self.adjacency[u].push(v);
            self.adjacency[v].push(u);
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Graph, GraphError> {
        if self.labels.is_empty() {
            return Err(GraphError::Empty);
        }
        for nbrs in &mut self.adjacency {
            nbrs.sort_unstable();
        }
        let closed = self
            .adjacency
            .iter()
            .enumerate()
            .map(|(u, nbrs)| {
                let mut c = nbrs.clone();
                c.push(u);
                c.sort_unstable();
                c
            })
            .collect();
        let edge_count = self.adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        let g = Graph {
            labels: self.labels,
            index: self.index,
            adjacency: self.adjacency,
            closed,
            edge_count,
        };
        let dist = g.distances_from(0)?;
        if let Some(far) = dist.iter().position(|&d| d == usize::MAX) {
            return Err(GraphError::Disconnected {
                from: g.labels[0].clone(),
                to: g.labels[far].clone(),
            });
        }
        Ok(g)
    }
}

/// Parses whitespace-separated `u v` edge lines. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut builder = Builder::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => builder.add_edge(a, b, i + 1)?,
            _ => {
                return Err(GraphError::MalformedLine {
                    line: i + 1,
                    text: raw.to_string(),
                })
            }
        }
    }
    builder.finish()
}

const PAPER_TREE: [(u32, u32); 4] = [(1, 2), (1, 3), (3, 4), (3, 5)];

const GAVENCIAK: [(u32, u32); 17] = [
    (1, 2),
    (1, 3),
    (1, 5),
    (1, 6),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 4),
    (3, 6),
    (4, 5),
    (4, 6),
    (4, 7),
    (5, 7),
    (6, 7),
    (7, 8),
    (8, 9),
    (9, 10),
];

fn numbered(edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Graph, GraphError> {
    let edges: Vec<(String, String)> = edges
        .into_iter()
        .map(|(u, v)| (u.to_string(), v.to_string()))
        .collect();
    Graph::from_edges(&edges)
}

/// Builds a named graph: `path:n`, `cycle:n`, `clique:n`, `paper-tree` or
/// `gavenciak`. Nodes are labelled `1..=n`.
pub fn generate(spec: &str) -> Result<Graph, GraphError> {
    let bad = |why: &str| GraphError::BadGenerator {
        spec: spec.to_string(),
        reason: why.to_string(),
    };
    let spec_trim = spec.trim();
    match spec_trim {
        "paper-tree" => return numbered(PAPER_TREE),
        "gavenciak" => return numbered(GAVENCIAK),
        _ => {}
    }
    let (kind, size) = spec_trim
        .split_once(':')
        .ok_or_else(|| bad("expected kind:n, paper-tree or gavenciak"))?;
    let n: u32 = size
        .trim()
        .parse()
        .map_err(|_| bad("size is not a positive integer"))?;
    match kind.trim() {
        "path" => {
            if n < 2 {
                return Err(bad("path needs n >= 2"));
            }
            numbered((1..n).map(|i| (i, i + 1)))
        }
        "cycle" => {
            if n < 3 {
                return Err(bad("cycle needs n >= 3"));
            }
            numbered((1..n).map(|i| (i, i + 1)).chain([(n, 1)]))
        }
        "clique" => {
            if n < 2 {
                return Err(bad("clique needs n >= 2"));
            }
            numbered((1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))))
        }
        other => Err(bad(&format!("unknown generator kind '{other}'"))),
    }
}
