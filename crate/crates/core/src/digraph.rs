//! Communication topology.
//!
//! A [`Digraph`] stores directed links `from -> to` (the sender `from` can
//! transmit to the receiver `to`). Self-loops are never stored; every node
//! implicitly keeps a share of its own value when it broadcasts, which is
//! what [`WeightMatrix`] encodes.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out_neighbors: Vec<Vec<usize>>,
    in_neighbors: Vec<Vec<usize>>,
}

impl Digraph {
    /// Builds a graph from `(from, to)` pairs. Duplicates are merged and
    /// self-loops rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::TooFewNodes { min: 1, got: 0 });
        }
        let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (from, to) in edges {
            if from >= n || to >= n || from == to {
                return Err(Error::InvalidEdge { from, to, n });
            }
            out[from].insert(to);
        }
        let mut in_neighbors = vec![Vec::new(); n];
        for (from, targets) in out.iter().enumerate() {
            for &to in targets {
                in_neighbors[to].push(from);
            }
        }
        let out_neighbors = out.into_iter().map(|s| s.into_iter().collect()).collect();
        Ok(Self {
            n,
            out_neighbors,
            in_neighbors,
        })
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes { min: 2, got: n });
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::from_edges(
            n,
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))),
        )
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_neighbors.iter().map(Vec::len).sum()
    }

    /// Receivers of `node`, ascending.
    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out_neighbors[node]
    }

    /// Senders to `node`, ascending.
    pub fn in_neighbors(&self, node: usize) -> &[usize] {
        &self.in_neighbors[node]
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_neighbors[node].len()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out_neighbors[from].binary_search(&to).is_ok()
    }

    /// All links as `(from, to)`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_neighbors
            .iter()
            .enumerate()
            .flat_map(|(from, targets)| targets.iter().map(move |&to| (from, to)))
    }

    fn bfs(&self, source: usize, forward: bool) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            let next = if forward {
                &self.out_neighbors[u]
            } else {
                &self.in_neighbors[u]
            };
            for &v in next {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Forward reachability from node 0 plus reachability on the transpose.
    pub fn is_strongly_connected(&self) -> bool {
        self.bfs(0, true).iter().all(Option::is_some)
            && self.bfs(0, false).iter().all(Option::is_some)
    }

    /// Longest shortest directed path over all ordered pairs.
    pub fn diameter(&self) -> Result<usize> {
        let mut diameter = 0;
        for source in 0..self.n {
            for d in self.bfs(source, true) {
                diameter = diameter.max(d.ok_or(Error::NotStronglyConnected)?);
            }
        }
        Ok(diameter)
    }

    /// Edge-list text: first line `n`, then one `to from` line per link.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (from, to) in self.edges() {
            let _ = writeln!(out, "{to} {from}");
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing node count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad node count {header:?}"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            let parsed: Vec<usize> = fields.iter().filter_map(|f| f.parse().ok()).collect();
            if fields.len() != 2 || parsed.len() != 2 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected `receiver sender`, got {l:?}"),
                });
            }
            edges.push((parsed[1], parsed[0]));
        }
        Self::from_edges(n, edges)
    }
}

/// Hamiltonian cycle `0 -> 1 -> ... -> n-1 -> 0` plus every other ordered
/// pair independently with probability `extra_edge_prob`.
pub fn random_strongly_connected(n: usize, extra_edge_prob: f64, seed: u64) -> Result<Digraph> {
    if n < 2 {
        return Err(Error::TooFewNodes { min: 2, got: n });
    }
    if !(0.0..=1.0).contains(&extra_edge_prob) {
        return Err(Error::InvalidProbability(extra_edge_prob));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for from in 0..n {
        for to in 0..n {
            if to == from || to == (from + 1) % n {
                continue;
            }
            if rng.random_bool(extra_edge_prob) {
                edges.push((from, to));
            }
        }
    }
    Digraph::from_edges(n, edges)
}

/// Column-stochastic weights `p[l][j] = 1 / (1 + outdeg(j))` for every
/// receiver `l` of `j` and for `l == j`.
///
/// Only the per-sender weight is stored; each sender scales its own
/// broadcast, so no node needs anything beyond its out-degree.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    sender_weight: Vec<f64>,
    out_neighbors: Vec<Vec<usize>>,
}

pub fn build_weights(g: &Digraph) -> WeightMatrix {
    WeightMatrix {
        sender_weight: (0..g.node_count())
            .map(|j| broadcast_weight(g.out_degree(j)))
            .collect(),
        out_neighbors: g.out_neighbors.clone(),
    }
}

/// Weight a sender with `out_degree` receivers attaches to each copy.
pub fn broadcast_weight(out_degree: usize) -> f64 {
    1.0 / (1.0 + out_degree as f64)
}

impl WeightMatrix {
    pub fn node_count(&self) -> usize {
        self.sender_weight.len()
    }

    /// The weight sender `j` applies to everything it transmits, itself included.
    pub fn sender_weight(&self, j: usize) -> f64 {
        self.sender_weight[j]
    }

    /// Entry `p[receiver][sender]`.
    pub fn entry(&self, receiver: usize, sender: usize) -> f64 {
        if receiver == sender || self.out_neighbors[sender].binary_search(&receiver).is_ok() {
            self.sender_weight[sender]
        } else {
            0.0
        }
    }

    /// Row-major dense copy, indexed `[receiver][sender]`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.node_count();
        (0..n)
            .map(|l| (0..n).map(|j| self.entry(l, j)).collect())
            .collect()
    }
}
