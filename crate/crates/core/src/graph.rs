// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Sampled graphs with node weights, and their plain-text dump format.
//!
//! ```text
//! # optional comment lines
//! n 4
//! w 0 1.5
//! w 1 1
//! ...
//! 0 1
//! 1 3
//! ```
//!
//! Edges are `u v` with `u < v`, 0-indexed. Weights use the shortest
//! representation that parses back to the same `f64`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Vec<f64>,
    /// Sorted neighbor lists, symmetric, no self-loops.
    adj: Vec<Vec<NodeId>>,
    seed: u64,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. Duplicate edges are merged.
    pub fn from_edges<I>(weights: Vec<f64>, edges: I, seed: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let n = weights.len();
        if let Some(w) = weights.iter().find(|w| !(**w >= 1.0)) {
            return Err(Error::Domain(format!("node weights must be >= 1, got {w}")));
        }
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u == v {
                return Err(Error::Domain(format!("self-loop at node {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::Domain(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(WeightedGraph { weights, adj, seed })
    }

    /// Builds from per-node forward neighbor lists (`v > u`, each sorted).
    pub(crate) fn from_forward_rows(
        weights: Vec<f64>,
        forward: Vec<Vec<NodeId>>,
        seed: u64,
    ) -> Self {
        let n = weights.len();
        let mut degree = vec![0usize; n];
        for (u, row) in forward.iter().enumerate() {
            degree[u] += row.len();
            for &v in row {
                degree[v as usize] += 1;
            }
        }
        let mut adj: Vec<Vec<NodeId>> = degree.iter().map(|&d| Vec::with_capacity(d)).collect();
        // visiting u in increasing order fills each list with its smaller
        // neighbors first, already sorted
        for (u, row) in forward.iter().enumerate() {
            for &v in row {
                adj[v as usize].push(u as NodeId);
            }
        }
        for (u, row) in forward.into_iter().enumerate() {
            adj[u].extend(row);
        }
        WeightedGraph { weights, adj, seed }
    }

    /// Graph on `n` unit-weight nodes.
    pub fn unweighted<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        Self::from_edges(vec![1.0; n], edges, 0)
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n as NodeId).flat_map(|u| (u + 1..n as NodeId).map(move |v| (u, v)));
        Self::unweighted(n, edges).expect("complete graph is valid")
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u as usize]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u as usize].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as NodeId;
            list.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Relabels node `u` as `perm[u]`.
    pub fn permuted(&self, perm: &[NodeId]) -> Result<Self> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::Domain(
                "permutation length differs from node count".into(),
            ));
        }
        let mut weights = vec![0.0; n];
        for (u, &p) in perm.iter().enumerate() {
            weights[p as usize] = self.weights[u];
        }
        let edges: Vec<_> = self
            .edges()
            .map(|(u, v)| (perm[u as usize], perm[v as usize]))
            .collect();
        Self::from_edges(weights, edges, self.seed)
    }

    /// Text dump; `header` lines are written as `# ...` comments first.
    pub fn to_text(&self, header: &[String]) -> String {
        let mut out = String::with_capacity(16 * (self.node_count() + self.edge_count()) + 64);
        for line in header {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "# seed {}", self.seed);
        let _ = writeln!(out, "n {}", self.node_count());
        for (i, w) in self.weights.iter().enumerate() {
            let _ = writeln!(out, "w {i} {w}");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut seed = 0u64;
        let mut weights: Vec<f64> = Vec::new();
        let mut edges = Vec::new();
        let bad = |lineno: usize, msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(s) = comment.trim().strip_prefix("seed ") {
                    seed = s.trim().parse().map_err(|_| bad(lineno, "bad seed"))?;
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["n", count] => {
                    if n.is_some() {
                        return Err(bad(lineno, "duplicate node count"));
                    }
                    let count: usize = count.parse().map_err(|_| bad(lineno, "bad node count"))?;
                    n = Some(count);
                    weights = vec![f64::NAN; count];
                }
                ["w", i, value] => {
                    let n = n.ok_or_else(|| bad(lineno, "weight before node count"))?;
                    let i: usize = i.parse().map_err(|_| bad(lineno, "bad node index"))?;
                    if i >= n {
                        return Err(bad(lineno, "weight index out of range"));
                    }
                    weights[i] = value.parse().map_err(|_| bad(lineno, "bad weight"))?;
                }
                [u, v] => {
                    if n.is_none() {
                        return Err(bad(lineno, "edge before node count"));
                    }
                    let u: NodeId = u.parse().map_err(|_| bad(lineno, "bad node id"))?;
                    let v: NodeId = v.parse().map_err(|_| bad(lineno, "bad node id"))?;
                    if u >= v {
                        return Err(bad(lineno, "edges must be written with u < v"));
                    }
                    edges.push((u, v));
                }
                _ => return Err(bad(lineno, "unrecognised line")),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing 'n <count>' line".into()))?;
        // weights are optional; unweighted dumps default to 1
        for w in &mut weights {
            if w.is_nan() {
                *w = 1.0;
            }
        }
        debug_assert_eq!(weights.len(), n);
        Self::from_edges(weights, edges, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_without_loops() {
        let g = WeightedGraph::unweighted(4, [(0, 1), (2, 1), (1, 0), (3, 2)]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.has_edge(1, 2) && g.has_edge(2, 1));
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(WeightedGraph::unweighted(3, [(1, 1)]).is_err());
        assert!(WeightedGraph::unweighted(3, [(1, 3)]).is_err());
        assert!(WeightedGraph::from_edges(vec![0.5], [], 0).is_err());
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let weights = vec![
            1.0,
            2.5,
            1.0000000000000002,
            123456.789e3,
            std::f64::consts::PI,
        ];
        let g = WeightedGraph::from_edges(weights, [(0, 4), (1, 2), (2, 4), (3, 4)], 99).unwrap();
        let text = g.to_text(&["test".to_string()]);
        let back = WeightedGraph::from_text(&text).unwrap();
        assert_eq!(back, g);
        for (a, b) in back.weights().iter().zip(g.weights()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.to_text(&["test".to_string()]), text);
        assert!(text.lines().any(|l| l == "n 5"));
    }

    #[test]
    fn malformed_text() {
        assert!(WeightedGraph::from_text("0 1\n").is_err());
        assert!(WeightedGraph::from_text("n 3\n2 1\n").is_err());
        assert!(WeightedGraph::from_text("n 3\nw 5 1.0\n").is_err());
        assert!(WeightedGraph::from_text("").is_err());
        let g = WeightedGraph::from_text("n 3\n0 1\n").unwrap();
        assert_eq!(g.weights(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn forward_rows_match_edge_list() {
        let g = WeightedGraph::from_forward_rows(
            vec![1.0; 4],
            vec![vec![1, 3], vec![2], vec![3], vec![]],
            0,
        );
        let h = WeightedGraph::unweighted(4, [(0, 1), (0, 3), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g, h);
    }
}
