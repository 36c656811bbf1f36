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

//! Exact k-clique counting.
//!
//! Vertices are ranked by `(degree, id)` and every edge is oriented from
//! the lower to the higher rank. Each k-clique then has a unique
//! lowest-ranked root and is counted once by intersecting forward
//! neighborhoods depth by depth.

use std::time::Instant;

use rayon::prelude::*;

use crate::distribution::TailDistribution;
use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::rng::{derive_seed, StreamRole};
use crate::sampler::{edge_probability, sample_graph, SamplerConfig, SamplingMethod};

/// Largest clique size accepted by the counting API.
pub const MAX_K: usize = 12;
/// Subset budget of the enumeration oracles.
pub const MAX_SUBSETS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CliqueCensus {
    pub k: usize,
    pub count: u64,
    pub graph_seed: u64,
    /// Wall time in seconds.
    pub runtime: f64,
}

/// Number of `k`-vertex complete subgraphs of `graph`.
pub fn count_cliques(graph: &WeightedGraph, k: usize) -> Result<CliqueCensus> {
    if k == 0 || k > MAX_K {
        return Err(Error::InvalidParameter(format!(
            "clique size must satisfy 1 <= k <= {MAX_K}, got {k}"
        )));
    }
    let start = Instant::now();
    let n = graph.node_count();
    let count = match k {
        _ if k > n => 0,
        1 => n as u64,
        2 => graph.edge_count() as u64,
        _ => {
            let forward = orient(graph);
            (0..n)
                .into_par_iter()
                .map_init(
                    || vec![Vec::new(); k],
                    |scratch, u| count_from(&forward, &forward[u], k - 1, scratch),
                )
                .sum()
        }
    };
    Ok(CliqueCensus {
        k,
        count,
        graph_seed: graph.seed(),
        runtime: start.elapsed().as_secs_f64(),
    })
}

/// Forward adjacency under the `(degree, id)` ranking, sorted by node id.
fn orient(graph: &WeightedGraph) -> Vec<Vec<NodeId>> {
    let n = graph.node_count();
    let rank_key = |u: NodeId| (graph.degree(u), u);
    (0..n as NodeId)
        .into_par_iter()
        .map(|u| {
            let key = rank_key(u);
            graph
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&v| rank_key(v) > key)
                .collect()
        })
        .collect()
}

/// Counts `(depth + 1)`-cliques whose members beyond the root lie in
/// `candidates`, all mutually forward-reachable.
fn count_from(
    forward: &[Vec<NodeId>],
    candidates: &[NodeId],
    depth: usize,
    scratch: &mut [Vec<NodeId>],
) -> u64 {
    if depth == 1 {
        return candidates.len() as u64;
    }
    if candidates.len() < depth {
        return 0;
    }
    let (level, rest) = scratch.split_first_mut().expect("scratch depth");
    let mut total = 0;
    for &v in candidates {
        intersect_into(candidates, &forward[v as usize], level);
        if level.len() >= depth - 1 {
            let next = std::mem::take(level);
            total += count_from(forward, &next, depth - 1, rest);
            *level = next;
        }
    }
    total
}

fn intersect_into(a: &[NodeId], b: &[NodeId], out: &mut Vec<NodeId>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn check_subsets(n: usize, k: usize) -> Result<()> {
    let subsets = binomial(n as u64, k as u64);
    if subsets > MAX_SUBSETS {
        return Err(Error::Resource(format!(
            "C({n}, {k}) = {subsets} subsets exceeds the enumeration budget of {MAX_SUBSETS}"
        )));
    }
    Ok(())
}

/// Visits every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Test oracle: checks every `k`-subset.
pub fn brute_force_count(graph: &WeightedGraph, k: usize) -> Result<u64> {
    let n = graph.node_count();
    check_subsets(n, k)?;
    if k == 0 {
        return Ok(1);
    }
    let mut count = 0;
    for_each_subset(n, k, |s| {
        let complete = s.iter().enumerate().all(|(a, &u)| {
            s[a + 1..]
                .iter()
                .all(|&v| graph.has_edge(u as NodeId, v as NodeId))
        });
        count += complete as u64;
    });
    Ok(count)
}

/// Expected number of `k`-cliques given the weights: the sum over
/// `k`-subsets of the product of their pair probabilities.
pub fn expected_cliques_given_weights(weights: &[f64], mu: f64, n: usize, k: usize) -> Result<f64> {
    check_subsets(weights.len(), k)?;
    let mut total = 0.0;
    for_each_subset(weights.len(), k, |s| {
        let mut prod = 1.0;
        for (a, &u) in s.iter().enumerate() {
            for &v in &s[a + 1..] {
                prod *= edge_probability(weights[u], weights[v], mu, n);
            }
        }
        total += prod;
    });
    Ok(total)
}

/// Mean and standard error of the k-clique count over independent graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSummary {
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub counts: Vec<u64>,
}

/// Samples `replicas` graphs (replica `r` uses a seed derived from
/// `(seed, r)`) and summarises their `k`-clique counts.
pub fn mean_clique_count(
    dist: &TailDistribution,
    n: usize,
    k: usize,
    replicas: usize,
    seed: u64,
    method: SamplingMethod,
) -> Result<CountSummary> {
    if replicas < 2 {
        return Err(Error::InvalidParameter("need at least 2 replicas".into()));
    }
    let counts: Vec<u64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let config = SamplerConfig::new(n, derive_seed(seed, StreamRole::Replica, r))
                .with_method(method);
            let graph = sample_graph(dist, &config)?;
            Ok(count_cliques(&graph, k)?.count)
        })
        .collect::<Result<_>>()?;
    let len = replicas as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / len;
    let var = counts
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / (len - 1.0);
    Ok(CountSummary {
        mean,
        stderr: (var / len).sqrt(),
        replicas,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_and_empty() {
        let k5 = WeightedGraph::complete(5);
        assert_eq!(count_cliques(&k5, 3).unwrap().count, 10);
        assert_eq!(count_cliques(&k5, 5).unwrap().count, 1);
        assert_eq!(count_cliques(&k5, 6).unwrap().count, 0);
        let empty = WeightedGraph::unweighted(10, []).unwrap();
        assert_eq!(count_cliques(&empty, 2).unwrap().count, 0);
        assert_eq!(count_cliques(&empty, 1).unwrap().count, 10);
        assert!(count_cliques(&empty, 0).is_err());
        assert!(count_cliques(&empty, MAX_K + 1).is_err());
    }

    #[test]
    fn small_oracle_cases() {
        let triangle = WeightedGraph::unweighted(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(brute_force_count(&triangle, 3).unwrap(), 1);
        let path = WeightedGraph::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(brute_force_count(&path, 3).unwrap(), 0);
        // K6 minus an edge: 4-sets avoiding the missing pair
        let k6 = WeightedGraph::complete(6);
        let edges: Vec<_> = k6.edges().filter(|&e| e != (0, 1)).collect();
        let g = WeightedGraph::unweighted(6, edges).unwrap();
        let oracle = brute_force_count(&g, 4).unwrap();
        assert_eq!(oracle, 15 - 6);
        assert_eq!(count_cliques(&g, 4).unwrap().count, oracle);
    }

    #[test]
    fn subset_budget() {
        let g = WeightedGraph::unweighted(200, []).unwrap();
        assert!(matches!(brute_force_count(&g, 5), Err(Error::Resource(_))));
    }

    #[test]
    fn expected_given_weights_examples() {
        let sure = expected_cliques_given_weights(&[10.0, 10.0, 10.0], 1.0, 3, 3).unwrap();
        assert_eq!(sure, 1.0);
        // mu n = 100
        let v = expected_cliques_given_weights(&[1.0, 1.0, 1.0], 100.0 / 3.0, 3, 3).unwrap();
        assert!((v - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 3), 10);
        assert_eq!(binomial(2000, 3), 1_331_334_000);
        assert_eq!(binomial(3, 4), 0);
    }
}
