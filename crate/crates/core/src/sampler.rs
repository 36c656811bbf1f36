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

//! Chung-Lu graph sampling: i.i.d. weights and independent edges with
//! probability `min(h_i h_j / (mu n), 1)`.

use rand::Rng;
use rayon::prelude::*;

use crate::distribution::TailDistribution;
use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::rng::{open_unit, stream, StreamRole};

/// Sizes above this use the skip sampler under [`SamplingMethod::Auto`].
pub const NAIVE_MAX_N: usize = 10_000;
/// Hard cap on the expected number of edges of a sampled graph.
pub const MAX_EXPECTED_EDGES: f64 = 2.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMethod {
    /// One Bernoulli draw per pair.
    Naive,
    /// Geometric skips over weight-sorted rows with thinning.
    Skip,
    /// Naive up to [`NAIVE_MAX_N`] nodes, skip beyond.
    #[default]
    Auto,
}

impl SamplingMethod {
    fn resolve(self, n: usize) -> SamplingMethod {
        match self {
            SamplingMethod::Auto if n <= NAIVE_MAX_N => SamplingMethod::Naive,
            SamplingMethod::Auto => SamplingMethod::Skip,
            m => m,
        }
    }
}

impl std::str::FromStr for SamplingMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(SamplingMethod::Naive),
            "skip" => Ok(SamplingMethod::Skip),
            "auto" => Ok(SamplingMethod::Auto),
            other => Err(Error::InvalidParameter(format!(
                "unknown sampling method '{other}' (naive, skip, auto)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n: usize,
    pub seed: u64,
    pub method: SamplingMethod,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SamplerConfig {
            n,
            seed,
            method: SamplingMethod::Auto,
        }
    }

    pub fn with_method(mut self, method: SamplingMethod) -> Self {
        self.method = method;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("graph needs n >= 1 nodes".into()));
        }
        if self.n > NodeId::MAX as usize {
            return Err(Error::Resource(format!(
                "n = {} exceeds the node id range ({})",
                self.n,
                NodeId::MAX
            )));
        }
        Ok(())
    }
}

/// `min(h_i h_j / (mu n), 1)`.
#[inline]
pub fn edge_probability(h_i: f64, h_j: f64, mu: f64, n: usize) -> f64 {
    (h_i * h_j / (mu * n as f64)).min(1.0)
}

/// Draws `n` i.i.d. weights, one stream per node.
pub fn sample_weights(dist: &TailDistribution, n: usize, seed: u64) -> Result<Vec<f64>> {
    // validates samplability once
    dist.sample_weight(1.0)?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| dist.inverse_tail(open_unit(&mut stream(seed, StreamRole::NodeWeight, i))))
        .collect())
}

/// Samples a graph with the method in `config` (naive by default at this
/// scale).
pub fn sample_graph(dist: &TailDistribution, config: &SamplerConfig) -> Result<WeightedGraph> {
    config.validate()?;
    let weights = sample_weights(dist, config.n, config.seed)?;
    sample_edges(weights, dist.mu(), config.n, config.seed, config.method)
}

/// Same law as [`sample_graph`], always using the skip sampler.
pub fn sample_graph_skip(dist: &TailDistribution, config: &SamplerConfig) -> Result<WeightedGraph> {
    sample_graph(dist, &config.with_method(SamplingMethod::Skip))
}

/// Samples edges for a fixed weight vector. `n` is the size entering the
/// edge probability and normally equals `weights.len()`.
pub fn sample_edges(
    weights: Vec<f64>,
    mu: f64,
    n: usize,
    seed: u64,
    method: SamplingMethod,
) -> Result<WeightedGraph> {
    let count = weights.len();
    if count > NodeId::MAX as usize {
        return Err(Error::Resource(format!(
            "{count} nodes exceed the node id range"
        )));
    }
    check_edge_budget(&weights, mu, n)?;
    let forward = match method.resolve(count) {
        SamplingMethod::Naive => naive_rows(&weights, mu, n, seed),
        _ => skip_rows(&weights, mu, n, seed),
    };
    Ok(WeightedGraph::from_forward_rows(weights, forward, seed))
}

fn check_edge_budget(weights: &[f64], mu: f64, n: usize) -> Result<()> {
    // E[m] <= (sum h)^2 / (2 mu n), and never more than all pairs
    let total: f64 = weights.iter().sum();
    let len = weights.len() as f64;
    let bound = (total * total / (2.0 * mu * n as f64)).min(len * (len - 1.0) / 2.0);
    if bound > MAX_EXPECTED_EDGES {
        return Err(Error::Resource(format!(
            "expected edge count up to {bound:.3e} exceeds the budget of {MAX_EXPECTED_EDGES:.0e}; \
             reduce n or use the quadrature/Monte Carlo evaluators instead of graph sampling"
        )));
    }
    Ok(())
}

fn naive_rows(weights: &[f64], mu: f64, n: usize, seed: u64) -> Vec<Vec<NodeId>> {
    let count = weights.len();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, StreamRole::EdgeRow, i as u64);
            let hi = weights[i];
            let mut row = Vec::new();
            for (j, &hj) in weights.iter().enumerate().skip(i + 1) {
                if rng.random::<f64>() < edge_probability(hi, hj, mu, n) {
                    row.push(j as NodeId);
                }
            }
            row
        })
        .collect()
}

/// Rows over nodes sorted by weight (descending). Along a row the candidate
/// probabilities only decrease, so the probability at the current position
/// bounds everything after it: jump a geometric number of positions under
/// that bound, then thin the landing candidate with `p / p_bound`.
fn skip_rows(weights: &[f64], mu: f64, n: usize, seed: u64) -> Vec<Vec<NodeId>> {
    let count = weights.len();
    let mut order: Vec<NodeId> = (0..count as NodeId).collect();
    order.sort_by(|&a, &b| {
        weights[b as usize]
            .total_cmp(&weights[a as usize])
            .then(a.cmp(&b))
    });
    let rows: Vec<(NodeId, Vec<NodeId>)> = (0..count)
        .into_par_iter()
        .map(|pos| {
            let i = order[pos];
            let hi = weights[i as usize];
            let mut rng = stream(seed, StreamRole::SkipRow, i as u64);
            let mut found = Vec::new();
            let mut cursor = pos + 1;
            while cursor < count {
                let bound = edge_probability(hi, weights[order[cursor] as usize], mu, n);
                if bound <= 0.0 {
                    break;
                }
                if bound < 1.0 {
                    let u = open_unit(&mut rng);
                    let skip = (u.ln() / (-bound).ln_1p()).floor();
                    if skip >= (count - cursor) as f64 {
                        break;
                    }
                    cursor += skip as usize;
                }
                let j = order[cursor];
                let p = edge_probability(hi, weights[j as usize], mu, n);
                if p >= bound || rng.random::<f64>() * bound < p {
                    found.push(j);
                }
                cursor += 1;
            }
            (i, found)
        })
        .collect();
    // reassemble as forward rows in id order
    let mut forward: Vec<Vec<NodeId>> = vec![Vec::new(); count];
    for (i, found) in rows {
        for j in found {
            let (u, v) = if i < j { (i, j) } else { (j, i) };
            forward[u as usize].push(v);
        }
    }
    forward.par_iter_mut().for_each(|row| row.sort_unstable());
    forward
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slowly_varying::SlowlyVarying;

    #[test]
    fn edge_probability_examples() {
        assert!((edge_probability(1.0, 1.0, 2.0, 50) - 0.01).abs() < 1e-18);
        let l = (2.0f64 * 50.0).sqrt();
        assert_eq!(edge_probability(l, l, 2.0, 50), 1.0);
        assert_eq!(edge_probability(20.0, 10.0, 2.0, 50), 1.0);
        assert_eq!(
            edge_probability(3.0, 7.0, 2.0, 50),
            edge_probability(7.0, 3.0, 2.0, 50)
        );
    }

    #[test]
    fn single_node_has_no_edges() {
        let d = TailDistribution::pareto(2.5).unwrap();
        for seed in [0, 1, 99] {
            let g = sample_graph(&d, &SamplerConfig::new(1, seed)).unwrap();
            assert_eq!((g.node_count(), g.edge_count()), (1, 0));
        }
        assert!(sample_graph(&d, &SamplerConfig::new(0, 1)).is_err());
    }

    #[test]
    fn certain_edge_with_unit_weights() {
        // point mass at 1 and mu n = 1
        let d = TailDistribution::new(3.0, SlowlyVarying::Constant(0.0))
            .unwrap()
            .with_mu(0.5)
            .unwrap();
        for method in [SamplingMethod::Naive, SamplingMethod::Skip] {
            for seed in 0..20 {
                let g = sample_graph(&d, &SamplerConfig::new(2, seed).with_method(method)).unwrap();
                assert_eq!(g.weights(), &[1.0, 1.0]);
                assert_eq!(g.edge_count(), 1);
            }
        }
    }

    #[test]
    fn deterministic_per_seed_and_thread_count() {
        let d = TailDistribution::pareto(2.5).unwrap();
        for method in [SamplingMethod::Naive, SamplingMethod::Skip] {
            let cfg = SamplerConfig::new(2000, 11).with_method(method);
            let a = sample_graph(&d, &cfg).unwrap();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap();
            let b = pool.install(|| sample_graph(&d, &cfg).unwrap());
            assert_eq!(a, b);
            let c = sample_graph(&d, &SamplerConfig::new(2000, 12).with_method(method)).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn edge_budget_is_enforced() {
        let weights = vec![1e6; 100_000];
        let err = sample_edges(weights, 1.0, 100_000, 0, SamplingMethod::Skip).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }
}
