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

mod common;

use cliquescale::census::expected_cliques_given_weights;
use cliquescale::sampler::{sample_edges, sample_weights};
use cliquescale::*;
use common::gauss_legendre_log;

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let len = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / len;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1.0);
    (mean, (var / len).sqrt())
}

/// `E[min(h H / (mu n), 1)]` for `H` from `d`.
fn expected_edge_probability(d: &TailDistribution, h: f64, mu_n: f64) -> f64 {
    let cut = (mu_n / h).max(1.0);
    let below = if cut > 1.0 {
        gauss_legendre_log(|x| (h * x / mu_n) * d.density(x), 1.0, cut, 400)
            + d.atom_at_one() * h / mu_n
    } else {
        0.0
    };
    below + d.tail_unchecked(cut)
}

#[test]
fn naive_pair_frequencies_match_edge_probabilities() {
    let d = TailDistribution::pareto(2.5).unwrap();
    let n = 60;
    let weights = sample_weights(&d, n, 2).unwrap();
    let replicas = 20_000;
    let mut hits = vec![0u32; n * n];
    for r in 0..replicas {
        for method in [SamplingMethod::Naive, SamplingMethod::Skip] {
            let g =
                sample_edges(weights.clone(), d.mu(), n, 1000 * r + method as u64, method).unwrap();
            for (u, v) in g.edges() {
                hits[u as usize * n + v as usize] += 1;
            }
        }
    }
    let draws = 2.0 * replicas as f64;
    for u in 0..n {
        for v in u + 1..n {
            let p = edge_probability(weights[u], weights[v], d.mu(), n);
            let freq = hits[u * n + v] as f64 / draws;
            let sigma = (p * (1.0 - p) / draws).sqrt();
            assert!(
                (freq - p).abs() <= 5.0 * sigma + 1e-12,
                "({u},{v}): {freq} vs {p}"
            );
        }
    }
}

#[test]
fn mean_degree_matches_quadrature() {
    let d = TailDistribution::pareto(2.5).unwrap();
    let n = 500;
    let mu_n = d.mu() * n as f64;
    let per_pair = gauss_legendre_log(
        |h| expected_edge_probability(&d, h, mu_n) * d.density(h),
        1.0,
        1e9,
        800,
    ) + d.tail_unchecked(1e9);
    let means: Vec<f64> = (0..200)
        .map(|r| {
            let g = sample_graph(&d, &SamplerConfig::new(n, 7 + 1_000 * r)).unwrap();
            2.0 * g.edge_count() as f64 / n as f64
        })
        .collect();
    let (mean, stderr) = mean_and_stderr(&means);
    let want = (n - 1) as f64 * per_pair;
    assert!(
        (mean - want).abs() <= 4.0 * stderr,
        "{mean} +- {stderr} vs {want}"
    );
}

#[test]
fn pinned_node_degree() {
    let d = TailDistribution::pareto(3.0).unwrap();
    let n = 400;
    let mu_n = d.mu() * n as f64;
    let pinned = 12.0;
    let degrees: Vec<f64> = (0..2000u64)
        .map(|r| {
            let mut weights = sample_weights(&d, n, r).unwrap();
            weights[0] = pinned;
            let g = sample_edges(weights, d.mu(), n, r, SamplingMethod::Skip).unwrap();
            g.degree(0) as f64
        })
        .collect();
    let (mean, stderr) = mean_and_stderr(&degrees);
    let want = (n - 1) as f64 * expected_edge_probability(&d, pinned, mu_n);
    assert!(
        (mean - want).abs() <= 4.0 * stderr,
        "{mean} +- {stderr} vs {want}"
    );
}

#[test]
fn triangle_count_given_weights() {
    let d = TailDistribution::pareto(2.5).unwrap();
    let n = 30;
    let weights = sample_weights(&d, n, 99).unwrap();
    let want = expected_cliques_given_weights(&weights, d.mu(), n, 3).unwrap();
    let counts: Vec<f64> = (0..10_000u64)
        .map(|r| {
            let g = sample_edges(weights.clone(), d.mu(), n, r, SamplingMethod::Naive).unwrap();
            count_cliques(&g, 3).unwrap().count as f64
        })
        .collect();
    let (mean, stderr) = mean_and_stderr(&counts);
    assert!(
        (mean - want).abs() <= 4.0 * stderr,
        "{mean} +- {stderr} vs {want}"
    );
}

#[test]
fn small_graphs() {
    let d = TailDistribution::pareto(2.5).unwrap();
    let g = sample_graph(&d, &SamplerConfig::new(1, 5)).unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (1, 0));
    let atom = TailDistribution::new(3.0, SlowlyVarying::Constant(0.0))
        .unwrap()
        .with_mu(0.5)
        .unwrap();
    for seed in 0..50 {
        for method in [SamplingMethod::Naive, SamplingMethod::Skip] {
            let g = sample_graph(&atom, &SamplerConfig::new(2, seed).with_method(method)).unwrap();
            assert!(g.has_edge(0, 1));
        }
    }
}

#[test]
fn skip_sampler_is_reproducible() {
    let d = TailDistribution::pareto(2.5).unwrap();
    let config = SamplerConfig::new(5_000, 17);
    let a = sample_graph_skip(&d, &config).unwrap();
    let b = sample_graph_skip(&d, &config).unwrap();
    assert_eq!(a, b);
    let c = sample_graph_skip(&d, &SamplerConfig::new(5_000, 18)).unwrap();
    assert_ne!(a, c);
}
