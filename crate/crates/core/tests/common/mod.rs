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

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cliquescale::edge_probability;

/// Importance-sampled estimate of `P(K_k)` for `l = 1`, drawing weights from
/// a heavier Pareto(`proposal`) so that rare high-weight configurations are
/// seen. The likelihood ratio is bounded, so the estimator has finite
/// variance. Returns (mean, stderr).
pub fn pareto_clique_prob_is(
    alpha: f64,
    mu: f64,
    k: usize,
    n: usize,
    proposal: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(proposal < alpha && proposal > 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut hs = vec![0.0; k];
    for _ in 0..samples {
        let mut weight = 1.0;
        for h in hs.iter_mut() {
            let u = 1.0 - rng.random::<f64>();
            *h = u.powf(1.0 / (1.0 - proposal));
            weight *= (alpha - 1.0) / (proposal - 1.0) * h.powf(proposal - alpha);
        }
        let mut p = 1.0;
        for i in 0..k {
            for j in i + 1..k {
                p *= edge_probability(hs[i], hs[j], mu, n);
            }
        }
        let x = p * weight;
        sum += x;
        sum_sq += x * x;
    }
    let len = samples as f64;
    let mean = sum / len;
    let var = (sum_sq / len - mean * mean).max(0.0) * len / (len - 1.0);
    (mean, (var / len).sqrt())
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels,
/// independent of the crate's adaptive integrator.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (x, w) in X.iter().zip(&W) {
            total += w * f(mid + 0.5 * width * x);
        }
    }
    total * 0.5 * width
}

/// Gauss-Legendre in `ln h` over `[a, b]`, for integrands spanning decades.
pub fn gauss_legendre_log<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    gauss_legendre(|u| f(u.exp()) * u.exp(), a.ln(), b.ln(), panels)
}
