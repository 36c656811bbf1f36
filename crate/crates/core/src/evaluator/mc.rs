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

//! Monte Carlo estimates of `P(K_k)` over i.i.d. weight draws.
//!
//! Samples are split into fixed-size blocks, each with its own derived
//! stream; block statistics are merged in block order so results are
//! bit-stable for a given seed whatever the worker count.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::census::MAX_K;
use crate::distribution::TailDistribution;
use crate::error::{Error, Result};
use crate::evaluator::terms::threshold;
use crate::rng::{open_unit, stream, StreamRole};
use crate::sampler::edge_probability;

pub const BLOCK_SIZE: usize = 1 << 16;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn merge(self, other: Welford) -> Welford {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Welford {
            count,
            mean: self.mean + delta * (other.count as f64 / count as f64),
            m2: self.m2
                + other.m2
                + delta * delta * (self.count as f64 * other.count as f64 / count as f64),
        }
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    pub(crate) fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

fn block_sizes(samples: usize) -> Vec<usize> {
    let blocks = samples.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .map(|b| BLOCK_SIZE.min(samples - b * BLOCK_SIZE))
        .collect()
}

/// Averages `draw` over `samples` draws.
pub(crate) fn run_blocks<F>(samples: usize, seed: u64, role: StreamRole, draw: F) -> Welford
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    block_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(b, size)| {
            let mut rng = stream(seed, role, b as u64);
            let mut acc = Welford::default();
            for _ in 0..size {
                acc.push(draw(&mut rng));
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Welford::default(), Welford::merge)
}

fn check(dist: &TailDistribution, k: usize, n: usize, samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if k == 0 || k > MAX_K || n == 0 {
        return Err(Error::Domain(format!(
            "need 1 <= k <= {MAX_K} and n >= 1, got k = {k}, n = {n}"
        )));
    }
    dist.sample_weight(1.0).map(|_| ())
}

#[inline]
fn draw_weights(dist: &TailDistribution, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for h in out.iter_mut() {
        *h = dist.inverse_tail(open_unit(rng));
    }
}

#[inline]
fn clique_product(hs: &[f64], mu: f64, n: usize) -> f64 {
    let mut prod = 1.0;
    for (a, &u) in hs.iter().enumerate() {
        for &v in &hs[a + 1..] {
            prod *= edge_probability(u, v, mu, n);
        }
    }
    prod
}

/// Unbiased estimate of `P(K_k) = E[prod_(i<j) min(H_i H_j / (mu n), 1)]`.
pub fn clique_prob_mc(
    dist: &TailDistribution,
    k: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check(dist, k, n, samples)?;
    let mu = dist.mu();
    let stats = run_blocks(samples, seed, StreamRole::MonteCarlo, |rng| {
        let mut buf = [0.0; MAX_K];
        let hs = &mut buf[..k];
        draw_weights(dist, rng, hs);
        clique_product(hs, mu, n)
    });
    Ok(McEstimate {
        mean: stats.mean(),
        stderr: stats.stderr(),
        samples,
        seed,
    })
}

/// Splits the same estimator by how many of the `k` weights fall at or
/// below `sqrt(mu n)`. Entry `j` estimates `P(K_k, exactly j low weights)`,
/// so entry `k` is the extreme-low term, entry 0 the extreme-high term and
/// entry `m` equals `C(k, m) I_m`. The entries sum to the direct estimate.
pub fn clique_prob_mc_by_class(
    dist: &TailDistribution,
    k: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check(dist, k, n, samples)?;
    let mu = dist.mu();
    let l = threshold(dist, n);
    let per_block: Vec<Vec<Welford>> = block_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(b, size)| {
            let mut rng = stream(seed, StreamRole::MonteCarlo, b as u64);
            let mut acc = vec![Welford::default(); k + 1];
            let mut hs = vec![0.0; k];
            for _ in 0..size {
                draw_weights(dist, &mut rng, &mut hs);
                let class = hs.iter().filter(|&&h| h <= l).count();
                let value = clique_product(&hs, mu, n);
                for (j, a) in acc.iter_mut().enumerate() {
                    a.push(if j == class { value } else { 0.0 });
                }
            }
            acc
        })
        .collect();
    let mut totals = vec![Welford::default(); k + 1];
    for block in per_block {
        for (t, b) in totals.iter_mut().zip(block) {
            *t = t.merge(b);
        }
    }
    Ok(totals
        .into_iter()
        .map(|w| McEstimate {
            mean: w.mean(),
            stderr: w.stderr(),
            samples,
            seed,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slowly_varying::SlowlyVarying;

    #[test]
    fn constant_integrand_is_exact() {
        let d = TailDistribution::new(3.0, SlowlyVarying::Constant(0.0))
            .unwrap()
            .with_mu(2.0)
            .unwrap();
        // mu n = 100
        let est = clique_prob_mc(&d, 2, 50, 10_000, 3).unwrap();
        assert_eq!(est.mean, 0.01);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let d = TailDistribution::pareto(2.5).unwrap();
        let a = clique_prob_mc(&d, 3, 1000, 200_000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| clique_prob_mc(&d, 3, 1000, 200_000, 5).unwrap());
        assert_eq!(a, b);
        assert!(a.mean > 0.0 && a.mean <= 1.0);
    }

    #[test]
    fn classes_sum_to_direct() {
        let d = TailDistribution::pareto(2.5).unwrap();
        let direct = clique_prob_mc(&d, 3, 100, 100_000, 9).unwrap();
        let classes = clique_prob_mc_by_class(&d, 3, 100, 100_000, 9).unwrap();
        let sum: f64 = classes.iter().map(|c| c.mean).sum();
        assert!(((sum - direct.mean) / direct.mean).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let d = TailDistribution::pareto(3.0).unwrap();
        assert!(clique_prob_mc(&d, 2, 50, 10, 0).is_err());
    }
}
