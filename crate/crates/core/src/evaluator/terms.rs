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

//! The individual terms of the conditioning decomposition of `P(K_k)`
//! around the threshold `L = sqrt(mu n)`.

use std::cell::Cell;

use crate::distribution::TailDistribution;
use crate::error::{Error, Result};
use crate::quad::{integrate_log, QuadOptions};
use crate::rng::{open_unit, StreamRole};

/// Largest number of low-weight nodes handled by nested quadrature.
pub const MAX_QUADRATURE_M: usize = 4;

/// `sqrt(mu n)`: below it edges are `h_i h_j / (mu n)`, above it pairs are
/// certain.
pub fn threshold(dist: &TailDistribution, n: usize) -> f64 {
    (dist.mu() * n as f64).sqrt()
}

/// A nonnegative term kept both as a value and as a natural log, so that
/// values below the `f64` range are not lost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermValue {
    pub value: f64,
    pub ln_value: f64,
    /// Relative error estimate (quadrature) or relative standard error (MC).
    pub rel_err: f64,
    pub converged: bool,
    /// Standard error when the term was estimated by Monte Carlo.
    pub stderr: Option<f64>,
}

impl TermValue {
    pub fn zero() -> Self {
        TermValue {
            value: 0.0,
            ln_value: f64::NEG_INFINITY,
            rel_err: 0.0,
            converged: true,
            stderr: None,
        }
    }

    pub(crate) fn from_ln(ln_value: f64, rel_err: f64, converged: bool) -> Self {
        TermValue {
            value: ln_value.exp(),
            ln_value,
            rel_err,
            converged,
            stderr: None,
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "decomposition terms need k >= 2, got {k}"
        )));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    Ok(())
}

/// `P(all k weights > L) = P(H > L)^k`.
pub fn extreme_high_term(dist: &TailDistribution, k: usize, n: usize) -> Result<f64> {
    Ok(extreme_high(dist, k, n)?.value)
}

pub(crate) fn extreme_high(dist: &TailDistribution, k: usize, n: usize) -> Result<TermValue> {
    check_k(k)?;
    check_n(n)?;
    let tail = dist.tail_unchecked(threshold(dist, n));
    Ok(TermValue::from_ln(k as f64 * tail.ln(), 0.0, true))
}

/// `P(K_k, all k weights <= L)`. All pairs are `h_i h_j / (mu n)`, so the
/// k-fold integral factorises into `(mu n)^(-k(k-1)/2) M^k` with
/// `M = int_[1, L] h^(k-1) dF(h)`.
pub fn extreme_low_term(dist: &TailDistribution, k: usize, n: usize) -> Result<f64> {
    Ok(extreme_low(dist, k, n)?.value)
}

pub(crate) fn extreme_low(dist: &TailDistribution, k: usize, n: usize) -> Result<TermValue> {
    check_k(k)?;
    check_n(n)?;
    let mu_n = dist.mu() * n as f64;
    let moment = dist.moment((k - 1) as f64, 1.0, mu_n.sqrt());
    let kf = k as f64;
    let ln = -0.5 * kf * (kf - 1.0) * mu_n.ln() + kf * moment.ln();
    Ok(TermValue::from_ln(ln, 0.0, moment.is_finite()))
}

/// Low weights `L >= h_1 >= ... >= h_m >= 1` seen by one high-weight node.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerIntegrandContext {
    weights: Vec<f64>,
    mu: f64,
    n: usize,
}

impl InnerIntegrandContext {
    pub fn new(weights: Vec<f64>, mu: f64, n: usize) -> Result<Self> {
        check_n(n)?;
        let l = (mu * n as f64).sqrt();
        let mut upper = l * (1.0 + 1e-12);
        for &h in &weights {
            if !(h >= 1.0 && h <= upper) {
                return Err(Error::Domain(format!(
                    "context weights must satisfy sqrt(mu n) = {l} >= h_1 >= ... >= h_m >= 1, got {weights:?}"
                )));
            }
            upper = h;
        }
        if weights.is_empty() {
            return Err(Error::Domain("context needs at least one weight".into()));
        }
        Ok(InnerIntegrandContext { weights, mu, n })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// `int_(L, inf) prod_i min(h_i h / (mu n), 1) dF(h)` split at the
/// breakpoints `mu n / h_s` where successive factors saturate.
pub fn inner_integral(ctx: &InnerIntegrandContext, dist: &TailDistribution) -> f64 {
    let mu_n = ctx.mu * ctx.n as f64;
    inner_raw(dist, &ctx.weights, mu_n, mu_n.sqrt())
}

/// `hs` sorted descending within `[1, l]`.
#[inline]
pub(crate) fn inner_raw(dist: &TailDistribution, hs: &[f64], mu_n: f64, l: f64) -> f64 {
    let m = hs.len();
    let mut total = 0.0;
    let mut lower = l;
    // prod_{i >= s} h_i, built from the back
    let mut suffix = vec![1.0; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] * hs[i];
    }
    for s in 0..m {
        let upper = mu_n / hs[s];
        if upper > lower {
            let power = (m - s) as f64;
            let coef = suffix[s] / mu_n.powi((m - s) as i32);
            total += coef * dist.moment_open(power, lower, upper);
        }
        lower = lower.max(upper);
    }
    total + dist.tail_unchecked(mu_n / hs[m - 1])
}

/// `I_m = P(K_k, H_1..H_m <= L < H_(m+1)..H_k)`.
///
/// Nested quadrature over the ordered region `L >= h_1 >= ... >= h_m >= 1`
/// for `m <= 4`, Monte Carlo over the low-weight cube beyond that.
pub fn intermediate_term(
    dist: &TailDistribution,
    k: usize,
    m: usize,
    n: usize,
    opts: &QuadOptions,
    mc_samples: usize,
    seed: u64,
) -> Result<TermValue> {
    check_k(k)?;
    check_n(n)?;
    if m == 0 || m >= k {
        return Err(Error::Domain(format!(
            "intermediate terms need 1 <= m <= k - 1, got m = {m}, k = {k}"
        )));
    }
    if m <= MAX_QUADRATURE_M {
        Ok(intermediate_quadrature(dist, k, m, n, opts))
    } else {
        intermediate_mc(dist, k, m, n, mc_samples, seed)
    }
}

struct Nested<'a> {
    dist: &'a TailDistribution,
    m: usize,
    copies: i32,
    mu_n: f64,
    l: f64,
    scale: f64,
    atom: f64,
    outer: QuadOptions,
    inner: QuadOptions,
    worst_inner: Cell<f64>,
    converged: Cell<bool>,
}

impl Nested<'_> {
    fn weight(&self, h: f64) -> f64 {
        (h / self.l).powi(self.m as i32 - 1)
    }

    /// Integral over the remaining ordered variables below `upper`.
    /// `atoms` counts the preceding variables sitting on the point mass at 1;
    /// ties there are weighted by `1 / (atoms + 1)` so that the `m!`
    /// symmetry factor is not applied to coinciding weights.
    fn level(&self, prefix: &mut Vec<f64>, upper: f64, atoms: usize) -> (f64, f64) {
        if prefix.len() == self.m {
            let inner = inner_raw(self.dist, prefix, self.mu_n, self.l);
            return ((inner / self.scale).powi(self.copies), 0.0);
        }
        let mut total = 0.0;
        if self.atom > 0.0 {
            prefix.push(1.0);
            let (v, _) = self.level(prefix, 1.0, atoms + 1);
            prefix.pop();
            total += self.atom / (atoms + 1) as f64 * self.weight(1.0) * v;
        }
        if atoms > 0 || upper <= 1.0 {
            return (total, 0.0);
        }
        let top = prefix.is_empty();
        let opts = if top { &self.outer } else { &self.inner };
        let r = integrate_log(
            |h| {
                prefix.push(h);
                let (v, _) = self.level(prefix, h, 0);
                prefix.pop();
                self.weight(h) * self.dist.density(h) * v
            },
            1.0,
            upper,
            opts,
        );
        if !r.converged {
            self.converged.set(false);
        }
        if !top && r.value > 0.0 {
            self.worst_inner
                .set(self.worst_inner.get().max(r.abs_err / r.value));
        }
        (total + r.value, r.abs_err)
    }
}

fn intermediate_quadrature(
    dist: &TailDistribution,
    k: usize,
    m: usize,
    n: usize,
    opts: &QuadOptions,
) -> TermValue {
    let mu_n = dist.mu() * n as f64;
    let l = mu_n.sqrt();
    let scale = dist.tail_unchecked(l);
    if scale <= 0.0 {
        return TermValue::zero();
    }
    let outer = QuadOptions {
        abs_tol: 0.0,
        ..*opts
    };
    let inner = QuadOptions {
        abs_tol: 0.0,
        rel_tol: opts.rel_tol * 0.1,
        ..*opts
    };
    let nested = Nested {
        dist,
        m,
        copies: (k - m) as i32,
        mu_n,
        l,
        scale,
        atom: dist.atom_at_one(),
        outer,
        inner,
        worst_inner: Cell::new(0.0),
        converged: Cell::new(true),
    };
    let mut prefix = Vec::with_capacity(m);
    let (value, abs_err) = nested.level(&mut prefix, l, 0);
    let rel_err = if value > 0.0 { abs_err / value } else { 0.0 } + nested.worst_inner.get();
    let ln = ln_factorial(m) + (k - m) as f64 * scale.ln() + value.ln();
    TermValue::from_ln(ln, rel_err, nested.converged.get())
}

pub(crate) fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

/// Monte Carlo estimate of `I_m` over the cube of weights below `L`.
pub fn intermediate_mc(
    dist: &TailDistribution,
    k: usize,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<TermValue> {
    check_k(k)?;
    if m == 0 || m >= k {
        return Err(Error::Domain(format!(
            "intermediate terms need 1 <= m <= k - 1, got m = {m}, k = {k}"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(
            "Monte Carlo needs at least 2 samples".into(),
        ));
    }
    dist.sample_weight(1.0)?;
    let mu_n = dist.mu() * n as f64;
    let l = mu_n.sqrt();
    let scale = dist.tail_unchecked(l);
    let below = 1.0 - scale;
    if scale <= 0.0 || below <= 0.0 {
        return Ok(TermValue::zero());
    }
    let copies = (k - m) as i32;
    let stats = crate::evaluator::mc::run_blocks(samples, seed, StreamRole::Simplex, |rng| {
        let mut hs: Vec<f64> = (0..m)
            .map(|_| dist.inverse_tail(scale + below * open_unit(rng)).min(l))
            .collect();
        hs.sort_by(|a, b| b.total_cmp(a));
        let pairs: f64 = hs.iter().map(|h| (h / l).powi(m as i32 - 1)).product();
        pairs * (inner_raw(dist, &hs, mu_n, l) / scale).powi(copies)
    });
    let (mean, stderr) = (stats.mean(), stats.stderr());
    let ln_factor = m as f64 * below.ln() + copies as f64 * scale.ln();
    let mut term = TermValue::from_ln(
        ln_factor + mean.ln(),
        if mean > 0.0 { stderr / mean } else { 0.0 },
        true,
    );
    term.stderr = Some(stderr * ln_factor.exp());
    Ok(term)
}
