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

//! `P(K_k)`, the probability that `k` given nodes form a clique, computed
//! two independent ways: the conditioning decomposition evaluated term by
//! term with quadrature, and direct Monte Carlo over the weights.

pub mod jfunc;
pub mod mc;
pub mod terms;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::census::binomial;
use crate::distribution::TailDistribution;
use crate::error::{Error, Result};
use crate::quad::QuadOptions;

pub use jfunc::{eval_j, eval_j_bar};
pub use mc::{clique_prob_mc, clique_prob_mc_by_class, McEstimate};
pub use terms::{
    extreme_high_term, extreme_low_term, inner_integral, intermediate_mc, intermediate_term,
    threshold, InnerIntegrandContext, TermValue, MAX_QUADRATURE_M,
};

/// Largest `k` the decomposition report supports (8 intermediate columns).
pub const MAX_REPORT_K: usize = 9;
/// Fixed number of `I_m` columns in the CSV row.
pub const CSV_INTERMEDIATE_COLUMNS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub quad: QuadOptions,
    /// Samples for intermediate terms beyond the quadrature depth.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            quad: QuadOptions::default(),
            mc_samples: 200_000,
            seed: 0,
        }
    }
}

/// A term whose quadrature did not reach the requested tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceWarning {
    pub term: String,
    pub achieved_rel_err: f64,
}

/// Per-term values of
/// `P(K_k) = extreme_low + sum_m C(k, m) I_m + extreme_high`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub l_name: String,
    pub mu: f64,
    pub extreme_low: TermValue,
    /// `I_1 .. I_(k-1)`.
    pub intermediate: Vec<TermValue>,
    /// `C(k, m)` for `m = 1 .. k-1`.
    pub binomial_weights: Vec<f64>,
    pub extreme_high: TermValue,
    pub total: f64,
    pub ln_total: f64,
    /// Terms whose breakpoint integrals hit the `h^(-1)` resonance at
    /// integer alpha.
    pub resonant_terms: Vec<String>,
    pub warnings: Vec<ConvergenceWarning>,
}

impl DecompositionReport {
    fn trivial(dist: &TailDistribution, k: usize, n: usize) -> Self {
        DecompositionReport {
            k,
            n,
            alpha: dist.alpha(),
            l_name: dist.l().name().to_string(),
            mu: dist.mu(),
            extreme_low: TermValue::zero(),
            intermediate: Vec::new(),
            binomial_weights: Vec::new(),
            extreme_high: TermValue::zero(),
            total: 1.0,
            ln_total: 0.0,
            resonant_terms: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Re-adds the terms in the order used to form `total`.
    pub fn term_sum(&self) -> f64 {
        if self.k < 2 {
            return 1.0;
        }
        let mut sum = self.extreme_low.value;
        for (w, t) in self.binomial_weights.iter().zip(&self.intermediate) {
            sum += w * t.value;
        }
        sum + self.extreme_high.value
    }

    /// The stored total is exactly the sum of the stored terms.
    pub fn identity_holds(&self) -> bool {
        self.term_sum() == self.total
    }

    pub fn terms(&self) -> impl Iterator<Item = &TermValue> {
        std::iter::once(&self.extreme_low)
            .chain(self.intermediate.iter())
            .chain(std::iter::once(&self.extreme_high))
    }

    pub fn max_term_error(&self) -> f64 {
        self.terms().map(|t| t.rel_err).fold(0.0, f64::max)
    }

    pub fn csv_header() -> String {
        let mut h = String::from("k,n,alpha,l_name,extreme_low");
        for m in 1..=CSV_INTERMEDIATE_COLUMNS {
            let _ = write!(h, ",I_{m}");
        }
        h.push_str(",extreme_high,total,max_term_error");
        h
    }

    pub fn to_csv_row(&self) -> String {
        let mut row = format!(
            "{},{},{},{},{:e}",
            self.k, self.n, self.alpha, self.l_name, self.extreme_low.value
        );
        for m in 0..CSV_INTERMEDIATE_COLUMNS {
            match self.intermediate.get(m) {
                Some(t) => {
                    let _ = write!(row, ",{:e}", t.value);
                }
                None => row.push(','),
            }
        }
        let _ = write!(
            row,
            ",{:e},{:e},{:e}",
            self.extreme_high.value,
            self.total,
            self.max_term_error()
        );
        row
    }
}

/// Labels of the `(m, s)` breakpoint integrals with `m - s + 1 = alpha - 1`,
/// plus the extreme-low moment when `k = alpha`.
fn resonances(dist: &TailDistribution, k: usize) -> Vec<String> {
    let Some(alpha) = dist.integer_alpha() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for m in 1..k as i64 {
        let s = m - alpha + 2;
        if (1..=m).contains(&s) {
            out.push(format!("I_{m} (s = {s})"));
        }
    }
    if k as i64 == alpha {
        out.push("extreme_low".to_string());
    }
    out
}

/// The full decomposition of `P(K_k)` for a graph on `n` nodes.
pub fn clique_prob_quadrature(
    dist: &TailDistribution,
    k: usize,
    n: usize,
    opts: &EvalOptions,
) -> Result<DecompositionReport> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    if k > MAX_REPORT_K {
        return Err(Error::InvalidParameter(format!(
            "decomposition supports k <= {MAX_REPORT_K}, got {k}"
        )));
    }
    if k < 2 {
        return Ok(DecompositionReport::trivial(dist, k, n));
    }
    let (low, high) = (
        terms::extreme_low(dist, k, n)?,
        terms::extreme_high(dist, k, n)?,
    );
    let intermediate: Vec<TermValue> = (1..k)
        .into_par_iter()
        .map(|m| {
            intermediate_term(
                dist,
                k,
                m,
                n,
                &opts.quad,
                opts.mc_samples,
                opts.seed.wrapping_add(m as u64),
            )
        })
        .collect::<Result<_>>()?;
    let binomial_weights: Vec<f64> = (1..k)
        .map(|m| binomial(k as u64, m as u64) as f64)
        .collect();

    let mut report = DecompositionReport {
        extreme_low: low,
        intermediate,
        binomial_weights,
        extreme_high: high,
        resonant_terms: resonances(dist, k),
        ..DecompositionReport::trivial(dist, k, n)
    };
    report.total = report.term_sum();
    report.ln_total = log_sum_exp(
        std::iter::once(report.extreme_low.ln_value)
            .chain(
                report
                    .binomial_weights
                    .iter()
                    .zip(&report.intermediate)
                    .map(|(w, t)| w.ln() + t.ln_value),
            )
            .chain(std::iter::once(report.extreme_high.ln_value)),
    );
    let names = std::iter::once("extreme_low".to_string())
        .chain((1..k).map(|m| format!("I_{m}")))
        .chain(std::iter::once("extreme_high".to_string()));
    report.warnings = names
        .zip(report.terms())
        .filter(|(_, t)| !t.converged)
        .map(|(term, t)| ConvergenceWarning {
            term,
            achieved_rel_err: t.rel_err,
        })
        .collect();
    Ok(report)
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
