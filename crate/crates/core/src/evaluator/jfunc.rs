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

//! Numeric form of the ordered-integral operator
//!
//! `J_{i,m}(g)(h_1, ..., h_(i-1)) = int_[1, h_(i-1)] h_i^(m-1) g(h_1, ..., h_i) dF(h_i)`
//!
//! with `h_0 = sqrt(mu n)`, and of its composition
//! `J_{i,m} o J_{i+1,m} o ... o J_{m,m}`.

use crate::distribution::TailDistribution;
use crate::error::{Error, Result};
use crate::evaluator::terms::threshold;
use crate::quad::{integrate_log, QuadOptions, QuadResult};

fn validate(dist: &TailDistribution, i: usize, m: usize, prefix: &[f64], n: usize) -> Result<f64> {
    if i == 0 || i > m {
        return Err(Error::Domain(format!(
            "J needs 1 <= i <= m, got i = {i}, m = {m}"
        )));
    }
    if prefix.len() != i - 1 {
        return Err(Error::Domain(format!(
            "J_(i,m) with i = {i} takes {} prefix weights, got {}",
            i - 1,
            prefix.len()
        )));
    }
    let l = threshold(dist, n);
    let mut upper = l * (1.0 + 1e-12);
    for &h in prefix {
        if !(h >= 1.0 && h <= upper) {
            return Err(Error::Domain(format!(
                "prefix must be ordered within [1, sqrt(mu n) = {l}], got {prefix:?}"
            )));
        }
        upper = h;
    }
    Ok(prefix.last().copied().unwrap_or(l))
}

/// One application of `J_{i,m}` to `g`, evaluated at `prefix`.
pub fn eval_j<G>(
    dist: &TailDistribution,
    i: usize,
    m: usize,
    g: G,
    prefix: &[f64],
    n: usize,
    opts: &QuadOptions,
) -> Result<QuadResult>
where
    G: Fn(&[f64]) -> f64,
{
    let upper = validate(dist, i, m, prefix, n)?;
    let mut args = prefix.to_vec();
    Ok(apply(
        dist,
        m,
        &mut args,
        upper,
        opts,
        &mut |args: &mut Vec<f64>| g(args),
    ))
}

/// `J_{i,m}(J_{i+1,m}(... J_{m,m}(g)))` evaluated at `prefix`; `g` receives
/// all `m` ordered weights.
pub fn eval_j_bar<G>(
    dist: &TailDistribution,
    i: usize,
    m: usize,
    g: G,
    prefix: &[f64],
    n: usize,
    opts: &QuadOptions,
) -> Result<QuadResult>
where
    G: Fn(&[f64]) -> f64,
{
    let upper = validate(dist, i, m, prefix, n)?;
    let mut args = prefix.to_vec();
    let mut worst_rel = 0.0f64;
    let mut converged = true;
    let mut r = compose(
        dist,
        m,
        &mut args,
        upper,
        opts,
        &g,
        &mut worst_rel,
        &mut converged,
    );
    r.abs_err += worst_rel * r.value.abs();
    r.converged &= converged;
    Ok(r)
}

/// `int_[1, upper] h^(m-1) inner(args ++ [h]) dF(h)`, atom at 1 included.
fn apply(
    dist: &TailDistribution,
    m: usize,
    args: &mut Vec<f64>,
    upper: f64,
    opts: &QuadOptions,
    inner: &mut dyn FnMut(&mut Vec<f64>) -> f64,
) -> QuadResult {
    let power = m as i32 - 1;
    let atom = dist.atom_at_one();
    let mut atom_part = 0.0;
    if atom > 0.0 {
        args.push(1.0);
        atom_part = atom * inner(args);
        args.pop();
    }
    let mut r = integrate_log(
        |h| {
            args.push(h);
            let v = inner(args);
            args.pop();
            h.powi(power) * dist.density(h) * v
        },
        1.0,
        upper,
        opts,
    );
    r.value += atom_part;
    r
}

#[allow(clippy::too_many_arguments)]
fn compose<G>(
    dist: &TailDistribution,
    m: usize,
    args: &mut Vec<f64>,
    upper: f64,
    opts: &QuadOptions,
    g: &G,
    worst_rel: &mut f64,
    converged: &mut bool,
) -> QuadResult
where
    G: Fn(&[f64]) -> f64,
{
    let last = args.len() + 1 == m;
    apply(dist, m, args, upper, opts, &mut |args: &mut Vec<f64>| {
        if last {
            g(args)
        } else {
            let below = *args.last().expect("nonempty prefix");
            let r = compose(dist, m, args, below, opts, g, worst_rel, converged);
            if r.value != 0.0 {
                *worst_rel = worst_rel.max(r.abs_err / r.value.abs());
            }
            *converged &= r.converged;
            r.value
        }
    })
}
