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

//! Power-law weight distribution `P(H > h) = h^(1-alpha) l(h)` on `[1, inf)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_log, QuadOptions};
use crate::slowly_varying::SlowlyVarying;

/// Number of log-spaced grid points used by the monotonicity check.
const VALIDITY_GRID: usize = 1000;
/// Upper end of the validity grid.
const VALIDITY_GRID_MAX: f64 = 1e15;
/// Alpha within this distance of an integer is treated as that integer.
pub const INTEGER_TOL: f64 = 1e-9;

/// Weight distribution with a regularly varying tail.
///
/// Immutable once built; `mu` and the tail validity are always derived
/// from `(alpha, l)`, except for an explicit [`TailDistribution::with_mu`]
/// override.
#[derive(Debug, Clone, PartialEq)]
pub struct TailDistribution {
    alpha: f64,
    l: SlowlyVarying,
    mu: f64,
    formal: bool,
    valid_tail: bool,
}

impl TailDistribution {
    /// Validated distribution usable for sampling and evaluation.
    pub fn new(alpha: f64, l: SlowlyVarying) -> Result<Self> {
        Self::build(alpha, l, false)
    }

    /// Pareto tail `h^(1-alpha)`.
    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::new(alpha, SlowlyVarying::ONE)
    }

    /// Formal mode: the literal differential `d(1 - h^(1-alpha) l(h))` is
    /// integrated even if it is not a probability measure. Sampling is
    /// refused.
    pub fn new_formal(alpha: f64, l: SlowlyVarying) -> Result<Self> {
        Self::build(alpha, l, true)
    }

    fn build(alpha: f64, l: SlowlyVarying, formal: bool) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must satisfy alpha > 2 (finite mean weight), got {alpha}"
            )));
        }
        if l.is_formal() && !formal {
            return Err(Error::InvalidParameter(format!(
                "{l} is not a valid tail near h = 1; use formal mode or log_shift"
            )));
        }
        let valid_tail = check_tail(alpha, &l);
        if !valid_tail && !formal {
            return Err(Error::InvalidParameter(format!(
                "h^(1-alpha) l(h) with alpha = {alpha}, {l} is not a nonincreasing \
                 sub-probability tail on [1, inf)"
            )));
        }
        let mut dist = TailDistribution {
            alpha,
            l,
            mu: 1.0,
            formal,
            valid_tail,
        };
        dist.mu = dist.compute_mean()?;
        Ok(dist)
    }

    /// Replaces the derived mean with a model parameter of the caller's
    /// choosing.
    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu must be positive, got {mu}"
            )));
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn l(&self) -> &SlowlyVarying {
        &self.l
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_formal(&self) -> bool {
        self.formal
    }

    pub fn valid_tail(&self) -> bool {
        self.valid_tail
    }

    /// `alpha` rounded, when it is an integer within [`INTEGER_TOL`].
    pub fn integer_alpha(&self) -> Option<i64> {
        let r = self.alpha.round();
        ((self.alpha - r).abs() < INTEGER_TOL).then_some(r as i64)
    }

    /// Probability mass `1 - F(1)` carried by the point `h = 1`.
    pub fn atom_at_one(&self) -> f64 {
        if self.formal {
            0.0
        } else {
            1.0 - self.tail_raw(1.0).min(1.0)
        }
    }

    #[inline]
    pub(crate) fn tail_raw(&self, h: f64) -> f64 {
        h.powf(1.0 - self.alpha) * self.l.eval(h)
    }

    /// `P(H > h)` for `h >= 1`.
    pub fn tail(&self, h: f64) -> Result<f64> {
        if !(h >= 1.0) {
            return Err(Error::Domain(format!("tail requires h >= 1, got {h}")));
        }
        Ok(self.tail_unchecked(h))
    }

    /// [`TailDistribution::tail`] without the domain check; `h >= 1` assumed.
    #[inline]
    pub fn tail_unchecked(&self, h: f64) -> f64 {
        if h == f64::INFINITY {
            return 0.0;
        }
        let t = self.tail_raw(h);
        if self.formal {
            t
        } else {
            t.clamp(0.0, 1.0)
        }
    }

    /// Density of the continuous part on `(1, inf)`.
    #[inline]
    pub fn density(&self, h: f64) -> f64 {
        let a = self.alpha;
        (a - 1.0) * h.powf(-a) * self.l.eval(h) - h.powf(1.0 - a) * self.l.derivative(h)
    }

    fn compute_mean(&self) -> Result<f64> {
        // E[H] = 1 + int_1^inf P(H > h) dh
        let opts = QuadOptions::default().with_rel_tol(1e-11);
        Ok(1.0 + self.tail_moment(0.0, 1.0, f64::INFINITY, &opts)?)
    }

    /// `int_a^b h^(beta-1) P(H > h) dh`, given `beta - 1`. Past a truncation
    /// point the integral is taken in closed form.
    fn tail_moment(&self, beta_minus_one: f64, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
        let gamma_exp = beta_minus_one + 2.0 - self.alpha;
        let integrand = |h: f64| h.powf(gamma_exp - 1.0) * self.l.eval(h);
        if b.is_finite() {
            return Ok(integrate_log(integrand, a, b, opts).value);
        }
        if gamma_exp >= 0.0 {
            return Err(Error::Divergent(format!(
                "moment of order {} diverges for alpha = {}",
                beta_minus_one + 1.0,
                self.alpha
            )));
        }
        // h^gamma has decayed by ~1e-10 at the truncation point
        let span = (23.0 / -gamma_exp).min(300.0);
        let t = a * span.exp();
        let body = integrate_log(integrand, a, t, opts).value;
        Ok(body + self.l.tail_integral(gamma_exp, t))
    }

    fn check_moment_args(&self, beta: f64, a: f64, b: f64) -> Result<()> {
        if !(a >= 1.0) || !(b >= a) || beta.is_nan() {
            return Err(Error::Domain(format!(
                "moment integral requires 1 <= a <= b, got a = {a}, b = {b}"
            )));
        }
        if b == f64::INFINITY && beta >= self.alpha - 1.0 {
            return Err(Error::Divergent(format!(
                "int h^{beta} dF(h) to infinity diverges for alpha = {} (needs beta < alpha - 1)",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `int_a^b h^beta dF(h)` by integration by parts and adaptive
    /// quadrature. The point mass at 1 is included when `a == 1`.
    pub fn moment_integral(&self, beta: f64, a: f64, b: f64) -> Result<f64> {
        self.check_moment_args(beta, a, b)?;
        let atom = if a == 1.0 { self.atom_at_one() } else { 0.0 };
        Ok(atom + self.moment_open_quadrature(beta, a, b)?)
    }

    /// Integral over `(a, b]`, never including the atom.
    fn moment_open_quadrature(&self, beta: f64, a: f64, b: f64) -> Result<f64> {
        if b == a {
            return Ok(0.0);
        }
        let opts = QuadOptions::default().with_rel_tol(1e-11);
        let boundary_b = if b.is_finite() {
            self.tail_unchecked(b) * b.powf(beta)
        } else {
            0.0
        };
        let boundary = self.tail_unchecked(a) * a.powf(beta) - boundary_b;
        let body = if beta == 0.0 {
            0.0
        } else {
            beta * self.tail_moment(beta - 1.0, a, b, &opts)?
        };
        Ok(boundary + body)
    }

    /// Closed-form `int h^beta dF(h)` over `(a, b]` for the catalogue
    /// entries that admit one.
    pub fn closed_form_moment(&self, beta: f64, a: f64, b: f64) -> Option<f64> {
        let gamma_exp = beta - self.alpha + 1.0;
        if b == f64::INFINITY && gamma_exp >= 0.0 {
            return None;
        }
        let am1 = self.alpha - 1.0;
        match self.l {
            SlowlyVarying::Constant(c) => {
                let v = if gamma_exp == 0.0 {
                    (b / a).ln()
                } else if b == f64::INFINITY {
                    -a.powf(gamma_exp) / gamma_exp
                } else {
                    a.powf(gamma_exp) * (gamma_exp * (b / a).ln()).exp_m1() / gamma_exp
                };
                Some(c * am1 * v)
            }
            SlowlyVarying::LogFormal | SlowlyVarying::LogShift => {
                // dF = [(alpha-1) h^-alpha l(h) - h^(-alpha)] dh on (1, inf)
                let with_l = self.l.antiderivative(gamma_exp)?;
                let plain = SlowlyVarying::ONE.antiderivative(gamma_exp)?;
                let eval = |h: f64| am1 * with_l(h) - plain(h);
                let upper = if b == f64::INFINITY { 0.0 } else { eval(b) };
                Some(upper - eval(a))
            }
            SlowlyVarying::LogShiftPow(_) => None,
        }
    }

    /// Moment over `[a, b]` (atom included at `a == 1`), closed form when
    /// available and quadrature otherwise. This is the hot path of the
    /// decomposition evaluator.
    pub(crate) fn moment(&self, beta: f64, a: f64, b: f64) -> f64 {
        let atom = if a == 1.0 { self.atom_at_one() } else { 0.0 };
        atom + self.moment_open(beta, a, b)
    }

    /// As [`TailDistribution::moment`] over `(a, b]`.
    pub(crate) fn moment_open(&self, beta: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self.closed_form_moment(beta, a, b) {
            Some(v) => v,
            None => self.moment_open_quadrature(beta, a, b).unwrap_or(f64::NAN),
        }
    }

    /// Inverse of the tail: the smallest `h >= 1` with `P(H > h) <= u`.
    pub fn sample_weight(&self, u: f64) -> Result<f64> {
        if self.formal || !self.valid_tail {
            return Err(Error::UnsupportedSampling(format!(
                "alpha = {}, {} does not define a probability distribution",
                self.alpha, self.l
            )));
        }
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!(
                "uniform variate must lie in (0, 1], got {u}"
            )));
        }
        Ok(self.inverse_tail(u))
    }

    #[inline]
    pub(crate) fn inverse_tail(&self, u: f64) -> f64 {
        if u >= self.tail_unchecked(1.0) {
            return 1.0;
        }
        if let SlowlyVarying::Constant(c) = self.l {
            return (u / c).powf(1.0 / (1.0 - self.alpha)).max(1.0);
        }
        // bisection on ln h
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while self.tail_unchecked(hi.exp()) > u {
            lo = hi;
            hi *= 2.0;
            if hi > 700.0 {
                return f64::MAX;
            }
        }
        for _ in 0..200 {
            if hi - lo <= 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.tail_unchecked(mid.exp()) > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.exp()
    }

    pub fn spec(&self) -> DistributionSpec {
        DistributionSpec {
            alpha: self.alpha,
            l_name: self.l.name().to_string(),
            l_params: self.l.params(),
            formal: self.formal,
        }
    }
}

/// `h^(1-alpha) l(h)` is nonincreasing on a log grid and `F(1) <= 1`.
fn check_tail(alpha: f64, l: &SlowlyVarying) -> bool {
    let tail = |h: f64| h.powf(1.0 - alpha) * l.eval(h);
    let at_one = tail(1.0);
    if !(0.0..=1.0).contains(&at_one) {
        return false;
    }
    let step = VALIDITY_GRID_MAX.ln() / (VALIDITY_GRID - 1) as f64;
    let mut prev = at_one;
    for i in 1..VALIDITY_GRID {
        let h = (step * i as f64).exp();
        let t = tail(h);
        if !(t >= 0.0) || t > prev * (1.0 + 1e-12) {
            return false;
        }
        prev = t;
    }
    true
}

/// Key-value description of a distribution. `mu` and validity are never
/// stored; they are recomputed when the document is loaded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub alpha: f64,
    pub l_name: String,
    #[serde(default)]
    pub l_params: Vec<f64>,
    #[serde(default)]
    pub formal: bool,
}

impl DistributionSpec {
    pub fn build(&self) -> Result<TailDistribution> {
        let l = SlowlyVarying::from_name(&self.l_name, &self.l_params)?;
        if self.formal {
            TailDistribution::new_formal(self.alpha, l)
        } else {
            TailDistribution::new(self.alpha, l)
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("distribution spec serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// The resonant moment `Q(x) = int_1^x h^(alpha-1) dF(h)` for integer alpha.
#[derive(Debug, Clone)]
pub struct QFunctional {
    dist: TailDistribution,
    alpha: i64,
}

impl QFunctional {
    pub fn new(dist: &TailDistribution) -> Result<Self> {
        match dist.integer_alpha() {
            Some(a) if a >= 3 => Ok(QFunctional {
                dist: dist.clone(),
                alpha: a,
            }),
            _ => Err(Error::Domain(format!(
                "Q is defined for integer alpha >= 3, got {}",
                dist.alpha()
            ))),
        }
    }

    pub fn alpha(&self) -> i64 {
        self.alpha
    }

    /// `Q(x)`, integrating over `(1, x]` so that `Q(1) = 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 1.0) {
            return Err(Error::Domain(format!("Q requires x >= 1, got {x}")));
        }
        self.dist
            .moment_open_quadrature(self.alpha as f64 - 1.0, 1.0, x)
    }

    pub fn values(&self, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        xs.iter().map(|&x| Ok((x, self.eval(x)?))).collect()
    }
}

/// `Q(x)` for integer `alpha`.
pub fn q_function(dist: &TailDistribution, x: f64) -> Result<f64> {
    QFunctional::new(dist)?.eval(x)
}

/// `E[H]` for the distribution with tail `h^(1-alpha) l(h)`.
pub fn mean_weight(alpha: f64, l: SlowlyVarying) -> Result<f64> {
    Ok(TailDistribution::new(alpha, l)?.mu())
}
