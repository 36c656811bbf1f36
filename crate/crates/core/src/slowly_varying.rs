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

//! Catalogue of slowly varying corrections `l(h)` for the weight tail
//! `P(H > h) = h^(1-alpha) l(h)`.

use std::fmt;

use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};

/// Which asymptotic family a correction belongs to. Drives the special
/// cases of the integer-alpha growth laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvFamily {
    Constant,
    Log,
    Other,
}

/// A named slowly varying function.
///
/// `LogFormal` is the literal `l(h) = ln h`. Its tail vanishes at `h = 1`
/// and increases just above it, so it is only usable in formal mode (for
/// the `Q` functional); `LogShift` is the samplable stand-in `ln(e h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowlyVarying {
    /// `l(h) = c`, `0 <= c <= 1`. `c = 0` is the degenerate point mass at 1.
    Constant(f64),
    /// `l(h) = ln(e h) = 1 + ln h`.
    LogShift,
    /// `l(h) = (1 + ln h)^p`, `p > 0`.
    LogShiftPow(f64),
    /// `l(h) = ln h` (formal only).
    LogFormal,
}

impl SlowlyVarying {
    pub const ONE: SlowlyVarying = SlowlyVarying::Constant(1.0);

    /// Builds a catalogue entry from its CLI / file name.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let param = |what: &str| -> Result<f64> {
            match params {
                [p] => Ok(*p),
                _ => Err(Error::InvalidParameter(format!(
                    "l = {name} takes exactly one parameter ({what}), got {}",
                    params.len()
                ))),
            }
        };
        let no_params = || -> Result<()> {
            if params.is_empty() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "l = {name} takes no parameters"
                )))
            }
        };
        let l = match name {
            "one" => {
                no_params()?;
                SlowlyVarying::ONE
            }
            "const" => SlowlyVarying::Constant(param("c")?),
            "log_shift" => {
                no_params()?;
                SlowlyVarying::LogShift
            }
            "log_shift_pow" => SlowlyVarying::LogShiftPow(param("p")?),
            "log" => {
                no_params()?;
                SlowlyVarying::LogFormal
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown slowly varying function '{other}' \
                     (expected one of: one, const, log_shift, log_shift_pow, log)"
                )))
            }
        };
        l.check_params()?;
        Ok(l)
    }

    fn check_params(&self) -> Result<()> {
        match *self {
            SlowlyVarying::Constant(c) if !(0.0..=1.0).contains(&c) => Err(
                Error::InvalidParameter(format!("constant l must lie in [0, 1], got {c}")),
            ),
            SlowlyVarying::LogShiftPow(p) if !(p > 0.0 && p.is_finite()) => Err(
                Error::InvalidParameter(format!("log_shift_pow exponent must be > 0, got {p}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match *self {
            SlowlyVarying::Constant(1.0) => "one",
            SlowlyVarying::Constant(_) => "const",
            SlowlyVarying::LogShift => "log_shift",
            SlowlyVarying::LogShiftPow(_) => "log_shift_pow",
            SlowlyVarying::LogFormal => "log",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            SlowlyVarying::Constant(c) if c != 1.0 => vec![c],
            SlowlyVarying::LogShiftPow(p) => vec![p],
            _ => Vec::new(),
        }
    }

    pub fn family(&self) -> SvFamily {
        match self {
            SlowlyVarying::Constant(_) => SvFamily::Constant,
            SlowlyVarying::LogShift | SlowlyVarying::LogFormal => SvFamily::Log,
            SlowlyVarying::LogShiftPow(p) if *p == 1.0 => SvFamily::Log,
            SlowlyVarying::LogShiftPow(_) => SvFamily::Other,
        }
    }

    pub fn is_formal(&self) -> bool {
        matches!(self, SlowlyVarying::LogFormal)
    }

    #[inline]
    pub fn eval(&self, h: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => c,
            SlowlyVarying::LogShift => 1.0 + h.ln(),
            SlowlyVarying::LogShiftPow(p) => (1.0 + h.ln()).powf(p),
            SlowlyVarying::LogFormal => h.ln(),
        }
    }

    /// `l'(h)`.
    #[inline]
    pub fn derivative(&self, h: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(_) => 0.0,
            SlowlyVarying::LogShift | SlowlyVarying::LogFormal => 1.0 / h,
            SlowlyVarying::LogShiftPow(p) => p * (1.0 + h.ln()).powf(p - 1.0) / h,
        }
    }

    /// `l(lambda x) / l(x)`; tends to 1 for every fixed `lambda`.
    pub fn ratio(&self, lambda: f64, x: f64) -> f64 {
        self.eval(lambda * x) / self.eval(x)
    }

    /// `int_t^inf h^(gamma-1) l(h) dh` for `gamma < 0`, `t >= 1`, in closed form.
    pub fn tail_integral(&self, gamma_exp: f64, t: f64) -> f64 {
        debug_assert!(gamma_exp < 0.0 && t >= 1.0);
        let g = -gamma_exp;
        match *self {
            SlowlyVarying::Constant(c) => c * t.powf(gamma_exp) / g,
            SlowlyVarying::LogShift => t.powf(gamma_exp) * ((1.0 + t.ln()) / g + 1.0 / (g * g)),
            SlowlyVarying::LogFormal => t.powf(gamma_exp) * (t.ln() / g + 1.0 / (g * g)),
            SlowlyVarying::LogShiftPow(p) => {
                // substitute s = 1 + ln h: e^(g) g^-(p+1) Gamma(p+1, g s)
                let s = 1.0 + t.ln();
                let a = p + 1.0;
                let upper = gamma(a) * gamma_ur(a, g * s);
                (g - a * g.ln()).exp() * upper
            }
        }
    }

    /// Antiderivative of `h^(gamma-1) l(h)` when one is available in
    /// elementary form.
    pub fn antiderivative(&self, gamma_exp: f64) -> Option<impl Fn(f64) -> f64> {
        let kind = match *self {
            SlowlyVarying::Constant(c) => (c, 0.0),
            SlowlyVarying::LogFormal => (0.0, 1.0),
            SlowlyVarying::LogShift => (1.0, 1.0),
            SlowlyVarying::LogShiftPow(_) => return None,
        };
        let (c0, c1) = kind;
        Some(move |h: f64| {
            // l(h) = c0 + c1 ln h
            let lh = h.ln();
            if gamma_exp == 0.0 {
                c0 * lh + c1 * 0.5 * lh * lh
            } else {
                let hg = h.powf(gamma_exp);
                c0 * hg / gamma_exp + c1 * hg * (lh / gamma_exp - 1.0 / (gamma_exp * gamma_exp))
            }
        })
    }
}

impl fmt::Display for SlowlyVarying {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SlowlyVarying::Constant(c) => write!(f, "l(h) = {c}"),
            SlowlyVarying::LogShift => write!(f, "l(h) = ln(e h)"),
            SlowlyVarying::LogShiftPow(p) => write!(f, "l(h) = ln(e h)^{p}"),
            SlowlyVarying::LogFormal => write!(f, "l(h) = ln h (formal)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_log, QuadOptions};

    #[test]
    fn names_round_trip() {
        for l in [
            SlowlyVarying::ONE,
            SlowlyVarying::Constant(0.5),
            SlowlyVarying::LogShift,
            SlowlyVarying::LogShiftPow(2.0),
            SlowlyVarying::LogFormal,
        ] {
            assert_eq!(SlowlyVarying::from_name(l.name(), &l.params()).unwrap(), l);
        }
        assert!(SlowlyVarying::from_name("const", &[1.5]).is_err());
        assert!(SlowlyVarying::from_name("log_shift_pow", &[]).is_err());
        assert!(SlowlyVarying::from_name("sqrt", &[]).is_err());
    }

    #[test]
    fn positive_above_one() {
        for l in [
            SlowlyVarying::ONE,
            SlowlyVarying::LogShift,
            SlowlyVarying::LogShiftPow(0.5),
            SlowlyVarying::LogFormal,
        ] {
            for h in [1.0001, 2.0, 1e3, 1e9] {
                assert!(l.eval(h) > 0.0);
            }
        }
    }

    #[test]
    fn slow_variation_grid() {
        // logarithms approach 1 only like ln(lambda) / ln(x), so the grid
        // asserts a monotone approach bounded by that rate
        for l in [
            SlowlyVarying::ONE,
            SlowlyVarying::Constant(0.3),
            SlowlyVarying::LogShift,
            SlowlyVarying::LogShiftPow(2.0),
            SlowlyVarying::LogFormal,
        ] {
            for lambda in [2.0f64, 10.0] {
                let devs: Vec<f64> = [1e3f64, 1e6, 1e9]
                    .iter()
                    .map(|&x| (l.ratio(lambda, x) - 1.0).abs())
                    .collect();
                assert!(devs[2] <= devs[1] && devs[1] <= devs[0], "{l}: {devs:?}");
                let p = l.params().first().copied().unwrap_or(1.0);
                let bound = (1.0 + lambda.ln() / 1e9f64.ln()).powf(p) - 1.0;
                assert!(devs[2] <= bound + 1e-12, "{l}: {devs:?}");
            }
        }
        assert_eq!(SlowlyVarying::ONE.ratio(10.0, 1e3), 1.0);
    }

    #[test]
    fn closed_form_tails_match_quadrature() {
        let opts = QuadOptions::default().with_rel_tol(1e-12);
        for l in [
            SlowlyVarying::Constant(0.7),
            SlowlyVarying::LogShift,
            SlowlyVarying::LogShiftPow(2.5),
            SlowlyVarying::LogShiftPow(0.5),
            SlowlyVarying::LogFormal,
        ] {
            for (g, t) in [(-0.5, 3.0), (-1.5, 1.0), (-2.0, 100.0)] {
                let exact = l.tail_integral(g, t);
                // finite range plus a far tail that is below 1e-14 relative
                let far = t * (60.0f64 / -g).exp();
                let q = integrate_log(|h| h.powf(g - 1.0) * l.eval(h), t, far, &opts);
                assert!(
                    ((q.value - exact) / exact).abs() < 1e-9,
                    "{l} {g} {t}: {} vs {exact}",
                    q.value
                );
            }
        }
    }
}
