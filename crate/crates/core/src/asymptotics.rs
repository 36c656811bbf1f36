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

//! Predicted growth laws for `P(K_k)` and `A_k(n) = C(n, k) P(K_k)`, and
//! log-log fits of computed values against them.

use std::fmt;

use rayon::prelude::*;

use crate::census::mean_clique_count;
use crate::distribution::{QFunctional, TailDistribution, INTEGER_TOL};
use crate::error::{Error, Result};
use crate::evaluator::{clique_prob_mc, clique_prob_quadrature, EvalOptions};
use crate::rng::{derive_seed, StreamRole};
use crate::sampler::SamplingMethod;
use crate::slowly_varying::{SlowlyVarying, SvFamily};

/// Default `|slope - theory|` tolerance for a grid spanning three decades
/// or more.
pub const DEFAULT_SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    KBelowAlpha,
    KEqualAlphaInteger,
    KAboveAlpha,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::KBelowAlpha => "k_below_alpha",
            Regime::KEqualAlphaInteger => "k_equal_alpha_integer",
            Regime::KAboveAlpha => "k_above_alpha",
        })
    }
}

/// Slowly varying correction multiplying the power of `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SvFactor {
    None,
    /// `l(sqrt n)^k`.
    LPow(u32),
    /// `ln(sqrt n)^e`.
    LogSqrtPow(i32),
    /// `Q(sqrt n)^(k-1) Q(n)`.
    QSqrtPowQ(u32),
    /// `l(sqrt n)^(alpha-1) Q(n)^(k-alpha+1)`.
    LPowQPow {
        l_power: i32,
        q_power: i32,
    },
}

impl SvFactor {
    pub fn describe(&self) -> String {
        match *self {
            SvFactor::None => "1".to_string(),
            SvFactor::LPow(k) => format!("l(sqrt n)^{k}"),
            SvFactor::LogSqrtPow(e) => format!("log(sqrt n)^{e}"),
            SvFactor::QSqrtPowQ(k) => format!("Q(sqrt n)^{} Q(n)", k - 1),
            SvFactor::LPowQPow { l_power, q_power } => {
                format!("l(sqrt n)^{l_power} Q(n)^{q_power}")
            }
        }
    }

    /// Value of the correction at `n` for the given distribution.
    pub fn eval(&self, dist: &TailDistribution, n: f64) -> Result<f64> {
        let root = n.sqrt();
        Ok(match *self {
            SvFactor::None => 1.0,
            SvFactor::LPow(k) => dist.l().eval(root).powi(k as i32),
            SvFactor::LogSqrtPow(e) => root.ln().powi(e),
            SvFactor::QSqrtPowQ(k) => {
                let q = QFunctional::new(dist)?;
                q.eval(root)?.powi(k as i32 - 1) * q.eval(n)?
            }
            SvFactor::LPowQPow { l_power, q_power } => {
                let q = QFunctional::new(dist)?;
                dist.l().eval(root).powi(l_power) * q.eval(n)?.powi(q_power)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticPrediction {
    pub k: usize,
    pub alpha: f64,
    pub regime: Regime,
    pub integer_mode: bool,
    /// Power of `n` in `P(K_k)`.
    pub p_exponent: f64,
    /// Power of `n` in `A_k(n)`.
    pub a_exponent: f64,
    pub sv_factor: SvFactor,
    /// Asymptotic equivalence (`true`) or only an upper bound.
    pub sharp: bool,
}

/// Growth law of `P(K_k)` for clique size `k` and tail exponent `alpha`.
pub fn predict(k: usize, alpha: f64, l: &SlowlyVarying) -> Result<AsymptoticPrediction> {
    if !(alpha.is_finite() && alpha > 2.0) {
        return Err(Error::Domain(format!(
            "predictions need alpha > 2, got {alpha}"
        )));
    }
    if k < 2 {
        return Err(Error::Domain(format!("predictions need k >= 2, got {k}")));
    }
    let kf = k as f64;
    let rounded = alpha.round();
    let integer_mode = (alpha - rounded).abs() < INTEGER_TOL;
    let below = |a: f64| 0.5 * kf * (1.0 - a);
    let family = l.family();

    let (regime, p_exponent, sv_factor, sharp) =
        if kf < alpha && !(integer_mode && k as i64 == rounded as i64) {
            (Regime::KBelowAlpha, below(kf), SvFactor::None, true)
        } else if !integer_mode {
            (
                Regime::KAboveAlpha,
                below(alpha),
                SvFactor::LPow(k as u32),
                true,
            )
        } else {
            let a = rounded as i64;
            let k_i = k as i64;
            if k_i == a {
                let (sv, sharp) = match family {
                    SvFamily::Constant => (SvFactor::LogSqrtPow(k as i32), true),
                    SvFamily::Log => (SvFactor::LogSqrtPow(2 * k as i32), true),
                    SvFamily::Other => (SvFactor::QSqrtPowQ(k as u32), false),
                };
                (Regime::KEqualAlphaInteger, below(kf), sv, sharp)
            } else {
                let (sv, sharp) = match family {
                    SvFamily::Constant => (SvFactor::None, true),
                    SvFamily::Log => (SvFactor::LogSqrtPow((2 * k_i - a - 1) as i32), false),
                    SvFamily::Other => (
                        SvFactor::LPowQPow {
                            l_power: (a - 1) as i32,
                            q_power: (k_i - a + 1) as i32,
                        },
                        false,
                    ),
                };
                (Regime::KAboveAlpha, below(rounded), sv, sharp)
            }
        };
    Ok(AsymptoticPrediction {
        k,
        alpha,
        regime,
        integer_mode,
        p_exponent,
        a_exponent: p_exponent + kf,
        sv_factor,
        sharp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub theory_exponent: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Ordinary least squares of `ln value` on `ln n`.
pub fn fit_exponent(
    points: &[(f64, f64)],
    theory_exponent: f64,
    tolerance: f64,
) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::Domain(format!(
            "fitting needs >= 4 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(Error::Domain(format!(
            "log-log fit needs positive values, got {} at n = {}",
            p.1, p.0
        )));
    }
    if points
        .windows(2)
        .any(|w| !(w[1].0 > w[0].0) || !(w[0].0 > 0.0))
    {
        return Err(Error::Domain(
            "n values must be positive and strictly increasing".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = (sse / (len - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let verdict = if (slope - theory_exponent).abs() <= (2.0 * slope_stderr).max(tolerance) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ScalingFit {
        points: points.to_vec(),
        slope,
        intercept,
        slope_stderr,
        r_squared,
        theory_exponent,
        tolerance,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StudyMethod {
    /// `P(K_k)` from the decomposition.
    Quadrature,
    /// `P(K_k)` by Monte Carlo with this many samples per point.
    MonteCarlo { samples: usize },
    /// `A_k(n)` as the mean clique count over sampled graphs.
    Graphs { replicas: usize },
}

impl StudyMethod {
    pub fn name(&self) -> &'static str {
        match self {
            StudyMethod::Quadrature => "quadrature",
            StudyMethod::MonteCarlo { .. } => "mc",
            StudyMethod::Graphs { .. } => "graphs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub value: f64,
    pub predicted_factor: f64,
    pub residual: f64,
    /// Absolute error estimate of `value`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub k: usize,
    pub method: StudyMethod,
    pub prediction: AsymptoticPrediction,
    pub rows: Vec<StudyRow>,
    pub fit: Option<ScalingFit>,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
}

impl ScalingStudy {
    pub fn slope(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.slope)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value,predicted_factor,residual,error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e}\n",
                r.n, r.value, r.predicted_factor, r.residual, r.error
            ));
        }
        let (slope, stderr) = self
            .fit
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |f| (f.slope, f.slope_stderr));
        let theory = self.theory_exponent();
        out.push_str("slope,stderr,theory_exponent,verdict\n");
        out.push_str(&format!("{slope},{stderr},{theory},{}\n", self.verdict));
        out
    }

    pub fn theory_exponent(&self) -> f64 {
        match self.method {
            StudyMethod::Graphs { .. } => self.prediction.a_exponent,
            _ => self.prediction.p_exponent,
        }
    }
}

/// `n_grid` must be strictly increasing with a constant ratio (1% slack for
/// integer rounding).
fn check_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.len() < 4 {
        return Err(Error::Domain(format!(
            "scaling studies need >= 4 grid points, got {}",
            n_grid.len()
        )));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "n grid must be positive and strictly increasing".into(),
        ));
    }
    let ratio = n_grid[1] as f64 / n_grid[0] as f64;
    if n_grid
        .windows(2)
        .any(|w| ((w[1] as f64 / w[0] as f64) / ratio - 1.0).abs() > 0.01)
    {
        return Err(Error::Domain("n grid must be geometric".into()));
    }
    Ok(())
}

/// `count` points from `start` multiplying by `ratio`, rounded to integers.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<usize> {
    (0..count)
        .map(|i| (start * ratio.powi(i as i32)).round() as usize)
        .collect()
}

/// Computes the clique statistic over `n_grid`, divides out the predicted
/// slowly varying factor and fits the remaining power of `n`.
pub fn scaling_study(
    dist: &TailDistribution,
    k: usize,
    n_grid: &[usize],
    method: StudyMethod,
    seed: u64,
    tolerance: f64,
    opts: &EvalOptions,
) -> Result<ScalingStudy> {
    check_grid(n_grid)?;
    let prediction = predict(k, dist.alpha(), dist.l())?;
    let evaluated: Vec<(f64, f64, Option<String>)> = n_grid
        .par_iter()
        .enumerate()
        .map(|(idx, &n)| -> Result<(f64, f64, Option<String>)> {
            let point_seed = derive_seed(seed, StreamRole::Replica, idx as u64);
            Ok(match method {
                StudyMethod::Quadrature => {
                    let report = clique_prob_quadrature(dist, k, n, opts)?;
                    let note = (!report.warnings.is_empty())
                        .then(|| format!("n = {n}: convergence warnings {:?}", report.warnings));
                    (report.total, report.max_term_error() * report.total, note)
                }
                StudyMethod::MonteCarlo { samples } => {
                    let est = clique_prob_mc(dist, k, n, samples, point_seed)?;
                    (est.mean, est.stderr, None)
                }
                StudyMethod::Graphs { replicas } => {
                    let summary =
                        mean_clique_count(dist, n, k, replicas, point_seed, SamplingMethod::Auto)?;
                    (summary.mean, summary.stderr, None)
                }
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(n_grid.len());
    let mut diagnostics = Vec::new();
    for (&n, (value, error, note)) in n_grid.iter().zip(evaluated) {
        let predicted_factor = prediction.sv_factor.eval(dist, n as f64)?;
        diagnostics.extend(note);
        rows.push(StudyRow {
            n,
            value,
            predicted_factor,
            residual: value / predicted_factor,
            error,
        });
    }
    let theory = match method {
        StudyMethod::Graphs { .. } => prediction.a_exponent,
        _ => prediction.p_exponent,
    };
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.residual)).collect();
    let (fit, verdict) = match fit_exponent(&points, theory, tolerance) {
        Ok(fit) => {
            let verdict = if diagnostics.is_empty() {
                fit.verdict
            } else {
                Verdict::Inconclusive
            };
            (Some(fit), verdict)
        }
        Err(e) => {
            diagnostics.push(format!("fit failed: {e}"));
            (None, Verdict::Inconclusive)
        }
    };
    Ok(ScalingStudy {
        k,
        method,
        prediction,
        rows,
        fit,
        verdict,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prediction_examples() {
        let p = predict(3, 2.5, &SlowlyVarying::ONE).unwrap();
        assert_eq!(p.p_exponent, -2.25);
        assert_eq!(p.sv_factor, SvFactor::LPow(3));
        assert!(p.sharp && p.regime == Regime::KAboveAlpha);
        let p = predict(3, 4.5, &SlowlyVarying::ONE).unwrap();
        assert_eq!((p.p_exponent, p.a_exponent), (-3.0, 0.0));
        assert!(p.sharp && p.regime == Regime::KBelowAlpha);
        let p = predict(4, 4.0, &SlowlyVarying::ONE).unwrap();
        assert_eq!(p.p_exponent, -6.0);
        assert_eq!(p.sv_factor, SvFactor::LogSqrtPow(4));
        assert!(p.sharp && p.integer_mode);
        assert!(predict(3, 2.0, &SlowlyVarying::ONE).is_err());
    }

    #[test]
    fn integer_alpha_log_cases() {
        let p = predict(3, 3.0, &SlowlyVarying::LogShift).unwrap();
        assert_eq!(p.sv_factor, SvFactor::LogSqrtPow(6));
        assert!(p.sharp);
        let p = predict(5, 3.0, &SlowlyVarying::LogShift).unwrap();
        assert_eq!(p.sv_factor, SvFactor::LogSqrtPow(6));
        assert_eq!(p.p_exponent, -5.0);
        assert!(!p.sharp);
        let p = predict(5, 3.0, &SlowlyVarying::LogShiftPow(2.0)).unwrap();
        assert_eq!(
            p.sv_factor,
            SvFactor::LPowQPow {
                l_power: 2,
                q_power: 3
            }
        );
        assert!(!p.sharp);
        let p = predict(3, 3.0, &SlowlyVarying::LogShiftPow(2.0)).unwrap();
        assert_eq!(p.sv_factor, SvFactor::QSqrtPowQ(3));
        assert!(!p.sharp);
        let p = predict(4, 3.0, &SlowlyVarying::ONE).unwrap();
        assert_eq!(
            (p.sv_factor, p.sharp, p.p_exponent),
            (SvFactor::None, true, -4.0)
        );
        // near-integer alpha snaps
        assert!(
            predict(3, 3.0 + 1e-12, &SlowlyVarying::ONE)
                .unwrap()
                .integer_mode
        );
        assert!(
            !predict(3, 3.0 + 1e-6, &SlowlyVarying::ONE)
                .unwrap()
                .integer_mode
        );
    }

    #[test]
    fn exact_power_law_fit() {
        let pts: Vec<(f64, f64)> = [1e2, 1e3, 1e4, 1e5]
            .iter()
            .map(|&n: &f64| (n, 7.0 * n.powf(-2.25)))
            .collect();
        let fit = fit_exponent(&pts, -2.25, 0.01).unwrap();
        assert!((fit.slope + 2.25).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-10);
        assert_eq!(fit.verdict, Verdict::Pass);
        let flat: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&n| (n, 3.0)).collect();
        let fit = fit_exponent(&flat, 0.0, 0.01).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!(fit_exponent(&flat[..3], 0.0, 0.1).is_err());
        let bad = [(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)];
        assert!(fit_exponent(&bad, 0.0, 0.1).is_err());
    }

    #[test]
    fn log_corrected_data_biases_slope_upward() {
        // c n^-3 ln n: local slope is -3 + 1/ln n, shrinking as the grid moves out
        let fit_from = |start: f64| {
            let pts: Vec<(f64, f64)> = (0..5)
                .map(|i| {
                    let n = start * 10f64.powi(i);
                    (n, 0.5 * n.powi(-3) * n.ln())
                })
                .collect();
            fit_exponent(&pts, -3.0, 0.0).unwrap().slope
        };
        let near = fit_from(1e2);
        let far = fit_from(1e6);
        assert!(near > -3.0 && far > -3.0);
        assert!(far < near);
    }

    #[test]
    fn grids() {
        assert_eq!(
            geometric_grid(100.0, 10.0, 5),
            vec![100, 1000, 10_000, 100_000, 1_000_000]
        );
        assert!(check_grid(&[100, 1000, 10_000]).is_err());
        assert!(check_grid(&[100, 1000, 5000, 10_000]).is_err());
        assert!(check_grid(&geometric_grid(100.0, 10f64.sqrt(), 6)).is_ok());
    }
}
