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

use approx::assert_relative_eq;
use cliquescale::sampler::sample_weights;
use cliquescale::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pareto_moment(alpha: f64, beta: f64, a: f64, b: f64) -> f64 {
    let e = beta - alpha + 1.0;
    if e.abs() < 1e-12 {
        (alpha - 1.0) * (b / a).ln()
    } else {
        (alpha - 1.0) / e * (b.powf(e) - a.powf(e))
    }
}

#[test]
fn moments_match_closed_forms_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let alpha = rng.random_range(2.1..6.0);
        let beta = rng.random_range(0.0..6.0);
        let a = rng.random_range(1.0..50.0);
        let b = a * rng.random_range(1.01..1e4);
        let d = TailDistribution::pareto(alpha).unwrap();
        let got = d.moment_integral(beta, a, b).unwrap();
        let want = pareto_moment(alpha, beta, a, b);
        assert_relative_eq!(got, want, max_relative = 1e-8);
    }
    let d = TailDistribution::pareto(3.0).unwrap();
    assert_relative_eq!(
        d.moment_integral(2.0, 3.0, 3.0 * std::f64::consts::E)
            .unwrap(),
        2.0,
        max_relative = 1e-8
    );
}

#[test]
fn moment_growth_against_threshold() {
    let d = TailDistribution::pareto(3.5).unwrap();
    let beta = 4.0;
    let x = 1e6f64;
    let scaled = d.moment_integral(beta, 1.0, x).unwrap() / x.powf(beta - 2.5);
    assert!((scaled / (2.5 / (beta - 2.5)) - 1.0).abs() < 0.01);
    let beta = 1.5;
    let near = d.moment_integral(beta, 1.0, 1e6).unwrap();
    let far = d.moment_integral(beta, 1.0, 1e9).unwrap();
    assert!((far / near - 1.0).abs() < 1e-3);
    assert!(matches!(
        d.moment_integral(2.5, 1.0, f64::INFINITY),
        Err(Error::Divergent(_))
    ));
}

#[test]
fn mean_weight_is_one_plus_tail_integral() {
    assert_relative_eq!(
        mean_weight(3.0, SlowlyVarying::ONE).unwrap(),
        2.0,
        max_relative = 1e-10
    );
    assert_relative_eq!(
        mean_weight(4.0, SlowlyVarying::ONE).unwrap(),
        1.5,
        max_relative = 1e-10
    );
    assert_relative_eq!(
        mean_weight(2.5, SlowlyVarying::ONE).unwrap(),
        3.0,
        max_relative = 1e-10
    );
    // int_1^inf h^-2.5 (1 + ln h) dh = 1/1.5 + 1/1.5^2
    let want = 1.0 + 1.0 / 1.5 + 1.0 / 2.25;
    assert_relative_eq!(
        mean_weight(3.5, SlowlyVarying::LogShift).unwrap(),
        want,
        max_relative = 1e-8
    );
    assert!(matches!(
        mean_weight(2.0, SlowlyVarying::ONE),
        Err(Error::InvalidParameter(_))
    ));
    for (alpha, l) in [
        (3.0, SlowlyVarying::LogShiftPow(2.0)),
        (4.0, SlowlyVarying::Constant(0.3)),
    ] {
        let d = TailDistribution::new(alpha, l).unwrap();
        let oracle = 1.0 + common::gauss_legendre_log(|h| d.tail_unchecked(h), 1.0, 1e8, 800);
        let rest = d.tail_unchecked(1e8) * 1e8 / (alpha - 2.0) * 1.5;
        assert!((d.mu() - oracle).abs() <= rest + 1e-8 * oracle);
    }
}

#[test]
fn empirical_tail_matches() {
    let n = 10_000;
    for d in [
        TailDistribution::pareto(2.5).unwrap(),
        TailDistribution::new(3.5, SlowlyVarying::LogShift).unwrap(),
        TailDistribution::new(3.0, SlowlyVarying::Constant(0.5)).unwrap(),
    ] {
        let weights = sample_weights(&d, 1_000_000, 31).unwrap();
        let l = (d.mu() * n as f64).sqrt();
        for h in [1.0, 2.0, 5.0, 10.0, 50.0, l] {
            let p = d.tail(h).unwrap();
            let freq = weights.iter().filter(|&&w| w > h).count() as f64 / weights.len() as f64;
            let sigma = (p * (1.0 - p) / weights.len() as f64).sqrt();
            assert!(
                (freq - p).abs() <= 4.0 * sigma + 1e-12,
                "h={h}: {freq} vs {p}"
            );
        }
    }
}

#[test]
fn q_properties() {
    let grid: Vec<f64> = (1..=18).map(|i| 10f64.powf(i as f64 * 0.5)).collect();
    for (alpha, l) in [
        (3.0, SlowlyVarying::ONE),
        (4.0, SlowlyVarying::LogShift),
        (3.0, SlowlyVarying::LogShiftPow(2.0)),
        (5.0, SlowlyVarying::Constant(0.7)),
    ] {
        let d = TailDistribution::new(alpha, l).unwrap();
        let q = QFunctional::new(&d).unwrap();
        assert_eq!(q.eval(1.0).unwrap(), 0.0);
        let values: Vec<f64> = grid.iter().map(|&x| q.eval(x).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]));
        let doubling: Vec<f64> = grid
            .iter()
            .map(|&x| q.eval(2.0 * x).unwrap() / q.eval(x).unwrap())
            .collect();
        assert!(doubling.windows(2).all(|w| w[1] <= w[0] && w[1] >= 1.0));
        // Q grows like a power of ln x at most cubic here
        for (&x, &r) in grid.iter().zip(&doubling) {
            assert!(r - 1.0 <= 4.0 * 2f64.ln() / x.ln());
        }
        let bound: Vec<f64> = grid
            .iter()
            .skip(1)
            .map(|&x| l.eval(x) / q.eval(x).unwrap())
            .collect();
        let c = bound[0];
        assert!(bound.iter().all(|&r| r <= c * (1.0 + 1e-12)), "{bound:?}");
    }
}

#[test]
fn q_examples_and_formal_log() {
    let d = TailDistribution::pareto(3.0).unwrap();
    assert_relative_eq!(
        q_function(&d, std::f64::consts::E).unwrap(),
        2.0,
        max_relative = 1e-10
    );
    let formal = TailDistribution::new_formal(3.0, SlowlyVarying::LogFormal).unwrap();
    let x = std::f64::consts::E.powi(2);
    assert_relative_eq!(q_function(&formal, x).unwrap(), 2.0, max_relative = 1e-10);
    assert!(q_function(&TailDistribution::pareto(3.5).unwrap(), 10.0).is_err());
    assert!(formal.sample_weight(0.5).is_err());
}

#[test]
fn spec_text_round_trip() {
    let d = TailDistribution::new(3.5, SlowlyVarying::LogShiftPow(1.5)).unwrap();
    let text = d.spec().to_text();
    let back = DistributionSpec::from_text(&text).unwrap().build().unwrap();
    assert_eq!(back.alpha(), d.alpha());
    assert_eq!(back.l(), d.l());
    assert_eq!(back.mu(), d.mu());
}
