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

use cliquescale::asymptotics::geometric_grid;
use cliquescale::*;

fn quadrature_study(alpha: f64, k: usize, grid: &[usize]) -> ScalingStudy {
    let d = TailDistribution::pareto(alpha).unwrap();
    scaling_study(
        &d,
        k,
        grid,
        StudyMethod::Quadrature,
        1,
        0.1,
        &EvalOptions::default(),
    )
    .unwrap()
}

#[test]
fn triangle_slope_above_alpha() {
    let study = quadrature_study(2.5, 3, &geometric_grid(100.0, 10.0, 5));
    assert_eq!(study.verdict, Verdict::Pass);
    assert!(
        (study.slope().unwrap() + 2.25).abs() <= 0.1,
        "{:?}",
        study.slope()
    );
}

#[test]
fn edge_slope_is_minus_one() {
    for alpha in [2.5, 3.0, 4.5] {
        let study = quadrature_study(alpha, 2, &geometric_grid(100.0, 10.0, 5));
        let slope = study.slope().unwrap();
        assert!((slope + 1.0).abs() <= 0.05, "alpha={alpha}: {slope}");
    }
}

#[test]
fn integer_alpha_log_factor_is_divided_out() {
    let study = quadrature_study(3.0, 3, &geometric_grid(1e3, 10f64.sqrt(), 9));
    assert_eq!(
        study.prediction.sv_factor.describe(),
        SvFactor::LogSqrtPow(3).describe()
    );
    let last: Vec<f64> = study
        .rows
        .iter()
        .filter(|r| r.n >= 1_000_000)
        .map(|r| r.residual * (r.n as f64).powi(3))
        .collect();
    let (lo, hi) = last.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| {
        (lo.min(r), hi.max(r))
    });
    assert!(hi / lo - 1.0 < 0.1, "{last:?}");
}

#[test]
fn study_csv_has_summary() {
    let study = quadrature_study(4.5, 3, &geometric_grid(100.0, 10.0, 4));
    let csv = study.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,value,predicted_factor,residual,error");
    assert_eq!(lines.len(), 1 + 4 + 2);
    assert!(lines[6].ends_with(",pass"));
}

#[test]
fn graph_study_tracks_clique_counts() {
    let d = TailDistribution::pareto(4.5).unwrap();
    let grid = geometric_grid(200.0, 2.0, 4);
    let study = scaling_study(
        &d,
        2,
        &grid,
        StudyMethod::Graphs { replicas: 40 },
        3,
        0.1,
        &EvalOptions::default(),
    )
    .unwrap();
    // A_2(n) grows linearly
    assert_eq!(study.theory_exponent(), 1.0);
    assert_eq!(study.verdict, Verdict::Pass, "{:?}", study.fit);
    let mc = scaling_study(
        &d,
        2,
        &grid,
        StudyMethod::MonteCarlo { samples: 200_000 },
        3,
        0.1,
        &EvalOptions::default(),
    )
    .unwrap();
    assert_eq!(mc.verdict, Verdict::Pass, "{:?}", mc.fit);
}

#[test]
fn bad_grids_are_rejected() {
    let d = TailDistribution::pareto(3.5).unwrap();
    let opts = EvalOptions::default();
    assert!(scaling_study(
        &d,
        3,
        &[100, 1000, 10_000],
        StudyMethod::Quadrature,
        0,
        0.1,
        &opts
    )
    .is_err());
    assert!(scaling_study(
        &d,
        3,
        &[100, 200, 1000, 2000],
        StudyMethod::Quadrature,
        0,
        0.1,
        &opts
    )
    .is_err());
}
