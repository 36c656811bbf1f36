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

//! Chung-Lu inhomogeneous random graphs with power-law weights.
//!
//! Weights are i.i.d. with `P(H > h) = h^(1-alpha) l(h)` for a slowly varying
//! `l`, and pairs connect independently with probability
//! `min(h_i h_j / (mu n), 1)`. The crate evaluates the clique probability
//! `P(K_k)` by a conditioning decomposition around `sqrt(mu n)` and by
//! Monte Carlo, counts cliques in sampled graphs and checks the growth
//! rates of clique counts in `n`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod census;
pub mod distribution;
pub mod error;
pub mod evaluator;
pub mod graph;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod slowly_varying;
pub mod verify;

pub use asymptotics::{
    fit_exponent, predict, scaling_study, AsymptoticPrediction, Regime, ScalingFit, ScalingStudy,
    StudyMethod, SvFactor, Verdict,
};
pub use census::{brute_force_count, count_cliques, expected_cliques_given_weights, CliqueCensus};
pub use distribution::{mean_weight, q_function, DistributionSpec, QFunctional, TailDistribution};
pub use error::{Error, Result};
pub use evaluator::{
    clique_prob_mc, clique_prob_quadrature, DecompositionReport, EvalOptions, McEstimate,
};
pub use graph::WeightedGraph;
pub use sampler::{
    edge_probability, sample_graph, sample_graph_skip, SamplerConfig, SamplingMethod,
};
pub use slowly_varying::SlowlyVarying;
