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

//! Run configuration: command-line flags layered over an optional key-value
//! file, with the seed falling back to `CLIQUESCALE_SEED`.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use cliquescale::{SlowlyVarying, TailDistribution};

pub const SEED_ENV: &str = "CLIQUESCALE_SEED";

/// Flags shared by all subcommands. Every field is optional so that a
/// config file can supply it.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Tail exponent, must exceed 2.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Slowly varying factor: one, const, log_shift, log_shift_pow.
    #[arg(long)]
    pub l: Option<String>,
    /// Parameters of the slowly varying factor (comma list).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lp: Option<Vec<f64>>,
    /// Clique size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of nodes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Geometric grid of n values (comma list).
    #[arg(long = "n-grid", value_delimiter = ',', num_args = 1..)]
    pub n_grid: Option<Vec<usize>>,
    /// Monte Carlo samples, or graph replicas for graph-based studies.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// naive, skip or auto for sampling; quadrature, mc or graphs for
    /// scaling studies.
    #[arg(long)]
    pub method: Option<String>,
    /// Worker thread cap (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    /// Override the derived mean weight mu.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Slope tolerance for scaling verdicts.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Relative tolerance of the quadrature.
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
    /// Key-value config file; flags win over its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    l: Option<String>,
    lp: Option<Vec<f64>>,
    k: Option<usize>,
    n: Option<usize>,
    n_grid: Option<Vec<usize>>,
    samples: Option<usize>,
    seed: Option<u64>,
    method: Option<String>,
    threads: Option<usize>,
    output: Option<PathBuf>,
    mu: Option<f64>,
    tolerance: Option<f64>,
    rel_tol: Option<f64>,
}

/// Flags merged with the config file and the environment.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub l_name: String,
    pub l_params: Vec<f64>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub seed: u64,
    explicit_seed: Option<u64>,
    pub method: Option<String>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub mu: Option<f64>,
    pub tolerance: Option<f64>,
    pub rel_tol: Option<f64>,
}

fn read_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, String> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got '{s}'"))?,
            ),
            Err(_) => None,
        };
        let f = flags.clone();
        let explicit_seed = f.seed.or(file.seed).or(env_seed);
        Ok(RunConfig {
            alpha: f.alpha.or(file.alpha),
            l_name: f.l.or(file.l).unwrap_or_else(|| "one".into()),
            l_params: f.lp.or(file.lp).unwrap_or_default(),
            k: f.k.or(file.k),
            n: f.n.or(file.n),
            n_grid: f.n_grid.or(file.n_grid),
            samples: f.samples.or(file.samples),
            seed: explicit_seed.unwrap_or(0),
            explicit_seed,
            method: f.method.or(file.method),
            threads: f.threads.or(file.threads),
            output: f.output.or(file.output),
            mu: f.mu.or(file.mu),
            tolerance: f.tolerance.or(file.tolerance),
            rel_tol: f.rel_tol.or(file.rel_tol),
        })
    }

    /// The seed from flags, file or environment, else `default`.
    pub fn seed_or(&self, default: u64) -> u64 {
        self.explicit_seed.unwrap_or(default)
    }

    pub fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, String> {
        value.ok_or_else(|| format!("missing --{flag}"))
    }

    pub fn distribution(&self) -> Result<TailDistribution, String> {
        let alpha = Self::require(self.alpha, "alpha")?;
        let l =
            SlowlyVarying::from_name(&self.l_name, &self.l_params).map_err(|e| e.to_string())?;
        let dist = TailDistribution::new(alpha, l).map_err(|e| e.to_string())?;
        match self.mu {
            Some(mu) => dist.with_mu(mu).map_err(|e| e.to_string()),
            None => Ok(dist),
        }
    }

    /// `key value` lines describing the resolved run.
    pub fn header(&self, command: &str, dist: Option<&TailDistribution>) -> Vec<String> {
        let mut lines = vec![
            format!("cliquescale {}", env!("CARGO_PKG_VERSION")),
            format!("command {command}"),
        ];
        if let Some(d) = dist {
            lines.push(format!("alpha {}", d.alpha()));
            lines.push(format!("l {}", d.l().name()));
            let params: Vec<String> = d.l().params().iter().map(|p| p.to_string()).collect();
            if !params.is_empty() {
                lines.push(format!("lp {}", params.join(",")));
            }
            lines.push(format!("mu {}", d.mu()));
        }
        let optional = [
            ("k", self.k.map(|v| v.to_string())),
            ("n", self.n.map(|v| v.to_string())),
            (
                "n_grid",
                self.n_grid.as_ref().map(|g| {
                    g.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                }),
            ),
            ("samples", self.samples.map(|v| v.to_string())),
            ("method", self.method.clone()),
            ("tolerance", self.tolerance.map(|v| v.to_string())),
            ("rel_tol", self.rel_tol.map(|v| v.to_string())),
        ];
        for (key, value) in optional {
            if let Some(v) = value {
                lines.push(format!("{key} {v}"));
            }
        }
        lines
    }
}
