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

//! `cliquescale` command-line front end.
//!
//! Exit codes: 0 success (scaling: pass), 1 runtime error, 2 invalid
//! configuration, 3 scaling or verification failure, 4 inconclusive
//! scaling verdict.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};

use cliquescale::asymptotics::{geometric_grid, DEFAULT_SLOPE_TOLERANCE};
use cliquescale::quad::QuadOptions;
use cliquescale::verify::{run_criterion, CRITERIA, DEFAULT_SEED};
use cliquescale::{
    clique_prob_mc, clique_prob_quadrature, count_cliques, sample_graph, scaling_study,
    DecompositionReport, Error, EvalOptions, SamplerConfig, SamplingMethod, StudyMethod, Verdict,
    WeightedGraph,
};
use config::{Flags, RunConfig};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_FAIL: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cliquescale",
    version,
    about = "Clique statistics of Chung-Lu graphs with power-law weights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it as an edge list.
    Sample(Flags),
    /// Count k-cliques in a graph file.
    Count {
        /// Graph file written by `sample`.
        graph: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Evaluate P(K_k) term by term.
    Prob {
        /// Add a Monte Carlo estimate with --samples draws.
        #[arg(long)]
        mc: bool,
        #[command(flatten)]
        flags: Flags,
    },
    /// Fit the growth exponent of P(K_k) or A_k(n) over an n grid.
    Scaling(Flags),
    /// Run the acceptance checks.
    Verify {
        /// Run only this criterion (1-8).
        #[arg(long)]
        criterion: Option<usize>,
        #[command(flatten)]
        flags: Flags,
    },
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::InvalidParameter(_) | Error::UnsupportedSampling(_) => {
                EXIT_CONFIG
            }
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            message: format!("{e:#}"),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn resolve(flags: &Flags) -> Result<RunConfig, Failure> {
    let cfg = RunConfig::resolve(flags).map_err(Failure::config)?;
    if let Some(threads) = cfg.threads {
        if threads == 0 {
            return Err(Failure::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure {
                code: EXIT_RUNTIME,
                message: e.to_string(),
            })?;
    }
    Ok(cfg)
}

fn comment_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing stdout")?;
            out.flush().context("writing stdout")
        }
    }
}

fn eval_options(cfg: &RunConfig) -> Result<EvalOptions, Failure> {
    let mut opts = EvalOptions {
        seed: cfg.seed,
        ..EvalOptions::default()
    };
    if let Some(tol) = cfg.rel_tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Failure::config(format!(
                "--rel-tol must lie in (0, 1), got {tol}"
            )));
        }
        opts.quad = QuadOptions::default().with_rel_tol(tol);
    }
    Ok(opts)
}

fn cmd_sample(flags: &Flags) -> Outcome {
    let cfg = resolve(flags)?;
    let dist = cfg.distribution().map_err(Failure::config)?;
    let n = RunConfig::require(cfg.n, "n").map_err(Failure::config)?;
    let method: SamplingMethod = cfg.method.as_deref().unwrap_or("auto").parse()?;
    let start = Instant::now();
    let graph = sample_graph(&dist, &SamplerConfig::new(n, cfg.seed).with_method(method))?;
    eprintln!(
        "sampled n = {} with {} edges in {:.3}s",
        graph.node_count(),
        graph.edge_count(),
        start.elapsed().as_secs_f64()
    );
    emit(
        cfg.output.as_deref(),
        &graph.to_text(&cfg.header("sample", Some(&dist))),
    )?;
    Ok(0)
}

fn cmd_count(path: &Path, flags: &Flags) -> Outcome {
    let cfg = resolve(flags)?;
    let k = RunConfig::require(cfg.k, "k").map_err(Failure::config)?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let graph = WeightedGraph::from_text(&text)?;
    let census = count_cliques(&graph, k)?;
    eprintln!("counted {k}-cliques in {:.3}s", census.runtime);
    match &cfg.output {
        Some(out) => {
            let mut header = cfg.header("count", None);
            header.push(format!("graph {}", path.display()));
            header.push(format!("seed {}", graph.seed()));
            emit(
                Some(out),
                &format!("{}{}\n", comment_block(&header), census.count),
            )?
        }
        None => emit(None, &format!("{}\n", census.count))?,
    }
    Ok(0)
}

fn cmd_prob(mc: bool, flags: &Flags) -> Outcome {
    let cfg = resolve(flags)?;
    let dist = cfg.distribution().map_err(Failure::config)?;
    let k = RunConfig::require(cfg.k, "k").map_err(Failure::config)?;
    let n = RunConfig::require(cfg.n, "n").map_err(Failure::config)?;
    let opts = eval_options(&cfg)?;
    let report = clique_prob_quadrature(&dist, k, n, &opts)?;
    for w in &report.warnings {
        eprintln!(
            "warning: {} reached relative error {:.2e}",
            w.term, w.achieved_rel_err
        );
    }
    let mut header = cfg.header("prob", Some(&dist));
    header.push(format!("seed {}", cfg.seed));
    let mut csv_head = DecompositionReport::csv_header();
    let mut row = report.to_csv_row();
    if mc {
        let samples = cfg.samples.unwrap_or(1_000_000);
        let est = clique_prob_mc(&dist, k, n, samples, cfg.seed)?;
        let z = if est.stderr > 0.0 {
            (report.total - est.mean) / est.stderr
        } else {
            f64::NAN
        };
        csv_head.push_str(",mc_mean,mc_stderr,mc_samples,z");
        row.push_str(&format!(
            ",{:e},{:e},{},{z}",
            est.mean, est.stderr, est.samples
        ));
    }
    emit(
        cfg.output.as_deref(),
        &format!("{}{csv_head}\n{row}\n", comment_block(&header)),
    )?;
    Ok(0)
}

fn cmd_scaling(flags: &Flags) -> Outcome {
    let cfg = resolve(flags)?;
    let dist = cfg.distribution().map_err(Failure::config)?;
    let k = RunConfig::require(cfg.k, "k").map_err(Failure::config)?;
    let grid = cfg
        .n_grid
        .clone()
        .unwrap_or_else(|| geometric_grid(100.0, 10.0, 5));
    let method = match cfg.method.as_deref().unwrap_or("quadrature") {
        "quadrature" => StudyMethod::Quadrature,
        "mc" => StudyMethod::MonteCarlo {
            samples: cfg.samples.unwrap_or(1_000_000),
        },
        "graphs" => StudyMethod::Graphs {
            replicas: cfg.samples.unwrap_or(100),
        },
        other => {
            return Err(Failure::config(format!(
                "unknown scaling method '{other}' (quadrature, mc, graphs)"
            )))
        }
    };
    let tolerance = cfg.tolerance.unwrap_or(DEFAULT_SLOPE_TOLERANCE);
    let study = scaling_study(
        &dist,
        k,
        &grid,
        method,
        cfg.seed,
        tolerance,
        &eval_options(&cfg)?,
    )?;
    for d in &study.diagnostics {
        eprintln!("diagnostic: {d}");
    }
    let mut header = cfg.header("scaling", Some(&dist));
    header.push(format!("seed {}", cfg.seed));
    header.push(format!("method {}", method.name()));
    header.push(format!(
        "predicted factor {}",
        study.prediction.sv_factor.describe()
    ));
    emit(
        cfg.output.as_deref(),
        &format!("{}{}", comment_block(&header), study.to_csv()),
    )?;
    eprintln!("verdict: {}", study.verdict);
    Ok(match study.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn cmd_verify(criterion: Option<usize>, flags: &Flags) -> Outcome {
    let cfg = resolve(flags)?;
    let seed = cfg.seed_or(DEFAULT_SEED);
    let ids: Vec<usize> = match criterion {
        Some(id) if (1..=CRITERIA.len()).contains(&id) => vec![id],
        Some(id) => {
            return Err(Failure::config(format!(
                "criterion must be 1-{}, got {id}",
                CRITERIA.len()
            )))
        }
        None => (1..=CRITERIA.len()).collect(),
    };
    let mut text = comment_block(&[
        format!("cliquescale {}", env!("CARGO_PKG_VERSION")),
        "command verify".into(),
        format!("seed {seed}"),
    ]);
    text.push_str("criterion,name,result,seconds,detail\n");
    let mut all = true;
    for id in ids {
        let o = run_criterion(id, seed);
        eprintln!("{o}");
        all &= o.passed;
        text.push_str(&format!(
            "{},{},{},{:.2},\"{}\"\n",
            o.id,
            o.name,
            if o.passed { "pass" } else { "fail" },
            o.seconds,
            o.detail.replace('"', "'")
        ));
    }
    emit(cfg.output.as_deref(), &text)?;
    Ok(if all { 0 } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sample(flags) => cmd_sample(flags),
        Command::Count { graph, flags } => cmd_count(graph, flags),
        Command::Prob { mc, flags } => cmd_prob(*mc, flags),
        Command::Scaling(flags) => cmd_scaling(flags),
        Command::Verify { criterion, flags } => cmd_verify(*criterion, flags),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
