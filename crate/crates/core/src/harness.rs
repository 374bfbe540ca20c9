//! Experiment plumbing: instance loading, decoder runs with re-verified
//! reports, and the linear-time benchmark.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::det_decoder::{main_decode, DetOutcome, DetPlan, DEFAULT_BRANCH_BUDGET};
use crate::error::{usage, Error, Result};
use crate::gf2::{hamming_distance, BitVec};
use crate::graph::{generate_regular, BipartiteGraph};
use crate::inner_code::InnerCode;
use crate::rand_decoder::{rand_decode, RandParams};
use crate::rational::{self, int, Rational};
use crate::tanner::{corrupt, Corruption, TannerCode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InnerSpec {
    Builtin(String),
    File(PathBuf),
}

impl InnerSpec {
    /// A path that exists is read as a code file, anything else as a
    /// builtin name.
    pub fn parse(arg: &str) -> Self {
        if Path::new(arg).is_file() {
            Self::File(arg.into())
        } else {
            Self::Builtin(arg.to_string())
        }
    }

    pub fn load(&self) -> Result<InnerCode> {
        match self {
            Self::Builtin(name) => InnerCode::builtin(name),
            Self::File(path) => InnerCode::from_text(&read_file(path)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceSpec {
    Files { graph: PathBuf, inner: InnerSpec },
    Random { c: usize, d: usize, n: usize, inner: InnerSpec },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecoderSpec {
    Rand {
        delta: Rational,
        /// When set, success also requires `d_H(x, y) <= floor(alpha * n)`.
        alpha: Option<Rational>,
        max_rounds: Option<usize>,
    },
    Det {
        alpha: Rational,
        delta: Rational,
        depths: Option<(usize, usize, usize)>,
        budget: u128,
    },
}

impl DecoderSpec {
    pub fn det(alpha: Rational, delta: Rational) -> Self {
        Self::Det {
            alpha,
            delta,
            depths: None,
            budget: DEFAULT_BRANCH_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub instance: InstanceSpec,
    pub channel: Option<Corruption>,
    pub decoder: Option<DecoderSpec>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(seed: u64, instance: InstanceSpec) -> Self {
        Self {
            seed,
            instance,
            channel: None,
            decoder: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Fails on missing input files; output directories must exist.
    pub fn validate(&self) -> Result<()> {
        let mut files: Vec<&Path> = self.inputs.iter().map(PathBuf::as_path).collect();
        if let InstanceSpec::Files { graph, inner } = &self.instance {
            files.push(graph);
            if let InnerSpec::File(p) = inner {
                files.push(p);
            }
        }
        for f in files {
            if !f.is_file() {
                return usage(format!("input file {} does not exist", f.display()));
            }
        }
        for out in &self.outputs {
            let dir = out.parent().filter(|p| !p.as_os_str().is_empty());
            if dir.is_some_and(|d| !d.is_dir()) {
                return usage(format!("output directory for {} does not exist", out.display()));
            }
        }
        Ok(())
    }

    pub fn load_code(&self) -> Result<TannerCode> {
        match &self.instance {
            InstanceSpec::Files { graph, inner } => {
                let g = BipartiteGraph::from_text(&read_file(graph)?)?;
                TannerCode::new(g, inner.load()?)
            }
            InstanceSpec::Random { c, d, n, inner } => random_code(*c, *d, *n, &inner.load()?, self.seed),
        }
    }
}

/// Parameter sanity notes, such as a regime the decoder's analysis does
/// not cover.
pub fn decoder_warnings(code: &TannerCode, spec: &DecoderSpec) -> Vec<String> {
    let mut out = Vec::new();
    let Ok(d0) = code.d0() else {
        out.push("inner code has no nonzero codeword".to_string());
        return out;
    };
    let delta = match spec {
        DecoderSpec::Rand { delta, .. } | DecoderSpec::Det { delta, .. } => delta,
    };
    let product = delta * int(d0 as i64);
    if product <= int(2) {
        out.push(format!(
            "delta*d0 = {product} <= 2: outside the regime where decoding is guaranteed"
        ));
    }
    if let DecoderSpec::Det { alpha, delta, depths, budget } = spec {
        if let Ok(plan) = DetPlan::new(code, alpha.clone(), delta.clone()) {
            if plan.s_floored {
                out.push("depth s formula gave a value below 1; using s = 1".to_string());
            }
            let (s, r, rp) = plan.default_depths;
            if depths.is_none() && plan.main_branch_steps() > *budget {
                out.push(format!(
                    "default depths (s, r, r') = ({s}, {r}, {rp}) need {} steps; override them to run",
                    plan.main_branch_steps()
                ));
            }
        }
    }
    out
}

/// Random `(c, d)`-regular graph with the inner code on every check.
pub fn random_code(c: usize, d: usize, n: usize, inner: &InnerCode, seed: u64) -> Result<TannerCode> {
    if inner.length() != d {
        return usage(format!("inner code length {} but d = {d}", inner.length()));
    }
    if d == 0 || !(c * n).is_multiple_of(d) {
        return usage(format!(
            "c*n = {} is not divisible by d = {d}; try n = {}",
            c * n,
            crate::graph::suggest_regular_n(c, d, n)
        ));
    }
    let g = generate_regular(c, &vec![d; c * n / d], n, seed)?;
    TannerCode::new(g, inner.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunOutcome {
    Decoded,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub decoder: &'static str,
    pub seed: u64,
    pub n: usize,
    pub rounds: Option<usize>,
    pub branch: Option<Vec<u32>>,
    pub steps: Option<u64>,
    pub wall_time_secs: f64,
    pub distance: usize,
    pub unsat_trajectory: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Runs the decoder and re-verifies any success (codeword, and distance
/// when an `alpha` is known) before reporting it. Returns the report and
/// the output word, which is the input word on failure.
pub fn run_decoder(code: &TannerCode, x: &BitVec, spec: &DecoderSpec, seed: u64) -> Result<(RunReport, BitVec)> {
    if x.len() != code.n() {
        return usage(format!("word length {} but code length {}", x.len(), code.n()));
    }
    let warnings = decoder_warnings(code, spec);
    let (decoded, y, mut report, alpha) = match spec {
        DecoderSpec::Rand { delta, alpha, max_rounds } => {
            let params = RandParams::new(code, delta.clone(), *max_rounds)?;
            let out = rand_decode(code, x.clone(), &params, seed)?;
            let report = RunReport {
                outcome: RunOutcome::Failed,
                decoder: "rand",
                seed,
                n: code.n(),
                rounds: Some(out.rounds()),
                branch: None,
                steps: None,
                wall_time_secs: out.elapsed().as_secs_f64(),
                distance: 0,
                unsat_trajectory: out.trajectory().to_vec(),
                warnings,
            };
            (out.is_decoded(), out.word().clone(), report, alpha.clone())
        }
        DecoderSpec::Det { alpha, delta, depths, budget } => {
            let mut plan = DetPlan::new(code, alpha.clone(), delta.clone())?.with_budget(*budget);
            if let Some((s, r, rp)) = depths {
                plan = plan.with_depths(*s, *r, *rp);
            }
            let start = Instant::now();
            let (outcome, stats) = main_decode(code, x, &plan)?;
            let elapsed = start.elapsed();
            let (ok, y, branch) = match outcome {
                DetOutcome::Decoded { y, branch } => (true, y, Some(branch)),
                DetOutcome::Failed => (false, x.clone(), None),
            };
            let report = RunReport {
                outcome: RunOutcome::Failed,
                decoder: "det",
                seed,
                n: code.n(),
                rounds: None,
                branch,
                steps: Some(stats.steps),
                wall_time_secs: elapsed.as_secs_f64(),
                distance: 0,
                unsat_trajectory: vec![code.unsatisfied(x)?.len(), code.unsatisfied(&y)?.len()],
                warnings,
            };
            (ok, y, report, Some(alpha.clone()))
        }
    };
    let distance = hamming_distance(x, &y)?;
    report.distance = distance;
    let within = alpha.is_none_or(|a| distance <= rational::floor_usize(&(a * int(code.n() as i64))));
    if decoded && code.is_codeword(&y)? && within {
        report.outcome = RunOutcome::Decoded;
        Ok((report, y))
    } else {
        if decoded && !within {
            report.warnings.push(format!("decoded word lies {distance} away, beyond alpha*n"));
        }
        report.branch = None;
        Ok((report, x.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub c: usize,
    pub inner: InnerCode,
    pub sizes: Vec<usize>,
    pub trials: usize,
    /// Discarded leading trials per size.
    pub warmup: usize,
    /// Errors per trial are `floor(rho * n)`.
    pub rho: Rational,
    pub delta: Rational,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub errors: usize,
    pub trials: usize,
    pub successes: usize,
    pub median_secs: f64,
    pub median_rounds: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (trial as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)
}

/// Randomized-decoder wall time per size: a fresh random graph per trial,
/// the zero codeword, `floor(rho * n)` random errors. Each instance is built
/// right before its decode is timed, so every size is measured with its
/// data equally warm.
pub fn bench_linear_time(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.trials == 0 {
        return usage("need at least one timed trial");
    }
    if cfg.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return usage("sizes must be strictly ascending");
    }
    let d = cfg.inner.length();
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let errors = rational::floor_usize(&(&cfg.rho * int(n as i64)));
        let total = cfg.warmup + cfg.trials;
        let mut times = Vec::with_capacity(cfg.trials);
        let mut rounds = Vec::with_capacity(cfg.trials);
        let mut successes = 0;
        for trial in 0..total {
            let seed = trial_seed(cfg.seed, n, trial);
            let code = random_code(cfg.c, d, n, &cfg.inner, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, _) = corrupt(&BitVec::zeros(n), &Corruption::Weight(errors), &mut rng)?;
            let params = RandParams::new(&code, cfg.delta.clone(), None)?;
            let out = rand_decode(&code, x, &params, seed)?;
            if trial < cfg.warmup {
                continue;
            }
            if out.is_decoded() && out.word().is_zero() {
                successes += 1;
            }
            times.push(out.elapsed().as_secs_f64());
            rounds.push(out.rounds() as f64);
        }
        rows.push(BenchRow {
            n,
            errors,
            trials: cfg.trials,
            successes,
            median_secs: median(&mut times),
            median_rounds: median(&mut rounds),
        });
    }
    Ok(rows)
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Reads a vector file: one line of `0`/`1` characters.
pub fn read_vector(path: &Path) -> Result<BitVec> {
    read_file(path)?.trim().parse()
}

pub fn write_vector(path: &Path, x: &BitVec) -> Result<()> {
    fs::write(path, format!("{x}\n")).map_err(|e| io_error(path, e))
}
