use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use tanner_core::graph::{
    expansion_check_sampled, expansion_profile_exhaustive, generate_merged, generate_regular, merged_shape,
    suggest_regular_n, SampledVerdict,
};
use tanner_core::harness::{
    bench_linear_time, read_vector, run_decoder, write_vector, BenchConfig, DecoderSpec,
    ExperimentConfig, InnerSpec, InstanceSpec, RunOutcome,
};
use tanner_core::rational::{self, Rational};
use tanner_core::size_expansion::table_row;
use tanner_core::tanner::{corrupt, Corruption, TannerCode};
use tanner_core::{BitMatrix, BitVec, Error, InnerCode};

#[derive(Parser)]
#[command(name = "tanner", version, about = "Expander-based Tanner codes: generation, decoding and analysis")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "TANNER_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct CodeArgs {
    /// Graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Inner code: a builtin name (parity8, hamming7, ext-hamming16, ...) or a code file.
    #[arg(long)]
    inner: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpansionMode {
    Exhaustive,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Random (c, d)-regular bipartite graph by stub matching.
    GenGraph {
        #[arg(long)]
        c: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graph with a planted low-weight codeword on its first k_alpha*n vertices.
    GenMerged {
        #[arg(long)]
        c: usize,
        /// Inner code whose lowest-weight codeword fixes d0 and the planted positions.
        #[arg(long)]
        inner: String,
        /// Planted fraction of the left side.
        #[arg(long)]
        k_alpha: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Vector file receiving the planted codeword.
        #[arg(long)]
        planted: PathBuf,
    },
    /// Writes an inner code file from a builtin name or parity-check rows.
    InnerCode {
        #[arg(long, conflicts_with = "parity_check")]
        name: Option<String>,
        /// File with one 0/1 row of the parity-check matrix per line.
        #[arg(long)]
        parity_check: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encodes a message vector with the code's generator basis.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        message: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes a uniformly random codeword.
    Sample {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flips a random or explicit set of positions.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, conflicts_with = "positions", required_unless_present = "positions")]
        weight: Option<usize>,
        /// Comma-separated positions to flip.
        #[arg(long, value_delimiter = ',')]
        positions: Option<Vec<usize>>,
    },
    /// Randomized bit-flipping decoder.
    DecodeRand {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Expansion parameter assumed for the graph.
        #[arg(long)]
        delta: String,
        /// If given, a decoded word farther than alpha*n from the input counts as failure.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// Deterministic search decoder.
    DecodeDet {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        delta: String,
        /// Override the search depths as s,r,r'.
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<usize>>,
        #[arg(long, default_value_t = tanner_core::det_decoder::DEFAULT_BRANCH_BUDGET)]
        budget: u128,
    },
    /// Expansion profile of a graph, exhaustive or sampled.
    AnalyzeExpansion {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: ExpansionMode,
        /// Expansion to test against (sampled mode).
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV table of the size-expansion function.
    SizeExpansion {
        /// Values or lo:step:hi ranges, comma separated.
        #[arg(long)]
        delta: String,
        #[arg(long)]
        k: String,
        /// Right degree for the degree-floored column.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized-decoder wall time over a size sweep, as CSV.
    Bench {
        /// Comma-separated sizes, or lo..hi for powers-of-two doubling.
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 3)]
        c: usize,
        #[arg(long, default_value = "ext-hamming16")]
        inner: String,
        #[arg(long, default_value = "0.002")]
        rho: String,
        #[arg(long, default_value = "0.75")]
        delta: String,
        #[arg(long, default_value_t = 7)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force nearest codeword and minimum distance on small codes.
    Oracle {
        #[command(flatten)]
        code: CodeArgs,
        /// Vector whose nearest codeword is printed.
        #[arg(long)]
        nearest: Option<PathBuf>,
        #[arg(long)]
        min_distance: bool,
    },
}

/// Decoding ran but did not succeed.
#[derive(Debug)]
struct DecodeFailed;

impl std::fmt::Display for DecodeFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("decoding failed")
    }
}

impl std::error::Error for DecodeFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<DecodeFailed>() => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn q(s: &str) -> anyhow::Result<Rational> {
    Ok(rational::parse(s)?)
}

fn load_code(seed: u64, args: &CodeArgs, inputs: &[&Path], outputs: &[&Path]) -> anyhow::Result<TannerCode> {
    let mut cfg = ExperimentConfig::new(
        seed,
        InstanceSpec::Files {
            graph: args.graph.clone(),
            inner: InnerSpec::parse(&args.inner),
        },
    );
    cfg.inputs = inputs.iter().map(|p| p.to_path_buf()).collect();
    cfg.outputs = outputs.iter().map(|p| p.to_path_buf()).collect();
    cfg.validate()?;
    Ok(cfg.load_code()?)
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::GenGraph { c, d, n, out } => {
            if d == 0 || (c * n) % d != 0 {
                bail!(Error::Usage(format!(
                    "c*n = {} is not divisible by d = {d}; nearest feasible n is {}",
                    c * n,
                    suggest_regular_n(c, d, n)
                )));
            }
            let g = generate_regular(c, &vec![d; c * n / d], n, seed)?;
            write_text(&out, &g.to_text()?)
        }
        Command::GenMerged { c, inner, k_alpha, n, out, planted } => {
            let inner = InnerSpec::parse(&inner).load()?;
            let support = inner.min_weight_support()?;
            let (d, d0) = (inner.length(), support.len());
            let k_alpha = q(&k_alpha)?;
            let shape = merged_shape(c, d, d0, &k_alpha, n)?;
            let (g, planted_set) = generate_merged(c, d, d0, &k_alpha, n, &support, seed)?;
            let code = TannerCode::new(g, inner)?;
            let y = BitVec::from_support(n, planted_set)?;
            if !code.is_codeword(&y)? {
                bail!(Error::Internal("planted vector is not a codeword".into()));
            }
            write_text(&out, &code.graph().to_text()?)?;
            write_vector(&planted, &y)?;
            eprintln!("n = {}, planted n0 = {}, planted checks r0 = {}, checks = {}", shape.n, shape.n0, shape.r0, shape.n_right);
            Ok(())
        }
        Command::InnerCode { name, parity_check, out } => {
            let code = match (name, parity_check) {
                (Some(name), _) => InnerCode::builtin(&name)?,
                (None, Some(path)) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
                    if rows.is_empty() {
                        bail!(Error::Usage("parity-check file has no rows".into()));
                    }
                    InnerCode::from_parity_check(BitMatrix::from_strs(&rows)?)?
                }
                (None, None) => bail!(Error::Usage("give --name or --parity-check".into())),
            };
            write_text(&out, &code.to_text())
        }
        Command::Encode { code, message, out } => {
            let tc = load_code(seed, &code, &[&message], &[&out])?;
            let y = tc.encode(&read_vector(&message)?)?;
            Ok(write_vector(&out, &y)?)
        }
        Command::Sample { code, out } => {
            let tc = load_code(seed, &code, &[], &[&out])?;
            Ok(write_vector(&out, &tc.sample_codeword(&mut rng(seed)))?)
        }
        Command::Corrupt { input, out, weight, positions } => {
            let y = read_vector(&input)?;
            let pattern = match (weight, positions) {
                (Some(w), _) => Corruption::Weight(w),
                (None, Some(p)) => Corruption::Explicit(p),
                (None, None) => bail!(Error::Usage("give --weight or --positions".into())),
            };
            let (x, flipped) = corrupt(&y, &pattern, &mut rng(seed))?;
            write_vector(&out, &x)?;
            println!("{}", flipped.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
            Ok(())
        }
        Command::DecodeRand { code, input, out, report, delta, alpha, max_rounds } => {
            let spec = DecoderSpec::Rand {
                delta: q(&delta)?,
                alpha: alpha.as_deref().map(q).transpose()?,
                max_rounds,
            };
            decode(seed, &code, &input, &out, &report, &spec)
        }
        Command::DecodeDet { code, input, out, report, alpha, delta, depths, budget } => {
            let spec = DecoderSpec::Det {
                alpha: q(&alpha)?,
                delta: q(&delta)?,
                depths: match depths.as_deref() {
                    None => None,
                    Some(&[s, r, rp]) => Some((s, r, rp)),
                    Some(_) => bail!(Error::Usage("--depths takes exactly three values s,r,r'".into())),
                },
                budget,
            };
            decode(seed, &code, &input, &out, &report, &spec)
        }
        Command::AnalyzeExpansion { graph, alpha, mode, delta, trials, out } => {
            let text = fs::read_to_string(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let g = tanner_core::BipartiteGraph::from_text(&text)?;
            let alpha_q = q(&alpha)?;
            let value = match mode {
                ExpansionMode::Exhaustive => {
                    let p = expansion_profile_exhaustive(&g, &alpha_q)?;
                    let sizes: Vec<_> = (1..=p.max_size)
                        .map(|s| {
                            json!({
                                "size": s,
                                "min_neighbors": p.min_neighbors[s - 1],
                                "factor": p.factor(s).to_string(),
                                "witness": p.witnesses[s - 1],
                            })
                        })
                        .collect();
                    json!({
                        "mode": "exhaustive",
                        "alpha": alpha_q.to_string(),
                        "max_size": p.max_size,
                        "realized_delta": p.realized_delta.to_string(),
                        "realized_delta_f64": rational::to_f64(&p.realized_delta),
                        "worst_size": p.worst_size,
                        "sizes": sizes,
                    })
                }
                ExpansionMode::Sampled => {
                    let delta = delta.ok_or_else(|| Error::Usage("sampled mode needs --delta".into()))?;
                    let delta_q = q(&delta)?;
                    let verdict = expansion_check_sampled(&g, &alpha_q, &delta_q, trials, seed)?;
                    let (found, trial, set) = match verdict {
                        SampledVerdict::NoCounterexample { .. } => (false, None, None),
                        SampledVerdict::Counterexample { trial, set } => (true, Some(trial), Some(set)),
                    };
                    let factor = set.as_ref().map(|s| g.expansion_factor(s)).transpose()?;
                    json!({
                        "mode": "sampled",
                        "alpha": alpha_q.to_string(),
                        "delta": delta_q.to_string(),
                        "trials": trials,
                        "seed": seed,
                        "counterexample_found": found,
                        "trial": trial,
                        "set": set,
                        "factor": factor.map(|f| f.to_string()),
                    })
                }
            };
            emit(out.as_deref(), &(serde_json::to_string_pretty(&value)? + "\n"))
        }
        Command::SizeExpansion { delta, k, d, out } => {
            let deltas = parse_grid(&delta)?;
            let ks = parse_grid(&k)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for de in &deltas {
                for kk in &ks {
                    w.serialize(table_row(de, kk, d)?)?;
                }
            }
            emit(out.as_deref(), &String::from_utf8(w.into_inner()?)?)
        }
        Command::Bench { sizes, c, inner, rho, delta, trials, warmup, out } => {
            let cfg = BenchConfig {
                c,
                inner: InnerSpec::parse(&inner).load()?,
                sizes: parse_sizes(&sizes)?,
                trials,
                warmup,
                rho: q(&rho)?,
                delta: q(&delta)?,
                seed,
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in bench_linear_time(&cfg)? {
                w.serialize(row)?;
            }
            emit(out.as_deref(), &String::from_utf8(w.into_inner()?)?)
        }
        Command::Oracle { code, nearest, min_distance } => {
            let inputs: Vec<&Path> = nearest.iter().map(PathBuf::as_path).collect();
            let tc = load_code(seed, &code, &inputs, &[])?;
            if !min_distance && nearest.is_none() {
                bail!(Error::Usage("give --nearest and/or --min-distance".into()));
            }
            if let Some(path) = nearest {
                println!("{}", tc.brute_nearest(&read_vector(&path)?)?);
            }
            if min_distance {
                match tc.brute_min_distance()? {
                    Some(w) => println!("{w}"),
                    None => println!("none"),
                }
            }
            Ok(())
        }
    }
}

fn decode(seed: u64, code: &CodeArgs, input: &Path, out: &Path, report: &Path, spec: &DecoderSpec) -> anyhow::Result<()> {
    let tc = load_code(seed, code, &[input], &[out, report])?;
    let x = read_vector(input)?;
    let (rep, y) = run_decoder(&tc, &x, spec, seed)?;
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    write_text(report, &(serde_json::to_string_pretty(&rep)? + "\n"))?;
    if rep.outcome == RunOutcome::Decoded {
        write_vector(out, &y)?;
        Ok(())
    } else {
        Err(DecodeFailed.into())
    }
}

fn parse_grid(spec: &str) -> anyhow::Result<Vec<Rational>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(q(v)?),
            [lo, step, hi] => {
                let (lo, step, hi) = (q(lo)?, q(step)?, q(hi)?);
                if step <= Rational::from_integer(0.into()) {
                    bail!(Error::Usage(format!("range step must be positive in {item:?}")));
                }
                let mut v = lo;
                while v <= hi {
                    out.push(v.clone());
                    v += &step;
                }
            }
            _ => bail!(Error::Usage(format!("bad grid item {item:?}; use a value or lo:step:hi"))),
        }
    }
    if out.is_empty() {
        bail!(Error::Usage("empty grid".into()));
    }
    Ok(out)
}

fn parse_sizes(spec: &str) -> anyhow::Result<Vec<usize>> {
    let bad = || Error::Usage(format!("bad size list {spec:?}"));
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || lo > hi {
            bail!(bad());
        }
        let mut out = Vec::new();
        let mut n = lo;
        while n <= hi {
            out.push(n);
            n *= 2;
        }
        return Ok(out);
    }
    spec.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad().into()))
        .collect()
}
