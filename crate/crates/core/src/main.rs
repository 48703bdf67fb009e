use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use hypermatch::absorbing::{build_absorbing_structure, AbsorbParams};
use hypermatch::constructions::{
    complete, extremal_construction, planted_extremal, random_binomial,
};
use hypermatch::exact::{perfect_matching_search, Search, DEFAULT_BUDGET};
use hypermatch::extremal::{
    default_gamma, extremal_perfect_matching, find_extremal_set, SearchMode,
};
use hypermatch::io::{self as hio, Format};
use hypermatch::lp::{
    extremal_set_from_certificate, minmax_pair_fractional, perfect_fractional_matching,
    verify_certificate, FarkasCertificate, FractionalOutcome, MinmaxOutcome,
};
use hypermatch::par::Exec;
use hypermatch::pipeline::{solve, PipelineConfig};
use hypermatch::rational::parse_unit_fraction;
use hypermatch::sweep::{sweep, write_csv, Model};
use hypermatch::{Error, Hypergraph, Result};

const SUCCESS: u8 = 0;
const NEGATIVE: u8 = 1;
const USAGE: u8 = 2;
const BUDGET: u8 = 3;

/// Perfect matchings in k-uniform hypergraphs.
///
/// Exit codes: 0 success, 1 negative result, 2 usage or input error,
/// 3 search budget exceeded.
#[derive(Parser)]
#[command(name = "hypermatch", version)]
struct Cli {
    /// Run everything on the current thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance.
    Gen(GenArgs),
    /// Codegree statistics.
    Degrees(InstanceArgs),
    /// Decide perfect matching existence exactly.
    Solve(SolveArgs),
    /// Perfect fractional matching or Farkas certificate.
    Frac(FracArgs),
    /// Check or produce a Farkas certificate and its extremal set.
    Certify(CertifyArgs),
    /// Build an absorbing structure.
    Absorbers(AbsorbArgs),
    /// Find an extremal set and run the extremal construction.
    Extremal(ExtremalArgs),
    /// Run the full pipeline.
    Pipeline(PipelineArgs),
    /// Compare the pipeline with the exact oracle over random instances.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Read the instance from FILE (`-` for stdin). Without it and without
    /// a generator flag the instance is read from stdin.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    format: FormatArg,
    #[arg(short = 'k')]
    k: Option<usize>,
    #[arg(short = 'n')]
    n: Option<usize>,
    /// Generate the space barrier.
    #[arg(long, conflicts_with_all = ["complete", "binomial", "planted", "input"])]
    ext: bool,
    /// Generate the complete k-graph.
    #[arg(long, conflicts_with_all = ["binomial", "planted", "input"])]
    complete: bool,
    /// Generate a binomial random k-graph with edge probability P.
    #[arg(long, value_name = "P", conflicts_with_all = ["planted", "input"])]
    binomial: Option<f64>,
    /// Generate the space barrier with every k-set flipped with probability EPS.
    #[arg(long, value_name = "EPS", conflicts_with = "input")]
    planted: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Certificate,
    Heuristic,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    inst: InstanceArgs,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct FracArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Minimise the largest pair load.
    #[arg(long)]
    minmax: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// JSON certificate `{"y": ["p/q", ...]}` to check instead of solving.
    #[arg(long, value_name = "FILE")]
    certificate: Option<PathBuf>,
}

#[derive(Args)]
struct AbsorbArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, value_parser = fraction, default_value = "1/10")]
    beta: BigRational,
    #[arg(long, value_parser = fraction, default_value = "1/10")]
    alpha: BigRational,
    /// Random k-sets used to measure capacity.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Args)]
struct ExtremalArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Defaults to 1/(2k)^(2k).
    #[arg(long, value_parser = fraction)]
    gamma: Option<BigRational>,
    #[arg(long, default_value = "heuristic")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Defaults to 1/(2k)^(2k).
    #[arg(long, value_parser = fraction)]
    gamma: Option<BigRational>,
    /// Defaults to gamma/4.
    #[arg(long, value_parser = fraction)]
    beta: Option<BigRational>,
    #[arg(long, value_parser = fraction)]
    alpha: Option<BigRational>,
    #[arg(long, value_parser = fraction)]
    eta: Option<BigRational>,
    #[arg(long, value_parser = fraction)]
    epsilon: Option<BigRational>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Do not fall back to the exact oracle.
    #[arg(long)]
    no_fallback: bool,
    /// Nibble rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Nibble bite size in (0, 1).
    #[arg(long)]
    bite: Option<f64>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(short = 'k', default_value_t = 3)]
    k: usize,
    /// Comma-separated vertex counts.
    #[arg(short = 'n', value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// binomial:P, planted:EPS, ext, complete or mixed.
    #[arg(long, default_value = "mixed")]
    model: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn fraction(s: &str) -> std::result::Result<BigRational, String> {
    parse_unit_fraction(s).map_err(|e| e.to_string())
}

fn config(k: usize, args: &ConfigArgs, seed: u64, exec: Exec) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::new(k);
    if let Some(g) = &args.gamma {
        cfg.gamma = g.clone();
        cfg.beta = g / BigRational::from_integer(4.into());
    }
    let set = |slot: &mut BigRational, v: &Option<BigRational>| {
        if let Some(v) = v {
            *slot = v.clone();
        }
    };
    set(&mut cfg.beta, &args.beta);
    set(&mut cfg.alpha, &args.alpha);
    set(&mut cfg.eta, &args.eta);
    set(&mut cfg.epsilon, &args.epsilon);
    cfg.budget = args.budget;
    cfg.fallback_to_exact = !args.no_fallback;
    cfg.seed = seed;
    cfg.exec = exec;
    if let Some(r) = args.rounds {
        cfg.nibble.rounds = r;
    }
    if let Some(b) = args.bite {
        cfg.nibble.bite = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_source(path: Option<&PathBuf>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(fs::read_to_string(p)?),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn generate(a: &InstanceArgs) -> Result<Option<Hypergraph>> {
    let any = a.ext || a.complete || a.binomial.is_some() || a.planted.is_some();
    if !any {
        return Ok(None);
    }
    let (Some(k), Some(n)) = (a.k, a.n) else {
        return Err(Error::InvalidInput("generators need -k and -n".into()));
    };
    let h = if a.ext {
        extremal_construction(k, n)?
    } else if a.complete {
        complete(k, n)?
    } else if let Some(p) = a.binomial {
        random_binomial(k, n, p, a.seed)?
    } else {
        planted_extremal(k, n, a.planted.unwrap_or(0.0), a.seed)?
    };
    Ok(Some(h))
}

fn load(a: &InstanceArgs) -> Result<Hypergraph> {
    if let Some(h) = generate(a)? {
        return Ok(h);
    }
    hio::parse(&read_source(a.input.as_ref())?, a.format.into())
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&PathBuf>, value: &T) -> Result<()> {
    emit(out, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn run(cli: Cli) -> Result<u8> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match cli.command {
        Command::Gen(a) => {
            let Some(h) = generate(&a.inst)? else {
                return Err(Error::InvalidInput(
                    "choose a model: --ext, --complete, --binomial P or --planted EPS".into(),
                ));
            };
            emit(a.inst.out.as_ref(), &hio::write(&h, a.inst.format.into()))?;
            Ok(SUCCESS)
        }
        Command::Degrees(a) => {
            let h = load(&a)?;
            let (dp, witness) = h.min_positive_codegree()?;
            let threshold = ((h.k() - 1) * h.n()).div_ceil(h.k()) as i64 - (h.k() as i64 - 2);
            emit_json(
                a.out.as_ref(),
                &json!({
                    "k": h.k(),
                    "n": h.n(),
                    "edges": h.edge_count(),
                    "min_codegree": h.min_codegree()?,
                    "delta_plus": dp,
                    "delta_plus_set": witness,
                    "isolated": h.isolated_vertices(),
                    "threshold": threshold,
                    "degree_lower_bound_check": h.degree_lower_bound_check(),
                }),
            )?;
            Ok(SUCCESS)
        }
        Command::Solve(a) => {
            let h = load(&a.inst)?;
            if h.n() % h.k() != 0 {
                emit(a.inst.out.as_ref(), "no perfect matching\n")?;
                return Ok(NEGATIVE);
            }
            let (search, nodes) = perfect_matching_search(&h, Some(a.budget));
            log::info!("{nodes} search nodes");
            match search {
                Search::Found(m) => {
                    emit_json(a.inst.out.as_ref(), &m)?;
                    Ok(SUCCESS)
                }
                Search::Exhausted => {
                    emit(a.inst.out.as_ref(), "no perfect matching\n")?;
                    Ok(NEGATIVE)
                }
                Search::BudgetExceeded => {
                    eprintln!("budget of {} nodes exceeded", a.budget);
                    Ok(BUDGET)
                }
            }
        }
        Command::Frac(a) => {
            let h = load(&a.inst)?;
            if a.minmax {
                let out = minmax_pair_fractional(&h);
                emit_json(a.inst.out.as_ref(), &out)?;
                return Ok(match out {
                    MinmaxOutcome::Optimal { .. } => SUCCESS,
                    MinmaxOutcome::Infeasible { .. } => NEGATIVE,
                });
            }
            let out = perfect_fractional_matching(&h);
            emit_json(a.inst.out.as_ref(), &out)?;
            Ok(match out {
                FractionalOutcome::Perfect { .. } => SUCCESS,
                FractionalOutcome::Infeasible { .. } => NEGATIVE,
            })
        }
        Command::Certify(a) => {
            let h = load(&a.inst)?;
            let certificate = match &a.certificate {
                Some(p) => serde_json::from_str::<FarkasCertificate>(&fs::read_to_string(p)?)?,
                None => match perfect_fractional_matching(&h) {
                    FractionalOutcome::Infeasible { certificate } => certificate,
                    FractionalOutcome::Perfect { .. } => {
                        emit(
                            a.inst.out.as_ref(),
                            "perfect fractional matching exists; no certificate\n",
                        )?;
                        return Ok(NEGATIVE);
                    }
                },
            };
            let valid = verify_certificate(&h, &certificate)?;
            let extremal = if valid && h.n() % h.k() == 0 {
                let (s, count) = extremal_set_from_certificate(&h, &certificate)?;
                Some(json!({ "s": s, "bad_edge_count": count }))
            } else {
                None
            };
            emit_json(
                a.inst.out.as_ref(),
                &json!({ "certificate": certificate, "valid": valid, "extremal_set": extremal }),
            )?;
            Ok(if valid { SUCCESS } else { NEGATIVE })
        }
        Command::Absorbers(a) => {
            let h = load(&a.inst)?;
            let params = AbsorbParams {
                beta: num_traits::ToPrimitive::to_f64(&a.beta).unwrap_or(0.0),
                alpha: num_traits::ToPrimitive::to_f64(&a.alpha).unwrap_or(0.0),
                capacity_samples: a.samples,
                seed: a.inst.seed,
                ..Default::default()
            };
            let s = build_absorbing_structure(&h, &params, exec)?;
            emit_json(a.inst.out.as_ref(), &s)?;
            Ok(if s.family.is_empty() {
                NEGATIVE
            } else {
                SUCCESS
            })
        }
        Command::Extremal(a) => {
            let h = load(&a.inst)?;
            let gamma = a.gamma.unwrap_or_else(|| default_gamma(h.k()));
            let mode = match a.mode {
                ModeArg::Exhaustive => SearchMode::Exhaustive,
                ModeArg::Certificate => SearchMode::Certificate,
                ModeArg::Heuristic => SearchMode::Heuristic,
            };
            let Some(witness) = find_extremal_set(&h, &gamma, mode, exec)? else {
                emit(a.inst.out.as_ref(), "no extremal set found\n")?;
                return Ok(NEGATIVE);
            };
            let (run, rejected) = match extremal_perfect_matching(&h, &witness, Some(a.budget)) {
                Ok(run) => (Some(run), None),
                Err(Error::InvalidInput(msg)) => (None, Some(msg)),
                Err(e) => return Err(e),
            };
            let found = run.as_ref().is_some_and(|r| r.matching.is_some());
            emit_json(
                a.inst.out.as_ref(),
                &json!({ "witness": witness, "run": run, "rejected": rejected }),
            )?;
            Ok(if found { SUCCESS } else { NEGATIVE })
        }
        Command::Pipeline(a) => {
            let h = load(&a.inst)?;
            let cfg = config(h.k(), &a.config, a.inst.seed, exec)?;
            let out = solve(&h, &cfg)?;
            emit_json(a.inst.out.as_ref(), &out)?;
            Ok(if out.matching.is_some() {
                SUCCESS
            } else if out.budget_exceeded() {
                BUDGET
            } else {
                NEGATIVE
            })
        }
        Command::Sweep(a) => {
            let model: Model = a.model.parse()?;
            let cfg = config(a.k, &a.config, a.seed, exec)?;
            let rows = sweep(a.k, &a.n, model, a.trials, a.seed, &cfg, exec)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(
                a.out.as_ref(),
                &String::from_utf8(buf).expect("csv is utf-8"),
            )?;
            Ok(if rows.iter().any(|r| r.agree == Some(false)) {
                NEGATIVE
            } else if rows.iter().any(|r| r.agree.is_none()) {
                BUDGET
            } else {
                SUCCESS
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE)
        }
    }
}
