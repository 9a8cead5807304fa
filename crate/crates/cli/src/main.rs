//! `newton-osc`: Newton polygon analysis and decay measurements for
//! oscillatory integral operators with polynomial phases.

mod output;
mod schema;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use newton_osc::blocks::{blocks_csv, verify_blocks, BlockConfig};
use newton_osc::build_polygon;
use newton_osc::dyadpol::{lower_bound_set, verify_lower_bound, ExponentProfile};
use newton_osc::newton::NewtonError;
use newton_osc::opnorm::{samples_csv, NormConfig, PhaseSpec};
use newton_osc::polycore::{parse_poly, BivarPoly};
use newton_osc::scaling::{analyze_phase, verify_theorem, SweepConfig};

use output::{Failure, Output};

#[derive(Parser)]
#[command(
    name = "newton-osc",
    version,
    about = "Decay of oscillatory integral operators with polynomial phases"
)]
struct Cli {
    /// Worker threads; falls back to NEWTONOSC_THREADS, then the core count.
    #[arg(long, global = true, env = "NEWTONOSC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Newton polygon, decay rate, Puiseux branches and degeneracy of S''_xy.
    Analyze(AnalyzeArgs),
    /// Operator norm at one λ.
    Norm(NormArgs),
    /// Norms over a λ grid, decay fit and verdict.
    Sweep(SweepArgs),
    /// Dyadic block norms against the size and oscillatory bounds.
    Blocks(BlocksArgs),
    /// Lower-bound set for polynomials with dyadically pinned coefficients.
    Dyadpol(DyadpolArgs),
    /// Built-in checks; exits nonzero on the first failure.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct PhaseArgs {
    /// Phase S(x,y), or F = S''_xy with --mixed.
    #[arg(long)]
    phase: String,
    /// Treat --phase as F and synthesize S by double integration.
    #[arg(long)]
    mixed: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    phase: PhaseArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    phase: PhaseArgs,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    lambda: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    phase: PhaseArgs,
    #[command(flatten)]
    common: Common,
    /// Comma-separated λ values; default 2^4..2^11.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    tol_slope: Option<f64>,
    /// Inclusive λ range for the fit, `lo,hi`; default is the upper half.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    fit_window: Option<Vec<f64>>,
    /// Also write `log2_lambda,log2_norm,predicted` rows here.
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct BlocksArgs {
    #[command(flatten)]
    phase: PhaseArgs,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    lambda: f64,
    /// Distance from an edge below which a block counts as near it.
    #[arg(long, default_value_t = 3.0)]
    d: f64,
    #[arg(long, default_value_t = 6)]
    j_max: i32,
}

#[derive(Args)]
struct DyadpolArgs {
    /// Exponents r_1..r_N.
    #[arg(long, value_delimiter = ',', required = true)]
    r: Vec<u32>,
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample points per unit of log2 h.
    #[arg(long, default_value_t = 8)]
    h_density: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, hide = true)]
    fault: Option<String>,
}

/// `(S, F)` from the command-line phase.
fn load_phase(p: &PhaseArgs) -> Result<(BivarPoly, BivarPoly), Failure> {
    let poly = parse_poly(&p.phase).map_err(|e| Failure::parse(&p.phase, &e))?;
    if p.mixed {
        Ok((poly.mixed_antiderivative(), poly))
    } else {
        let f = newton_osc::mixed_derivative(&poly);
        Ok((poly, f))
    }
}

fn phase_spec(s: BivarPoly, rho: f64) -> Result<PhaseSpec, Failure> {
    PhaseSpec::new(s, rho).map_err(|e| Failure::invalid(e.to_string()))
}

fn norm_config(seed: u64) -> NormConfig {
    NormConfig {
        seed,
        ..NormConfig::default()
    }
}

fn analyze(args: &AnalyzeArgs, out: &Output) -> Result<(), Failure> {
    let (s, f) = load_phase(&args.phase)?;
    let analysis = analyze_phase(&s).map_err(Failure::newton)?;
    debug_assert_eq!(analysis.f, f);
    let mut v = serde_json::to_value(&analysis).map_err(Failure::internal)?;
    v["mixed_input"] = json!(args.phase.mixed);
    out.json("analyze", v, None)
}

fn norm(args: &NormArgs, out: &Output) -> Result<(), Failure> {
    let (s, _) = load_phase(&args.phase)?;
    let text = s.to_string();
    let p = phase_spec(s, args.common.rho)?;
    let sample = p
        .norm(args.lambda, &norm_config(args.common.seed))
        .map_err(|e| Failure::resolution(&e))?;
    match args.common.format {
        Format::Csv => out.csv(
            &samples_csv(std::slice::from_ref(&sample)),
            Some(args.common.seed),
        ),
        Format::Json => out.json(
            "norm",
            json!({ "S": text, "rho": args.common.rho, "sample": sample }),
            Some(args.common.seed),
        ),
    }
}

fn sweep(args: &SweepArgs, out: &Output) -> Result<(), Failure> {
    let (s, f) = load_phase(&args.phase)?;
    if f.is_zero() {
        return Err(Failure::newton(NewtonError::EmptyPolygon));
    }
    let mut cfg = SweepConfig::for_mixed(&f);
    cfg.norm = norm_config(args.common.seed);
    if let Some(l) = &args.lambdas {
        cfg.lambdas = l.clone();
    }
    if let Some(t) = args.tol_slope {
        cfg.tol_slope = t;
    }
    if let Some(w) = &args.fit_window {
        cfg.fit_window = Some((w[0], w[1]));
    }
    let text = s.to_string();
    let p = phase_spec(s, args.common.rho)?;
    let report = verify_theorem(&p, &cfg).map_err(Failure::scaling)?;
    if let Some(path) = &args.emit_plot_data {
        let mut csv = String::from("log2_lambda,log2_norm,predicted\n");
        for (x, y, z) in report.plot_data() {
            csv.push_str(&format!("{x:?},{y:?},{z:?}\n"));
        }
        std::fs::write(path, csv).map_err(|e| Failure::io(path, &e))?;
    }
    let seed = Some(args.common.seed);
    match args.common.format {
        Format::Csv => out.csv(&samples_csv(&report.samples), seed),
        Format::Json => {
            let mut v = serde_json::to_value(&report).map_err(Failure::internal)?;
            v["S"] = json!(text);
            out.json("sweep", v, seed)
        }
    }
}

fn blocks(args: &BlocksArgs, out: &Output) -> Result<(), Failure> {
    let (s, f) = load_phase(&args.phase)?;
    let poly = build_polygon(&f).map_err(Failure::newton)?;
    let text = s.to_string();
    let p = phase_spec(s, args.common.rho)?;
    let cfg = BlockConfig {
        d: args.d,
        j_max: args.j_max,
        norm: NormConfig {
            seed: args.common.seed,
            ..BlockConfig::default().norm
        },
        ..BlockConfig::default()
    };
    let report = verify_blocks(&p, &f, args.lambda, &poly, &cfg);
    let seed = Some(args.common.seed);
    match args.common.format {
        Format::Csv => out.csv(&blocks_csv(&report.blocks), seed),
        Format::Json => {
            let mut v = serde_json::to_value(&report).map_err(Failure::internal)?;
            v["S"] = json!(text);
            v["rho"] = json!(args.common.rho);
            out.json("blocks", v, seed)
        }
    }
}

fn dyadpol(args: &DyadpolArgs, out: &Output) -> Result<(), Failure> {
    let p = ExponentProfile::new(args.r.clone(), args.c)
        .map_err(|e| Failure::invalid(e.to_string()))?;
    let e = lower_bound_set(&p);
    let rep = verify_lower_bound(&p, &e, args.trials, args.h_density, args.seed);
    let v = json!({
        "r": p.r,
        "C": p.c,
        "intervals": e.intervals,
        "B": e.b,
        "B_prime": e.b_prime,
        "trials": rep.trials,
        "evaluations": rep.evaluations,
        "min_observed": rep.min_observed,
        "argmin": { "trial": rep.argmin.0, "h": rep.argmin.1 },
        "threshold": rep.threshold,
        "pass": rep.pass,
    });
    out.json("dyadpol", v, Some(args.seed))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let threads = rayon::current_num_threads();
    match &cli.command {
        Command::Analyze(a) => analyze(a, &Output::new(a.out.clone(), threads))?,
        Command::Norm(a) => norm(a, &Output::new(a.common.out.clone(), threads))?,
        Command::Sweep(a) => sweep(a, &Output::new(a.common.out.clone(), threads))?,
        Command::Blocks(a) => blocks(a, &Output::new(a.common.out.clone(), threads))?,
        Command::Dyadpol(a) => dyadpol(a, &Output::new(a.out.clone(), threads))?,
        Command::Selftest(a) => return Ok(selftest::run(a.fault.as_deref())),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return Failure::invalid(e.to_string()).report();
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(f) => f.report(),
    }
}
