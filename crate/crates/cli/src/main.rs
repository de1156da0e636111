use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use robust_center::config::ConfigOptions;
use robust_center::generate::{generate_instance, ConstraintParams, FairParams, GenParams, MetricKind};
use robust_center::kcenter::{solve_frkcenter_at, solve_rkcenter_at};
use robust_center::knapcenter::{
    sample_basic_frknapcenter_at, sample_frknapcenter_eps_budget, sample_frknapcenter_exact_budget, solve_rknapcenter_at,
};
use robust_center::lp::relax::{build_relaxation, solve_relaxation};
use robust_center::lp::SolveOptions;
use robust_center::matcenter::{pseudo_round_at, sample_frmatcenter_exact, solve_rmatcenter_at};
use robust_center::oracle::{exact_lottery_lp, exact_optimal_radius, monte_carlo_certify_keeping, Lottery, LotterySampler};
use robust_center::rational::{self, serde_rational, Rational};
use robust_center::report::{Check, FairReport, Report, SolveReport};
use robust_center::sampler::{BudgetRule, CenterSampler};
use robust_center::{CenterSolution, Constraint, Error, Instance, Matroid, MatroidSpec};

#[derive(Parser)]
#[command(name = "robust-center", version, about = "Robust and lottery-fair k-center, knapsack center and matroid center")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Robust k-center, or the fair sampler with --fair.
    SolveKcenter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        /// Run the fair sampler even when all p_j are zero.
        #[arg(long)]
        fair: bool,
    },
    /// Knapsack center: robust 3-approximation or one of the fair samplers.
    SolveKnapcenter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, value_enum, default_value = "robust")]
        mode: KnapMode,
    },
    /// Matroid center: robust 3-approximation or one of the fair samplers.
    SolveMatcenter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, value_enum, default_value = "robust")]
        mode: MatMode,
        /// Matroid JSON replacing the instance's constraint.
        #[arg(long)]
        matroid: Option<PathBuf>,
    },
    /// Brute-force ground truth.
    Oracle {
        #[arg(value_enum)]
        query: OracleQuery,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Write a generated instance.
    Gen(GenArgs),
    /// Monte-Carlo certification of one sampler.
    Certify {
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    instance: PathBuf,
    /// Fixed radius instead of the smallest feasible one.
    #[arg(long, value_parser = parse_rational)]
    radius: Option<Rational>,
    /// Write the LP relaxation at the chosen radius in LP text format,
    /// including any matroid rank cuts the solver generated.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    /// Exhaustive invariant checks, including the brute-force oracle.
    #[arg(long)]
    paranoid: bool,
    /// Also print a text table to stderr.
    #[arg(long)]
    table: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, value_parser = parse_rational, default_value = "1/4")]
    eps: Rational,
    #[arg(long, value_parser = parse_rational, default_value = "1/2")]
    gamma: Rational,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sampling (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Number of individual draws recorded in the report.
    #[arg(long, default_value_t = 20)]
    keep_draws: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum KnapMode {
    Robust,
    FairBasic,
    FairEpsbudget,
    FairExact,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatMode {
    Robust,
    FairPseudo,
    FairExact,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleQuery {
    Radius,
    Lottery,
    Certify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Kcenter,
    KnapBasic,
    KnapEpsbudget,
    KnapExact,
    MatPseudo,
    MatExact,
    Lottery,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstraintKind {
    Cardinality,
    Knapsack,
    Uniform,
    Partition,
    Graphic,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "line")]
    kind: GenKind,
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Comma-separated coordinates for the line generator.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coords: Option<Vec<i64>>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    span: i64,
    #[arg(long, default_value_t = 2)]
    clusters: usize,
    #[arg(long, default_value_t = 0)]
    outliers: usize,
    #[arg(long, value_enum, default_value = "cardinality")]
    constraint: ConstraintKind,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    budget: Rational,
    #[arg(long, default_value_t = 2)]
    blocks: usize,
    #[arg(long, default_value_t = 1)]
    cap: usize,
    #[arg(long, default_value_t = 4)]
    nodes: usize,
    #[arg(long)]
    t: Option<usize>,
    /// Number of feasible sets mixed into fair coverage probabilities.
    #[arg(long)]
    fair_mixture: Option<usize>,
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    fair_scale: Rational,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Line,
    Euclidean,
    ClusteredOutliers,
    Adversarial,
}

#[derive(Serialize)]
struct LotteryAnswer {
    #[serde(rename = "R", with = "serde_rational")]
    radius: Rational,
    feasible: bool,
    lottery: Option<Lottery>,
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn load(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = Instance::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let report = inst.validate(false);
    if !report.is_valid() {
        return Err(Error::InvalidInstance(report.violations.join("; ")).into());
    }
    Ok(inst)
}

fn validation_check(inst: &Instance, paranoid: bool) -> Result<Check> {
    let report = inst.validate(paranoid);
    if !report.is_valid() {
        return Err(Error::InvalidInstance(report.violations.join("; ")).into());
    }
    Ok(Check::new("instance validation", true, if paranoid { "exhaustive" } else { "metric and constraint" }))
}

/// Oracle radius when the instance is within the enumeration caps.
fn oracle_radius(inst: &Instance) -> Result<Option<robust_center::Radius>> {
    match exact_optimal_radius(inst) {
        Ok(r) => Ok(Some(r)),
        Err(Error::TooLarge { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn dump_lp(common: &Common, inst: &Instance, radius: &Rational, fair: bool) -> Result<()> {
    if let Some(path) = &common.dump_lp {
        let lp = match solve_relaxation(inst, radius, fair, &SolveOptions::default()) {
            Ok((_, lp)) => lp,
            Err(_) => build_relaxation(inst, radius, fair),
        };
        std::fs::write(path, lp.to_lp_format()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn robust_report(
    command: &str,
    algorithm: &str,
    common: &Common,
    inst: &Instance,
    sol: CenterSolution,
    budget: BudgetRule,
    factor: i64,
) -> Result<Report> {
    dump_lp(common, &inst.robust(), &sol.radius.value, false)?;
    let oracle = oracle_radius(&inst.robust())?;
    let mut report = SolveReport::new(command, algorithm, inst, &sol, budget, factor, oracle.as_ref());
    report.checks.insert(0, validation_check(inst, common.paranoid)?);
    if common.paranoid {
        if let Some(opt) = &oracle {
            report.checks.push(Check::new(
                "relaxation radius <= oracle",
                sol.radius.value <= opt.value,
                format!("{} vs {}", rational::format(&sol.radius.value), rational::format(&opt.value)),
            ));
        }
    }
    Ok(Report::Solve(report))
}

fn fair_report(command: &str, common: &Common, sampling: &Sampling, sampler: &dyn CenterSampler) -> Result<Report> {
    let inst = sampler.instance();
    dump_lp(common, inst, &sampler.guarantee().lp_radius, true)?;
    let cert = monte_carlo_certify_keeping(sampler, sampling.samples, sampling.seed, sampling.keep_draws);
    let mut report = FairReport::new(command, cert);
    report.checks.insert(0, validation_check(inst, common.paranoid)?);
    if common.paranoid {
        if let Some(opt) = oracle_radius(inst)? {
            let r = &sampler.guarantee().lp_radius;
            report.checks.push(Check::new(
                "radius <= optimal lottery radius",
                r <= &opt.value,
                format!("{} vs {}", rational::format(r), rational::format(&opt.value)),
            ));
        }
    }
    Ok(Report::Fair(report))
}

fn opts(common: &Common) -> ConfigOptions {
    ConfigOptions {
        radius: common.radius.clone(),
        ..ConfigOptions::default()
    }
}

fn sampler_for(alg: Algorithm, inst: &Instance, common: &Common, s: &Sampling) -> Result<Box<dyn CenterSampler>> {
    let r = common.radius.as_ref();
    Ok(match alg {
        Algorithm::Kcenter => Box::new(solve_frkcenter_at(inst, &s.eps, r)?),
        Algorithm::KnapBasic => Box::new(sample_basic_frknapcenter_at(inst, r)?),
        Algorithm::KnapEpsbudget => Box::new(sample_frknapcenter_eps_budget(inst, &s.eps, &opts(common))?),
        Algorithm::KnapExact => Box::new(sample_frknapcenter_exact_budget(inst, &s.gamma, &opts(common))?),
        Algorithm::MatPseudo => Box::new(pseudo_round_at(inst, r)?),
        Algorithm::MatExact => Box::new(sample_frmatcenter_exact(inst, &s.gamma, &opts(common))?),
        Algorithm::Lottery => {
            let radius = match r {
                Some(r) => r.clone(),
                None => exact_optimal_radius(inst)?.value,
            };
            let lottery = exact_lottery_lp(inst, &radius)?.ok_or(Error::NoFeasibleRadius)?;
            Box::new(LotterySampler::new(inst, lottery))
        }
    })
}

fn generate(args: &GenArgs) -> Result<Instance> {
    let constraint = match args.constraint {
        ConstraintKind::Cardinality => ConstraintParams::Cardinality { k: args.k },
        ConstraintKind::Knapsack => ConstraintParams::Knapsack {
            budget: args.budget.clone(),
            weights: None,
        },
        ConstraintKind::Uniform => ConstraintParams::Uniform { k: args.k },
        ConstraintKind::Partition => ConstraintParams::Partition {
            blocks: args.blocks,
            cap: args.cap,
        },
        ConstraintKind::Graphic => ConstraintParams::Graphic { nodes: args.nodes },
    };
    let metric = match args.kind {
        GenKind::Line => MetricKind::Line,
        GenKind::Euclidean => MetricKind::Euclidean,
        GenKind::ClusteredOutliers => MetricKind::ClusteredOutliers,
        GenKind::Adversarial => MetricKind::Adversarial,
    };
    let params = GenParams {
        metric,
        n: args.n,
        coords: args.coords.clone(),
        dim: args.dim,
        span: args.span,
        clusters: args.clusters,
        outliers: args.outliers,
        constraint,
        t: args.t,
        fair: args.fair_mixture.map(|mixture| FairParams {
            mixture,
            scale: args.fair_scale.clone(),
        }),
    };
    Ok(generate_instance(&params, args.seed)?)
}

fn set_jobs(jobs: usize) -> Result<()> {
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    Ok(())
}

fn emit(report: &Report, common: &Common) -> Result<()> {
    let json = report.to_json() + "\n";
    match &common.out {
        Some(path) => std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    if common.table {
        eprint!("{}", report.text_table());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let (report, common) = match &cli.command {
        Command::Gen(args) => {
            let inst = generate(args)?;
            let json = inst.to_json() + "\n";
            match &args.out {
                Some(path) => std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{json}"),
            }
            return Ok(true);
        }
        Command::SolveKcenter { common, sampling, fair } => {
            set_jobs(sampling.jobs)?;
            let inst = load(&common.instance)?;
            let report = if *fair || inst.is_fair() {
                fair_report("solve-kcenter", common, sampling, &solve_frkcenter_at(&inst, &sampling.eps, common.radius.as_ref())?)?
            } else {
                let k = match inst.constraint {
                    Constraint::Cardinality { k } => k,
                    _ => bail!("solve-kcenter needs a cardinality instance"),
                };
                let sol = solve_rkcenter_at(&inst, common.radius.as_ref())?;
                robust_report("solve-kcenter", "robust-kcenter", common, &inst, sol, BudgetRule::Cardinality { k }, 2)?
            };
            (report, common)
        }
        Command::SolveKnapcenter { common, sampling, mode } => {
            set_jobs(sampling.jobs)?;
            let inst = load(&common.instance)?;
            let report = match mode {
                KnapMode::Robust => {
                    let (w, b) = inst.weights().context("solve-knapcenter needs a knapsack instance")?;
                    let wmax = w.iter().max().cloned().unwrap_or_else(rational::zero);
                    let limit = b + wmax * rational::int(2);
                    let sol = solve_rknapcenter_at(&inst, common.radius.as_ref())?;
                    robust_report("solve-knapcenter", "robust-knapcenter", common, &inst, sol, BudgetRule::Weight { limit }, 3)?
                }
                KnapMode::FairBasic => fair_report("solve-knapcenter", common, sampling, sampler_for(Algorithm::KnapBasic, &inst, common, sampling)?.as_ref())?,
                KnapMode::FairEpsbudget => fair_report("solve-knapcenter", common, sampling, sampler_for(Algorithm::KnapEpsbudget, &inst, common, sampling)?.as_ref())?,
                KnapMode::FairExact => fair_report("solve-knapcenter", common, sampling, sampler_for(Algorithm::KnapExact, &inst, common, sampling)?.as_ref())?,
            };
            (report, common)
        }
        Command::SolveMatcenter {
            common,
            sampling,
            mode,
            matroid,
        } => {
            set_jobs(sampling.jobs)?;
            let mut inst = load(&common.instance)?;
            if let Some(path) = matroid {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let spec: MatroidSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                inst.constraint = Constraint::Matroid(Matroid::new(spec, inst.n)?);
            }
            let report = match mode {
                MatMode::Robust => {
                    let sol = solve_rmatcenter_at(&inst, common.radius.as_ref())?;
                    robust_report("solve-matcenter", "robust-matcenter", common, &inst, sol, BudgetRule::Independent, 3)?
                }
                MatMode::FairPseudo => fair_report("solve-matcenter", common, sampling, sampler_for(Algorithm::MatPseudo, &inst, common, sampling)?.as_ref())?,
                MatMode::FairExact => fair_report("solve-matcenter", common, sampling, sampler_for(Algorithm::MatExact, &inst, common, sampling)?.as_ref())?,
            };
            (report, common)
        }
        Command::Oracle { query, common, sampling } => {
            set_jobs(sampling.jobs)?;
            let inst = load(&common.instance)?;
            let report = match query {
                OracleQuery::Radius => {
                    let r = exact_optimal_radius(&inst)?;
                    Report::Value {
                        command: "oracle radius".into(),
                        value: serde_json::to_value(&r)?,
                        checks: vec![validation_check(&inst, common.paranoid)?],
                    }
                }
                OracleQuery::Lottery => {
                    let radius = match &common.radius {
                        Some(r) => r.clone(),
                        None => exact_optimal_radius(&inst)?.value,
                    };
                    let lottery = exact_lottery_lp(&inst, &radius)?;
                    Report::Value {
                        command: "oracle lottery".into(),
                        value: serde_json::to_value(LotteryAnswer {
                            radius,
                            feasible: lottery.is_some(),
                            lottery,
                        })?,
                        checks: vec![validation_check(&inst, common.paranoid)?],
                    }
                }
                OracleQuery::Certify => fair_report("oracle certify", common, sampling, sampler_for(Algorithm::Lottery, &inst, common, sampling)?.as_ref())?,
            };
            (report, common)
        }
        Command::Certify {
            algorithm,
            common,
            sampling,
        } => {
            set_jobs(sampling.jobs)?;
            let inst = load(&common.instance)?;
            let sampler = sampler_for(*algorithm, &inst, common, sampling)?;
            (fair_report("certify", common, sampling, sampler.as_ref())?, common)
        }
    };
    emit(&report, common)?;
    Ok(report.is_clean())
}

/// Invalid instances and broken invariants are reported as failed checks
/// (exit 1); every other error exits with 2.
fn violation_record(e: &anyhow::Error) -> Option<Report> {
    let name = match e.downcast_ref::<Error>()? {
        Error::InvalidInstance(_) => "instance validation",
        Error::InternalInvariantViolation(_) => "internal invariant",
        _ => return None,
    };
    Some(Report::Value {
        command: std::env::args().nth(1).unwrap_or_default(),
        value: serde_json::Value::Null,
        checks: vec![Check::new(name, false, format!("{e:#}"))],
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            match violation_record(&e) {
                Some(report) => {
                    println!("{}", report.to_json());
                    ExitCode::from(1)
                }
                None => ExitCode::from(2),
            }
        }
    }
}
