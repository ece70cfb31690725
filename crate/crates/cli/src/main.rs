use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ot1d::barycenter::{
    barycenter_quantiles, default_grid, finite_barycenter, population_barycenter, MeasureDistribution,
    WeightedFamily,
};
use ot1d::checks::run_checks;
use ot1d::cost::CostFunction;
use ot1d::lln::{BarycenterLlnConfig, ConvergenceReport, ScalarLlnConfig, StrongWeakConfig};
use ot1d::measure::{discretize, read_measure_file, DiscreteMeasure, Measure, MeasureSpec, QuantileCurve};
use ot1d::sampling::MeasureSamplerSpec;
use ot1d::transport::{monotone_plan, optimal_map, transport_cost_quadrature, QuadratureConfig, TransportCost};
use ot1d::Error;

/// Optimal transport and Fréchet barycenters on the real line.
#[derive(Debug, Parser, Serialize)]
#[command(name = "ot1d", version)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
enum Command {
    /// Transportation cost J(mu, nu).
    Cost(CostArgs),
    /// Monotone transport plan between two measures.
    Plan(PlanArgs),
    /// Fréchet barycenter of a weighted family or of a sampler.
    Barycenter(BarycenterArgs),
    /// Seeded convergence experiments.
    Lln {
        #[command(subcommand)]
        experiment: LlnCommand,
    },
    /// Built-in invariant suite.
    Check(CheckArgs),
}

#[derive(Debug, Args, Serialize)]
struct CostArgs {
    /// `quadratic`, `power:<p>` or `skewquad:<c>`.
    #[arg(long)]
    cost: String,
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Integrate the quantile tails of analytic measures as well.
    #[arg(long)]
    tails: bool,
}

#[derive(Debug, Args, Serialize)]
struct PlanArgs {
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    /// Include the plan's cost in JSON output.
    #[arg(long)]
    cost: Option<String>,
    /// Emit the optimal map `x -> T(x)`; fails when mass must split.
    #[arg(long)]
    map: bool,
    /// Atoms used to discretize analytic inputs.
    #[arg(long, default_value_t = 200)]
    cells: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args, Serialize)]
struct BarycenterArgs {
    /// `quadratic`, `power:<p>` or `skewquad:<c>`.
    #[arg(long)]
    cost: String,
    /// Family members; repeat the flag.
    #[arg(long)]
    mu: Vec<PathBuf>,
    /// Comma-separated weights, one per `--mu`; equal when omitted.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Sampler spec (JSON) for a Monte Carlo population barycenter.
    #[arg(long, conflicts_with = "mu")]
    sampler: Option<PathBuf>,
    /// Monte Carlo draws per quantile level (with `--sampler`).
    #[arg(long, default_value_t = 1000)]
    mc_samples: usize,
    /// Cells of the quantile grid `k / N` (with `--sampler`), and atoms per
    /// discretized analytic input.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Write `p,psi(p)` to this CSV file.
    #[arg(long)]
    emit_quantiles: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "experiment", rename_all = "lowercase")]
enum LlnCommand {
    Scalar(LlnArgs),
    Barycenter(LlnArgs),
    Strongweak(LlnArgs),
}

#[derive(Debug, Args, Serialize)]
struct LlnArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CheckArgs {
    /// Randomized instances per check.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoMongeMap { .. }
            | Error::GrowthConstantsMissing(_)
            | Error::Monotonicity(_)
            | Error::SizeLimit { .. }
            | Error::Sampler(_) => Failure::Compute(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn log_config(cli: &Cli, resolved: Option<serde_json::Value>) {
    let mut line = serde_json::to_value(cli).expect("arguments serialize");
    if let (Some(obj), Some(r)) = (line.as_object_mut(), resolved) {
        obj.insert("resolved".into(), r);
    }
    eprintln!("{line}");
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn discrete(m: Measure, cells: usize) -> CliResult<DiscreteMeasure> {
    Ok(match m {
        Measure::Discrete(d) => d,
        Measure::Analytic(c) => discretize(&c, cells)?,
    })
}

fn measure_json(m: &DiscreteMeasure) -> String {
    serde_json::to_string(&MeasureSpec::from(m)).expect("measure specs serialize") + "\n"
}

fn run(cli: &Cli) -> CliResult<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Cost(a) => {
            log_config(cli, None);
            let g = CostFunction::parse(&a.cost)?;
            let mu = read_measure_file(&a.mu)?;
            let nu = read_measure_file(&a.nu)?;
            let j = match (mu.as_discrete(), nu.as_discrete()) {
                (Some(x), Some(y)) => ot1d::transport::discrete_transport_cost(&g, x, y),
                _ => {
                    let cfg = QuadratureConfig { include_tails: a.tails, ..Default::default() };
                    transport_cost_quadrature(&g, &mu, &nu, cfg)
                }
            };
            let text = match a.format {
                None => format!("{j}\n"),
                Some(Format::Csv) => format!("cost,value\n{},{j}\n", g.label()),
                Some(Format::Json) => {
                    let value = match j {
                        TransportCost::Finite(v) => serde_json::json!(v),
                        TransportCost::Infinite => serde_json::json!("inf"),
                    };
                    format!("{}\n", serde_json::json!({ "cost": g.label(), "value": value }))
                }
            };
            emit(out, &text)
        }
        Command::Plan(a) => {
            log_config(cli, None);
            let g = a.cost.as_deref().map(CostFunction::parse).transpose()?;
            let mu = discrete(read_measure_file(&a.mu)?, a.cells)?;
            let nu = discrete(read_measure_file(&a.nu)?, a.cells)?;
            let text = if a.map {
                let map = optimal_map(&mu, &nu)?;
                match a.format {
                    Format::Csv => map.iter().fold(String::from("x,t\n"), |mut s, (x, t)| {
                        let _ = writeln!(s, "{x},{t}");
                        s
                    }),
                    Format::Json => {
                        let pairs: Vec<_> = map.iter().map(|(x, t)| serde_json::json!({ "x": x, "t": t })).collect();
                        format!("{}\n", serde_json::json!({ "map": pairs }))
                    }
                }
            } else {
                let plan = monotone_plan(&mu, &nu);
                match a.format {
                    Format::Csv => plan.to_csv(),
                    Format::Json => {
                        let entries: Vec<_> = plan
                            .entries()
                            .iter()
                            .map(|e| serde_json::json!({ "x": e.x, "y": e.y, "mass": e.mass }))
                            .collect();
                        let mut doc = serde_json::json!({ "entries": entries });
                        if let Some(g) = &g {
                            doc["cost"] = serde_json::json!(plan.cost(g));
                        }
                        format!("{doc}\n")
                    }
                }
            };
            emit(out, &text)
        }
        Command::Barycenter(a) => barycenter(cli, a, out),
        Command::Lln { experiment } => {
            let report = lln(cli, experiment)?;
            emit(out, &report.to_csv())
        }
        Command::Check(a) => {
            log_config(cli, None);
            let outcomes = run_checks(a.trials, cli.seed)?;
            let mut text = String::new();
            for o in &outcomes {
                let _ = writeln!(text, "{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let _ = writeln!(text, "{} checks, {failed} failed", outcomes.len());
            emit(out, &text)?;
            if failed > 0 {
                return Err(Failure::Compute(format!("{failed} invariant checks failed")));
            }
            Ok(())
        }
    }
}

fn barycenter(cli: &Cli, a: &BarycenterArgs, out: Option<&Path>) -> CliResult<()> {
    let g = CostFunction::parse(&a.cost)?;
    if a.grid < 2 {
        return Err(Failure::Usage("--grid must be at least 2".into()));
    }
    if let Some(path) = &a.sampler {
        let spec: MeasureSamplerSpec = read_json(path)?;
        log_config(cli, Some(serde_json::to_value(&spec).expect("specs serialize")));
        let dist = MeasureDistribution::Sampler(spec.resolve()?);
        let pop = population_barycenter(&g, &dist, &default_grid(a.grid), a.mc_samples, cli.seed)?;
        if let Some(q) = &a.emit_quantiles {
            write_file(q, &quantile_csv(pop.grid.iter().copied().zip(pop.psi.iter().copied())))?;
        }
        return emit(out, &measure_json(&pop.measure));
    }

    log_config(cli, None);
    if a.mu.is_empty() {
        return Err(Failure::Usage("give at least one --mu, or --sampler".into()));
    }
    let measures = a
        .mu
        .iter()
        .map(|p| discrete(read_measure_file(p)?, a.grid))
        .collect::<CliResult<Vec<_>>>()?;
    let fam = match &a.weights {
        Some(w) => WeightedFamily::new(measures, w.clone())?,
        None => WeightedFamily::equal(measures)?,
    };
    let bary = finite_barycenter(&g, &fam)?;
    if let Some(q) = &a.emit_quantiles {
        let part = barycenter_quantiles(&g, &fam)?;
        write_file(q, &quantile_csv(part.midpoints().zip(part.values.iter().copied())))?;
    }
    emit(out, &measure_json(&bary))
}

fn quantile_csv(points: impl Iterator<Item = (f64, f64)>) -> String {
    points.fold(String::from("p,psi(p)\n"), |mut s, (p, v)| {
        let _ = writeln!(s, "{p},{v}");
        s
    })
}

fn lln(cli: &Cli, experiment: &LlnCommand) -> CliResult<ConvergenceReport> {
    Ok(match experiment {
        LlnCommand::Scalar(a) => {
            let cfg: ScalarLlnConfig = read_json(&a.config)?;
            log_config(cli, serde_json::to_value(&cfg).ok());
            cfg.run(cli.seed)?
        }
        LlnCommand::Barycenter(a) => {
            let cfg: BarycenterLlnConfig = read_json(&a.config)?;
            log_config(cli, serde_json::to_value(&cfg).ok());
            cfg.run(cli.seed)?
        }
        LlnCommand::Strongweak(a) => {
            let cfg: StrongWeakConfig = read_json(&a.config)?;
            log_config(cli, serde_json::to_value(&cfg).ok());
            let mut report = cfg.run()?;
            report.seed = cli.seed;
            report
        }
    })
}
