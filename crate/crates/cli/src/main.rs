//! Command-line front end.
//!
//! Run settings come from an optional TOML file (`--config`) holding a
//! `RunConfig`; any flag given on the command line overrides the file.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ficopt::assignment::{breakdown, check_assumptions, solve_assignment_with_cap};
use ficopt::harness::{
    data_profile, run, run_batch, sample_problem, write_profile_csv, DataProfileSpec,
};
use ficopt::problems::BUILTIN_NAMES;
use ficopt::solver::write_iteration_csv;
use ficopt::{AssignmentInstance, FeasibilityStats, Mode, RunConfig, RunRecord};
use serde::Serialize;

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(
    name = "ficopt",
    version,
    about = "Fidelity and interruption controlled blackbox optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Latin hypercube sample and feasibility statistics.
    Sample {
        #[command(flatten)]
        run: RunArgs,
        /// Statistics as JSON; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Raw sample outputs as CSV.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Solves the fidelity assignment from statistics, or from a fresh sample.
    Assign {
        /// Statistics written by `sample`.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One optimization run; prints the run record as JSON.
    Optimize {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-iteration log as CSV.
        #[arg(long)]
        iterations: Option<PathBuf>,
    },
    /// Data profile of run records.
    Profile {
        /// Record files, each one JSON record or one record per line.
        #[arg(required = true)]
        records: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        tau: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every mode on several problems and seeds, with data profiles.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = BUILTIN_NAMES.map(String::from))]
    problems: Vec<String>,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 200.0)]
    budget: f64,
    #[arg(long, default_value_t = 1000)]
    n_h: usize,
    #[arg(long, default_value_t = 100)]
    workers: usize,
    /// Start every run from the problem's default point.
    #[arg(long)]
    from_x0: bool,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-3])]
    taus: Vec<f64>,
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// TOML file holding a run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in problem name.
    #[arg(long)]
    problem: Option<String>,
    /// inter_pb, inter_eb or base.
    #[arg(long)]
    mode: Option<Mode>,
    /// Optimization budget in virtual seconds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lh_seed: Option<u64>,
    #[arg(long)]
    n_h: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    force_top: bool,
    #[arg(long)]
    max_evals: Option<usize>,
    /// Barrier of the base case, eb or pb.
    #[arg(long)]
    base_barrier: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    fidelities: Option<Vec<f64>>,
}

impl RunArgs {
    fn config(&self) -> CliResult<RunConfig> {
        let mut table = match &self.config {
            Some(path) => fs::read_to_string(path)?.parse::<toml::Table>()?,
            None => toml::Table::new(),
        };
        let mut set = |key: &str, value: toml::Value| {
            table.insert(key.to_string(), value);
        };
        if let Some(name) = &self.problem {
            let mut p = toml::Table::new();
            p.insert("type".into(), "builtin".into());
            p.insert("name".into(), name.as_str().into());
            set("problem", p.into());
        }
        if let Some(mode) = self.mode {
            set("mode", mode.as_str().into());
        }
        if let Some(v) = self.budget {
            set("budget", v.into());
        }
        if let Some(v) = self.seed {
            set("seed", to_int(v)?);
        }
        if let Some(v) = self.lh_seed {
            set("lh_seed", to_int(v)?);
        }
        if let Some(v) = self.n_h {
            set("n_h", to_int(v as u64)?);
        }
        if let Some(v) = self.workers {
            set("workers", to_int(v as u64)?);
        }
        if let Some(v) = self.epsilon {
            set("epsilon", v.into());
        }
        if let Some(v) = self.rho {
            set("rho", v.into());
        }
        if self.force_top {
            set("force_top", true.into());
        }
        if let Some(v) = self.max_evals {
            set("max_evals", to_int(v as u64)?);
        }
        if let Some(v) = &self.base_barrier {
            set("base_barrier", v.as_str().into());
        }
        if let Some(v) = &self.x0 {
            set("x0", v.clone().into());
        }
        if let Some(v) = &self.fidelities {
            set("fidelities", v.clone().into());
        }
        table
            .entry("mode")
            .or_insert_with(|| Mode::InterPb.as_str().into());
        table.entry("budget").or_insert(100.0.into());
        if !table.contains_key("problem") {
            return Err("no problem given: use --problem or a [problem] table in --config".into());
        }
        let cfg: RunConfig = table.try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn to_int(v: u64) -> CliResult<toml::Value> {
    Ok(toml::Value::Integer(i64::try_from(v)?))
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_records(path: &Path) -> CliResult<Vec<RunRecord>> {
    let text = fs::read_to_string(path)?;
    if let Ok(one) = serde_json::from_str::<RunRecord>(&text) {
        return Ok(vec![one]);
    }
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        out.push(serde_json::from_str(line)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct AssignReport<'a> {
    matrix: &'a ficopt::AssignmentMatrix,
    expected_eval_time: f64,
    candidates: u128,
    rows: Vec<ficopt::assignment::RowBreakdown>,
    assumptions: ficopt::assignment::AssumptionReport,
}

fn assign(stats: &FeasibilityStats, cfg: &RunConfig, out: Option<&Path>) -> CliResult<()> {
    let inst = AssignmentInstance::from_stats(stats, cfg.epsilon, cfg.force_top)?;
    let sol = solve_assignment_with_cap(&inst, u128::from(cfg.search_cap))?;
    let report = AssignReport {
        matrix: &sol.matrix,
        expected_eval_time: sol.expected_time,
        candidates: sol.candidates,
        rows: breakdown(&sol.matrix, &inst),
        assumptions: check_assumptions(&inst),
    };
    write_json(&report, out)
}

fn bench(args: &BenchArgs) -> CliResult<()> {
    let mut cfgs = Vec::new();
    for name in &args.problems {
        let problem = ficopt::problems::builtin(name)?;
        for seed in 0..args.seeds {
            for mode in Mode::ALL {
                let mut cfg = RunConfig::new(
                    ficopt::harness::ProblemSource::builtin(name),
                    mode,
                    args.budget,
                );
                cfg.seed = seed;
                cfg.n_h = args.n_h;
                cfg.workers = args.workers;
                if args.from_x0 {
                    cfg.x0 = Some(problem.x0.clone());
                }
                cfgs.push(cfg);
            }
        }
    }
    let records: Vec<RunRecord> = run_batch(&cfgs).into_iter().collect::<Result<_, _>>()?;

    let out_dir = &args.out_dir;
    fs::create_dir_all(out_dir)?;
    let mut w = BufWriter::new(File::create(out_dir.join("records.jsonl"))?);
    for r in &records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()?;
    for &tau in &args.taus {
        let profile = data_profile(&records, &DataProfileSpec::new(tau)?)?;
        write_profile_csv(
            &profile,
            File::create(out_dir.join(format!("profile_tau_{tau:e}.csv")))?,
        )?;
        for curve in &profile.curves {
            let end = curve.points.last().map_or(0.0, |p| p.fraction);
            println!(
                "tau {tau:e}  {:<9} solved {:>5.1}%",
                curve.mode.as_str(),
                100.0 * end
            );
        }
    }
    println!("{} runs written to {}", records.len(), out_dir.display());
    Ok(())
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sample { run, out, samples } => {
            let cfg = run.config()?;
            let (bb, default_rho) = cfg.problem.resolve()?;
            let s = sample_problem(&cfg, bb.as_ref(), default_rho)?;
            if let Some(path) = samples {
                s.samples.write_csv(File::create(path)?)?;
            }
            eprintln!(
                "{} points in {:?} to {:?}, sampling time {:.4} per worker",
                s.samples.len(),
                s.region.lower(),
                s.region.upper(),
                s.offset
            );
            write_json(&s.stats, out.as_deref())
        }
        Command::Assign { stats, run, out } => {
            let (stats, cfg) = match stats {
                Some(path) => {
                    let stats: FeasibilityStats = serde_json::from_str(&fs::read_to_string(path)?)?;
                    let mut args = run.clone();
                    // the problem only matters when sampling
                    if args.problem.is_none() && args.config.is_none() {
                        args.problem = Some(BUILTIN_NAMES[0].into());
                    }
                    (stats, args.config()?)
                }
                None => {
                    let cfg = run.config()?;
                    let (bb, default_rho) = cfg.problem.resolve()?;
                    (sample_problem(&cfg, bb.as_ref(), default_rho)?.stats, cfg)
                }
            };
            assign(&stats, &cfg, out.as_deref())
        }
        Command::Optimize {
            run: args,
            out,
            iterations,
        } => {
            let cfg = args.config()?;
            let record = run(&cfg)?;
            if let Some(path) = iterations {
                write_iteration_csv(&record.iterations, File::create(path)?)?;
            }
            write_json(&record, out.as_deref())
        }
        Command::Profile { records, tau, out } => {
            let mut all = Vec::new();
            for path in &records {
                all.extend(read_records(path)?);
            }
            let profile = data_profile(&all, &DataProfileSpec::new(tau)?)?;
            for key in &profile.excluded {
                eprintln!("excluded {key}: no feasible point");
            }
            let mut w = output(out.as_deref())?;
            write_profile_csv(&profile, &mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Bench(args) => bench(&args),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
