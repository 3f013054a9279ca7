use ams_experiments::commands::{self, parse_param, Overrides};
use ams_experiments::output::{sci, Format};
use ams_experiments::rate::RateSweep;
use ams_experiments::tables::{TableOptions, TABLE_IDS};
use ams_experiments::validate::ValidateOptions;
use ams_experiments::{ExpError, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ams", version, about = "Adaptive multilevel splitting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios of a config file (or one built from flags).
    Run(RunArgs),
    /// Reproduce one of the result tables.
    Table(TableArgs),
    /// Estimate rate functions by regressing log p_hat on T.
    Rate(RateArgs),
    /// Run the fast self-checks.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct ScenarioFlags {
    #[arg(long)]
    model: Option<String>,
    /// std | new | new_schedule | committor
    #[arg(long)]
    score: Option<String>,
    /// Threshold profile for new_schedule (linear)
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long = "nrep")]
    n_rep: Option<usize>,
    /// Number of independent realizations M
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// Extra model parameter, e.g. --param beta=8
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

impl ScenarioFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model.clone(),
            score: self.score.clone(),
            schedule: self.schedule.clone(),
            n_rep: self.n_rep,
            samples: self.samples,
            dt: self.dt,
            t: self.t,
            a: self.a,
            params: self.params.clone(),
            seed: self.seed,
            threads: self.threads,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: ScenarioFlags,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    /// One of bm1, bm2, ou2, ou4, ou8, dbm, ou_avg, lorenz, periodic
    id: String,
    /// Divide every sample size M by this factor
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct RateArgs {
    /// Fit `a,T,p_hat` rows from a CSV file instead of simulating
    #[arg(long)]
    points: Option<PathBuf>,
    /// Comma-separated thresholds
    #[arg(long = "a-list", value_delimiter = ',')]
    a_list: Vec<f64>,
    /// Comma-separated horizons
    #[arg(long = "t-list", value_delimiter = ',')]
    t_list: Vec<f64>,
    #[command(flatten)]
    flags: ScenarioFlags,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_broken_score: bool,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let scenarios = commands::collect_scenarios(args.config.as_deref(), &args.flags.overrides())?;
            let records = commands::cmd_run(&scenarios, &args.out, args.format)?;
            for r in records {
                let s = &r.summary;
                print!(
                    "{}: p_hat = {} CI [{}, {}] var = {} r = {:.3} M = {} ({:.2}s)",
                    r.scenario,
                    sci(s.mean),
                    sci(s.ci_low),
                    sci(s.ci_high),
                    sci(s.variance),
                    s.r_nonzero,
                    s.m,
                    s.wall_time
                );
                match r.reference_p {
                    Some(p) => println!(" p = {}", sci(p)),
                    None => println!(),
                }
            }
            Ok(())
        }
        Command::Table(args) => {
            if !TABLE_IDS.contains(&args.id.as_str()) {
                return Err(ExpError::Config(format!(
                    "unknown table `{}` (known: {})",
                    args.id,
                    TABLE_IDS.join(", ")
                )));
            }
            if !(args.scale >= 1.0) {
                return Err(ExpError::Config("--scale must be at least 1".into()));
            }
            let opts = TableOptions {
                scale: args.scale,
                seed: args.seed,
                threads: args.threads,
            };
            let report = commands::cmd_table(&args.id, &opts, &args.out, args.format)?;
            println!("{}", report.title);
            for c in &report.cells {
                println!(
                    "  {:<16} {:<6} p_hat = {}  var = {}  r = {:.3}",
                    c.cell.row,
                    c.cell.column,
                    sci(c.summary.mean),
                    sci(c.summary.variance),
                    c.summary.r_nonzero
                );
            }
            for (row, q) in &report.q_hat {
                println!("  q_hat[{row}] = {q:.4}");
            }
            for (row, e) in &report.eff {
                println!("  Eff(Y|X)[{row}] = {e:.3}");
            }
            for f in &report.fits {
                if let Some(fit) = &f.fit {
                    println!("  I_hat({}) = {:.4}", f.key, fit.i_hat);
                }
            }
            Ok(())
        }
        Command::Rate(args) => {
            if let Some(points) = &args.points {
                for row in commands::cmd_rate_points(points, &args.out)? {
                    match row.fit {
                        Some(f) => println!("a = {}: I_hat = {:.6}", row.a, f.i_hat),
                        None => println!("a = {}: not enough points", row.a),
                    }
                }
                return Ok(());
            }
            let mut overrides = args.flags.overrides();
            let mut base = ams_experiments::config::ExperimentConfig::new(
                overrides.model.take().unwrap_or_else(|| "ou_average".into()),
            );
            base.n_rep = 1000;
            overrides.apply(&mut base);
            let opts = TableOptions {
                scale: args.scale,
                seed: base.seed,
                threads: base.threads,
            };
            let sweep = RateSweep {
                base,
                a_list: args.a_list,
                t_list: args.t_list,
            };
            let report = commands::cmd_rate(&sweep, &opts, &args.out)?;
            for row in &report.fits {
                let exact = row.exact.map(|e| format!(" (exact {e:.4})")).unwrap_or_default();
                match &row.fit {
                    Some(f) => println!("a = {}: I_hat = {:.4}{exact}", row.a, f.i_hat),
                    None => println!("a = {}: fewer than two usable horizons", row.a),
                }
            }
            Ok(())
        }
        Command::Validate(args) => {
            let (checks, ok) = commands::cmd_validate(&ValidateOptions {
                seed: args.seed,
                inject_broken_score: args.inject_broken_score,
            });
            for c in &checks {
                println!("[{}] {} — {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if ok {
                Ok(())
            } else {
                Err(ExpError::Failed("validation failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
