//! Command-line front end for the constrained uniform-mixture studies.
//!
//! Every subcommand reads an optional JSON configuration, applies the
//! command-line overrides, and writes its artifacts (JSON reports, CSV
//! tables) into the output directory. Exit codes: 0 on success, 1 when a
//! verification row fails, 2 on a configuration or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use unimix::estimator::{mle_exact, mle_multistart, mle_profile_single, ExactOptions, FitResult};
use unimix::experiments::consistency::run_consistency;
use unimix::experiments::divergence::run_divergence;
use unimix::experiments::surface::run_surface;
use unimix::experiments::table1::run_table1;
use unimix::experiments::verify::run_verify;
use unimix::experiments::{ExperimentConfig, VERSION};
use unimix::model::{support_bounds, ConstraintSpace};
use unimix::sampling::{draw_sample, SampleSet};

#[derive(Parser, Debug)]
#[command(name = "unimix", version, about = "Constrained MLE studies for mixtures of uniform distributions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file; missing keys take each study's defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "unimix-out")]
    out: PathBuf,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replications per sample size, overriding the configuration.
    #[arg(long, global = true)]
    replications: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Log-likelihood surface of the free component over (center, half-width).
    Surface,
    /// Boundary spike against the true model over the sample-size grid.
    Table1,
    /// Distance of the constrained MLE from the truth as n grows.
    Consistency,
    /// Spike against truth under a super-exponentially shrinking bound.
    Divergence,
    /// Okamoto, covering and small-component bound checks.
    Verify,
    /// Draw a sample from the configured truth.
    Sample {
        /// Sample size.
        #[arg(long)]
        n: usize,
    },
    /// Constrained MLE for a sample file.
    Fit(FitArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Sample CSV as written by `sample`.
    #[arg(long)]
    input: PathBuf,
    /// Number of components (default: that of the configured truth).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value_t = FitKind::Exact)]
    mode: FitKind,
    /// Natural log of the half-width lower bound (default: the schedule at n).
    #[arg(long, allow_hyphen_values = true)]
    log_c_lower: Option<f64>,
    /// Restarts of the multistart search.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FitKind {
    /// Background and weights fixed at the truth; one free component.
    Profile,
    /// Exhaustive search (M <= 2).
    Exact,
    Multistart,
}

/// Failures split by exit code.
enum Failure {
    Config(anyhow::Error),
    Verification(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(common: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            ExperimentConfig::from_json(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(reps) = common.replications {
        config.replications = Some(reps);
    }
    Ok(config)
}

fn write(out: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(anyhow::anyhow!("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    let config = load_config(common)?;
    let out = &common.out;
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;

    match &cli.command {
        Command::Surface => {
            let result = run_surface(&config)?;
            write(out, "surface.csv", &result.grid.to_csv())?;
            write(out, "surface.json", &result.report.to_json())?;
            let s = &result.report.summary;
            println!("n={} plateaus at smallest half-width: {}", s.n, s.plateaus_at_smallest_half_width);
        }
        Command::Table1 => {
            let report = run_table1(&config)?;
            write(out, "table1.csv", &report.summary.to_csv())?;
            write(out, "table1.json", &report.to_json())?;
            for e in &report.summary.entries {
                println!(
                    "n={:>6} true={:>10.3} (sd {:.3}) boundary={:>10.3}",
                    e.n, e.loglik_true_mean, e.loglik_true_sd, e.loglik_boundary
                );
            }
            if let Some(c) = &report.summary.crossover {
                println!("crossover n* = {:.2}", c.n_star);
            }
        }
        Command::Consistency => {
            let report = run_consistency(&config)?;
            let mut csv = String::from("n,completed,failed,median_l1_distance,median_param_distance\n");
            for e in &report.summary.entries {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    e.n, e.completed, e.failed, e.median_l1_distance, e.median_param_distance
                ));
            }
            write(out, "consistency.csv", &csv)?;
            write(out, "consistency.json", &report.to_json())?;
            print!("{csv}");
        }
        Command::Divergence => {
            let report = run_divergence(&config)?;
            let mut csv = String::from("n,log_c_n,spike_win_fraction,boundary_fraction,median_gap\n");
            for e in &report.summary.entries {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    e.n, e.log_c_n, e.spike_win_fraction, e.boundary_fraction, e.median_gap
                ));
            }
            write(out, "divergence.csv", &csv)?;
            write(out, "divergence.json", &report.to_json())?;
            print!("{csv}");
        }
        Command::Verify => {
            let report = run_verify(&config)?;
            let mut csv = String::from("check,label,measured,bound,pass\n");
            for r in &report.rows {
                csv.push_str(&format!("{:?},{},{},{},{}\n", r.check, r.label, r.measured, r.bound, r.pass));
            }
            write(out, "verify.csv", &csv)?;
            write(out, "verify.json", &report.to_json())?;
            println!("{} of {} checks passed", report.summary.total - report.summary.failed, report.summary.total);
            if !report.summary.pass {
                return Err(Failure::Verification(format!("{} rows failed", report.summary.failed)));
            }
        }
        Command::Sample { n } => {
            let sample = draw_sample(&config.truth, *n, config.seed)?;
            write(out, "sample.csv", &sample.to_csv())?;
        }
        Command::Fit(args) => {
            let fit = fit_file(&config, args)?;
            let json = serde_json::json!({ "version": VERSION, "input": args.input.display().to_string(), "fit": fit });
            write(out, "fit.json", &serde_json::to_string_pretty(&json)?)?;
            println!("loglik = {}", fit.loglik);
        }
    }
    Ok(())
}

fn fit_file(config: &ExperimentConfig, args: &FitArgs) -> anyhow::Result<FitResult> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading sample {}", args.input.display()))?;
    let sample = SampleSet::from_csv(&text).with_context(|| format!("parsing sample {}", args.input.display()))?;
    let n = sample.len();
    let ln_c = args.log_c_lower.unwrap_or_else(|| config.schedule.ln_c_n(n as u64));
    let space = ConstraintSpace::for_support(support_bounds(&config.truth), ln_c)?;
    let m = args.m.unwrap_or(config.truth.num_components());
    let fit = match args.mode {
        FitKind::Profile => {
            if config.truth.num_components() != 2 {
                bail!("profile fits need a two-component truth");
            }
            let w = config.truth.weights();
            mle_profile_single(&sample, config.truth.components()[0], (w[0], w[1]), &space)?
        }
        FitKind::Exact => mle_exact(&sample, m, &space, ExactOptions::default())?,
        FitKind::Multistart => mle_multistart(&sample, m, &space, args.restarts, config.seed)?,
    };
    Ok(fit)
}
