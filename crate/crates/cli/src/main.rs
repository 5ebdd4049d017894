use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sisqo::harness::{run_sweep, write_outputs, ExperimentConfig, SweepOutcome};
use sisqo::problem::derivative_report;
use sisqo::rng::{stream_rng, Stream};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sisqo", version, about = "Stochastic inexact SQP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once: the first configured seed (or --seed) at oracle.eps_n.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Budget-matched inexact vs near-exact pairs over the configured seeds.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Every (noise level, seed) combination, optionally as pairs.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Run budget-matched pairs regardless of harness.compare.
        #[arg(long)]
        compare: bool,
    },
    /// Resolve the config, build the problem and check its derivatives.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Print the fully resolved config.
        #[arg(long)]
        print: bool,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment file.
    #[arg(short, long)]
    config: PathBuf,
    /// Override a value, e.g. --set algorithm.kappa=0.01 (repeatable).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// File stem for the outputs; defaults to the command name.
    #[arg(long)]
    stem: Option<String>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_path(&self.config, &self.overrides)
            .with_context(|| format!("loading {}", self.config.display()))
    }
}

fn report(outcome: &SweepOutcome) {
    println!("config {}", outcome.config_hash);
    println!(
        "{:<24} {:<12} {:>9} {:>5} {:>12} {:>12} {:>10} {:>7}",
        "problem", "strategy", "eps_n", "runs", "feas_err", "stat_err", "minres", "outer"
    );
    for s in &outcome.summary {
        println!(
            "{:<24} {:<12} {:>9.1e} {:>5} {:>12.3e} {:>12.3e} {:>10.1} {:>7.1}",
            s.problem,
            s.strategy,
            s.eps_n,
            s.runs,
            s.mean_feas_err,
            s.mean_stat_err,
            s.mean_minres_iters,
            s.mean_outer_iters
        );
    }
    for r in outcome.records.iter().filter(|r| r.status.is_failure()) {
        eprintln!("seed {} ({}) failed: {}", r.seed, r.strategy, r.message.as_deref().unwrap_or("unknown error"));
    }
}

fn execute(cfg: &ExperimentConfig, compare: bool, stem: &str) -> Result<usize> {
    let outcome = run_sweep(cfg, compare)?;
    report(&outcome);
    for path in write_outputs(&outcome, cfg, stem)? {
        log::info!("wrote {}", path.display());
    }
    Ok(outcome.failures())
}

fn validate(cfg: &ExperimentConfig, print: bool) -> Result<()> {
    if print {
        print!("{}", cfg.to_toml_string());
    }
    let mut rng = stream_rng(0, Stream::ProblemGeneration);
    for eps in cfg.noise_levels() {
        let problem = cfg.build_problem(eps)?;
        let r = derivative_report(problem.as_ref(), 3, &mut rng);
        println!(
            "{} (eps_n {eps:e}): n = {}, m = {}, gradient {:.1e}, jacobian {:.1e}, hessian {:.1e}",
            problem.name(),
            problem.num_variables(),
            problem.num_constraints(),
            r.gradient,
            r.jacobian,
            r.hessian
        );
        if r.gradient > 1e-6 || r.jacobian > 1e-6 || r.hessian > 1e-5 || r.hessian_symmetry > 0.0 {
            bail!("derivative check failed for {}", problem.name());
        }
    }
    println!("config {} ok, outputs go to {}", cfg.config_hash(), cfg.output_dir().display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { common, seed } => common.load().and_then(|mut cfg| {
            let seed = seed.unwrap_or(cfg.harness.seeds.first().copied().unwrap_or(0));
            cfg.harness.seeds = vec![seed];
            cfg.harness.eps_n_values.clear();
            execute(&cfg, false, common.stem.as_deref().unwrap_or("run"))
        }),
        Command::Compare { common } => common.load().and_then(|mut cfg| {
            cfg.harness.eps_n_values.clear();
            execute(&cfg, true, common.stem.as_deref().unwrap_or("compare"))
        }),
        Command::Sweep { common, compare } => common.load().and_then(|cfg| {
            let compare = *compare || cfg.harness.compare;
            execute(&cfg, compare, common.stem.as_deref().unwrap_or("sweep"))
        }),
        Command::Validate { common, print } => common.load().and_then(|cfg| validate(&cfg, *print)).map(|_| 0),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{failed} run(s) failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
