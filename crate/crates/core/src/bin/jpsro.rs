use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jpsro::experiments::{
    estimator_study, plot_bundle, read_bundle, run_experiment, support_stats, write_bundle, write_support_table, Algo,
    ExperimentConfig,
};
use jpsro::jpsro::RunConfig;
use jpsro::population::{counterexample_demo, CounterexampleReport, NeuplConfig, PopulationMode};
use jpsro::solver::Objective;
use jpsro::{Error, GameSpec};

const USAGE_NOTES: &str = "\
Invalid combinations (exit code 2):
  --estimator, --buckets, --episodes and --bayes-priors need --algo neupl-parametric
  --estimator cannot be combined with --simulate
  --seeds must be at least 1

Exit codes: 0 success, 2 usage error, 3 runtime error.";

#[derive(Parser)]
#[command(name = "jpsro", version, about = "JPSRO(CCE) and NeuPL-JPSRO on small extensive-form games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an algorithm over several seeds and write a result bundle.
    #[command(after_help = USAGE_NOTES)]
    Run(RunArgs),
    /// Render the gap/value plot and its CSV from a bundle.
    Plot {
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count joint actions with non-trivial support in every stored sigma.
    SupportStats {
        bundle: PathBuf,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prior-strategy drift with and without reference regularisation on
    /// avoid_direction.
    Counterexample {
        #[arg(long, default_value_t = 10)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the payoff estimator to a matrix game's exact payoffs.
    Estimator {
        #[arg(long, default_value = "rps")]
        game: GameSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20000)]
        max_steps: usize,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Game, e.g. `kuhn_poker(players=3)` or `goofspiel(num_cards=4)`.
    #[arg(long)]
    game: GameSpec,
    #[arg(long, value_enum, default_value_t = Algo::Jpsro)]
    algo: Algo,
    #[arg(long, value_enum, default_value_t = Objective::MaxGini)]
    objective: Objective,
    /// Relaxation of the restricted-game CCE constraints.
    #[arg(long, default_value_t = 0.01)]
    solver_eps: f64,
    /// Stop when every player's deviation gain is below this.
    #[arg(long, default_value_t = 1e-3)]
    term_eps: f64,
    #[arg(long, default_value_t = 60)]
    iters: usize,
    /// Number of seeds; seeds 0..N are run.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Number of most probable joint actions kept by the co-player encoder.
    #[arg(long, default_value_t = jpsro::population::DEFAULT_TOP_K)]
    topk: usize,
    #[arg(long)]
    out: PathBuf,
    /// Evaluate the metagame from this many sampled episodes per entry.
    #[arg(long)]
    simulate: Option<usize>,
    /// Record per-iteration wall time (traces stop being byte-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    embedding_dim: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    buckets: Option<usize>,
    /// Replace payoff evaluation with the learned payoff estimator.
    #[arg(long)]
    estimator: bool,
    #[arg(long)]
    bayes_priors: Option<usize>,
    /// Keep iterating after the termination test passes.
    #[arg(long)]
    no_early_stop: bool,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn experiment_config(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let parametric_only = args.estimator
        || args.buckets.is_some()
        || args.episodes.is_some()
        || args.bayes_priors.is_some();
    if parametric_only && args.algo != Algo::NeuplParametric {
        return Err(Failure::Usage(
            "--estimator, --buckets, --episodes and --bayes-priors need --algo neupl-parametric".into(),
        ));
    }
    if args.seeds == 0 {
        return Err(Failure::Usage("--seeds must be at least 1".into()));
    }
    let mut run = RunConfig::new(args.game.clone());
    run.objective = args.objective;
    run.solver_epsilon = args.solver_eps;
    run.termination_epsilon = args.term_eps;
    run.max_iterations = args.iters;
    run.simulated_episodes = args.simulate;
    run.record_timing = args.timing;
    let mode = match args.algo {
        Algo::NeuplParametric => PopulationMode::SharedParametric,
        _ => PopulationMode::TabularExact,
    };
    let mut neupl = NeuplConfig::new(run, mode);
    neupl.top_k = args.topk;
    if let Some(d) = args.embedding_dim {
        neupl.embedding_dim = d;
    }
    if let Some(e) = args.episodes {
        neupl.episodes_per_iteration = e;
    }
    neupl.buckets = args.buckets;
    neupl.use_estimator = args.estimator;
    if let Some(b) = args.bayes_priors {
        neupl.bayes_priors = b;
    }
    neupl.check_termination = !args.no_early_stop;
    let config = ExperimentConfig {
        algo: args.algo,
        neupl,
        seeds: (0..args.seeds).collect(),
    };
    config.validate()?;
    config.neupl.run.game.build().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let config = experiment_config(args)?;
    let bundle = run_experiment(&config)?;
    write_bundle(&bundle, &args.out)?;
    plot_bundle(&bundle, &args.out.join("plots"))?;
    for run in &bundle.runs {
        let last = run.records.last().expect("a run has at least one record");
        println!(
            "seed {}: {:?} after {} records, cce_gap {:e}, values {:?}",
            run.seed,
            run.status,
            run.records.len(),
            last.cce_gap,
            last.values
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_plot(bundle: &Path, out: &Path) -> Result<(), Failure> {
    let bundle = read_bundle(bundle)?;
    for path in plot_bundle(&bundle, out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_support_stats(bundle: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let bundle = read_bundle(bundle)?;
    let runs: Vec<(u64, &[_])> = bundle.runs.iter().map(|r| (r.seed, r.sigmas.as_slice())).collect();
    let stats = support_stats(&runs)?;
    let mut text = Vec::new();
    write_support_table(&stats, &mut text)?;
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(&text)?,
    }
    Ok(())
}

fn print_drift(name: &str, records: &[jpsro::population::DriftRecord]) {
    println!("{name}");
    for r in records {
        println!("  iteration {:>2}: visited {:.6e}  unvisited {:.6e}", r.iteration, r.visited_kl, r.unvisited_kl);
    }
}

fn cmd_counterexample(iters: usize, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    if iters == 0 {
        return Err(Failure::Usage("--iters must be at least 1".into()));
    }
    let report = counterexample_demo(iters, seed)?;
    println!(
        "visited infosets {:?}, unvisited {:?}",
        report.visited_infosets, report.unvisited_infosets
    );
    print_drift("regime A (no regularisation)", &report.regime_a);
    print_drift("regime B (reference regularisation)", &report.regime_b);
    print_drift("regime B, tabular", &report.regime_b_tabular);
    println!(
        "max visited drift: A {:.6e}, B {:.6e}, B tabular {:.6e}",
        CounterexampleReport::max_visited(&report.regime_a),
        CounterexampleReport::max_visited(&report.regime_b),
        CounterexampleReport::max_visited(&report.regime_b_tabular)
    );
    if let Some(path) = out {
        let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        json.push('\n');
        fs::write(path, json)?;
    }
    Ok(())
}

fn cmd_estimator(game: &GameSpec, seed: u64, max_steps: usize, tolerance: f64) -> Result<(), Failure> {
    let study = estimator_study(game, seed, max_steps, tolerance)?;
    println!("{}", serde_json::to_string_pretty(&study).map_err(Error::from)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Plot { bundle, out } => cmd_plot(bundle, out),
        Command::SupportStats { bundle, out } => cmd_support_stats(bundle, out.as_deref()),
        Command::Counterexample { iters, seed, out } => cmd_counterexample(*iters, *seed, out.as_deref()),
        Command::Estimator {
            game,
            seed,
            max_steps,
            tolerance,
        } => cmd_estimator(game, *seed, *max_steps, *tolerance),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{USAGE_NOTES}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
