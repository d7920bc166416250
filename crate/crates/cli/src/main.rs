use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmincut::graph::GenSpec;
use dmincut::harness::{
    cmd_complexity, cmd_run, cmd_stats, cmd_verify, ComplexityConfig, EmitFormat, ExperimentConfig, Family,
    GraphSource, HarnessError, OracleChoice, Report, StatsConfig, EXIT_CHECK_FAILED,
};

/// Randomized minimum cut by a synchronous message-passing protocol.
#[derive(Parser)]
#[command(name = "dmincut", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and report the smallest cut found.
    Run(Common),
    /// Check distributed trials against a sequential replay and the exact oracle.
    Verify(Common),
    /// Estimate per-trial and per-experiment success rates.
    Stats {
        #[command(flatten)]
        common: Common,
        /// Independent single trials per graph.
        #[arg(long, default_value_t = 2000)]
        single_trials: u64,
        /// Full experiments per graph.
        #[arg(long, default_value_t = 30)]
        repetitions: u32,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Measure messages and pulses across graph sizes.
    Complexity {
        /// cycle, path, complete, random or random:DENSITY
        #[arg(long, default_value = "random")]
        family: String,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        sizes: Vec<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trials per size.
        #[arg(long, default_value_t = 3)]
        trials: u64,
        #[arg(long, default_value_t = 5)]
        k: u32,
        #[arg(long, default_value_t = 20)]
        pulse_budget_const: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Output {
    /// json, text or csv
    #[arg(long, default_value = "json")]
    emit: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    /// Edge-list file.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    graph: Option<PathBuf>,
    /// Generator spec such as cycle:8 or random:10,0.3,1,10.
    #[arg(long)]
    gen: Option<String>,
    /// Seed of the first generated graph.
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
    /// Number of generated graphs (seeds gen-seed, gen-seed + 1, ...).
    #[arg(long, default_value_t = 1)]
    graphs: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 5)]
    k: u32,
    #[arg(long, default_value_t = 20)]
    pulse_budget_const: u64,
    /// brute, sw or auto
    #[arg(long, default_value = "auto")]
    oracle: String,
    /// Write the best trial's message trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let source = match (&self.graph, &self.gen) {
            (Some(path), _) => GraphSource::File(path.clone()),
            (None, Some(spec)) => {
                let spec: GenSpec = spec.parse().map_err(|e| HarnessError::Config(format!("--gen: {e}")))?;
                GraphSource::Gen { spec, seed: self.gen_seed }
            }
            (None, None) => return Err(HarnessError::Config("one of --graph or --gen is required".into())),
        };
        Ok(ExperimentConfig {
            graphs: self.graphs,
            seed: self.seed,
            trials: self.trials,
            k: self.k,
            pulse_budget_const: self.pulse_budget_const,
            oracle: self.oracle.parse::<OracleChoice>()?,
            trace: self.trace.clone(),
            ..ExperimentConfig::new(source)
        })
    }
}

/// Runs the command and writes its report; returns whether its checks passed.
fn execute(command: Command) -> Result<bool, HarnessError> {
    let (report, output) = match command {
        Command::Run(c) => {
            c.output.format()?;
            (cmd_run(&c.config()?)?, c.output)
        }
        Command::Verify(c) => {
            c.output.format()?;
            (cmd_verify(&c.config()?)?, c.output)
        }
        Command::Stats { common, single_trials, repetitions, alpha } => {
            common.output.format()?;
            let cfg = StatsConfig { experiment: common.config()?, single_trials, repetitions, alpha };
            (cmd_stats(&cfg)?, common.output)
        }
        Command::Complexity { family, sizes, seed, trials, k, pulse_budget_const, output } => {
            output.format()?;
            let cfg = ComplexityConfig { family: family.parse::<Family>()?, sizes, seed, trials, k, pulse_budget_const };
            (cmd_complexity(&cfg)?, output)
        }
    };
    emit(&report, &output)?;
    Ok(report.passed())
}

impl Output {
    fn format(&self) -> Result<EmitFormat, HarnessError> {
        self.emit.parse()
    }
}

fn emit(report: &Report, output: &Output) -> Result<(), HarnessError> {
    let text = report.render(output.format()?)?;
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|error| HarnessError::Io { path: path.clone(), error }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            log::error!("checks failed; see the report");
            ExitCode::from(EXIT_CHECK_FAILED as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
