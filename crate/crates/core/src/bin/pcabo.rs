use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pcabo::harness::{self, ExperimentConfig, FULL_DE_BUDGET_SCALE};
use pcabo::{Error, ProblemKind};

#[derive(Parser)]
#[command(
    name = "pcabo",
    version,
    about = "Benchmark BO and PCA-assisted BO on multimodal test problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Base seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Repetitions per cell; overrides the config.
        #[arg(long)]
        reps: Option<usize>,
        /// Worker threads; overrides the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Use the full-scale inner DE budget of 20020·r² evaluations.
        #[arg(long)]
        paper_budget: bool,
        /// Output directory; overrides the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recompute summary.json from the run CSVs in a directory.
    Summarize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        precision_level: f64,
        #[arg(long, default_value_t = 0.01)]
        cpu_level: f64,
    },
    /// List the registered test problems.
    ListProblems,
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            reps,
            workers,
            paper_budget,
            output,
        } => run(config, seed, reps, workers, paper_budget, output),
        Command::Summarize {
            input,
            precision_level,
            cpu_level,
        } => summarize(input, precision_level, cpu_level),
        Command::ListProblems => {
            for k in ProblemKind::ALL {
                let structure = match k.structure() {
                    pcabo::GlobalStructure::Adequate => "adequate",
                    pcabo::GlobalStructure::Weak => "weak",
                };
                println!("{:<22} {:<9} {}", k.name(), structure, k.description());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run(
    path: PathBuf,
    seed: Option<u64>,
    reps: Option<usize>,
    workers: Option<usize>,
    paper_budget: bool,
    output: Option<PathBuf>,
) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = reps {
        cfg.repetitions = r;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    if paper_budget {
        cfg.de_budget_scale = FULL_DE_BUDGET_SCALE;
    }
    if let Some(o) = output {
        cfg.output_dir = o;
    }
    cfg.validate()?;
    let report = harness::run_experiment(&cfg)?;
    print!("{}", harness::summary::render_table(&report.summary));
    println!(
        "wrote {} run files and {}",
        report.csv_files.len(),
        report.summary_path.display()
    );
    if !report.failed_runs.is_empty() {
        return Err(Error::Argument(format!("{} runs failed", report.failed_runs.len())));
    }
    Ok(())
}

fn summarize(input: PathBuf, precision_level: f64, cpu_level: f64) -> Result<(), Error> {
    let (series, failed) = harness::load_runs(&input)?;
    if series.is_empty() {
        return Err(Error::Argument(format!("no run files in {}", input.display())));
    }
    let summary = harness::summarize(&series, failed, precision_level, cpu_level);
    let path = input.join("summary.json");
    harness::write_summary(&path, &summary)?;
    print!("{}", harness::summary::render_table(&summary));
    println!("wrote {}", path.display());
    Ok(())
}
