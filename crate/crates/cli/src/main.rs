use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use posnb_cli::commands::{self, Mode, RunOptions};
use posnb_cli::{CliError, CliResult, DatasetPaths};

#[derive(Parser)]
#[command(name = "posnb", version, about = "Position-weighted Naive Bayes sentiment experiments")]
struct Cli {
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Polarity corpus root holding pos/ and neg/ (or txt_sentoken/).
    #[arg(long, env = "POSNB_POLARITY_DIR")]
    polarity: Option<PathBuf>,
    /// Subjective sentences, one per line.
    #[arg(long, env = "POSNB_SUBJ_FILE")]
    subj: Option<PathBuf>,
    /// Objective sentences, one per line.
    #[arg(long, env = "POSNB_OBJ_FILE")]
    obj: Option<PathBuf>,
}

impl From<DataArgs> for DatasetPaths {
    fn from(a: DataArgs) -> Self {
        DatasetPaths { polarity: a.polarity, subjective: a.subj, objective: a.obj }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check dataset layout and sizes.
    Validate {
        #[command(flatten)]
        data: DataArgs,
        /// Accept corpora of any size.
        #[arg(long)]
        allow_custom: bool,
    },
    /// Cross-validate one config, or every config in a directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write per-sentence subjectivity scores.
        #[arg(long)]
        traces: bool,
    },
    /// Evaluate every q on a grid with the same folds and write a CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 2.0)]
        to: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// CSV file, or a directory for `<stem>.sweep.csv`.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Nested cross-validation that picks q inside each outer fold.
    Tune {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        traces: bool,
    },
    /// Print a table of all reports in a results directory.
    Report {
        #[arg(default_value = "results")]
        dir: PathBuf,
    },
}

fn run_all(config: PathBuf, out: PathBuf, data: DataArgs, opts: RunOptions) -> CliResult<()> {
    let paths = DatasetPaths::from(data);
    for file in commands::config_files(&config)? {
        let summary = commands::run_config(&file, &out, &paths, &opts)?;
        println!("{}", commands::summary_line(&summary.report));
        log::info!("wrote {}", summary.report_path.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.into()))?;
    }
    match cli.command {
        Command::Validate { data, allow_custom } => {
            let summary = commands::validate(&data.into(), allow_custom)?;
            println!("{summary}");
            if summary.skipped_empty > 0 {
                eprintln!("skipped {} empty file(s)", summary.skipped_empty);
            }
            Ok(())
        }
        Command::Run { config, out, data, seed, traces } => {
            run_all(config, out, data, RunOptions { seed, traces, mode: Mode::Auto })
        }
        Command::Tune { config, out, data, seed, traces } => {
            run_all(config, out, data, RunOptions { seed, traces, mode: Mode::Nested })
        }
        Command::Sweep { config, from, to, step, out, data, seed } => {
            let grid = commands::sweep_grid(from, to, step)?;
            let s = commands::sweep(&config, &grid, &out, &data.into(), seed)?;
            if let Some(best) = s.result.best() {
                println!("best q={} accuracy {:.2}% ({} rows)", best.q, 100.0 * best.accuracy, s.result.rows.len());
            }
            println!("wrote {}", s.csv_path.display());
            Ok(())
        }
        Command::Report { dir } => {
            let stdout = std::io::stdout();
            let collected = commands::report(&dir, stdout.lock())?;
            for note in &collected.unverified {
                eprintln!("not verified: {note}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("posnb: {e}");
            e.exit_code()
        }
    }
}
