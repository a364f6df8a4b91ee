use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use outstab_cli::config::{parse_config, KReadingConfig, RunConfig};
use outstab_cli::run::{
    agreement_exit_code, run_analysis, run_oracle_check, run_simulation, verdict_exit_code,
    RunError,
};

/// Decides output stabilizability of a reaction-diffusion system with zone
/// actuators and sensors, and validates the verdict against a
/// finite-difference oracle.
///
/// Exit codes: 0 stabilizable, 1 not stabilizable, 2 configuration error,
/// 3 internal/truncation error, 4 oracle disagreement, 5 oracle inconclusive.
#[derive(Parser)]
#[command(name = "outstab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the spectral analysis and write report.json.
    Analyze(CommonArgs),
    /// Simulate the (closed-loop) output and write timeseries.csv + decay.json.
    Simulate(CommonArgs),
    /// Compare the spectral verdict against the finite-difference oracle and
    /// write oracle.json.
    OracleCheck(CommonArgs),
    /// Parse and validate a configuration without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Which K reading drives the verdict (overrides the config).
    #[arg(long, value_enum)]
    k_reading: Option<KReadingArg>,
    /// Number of clusters in the analysis table (overrides the config).
    #[arg(long)]
    modes: Option<usize>,
    /// Seed for the randomized parts of feedback design (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KReadingArg {
    Literal,
    Refined,
}

fn load_config(args: &CommonArgs) -> Result<(RunConfig, Option<PathBuf>), String> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read '{}': {e}", args.config.display()))?;
    let mut config = parse_config(&text).map_err(|e| format!("configuration error:\n{e}"))?;
    if let Some(reading) = args.k_reading {
        config.k_reading = match reading {
            KReadingArg::Literal => KReadingConfig::Literal,
            KReadingArg::Refined => KReadingConfig::Refined,
        };
    }
    if let Some(modes) = args.modes {
        config.truncation.analysis_clusters = modes;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let base_dir = args.config.parent().map(Path::to_path_buf);
    Ok((config, base_dir))
}

fn out_dir(args: &CommonArgs, config: &RunConfig) -> PathBuf {
    args.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create '{}': {e}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| format!("cannot write '{}': {e}", path.display()))?;
    Ok(path)
}

fn fail(message: String, code: u8) -> ExitCode {
    eprintln!("{message}");
    ExitCode::from(code)
}

fn run_error(e: &RunError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => {
            let (config, base_dir) = match load_config(&args) {
                Ok(x) => x,
                Err(m) => return fail(m, 2),
            };
            match run_analysis(&config, base_dir.as_deref()) {
                Ok(outcome) => {
                    let dir = out_dir(&args, &config);
                    let path = match write_file(&dir, "report.json", &outcome.json) {
                        Ok(p) => p,
                        Err(m) => return fail(m, 3),
                    };
                    println!(
                        "verdict ({}): {} | witnesses: {} | report: {}",
                        outcome.doc.k_reading,
                        if outcome.stabilizable {
                            "output stabilizable"
                        } else {
                            "NOT output stabilizable"
                        },
                        outcome.doc.witnesses.len(),
                        path.display()
                    );
                    ExitCode::from(verdict_exit_code(outcome.stabilizable) as u8)
                }
                Err(e) => run_error(&e),
            }
        }
        Command::Simulate(args) => {
            let (config, base_dir) = match load_config(&args) {
                Ok(x) => x,
                Err(m) => return fail(m, 2),
            };
            match run_simulation(&config, base_dir.as_deref()) {
                Ok(outcome) => {
                    let dir = out_dir(&args, &config);
                    let csv = match write_file(&dir, "timeseries.csv", &outcome.csv) {
                        Ok(p) => p,
                        Err(m) => return fail(m, 3),
                    };
                    let summary = match write_file(&dir, "decay.json", &outcome.summary_json) {
                        Ok(p) => p,
                        Err(m) => return fail(m, 3),
                    };
                    println!(
                        "simulation written: {} | decay summary: {}",
                        csv.display(),
                        summary.display()
                    );
                    ExitCode::from(verdict_exit_code(outcome.stabilizable) as u8)
                }
                Err(e) => run_error(&e),
            }
        }
        Command::OracleCheck(args) => {
            let (config, base_dir) = match load_config(&args) {
                Ok(x) => x,
                Err(m) => return fail(m, 2),
            };
            match run_oracle_check(&config, base_dir.as_deref()) {
                Ok(outcome) => {
                    let dir = out_dir(&args, &config);
                    let path = match write_file(&dir, "oracle.json", &outcome.json) {
                        Ok(p) => p,
                        Err(m) => return fail(m, 3),
                    };
                    println!(
                        "oracle agreement: {:?} | report: {}",
                        outcome.agreement,
                        path.display()
                    );
                    ExitCode::from(
                        agreement_exit_code(outcome.agreement, outcome.stabilizable) as u8
                    )
                }
                Err(e) => run_error(&e),
            }
        }
        Command::Validate { config } => {
            let text = match fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return fail(format!("cannot read '{}': {e}", config.display()), 2),
            };
            match parse_config(&text) {
                Ok(_) => {
                    println!("configuration valid");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(format!("configuration error:\n{e}"), 2),
            }
        }
    }
}
