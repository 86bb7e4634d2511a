use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use subres_cli::config::PrecisionMode;
use subres_cli::{run, Overrides};

#[derive(Parser)]
#[command(name = "subres", version, about = "Subresonant algebra and cocycle experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
    Rational,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML or JSON config.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        precision: Option<PrecisionArg>,
        /// Print timings and written paths to stderr.
        #[arg(long)]
        verbose: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Command::Run { config, out, seed, precision, verbose } = cli.command;
    let precision = precision.map(|p| match p {
        PrecisionArg::Double => PrecisionMode::Double,
        PrecisionArg::Extended => PrecisionMode::Extended,
        PrecisionArg::Rational => PrecisionMode::Rational,
    });
    match run(&config, &out, &Overrides { seed, precision }, verbose) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
