use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smvar::commands::{self, CommandError};
use smvar::config::RunConfig;
use smvar::report;

/// Radial variational solver for the sublinear Schrödinger–Maxwell system.
#[derive(Parser)]
#[command(name = "smvar", version, about)]
struct Cli {
    /// Path to the TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory override (defaults to the config's output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the sweep command (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the model constants, hypothesis certificates and the
    /// non-existence threshold as JSON.
    Constants,
    /// Multi-start solve at the configured lambda; writes solutions.json and
    /// per-solution profile CSVs.
    Solve,
    /// Multi-start solve over the configured lambda list; writes sweep.csv.
    Sweep,
    /// Run the cross-module verification battery; writes verify.json.
    Verify,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CommandError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.display().to_string();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, CommandError> {
    let cfg = load_config(cli)?;
    let out_dir = PathBuf::from(&cfg.output.dir);
    match cli.command {
        Command::Constants => {
            let rep = commands::cmd_constants(&cfg)?;
            report::write_json(std::io::stdout().lock(), &rep)
                .map_err(|e| CommandError::Io(e.to_string()))?;
            Ok(0)
        }
        Command::Solve => {
            let outcome = commands::cmd_solve(&cfg, &out_dir)?;
            report::write_json(std::io::stdout().lock(), &outcome.report)
                .map_err(|e| CommandError::Io(e.to_string()))?;
            for path in &outcome.files {
                eprintln!("wrote {}", path.display());
            }
            Ok(outcome.exit_code)
        }
        Command::Sweep => {
            let outcome = commands::cmd_sweep(&cfg, &out_dir, cli.jobs)?;
            eprintln!(
                "wrote {} ({} rows)",
                outcome.csv_path.display(),
                outcome.records.len()
            );
            Ok(outcome.exit_code)
        }
        Command::Verify => {
            let outcome = commands::cmd_verify(&cfg, &out_dir)?;
            for check in &outcome.report.checks {
                println!(
                    "{} {}: measured {:e}, tolerance {:e}",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name,
                    check.measured,
                    check.tolerance
                );
            }
            eprintln!("wrote {}", outcome.json_path.display());
            Ok(outcome.exit_code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
