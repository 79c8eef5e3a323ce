use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use dilab_cli::commands::{run, summary_lines};
use dilab_cli::config::{Command, ExperimentConfig};
use dilab_cli::CliError;

/// Numerical laboratory for dilations, characteristic functions, unital CP
/// maps and toy-Fock cocycles.
#[derive(Debug, Parser)]
#[command(name = "dilab", version, about)]
struct Args {
    /// One of: charfun, dilate, limit, beurling1, cpcheck, cocycle, thm42.
    command: String,
    /// JSON experiment configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the report (and curves).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the curve tables as CSV.
    #[arg(long)]
    curves: bool,
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let command = Command::parse(&args.command)?;
    let mut cfg: ExperimentConfig = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(conf_cmd) = cfg.command {
        if conf_cmd != command {
            return Err(CliError::invalid(format!(
                "config is for '{}' but '{}' was requested",
                conf_cmd.name(),
                command.name()
            )));
        }
    }
    cfg.command = Some(command);
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }

    let started = Instant::now();
    let report = run(command, &cfg)?;
    let elapsed = started.elapsed();

    std::fs::create_dir_all(&args.out)?;
    let report_name = cfg.outputs.report.as_deref().unwrap_or("report.json");
    let report_path = args.out.join(report_name);
    std::fs::write(&report_path, report.to_json())?;
    if args.curves || cfg.outputs.curves.is_some() {
        let curves_name = cfg.outputs.curves.as_deref().unwrap_or("curves.csv");
        std::fs::write(args.out.join(curves_name), report.curves_csv())?;
    }

    for line in summary_lines(&report) {
        println!("{line}");
    }
    // Timing stays out of the report so identical configs produce identical
    // report bytes.
    eprintln!(
        "dilab {}: wall-clock {:.3} s, report {}",
        command.name(),
        elapsed.as_secs_f64(),
        report_path.display()
    );
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
