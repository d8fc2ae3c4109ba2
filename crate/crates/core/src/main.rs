use clap::{Parser, Subcommand};
use nssar::app::{run_command, Command};
use nssar::config::{apply_override, apply_text, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Noise-shaping SAR ADC simulator and design explorer.
#[derive(Parser)]
#[command(name = "nssar", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Configuration file of `section.key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Extra `key=value` overrides, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Convert a test signal and report spectrum and metrics.
    Simulate,
    /// Write analytic precision-vs-OSR sweeps and the optimiser ranking.
    Sweep,
    /// Run background calibration and write the trim table.
    Calibrate,
    /// Analyse an existing code stream (`analysis.input`).
    Analyze,
    /// Repeat `simulate` over consecutive seeds.
    Montecarlo,
}

fn load(cli: &Cli) -> nssar::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| nssar::Error::Io(format!("{}: {e}", path.display())))?;
        apply_text(&mut cfg, &text)?;
    }
    for kv in &cli.set {
        apply_override(&mut cfg, kv)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.cmd {
        Cmd::Simulate => Command::Simulate,
        Cmd::Sweep => Command::Sweep,
        Cmd::Calibrate => Command::Calibrate,
        Cmd::Analyze => Command::Analyze,
        Cmd::Montecarlo => Command::MonteCarlo,
    };
    match load(&cli).and_then(|cfg| run_command(cmd, &cfg)) {
        Ok(report) => {
            println!("{}", report.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nssar {}: {e}", cmd.name());
            ExitCode::FAILURE
        }
    }
}
