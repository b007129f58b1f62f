use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use kfp_lab::run::{EXIT_CONFIG, EXIT_IO};
use kfp_lab::{parse_config, run, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Solve,
    Verify,
    Study,
    Classify,
    Kernel,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Verify => Command::Verify,
            Cmd::Study => Command::Study,
            Cmd::Classify => Command::Classify,
            Cmd::Kernel => Command::Kernel,
        }
    }
}

/// Numerical laboratory for the nonlinear Kolmogorov-Fokker-Planck equation.
#[derive(Debug, Parser)]
#[command(name = "kfp-lab", version)]
struct Cli {
    command: Cmd,
    /// Run configuration (`key = value` lines with `[section]` headers).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("kfp-lab: {msg}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_IO, format!("cannot read {}: {e}", cli.config.display())),
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let command = Command::from(cli.command);
    if let Some(c) = cfg.command {
        if c != command {
            return fail(EXIT_CONFIG, format!("config says command = {c}, command line says {command}"));
        }
    }
    cfg.command = Some(command);
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.unwrap_or_else(|| cfg.out.clone());
    match run(&cfg, &out) {
        Ok(summary) => {
            for n in &summary.notes {
                eprintln!("{n}");
            }
            for f in &summary.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.exit_code(), e),
    }
}
