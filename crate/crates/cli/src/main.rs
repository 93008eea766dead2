use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use recoverlib::StreamRng;
use recoverlib_cli::compute::{compute, ComputeOptions};
use recoverlib_cli::make::{make_state, MakeParams};
use recoverlib_cli::state_io::{load_state, save_state, state_to_json};
use recoverlib_cli::sweep::{run_sweep, SweepConfig};
use recoverlib_cli::{exit, exit_code_for};

#[derive(Parser)]
#[command(name = "recoverlib", version, about = "Recoverability quantities for finite-dimensional quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad dimension `{x}`: {e}"))).collect()
}

#[derive(Subcommand)]
enum Command {
    /// Write a named state to a JSON state file (stdout without --out).
    MakeState {
        /// bell, max-entangled, classical-copy, ghz, werner, private, random, cq, markov-chain
        kind: String,
        /// Local dimension (number of parties for ghz).
        #[arg(long)]
        d: Option<usize>,
        /// Werner mixing weight.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_parser = parse_dims)]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        rank: Option<usize>,
        /// Private-state twisting: none, swap or random.
        #[arg(long)]
        twisting: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one quantity on a state file and print a JSON record.
    Compute {
        /// for, ifr, cqmi, renyi-cqmi, gse, gse-pure, dfm, dfm-pure, discord, mfor
        command: String,
        state: PathBuf,
        #[arg(long, default_value = "A")]
        a: String,
        #[arg(long, default_value = "B")]
        b: String,
        /// Conditioning labels; pass an empty string for none.
        #[arg(long, default_value = "C")]
        c: String,
        /// Parties for mfor, e.g. `A1;A2,A3`.
        #[arg(long)]
        parts: Option<String>,
        #[arg(long)]
        backend: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        env_dim: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an inequality on random instances and write JSON lines.
    Sweep {
        /// fr-inequality, duality, weak-chain, renyi-mono, ssa, petz-dominance,
        /// classical-cond, halpha-cq, dfm-bracket, approx-faithful
        tag: String,
        #[arg(long, value_parser = parse_dims)]
        dims: Option<Vec<usize>>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::MakeState { kind, d, p, dims, rank, twisting, seed, out } => {
            let params = MakeParams { d, p, dims, rank, twisting };
            let state = make_state(&kind, &params, &mut StreamRng::new(seed, 0))?;
            match out {
                Some(path) => save_state(&state, &path)?,
                None => emit(&state_to_json(&state), None)?,
            }
            Ok(exit::OK)
        }
        Command::Compute { command, state, a, b, c, parts, backend, tol, seed, env_dim, restarts, alpha, out } => {
            let loaded = load_state(&state)?;
            for w in &loaded.warnings {
                eprintln!("warning: {w}");
            }
            let opts = ComputeOptions {
                a: list(&a),
                b: list(&b),
                c: list(&c),
                parts: parts.map(|p| p.split(';').map(list).collect()).unwrap_or_default(),
                backend,
                tol,
                seed,
                env_dim,
                restarts,
                alpha,
            };
            let record = compute(&command, &loaded.state, &opts, &loaded.warnings)?;
            emit(&format!("{record}\n"), out.as_ref())?;
            Ok(exit::OK)
        }
        Command::Sweep { tag, dims, samples, seed, tol, out } => {
            let report = run_sweep(&SweepConfig { tag, dims, samples, seed, tol, threads: None })?;
            emit(&report.to_json_lines(), out.as_ref())?;
            let a = &report.aggregate;
            eprintln!(
                "{}: {} samples, {} violations, {} failures, min margin {:?}",
                a.tag, a.samples, a.violations, a.failures, a.min_margin
            );
            Ok(if a.violations > 0 { exit::VIOLATION } else { exit::OK })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; 2 is reserved for non-convergence
            return ExitCode::from(if e.use_stderr() { exit::INPUT as u8 } else { exit::OK as u8 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
