use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use advest::check::run_check;
use advest::presets::{run_preset, Preset};
use advest::runner::{run_custom, write_run_csv};
use advest::{parse_quad_order, RunConfig, QUAD_ORDER_ENV};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "advest", version, about = "A posteriori error estimates for 1D linear advection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce one of the built-in tables.
    Preset {
        /// table1 | table2 | table3 | table4
        name: Preset,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a custom configuration; one CSV row per (mesh, beta) pair.
    Run {
        /// `key = value` file; command-line options override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// pg1 | pg2 | dg
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        kprime: Option<String>,
        /// Comma-separated element counts.
        #[arg(long)]
        elements: Option<String>,
        /// Comma-separated velocities.
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        /// arctan | poly:<c0,c1,...> | table81
        #[arg(long)]
        source: Option<String>,
        /// Ratio of neighbouring element sizes (1 = uniform).
        #[arg(long)]
        grading: Option<String>,
        /// Constant in the oscillation indicator.
        #[arg(long)]
        poincare: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized check of the guaranteed bound.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Per-case CSV report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<bool> {
    let quad_order = parse_quad_order(std::env::var(QUAD_ORDER_ENV).ok().as_deref())?;
    match cli.command {
        Command::Preset { name, out } => {
            let output = run_preset(name, quad_order)?;
            let mut w = sink(out.as_deref())?;
            output.write_csv(&mut w)?;
            w.flush()?;
            let ok = !output.results().any(|r| r.bound_violated());
            Ok(ok)
        }
        Command::Run {
            config,
            method,
            k,
            kprime,
            elements,
            beta,
            source,
            grading,
            poincare,
            out,
        } => {
            let mut cfg = RunConfig::default();
            if let Some(path) = &config {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                cfg.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
            }
            let overrides = [
                ("method", method),
                ("k", k),
                ("kprime", kprime),
                ("elements", elements),
                ("beta", beta),
                ("source", source),
                ("grading", grading),
                ("poincare", poincare),
            ];
            for (field, value) in overrides {
                if let Some(v) = value {
                    cfg.set(field, &v)?;
                }
            }
            if let Some(out) = out {
                cfg.out = Some(out);
            }
            if quad_order.is_some() {
                cfg.quad_order = quad_order;
            }
            cfg.validate()?;
            if let Some(preset) = cfg.preset {
                let output = run_preset(preset, cfg.quad_order)?;
                let mut w = sink(cfg.out.as_deref())?;
                output.write_csv(&mut w)?;
                w.flush()?;
                let ok = !output.results().any(|r| r.bound_violated());
                return Ok(ok);
            }
            let rows = run_custom(&cfg)?;
            let mut w = sink(cfg.out.as_deref())?;
            write_run_csv(&rows, &mut w)?;
            w.flush()?;
            Ok(!rows.iter().any(|r| r.bound_violated()))
        }
        Command::Check { seed, cases, out } => {
            let summary = run_check(seed, cases)?;
            if let Some(path) = &out {
                let mut w = sink(Some(path))?;
                summary.write_csv(&mut w)?;
                w.flush()?;
            }
            let violations = summary.violations();
            let structure = summary.structure_failures();
            println!(
                "seed {seed}: {cases} cases, {} hat-orthogonal, {} bound violations, {} structure failures",
                summary.orthogonal_cases(),
                violations.len(),
                structure.len()
            );
            for o in violations.iter().chain(&structure) {
                println!("  case {}: {}", o.case.index, o.result.cell);
            }
            Ok(summary.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("advest: guaranteed bound violated");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("advest: {e:#}");
            ExitCode::FAILURE
        }
    }
}
