//! Command-line runner for the model programs: single jobs from flags or a
//! job file, or the built-in fixture corpus.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use dpmodels_cli::{builtin_fixtures, run_job, JobSpec};

#[derive(Parser, Debug)]
#[command(
    name = "dpmodels",
    about = "Model-improvement programs for Del Pezzo surfaces over a discrete valuation ring"
)]
struct Cli {
    /// Ambient space: p3, wp2111, or wp3211
    #[arg(long)]
    ambient: Option<String>,

    /// Residue field: q or fp:<prime>
    #[arg(long, default_value = "q")]
    field: String,

    /// Mode: cubic, dp2, classify, or rigidity
    #[arg(long)]
    mode: Option<String>,

    /// The defining equation (variables of the ambient, plus t)
    #[arg(long)]
    equation: Option<String>,

    /// Read the job from a JSON file instead of flags
    #[arg(long)]
    job: Option<PathBuf>,

    /// Step cap for the programs
    #[arg(long, default_value_t = 25)]
    max_steps: usize,

    /// Seed for every randomized subroutine
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// t-adic truncation order for normal forms
    #[arg(long, default_value_t = 12)]
    truncation: u32,

    /// Re-verify the trace after a program run
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    verify: bool,

    /// Hyperplane sections per point classification
    #[arg(long, default_value_t = 5)]
    samples: usize,

    /// Members sampled by a rigidity sweep
    #[arg(long, default_value_t = 100)]
    sweep_count: usize,

    /// Blow-up cap for germ resolution
    #[arg(long, default_value_t = 12)]
    max_blowups: usize,

    /// Write the JSON report to this path (atomically)
    #[arg(long)]
    trace_out: Option<PathBuf>,

    /// Run the built-in fixture corpus
    #[arg(long, default_value_t = false)]
    fixtures: bool,
}

fn write_atomic(path: &PathBuf, data: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(data.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    if cli.fixtures {
        let mut worst = 0i32;
        for (name, text) in builtin_fixtures() {
            let spec: JobSpec =
                serde_json::from_str(text).with_context(|| format!("fixture {name}"))?;
            let (report, code) = run_job(&spec);
            println!(
                "{name}: {} (exit {code})",
                report["outcome"].as_str().unwrap_or("?")
            );
            worst = worst.max(code);
        }
        return Ok(ExitCode::from(worst as u8));
    }
    let spec = if let Some(path) = &cli.job {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut spec: JobSpec = serde_json::from_str(&text).context("parsing job file")?;
        // the job file is authoritative; --verify false still disables replay
        spec.verify = cli.verify && spec.verify;
        spec
    } else {
        let (Some(ambient), Some(mode), Some(equation)) =
            (cli.ambient.clone(), cli.mode.clone(), cli.equation.clone())
        else {
            bail!("provide --job FILE or all of --ambient, --mode, --equation");
        };
        JobSpec {
            ambient,
            equation,
            field: cli.field.clone(),
            mode,
            cap: cli.max_steps,
            seed: cli.seed,
            truncation: cli.truncation,
            verify: cli.verify,
            samples: cli.samples,
            sweep_count: cli.sweep_count,
            max_blowups: cli.max_blowups,
        }
    };
    let (report, code) = run_job(&spec);
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(path) = &cli.trace_out {
        write_atomic(path, &text)?;
    }
    Ok(ExitCode::from(code as u8))
}
