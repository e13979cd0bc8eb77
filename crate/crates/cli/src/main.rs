//! Runs a configured sweep, writes the CSV and manifest, optionally prints
//! the bound-check table, and encodes the outcome in the exit status:
//! 0 = ran and every enforced inequality held, 1 = unusable input,
//! 2 = an enforced inequality failed beyond its tolerance.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use loopid::experiment::{evaluate_bound_checks, run_experiment};
use loopid_cli::config::load_config;
use loopid_cli::output::{emit_csv, emit_manifest, manifest_path, ManifestRow, RunManifest};
use loopid_cli::summary::{render_budget_line, render_row_summary};
use loopid_cli::{exit_code_for_checks, CliError};

#[derive(Parser, Debug)]
#[command(
    name = "loopid",
    version,
    about = "Closed-loop identification sweeps with capacity bound checks"
)]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output CSV path; the manifest lands next to it as
    /// `<out>.manifest.json`.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,

    /// Overrides the seed from the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// Print the bound-check table.
    #[arg(long)]
    summary: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let mut config = load_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let rows = pool.install(|| run_experiment(&config))?;

    emit_csv(&rows, &cli.out)?;

    let checks: Vec<_> = rows
        .iter()
        .map(|row| evaluate_bound_checks(&row.stats, config.theta_sampled()))
        .collect();

    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.seed,
        timestamp: chrono::Utc::now().to_rfc3339(),
        config: config.clone(),
        rows: rows
            .iter()
            .zip(&checks)
            .map(|(r, c)| ManifestRow::from_row(r, c))
            .collect(),
    };
    emit_manifest(&manifest, &cli.out)?;

    if cli.summary {
        for (row, row_checks) in rows.iter().zip(&checks) {
            print!("{}", render_row_summary(row, row_checks));
        }
        let costs: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.grid_value, r.stats.mean_cost))
            .collect();
        if let Some(line) = render_budget_line(&config, &costs) {
            print!("{line}");
        }
    }

    // Violated inequalities always surface, with both sides printed.
    for (row, row_checks) in rows.iter().zip(&checks) {
        for c in row_checks {
            if !c.pass && c.enforced {
                eprintln!(
                    "bound check failed at grid value {:+.4}: {}: lhs {:.17e} > rhs {:.17e} \
                     + slack {:?} ({})",
                    row.grid_value, c.name, c.lhs, c.rhs, c.slack, c.detail
                );
            }
        }
    }

    let code = exit_code_for_checks(&checks);
    if code == 0 {
        let plural = if rows.len() == 1 { "row" } else { "rows" };
        eprintln!(
            "wrote {} and {} ({} {plural}); all enforced bound checks passed",
            cli.out.display(),
            manifest_path(&cli.out).display(),
            rows.len()
        );
    }
    Ok(code)
}
