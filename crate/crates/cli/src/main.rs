use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hitmat::campaign::{run_campaign, summarize, CampaignConfig};
use hitmat::lofford::FormSpec;
use hitmat::matrix::{deficiency_from_parts, rank_exact, ZeroOneMatrix};

#[derive(Parser)]
#[command(name = "hitmat", version, about = "Hitting-time experiments for random 0-1 matrix processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign described by a JSON config.
    Run {
        config: PathBuf,
        /// Worker threads (default: config, then HITMAT_WORKERS, then all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the per-trial CSV (the summary goes next to it).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the summary of a campaign CSV.
    Summarize {
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact rank, z and deficiency of a matrix file (first line n, then n
    /// lines of n characters 0/1).
    Rank {
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest atom of a linear, bilinear or quadratic Bernoulli form.
    Lofford {
        form: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("json serializes") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run {
            config,
            workers,
            seed,
            out,
        } => {
            let mut cfg = CampaignConfig::from_json(&read(&config)?).map_err(|e| e.to_string())?;
            if let Some(w) = workers {
                cfg.workers = Some(w);
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(o) = out {
                cfg.output_path = Some(o);
            }
            let result = run_campaign(&cfg).map_err(|e| e.to_string())?;
            if let Some(p) = &result.csv_path {
                eprintln!("wrote {}", p.display());
            }
            if let Some(p) = &result.summary_path {
                eprintln!("wrote {}", p.display());
            }
            eprintln!("finished in {} ms", result.elapsed_ms);
            emit(&serde_json::to_value(&result.summary).expect("summary serializes"), None)
        }
        Command::Summarize { results, out } => {
            let summary = summarize(&results).map_err(|e| e.to_string())?;
            emit(&serde_json::to_value(&summary).expect("summary serializes"), out.as_deref())
        }
        Command::Rank { matrix, out } => {
            let m = ZeroOneMatrix::parse_text(&read(&matrix)?).map_err(|e| e.to_string())?;
            let report = rank_exact(&m);
            let z = m.z_value();
            let y = deficiency_from_parts(m.n(), report.rank, z).map_err(|e| e.to_string())?;
            let value = serde_json::json!({
                "n": m.n(),
                "rank": report.rank,
                "z": z,
                "deficiency": y,
                "zero_rows": m.zero_rows().iter().map(|i| i + 1).collect::<Vec<_>>(),
                "zero_cols": m.zero_cols().iter().map(|j| j + 1).collect::<Vec<_>>(),
                "certified": report.certified,
                "primes_used": report.primes_used,
                "oracle_checked": report.oracle_checked,
            });
            emit(&value, out.as_deref())
        }
        Command::Lofford { form, out } => {
            let spec: FormSpec = serde_json::from_str(&read(&form)?)
                .map_err(|e| format!("{}: {e}", form.display()))?;
            let report = spec.evaluate().map_err(|e| e.to_string())?;
            emit(&report.to_json(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
