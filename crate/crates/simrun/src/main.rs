use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use simrun::{
    acceptance_manifest, execute_manifest, load_manifest, ManifestError, ReportFormat, RunManifest,
};

#[derive(Parser)]
#[command(name = "simrun", version, about = "Run double-slit protocol manifests")]
struct Cli {
    /// Print per-run status lines.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a JSON manifest.
    Run {
        /// Path to a JSON manifest.
        manifest: PathBuf,
        /// Overrides the seed of every run.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, replacing the manifest's.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of json,csv,ascii.
        #[arg(long, value_delimiter = ',')]
        formats: Option<Vec<ReportFormat>>,
    },
    /// Execute the built-in acceptance manifest.
    Acceptance {
        #[arg(long, default_value_t = simrun::DEFAULT_SEED)]
        seed: u64,
        /// Output directory, replacing the manifest's.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        formats: Option<Vec<ReportFormat>>,
    },
}

const CONFIG_ERROR: u8 = 2;

fn build(cli_cmd: Command) -> Result<RunManifest, ManifestError> {
    let (mut m, seed, out, formats) = match cli_cmd {
        Command::Run {
            manifest,
            seed,
            out,
            formats,
        } => (load_manifest(&manifest)?, seed, out, formats),
        Command::Acceptance { seed, out, formats } => {
            (acceptance_manifest(seed), None, out, formats)
        }
    };
    if seed.is_some() {
        m.seed = seed;
    }
    if let Some(out) = out {
        m.output_dir = out;
    }
    if let Some(f) = formats {
        m.formats = f;
    }
    m.validate()?;
    Ok(m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let manifest = match build(cli.command) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("simrun: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let report = match execute_manifest(&manifest) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("simrun: {e}");
            return ExitCode::from(1);
        }
    };
    for rec in &report.records {
        match (&rec.result, &rec.error) {
            (_, Some(err)) => eprintln!("{}: FAILED: {err}", rec.name),
            (Some(r), None) if cli.verbose => {
                let verdicts: Vec<String> = r
                    .subsets
                    .iter()
                    .filter_map(|(k, s)| s.classification.map(|c| format!("{k}={:?}", c.verdict)))
                    .collect();
                println!("{}: {:?} {}", rec.name, r.outcome, verdicts.join(" "));
            }
            _ => {}
        }
    }
    if cli.verbose {
        println!("reports written to {}", report.output_dir.display());
    }
    ExitCode::from(report.exit_code() as u8)
}
