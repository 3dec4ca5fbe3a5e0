use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use sargd_cli::{config::ExperimentConfig, corpus, experiment};

#[derive(Parser)]
#[command(name = "sargd", about = "Reality-guided diffusion experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the image x scale x variant grid from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Step-count sweep (one rgr_sag run per T per image).
    SweepSteps {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate the deterministic synthetic corpus.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = experiment::run_experiment(&cfg)?;
            println!(
                "wrote {} records to {}",
                out.records.len(),
                out.results_csv.display()
            );
            println!("summary: {}", out.summary_md.display());
        }
        Command::SweepSteps { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (path, rows) = experiment::run_step_sweep(&cfg)?;
            for (t, p) in &rows {
                println!("T={t}: mean PSNR-Y {p:.3} dB");
            }
            println!("wrote {}", path.display());
        }
        Command::GenCorpus { out, n, seed } => {
            let paths = corpus::gen_corpus(&out, n, seed)?;
            println!("wrote {} images under {}", paths.len(), out.display());
        }
    }
    Ok(())
}
