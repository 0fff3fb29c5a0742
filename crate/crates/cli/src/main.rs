//! platefind — find a license plate across recorded frame sequences.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use platefind_core::error::Error;
use platefind_core::matcher::{query, report};
use platefind_core::pipeline::{process, EnhancerChoice, PipelineConfig};
use platefind_core::plate_format::{normalize, PlateText};
use platefind_core::synth::{gen_corpus, DegradeTier, VideoManifest};

#[derive(Parser)]
#[command(
    name = "platefind",
    about = "Search recorded camera footage for a license plate",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene corpus with ground truth.
    Gen {
        /// Number of distinct plates (one scene per plate and tier).
        #[arg(long)]
        plates: usize,
        /// Corpus seed; identical seeds give byte-identical corpora.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Degradation tier: mild or harsh.
        #[arg(long, default_value = "mild")]
        tier: String,
    },
    /// Run the pipeline over videos and append detections to a store.
    Process {
        /// Manifest file(s), one per video; repeatable.
        #[arg(long, required = true)]
        manifest: Vec<PathBuf>,
        /// Detection store (JSONL), created on first use.
        #[arg(long)]
        store: PathBuf,
        /// Write a structured JSONL trace of winning variants.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Skip the enhancement stage.
        #[arg(long)]
        no_enhance: bool,
    },
    /// Search a store for a plate and print matching detections.
    Query {
        /// Target plate; spaces and hyphens are accepted.
        #[arg(long)]
        plate: String,
        #[arg(long)]
        store: PathBuf,
        /// Inclusive mismatch-distance threshold.
        #[arg(long, default_value_t = 2)]
        threshold: usize,
    },
    /// Write the time/location report for a plate as CSV.
    Report {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        plate: String,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        threshold: usize,
    },
}

/// Failures the command loop distinguishes for the exit code.
enum CmdError {
    Usage(String),
    Io(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::IoFailure { .. } | Error::MalformedRecord(_) => CmdError::Io(e.to_string()),
            other => CmdError::Usage(other.to_string()),
        }
    }
}

fn parse_plate(raw: &str) -> Result<PlateText, CmdError> {
    normalize(raw).map_err(|e| CmdError::Usage(format!("invalid plate {raw:?}: {e}")))
}

fn parse_tier(name: &str) -> Result<DegradeTier, CmdError> {
    match name {
        "mild" => Ok(DegradeTier::mild()),
        "harsh" => Ok(DegradeTier::harsh()),
        other => Err(CmdError::Usage(format!(
            "unknown tier {other:?}, expected mild or harsh"
        ))),
    }
}

fn run(command: Command) -> Result<(), CmdError> {
    match command {
        Command::Gen {
            plates,
            seed,
            out,
            tier,
        } => {
            if plates == 0 {
                return Err(CmdError::Usage("--plates must be at least 1".into()));
            }
            let tier = parse_tier(&tier)?;
            let scenes = gen_corpus(plates, seed, &[tier], &out)?;
            println!("wrote {} scenes under {}", scenes.len(), out.display());
            Ok(())
        }
        Command::Process {
            manifest,
            store,
            trace,
            no_enhance,
        } => {
            let cfg = PipelineConfig {
                enhancer: if no_enhance {
                    EnhancerChoice::Bypass
                } else {
                    EnhancerChoice::Builtin
                },
                ..PipelineConfig::default()
            };
            let mut trace_file = match &trace {
                Some(path) => Some(BufWriter::new(
                    File::create(path).map_err(|e| CmdError::Io(format!("{}: {e}", path.display())))?,
                )),
                None => None,
            };
            let mut total = 0usize;
            for path in &manifest {
                let video = VideoManifest::load(path)?;
                let n = process(
                    &video,
                    &cfg,
                    &store,
                    trace_file.as_mut().map(|w| w as &mut dyn Write),
                )?;
                println!("{}: {n} detections", video.video_id);
                total += n;
            }
            println!("{total} detections in {}", store.display());
            Ok(())
        }
        Command::Query {
            plate,
            store,
            threshold,
        } => {
            let target = parse_plate(&plate)?;
            let matches = query(&store, &target, threshold)?;
            println!("{} match(es) for {target}", matches.len());
            print!("{}", report(&target, &matches));
            Ok(())
        }
        Command::Report {
            store,
            plate,
            out,
            threshold,
        } => {
            let target = parse_plate(&plate)?;
            let matches = query(&store, &target, threshold)?;
            let csv = report(&target, &matches);
            std::fs::write(&out, csv).map_err(|e| CmdError::Io(format!("{}: {e}", out.display())))?;
            println!("{} match(es) written to {}", matches.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CmdError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
