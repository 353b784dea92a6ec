use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use decolab::runner::{
    emit, run_decoherence_experiment, run_separability_search, to_csv, to_json, ExperimentConfig,
    OutputFormat,
};
use decolab::Error;

const SEED_ENV: &str = "DECOLAB_SEED";

#[derive(Parser)]
#[command(
    name = "decolab",
    version,
    about = "Decoherence of pure-mixed entangled system-apparatus states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the system-apparatus-environment state and write the diagnostics time series.
    Run(Common),
    /// Search for the separable state nearest to the initial state and print a JSON report.
    Search(Common),
    /// Check the config and exit.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed and $DECOLAB_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; defaults to the config's output.path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = Some(s);
    } else if cfg.seed.is_none() {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            let s = raw.trim().parse().map_err(|_| Error::Config {
                key: SEED_ENV.into(),
                message: format!("cannot parse `{raw}` as an unsigned integer"),
            })?;
            cfg.seed = Some(s);
        }
    }
    Ok(cfg)
}

fn write_out(path: Option<&Path>, body: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = load(&config, None)?;
            cfg.setup()?;
            eprintln!("{}: ok", config.display());
            Ok(())
        }
        Command::Run(args) => {
            let cfg = load(&args.config, args.seed)?;
            let format = args.format.map(Into::into).unwrap_or(cfg.output_format);
            let out = args.out.or_else(|| cfg.output_path.clone());
            let record = run_decoherence_experiment(&cfg)?;
            match out {
                Some(path) => emit(&record, format, &path),
                None => write_out(
                    None,
                    &match format {
                        OutputFormat::Csv => to_csv(&record),
                        OutputFormat::Json => to_json(&record),
                    },
                ),
            }
        }
        Command::Search(args) => {
            let cfg = load(&args.config, args.seed)?;
            if matches!(args.format, Some(Format::Csv)) {
                return Err(Error::Config {
                    key: "--format".into(),
                    message: "search reports are JSON only".into(),
                });
            }
            let report = run_separability_search(&cfg)?;
            let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
            body.push('\n');
            write_out(args.out.as_deref(), &body)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                2
            } else if e.is_io() {
                1
            } else {
                3
            })
        }
    }
}
