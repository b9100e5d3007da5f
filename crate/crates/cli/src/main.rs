use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msrcode::mds::DEFAULT_MAX_SUBSETS;
use msrcode::CodeParams;
use msrcode_cli::{self as cli, CliError};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "msr", version, about = "Minimum-storage regenerating codes with flexible helper count")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a certified coupling coefficient and write a code spec.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        /// Starting field width in bits (8 or 16).
        #[arg(long, default_value_t = 8)]
        field: u8,
        /// Starting point of the coupling coefficient search.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_MAX_SUBSETS)]
        max_subsets: u128,
        /// Spec output path; stdout only when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a file into n shard files.
    Encode {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Shard directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the original file from any k shards present.
    Decode {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        shards: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate one shard from d helper shards.
    Repair {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        shards: PathBuf,
        #[arg(long)]
        failed: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        helpers: Vec<usize>,
        /// Output path; defaults to the failed node's name in the shard directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively certify a spec as MDS.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_SUBSETS)]
        max_subsets: u128,
    },
    /// Random failure and repair trials on in-memory codewords.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print derived parameters.
    Params {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
    },
}

fn emit<T: Serialize>(value: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value).map_err(msrcode::Error::from)?;
    println!("{json}");
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen {
            n,
            k,
            d,
            field,
            seed,
            max_subsets,
            out,
        } => {
            let (spec, summary) = cli::gen(n, k, d, field, seed, max_subsets)?;
            if let Some(path) = &out {
                write_file(path, &spec.to_json()?)?;
            }
            emit(&serde_json::json!({ "spec": spec, "summary": summary }))?;
            eprintln!(
                "({n},{k},{d}): rho = {:#x} in GF(2^{}) after {} attempts, {} subsets certified",
                summary.rho, summary.field_width, summary.rho_attempts, summary.report.subsets_checked
            );
            if summary.escalated {
                eprintln!("field escalated through widths {:?}", summary.widths_tried);
            }
        }
        Command::Encode { spec, input, out } => {
            let (_, pc) = cli::load_spec(&spec)?;
            let summary = cli::encode_file(&pc, &input, &out)?;
            emit(&summary)?;
            eprintln!(
                "encoded {} bytes into {} shards of {} stripes",
                summary.input_bytes,
                summary.shards.len(),
                summary.stripes
            );
        }
        Command::Decode { spec, shards, out } => {
            let (_, pc) = cli::load_spec(&spec)?;
            let summary = cli::decode_dir(&pc, &shards, &out)?;
            emit(&summary)?;
            eprintln!(
                "decoded {} bytes from shards {:?}",
                summary.output_bytes, summary.shards_used
            );
        }
        Command::Repair {
            spec,
            shards,
            failed,
            helpers,
            out,
        } => {
            let (_, pc) = cli::load_spec(&spec)?;
            let summary = cli::repair_shard(&pc, failed, &helpers, &shards, out.as_deref())?;
            emit(&summary)?;
            eprintln!(
                "repaired node {failed} from {:?}: {} bytes downloaded vs {} naive (ratio {:.3})",
                summary.report.helpers,
                summary.report.bytes_downloaded,
                summary.report.naive_bytes,
                summary.report.ratio
            );
        }
        Command::Verify { spec, max_subsets } => {
            let (_, pc) = cli::load_spec(&spec)?;
            let report = cli::verify(&pc, max_subsets)?;
            emit(&report)?;
            if !report.is_mds {
                return Err(CliError::Verification(format!(
                    "not MDS: subset {:?} loses rank {}",
                    report.first_failure.unwrap_or_default(),
                    report.rank_deficiency.unwrap_or_default()
                )));
            }
            eprintln!("MDS: all {} subsets full rank", report.subsets_checked);
        }
        Command::Simulate { spec, trials, seed } => {
            let (_, pc) = cli::load_spec(&spec)?;
            let summary = cli::simulate(&pc, trials, seed)?;
            emit(&summary)?;
            eprintln!(
                "{}/{} exact repairs, {:.1} symbols per repair (naive {}), ratio {:.3}",
                summary.exact_repairs,
                summary.trials,
                summary.mean_symbols_downloaded,
                summary.naive_symbols_per_repair,
                summary.savings_ratio
            );
            if summary.exact_repairs != summary.trials {
                return Err(CliError::Verification("some repairs were not exact".into()));
            }
        }
        Command::Params { n, k, d } => {
            let p = CodeParams::derive(n, k, d)?;
            emit(&p)?;
            eprintln!(
                "q = {}, m = {}, alpha = {}, beta = {}, repair {} of {} symbols",
                p.q,
                p.m,
                p.alpha,
                p.beta,
                p.repair_bandwidth(),
                p.naive_bandwidth()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
