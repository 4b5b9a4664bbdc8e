use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phdnet_cli::commands;
use phdnet_cli::config::{load_config_file, RawOptions, RunConfig};

#[derive(Parser)]
#[command(
    name = "phdnet",
    version,
    about = "Doctoral hiring exchange networks: build, score, regress, validate",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Optional key = value config file; flags win on conflict.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Hire records CSV (header row required).
    #[arg(long)]
    records: Option<String>,

    /// Institution registry CSV.
    #[arg(long)]
    registry: Option<String>,

    /// Output directory (default: out).
    #[arg(long)]
    out: Option<String>,

    /// Comma-separated year cut points, e.g. 2000,2007,2014,2021.
    #[arg(long)]
    boundaries: Option<String>,

    /// Slice mode for network statistics: windowed or cumulative.
    #[arg(long)]
    mode: Option<String>,

    /// Slice mode for the centrality series (default: cumulative).
    #[arg(long = "ec-mode")]
    ec_mode: Option<String>,

    /// Teleport weight in [0, 1) mixed into the centrality iteration.
    #[arg(long)]
    damping: Option<String>,

    /// Convergence tolerance for the centrality iteration.
    #[arg(long)]
    tol: Option<String>,

    /// Iteration cap for the centrality computation.
    #[arg(long = "max-iter")]
    max_iter: Option<String>,

    /// Admission rule: strict (employment after graduation) or inclusive.
    #[arg(long = "year-rule")]
    year_rule: Option<String>,

    /// File with one node id per line: the regression sample.
    #[arg(long)]
    subset: Option<String>,

    /// Reference year for the recent-hires ratio (default: newest record).
    #[arg(long = "reference-year")]
    reference_year: Option<String>,

    /// Seed for the synthetic market generator.
    #[arg(long)]
    seed: Option<String>,

    /// Output format: csv, json, dot or graphml.
    #[arg(long)]
    format: Option<String>,

    /// Field delimiter for the records file (single byte, default ,).
    #[arg(long)]
    delimiter: Option<String>,

    /// Moving-average window for the trend statistic (default 2).
    #[arg(long = "ma-window")]
    ma_window: Option<String>,

    /// External evaluation table for validate.
    #[arg(long)]
    validation: Option<String>,

    /// Comma-separated pairings ec_<year>:<column> for validate.
    #[arg(long)]
    pairings: Option<String>,

    /// Tier sizes for synth, top first, e.g. 5,10,20,40.
    #[arg(long)]
    tiers: Option<String>,

    /// Hires per institution per year, one rate per tier (or one for all).
    #[arg(long = "hire-rates")]
    hire_rates: Option<String>,

    /// Probability that a synthetic hire respects the hierarchy.
    #[arg(long)]
    bias: Option<String>,

    /// Self-hire probability for synth.
    #[arg(long = "self-loop")]
    self_loop: Option<String>,

    /// Overseas-inflow probability for synth.
    #[arg(long)]
    overseas: Option<String>,

    /// Year range for synth as start:end.
    #[arg(long)]
    years: Option<String>,
}

impl CommonArgs {
    fn into_raw(self) -> RawOptions {
        RawOptions {
            records: self.records,
            registry: self.registry,
            out: self.out,
            boundaries: self.boundaries,
            mode: self.mode,
            ec_mode: self.ec_mode,
            damping: self.damping,
            tol: self.tol,
            max_iter: self.max_iter,
            year_rule: self.year_rule,
            subset: self.subset,
            reference_year: self.reference_year,
            seed: self.seed,
            format: self.format,
            delimiter: self.delimiter,
            ma_window: self.ma_window,
            validation: self.validation,
            pairings: self.pairings,
            tiers: self.tiers,
            hire_rates: self.hire_rates,
            bias: self.bias,
            self_loop: self.self_loop,
            overseas: self.overseas,
            years: self.years,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate, canonicalize and deduplicate a records file.
    Ingest(CommonArgs),
    /// Build slices, network statistics, centrality series and exports.
    Analyze(CommonArgs),
    /// Fit the reputation-level and reputation-trend regressions.
    Regress(CommonArgs),
    /// Correlate centrality scores with an external evaluation table.
    Validate(CommonArgs),
    /// Generate a synthetic hierarchy market.
    Synth(CommonArgs),
    /// Export the full network as an edge list, DOT or GraphML.
    Export(CommonArgs),
}

fn resolve(args: CommonArgs) -> Result<RunConfig, phdnet::Error> {
    let file_options = match &args.config {
        Some(path) => load_config_file(path)?,
        None => RawOptions::default(),
    };
    args.into_raw().over(file_options).resolve()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Keep clap's rendered message but force the documented usage code.
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };

    let outcome = match cli.command {
        Command::Ingest(args) => resolve(args).and_then(|c| commands::cmd_ingest(&c)),
        Command::Analyze(args) => resolve(args).and_then(|c| commands::cmd_analyze(&c)),
        Command::Regress(args) => resolve(args).and_then(|c| commands::cmd_regress(&c)),
        Command::Validate(args) => resolve(args).and_then(|c| commands::cmd_validate(&c)),
        Command::Synth(args) => resolve(args).and_then(|c| commands::cmd_synth(&c)),
        Command::Export(args) => resolve(args).and_then(|c| commands::cmd_export(&c)),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(commands::exit_code(&error) as u8)
        }
    }
}
