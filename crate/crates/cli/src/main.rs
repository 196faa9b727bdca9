//! `cohesum` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cohesum::ingest::InputFormat;
use cohesum::report::{
    self, parse_indicator_list, Direction, OutputFormat, Procedure, ReportError, RunConfig,
    WeightSelection,
};
use cohesum::{IndicatorSpec, UndefinedPolicy};

#[derive(Parser)]
#[command(name = "cohesum", version)]
#[command(about = "Summarize two-class classification indicators across many videos", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct InputArgs {
    /// Per-video records (counts CSV, ROC CSV or JSON)
    #[arg(short, long)]
    input: PathBuf,

    /// counts-csv | roc-csv | json (guessed from the file when omitted)
    #[arg(long)]
    input_format: Option<InputFormat>,

    /// uniform | size | hierarchical | file:<path>
    #[arg(long, default_value = "uniform")]
    weights: WeightSelection,

    /// Comma-separated procedures: ours, legacy
    #[arg(long, default_value = "ours,legacy")]
    procedures: String,

    /// How the legacy mean treats per-video undefined values: error | skip
    #[arg(long, default_value = "skip")]
    undefined_policy: UndefinedPolicy,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize every algorithm with the selected procedures
    Summarize {
        #[command(flatten)]
        input: InputArgs,

        /// Indicator names or set expressions, e.g. "F,PPV,{tp}|{fn,tp}"
        #[arg(long, default_value = "F,PPV,TPR,FPR")]
        indicators: String,

        /// Indicator used for the rank columns
        #[arg(long, default_value = "F")]
        rank_by: String,

        /// Output directory
        #[arg(long)]
        out: PathBuf,

        /// Comma-separated output formats: csv, json, tsv-plot
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Rank algorithms under each procedure and flag discordant ranks
    Rank {
        #[command(flatten)]
        input: Option<InputArgs>,

        /// Precomputed `algorithm,ours,legacy` value table instead of --input
        #[arg(long, conflicts_with = "input")]
        values: Option<PathBuf>,

        /// Ranking indicator
        #[arg(long, default_value = "F")]
        indicator: String,

        /// Write rank.csv here instead of printing to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a point between ROC (fpr,tpr) and PR (recall,precision) spaces
    Convert {
        /// roc-to-pr | pr-to-roc
        direction: Direction,

        /// The point as "x,y"
        point: String,

        /// Prior of the positive class
        #[arg(long)]
        prior: f64,
    },
    /// Count confusion tallies from ground-truth/prediction graymaps
    IngestMasks {
        /// JSON manifest of videos
        #[arg(long)]
        manifest: PathBuf,

        /// Output counts CSV
        #[arg(long)]
        out: PathBuf,

        /// Algorithm name for entries without one
        #[arg(long)]
        algorithm: Option<String>,
    },
}

fn usage(msg: impl Into<String>) -> ReportError {
    ReportError::Config(msg.into())
}

fn parse_list<T: std::str::FromStr<Err = String>>(list: &str) -> Result<Vec<T>, ReportError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<T>().map_err(usage))
        .collect()
}

fn parse_spec(s: &str) -> Result<IndicatorSpec, ReportError> {
    s.parse()
        .map_err(|e: cohesum::IndicatorError| usage(e.to_string()))
}

fn run_config(
    input: InputArgs,
    indicators: &str,
    rank_by: &str,
    out: PathBuf,
    formats: &str,
) -> Result<RunConfig, ReportError> {
    let mut config = RunConfig::new(input.input, out);
    config.input_format = input.input_format;
    config.weights = input.weights;
    config.indicators = parse_indicator_list(indicators).map_err(|e| usage(e.to_string()))?;
    config.procedures = parse_list::<Procedure>(&input.procedures)?;
    config.undefined_policy = input.undefined_policy;
    config.rank_by = parse_spec(rank_by)?;
    config.formats = parse_list::<OutputFormat>(formats)?;
    if config.formats.is_empty() {
        return Err(usage("at least one output format is required"));
    }
    config.validate()?;
    Ok(config)
}

fn run(command: Command) -> Result<(), ReportError> {
    let mut stdout = std::io::stdout().lock();
    let stdout_err = |e| ReportError::Io {
        path: "<stdout>".into(),
        source: e,
    };
    match command {
        Command::Summarize {
            input,
            indicators,
            rank_by,
            out,
            format,
        } => {
            let config = run_config(input, &indicators, &rank_by, out, &format)?;
            let (report, written) = report::cmd_summarize(&config)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            for path in written {
                writeln!(stdout, "{}", path.display()).map_err(stdout_err)?;
            }
        }
        Command::Rank {
            input,
            values,
            indicator,
            out,
        } => {
            let spec = parse_spec(&indicator)?;
            let rows = match (input, values) {
                (_, Some(path)) => {
                    let table = report::read_value_table(&path)?;
                    report::rank_table(
                        &table.algorithms,
                        table.ours.as_ref(),
                        table.legacy.as_ref(),
                        spec.higher_is_better(),
                    )?
                }
                (Some(input), None) => {
                    let mut config = RunConfig::new(input.input, PathBuf::new());
                    config.input_format = input.input_format;
                    config.weights = input.weights;
                    config.procedures = parse_list::<Procedure>(&input.procedures)?;
                    config.undefined_policy = input.undefined_policy;
                    config.indicators = vec![spec];
                    config.rank_by = spec;
                    config.validate()?;
                    let records = config.load_records()?;
                    let built = report::build_report(&records, &config)?;
                    report::rank_report(&built)?
                }
                (None, None) => return Err(usage("either --input or --values is required")),
            };
            let bytes = report::rank_csv(&rows);
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| ReportError::Io {
                        path: dir.clone(),
                        source: e,
                    })?;
                    let path = dir.join("rank.csv");
                    std::fs::write(&path, &bytes).map_err(|e| ReportError::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    writeln!(stdout, "{}", path.display()).map_err(stdout_err)?;
                }
                None => stdout.write_all(&bytes).map_err(stdout_err)?,
            }
        }
        Command::Convert {
            direction,
            point,
            prior,
        } => {
            let (x, y) = point
                .split_once(',')
                .and_then(|(x, y)| {
                    Some((x.trim().parse::<f64>().ok()?, y.trim().parse::<f64>().ok()?))
                })
                .ok_or_else(|| usage(format!("point must be 'x,y', got '{point}'")))?;
            let line = report::cmd_convert(direction, x, y, prior)?;
            writeln!(stdout, "{line}").map_err(stdout_err)?;
        }
        Command::IngestMasks {
            manifest,
            out,
            algorithm,
        } => {
            let records = report::cmd_ingest_masks(&manifest, &out, algorithm.as_deref())?;
            eprintln!("{} video(s) written to {}", records.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
