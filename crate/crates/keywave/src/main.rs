use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use keywave::config::{Overrides, RawConfig, RunConfig};
use keywave::corpus::Platform;
use keywave::ingest::{parse_dump, IngestError};
use keywave::pipeline::{run_pipeline, PipelineError, Selection};

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SCHEMA: u8 = 3;
const EXIT_NO_DATA: u8 = 4;

#[derive(Parser)]
#[command(
    name = "keywave",
    version,
    about = "Temporal keyness (Log Ratio) analysis of time-stamped social media dumps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse dumps and report schema problems without running the pipeline
    IngestCheck(IngestCheckArgs),
    /// Run the full pipeline: timeline, keyness tables and domain tally
    Run(PipelineArgs),
    /// Emit only the post-volume timeline CSV
    Timeline(PipelineArgs),
    /// Emit only the keyness tables
    Keyness(PipelineArgs),
    /// Emit only the shared-domain tally
    Domains(PipelineArgs),
}

#[derive(Args)]
struct IngestCheckArgs {
    /// Dump files to check
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Dump schema: gab or telegram
    #[arg(long)]
    schema: String,
    /// Stop at the first bad record
    #[arg(long)]
    strict: bool,
}

/// Every flag overrides the matching config-file field; flags win.
#[derive(Args, Default)]
struct PipelineArgs {
    /// TOML config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input dump file (repeatable; replaces the config's inputs, needs --schema)
    #[arg(long = "input")]
    inputs: Vec<String>,
    /// Schema for --input files: gab or telegram
    #[arg(long)]
    schema: Option<String>,
    /// Corpus name for --input files
    #[arg(long)]
    corpus: Option<String>,
    /// Comma-separated hashtag filter (empty keeps all posts)
    #[arg(long, value_delimiter = ',')]
    hashtags: Option<Vec<String>>,
    /// Range start, RFC 3339 or YYYY-MM-DD (inclusive)
    #[arg(long)]
    from: Option<String>,
    /// Range end, RFC 3339 or YYYY-MM-DD (exclusive)
    #[arg(long)]
    to: Option<String>,
    /// Window width: day or hour
    #[arg(long)]
    granularity: Option<String>,
    /// Comma-separated language whitelist (e.g. en,ru)
    #[arg(long, value_delimiter = ',')]
    languages: Option<Vec<String>>,
    /// Reference mode: cumulative or previous-window
    #[arg(long = "mode")]
    reference_mode: Option<String>,
    /// Substitute for zero raw frequencies
    #[arg(long)]
    zero_adjust: Option<f64>,
    /// Minimum target-window frequency for a token to be scored
    #[arg(long)]
    min_target_freq: Option<u64>,
    /// Ranked tokens kept per window
    #[arg(long)]
    top_n: Option<usize>,
    /// Count document frequency instead of token frequency
    #[arg(long)]
    doc_freq: bool,
    /// Abort on the first bad dump record
    #[arg(long)]
    strict: bool,
    /// Timeline grouping: hashtag, channel or country
    #[arg(long)]
    group_by: Option<String>,
    /// Domain annotation CSV (domain,label)
    #[arg(long)]
    annotations: Option<String>,
    /// Domains kept in the tally
    #[arg(long)]
    domains_top_n: Option<usize>,
    /// Output directory
    #[arg(long = "out")]
    out_dir: Option<String>,
    /// Worker threads for per-post stages (0 = automatic)
    #[arg(long)]
    threads: Option<usize>,
}

impl PipelineArgs {
    fn into_config(self) -> Result<RunConfig, String> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path).map_err(|e| e.to_string())?,
            None => RawConfig::default(),
        };
        let inputs = if self.inputs.is_empty() {
            Vec::new()
        } else {
            let schema: Platform = self
                .schema
                .as_deref()
                .ok_or("--input requires --schema")?
                .parse()?;
            self.inputs.iter().map(|path| (path.clone(), schema)).collect()
        };
        let overrides = Overrides {
            inputs,
            corpus: self.corpus,
            hashtags: self.hashtags,
            from: self.from,
            to: self.to,
            granularity: self.granularity,
            languages: self.languages,
            reference_mode: self.reference_mode,
            zero_adjust: self.zero_adjust,
            min_target_freq: self.min_target_freq,
            top_n: self.top_n,
            doc_freq: self.doc_freq,
            strict: self.strict,
            group_by: self.group_by,
            annotations: self.annotations,
            domains_top_n: self.domains_top_n,
            out_dir: self.out_dir,
            threads: self.threads,
        };
        raw.apply(&overrides);
        raw.finalize().map_err(|e| e.to_string())
    }
}

fn pipeline_exit_code(error: &PipelineError) -> u8 {
    match error {
        PipelineError::NoData => EXIT_NO_DATA,
        PipelineError::Ingest { .. } => EXIT_SCHEMA,
        _ => EXIT_FAILURE,
    }
}

fn run_selection(args: PipelineArgs, selection: Selection) -> u8 {
    let config = match args.into_config() {
        Ok(config) => config,
        Err(message) => {
            eprintln!("config error: {message}");
            return EXIT_CONFIG;
        }
    };
    match run_pipeline(&config, selection) {
        Ok(summary) => {
            print!("{}", summary.render());
            EXIT_OK
        }
        Err(error) => {
            eprintln!("error: {error}");
            pipeline_exit_code(&error)
        }
    }
}

fn ingest_check(args: IngestCheckArgs) -> u8 {
    let schema: Platform = match args.schema.parse() {
        Ok(schema) => schema,
        Err(message) => {
            eprintln!("config error: {message}");
            return EXIT_CONFIG;
        }
    };
    let mut any_rejected = false;
    for file in &args.files {
        match parse_dump(file, schema, args.strict) {
            Ok(outcome) => {
                println!(
                    "{}: {} records, {} accepted, {} rejected",
                    file.display(),
                    outcome.posts.len() + outcome.rejected.len(),
                    outcome.posts.len(),
                    outcome.rejected.len()
                );
                for reject in &outcome.rejected {
                    println!("  line {}: field {}: {}", reject.line, reject.field, reject.reason);
                    any_rejected = true;
                }
            }
            Err(error @ (IngestError::SchemaViolation { .. } | IngestError::DuplicateId { .. })) => {
                eprintln!("{}: {error}", file.display());
                return EXIT_SCHEMA;
            }
            Err(error) => {
                eprintln!("{}: {error}", file.display());
                return EXIT_SCHEMA;
            }
        }
    }
    if any_rejected {
        EXIT_SCHEMA
    } else {
        EXIT_OK
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::IngestCheck(args) => ingest_check(args),
        Command::Run(args) => run_selection(args, Selection::all()),
        Command::Timeline(args) => run_selection(args, Selection::timeline_only()),
        Command::Keyness(args) => run_selection(args, Selection::keyness_only()),
        Command::Domains(args) => run_selection(args, Selection::domains_only()),
    };
    ExitCode::from(code)
}
