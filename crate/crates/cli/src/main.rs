use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use intertext::detect::{length_histogram, DEFAULT_N};
use intertext::numerics::LogOffset;
use intertext::pipeline::{
    self, analyze, default_workers, detect, detection_json, emit_report, figures, ingest_files,
    load_analysis, load_corpus, load_detection, quotations_csv, render_report,
    write_files_atomically, AnalysisConfig, RunConfig, ANALYSIS_FILE, CORPUS_FILE,
    DETECTION_FILE, QUOTATIONS_FILE,
};
use intertext::report::histogram_svg;
use intertext::PipelineError;

/// Verbatim quotation detection between the Greek Old and New Testaments,
/// with clustering of books by how they quote each other.
#[derive(Parser)]
#[command(name = "intertext", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse both Zefania XML files into a keyed corpus container.
    Ingest(IngestArgs),
    /// Find shared n-grams and merge them into quotations.
    Detect(DetectArgs),
    /// Build the proportion matrix, cluster both testaments and run PCA.
    Analyze(AnalyzeArgs),
    /// Write all tables, figures and the manifest.
    Report(ReportArgs),
    /// Run every stage and write the report.
    Run(RunArgs),
    /// Redraw the SVG figures from an existing analysis.
    Plot(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct Inputs {
    /// Septuagint Zefania XML file.
    #[arg(long)]
    ot: PathBuf,
    /// New Testament Zefania XML file.
    #[arg(long)]
    nt: PathBuf,
}

#[derive(Args)]
struct DetectOpts {
    /// Window length in words.
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    /// Matching threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct AnalyzeOpts {
    /// Number of Old Testament clusters.
    #[arg(long = "k-ot", default_value_t = pipeline::DEFAULT_K_OT)]
    k_ot: usize,
    /// Number of New Testament clusters.
    #[arg(long = "k-nt", default_value_t = pipeline::DEFAULT_K_NT)]
    k_nt: usize,
    /// Offset added before the logarithm: the smallest nonzero proportion
    /// (value) or its absolute logarithm (literal).
    #[arg(long = "log-offset", default_value = "value", value_parser = parse_offset)]
    log_offset: LogOffset,
}

impl AnalyzeOpts {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            k_ot: self.k_ot,
            k_nt: self.k_nt,
            log_offset: self.log_offset,
        }
    }
}

fn parse_offset(s: &str) -> Result<LogOffset, String> {
    s.parse()
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Work directory for the corpus container.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// Work directory holding the corpus container; quotations are written here.
    #[arg(long)]
    out: PathBuf,
    /// Corpus container to read instead of `<out>/corpus.json`.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    detect: DetectOpts,
    /// Output format for tables.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Work directory holding the corpus and detection results.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    analyze: AnalyzeOpts,
}

#[derive(Args)]
struct ReportArgs {
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
    /// Work directory with the stage files (default: the report directory).
    #[arg(long)]
    work: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    detect: DetectOpts,
    #[command(flatten)]
    analyze: AnalyzeOpts,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn workers(opt: Option<usize>) -> Result<usize, PipelineError> {
    match opt {
        Some(0) => Err(PipelineError::Config("worker count must be at least 1".into())),
        Some(w) => Ok(w),
        None => Ok(default_workers()),
    }
}

fn require_dir(dir: &Path) -> Result<(), PipelineError> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(PipelineError::Config(format!(
            "work directory {} does not exist",
            dir.display()
        )))
    }
}

fn require_in(dir: &Path, name: &str) -> Result<PathBuf, PipelineError> {
    let p = dir.join(name);
    pipeline::require_file(&p)?;
    Ok(p)
}

fn execute(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest(args) => {
            let corpus = ingest_files(&args.inputs.ot, &args.inputs.nt)?;
            write_files_atomically(&args.out, &[(CORPUS_FILE.into(), corpus.to_json())])
        }
        Command::Detect(args) => {
            pipeline::validate_n(args.detect.n)?;
            let workers = workers(args.detect.workers)?;
            let corpus_path = match args.corpus {
                Some(p) => {
                    pipeline::require_file(&p)?;
                    p
                }
                None => require_in(&args.out, CORPUS_FILE)?,
            };
            let corpus = load_corpus(&corpus_path)?;
            let detection = detect(&corpus, args.detect.n, workers)?;
            write_files_atomically(
                &args.out,
                &[
                    (QUOTATIONS_FILE.into(), quotations_csv(&corpus, &detection.quotations)),
                    (DETECTION_FILE.into(), detection_json(&detection.summary)),
                ],
            )
        }
        Command::Analyze(args) => {
            let config = args.analyze.config();
            config.validate()?;
            require_dir(&args.out)?;
            let corpus = load_corpus(&require_in(&args.out, CORPUS_FILE)?)?;
            let detection = load_detection(&corpus, &args.out)?;
            let analysis = analyze(
                &corpus,
                &detection.quotations,
                config.k_ot,
                config.k_nt,
                config.log_offset,
            )?;
            write_files_atomically(&args.out, &[(ANALYSIS_FILE.into(), analysis.to_json())])
        }
        Command::Report(args) => {
            let work = args.work.unwrap_or_else(|| args.out.clone());
            require_dir(&work)?;
            let corpus = load_corpus(&require_in(&work, CORPUS_FILE)?)?;
            let detection = load_detection(&corpus, &work)?;
            require_in(&work, ANALYSIS_FILE)?;
            let analysis = load_analysis(&work)?;
            let report = render_report(&corpus, &detection, &analysis)?;
            emit_report(&args.out, &report)
        }
        Command::Plot(args) => {
            let work = args.work.unwrap_or_else(|| args.out.clone());
            require_dir(&work)?;
            let corpus = load_corpus(&require_in(&work, CORPUS_FILE)?)?;
            let detection = load_detection(&corpus, &work)?;
            require_in(&work, ANALYSIS_FILE)?;
            let analysis = load_analysis(&work)?;
            let mut files: Vec<(String, Vec<u8>)> = figures(&analysis).into();
            files.push((
                "histogram.svg".into(),
                histogram_svg(&length_histogram(&detection.quotations), "Quotation lengths")
                    .into_bytes(),
            ));
            write_files_atomically(&args.out, &files)
        }
        Command::Run(args) => {
            let mut config = RunConfig::new(args.inputs.ot, args.inputs.nt, args.out);
            config.n = args.detect.n;
            config.workers = workers(args.detect.workers)?;
            config.analysis = args.analyze.config();
            pipeline::run(&config)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors; --help and --version are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("intertext: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
