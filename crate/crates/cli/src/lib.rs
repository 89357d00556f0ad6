//! Command-line front end: `score`, `gen`, `analyze` and `estimate`.
//!
//! [`run`] takes the argument vector and the three standard streams so the
//! whole tool can be driven from tests without spawning a process.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use entroscope::corpus::{self, cdf, export_report, load_corpus, score_corpus, CdfSeries};
use entroscope::estimators::{estimate_all, estimate_selected, EstimatorOptions};
use entroscope::generator::{generate, generate_leaked_like};
use entroscope::metrics::{self, Distribution};
use entroscope::{EstimatorKind, Execution, GenLabel, GenSpec, ReportFormat, SampleFormat};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

/// Set to `1` to silence hygiene warnings such as passwords on the command line.
pub const NO_WARN_ENV: &str = "ENTROSCOPE_NO_WARN";

/// Decimal places for every number the tool prints.
pub const OUTPUT_DECIMALS: i32 = 6;

const LEAKED_LIKE: &str = "leaked-like";

#[derive(Debug, Parser)]
#[command(
    name = "entroscope",
    version,
    about = "Password strength and min-entropy toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one password (read from stdin unless given as an argument).
    Score(ScoreArgs),
    /// Generate a password corpus.
    Gen(GenArgs),
    /// Score corpora and write their CDF report.
    Analyze(AnalyzeArgs),
    /// Run min-entropy estimators on a sample file.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Read the password from stdin (the default).
    #[arg(long, conflicts_with = "password")]
    stdin: bool,
    /// Output is always JSON; accepted for symmetry with the other commands.
    #[arg(long)]
    json: bool,
    /// Password as an argument. Visible in the process list.
    password: Option<String>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Dataset label (RandomMin, Random10ch, Random32ch, Random128ch,
    /// RandomMax, leaked-like).
    #[arg(long, conflicts_with = "length", required_unless_present = "length")]
    label: Option<String>,
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    require_valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Metric {
    Expectation,
    Shannon,
    Min,
    Guessing,
    Hartley,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Corpus file, one password per line. Repeat for several series.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    /// Series label, one per `--in` in the same order. Defaults to the path.
    #[arg(long = "label")]
    labels: Vec<String>,
    #[arg(long, value_enum, default_value_t = Metric::Expectation)]
    metric: Metric,
    /// Report path; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    cdf_out: Option<PathBuf>,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Sample file; `-` reads stdin.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "raw-bytes", value_parser = parse_sample_format)]
    format: SampleFormat,
    /// Comma-separated estimator names; all applicable ones when absent.
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator)]
    estimators: Option<Vec<EstimatorKind>>,
    #[arg(long)]
    allow_short: bool,
    #[arg(long)]
    json: bool,
}

fn parse_sample_format(s: &str) -> Result<SampleFormat, String> {
    s.parse()
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    s.parse()
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data { kind: &'static str, message: String },
}

impl CliError {
    fn data(kind: &'static str, message: impl ToString) -> Self {
        CliError::Data {
            kind,
            message: message.to_string(),
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data { .. } => EXIT_DATA,
        }
    }

    fn line(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.as_str()),
            CliError::Data { kind, message } => (*kind, message.as_str()),
        };
        let message = message.replace(['\n', '\r'], " ");
        format!("entroscope: error: {kind}: {}", message.trim())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::data("io", e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

struct Streams<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Streams<'_> {
    fn warn(&mut self, message: &str) {
        let _ = writeln!(self.stderr, "entroscope: warning: {message}");
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 on usage errors, 2 on input or
/// data errors. Every error is a single line on `stderr`.
pub fn run<I, T>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return EXIT_OK;
            }
            let err = CliError::Usage(clap_message(&e));
            let _ = writeln!(stderr, "{}", err.line());
            return err.code();
        }
    };
    let mut io = Streams {
        stdin,
        stdout,
        stderr,
    };
    let result = match cli.command {
        Command::Score(args) => cmd_score(args, &mut io),
        Command::Gen(args) => cmd_gen(args, &mut io),
        Command::Analyze(args) => cmd_analyze(args, &mut io),
        Command::Estimate(args) => cmd_estimate(args, &mut io),
    };
    let _ = io.stdout.flush();
    match result {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let _ = writeln!(io.stderr, "{}", err.line());
            err.code()
        }
    }
}

/// Clap's rendered error folded onto one line, without the usage footer.
fn clap_message(e: &clap::Error) -> String {
    let rendered = e.render().to_string();
    let parts: Vec<&str> = rendered
        .lines()
        .map(str::trim)
        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .filter(|l| !l.is_empty())
        .collect();
    parts.join(" ").trim_start_matches("error: ").to_string()
}

fn round(v: f64) -> f64 {
    let scale = 10f64.powi(OUTPUT_DECIMALS);
    (v * scale).round() / scale + 0.0
}

fn warnings_enabled() -> bool {
    std::env::var(NO_WARN_ENV).map_or(true, |v| v != "1")
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::data("io", e))?;
    writeln!(out)?;
    Ok(())
}

fn read_input(path: &Path, stdin: &mut dyn Read) -> CliResult<Vec<u8>> {
    let mut bytes = Vec::new();
    if path.as_os_str() == "-" {
        stdin.read_to_end(&mut bytes)?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?;
    }
    Ok(bytes)
}

#[derive(Debug, Serialize)]
struct ScoreReport {
    length: u64,
    lower: u64,
    upper: u64,
    digit: u64,
    symbol: u64,
    expectation: f64,
    expectation_entropy: f64,
    valid: bool,
    interpretation: Option<String>,
}

fn interpretation(h: f64) -> Option<String> {
    (h > 0.0 && h <= 1.0).then(|| {
        let pct = (100.0 * h + 1e-9).floor() as u32;
        format!("attacker must search at least {pct}% of guesses")
    })
}

fn cmd_score(args: ScoreArgs, io: &mut Streams) -> CliResult {
    let password = match args.password {
        Some(p) => {
            if warnings_enabled() {
                io.warn(
                    "password given as an argument is visible to other processes; prefer stdin",
                );
            }
            p
        }
        None => {
            let mut bytes = Vec::new();
            io.stdin.read_to_end(&mut bytes)?;
            let mut text = String::from_utf8(bytes).map_err(|e| {
                CliError::data(
                    "encoding",
                    format!(
                        "stdin is not valid UTF-8 at byte offset {}",
                        e.utf8_error().valid_up_to()
                    ),
                )
            })?;
            if text.ends_with('\n') {
                text.pop();
                if text.ends_with('\r') {
                    text.pop();
                }
            }
            if text.contains('\n') {
                return Err(CliError::data(
                    "input",
                    "expected exactly one password on stdin",
                ));
            }
            text
        }
    };
    let score = metrics::score_password(&password).map_err(|e| CliError::data("charspace", e))?;
    let p = score.profile;
    let report = ScoreReport {
        length: p.length(),
        lower: p.lower,
        upper: p.upper,
        digit: p.digit,
        symbol: p.symbol,
        expectation: round(score.expectation),
        expectation_entropy: round(score.expectation_entropy),
        valid: score.valid,
        interpretation: interpretation(round(score.expectation_entropy)),
    };
    write_json(io.stdout, &report)
}

fn cmd_gen(args: GenArgs, io: &mut Streams) -> CliResult {
    let passwords = match args.label.as_deref() {
        Some(l) if l.eq_ignore_ascii_case(LEAKED_LIKE) => {
            if args.require_valid {
                return Err(CliError::Usage(
                    "--require-valid cannot be used with the leaked-like label".into(),
                ));
            }
            let seed = args
                .seed
                .ok_or_else(|| CliError::Usage("the leaked-like label requires --seed".into()))?;
            generate_leaked_like(args.count, seed)
        }
        label => {
            let label = match (label, args.length) {
                (Some(l), _) => l
                    .parse::<GenLabel>()
                    .map_err(|e| CliError::Usage(e.to_string()))?,
                (None, Some(n)) => GenLabel::Custom(n),
                (None, None) => unreachable!("clap requires --label or --length"),
            };
            let mut spec = GenSpec::new(label, args.count);
            spec.require_valid = args.require_valid;
            spec.seed = args.seed;
            generate(&spec, Execution::default()).map_err(|e| CliError::data("generator", e))?
        }
    };

    let mut sink: Box<dyn Write + '_> = match &args.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| {
                CliError::data("io", format!("{}: {e}", path.display()))
            })?))
        }
        None => Box::new(&mut *io.stdout),
    };
    for p in &passwords {
        writeln!(sink, "{p}")?;
    }
    sink.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SeriesSummary {
    label: String,
    count: usize,
    skipped: usize,
    min: f64,
    median: f64,
    max: f64,
    /// The metric over the corpus-wide character distribution; absent for
    /// expectation entropy, which is a per-password quantity only.
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus_entropy: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AnalyzeSummary {
    metric: Metric,
    series: Vec<SeriesSummary>,
}

/// Classical metric over the character frequencies of one password.
fn classical(metric: Metric, dist: &Distribution) -> f64 {
    match metric {
        Metric::Shannon => metrics::shannon(dist),
        Metric::Min => metrics::min_entropy(dist),
        Metric::Guessing => metrics::guessing_entropy(dist),
        Metric::Hartley => (dist.support_size() as f64).log2(),
        Metric::Expectation => unreachable!("expectation is not a distribution metric"),
    }
}

fn char_distribution(password: &str) -> Distribution {
    let mut counts = std::collections::BTreeMap::new();
    for c in password.chars() {
        *counts.entry(c).or_insert(0u64) += 1;
    }
    let counts: Vec<u64> = counts.into_values().collect();
    Distribution::from_counts(&counts).expect("corpus entries are nonempty")
}

fn cmd_analyze(args: AnalyzeArgs, io: &mut Streams) -> CliResult {
    if !args.labels.is_empty() && args.labels.len() != args.inputs.len() {
        return Err(CliError::Usage(format!(
            "{} --label values for {} --in paths",
            args.labels.len(),
            args.inputs.len()
        )));
    }
    let labels: Vec<String> = if args.labels.is_empty() {
        args.inputs
            .iter()
            .map(|p| p.display().to_string())
            .collect()
    } else {
        args.labels.clone()
    };
    let mut seen = HashSet::new();
    if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
        return Err(CliError::Usage(format!("duplicate series label {dup:?}")));
    }

    let exec = Execution::default();
    let mut series = Vec::with_capacity(labels.len());
    let mut summaries = Vec::with_capacity(labels.len());
    for (path, label) in args.inputs.iter().zip(&labels) {
        let bytes = read_input(path, io.stdin)?;
        let corpus = load_corpus(bytes.as_slice(), label)
            .map_err(|e| CliError::data("corpus", format!("{}: {e}", path.display())))?;
        if corpus.is_empty() {
            return Err(CliError::data(
                "corpus",
                format!("{}: no scorable entries", path.display()),
            ));
        }
        let (values, corpus_entropy) = match args.metric {
            Metric::Expectation => {
                let scores = score_corpus(&corpus, exec);
                (scores.iter().map(|s| s.expectation_entropy).collect(), None)
            }
            m => {
                let values: Vec<f64> = corpus
                    .entries
                    .iter()
                    .map(|e| classical(m, &char_distribution(e)))
                    .collect();
                let dist = corpus::empirical_char_distribution(&corpus)
                    .map_err(|e| CliError::data("corpus", e))?;
                (values, Some(round(classical(m, &dist))))
            }
        };
        let s: CdfSeries = cdf(&values)
            .map_err(|e| CliError::data("corpus", e))?
            .with_label(label.clone());
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        summaries.push(SeriesSummary {
            label: label.clone(),
            count: corpus.len(),
            skipped: corpus.skipped,
            min: round(min),
            median: round(s.median().expect("series is nonempty")),
            max: round(max),
            corpus_entropy,
        });
        series.push(s);
    }

    if let Some(path) = &args.cdf_out {
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        };
        let file = File::create(path)
            .map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?;
        let mut sink = BufWriter::new(file);
        export_report(&series, format, &mut sink).map_err(|e| CliError::data("report", e))?;
        sink.flush()?;
    }

    let summary = AnalyzeSummary {
        metric: args.metric,
        series: summaries,
    };
    if args.json {
        return write_json(io.stdout, &summary);
    }
    for s in &summary.series {
        write!(
            io.stdout,
            "{}: count={} skipped={} min={:.6} median={:.6} max={:.6}",
            s.label, s.count, s.skipped, s.min, s.median, s.max
        )?;
        if let Some(h) = s.corpus_entropy {
            write!(io.stdout, " corpus={h:.6}")?;
        }
        writeln!(io.stdout)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EstimateLine {
    name: &'static str,
    bits_per_sample: f64,
    statistic: f64,
    bound: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct EstimateFailure {
    name: &'static str,
    error: String,
}

#[derive(Debug, Serialize)]
struct EstimateReport {
    estimates: Vec<EstimateLine>,
    minimum: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    errors: Vec<EstimateFailure>,
}

fn cmd_estimate(args: EstimateArgs, io: &mut Streams) -> CliResult {
    let bytes = read_input(&args.input, io.stdin)?;
    let seq = corpus::decode_samples(bytes.as_slice(), args.format)
        .map_err(|e| CliError::data("samples", e))?;
    let opts = EstimatorOptions {
        allow_short: args.allow_short,
        ..Default::default()
    };
    let exec = Execution::default();
    let suite = match &args.estimators {
        Some(kinds) => {
            let mut unique = Vec::new();
            for k in kinds {
                if !unique.contains(k) {
                    unique.push(*k);
                }
            }
            estimate_selected(&seq, &unique, &opts, exec)
        }
        None => estimate_all(&seq, &opts, exec),
    };

    let report = EstimateReport {
        estimates: suite
            .successes()
            .map(|r| EstimateLine {
                name: r.estimator.name(),
                bits_per_sample: round(r.min_entropy_per_sample),
                statistic: round(r.statistic),
                bound: round(r.confidence_bound),
                warnings: r.warnings.clone(),
            })
            .collect(),
        minimum: suite.minimum().map(round),
        errors: suite
            .failures()
            .map(|(k, e)| EstimateFailure {
                name: k.name(),
                error: e.to_string(),
            })
            .collect(),
    };

    if args.json {
        write_json(io.stdout, &report)?;
    } else {
        for line in &report.estimates {
            writeln!(
                io.stdout,
                "{}: {:.6} bits/sample (statistic {:.6}, bound {:.6})",
                line.name, line.bits_per_sample, line.statistic, line.bound
            )?;
            for w in &line.warnings {
                io.warn(w);
            }
        }
        if let Some(m) = report.minimum {
            writeln!(io.stdout, "minimum: {m:.6} bits/sample")?;
        }
    }

    if report.errors.is_empty() {
        Ok(())
    } else {
        let detail: Vec<String> = report
            .errors
            .iter()
            .map(|f| {
                if f.error.starts_with(f.name) {
                    f.error.clone()
                } else {
                    format!("{}: {}", f.name, f.error)
                }
            })
            .collect();
        Err(CliError::data("estimator", detail.join("; ")))
    }
}
