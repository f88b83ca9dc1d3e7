//! The `priorlab` command: `label`, `eval`, `analyze` and `infuse-demo`.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a data error. Every
//! output file is written to a temporary sibling and renamed into place.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    emit_plot_data, length_stats_from_counts, stratify, CountComparison, LengthStats,
    ScoredReport, StratifiedSummary, StratifyOptions, DEFAULT_BINS, IU_XRAY_COUNTS,
    MIMIC_CXR_COUNTS,
};
use crate::corpus::{load_corpus, CorpusFormat, CorpusRecord};
use crate::error::{Error, Result};
use crate::infusion::{
    forward, forward_baseline, grad_check, ImagePair, PriorScalar, ToyModel, DEFAULT_SEED,
};
use crate::labeler::rules::DEFAULT_RULES_VERSION;
use crate::labeler::{label_records, LabelCounts, LabelTarget, RuleSet};
use crate::metrics::{evaluate_corpus, MetricReport, ReportScores};
use crate::output::write_atomic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Allowed relative deviation of the positive count in `--compare-counts`.
pub const COUNT_TOLERANCE: f64 = 0.10;

pub fn version_string() -> String {
    format!(
        "priorlab {} (default rules {})",
        env!("CARGO_PKG_VERSION"),
        DEFAULT_RULES_VERSION
    )
}

#[derive(Debug, Parser)]
#[command(name = "priorlab", disable_version_flag = true)]
#[command(about = "Label comparison priors, score reports, and run the infusion demo")]
struct Cli {
    /// Print toolkit and default-rules versions.
    #[arg(long, short = 'V')]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label every record and write one JSON line per record.
    Label(LabelArgs),
    /// Label candidates, score them against references, and stratify.
    Eval(EvalArgs),
    /// Stratify an existing metrics file and/or summarize a corpus.
    Analyze(AnalyzeArgs),
    /// Run the seeded toy encoder-decoder with and without the prior.
    InfuseDemo(InfuseArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Corpus file (JSONL or CSV).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,

    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<CorpusFormat>,

    /// Rules file replacing the bundled defaults.
    #[arg(long, value_name = "PATH")]
    rules: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Reference {
    IuXray,
    MimicCxr,
}

impl Reference {
    fn counts(self) -> LabelCounts {
        match self {
            Reference::IuXray => IU_XRAY_COUNTS,
            Reference::MimicCxr => MIMIC_CXR_COUNTS,
        }
    }
}

#[derive(Debug, Args)]
struct LabelArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Write `{negative, positive, total}` here.
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = LabelTarget::Text)]
    label_on: LabelTarget,

    /// Compare counts with a published corpus breakdown.
    #[arg(long, value_enum)]
    compare_counts: Option<Reference>,
}

/// Which per-report score is stratified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    B1,
    B2,
    B3,
    #[default]
    B4,
    RougeL,
    Cider,
}

impl ScoreKind {
    pub fn of(self, scores: &ReportScores) -> f64 {
        match self {
            ScoreKind::B1 => scores.bleu[0],
            ScoreKind::B2 => scores.bleu[1],
            ScoreKind::B3 => scores.bleu[2],
            ScoreKind::B4 => scores.bleu[3],
            ScoreKind::RougeL => scores.rouge_l,
            ScoreKind::Cider => scores.cider,
        }
    }

    /// CIDEr is unbounded above; the others live in `[0, 1]`.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            ScoreKind::Cider => (0.0, 10.0),
            _ => (0.0, 1.0),
        }
    }
}

#[derive(Debug, Args)]
struct StratifyArgs {
    #[arg(long, value_enum, default_value_t = ScoreKind::B4)]
    metric: ScoreKind,

    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,

    /// Histogram CSV; statistics go to the sibling `.stats.json`.
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Metric report JSON.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Per-report rows as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Stratified summary JSON.
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = LabelTarget::Candidate)]
    label_on: LabelTarget,

    #[command(flatten)]
    stratify: StratifyArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Metric report JSON with a label column, as written by `eval`.
    #[arg(long, value_name = "PATH", required_unless_present = "corpus")]
    scores: Option<PathBuf>,

    /// Corpus to label for counts and length statistics.
    #[arg(long, value_name = "PATH")]
    corpus: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<CorpusFormat>,

    #[arg(long, value_name = "PATH")]
    rules: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = LabelTarget::Text)]
    label_on: LabelTarget,

    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    #[command(flatten)]
    stratify: StratifyArgs,
}

#[derive(Debug, Args)]
struct InfuseArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    prior: u8,

    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    max_len: u64,

    /// Write `L` and `L_new` as JSON.
    #[arg(long, value_name = "PATH")]
    emit_latents: Option<PathBuf>,

    /// Compare analytic and finite-difference gradients.
    #[arg(long)]
    grad_check: bool,
}

/// Parse `argv` (program name first) and run; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.version {
        println!("{}", version_string());
        return EXIT_OK;
    }
    let Some(command) = cli.command else {
        let mut cmd = <Cli as clap::CommandFactory>::command();
        let _ = cmd.write_help(&mut std::io::stderr());
        return EXIT_USAGE;
    };
    let result = match command {
        Command::Label(args) => label(args),
        Command::Eval(args) => eval(args),
        Command::Analyze(args) => analyze(args),
        Command::InfuseDemo(args) => infuse_demo(args),
    };
    match result.and_then(|stdout| print_stdout(&stdout)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("priorlab: {e}");
            EXIT_DATA
        }
    }
}

fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

fn check_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{}: no such file", path.display())))
    }
}

fn check_output(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(dir) if !dir.is_dir() => Err(Error::InvalidInput(format!(
            "{}: directory does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn check_outputs<'a>(paths: impl IntoIterator<Item = Option<&'a PathBuf>>) -> Result<()> {
    paths.into_iter().flatten().try_for_each(|p| check_output(p))
}

fn load_rules(path: Option<&Path>) -> Result<RuleSet> {
    match path {
        Some(p) => {
            check_input(p)?;
            RuleSet::load(p)
        }
        None => Ok(RuleSet::default_rules()),
    }
}

fn load_input(path: &Path, format: Option<CorpusFormat>) -> Result<Vec<CorpusRecord>> {
    check_input(path)?;
    load_corpus(path, format.unwrap_or_else(|| CorpusFormat::from_path(path)))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct LabelSummary {
    #[serde(flatten)]
    counts: LabelCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<CountComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    within_tolerance: Option<bool>,
}

fn label(args: LabelArgs) -> Result<String> {
    check_outputs([Some(&args.out), args.summary.as_ref()])?;
    let rules = load_rules(args.input.rules.as_deref())?;
    let records = load_input(&args.input.input, args.input.format)?;
    let labels = label_records(&records, &rules, args.label_on)?;

    let mut lines = String::new();
    for record in labels.label_records() {
        lines.push_str(&serde_json::to_string(&record)?);
        lines.push('\n');
    }
    write_atomic(&args.out, lines.as_bytes())?;

    let comparison = args
        .compare_counts
        .map(|r| CountComparison::new(labels.counts, r.counts()));
    let summary = LabelSummary {
        counts: labels.counts,
        within_tolerance: comparison.as_ref().map(|c| c.within(COUNT_TOLERANCE)),
        comparison,
    };
    let json = to_json(&summary)?;
    if let Some(path) = &args.summary {
        write_atomic(path, json.as_bytes())?;
    }
    Ok(json)
}

/// Metric report with labels attached, plus its stratified summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub metrics: MetricReport,
    pub metric: ScoreKind,
    pub summary: StratifiedSummary,
    pub lengths: LengthStats,
    /// Whether positive reports score lower on average, when both labels occur.
    pub positive_below_negative: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub label_on: LabelTarget,
    pub metric: ScoreKind,
    pub stratify: StratifyOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            label_on: LabelTarget::Candidate,
            metric: ScoreKind::B4,
            stratify: StratifyOptions::default(),
        }
    }
}

/// Label (candidates by default), score, then stratify the chosen metric.
pub fn pipeline_label_then_eval(
    records: &[CorpusRecord],
    rules: &RuleSet,
    options: PipelineOptions,
) -> Result<PipelineReport> {
    let labels = label_records(records, rules, options.label_on)?;
    let mut metrics = evaluate_corpus(records)?;
    for (row, (_, label)) in metrics.per_report.iter_mut().zip(&labels.records) {
        row.label = Some(label.value);
    }
    let scored: Vec<ScoredReport> = metrics
        .per_report
        .iter()
        .zip(&labels.records)
        .map(|(row, (report, label))| ScoredReport {
            id: row.id.clone(),
            score: options.metric.of(row),
            label: label.value,
            token_count: Some(report.token_count()),
        })
        .collect();
    let summary = stratify(&scored, options.stratify)?;
    let lengths = length_stats_from_counts(
        &labels
            .records
            .iter()
            .map(|(report, label)| (report.token_count(), label.value))
            .collect::<Vec<_>>(),
    );
    Ok(PipelineReport {
        positive_below_negative: summary.positive_below_negative(),
        metrics,
        metric: options.metric,
        summary,
        lengths,
    })
}

fn stratify_options(args: &StratifyArgs) -> StratifyOptions {
    StratifyOptions {
        bins: args.bins,
        range: args.metric.default_range(),
    }
}

#[derive(Serialize)]
struct StratifiedOutput<'a> {
    metric: ScoreKind,
    summary: &'a StratifiedSummary,
    lengths: &'a LengthStats,
    positive_below_negative: Option<bool>,
}

fn eval(args: EvalArgs) -> Result<String> {
    check_outputs([
        Some(&args.out),
        args.csv.as_ref(),
        args.summary.as_ref(),
        args.stratify.plot.as_ref(),
    ])?;
    let rules = load_rules(args.input.rules.as_deref())?;
    let records = load_input(&args.input.input, args.input.format)?;
    let options = PipelineOptions {
        label_on: args.label_on,
        metric: args.stratify.metric,
        stratify: stratify_options(&args.stratify),
    };
    let report = pipeline_label_then_eval(&records, &rules, options)?;

    write_atomic(&args.out, to_json(&report.metrics)?.as_bytes())?;
    if let Some(path) = &args.csv {
        write_atomic(path, report.metrics.to_csv()?.as_bytes())?;
    }
    let stratified = to_json(&StratifiedOutput {
        metric: report.metric,
        summary: &report.summary,
        lengths: &report.lengths,
        positive_below_negative: report.positive_below_negative,
    })?;
    if let Some(path) = &args.summary {
        write_atomic(path, stratified.as_bytes())?;
    }
    if let Some(path) = &args.stratify.plot {
        emit_plot_data(&report.summary, path)?;
    }
    Ok(stratified)
}

#[derive(Serialize)]
struct AnalyzeOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<ScoreKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<StratifiedSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    positive_below_negative: Option<Option<bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<LabelCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lengths: Option<LengthStats>,
}

fn analyze(args: AnalyzeArgs) -> Result<String> {
    check_outputs([Some(&args.out), args.stratify.plot.as_ref()])?;
    let mut output = AnalyzeOutput {
        metric: None,
        summary: None,
        positive_below_negative: None,
        counts: None,
        lengths: None,
    };
    if let Some(path) = &args.scores {
        check_input(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let metrics: MetricReport = serde_json::from_str(&text)?;
        let scored = metrics
            .per_report
            .iter()
            .map(|row| {
                let label = row.label.ok_or_else(|| Error::MissingField {
                    id: row.id.clone(),
                    field: "label",
                })?;
                Ok(ScoredReport {
                    id: row.id.clone(),
                    score: args.stratify.metric.of(row),
                    label,
                    token_count: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let summary = stratify(&scored, stratify_options(&args.stratify))?;
        if let Some(plot) = &args.stratify.plot {
            emit_plot_data(&summary, plot)?;
        }
        output.metric = Some(args.stratify.metric);
        output.positive_below_negative = Some(summary.positive_below_negative());
        output.summary = Some(summary);
    }
    if let Some(path) = &args.corpus {
        let rules = load_rules(args.rules.as_deref())?;
        let records = load_input(path, args.format)?;
        let labels = label_records(&records, &rules, args.label_on)?;
        let pairs: Vec<(usize, u8)> = labels
            .records
            .iter()
            .map(|(report, label)| (report.token_count(), label.value))
            .collect();
        output.counts = Some(labels.counts);
        output.lengths = Some(length_stats_from_counts(&pairs));
    }
    let json = to_json(&output)?;
    write_atomic(&args.out, json.as_bytes())?;
    Ok(json)
}

#[derive(Serialize)]
struct LatentDump {
    seed: u64,
    prior: u8,
    latent: Vec<Vec<f64>>,
    latent_new: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct InfuseOutput {
    seed: u64,
    prior: u8,
    max_len: usize,
    param_count: usize,
    tokens: Vec<usize>,
    baseline_tokens: Vec<usize>,
    prior_changed_tokens: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    grad_check: Option<crate::infusion::GradReport>,
}

fn infuse_demo(args: InfuseArgs) -> Result<String> {
    check_outputs([args.emit_latents.as_ref()])?;
    let max_len = usize::try_from(args.max_len)
        .map_err(|_| Error::InvalidInput("max-len too large".into()))?;
    let model = ToyModel::new(args.seed);
    let images = ImagePair::fixture(args.seed, model.config.image_size);
    let prior = PriorScalar(f64::from(args.prior));
    let out = forward(&images, prior, &model, max_len)?;
    let baseline = forward_baseline(&images, &model, max_len)?;
    if let Some(path) = &args.emit_latents {
        let dump = LatentDump {
            seed: args.seed,
            prior: args.prior,
            latent: out.latent.0.to_rows(),
            latent_new: out.latent_new.0.to_rows(),
        };
        write_atomic(path, to_json(&dump)?.as_bytes())?;
    }
    let grad = if args.grad_check {
        Some(grad_check(&model, &images, prior)?)
    } else {
        None
    };
    to_json(&InfuseOutput {
        seed: args.seed,
        prior: args.prior,
        max_len,
        param_count: model.param_count(),
        prior_changed_tokens: out.tokens != baseline.tokens,
        tokens: out.tokens,
        baseline_tokens: baseline.tokens,
        grad_check: grad,
    })
}
