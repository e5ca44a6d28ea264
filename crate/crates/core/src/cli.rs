//! Command-line front end: `aggregate`, `resample`, `audit` and `evaluate`.
//!
//! Report formats are picked from the output file extension (`.csv` or `.json`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::data::{aggregate_rating, load_csv_with, partition, CsvOptions, RatingSet};
use crate::divergence::{audit, DEFAULT_BINS};
use crate::error::{Error, Result};
use crate::evaluation::{compare_methods, SplitSpec};
use crate::forest::ForestParams;
use crate::neighbors::NeighborIndex;
use crate::oversample::{oversample, plan_balance, LambdaMode, Method, SamplerConfig};

/// Extra columns written by `resample` after the label column.
pub const PROVENANCE_COLUMNS: [&str; 3] = ["synthetic", "method", "parent_row"];

/// Rater columns read by `aggregate`.
pub const RATER_COLUMNS: [&str; 4] = ["r1", "r2", "r3", "r4"];

#[derive(Debug, Parser)]
#[command(name = "synthsample", version, about = "Synthetic oversampling, distribution auditing and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collapse four rater columns r1..r4 into one class label.
    Aggregate(AggregateArgs),
    /// Balance every class to the majority count.
    Resample(ResampleArgs),
    /// Jensen-Shannon audit of a resampled table against the original.
    Audit(AuditArgs),
    /// Stratified repeated hold-out comparison of oversampling methods.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Name of the appended label column.
    #[arg(long, default_value = "label")]
    pub label_col: String,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_col: String,
    /// random | smote | b1 | b2 | adasyn
    #[arg(long)]
    pub method: Method,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// per_feature | per_sample
    #[arg(long, default_value = "per_feature")]
    pub lambda_mode: LambdaMode,
    /// Exclusive upper bound of lambda toward out-of-class neighbors (b2).
    #[arg(long, default_value_t = 0.5)]
    pub b2_lambda_max: f64,
    /// Use raw feature values for neighbor search.
    #[arg(long)]
    pub no_scale: bool,
    /// Duplicate single-instance classes instead of failing.
    #[arg(long)]
    pub single_member_fallback: bool,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub resampled: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_col: String,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-(class, feature) histogram dump.
    #[arg(long)]
    pub histograms: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_col: String,
    /// Comma-separated list from none, random, smote, b1, b2, adasyn.
    /// The no-oversampling baseline always runs.
    #[arg(long, default_value = "smote,b1,b2,adasyn,random")]
    pub methods: String,
    #[arg(long, default_value_t = 30)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_frac: f64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Features tried per split; ceil(sqrt(p)) by default.
    #[arg(long)]
    pub mtry: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "per_feature")]
    pub lambda_mode: LambdaMode,
    #[arg(long)]
    pub no_scale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(OutputFormat::Csv),
            Some("json") => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!(
                "cannot infer output format of {}; use .csv or .json",
                path.display()
            ))),
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Resample(args) => cmd_resample(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Evaluate(args) => cmd_evaluate(args),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn require_csv(path: &Path) -> Result<()> {
    match OutputFormat::from_path(path)? {
        OutputFormat::Csv => Ok(()),
        OutputFormat::Json => Err(Error::Config(format!(
            "{} must be a .csv file",
            path.display()
        ))),
    }
}

pub fn cmd_aggregate(args: &AggregateArgs) -> Result<()> {
    require_csv(&args.out)?;
    let file = File::open(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    info!("aggregating ratings from {}", args.input.display());
    if headers.iter().any(|h| h == args.label_col) {
        return Err(Error::DuplicateLabelColumn(args.label_col.clone()));
    }
    let positions = RATER_COLUMNS
        .iter()
        .map(|&name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let mut ratings = [0i64; 4];
        for (slot, (&pos, &name)) in ratings.iter_mut().zip(positions.iter().zip(&RATER_COLUMNS)) {
            let cell = record.get(pos).unwrap_or("");
            *slot = cell.parse().map_err(|_| Error::NonNumeric {
                row: idx + 1,
                column: name.to_string(),
                value: cell.to_string(),
            })?;
        }
        let label = aggregate_rating(&RatingSet::new(ratings)?);
        let mut out: Vec<String> = record.iter().map(str::to_string).collect();
        out.push(label.to_string());
        rows.push(out);
    }
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }

    let w = create(&args.out)?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = headers.iter().collect();
    header.push(&args.label_col);
    wtr.write_record(&header)?;
    for row in &rows {
        wtr.write_record(row)?;
    }
    let w = wtr.into_inner().map_err(|e| Error::io(&args.out, e.into_error()))?;
    finish(w, &args.out)
}

pub fn cmd_resample(args: &ResampleArgs) -> Result<()> {
    require_csv(&args.out)?;
    let table = load_csv_with(&args.input, &CsvOptions::new(&args.label_col))?;
    let cfg = SamplerConfig {
        method: args.method,
        k: args.k,
        seed: args.seed,
        lambda_mode: args.lambda_mode,
        b2_out_of_class_lambda_max: args.b2_lambda_max,
        single_member_fallback: args.single_member_fallback,
        scale: !args.no_scale,
    };
    cfg.validate()?;
    let plan = plan_balance(&partition(&table)?);
    let index = NeighborIndex::build(&table, cfg.scale);
    let batch = oversample(&index, &plan, &cfg)?;
    info!("{}: {} original rows, {} synthetic", cfg.method, table.n_rows(), batch.len());

    let w = create(&args.out)?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = table.feature_names().iter().map(String::as_str).collect();
    header.push(&args.label_col);
    header.extend(PROVENANCE_COLUMNS);
    wtr.write_record(&header)?;
    let fmt_row = |values: &[f64], label: u32| -> Vec<String> {
        let mut rec: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        rec.push(label.to_string());
        rec
    };
    for r in 0..table.n_rows() {
        let mut rec = fmt_row(table.row(r), table.label(r));
        rec.extend(["0".to_string(), "original".to_string(), String::new()]);
        wtr.write_record(&rec)?;
    }
    for (i, prov) in batch.provenance().iter().enumerate() {
        let mut rec = fmt_row(batch.row(i), batch.labels()[i]);
        rec.extend(["1".to_string(), prov.method.to_string(), prov.parent.to_string()]);
        wtr.write_record(&rec)?;
    }
    let w = wtr.into_inner().map_err(|e| Error::io(&args.out, e.into_error()))?;
    finish(w, &args.out)
}

pub fn cmd_audit(args: &AuditArgs) -> Result<()> {
    let format = OutputFormat::from_path(&args.out)?;
    let hist_format = args.histograms.as_deref().map(OutputFormat::from_path).transpose()?;
    let mut opts = CsvOptions::new(&args.label_col);
    opts.ignore_columns = PROVENANCE_COLUMNS.iter().map(|s| s.to_string()).collect();
    let original = load_csv_with(&args.original, &opts)?;
    let resampled = load_csv_with(&args.resampled, &opts)?;
    let report = audit(&original, &resampled, args.bins)?;
    info!("audited {} class/feature pairs, mean JS similarity {:.4}", report.n_entries(), report.overall_mean);

    let mut w = create(&args.out)?;
    match format {
        OutputFormat::Csv => report.write_csv(&mut w)?,
        OutputFormat::Json => report.write_json(&mut w)?,
    }
    finish(w, &args.out)?;

    if let (Some(path), Some(fmt)) = (&args.histograms, hist_format) {
        let mut w = create(path)?;
        match fmt {
            OutputFormat::Csv => report.write_histograms_csv(&mut w)?,
            OutputFormat::Json => report.write_histograms_json(&mut w)?,
        }
        finish(w, path)?;
    }
    Ok(())
}

/// Parses `--methods`; the baseline is always first.
pub fn parse_methods(list: &str) -> Result<Vec<Option<Method>>> {
    let mut methods = vec![None];
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = if item.eq_ignore_ascii_case("none") {
            None
        } else {
            Some(item.parse::<Method>()?)
        };
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    Ok(methods)
}

/// Sibling path `<stem>_<suffix>.csv` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let format = OutputFormat::from_path(&args.out)?;
    let methods = parse_methods(&args.methods)?;
    let table = load_csv_with(&args.input, &CsvOptions::new(&args.label_col))?;
    let spec = SplitSpec {
        train_fraction: args.train_frac,
        repeats: args.repeats,
        seed: args.seed,
    };
    let sampler = SamplerConfig {
        k: args.k,
        lambda_mode: args.lambda_mode,
        scale: !args.no_scale,
        ..SamplerConfig::new(Method::Smote, args.seed)
    };
    let forest = ForestParams {
        n_trees: args.trees,
        mtry: args.mtry,
        ..ForestParams::default()
    };
    let comparison = compare_methods(&table, &spec, &methods, &sampler, &forest)?;

    match format {
        OutputFormat::Json => {
            let mut w = create(&args.out)?;
            comparison.write_json(&mut w)?;
            finish(w, &args.out)
        }
        OutputFormat::Csv => {
            let mut w = create(&args.out)?;
            comparison.write_sensitivity_csv(&mut w)?;
            finish(w, &args.out)?;
            let acc = sibling(&args.out, "accuracy");
            let mut w = create(&acc)?;
            comparison.write_accuracy_csv(&mut w)?;
            finish(w, &acc)?;
            let reps = sibling(&args.out, "repeats");
            let mut w = create(&reps)?;
            comparison.write_repeats_csv(&mut w)?;
            finish(w, &reps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn seed_is_required() {
        let err = Cli::try_parse_from([
            "synthsample", "resample", "--input", "a.csv", "--method", "smote", "--out", "b.csv",
        ])
        .unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::MissingRequiredArgument);
        let err = Cli::try_parse_from(["synthsample", "evaluate", "--input", "a.csv", "--out", "b.json"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::MissingRequiredArgument);
    }

    #[test]
    fn unknown_method_is_a_usage_error() {
        let err = Cli::try_parse_from([
            "synthsample", "resample", "--input", "a.csv", "--method", "smite", "--seed", "1", "--out", "b.csv",
        ])
        .unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::ValueValidation);
    }

    #[test]
    fn methods_list_always_starts_with_baseline() {
        assert_eq!(parse_methods("none").unwrap(), [None]);
        assert_eq!(
            parse_methods("smote, adasyn,smote").unwrap(),
            [None, Some(Method::Smote), Some(Method::Adasyn)]
        );
        assert!(parse_methods("smote,bogus").is_err());
    }

    #[test]
    fn formats_follow_extension() {
        assert_eq!(OutputFormat::from_path(Path::new("x/r.CSV")).unwrap(), OutputFormat::Csv);
        assert_eq!(OutputFormat::from_path(Path::new("r.json")).unwrap(), OutputFormat::Json);
        assert!(OutputFormat::from_path(Path::new("r.txt")).is_err());
        assert_eq!(sibling(Path::new("out/t2.csv"), "accuracy"), Path::new("out/t2_accuracy.csv"));
    }
}
