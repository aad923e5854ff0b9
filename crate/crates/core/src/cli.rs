//! Command-line surface: `index`, `measure`, `replay`, `synth`, `correlate`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::classifier::{classify, contrasts, DEFAULT_TIE_EPSILON};
use crate::corpus_index::{
    build_index_from_paths, write_atomic, FrequencyIndex, IndexError, TokenizerConfig,
};
use crate::estimator::{Distribution3, Priors, DEFAULT_QUANTILE};
use crate::measures::pearson_r;
use crate::morphology::AffixInventory;
use crate::pipeline::{report_csv, run_inventory, trajectory_csv, trials_csv, RunSettings};
use crate::sampler::{stream_seed, SampleConfig, Weighting, RNG_ALGORITHM};
use crate::synthetic::{generate_corpus, recovery_error, SynthConfig};

pub const TABLE_EN: &str = include_str!("../data/reference_en.csv");
pub const TABLE_RU: &str = include_str!("../data/reference_ru.csv");

pub const FIXTURE_HEADER: &str =
    "group,prefix,product.,X1=0,X1=1,X1=2,contr._1,diff._1,contr._2,diff._2";

/// Published tables are rounded to three decimals.
pub const REPLAY_PRODUCT_TOL: f64 = 0.002;
pub const REPLAY_DIFF_TOL: f64 = 0.001;
pub const REPLAY_SUM_TOL: f64 = 0.0015;
const FLOAT_SLACK: f64 = 1e-9;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "affixprod",
    version,
    about = "Probabilistic affix productivity toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a token-frequency index from plaintext files.
    Index(IndexArgs),
    /// Measure productivity of every prefix in an inventory.
    Measure(MeasureArgs),
    /// Re-check published final distributions against the classifier.
    Replay(ReplayArgs),
    /// Generate a synthetic corpus with known attachment probability.
    Synth(SynthArgs),
    /// Pearson correlation between two numeric columns of a CSV report.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// UTF-8 plaintext corpus files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value = "corpus")]
    pub label: String,
    /// Do not lowercase tokens.
    #[arg(long)]
    pub keep_case: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BuiltinLang {
    En,
    Ru,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    TokenFrequency,
    Uniform,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Inventory file; defaults to the bundled English prefixes.
    #[arg(long, conflicts_with = "builtin_inventory")]
    pub inventory: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin_inventory: Option<BuiltinLang>,
    /// Stoplist file; defaults to the bundled English list.
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
    #[arg(short, long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value_t = DEFAULT_QUANTILE)]
    pub quantile: f64,
    /// JSON file with `initial`, `transition` and/or `ess`.
    #[arg(long)]
    pub priors: Option<PathBuf>,
    /// Equivalent sample size; overrides the priors file.
    #[arg(long)]
    pub ess: Option<f64>,
    #[arg(long, value_enum, default_value = "token-frequency")]
    pub weighting: WeightingArg,
    #[arg(long, default_value_t = 3)]
    pub min_length: usize,
    /// Overrides the inventory's residual guard.
    #[arg(long)]
    pub min_residual: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TIE_EPSILON)]
    pub tie_epsilon: f64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Fixture CSV files.
    pub fixtures: Vec<PathBuf>,
    /// Replay a bundled table instead.
    #[arg(long, value_enum)]
    pub builtin: Vec<BuiltinLang>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2_000)]
    pub vocab: usize,
    #[arg(long, default_value_t = 0.5)]
    pub pi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub zipf: f64,
    #[arg(long, default_value_t = 200_000)]
    pub tokens: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "un")]
    pub affix: String,
    #[arg(long, default_value_t = 0.3)]
    pub factor: f64,
    /// Corpus output path.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Ground-truth CSV output path.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Also run the estimator on this many seeds and report the error.
    #[arg(long)]
    pub recover: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Index(a) => cmd_index(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Correlate(a) => cmd_correlate(a),
    }
}

fn cmd_index(args: IndexArgs) -> Result<(), CliError> {
    for p in &args.inputs {
        if !p.is_file() {
            return Err(CliError::usage(format!("{}: no such file", p.display())));
        }
    }
    let cfg = TokenizerConfig {
        lowercase: !args.keep_case,
        ..TokenizerConfig::without_stoplist()
    };
    let index = build_index_from_paths(&args.inputs, &cfg, &args.label).map_err(|e| match e {
        IndexError::Io { .. } => CliError::usage(e.to_string()),
        _ => CliError::runtime(e.to_string()),
    })?;
    index
        .save(&args.output)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    println!("{index}");
    Ok(())
}

fn cmd_measure(args: MeasureArgs) -> Result<(), CliError> {
    if args.n < 2 {
        return Err(CliError::usage("sample size must be at least 2"));
    }
    if !(0.0..=1.0).contains(&args.quantile) {
        return Err(CliError::usage("quantile must lie in [0, 1]"));
    }
    let index = FrequencyIndex::load(&args.index).map_err(|e| CliError::usage(e.to_string()))?;
    let (inventory, inventory_src) = match (&args.inventory, args.builtin_inventory) {
        (Some(p), _) => (
            AffixInventory::load(p)
                .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?,
            p.display().to_string(),
        ),
        (None, Some(BuiltinLang::Ru)) => (AffixInventory::russian(), "builtin:ru".to_string()),
        (None, _) => (AffixInventory::english(), "builtin:en".to_string()),
    };
    let inventory = match args.min_residual {
        Some(0) => return Err(CliError::usage("min_residual must be at least 1")),
        Some(m) => inventory.with_min_residual(m),
        None => inventory,
    };
    let mut filter = TokenizerConfig {
        min_length: args.min_length,
        ..TokenizerConfig::default()
    };
    if let Some(p) = &args.stoplist {
        filter
            .load_stoplist(p)
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    filter
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let mut priors = match &args.priors {
        Some(p) => Priors::load(p).map_err(|e| CliError::usage(e.to_string()))?,
        None => Priors::default(),
    };
    if let Some(ess) = args.ess {
        priors.ess = ess;
    }
    priors
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;

    let settings = RunSettings {
        sample: SampleConfig {
            n: args.n,
            master_seed: args.seed,
            weighting: match args.weighting {
                WeightingArg::TokenFrequency => Weighting::TokenFrequency,
                WeightingArg::Uniform => Weighting::Uniform,
            },
        },
        quantile: args.quantile,
        priors,
        tie_epsilon: args.tie_epsilon,
    };
    let runs = run_inventory(&index, &inventory, &filter, &settings)
        .map_err(|e| CliError::runtime(e.to_string()))?;

    let mut files: Vec<(PathBuf, String)> = vec![(args.out.join("report.csv"), report_csv(&runs))];
    for r in &runs {
        let form = r.affix.form();
        files.push((
            args.out.join("trajectories").join(format!("{form}.csv")),
            trajectory_csv(&r.sequence),
        ));
        files.push((
            args.out.join("trials").join(format!("{form}.csv")),
            trials_csv(r),
        ));
    }
    let stream_seeds: BTreeMap<String, u64> = inventory
        .affixes()
        .iter()
        .map(|a| (a.display(), stream_seed(args.seed, a.form())))
        .collect();
    let run_json = json!({
        "tool": "affixprod",
        "version": env!("CARGO_PKG_VERSION"),
        "index": args.index.display().to_string(),
        "index_label": index.meta().label,
        "index_tokenizer": index.meta().tokenizer,
        "index_total_tokens": index.total_tokens(),
        "inventory": inventory_src,
        "min_residual": inventory.min_residual(),
        "stoplist": args.stoplist.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "builtin:en".into()),
        "min_length": filter.min_length,
        "settings": settings,
        "rng": RNG_ALGORITHM,
        "stream_seeds": stream_seeds,
    });
    files.push((
        args.out.join("run.json"),
        serde_json::to_string_pretty(&run_json).expect("json") + "\n",
    ));
    write_all_or_nothing(&files).map_err(|e| CliError::runtime(e.to_string()))?;
    eprintln!("wrote {} prefixes to {}", runs.len(), args.out.display());
    Ok(())
}

/// Writes every file atomically; on failure removes those already written.
fn write_all_or_nothing(files: &[(PathBuf, String)]) -> std::io::Result<()> {
    let mut written: Vec<&Path> = Vec::new();
    let result = files.iter().try_for_each(|(path, body)| {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        write_atomic(path, body.as_bytes())?;
        written.push(path);
        Ok(())
    });
    if result.is_err() {
        for p in written {
            let _ = std::fs::remove_file(p);
        }
    }
    result
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayRow {
    pub line: usize,
    pub prefix: String,
    pub passed: bool,
    pub detail: String,
}

/// Checks every fixture row: group label and contrast pairs exactly,
/// `product.` within 0.002, diffs within 0.001.
pub fn replay_fixture(text: &str) -> Result<Vec<ReplayRow>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end().starts_with(FIXTURE_HEADER) => {}
        _ => return Err(format!("line 1: expected header {FIXTURE_HEADER:?}")),
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let raw = raw.trim_end();
        if raw.is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split(',').collect();
        if cols.len() < 10 {
            return Err(format!(
                "line {line}: expected 10 columns, found {}",
                cols.len()
            ));
        }
        let f = |k: usize| -> Result<f64, String> {
            cols[k].trim().parse::<f64>().map_err(|_| {
                format!(
                    "line {line}: column {} is not a number: {:?}",
                    k + 1,
                    cols[k]
                )
            })
        };
        let (product, p) = (f(2)?, [f(3)?, f(4)?, f(5)?]);
        let (diff_1, diff_2) = (f(7)?, f(9)?);
        let d = Distribution3::from_rounded(p, REPLAY_SUM_TOL + FLOAT_SLACK)
            .map_err(|e| format!("line {line}: {e}"))?;
        let mut problems = Vec::new();
        let got_product = d.productivity();
        if (got_product - product).abs() > REPLAY_PRODUCT_TOL + FLOAT_SLACK {
            problems.push(format!("product. {got_product:.3} != {product:.3}"));
        }
        let group = classify(&d, DEFAULT_TIE_EPSILON).to_string();
        if group != cols[0] {
            problems.push(format!("group {group} != {}", cols[0]));
        }
        match contrasts(&d, DEFAULT_TIE_EPSILON) {
            Ok(c) => {
                if c.contr_1 != cols[6] || c.contr_2 != cols[8] {
                    problems.push(format!(
                        "contr {}/{} != {}/{}",
                        c.contr_1, c.contr_2, cols[6], cols[8]
                    ));
                }
                if (c.diff_1 - diff_1).abs() > REPLAY_DIFF_TOL + FLOAT_SLACK {
                    problems.push(format!("diff._1 {:.3} != {diff_1:.3}", c.diff_1));
                }
                if (c.diff_2 - diff_2).abs() > REPLAY_DIFF_TOL + FLOAT_SLACK {
                    problems.push(format!("diff._2 {:.3} != {diff_2:.3}", c.diff_2));
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
        rows.push(ReplayRow {
            line,
            prefix: cols[1].to_string(),
            passed: problems.is_empty(),
            detail: if problems.is_empty() {
                format!("group={group} product.={got_product:.3}")
            } else {
                problems.join("; ")
            },
        });
    }
    Ok(rows)
}

fn cmd_replay(args: ReplayArgs) -> Result<(), CliError> {
    let mut sources: Vec<(String, String)> = Vec::new();
    for lang in &args.builtin {
        match lang {
            BuiltinLang::En => sources.push(("builtin:en".into(), TABLE_EN.into())),
            BuiltinLang::Ru => sources.push(("builtin:ru".into(), TABLE_RU.into())),
        }
    }
    for p in &args.fixtures {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
        sources.push((p.display().to_string(), text));
    }
    if sources.is_empty() {
        return Err(CliError::usage(
            "no fixture given (pass a path or --builtin en|ru)",
        ));
    }
    let mut failed = 0usize;
    for (name, text) in sources {
        let rows = replay_fixture(&text).map_err(|e| CliError::usage(format!("{name}: {e}")))?;
        let mut out = String::new();
        for r in &rows {
            let _ = writeln!(
                out,
                "{} {name}:{} {} {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.line,
                r.prefix,
                r.detail
            );
        }
        let ok = rows.iter().filter(|r| r.passed).count();
        let _ = writeln!(out, "{name}: {ok}/{} rows match", rows.len());
        print!("{out}");
        failed += rows.len() - ok;
    }
    if failed > 0 {
        return Err(CliError::runtime(format!("{failed} row(s) failed")));
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let cfg = SynthConfig {
        base_vocab_size: args.vocab,
        pi: args.pi,
        zipf_exponent: args.zipf,
        total_tokens: args.tokens,
        seed: args.seed,
        affix_form: args.affix,
        prefixed_factor: args.factor,
        ..SynthConfig::default()
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    if args.output.is_none() && args.truth.is_none() && args.recover.is_none() {
        return Err(CliError::usage(
            "nothing to do: pass --output, --truth or --recover",
        ));
    }
    if args.output.is_some() || args.truth.is_some() {
        let corpus = generate_corpus(&cfg).map_err(|e| CliError::runtime(e.to_string()))?;
        let mut files = Vec::new();
        if let Some(p) = &args.output {
            files.push((p.clone(), corpus.text.clone()));
        }
        if let Some(p) = &args.truth {
            files.push((p.clone(), corpus.ground_truth_csv()));
        }
        write_all_or_nothing(&files).map_err(|e| CliError::runtime(e.to_string()))?;
        println!(
            "bases={} attached={:.4}",
            corpus.ground_truth.len(),
            corpus.attached_fraction()
        );
    }
    if let Some(n) = args.recover {
        let rec = recovery_error(&cfg, &RunSettings::default(), n)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        println!(
            "pi={} seeds={n} mean_productivity={:.6} abs_error={:.6}",
            cfg.pi, rec.mean_productivity, rec.abs_error
        );
    }
    Ok(())
}

/// Reads two named numeric columns from a comma-separated file with header.
pub fn read_columns(text: &str, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty file")?.split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| format!("no column {name:?}"))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let get = |k: usize| -> Result<f64, String> {
            cols.get(k)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| format!("line {}: column {} is not a number", i + 2, header[k]))
        };
        xs.push(get(ix)?);
        ys.push(get(iy)?);
    }
    Ok((xs, ys))
}

fn cmd_correlate(args: CorrelateArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.report)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.report.display())))?;
    let (xs, ys) = read_columns(&text, &args.x, &args.y)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.report.display())))?;
    let (r, p) = pearson_r(&xs, &ys).map_err(|e| CliError::runtime(e.to_string()))?;
    println!("n={} r={r:.6} p={p:.6}", xs.len());
    Ok(())
}
