//! Command-line front end: run the spectral tests on CSV data, simulate the
//! catalogue models, estimate power/size tables, and render barcode plots.
//!
//! Any long flag can also be supplied as a `key=value` line in a config file
//! passed with `--config`; explicit flags win over the file.
//!
//! Exit codes: 0 = ran, 2 = input error, 3 = numeric failure.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wavespec::barcode::{render_barcode, BarcodeArtifact};
use wavespec::harness::{run_table, ExperimentSpec};
use wavespec::htest::{Correction, DfMode, TestConfig, TestKind};
use wavespec::io::{
    ingest_csv, parse_rejection_csv, preprocess, run_test_on_dataset, CsvFormat, TruncationMode,
};
use wavespec::models::{simulate, ModelId, ModelName};
use wavespec::RandomSource;

#[derive(Parser)]
#[command(name = "wavespec", version, about = "Wavelet-spectral tests for grouped time series")]
struct Cli {
    /// key=value file supplying defaults for any long flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one test on a CSV of grouped series
    Test(TestArgs),
    /// Emit simulated series from a catalogue model as wide CSV
    Simulate(SimulateArgs),
    /// Estimate empirical power for two-group models
    Power(HarnessArgs),
    /// Estimate empirical size for single-group models
    Size(HarnessArgs),
    /// Re-render a barcode SVG from a saved rejection CSV
    Barcode(BarcodeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TestArg {
    Wst,
    Ft,
    Hft,
    Ht,
}

impl From<TestArg> for TestKind {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::Wst => TestKind::Wst,
            TestArg::Ft => TestKind::Ft,
            TestArg::Hft => TestKind::Hft,
            TestArg::Ht => TestKind::Ht,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CorrectionArg {
    Bonferroni,
    Fdr,
}

impl From<CorrectionArg> for Correction {
    fn from(c: CorrectionArg) -> Self {
        match c {
            CorrectionArg::Bonferroni => Correction::Bonferroni,
            CorrectionArg::Fdr => Correction::BhFdr,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DfArg {
    Pooled,
    Welch,
    Minn,
}

impl From<DfArg> for DfMode {
    fn from(d: DfArg) -> Self {
        match d {
            DfArg::Pooled => DfMode::Pooled,
            DfArg::Welch => DfMode::Welch,
            DfArg::Minn => DfMode::ConservativeMinN,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Wide,
    Long,
}

#[derive(Args)]
struct TestArgs {
    /// Input CSV path
    #[arg(long)]
    input: Option<PathBuf>,
    /// CSV layout
    #[arg(long)]
    format: Option<FormatArg>,
    /// Which test to run
    #[arg(long)]
    test: Option<TestArg>,
    #[arg(long)]
    correction: Option<CorrectionArg>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Degrees-of-freedom rule for the t-based tests
    #[arg(long)]
    df: Option<DfArg>,
    /// Dyadic truncation: head, tail, or segment:<start>
    #[arg(long)]
    truncate: Option<String>,
    /// Where to write rejections.csv, barcode.svg, summary.txt
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model id, P1..P12 or M1..M5
    #[arg(long)]
    model: Option<String>,
    /// Series per group
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HarnessArgs {
    /// Comma-separated model ids
    #[arg(long)]
    models: Option<String>,
    /// Comma-separated tests (wst,ft,hft,ht)
    #[arg(long)]
    tests: Option<String>,
    /// Comma-separated corrections (bonferroni,fdr)
    #[arg(long)]
    corrections: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    df: Option<DfArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rayon worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Where to write table.txt and table.csv (stdout only when absent)
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BarcodeArgs {
    /// rejections.csv produced by the test subcommand
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Number of wavelet levels in the analysed grid
    #[arg(long)]
    levels: Option<usize>,
    /// Series length of the analysed grid
    #[arg(long)]
    length: Option<usize>,
    /// Output SVG path
    #[arg(long)]
    out: Option<PathBuf>,
}

/// key=value config file contents.
struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    bail!("config line {} is not key=value: {line:?}", lineno + 1);
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    /// Flag value if given, else the config entry, else `default`.
    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(flag, key)?
            .map_or(Ok(default), |v| Ok(v))
    }

    fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config {key}={raw}: {e}")),
            None => Ok(None),
        }
    }

    fn or_enum<T: ValueEnum + Copy>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.0.get(key) {
            Some(raw) => T::from_str(raw, true)
                .map_err(|e| anyhow::anyhow!("config {key}={raw}: {e}")),
            None => Ok(default),
        }
    }

    fn require<T: Clone>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.opt(flag, key)?
            .ok_or_else(|| anyhow::anyhow!("missing required --{key} (or config {key}=...)"))
    }
}

fn test_config(
    cfg: &Config,
    correction: Option<CorrectionArg>,
    alpha: Option<f64>,
    df: Option<DfArg>,
) -> Result<TestConfig> {
    let alpha = cfg.or(alpha, "alpha", 0.05)?;
    if !(0.0 < alpha && alpha < 1.0) {
        bail!("alpha must be in (0, 1), got {alpha}");
    }
    Ok(TestConfig {
        alpha,
        correction: cfg
            .or_enum(correction, "correction", CorrectionArg::Bonferroni)?
            .into(),
        df_mode: cfg.or_enum(df, "df", DfArg::Pooled)?.into(),
        ..TestConfig::default()
    })
}

fn parse_truncation(raw: &str) -> Result<TruncationMode> {
    match raw {
        "head" => Ok(TruncationMode::TruncateHead),
        "tail" => Ok(TruncationMode::TruncateTail),
        other => {
            let Some(start) = other.strip_prefix("segment:") else {
                bail!("truncate must be head, tail, or segment:<start>, got {other:?}");
            };
            Ok(TruncationMode::Segment(
                start.parse().context("segment start")?,
            ))
        }
    }
}

fn cmd_test(cfg: &Config, args: TestArgs) -> Result<()> {
    let input: PathBuf = cfg.require(args.input, "input")?;
    let format = match cfg.or_enum(args.format, "format", FormatArg::Wide)? {
        FormatArg::Wide => CsvFormat::Wide,
        FormatArg::Long => CsvFormat::Long,
    };
    let test: TestKind = cfg.or_enum(args.test, "test", TestArg::Ft)?.into();
    let tcfg = test_config(cfg, args.correction, args.alpha, args.df)?;
    let truncate = parse_truncation(&cfg.or(args.truncate, "truncate", "head".to_string())?)?;
    let dataset = preprocess(&ingest_csv(&input, format)?, truncate)?;
    let out_dir = cfg.opt(args.out_dir, "out_dir")?;
    let artifacts = run_test_on_dataset(&dataset, test, &tcfg, out_dir.as_deref())?;
    print!("{}", artifacts.summary);
    if let Some(dir) = out_dir {
        eprintln!("artifacts written to {}", dir.display());
    }
    Ok(())
}

fn cmd_simulate(cfg: &Config, args: SimulateArgs) -> Result<()> {
    let model: ModelName = cfg.require(args.model, "model")?.parse()?;
    let n = cfg.or(args.n, "n", 5)?;
    let seed = cfg.or(args.seed, "seed", 0)?;
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for group in [1u8, 2] {
        for i in 0..n {
            let stream = (group as u64 - 1) * n as u64 + i as u64;
            let mut rs = RandomSource::new(seed, stream);
            let series = simulate(ModelId::new(model, group)?, &mut rs)?;
            columns.push((format!("g{group}:{model}_r{i}"), series));
        }
    }
    let mut csv = String::from("time");
    for (name, _) in &columns {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    let t_len = columns[0].1.len();
    for t in 0..t_len {
        csv.push_str(&t.to_string());
        for (_, series) in &columns {
            csv.push_str(&format!(",{:.17e}", series[t]));
        }
        csv.push('\n');
    }
    match cfg.opt(args.out, "out")? {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn parse_list<T: ValueEnum>(raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|item| {
            T::from_str(item.trim(), true).map_err(|e| anyhow::anyhow!("{item:?}: {e}"))
        })
        .collect()
}

fn cmd_harness(cfg: &Config, args: HarnessArgs, default_models: &str) -> Result<()> {
    if let Some(threads) = cfg.opt(args.threads, "threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("rayon thread pool")?;
    }
    let models: Vec<ModelName> = cfg
        .or(args.models, "models", default_models.to_string())?
        .split(',')
        .map(|m| m.trim().parse::<ModelName>().map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;
    let tests: Vec<TestArg> = parse_list(&cfg.or(args.tests, "tests", "wst,ft,hft,ht".to_string())?)?;
    let corrections: Vec<CorrectionArg> =
        parse_list(&cfg.or(args.corrections, "corrections", "bonferroni,fdr".to_string())?)?;
    let n = cfg.or(args.n, "n", 25)?;
    let reps = cfg.or(args.reps, "reps", 200)?;
    let seed = cfg.or(args.seed, "seed", 0)?;
    let base = test_config(cfg, None, args.alpha, args.df)?;
    let mut specs = Vec::new();
    for &model in &models {
        for &test in &tests {
            for &correction in &corrections {
                specs.push(ExperimentSpec {
                    model,
                    test: test.into(),
                    n_per_group: n,
                    reps,
                    seed,
                    config: TestConfig {
                        correction: correction.into(),
                        ..base.clone()
                    },
                });
            }
        }
    }
    let table = run_table(&specs)?;
    print!("{}", table.text);
    if let Some(dir) = cfg.opt(args.out_dir, "out_dir")? {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("table.txt"), &table.text)?;
        std::fs::write(dir.join("table.csv"), &table.csv)?;
        eprintln!("table written to {}", dir.display());
    }
    Ok(())
}

fn cmd_barcode(cfg: &Config, args: BarcodeArgs) -> Result<()> {
    let mask_path: PathBuf = cfg.require(args.mask, "mask")?;
    let levels = cfg.require(args.levels, "levels")?;
    let length = cfg.require(args.length, "length")?;
    let rows = parse_rejection_csv(&std::fs::read_to_string(&mask_path)?)?;
    let mut mask = vec![vec![false; length]; levels];
    for (level, time, rejected) in rows {
        if level == 0 || level > levels || time >= length {
            bail!("mask cell ({level}, {time}) outside a {levels}x{length} grid");
        }
        mask[level - 1][time] = rejected;
    }
    let svg = render_barcode(&BarcodeArtifact::new(levels, length, mask));
    match cfg.opt(args.out, "out")? {
        Some(path) => std::fs::write(path, svg)?,
        None => print!("{svg}"),
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Test(args) => cmd_test(&cfg, args),
        Command::Simulate(args) => cmd_simulate(&cfg, args),
        Command::Power(args) => cmd_harness(&cfg, args, "P1,P2,P3,P6,P7"),
        Command::Size(args) => cmd_harness(&cfg, args, "M1,M2,M3,M4,M5"),
        Command::Barcode(args) => cmd_barcode(&cfg, args),
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    use wavespec::Error::*;
    match err.downcast_ref::<wavespec::Error>() {
        Some(IllConditioned(_) | Domain(_)) => 3,
        Some(_) => 2,
        None => 2,
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code(&err));
        }
    }
}
