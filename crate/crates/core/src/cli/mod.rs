//! Command-line batch runner.

mod emit;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{benchmark, Bench, BenchmarkTable, PRESET_NAMES};
use crate::selectors::{parse_selector_list, SelectorSpec};

pub use emit::{
    emit_table, parse_json, sig4, to_csv, to_json, to_markdown, write_atomic, Format, CSV_HEADER,
    TABLE_ORDER,
};

/// Selectors run when none are given.
pub const DEFAULT_SELECTORS: &str = "epenid,epenid+,mal,mal+,mal*,mal*+,2fcv,5fcv,10fcv,20fcv,loo,\
pen2f,pen5f,pen10f,pen20f,penloo,pen2f+,pen5f+,pen10f+,pen20f+,penloo+";

pub const THREADS_ENV: &str = "VFOLD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "vfold", version, about = "Model-selection benchmarks for histogram regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run benchmarks and write a table.
    Run(RunArgs),
    /// List the built-in scenarios and the selector shorthand.
    List,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// key=value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario name; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub scenario: Vec<String>,
    /// Comma-separated selector shorthand, e.g. `mal,2fcv,penloo+`.
    #[arg(long)]
    pub selectors: Vec<String>,
    /// Replications per scenario.
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, or `auto` (falls back to VFOLD_THREADS).
    #[arg(long)]
    pub threads: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// csv, markdown or json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenarios: Vec<String>,
    pub selectors: Vec<SelectorSpec>,
    pub n_reps: usize,
    pub seed: u64,
    /// `None` uses every available core.
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Default)]
struct Partial {
    scenarios: Option<Vec<String>>,
    selectors: Option<Vec<SelectorSpec>>,
    n_reps: Option<usize>,
    seed: Option<u64>,
    threads: Option<Option<usize>>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), reason: reason.into() }
}

fn resolve_scenario(name: &str) -> Result<String> {
    PRESET_NAMES
        .iter()
        .find(|p| p.eq_ignore_ascii_case(name))
        .map(|p| p.to_string())
        .ok_or_else(|| config_err("scenario", format!("unknown scenario `{name}`")))
}

fn parse_threads(key: &str, s: &str) -> Result<Option<usize>> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(config_err(key, format!("expected a positive count or `auto`, got `{s}`"))),
        Ok(t) => Ok(Some(t)),
    }
}

fn parse_number<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| config_err(key, format!("not a valid number: `{s}`")))
}

fn selectors(key: &str, lists: &[String]) -> Result<Vec<SelectorSpec>> {
    let mut out = Vec::new();
    for l in lists {
        out.extend(parse_selector_list(l).map_err(|e| config_err(key, e.to_string()))?);
    }
    Ok(out)
}

/// Reads a flat `key = value` file; list keys may repeat.
fn parse_config_file(text: &str) -> Result<Partial> {
    let mut p = Partial::default();
    let mut scen = Vec::new();
    let mut sel = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(&format!("line {}", lineno + 1), "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "scenario" | "scenarios" => {
                for s in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    scen.push(resolve_scenario(s)?);
                }
            }
            "selector" | "selectors" => sel.push(value.to_string()),
            "N" => p.n_reps = Some(parse_number(key, value)?),
            "seed" => p.seed = Some(parse_number(key, value)?),
            "threads" => p.threads = Some(parse_threads(key, value)?),
            "output" => p.output = Some(PathBuf::from(value)),
            "format" => p.format = Some(value.parse()?),
            other => return Err(config_err(other, "unknown key")),
        }
    }
    if !scen.is_empty() {
        p.scenarios = Some(scen);
    }
    if !sel.is_empty() {
        p.selectors = Some(selectors("selectors", &sel)?);
    }
    Ok(p)
}

impl RunConfig {
    /// Merges flags over the config file over defaults.
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err("config", format!("{}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => Partial::default(),
        };
        let scenarios = if args.scenario.is_empty() {
            file.scenarios.ok_or_else(|| config_err("scenario", "no scenario given"))?
        } else {
            args.scenario.iter().map(|s| resolve_scenario(s.trim())).collect::<Result<Vec<_>>>()?
        };
        let selectors = if args.selectors.is_empty() {
            match file.selectors {
                Some(s) => s,
                None => parse_selector_list(DEFAULT_SELECTORS)?,
            }
        } else {
            selectors("selectors", &args.selectors)?
        };
        let n_reps = args.n.or(file.n_reps).unwrap_or(1000);
        if n_reps < 2 {
            return Err(config_err("N", "need at least 2 replications"));
        }
        let threads = match (&args.threads, file.threads) {
            (Some(t), _) => parse_threads("threads", t)?,
            (None, Some(t)) => t,
            (None, None) => match std::env::var(THREADS_ENV) {
                Ok(t) => parse_threads(THREADS_ENV, &t)?,
                Err(_) => None,
            },
        };
        let format = match &args.format {
            Some(f) => f.parse()?,
            None => file.format.unwrap_or(Format::Csv),
        };
        Ok(RunConfig {
            scenarios,
            selectors,
            n_reps,
            seed: args.seed.or(file.seed).unwrap_or(0),
            threads,
            output: args.output.clone().or(file.output),
            format,
        })
    }
}

/// Parses a full command line (program name first) into a run configuration.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| config_err("arguments", e.to_string()))?;
    match cli.command {
        Command::Run(args) => RunConfig::from_args(&args),
        Command::List => Err(config_err("arguments", "`list` takes no run configuration")),
    }
}

/// Runs every scenario; failures are collected, not fatal.
pub fn execute(cfg: &RunConfig) -> (Vec<BenchmarkTable>, Vec<(String, Error)>) {
    let mut tables = Vec::new();
    let mut failures = Vec::new();
    for name in &cfg.scenarios {
        let start = Instant::now();
        let result = Bench::preset(name).and_then(|b| benchmark(&b, &cfg.selectors, cfg.n_reps, cfg.seed, cfg.threads));
        match result {
            Ok(t) => {
                eprintln!(
                    "{name}: {} selectors x {} replications in {:.1}s",
                    cfg.selectors.len(),
                    cfg.n_reps,
                    start.elapsed().as_secs_f64()
                );
                tables.push(t);
            }
            Err(e) => {
                eprintln!("{name}: failed: {e}");
                failures.push((name.clone(), e));
            }
        }
    }
    (tables, failures)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn list() -> String {
    let mut s = String::from("scenarios:\n");
    for name in PRESET_NAMES {
        if let Ok(sc) = crate::experiments::RegressionScenario::preset(name) {
            s.push_str(&format!("  {:<9} s={} sigma={} n={} models={}\n", name, sc.s, sc.sigma, sc.n, sc.collection));
        }
    }
    s.push_str(
        "selectors:\n  mal, mal*, {V}fcv, loo, pen{V}f, penloo, cpen{V}f, cor{V}f, corloo, epenid, oracle\n  \
         suffixes: + (overpenalize by 5/4), @c=<x> (penalty constant), @o=<x> (overpenalization factor)\n",
    );
    s
}

/// Entry point of the `vfold` binary.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let args = match cli.command {
        Command::List => {
            print!("{}", list());
            return ExitCode::SUCCESS;
        }
        Command::Run(args) => args,
    };
    let cfg = match RunConfig::from_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (tables, failures) = execute(&cfg);
    if let Err(e) = write_output(cfg.output.as_deref(), &emit_table(&tables, cfg.format)) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} of {} scenarios failed:", failures.len(), cfg.scenarios.len());
        for (name, e) in &failures {
            eprintln!("  {name}: {e}");
        }
        ExitCode::FAILURE
    }
}
