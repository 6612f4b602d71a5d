//! Thin command-line front end. Every subcommand accepts `--config FILE`, a
//! flat TOML file whose keys are the long flag names with `-` replaced by
//! `_`; flags override file values.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num::rational::Ratio;
use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use ugalearn::experiment::{self, ExperimentConfig, FitnessSource, TraceTable};
use ugalearn::oracle::parse_ratio;
use ugalearn::{Error, IndexSet, OracleSpec, Preset, Result};

#[derive(Parser)]
#[command(name = "ugalearn", version, about = "GA learning of noisy parities")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Seeded GA runs; writes a trace CSV and prints a summary JSON.
    Simulate(SimulateArgs),
    /// Boosted learning of the essential loci.
    Learn(LearnArgs),
    /// Global null tests and band summaries over a trace CSV.
    Stats(StatsArgs),
    /// Exhaustive partition effect of an index set.
    SchemaEffect(SchemaArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Essential loci, e.g. `1..7` or `2,4,9`.
    #[arg(long = "K")]
    essential: Option<String>,
    /// Noise rate, e.g. `1/5`.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long)]
    generations: Option<u32>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    track_loci: Option<String>,
    /// Trace CSV path; stdout when absent (the summary then goes to stderr).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "K")]
    essential: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// `paper` or `fast`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// Trace CSV written by `simulate`.
    input: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    essential_loci: Option<String>,
    #[arg(long)]
    nonessential_loci: Option<String>,
    #[arg(long)]
    generation: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SchemaArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// `parity` or `table-file`.
    #[arg(long)]
    function: Option<String>,
    /// Loci of the parity (default: all).
    #[arg(long = "K")]
    essential: Option<String>,
    /// Fitness table for `--function table-file`.
    #[arg(long)]
    table_file: Option<PathBuf>,
    #[arg(long)]
    index_set: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Config file values, consulted when a flag is absent.
struct FileConfig {
    path: Option<PathBuf>,
    table: Table,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let table = match path {
            Some(p) => std::fs::read_to_string(p)?
                .parse::<Table>()
                .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
            None => Table::new(),
        };
        Ok(FileConfig { path: path.map(Path::to_path_buf), table })
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        self.table
            .get(key)
            .map(|v| v.clone().try_into().map_err(|e| Error::Parse(format!("config key {key}: {e}"))))
            .transpose()
    }

    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    /// Index sets may be written as `"1..7"` or `[1, 2, 3]`.
    fn index_set(&self, flag: Option<&str>, key: &str) -> Result<Option<IndexSet>> {
        if let Some(s) = flag {
            return s.parse().map(Some);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => s.parse().map(Some),
            Some(_) => self.get(key),
        }
    }

    /// Ratios may be written as `"1/5"`, or as `<key>_num` / `<key>_den`.
    fn ratio(&self, flag: Option<&str>, key: &str) -> Result<Option<Ratio<u64>>> {
        if let Some(s) = flag {
            return parse_ratio(s).map(Some);
        }
        if let Some(v) = self.table.get(key) {
            return match v {
                Value::String(s) => parse_ratio(s).map(Some),
                Value::Float(f) => parse_ratio(&f.to_string()).map(Some),
                _ => Err(Error::Parse(format!("config key {key}: expected a ratio string"))),
            };
        }
        match (self.get::<u64>(&format!("{key}_num"))?, self.get::<u64>(&format!("{key}_den"))?) {
            (Some(num), Some(den)) if den > 0 => Ok(Some(Ratio::new(num, den))),
            (None, None) => Ok(None),
            _ => Err(Error::Parse(format!("config keys {key}_num/{key}_den are incomplete"))),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Learn(a) => learn(a),
        Cmd::Stats(a) => stats(a),
        Cmd::SchemaEffect(a) => schema_effect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Argument(_) | Error::Index { .. } | Error::Parse(_) => 2,
                Error::Capability(_) => 3,
                _ => 1,
            })
        }
    }
}

fn broken_pipe(e: &Error) -> bool {
    let io = match e {
        Error::Io(io) => io,
        Error::Csv(c) => match c.kind() {
            csv::ErrorKind::Io(io) => io,
            _ => return false,
        },
        _ => return false,
    };
    io.kind() == io::ErrorKind::BrokenPipe
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => Err(Error::Argument("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::Argument(e.to_string()))?
            .install(f),
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => print_stdout(&text)?,
    }
    Ok(())
}

/// A closed pipe (`| head`) is not an error worth reporting.
fn print_stdout(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let mut cfg = ExperimentConfig::paper(100, 0);
    let n = file.pick(a.n, "n")?.unwrap_or(cfg.oracle.n);
    let essential = file.index_set(a.essential.as_deref(), "K")?.unwrap_or(cfg.oracle.essential.clone());
    cfg.oracle.k = file.pick(a.k, "k")?.unwrap_or(essential.len());
    cfg.oracle.n = n;
    cfg.oracle.essential = essential;
    if let Some(f) = file.get::<String>("f")? {
        cfg.oracle.f = f;
    }
    if let Some(eta) = file.ratio(a.eta.as_deref(), "eta")? {
        cfg.oracle.eta_num = *eta.numer();
        cfg.oracle.eta_den = *eta.denom();
    }
    cfg.pop_size = file.pick(a.pop_size, "pop_size")?.unwrap_or(cfg.pop_size);
    cfg.generations = file.pick(a.generations, "generations")?.unwrap_or(cfg.generations);
    cfg.mutation_rate = file.pick(a.mutation_rate, "mutation_rate")?.unwrap_or(cfg.mutation_rate);
    cfg.runs = file.pick(a.runs, "runs")?.unwrap_or(cfg.runs);
    cfg.seed = file.pick(a.seed, "seed")?.unwrap_or(cfg.seed);
    cfg.track_loci = match file.index_set(a.track_loci.as_deref(), "track_loci")? {
        Some(t) => t,
        None => IndexSet::new(vec![1, n])?,
    };
    let out = file.pick(a.out, "out")?;
    let jobs = file.pick(a.jobs, "jobs")?;

    let summary = with_jobs(jobs, || match &out {
        Some(path) => experiment::simulate(&cfg, BufWriter::new(File::create(path)?)),
        None => experiment::simulate(&cfg, io::stdout().lock()),
    })?;
    let mut json = serde_json::to_value(&summary)?;
    json["config_file"] = serde_json::to_value(&file.path)?;
    json["trace_path"] = serde_json::to_value(&out)?;
    let text = serde_json::to_string_pretty(&json)?;
    if out.is_some() {
        print_stdout(&text)?;
    } else {
        writeln!(io::stderr(), "{text}")?;
    }
    Ok(())
}

fn learn(a: LearnArgs) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let n = file.pick(a.n, "n")?.unwrap_or(8);
    let essential = match file.index_set(a.essential.as_deref(), "K")? {
        Some(k) => k,
        None => IndexSet::first(n.saturating_sub(1)),
    };
    let eta = file.ratio(a.eta.as_deref(), "eta")?.unwrap_or(Ratio::new(1, 5));
    let epsilon = file.ratio(a.epsilon.as_deref(), "epsilon")?.unwrap_or(Ratio::new(1, 8));
    let seed = file.pick(a.seed, "seed")?.unwrap_or(0);
    let preset = Preset::by_name(&file.pick(a.preset, "preset")?.unwrap_or_else(|| "paper".into()))?;
    let out = file.pick(a.out, "out")?;
    let jobs = file.pick(a.jobs, "jobs")?;
    let spec = OracleSpec::parity(n, essential, eta)?;
    let report = with_jobs(jobs, || experiment::learn(&spec, epsilon, seed, preset))?;
    let mut json = serde_json::to_value(&report)?;
    json["config_file"] = serde_json::to_value(&file.path)?;
    emit_json(&json, out.as_deref())
}

fn stats(a: StatsArgs) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let input: PathBuf = file
        .pick(a.input, "input")?
        .ok_or_else(|| Error::Argument("no trace CSV given".into()))?;
    let alpha = file.pick(a.alpha, "alpha")?.unwrap_or(1e-100);
    let essential = file
        .index_set(a.essential_loci.as_deref(), "essential_loci")?
        .unwrap_or(IndexSet::new(vec![1])?);
    let nonessential = file
        .index_set(a.nonessential_loci.as_deref(), "nonessential_loci")?
        .unwrap_or(IndexSet::new(vec![8])?);
    let generation = file.pick(a.generation, "generation")?;
    let out = file.pick(a.out, "out")?;
    let table = TraceTable::load(&input)?;
    let report = experiment::trace_stats(&table, alpha, &essential, &nonessential, generation)?;
    emit_json(&report, out.as_deref())
}

fn schema_effect(a: SchemaArgs) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let n = file
        .pick(a.n, "n")?
        .ok_or_else(|| Error::Argument("--n is required".into()))?;
    let function = file.pick(a.function, "function")?.unwrap_or_else(|| "parity".into());
    let source = match function.as_str() {
        "parity" => FitnessSource::Parity(file.index_set(a.essential.as_deref(), "K")?),
        "table-file" => FitnessSource::TableFile(
            file.pick(a.table_file, "table_file")?
                .ok_or_else(|| Error::Argument("--function table-file needs --table-file".into()))?,
        ),
        other => return Err(Error::Argument(format!("unknown function {other:?}; use parity or table-file"))),
    };
    let index_set = file
        .index_set(a.index_set.as_deref(), "index_set")?
        .ok_or_else(|| Error::Argument("--index-set is required".into()))?;
    let eta = file.ratio(a.eta.as_deref(), "eta")?;
    let out = file.pick(a.out, "out")?;
    let report = experiment::schema_effect(n, &source, &index_set, eta)?;
    emit_json(&report, out.as_deref())
}
