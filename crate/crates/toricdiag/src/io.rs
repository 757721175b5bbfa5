//! Result files: results table, accumulator records, report and manifest.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toricdiag_core::mc::MomentAccumulator;

use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, CliResult};

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_JSONL: &str = "results.jsonl";
pub const ACCUMULATORS: &str = "accumulators.jsonl";
pub const REPORT: &str = "report.txt";
pub const MANIFEST: &str = "manifest.json";

/// One result. `L` is text so that fits over several sizes can say so.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub quantity: String,
    pub n: u32,
    #[serde(rename = "L")]
    pub l: String,
    pub p: f64,
    #[serde(with = "real")]
    pub value: f64,
    #[serde(with = "real")]
    pub error: f64,
    pub method: String,
    pub seed_base: u64,
    pub chains: usize,
    pub sweeps_thermalize: u64,
    pub sweeps_measure: u64,
}

/// Merged accumulator of one ensemble, with what is needed to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulatorRecord {
    pub ensemble: String,
    pub n: u32,
    #[serde(rename = "L")]
    pub l: usize,
    pub p: f64,
    pub seed_base: u64,
    pub chain_seeds: Vec<u64>,
    pub sweeps_thermalize: u64,
    pub sweeps_measure: u64,
    pub measure_interval: u64,
    pub accumulator: MomentAccumulator,
}

/// Floats that may be infinite or NaN, which JSON cannot hold as numbers.
mod real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub accumulators: Vec<AccumulatorRecord>,
    pub report: String,
    /// Failed expectations or checks; a non-empty list exits with status 1.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn line(&mut self, s: impl AsRef<str>) {
        self.report.push_str(s.as_ref());
        self.report.push('\n');
    }
}

#[derive(Debug, Serialize)]
struct Timing {
    started_unix: u64,
    wall_seconds: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'static str,
    config: String,
    seed_base: u64,
    seed_scheme: &'static str,
    files: Vec<&'static str>,
    failures: &'a [String],
    /// The only entries that differ between identical reruns.
    timing: Timing,
}

const SEED_SCHEME: &str = "chain seed = fold of splitmix64 over (model, L, n, bits of p, chain[, stage tag, stage]) starting from splitmix64(seed_base); xoshiro256++ seeded from it";

fn io<T>(path: &Path, r: std::io::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::io(path, e))
}

pub fn write_rows(path: &Path, format: Format, rows: &[ResultRow]) -> CliResult<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Format(e.to_string()))?;
            for r in rows {
                w.serialize(r).map_err(|e| CliError::Format(e.to_string()))?;
            }
            io(path, w.flush())
        }
        Format::Jsonl => write_jsonl(path, rows),
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> CliResult<()> {
    let mut f = io(path, fs::File::create(path).map(std::io::BufWriter::new))?;
    for it in items {
        let line = serde_json::to_string(it).map_err(|e| CliError::Format(e.to_string()))?;
        io(path, writeln!(f, "{line}"))?;
    }
    io(path, f.flush())
}

pub fn read_rows(path: &Path) -> CliResult<Vec<ResultRow>> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        return read_jsonl(path);
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Format(e.to_string()))?;
    r.deserialize()
        .map(|x| x.map_err(|e| CliError::Format(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let f = io(path, fs::File::open(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = io(path, line)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Format(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

/// Writes every output file of `outcome` into `dir`.
pub fn write_outcome(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    started_unix: u64,
    wall_seconds: f64,
) -> CliResult<Vec<PathBuf>> {
    io(dir, fs::create_dir_all(dir))?;
    let results = match cfg.io.format {
        Format::Csv => RESULTS_CSV,
        Format::Jsonl => RESULTS_JSONL,
    };
    let mut files = vec![results, REPORT];
    write_rows(&dir.join(results), cfg.io.format, &outcome.rows)?;
    io(&dir.join(REPORT), fs::write(dir.join(REPORT), &outcome.report))?;
    if !outcome.accumulators.is_empty() {
        write_jsonl(&dir.join(ACCUMULATORS), &outcome.accumulators)?;
        files.push(ACCUMULATORS);
    }
    files.push(MANIFEST);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        core_version: env!("CARGO_PKG_VERSION"),
        command: cfg.command().name(),
        config: cfg.echo(),
        seed_base: cfg.mc.seed,
        seed_scheme: SEED_SCHEME,
        files: files.clone(),
        failures: &outcome.failures,
        timing: Timing {
            started_unix,
            wall_seconds,
        },
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Format(e.to_string()))?;
    io(&dir.join(MANIFEST), fs::write(dir.join(MANIFEST), text + "\n"))?;
    Ok(files.into_iter().map(|f| dir.join(f)).collect())
}
