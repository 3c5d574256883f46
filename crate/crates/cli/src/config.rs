//! Run configuration: an optional TOML file merged with command-line flags.
//!
//! ```toml
//! format_version = 1
//!
//! [source]
//! kind = "correlated-thermal"
//! n0 = 100.0
//! gamma = 0.7
//! phi = 3.141592653589793
//!
//! [channel]
//! kappa = 0.01
//! w = 1.0
//!
//! [grid]
//! d_min = 0.001
//! d_max = 6.0
//! points = 200
//! log = true
//!
//! [output]
//! include_bound = true
//! oracle_stride = 10
//! threads = 4
//! path = "partial-coherence.csv"
//! ```

use std::path::{Path, PathBuf};

use gaussres::experiments::{ChannelSpec, GridSpec, SweepSpec, FORMAT_VERSION};
use gaussres::SourceSpec;
use serde::Deserialize;
use toml::{Table, Value};

use crate::CliError;

/// Values given on the command line; `None` leaves the file value alone.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub state: Option<String>,
    pub n0: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    pub kappa: Option<f64>,
    pub w: Option<f64>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub points: Option<usize>,
    pub log_grid: bool,
    pub with_bound: bool,
    pub with_oracle: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default)]
    include_bound: bool,
    oracle_stride: Option<usize>,
    threads: Option<usize>,
    path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    format_version: u32,
    source: SourceSpec,
    channel: ChannelSpec,
    grid: GridSpec,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundFile {
    format_version: u32,
    source: Table,
    channel: ChannelSpec,
    grid: GridSpec,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub spec: SweepSpec,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundConfig {
    pub n0: f64,
    pub channel: ChannelSpec,
    pub grid: GridSpec,
    pub out: Option<PathBuf>,
}

fn spec_err(msg: impl Into<String>) -> CliError {
    CliError::Spec(msg.into())
}

fn source_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "correlated-thermal" | "displaced-thermal" => &["n0", "gamma", "phi"],
        "coherent" => &["n0", "phi"],
        "squeezed" | "squeezed-pair" => &["n0", "theta"],
        _ => return None,
    })
}

fn read_file(path: Option<&Path>) -> Result<Table, CliError> {
    let Some(path) = path else {
        let mut t = Table::new();
        t.insert("format_version".into(), Value::Integer(FORMAT_VERSION.into()));
        return Ok(t);
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let table: Table = text
        .parse()
        .map_err(|e| spec_err(format!("{}: {e}", path.display())))?;
    match table.get("format_version") {
        None => Err(spec_err(format!("{}: missing format_version", path.display()))),
        Some(Value::Integer(v)) if *v == i64::from(FORMAT_VERSION) => Ok(table),
        Some(v) => Err(spec_err(format!(
            "{}: format_version {v} is not supported (expected {FORMAT_VERSION})",
            path.display()
        ))),
    }
}

fn section<'a>(root: &'a mut Table, name: &str) -> Result<&'a mut Table, CliError> {
    root.entry(name)
        .or_insert_with(|| Value::Table(Table::new()))
        .as_table_mut()
        .ok_or_else(|| spec_err(format!("`{name}` must be a table")))
}

fn set(t: &mut Table, key: &str, v: Option<Value>) {
    if let Some(v) = v {
        t.insert(key.into(), v);
    }
}

fn float(x: Option<f64>) -> Option<Value> {
    x.map(Value::Float)
}

fn int(x: Option<usize>) -> Result<Option<Value>, CliError> {
    x.map(|n| {
        i64::try_from(n)
            .map(Value::Integer)
            .map_err(|_| spec_err(format!("{n} is too large")))
    })
    .transpose()
}

/// Merges channel, grid and output flags into `root`.
fn merge_common(root: &mut Table, o: &Overrides) -> Result<(), CliError> {
    let channel = section(root, "channel")?;
    set(channel, "kappa", float(o.kappa));
    set(channel, "w", float(o.w));
    let grid = section(root, "grid")?;
    set(grid, "d_min", float(o.d_min));
    set(grid, "d_max", float(o.d_max));
    set(grid, "points", int(o.points)?);
    if o.log_grid {
        grid.insert("log".into(), Value::Boolean(true));
    }
    let output = section(root, "output")?;
    if o.with_bound {
        output.insert("include_bound".into(), Value::Boolean(true));
    }
    set(output, "oracle_stride", int(o.with_oracle)?);
    set(output, "threads", int(o.threads)?);
    set(output, "path", o.out.as_ref().map(|p| Value::String(p.display().to_string())));
    Ok(())
}

fn deserialize<T: for<'de> Deserialize<'de>>(root: Table) -> Result<T, CliError> {
    Value::Table(root).try_into().map_err(|e| spec_err(e.to_string()))
}

fn check_threads(threads: Option<usize>) -> Result<(), CliError> {
    if threads == Some(0) {
        return Err(spec_err("threads must be at least 1"));
    }
    Ok(())
}

pub fn sweep_config(file: Option<&Path>, o: &Overrides) -> Result<SweepConfig, CliError> {
    let mut root = read_file(file)?;
    let source = section(&mut root, "source")?;
    let file_kind = source.get("kind").and_then(Value::as_str).map(str::to_owned);
    let kind = o
        .state
        .clone()
        .or(file_kind.clone())
        .ok_or_else(|| spec_err("no source kind: pass --state or set source.kind"))?;
    let allowed = source_keys(&kind).ok_or_else(|| spec_err(format!("unknown source kind `{kind}`")))?;

    // A kind switched on the command line discards file parameters it does not take.
    if file_kind.as_deref() != Some(kind.as_str()) {
        source.retain(|k, _| k == "kind" || allowed.iter().any(|a| *a == k));
    }
    for key in source.keys() {
        if key != "kind" && !allowed.contains(&key.as_str()) {
            return Err(spec_err(format!("source.{key} does not apply to `{kind}` sources")));
        }
    }
    for (flag, value) in [("n0", o.n0), ("gamma", o.gamma), ("phi", o.phi), ("theta", o.theta)] {
        if value.is_some() && !allowed.contains(&flag) {
            return Err(spec_err(format!("--{flag} does not apply to `{kind}` sources")));
        }
        set(source, flag, float(value));
    }
    source.insert("kind".into(), Value::String(kind));
    merge_common(&mut root, o)?;

    let file: SweepFile = deserialize(root)?;
    debug_assert_eq!(file.format_version, FORMAT_VERSION);
    check_threads(file.output.threads)?;
    let spec = SweepSpec {
        source: file.source,
        channel: file.channel,
        grid: file.grid,
        include_bound: file.output.include_bound,
        oracle_stride: file.output.oracle_stride,
    };
    spec.validate()?;
    Ok(SweepConfig {
        spec,
        threads: file.output.threads,
        out: file.output.path,
    })
}

/// The bound depends on the source only through `n0`; other source keys in
/// the file are ignored.
pub fn bound_config(file: Option<&Path>, o: &Overrides) -> Result<BoundConfig, CliError> {
    let mut root = read_file(file)?;
    let source = section(&mut root, "source")?;
    set(source, "n0", float(o.n0));
    merge_common(&mut root, o)?;

    let file: BoundFile = deserialize(root)?;
    debug_assert_eq!(file.format_version, FORMAT_VERSION);
    let n0 = match file.source.get("n0") {
        Some(Value::Float(x)) => *x,
        Some(Value::Integer(n)) => *n as f64,
        Some(v) => return Err(spec_err(format!("source.n0 = {v} is not a number"))),
        None => return Err(spec_err("missing n0: pass --n0 or set source.n0")),
    };
    if file.output.include_bound || file.output.oracle_stride.is_some() {
        log::info!("bound: ignoring include_bound and oracle_stride");
    }
    // Grid, n0 and channel checks are the ones a sweep applies.
    let probe = SweepSpec {
        source: SourceSpec::Coherent { n0, phi: 0.0 },
        channel: file.channel,
        grid: file.grid,
        include_bound: true,
        oracle_stride: None,
    };
    probe.validate()?;
    Ok(BoundConfig {
        n0,
        channel: file.channel,
        grid: file.grid,
        out: file.output.path,
    })
}
