//! `lcl`: file formats, reports and plot data on top of `lcl-core`.

pub mod canon;
pub mod commands;
pub mod files;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Value};

pub use commands::{Cli, Command, Common, Format};
pub use files::{Boundary, GroupFile, MapSpec, ModelFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lcl_core::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed input: {0}")]
    Format(String),
    #[error("map has no file representation: {0}")]
    Unrepresentable(String),
    #[error("unknown plot kind {0:?}")]
    UnknownKind(String),
    #[error("missing input: {0}")]
    Missing(&'static str),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Stable short name for the error object.
    pub fn kind(&self) -> String {
        match self {
            CliError::Core(e) => core_kind(e),
            CliError::Json(_) => "MalformedJson".into(),
            CliError::Io { .. } => "Io".into(),
            CliError::Format(_) => "MalformedInput".into(),
            CliError::Unrepresentable(_) => "Unrepresentable".into(),
            CliError::UnknownKind(_) => "UnknownKind".into(),
            CliError::Missing(_) => "MissingInput".into(),
            CliError::Csv(_) => "Csv".into(),
            CliError::Usage(_) => "Usage".into(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut obj = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Core(lcl_core::Error::Stage { stage, .. }) = self {
            obj["stage"] = json!(stage);
        }
        json!({ "error": obj })
    }
}

fn core_kind(e: &lcl_core::Error) -> String {
    if let lcl_core::Error::Stage { source, .. } = e {
        return core_kind(source);
    }
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A JSON literal, or `@path` for a file holding one.
pub fn read_inline(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(p) => read_file(Path::new(p)),
        None => Ok(arg.to_string()),
    }
}

/// Column-named samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| num(*x)).collect());
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Shortest round-trip decimal, with `inf`/`-inf` spelled out.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// What a command produced.
pub struct Outcome {
    pub report: Value,
    /// Bulk samples written instead of the report under `--format csv`.
    pub table: Option<Table>,
    /// The computation succeeded but the verdict is negative.
    pub negative: bool,
    /// Plot data is always CSV.
    pub csv_only: bool,
}

impl Outcome {
    pub fn report(report: Value) -> Self {
        Outcome {
            report,
            table: None,
            negative: false,
            csv_only: false,
        }
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    pub fn negative_if(mut self, flag: bool) -> Self {
        self.negative = flag;
        self
    }

    fn render(&self, format: Format) -> Result<String, CliError> {
        match (format, &self.table) {
            (Format::Csv, Some(t)) => t.to_csv(),
            (_, Some(t)) if self.csv_only => t.to_csv(),
            (Format::Csv, None) => flatten_csv(&self.report),
            (Format::Json, _) => Ok(canon::to_canonical(&self.report)? + "\n"),
        }
    }
}

/// `path,value` rows for reports without bulk samples.
fn flatten_csv(v: &Value) -> Result<String, CliError> {
    fn walk(prefix: &str, v: &Value, t: &mut Table) {
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&join(prefix, k), x, t)),
            Value::Array(a) => a
                .iter()
                .enumerate()
                .for_each(|(i, x)| walk(&join(prefix, &i.to_string()), x, t)),
            Value::String(s) => t.rows.push(vec![prefix.into(), s.clone()]),
            Value::Number(n) => t
                .rows
                .push(vec![prefix.into(), n.as_f64().map_or_else(|| n.to_string(), num)]),
            other => t.rows.push(vec![prefix.into(), other.to_string()]),
        }
    }
    fn join(p: &str, k: &str) -> String {
        if p.is_empty() {
            k.to_string()
        } else {
            format!("{p}.{k}")
        }
    }
    let mut t = Table::new(&["path", "value"]);
    walk("", v, &mut t);
    t.to_csv()
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .or_else(|e| match e.kind() {
                    // a closed reader (`| head`) is not a failure
                    std::io::ErrorKind::BrokenPipe => Ok(()),
                    _ => Err(e),
                })
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn report_error(e: &CliError) {
    eprintln!(
        "{}",
        canon::to_canonical(&e.to_json()).expect("error objects serialize")
    );
}

/// Parse `argv`, run the command and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            report_error(&CliError::Usage(e.render().to_string().trim().to_string()));
            return 1;
        }
    };
    match commands::execute(&cli).and_then(|o| {
        let text = o.render(cli.common.format)?;
        write_out(&cli.common.out, &text)?;
        Ok(o.negative)
    }) {
        Ok(false) => 0,
        Ok(true) => 2,
        Err(e) => {
            report_error(&e);
            1
        }
    }
}
