//! Batch experiment runner for the `epcore` library.
//!
//! Each run reads one JSON configuration, executes a subcommand, and writes
//! a CSV or JSON table plus a `<out>.meta.json` sidecar with run metadata.
//! The table depends only on the configuration.

pub mod config;
pub mod error;
pub mod output;
pub mod trace;

mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use commands::RunOutput;
pub use config::ExperimentConfig;
pub use error::{CliError, ErrorClass};
pub use output::{Format, Table};
pub use trace::{Trace, OPERATIONS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SubcommandName {
    Twolevel,
    Census,
    Encircle,
    Exponents,
    Response,
    Lipkin,
    Metric,
    Ep3,
}

impl SubcommandName {
    pub const ALL: [SubcommandName; 8] = [
        SubcommandName::Twolevel,
        SubcommandName::Census,
        SubcommandName::Encircle,
        SubcommandName::Exponents,
        SubcommandName::Response,
        SubcommandName::Lipkin,
        SubcommandName::Metric,
        SubcommandName::Ep3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SubcommandName::Twolevel => "twolevel",
            SubcommandName::Census => "census",
            SubcommandName::Encircle => "encircle",
            SubcommandName::Exponents => "exponents",
            SubcommandName::Response => "response",
            SubcommandName::Lipkin => "lipkin",
            SubcommandName::Metric => "metric",
            SubcommandName::Ep3 => "ep3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "epcore", version, about = "Exceptional-point experiments from a JSON config")]
pub struct Cli {
    pub subcommand: SubcommandName,
    #[arg(long)]
    pub config: PathBuf,
    /// Data file; defaults to `output.path` in the config, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

/// Executes a parsed configuration and records which library operations ran.
pub fn execute(sub: SubcommandName, cfg: &ExperimentConfig) -> Result<(RunOutput, Trace), CliError> {
    if let Some(name) = &cfg.subcommand {
        if name != sub.as_str() {
            return Err(CliError::config(
                "config.subcommand_mismatch",
                format!("config is for `{name}`, invoked as `{}`", sub.as_str()),
            ));
        }
    }
    let mut trace = Trace::default();
    let out = commands::dispatch(sub, cfg, &mut trace)?;
    Ok((out, trace))
}

/// Paths and sizes of a completed run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub out: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub records: usize,
    pub data: Vec<u8>,
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn choose_format(cli: &Cli, cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Format, CliError> {
    if let Some(f) = cli.format {
        return Ok(match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
    }
    if let Some(f) = cfg.output.as_ref().and_then(|o| o.format.as_deref()) {
        return Format::parse(f);
    }
    Ok(match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    })
}

/// Reads the config, runs the subcommand on a pool of `workers` threads and
/// writes the data file and its sidecar. Nothing is written on error.
pub fn run(cli: &Cli) -> Result<RunSummary, CliError> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| CliError::config("config.unreadable", format!("{}: {e}", cli.config.display())))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    let cfg = ExperimentConfig::parse(&text)?;
    let out_path = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.path.as_ref()).map(PathBuf::from));
    let format = choose_format(cli, &cfg, out_path.as_deref())?;
    let workers = match cli.workers {
        Some(0) => return Err(CliError::config("config.workers", "`--workers` must be positive")),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::domain("runtime.thread_pool", e.to_string()))?;

    let start = Instant::now();
    let (output, trace) = pool.install(|| execute(cli.subcommand, &cfg))?;
    let wall = start.elapsed().as_secs_f64();

    let data = output.table.render(format);
    let meta = json!({
        "tool": "epcore",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": cli.subcommand.as_str(),
        "config_sha256": digest,
        "format": format.as_str(),
        "records": output.table.len(),
        "workers": workers,
        "wall_time_s": wall,
        "operations": trace.operations().collect::<Vec<_>>(),
        "summary": Value::Object(output.extras.clone()),
    });
    let mut meta_bytes = serde_json::to_vec_pretty(&meta).expect("serializable");
    meta_bytes.push(b'\n');

    let meta_file = match &out_path {
        Some(p) => {
            let m = meta_path(p);
            fs::write(p, &data).map_err(|e| CliError::config("output.unwritable", format!("{}: {e}", p.display())))?;
            fs::write(&m, &meta_bytes)
                .map_err(|e| CliError::config("output.unwritable", format!("{}: {e}", m.display())))?;
            Some(m)
        }
        None => None,
    };
    Ok(RunSummary {
        out: out_path,
        meta: meta_file,
        records: output.table.len(),
        data,
    })
}

/// Parses arguments, runs, and reports errors as JSON on stderr. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = e.print();
                return 0;
            }
            let err = CliError::config("cli.usage", e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match run(&cli) {
        Ok(summary) => {
            if summary.out.is_none() {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(&summary.data).is_err() {
                    return 1;
                }
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
