//! Batch front end: each run writes a JSON report, an optional CSV table or
//! SVG chart, and a manifest with the configuration hash.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use commands::*;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl From<locpd::Error> for CliError {
    fn from(e: locpd::Error) -> Self {
        use locpd::Error::*;
        match e {
            NotHermitian(_) | Resolution(_) | Convergence(_) | Eigen(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Parser, Debug)]
#[command(name = "locpd", version, about = "Positive definite functions on an interval: spectra, RKHS checks, extensions and simulations")]
struct Cli {
    /// Output directory
    #[arg(long, global = true, env = "LOCPD_OUT_DIR", default_value = ".")]
    out: PathBuf,
    /// Extra output besides the JSON report
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON file whose keys override the command-line flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gram matrix eigenvalues, PSD verdict and rank
    Analyze(AnalyzeArgs),
    /// Mercer eigenvalues and trace of the integral operator
    Spectrum(SpectrumArgs),
    /// Polya spline extension with convexity and density checks
    Extend(ExtendArgs),
    /// Shannon sampling test of a spectral measure against F
    CheckExt(CheckExtArgs),
    /// Deficiency indices (0,0) or (1,1)
    Deficiency(DeficiencyArgs),
    /// Ordering constant A with K ≤ A·F
    Order(OrderArgs),
    /// Monte-Carlo paths with covariance and mean checks
    Simulate(SimulateArgs),
}

fn overlay<T: Serialize + DeserializeOwned>(args: &T, file: &Map<String, Value>) -> Result<(T, Value), CliError> {
    let mut v = serde_json::to_value(args).map_err(|e| CliError::Config(e.to_string()))?;
    if let Value::Object(m) = &mut v {
        for (k, x) in file {
            m.insert(k.clone(), x.clone());
        }
    }
    let merged: T = serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("config file: {e}")))?;
    // round-trip so the hashed form is canonical
    let v = serde_json::to_value(&merged).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((merged, v))
}

fn read_config(path: &PathBuf) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Config("config file must hold a JSON object".into())),
        Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut file = match &cli.config {
        Some(p) => read_config(p)?,
        None => Map::new(),
    };
    let mut out = cli.out.clone();
    let mut format = cli.format;
    let mut seed = cli.seed;
    if let Some(v) = file.remove("out") {
        out = PathBuf::from(v.as_str().ok_or_else(|| CliError::Config("`out` must be a string".into()))?);
    }
    if let Some(v) = file.remove("format") {
        format = serde_json::from_value(v).map_err(|e| CliError::Config(format!("format: {e}")))?;
    }
    if let Some(v) = file.remove("seed") {
        seed = v.as_u64().ok_or_else(|| CliError::Config("`seed` must be a non-negative integer".into()))?;
    }
    let name = match &cli.command {
        Command::Analyze(_) => "analyze",
        Command::Spectrum(_) => "spectrum",
        Command::Extend(_) => "extend",
        Command::CheckExt(_) => "check-ext",
        Command::Deficiency(_) => "deficiency",
        Command::Order(_) => "order",
        Command::Simulate(_) => "simulate",
    };
    if let Some(c) = file.remove("command") {
        if c.as_str() != Some(name) {
            return Err(CliError::Config(format!("config file is for command {c}, not {name}")));
        }
    }

    macro_rules! dispatch {
        ($args:expr, $f:expr) => {{
            let (a, v) = overlay($args, &file)?;
            (v, $f(&a))
        }};
    }
    let (config, report) = match &cli.command {
        Command::Analyze(a) => dispatch!(a, analyze),
        Command::Spectrum(a) => dispatch!(a, spectrum_cmd),
        Command::Extend(a) => dispatch!(a, extend),
        Command::CheckExt(a) => dispatch!(a, check_ext),
        Command::Deficiency(a) => dispatch!(a, deficiency),
        Command::Order(a) => dispatch!(a, order),
        Command::Simulate(a) => dispatch!(a, |a| simulate(a, seed)),
    };
    let hashed = json!({ "command": name, "args": config, "format": format, "seed": seed });
    let hash = output::config_hash(&hashed);
    let report = report?;

    std::fs::create_dir_all(&out).map_err(|e| CliError::Config(format!("{}: {e}", out.display())))?;
    let io = |e: std::io::Error| CliError::Config(format!("{}: {e}", out.display()));
    let stem = name.replace('-', "_");
    let mut files = Vec::new();
    let body = json!({ "command": name, "config_hash": hash, "seed": seed, "result": report.result });
    files.push(output::write(&out, &format!("{stem}.json"), &output::to_json(&body)).map_err(io)?);
    match format {
        Format::Json => {}
        Format::Csv => {
            let text = output::csv(&hash, &report.header, &report.rows);
            files.push(output::write(&out, &format!("{stem}.csv"), &text).map_err(io)?);
        }
        Format::Svg => {
            let p = &report.plot;
            let text = output::svg(&hash, &p.title, &p.xlabel, &p.ylabel, &p.series);
            files.push(output::write(&out, &format!("{stem}.svg"), &text).map_err(io)?);
        }
    }
    let manifest = json!({
        "command": name,
        "config": config,
        "format": format,
        "config_hash": hash,
        "seed": seed,
        "versions": { "locpd": locpd::VERSION, "locpd-cli": env!("CARGO_PKG_VERSION") },
        "outputs": files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "conclusive": report.conclusive,
    });
    output::write(&out, "manifest.json", &output::to_json(&manifest)).map_err(io)?;
    println!("{}", report.summary);
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(report.conclusive)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verdict inconclusive");
            ExitCode::from(4)
        }
        Err(CliError::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
