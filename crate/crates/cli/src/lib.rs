//! Scenario runner: parse a configuration, validate it, solve, check, write outputs.

pub mod config;
pub mod report;
pub mod run;
pub mod scenario;
pub mod validate;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation failed:\n{0}")]
    Validation(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: tcmfg_core::Error,
    },
    #[error("divergence: {0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Io { .. } => 2,
            CliError::Solver { .. } | CliError::Diverged(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Mfg,
    Hjb,
    Fp,
    Dual,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Mfg => "mfg",
            Mode::Hjb => "hjb",
            Mode::Fp => "fp",
            Mode::Dual => "dual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Human,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub mode: Mode,
    pub force: bool,
    pub seed: Option<u64>,
    pub format: Format,
}

pub struct Outcome {
    pub validation: String,
    /// Rendered report in the requested format.
    pub report: String,
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Parses and validates without solving.
pub fn load(text: &str, mode: Mode, seed: Option<u64>) -> Result<(Config, Scenario, validate::Validation, Option<validate::Built>), CliError> {
    let cfg = Config::parse(text)?;
    let mut s = Scenario::from_config(&cfg)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let (v, built) = validate::validate(&s, mode, &cfg.unused());
    Ok((cfg, s, v, built))
}

/// Runs the scenario in `path` and writes every output file under `opts.out`.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let (cfg, s, v, built) = load(&text, opts.mode, opts.seed)?;
    let validation = v.render();
    // --force runs past violations as long as the solver objects could be built
    let built = match built {
        Some(b) if v.ok() || opts.force => b,
        _ => return Err(CliError::Validation(validation)),
    };

    let out = &opts.out;
    if out.exists() {
        let nonempty = fs::read_dir(out).map_err(io_err(out))?.next().is_some();
        if nonempty && !opts.force {
            return Err(CliError::Io {
                path: out.clone(),
                source: std::io::Error::new(std::io::ErrorKind::AlreadyExists, "output directory is not empty (use --force)"),
            });
        }
    }
    fs::create_dir_all(out).map_err(io_err(out))?;

    let result = run::execute(&s, &built, opts.mode)?;
    let csv = report::to_csv(&result.report);
    let mut files = vec![("report.csv".to_string(), csv.clone().into_bytes())];
    files.extend(result.files);

    let mut manifest = String::new();
    let config_hash = Sha256::digest(cfg.canonical().as_bytes());
    let _ = writeln!(manifest, "mode = {}", opts.mode.name());
    let _ = writeln!(manifest, "seed = {}", s.seed);
    let _ = writeln!(manifest, "config_sha256 = {}", hex(&config_hash));
    let _ = writeln!(manifest, "grid = dim {} points {} half_width {} horizon {} steps {}", s.grid.dim, s.grid.points, s.grid.half_width, s.grid.horizon, s.grid.steps);
    for (name, bytes) in &files {
        let p = out.join(name);
        fs::write(&p, bytes).map_err(io_err(&p))?;
        let _ = writeln!(manifest, "{name} sha256 {}", hex(&Sha256::digest(bytes)));
    }
    let p = out.join("manifest.txt");
    fs::write(&p, manifest).map_err(io_err(&p))?;

    let mut timings = String::from("stage,seconds\n");
    for (k, t) in &result.timings {
        let _ = writeln!(timings, "{k},{t:.6}");
    }
    let p = out.join("timings.txt");
    fs::write(&p, timings).map_err(io_err(&p))?;

    if let Some(msg) = result.diverged {
        return Err(CliError::Diverged(msg));
    }
    let rendered = match opts.format {
        Format::Csv => csv,
        Format::Human => report::to_human(&result.report),
    };
    Ok(Outcome {
        validation,
        report: rendered,
        passed: result.report.passed(),
    })
}
