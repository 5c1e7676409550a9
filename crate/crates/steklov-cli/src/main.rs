//! `steklov`: command-line front end for steklov-core.
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 for
//! numerical failures (poles, bracketing, convergence).  On failure nothing
//! is written to stdout and a one-line JSON diagnostic goes to stderr.

mod commands;
mod output;
mod reproduce;

use std::cell::OnceCell;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use steklov_core::disk_steklov::DiskSteklovSpectrum;

use commands::Command;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "steklov", version, about = "Small-patch asymptotics for reactive patches on the unit sphere")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    /// Directory where disk spectra are cached between runs.
    #[arg(long, env = "STEKLOV_CACHE_DIR", global = true)]
    cache_dir: Option<PathBuf>,
    /// Local Steklov modes retained in the disk spectrum.
    #[arg(long, default_value_t = 64, global = true)]
    n_modes: usize,
    /// Quadrature nodes of the disk solver (at least 4·n_modes).
    #[arg(long, default_value_t = 800, global = true)]
    n_quad: usize,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by all subcommands, with a lazily solved unit-disk spectrum.
pub struct Global {
    pub cache_dir: Option<PathBuf>,
    pub n_modes: usize,
    pub n_quad: usize,
    unit: OnceCell<DiskSteklovSpectrum>,
}

impl Global {
    pub fn unit_spectrum(&self) -> Result<DiskSteklovSpectrum, CliError> {
        if let Some(s) = self.unit.get() {
            return Ok(s.clone());
        }
        let s = commands::load_unit_spectrum(self)?;
        Ok(self.unit.get_or_init(|| s).clone())
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(steklov_core::Error),
}

impl From<steklov_core::Error> for CliError {
    fn from(e: steklov_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        use steklov_core::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => match e {
                E::Domain(_) => "domain",
                E::Pole { .. } => "pole",
                E::Bracketing(_) => "bracketing",
                E::Convergence(_) => "convergence",
                E::Separation { .. } => "separation",
                E::InvalidInput(_) => "invalid_input",
                E::Unsupported(_) => "unsupported",
                E::Io(_) => "io",
                E::Parse(_) => "parse",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    fn diagnostic(&self) -> String {
        serde_json::json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "kind": self.kind(),
            "message": self.message(),
        })
        .to_string()
    }
}

fn validate(cli: &Cli) -> Result<(), CliError> {
    if cli.n_modes == 0 {
        return Err(CliError::Config("--n-modes must be positive".into()));
    }
    if cli.n_quad < 4 * cli.n_modes {
        return Err(CliError::Config(format!("--n-quad must be at least 4·n_modes = {}", 4 * cli.n_modes)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g =
        Global { cache_dir: cli.cache_dir.clone(), n_modes: cli.n_modes, n_quad: cli.n_quad, unit: OnceCell::new() };
    let result = validate(&cli).and_then(|()| commands::run(&cli.command, &g));
    match result {
        Ok(report) => {
            let text = report.render(cli.format);
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|()| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code())
        }
    }
}
