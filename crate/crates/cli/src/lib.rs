//! `ginibre` command-line front end. [`dispatch`] parses arguments, runs one
//! command and writes a CSV or JSON report carrying its own provenance.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Parser;

pub use config::{
    AnalyticArgs, Command, CompareArgs, DensityArgs, DetratioArgs, Ensemble, Format, Grid, Limit, RunConfig,
    SampleArgs, WindowArg,
};
pub use output::{config_hash, read_provenance, Provenance, SCHEMA, TOOL, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_STATISTICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ginibre", version, about = "Eigenvector overlaps of Ginibre matrices")]
struct Cli {
    /// Master seed for every random stream
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (output does not depend on this)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the report (needs --out and CSV)
    #[arg(long = "plot-script", global = true)]
    plot_script: Option<PathBuf>,
    /// Re-run the configuration recorded in a report and compare byte for byte
    #[arg(long = "verify-metadata")]
    verify_metadata: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

/// Runs the CLI against the process's stdout and stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_to(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 on invalid
/// input, 2 when a statistical check fails.
pub fn dispatch_to<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_INVALID
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match run_cli(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INVALID
        }
    }
}

fn run_cli(cli: Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let pool = match cli.threads {
        Some(0) => bail!("--threads must be positive"),
        Some(k) => Some(rayon::ThreadPoolBuilder::new().num_threads(k).build()?),
        None => None,
    };
    let (stdout, code) = match pool {
        Some(p) => p.install(|| execute(&cli))?,
        None => execute(&cli)?,
    };
    out.write_all(&stdout)?;
    Ok(code)
}

/// Bytes destined for stdout, and the exit code.
fn execute(cli: &Cli) -> anyhow::Result<(Vec<u8>, i32)> {
    if let Some(path) = &cli.verify_metadata {
        if cli.command.is_some() {
            bail!("--verify-metadata takes no command");
        }
        return Ok((verify(path)?.into_bytes(), EXIT_OK));
    }
    let Some(command) = cli.command.clone() else {
        bail!("no command given; see --help");
    };
    let config = RunConfig { seed: cli.seed, format: cli.format, command };
    if cli.plot_script.is_some() && (cli.out.is_none() || cli.format != Format::Csv) {
        bail!("--plot-script needs --out and CSV output");
    }
    let outcome = commands::run(&config)?;
    let code = if outcome.statistical_failure { EXIT_STATISTICAL } else { EXIT_OK };
    let Some(data) = &cli.out else {
        return Ok((outcome.bytes, code));
    };
    fs::write(data, &outcome.bytes).with_context(|| format!("writing {}", data.display()))?;
    if let Some(script) = &cli.plot_script {
        let text = output::plot_script(&config.command, data)?;
        fs::write(script, text).with_context(|| format!("writing {}", script.display()))?;
    }
    Ok((Vec::new(), code))
}

/// Report bytes for a configuration, as the CLI would write them.
pub fn render_report(config: &RunConfig) -> anyhow::Result<Vec<u8>> {
    Ok(commands::run(config)?.bytes)
}

fn verify(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let prov = read_provenance(&bytes)?;
    if prov.tool != TOOL {
        bail!("report was produced by {:?}, not {TOOL}", prov.tool);
    }
    let hash = config_hash(&prov.config)?;
    if hash != prov.config_sha256 {
        bail!("config hash mismatch: recorded {}, recomputed {hash}", prov.config_sha256);
    }
    if prov.version != VERSION {
        bail!("report was produced by version {}, this is {VERSION}", prov.version);
    }
    let replay = render_report(&prov.config)?;
    if replay != bytes {
        bail!("replaying the recorded config does not reproduce {}", path.display());
    }
    Ok(format!("verified {}: config sha256 {hash}, output reproduced\n", path.display()))
}
