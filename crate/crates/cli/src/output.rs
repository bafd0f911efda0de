use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Command, Format, RunConfig};

pub const TOOL: &str = "ginibre";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA: &str = "ginibre-report/1";
const CSV_MARKER: &str = "# provenance ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(config: &RunConfig) -> anyhow::Result<Self> {
        Ok(Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            config: config.clone(),
            config_sha256: config_hash(config)?,
        })
    }
}

/// SHA-256 of the compact JSON encoding of the config.
pub fn config_hash(config: &RunConfig) -> anyhow::Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Serialize)]
struct JsonReport<'a, T: Serialize> {
    schema: &'static str,
    provenance: &'a Provenance,
    data: &'a T,
}

/// CSV (provenance comment line, header, rows) or one JSON document.
pub fn render<R: Serialize, J: Serialize>(config: &RunConfig, rows: &[R], json: &J) -> anyhow::Result<Vec<u8>> {
    let prov = Provenance::new(config)?;
    match config.format {
        Format::Csv => {
            let mut buf = format!("{CSV_MARKER}{}\n", serde_json::to_string(&prov)?).into_bytes();
            let mut w = csv::Writer::from_writer(&mut buf);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            drop(w);
            Ok(buf)
        }
        Format::Json => {
            let report = JsonReport { schema: SCHEMA, provenance: &prov, data: json };
            let mut buf = serde_json::to_vec_pretty(&report)?;
            buf.push(b'\n');
            Ok(buf)
        }
    }
}

/// Provenance block embedded in a report produced by [`render`].
pub fn read_provenance(bytes: &[u8]) -> anyhow::Result<Provenance> {
    let text = std::str::from_utf8(bytes).context("report is not UTF-8")?;
    if let Some(rest) = text.strip_prefix(CSV_MARKER) {
        let line = rest.lines().next().unwrap_or_default();
        return serde_json::from_str(line).context("malformed provenance line");
    }
    let doc: serde_json::Value = serde_json::from_str(text).context("report is neither CSV with provenance nor JSON")?;
    match doc.get("provenance") {
        Some(p) => serde_json::from_value(p.clone()).context("malformed provenance block"),
        None => bail!("no provenance block found"),
    }
}

/// A gnuplot script plotting the CSV report at `data`.
pub fn plot_script(command: &Command, data: &Path) -> anyhow::Result<String> {
    let file = data.display().to_string().replace('\'', "''");
    let body = match command {
        Command::Analytic(_) => format!(
            "set logscale xy\nset xlabel 't'\nset ylabel 'density'\nplot '{file}' using 4:5 with lines title 'P(t)'\n"
        ),
        Command::Density(_) => format!(
            "set xlabel 'position'\nset ylabel 'density'\nplot '{file}' using 3:4 with lines title 'rho'\n"
        ),
        Command::Sample(_) => format!(
            "set logscale x\nset xlabel 't'\nset ylabel 'count'\nplot '{file}' using (sqrt($4*$5)):6 with steps title 'histogram'\n"
        ),
        _ => bail!("plot scripts are available for analytic, density and sample reports"),
    };
    Ok(format!("# gnuplot script for {file}\nset datafile separator ','\nset key autotitle columnhead\n{body}"))
}
