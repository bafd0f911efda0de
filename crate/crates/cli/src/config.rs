use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Subcommand, ValueEnum};
use ginibre_overlap::ensemble::Beta;
use ginibre_overlap::mc_harness::Window;
use serde::{Deserialize, Serialize};

/// Everything that determines the bytes of a report. Thread count and
/// output path are deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Real,
    Complex,
}

impl Ensemble {
    pub fn beta(self) -> Beta {
        match self {
            Ensemble::Real => Beta::Real,
            Ensemble::Complex => Beta::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Bulk,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Joint density of t and an eigenvalue on a grid of t
    Analytic(AnalyticArgs),
    /// Mean eigenvalue density on a grid of positions
    Density(DensityArgs),
    /// Histogram of t for eigenvalues inside a window
    Sample(SampleArgs),
    /// Kolmogorov-Smirnov comparison of a campaign with the analytic law
    Compare(CompareArgs),
    /// Averaged determinant ratio: closed form and optional Monte Carlo
    Detratio(DetratioArgs),
    /// Quick numerical and statistical self-checks
    Selftest,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalyticArgs {
    #[arg(long, value_enum)]
    pub ensemble: Ensemble,
    /// Finite-N joint density (the default)
    #[arg(long, conflicts_with = "limit")]
    pub jpd: bool,
    /// Large-N scaling limit instead: the grid holds s (bulk) or sigma (edge)
    /// and --lambda holds x = λ/√N or |w| (bulk) or delta (edge)
    #[arg(long, value_enum)]
    pub limit: Option<Limit>,
    #[arg(long, required_unless_present = "limit")]
    pub n: Option<u32>,
    /// Real eigenvalue λ, or |z| for the complex ensemble
    #[arg(long, alias = "abs-z", allow_negative_numbers = true, default_value_t = 0.0)]
    pub lambda: f64,
    /// `log:lo:hi:k`, `lin:lo:hi:k` or a comma separated list
    #[arg(long = "t-grid", allow_hyphen_values = true)]
    pub t_grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub ensemble: Ensemble,
    #[arg(long)]
    pub n: u32,
    /// Positions λ (real) or |z| (complex)
    #[arg(long = "x-grid", allow_hyphen_values = true)]
    pub x_grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub matrices: u64,
    /// `real:lo:hi` or `annulus:r1:r2`, in units of √N
    #[arg(long)]
    pub window: WindowArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub matrices: u64,
    /// `real:lo:hi` or `annulus:r1:r2`, in units of √N
    #[arg(long)]
    pub window: WindowArg,
    #[arg(long, default_value_t = ginibre_overlap::mc_harness::DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DetratioArgs {
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
    #[arg(long = "L")]
    pub l: u32,
    #[arg(long)]
    pub n: usize,
    /// Real part of z
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub lambda: f64,
    /// Imaginary part of z (complex ensemble only)
    #[arg(long = "z-im", allow_negative_numbers = true, default_value_t = 0.0)]
    pub z_im: f64,
    #[arg(long)]
    pub p: f64,
    /// Monte Carlo sample count
    #[arg(long)]
    pub mc: Option<u64>,
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    let b: u8 = s.parse().map_err(|_| format!("beta must be 1 or 2, got {s:?}"))?;
    Beta::try_from(b).map_err(|e| e.to_string())
}

fn parse_f64(s: &str) -> anyhow::Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        bail!("not a finite number: {s:?}");
    }
    Ok(v)
}

/// A parameter grid, kept in its textual form so configs round-trip exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    text: String,
    points: Vec<f64>,
}

impl Grid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let points = match parts.as_slice() {
            [kind @ ("log" | "lin"), lo, hi, k] => {
                let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
                let k: usize = k.parse().with_context(|| format!("bad point count in {s:?}"))?;
                if k < 1 {
                    bail!("a grid needs at least one point");
                }
                if *kind == "log" && !(lo > 0.0 && hi > 0.0) {
                    bail!("log grids need positive endpoints");
                }
                let frac = |i: usize| if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                (0..k)
                    .map(|i| match *kind {
                        "log" => lo * (hi / lo).powf(frac(i)),
                        _ => lo + (hi - lo) * frac(i),
                    })
                    .collect()
            }
            [list] => list.split(',').map(parse_f64).collect::<anyhow::Result<Vec<_>>>()?,
            _ => bail!("grid must be log:lo:hi:k, lin:lo:hi:k or a comma list, got {s:?}"),
        };
        Ok(Self { text: s.to_string(), points })
    }
}

impl TryFrom<String> for Grid {
    type Error = anyhow::Error;

    fn try_from(s: String) -> anyhow::Result<Self> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.text
    }
}

/// A window in bulk units; [`WindowArg::scaled`] maps it to eigenvalue units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WindowArg {
    annulus: bool,
    lo: f64,
    hi: f64,
}

impl WindowArg {
    pub fn scaled(&self, n: usize) -> anyhow::Result<Window> {
        let r = (n as f64).sqrt();
        let w = if self.annulus {
            Window::annulus(self.lo * r, self.hi * r)
        } else {
            Window::real_interval(self.lo * r, self.hi * r)
        };
        w.map_err(|e| anyhow!(e))
    }
}

impl fmt::Display for WindowArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.annulus { "annulus" } else { "real" };
        write!(f, "{kind}:{}:{}", self.lo, self.hi)
    }
}

impl FromStr for WindowArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [kind, lo, hi] = parts.as_slice() else {
            bail!("window must be real:lo:hi or annulus:r1:r2, got {s:?}");
        };
        let annulus = match *kind {
            "real" => false,
            "annulus" => true,
            other => bail!("unknown window kind {other:?}"),
        };
        let w = Self { annulus, lo: parse_f64(lo)?, hi: parse_f64(hi)? };
        w.scaled(1)?;
        Ok(w)
    }
}

impl TryFrom<String> for WindowArg {
    type Error = anyhow::Error;

    fn try_from(s: String) -> anyhow::Result<Self> {
        s.parse()
    }
}

impl From<WindowArg> for String {
    fn from(w: WindowArg) -> String {
        w.to_string()
    }
}
