use anyhow::{anyhow, bail};
use ginibre_overlap::analytic_complex::{
    density_complex, integrate_jpd_complex, jpd_complex, jpd_complex_bulk, jpd_complex_edge, ComplexJpdQuery,
};
use ginibre_overlap::analytic_real::{
    density_real, integrate_jpd_real, jpd_real, jpd_real_bulk, jpd_real_edge, BulkPoint, EdgePoint, RealForm,
    RealJpdQuery,
};
use ginibre_overlap::detratio::{detratio_closed, detratio_mc, DetRatioQuery};
use ginibre_overlap::ensemble::{Beta, EnsembleSpec, C64};
use ginibre_overlap::mc_harness::{compare_to_analytic, run_campaign, ConditionedHistogram, Window, WindowKind};
use ginibre_overlap::QuadSpec;
use serde::Serialize;

use crate::config::{
    AnalyticArgs, Command, CompareArgs, DensityArgs, DetratioArgs, Ensemble, Limit, RunConfig, SampleArgs,
};
use crate::output::render;

/// Rendered report plus whether a statistical check inside it failed.
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub statistical_failure: bool,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Self { bytes, statistical_failure: false }
    }
}

pub fn run(config: &RunConfig) -> anyhow::Result<Outcome> {
    match &config.command {
        Command::Analytic(a) => analytic(config, a).map(Outcome::ok),
        Command::Density(a) => density(config, a).map(Outcome::ok),
        Command::Sample(a) => sample(config, a).map(Outcome::ok),
        Command::Compare(a) => compare(config, a),
        Command::Detratio(a) => detratio(config, a).map(Outcome::ok),
        Command::Selftest => selftest(config),
    }
}

fn beta_code(b: Beta) -> u8 {
    b.into()
}

#[derive(Serialize)]
struct AnalyticRow {
    n: Option<u32>,
    beta: u8,
    lambda_or_abs_z: f64,
    t: f64,
    density: f64,
}

fn analytic(config: &RunConfig, a: &AnalyticArgs) -> anyhow::Result<Vec<u8>> {
    let x = a.lambda;
    let eval = |t: f64| -> anyhow::Result<f64> {
        let v = match (a.limit, a.ensemble) {
            (None, ens) => {
                let n = a.n.ok_or_else(|| anyhow!("--n is required for the finite-N density"))?;
                match ens {
                    Ensemble::Real => jpd_real(&RealJpdQuery::new(n, t, x), RealForm::GammaForm)?,
                    Ensemble::Complex => {
                        if x < 0.0 {
                            bail!("|z| must be nonnegative");
                        }
                        jpd_complex(&ComplexJpdQuery::new(n, t, x * x))?
                    }
                }
            }
            (Some(Limit::Bulk), Ensemble::Real) => jpd_real_bulk(BulkPoint { s: t, x })?,
            (Some(Limit::Bulk), Ensemble::Complex) => jpd_complex_bulk(BulkPoint { s: t, x })?,
            (Some(Limit::Edge), Ensemble::Real) => jpd_real_edge(EdgePoint { sigma: t, delta: x })?,
            (Some(Limit::Edge), Ensemble::Complex) => jpd_complex_edge(EdgePoint { sigma: t, delta: x })?,
        };
        Ok(v)
    };
    let n = if a.limit.is_some() { None } else { a.n };
    let rows = a
        .t_grid
        .points()
        .iter()
        .map(|&t| {
            Ok(AnalyticRow { n, beta: beta_code(a.ensemble.beta()), lambda_or_abs_z: x, t, density: eval(t)? })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    render(config, &rows, &rows)
}

#[derive(Serialize)]
struct DensityRow {
    n: u32,
    beta: u8,
    lambda_or_abs_z: f64,
    density: f64,
}

fn density(config: &RunConfig, a: &DensityArgs) -> anyhow::Result<Vec<u8>> {
    let rows = a
        .x_grid
        .points()
        .iter()
        .map(|&x| {
            let density = match a.ensemble {
                Ensemble::Real => density_real(a.n, x)?,
                Ensemble::Complex => {
                    if x < 0.0 {
                        bail!("|z| must be nonnegative");
                    }
                    density_complex(a.n, x * x)?
                }
            };
            Ok(DensityRow { n: a.n, beta: beta_code(a.ensemble.beta()), lambda_or_abs_z: x, density })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    render(config, &rows, &rows)
}

#[derive(Serialize)]
struct BinRow {
    n: usize,
    beta: u8,
    window: String,
    bin_lo: f64,
    bin_hi: f64,
    count: u64,
}

fn campaign(seed: u64, beta: Beta, n: usize, matrices: u64, window: &Window) -> anyhow::Result<ConditionedHistogram> {
    if matrices == 0 {
        bail!("--matrices must be positive");
    }
    let spec = EnsembleSpec::new(n, beta, seed)?;
    Ok(run_campaign(&spec, matrices, window)?)
}

fn sample(config: &RunConfig, a: &SampleArgs) -> anyhow::Result<Vec<u8>> {
    let window = a.window.scaled(a.n)?;
    check_window_beta(a.beta, &window)?;
    let hist = campaign(config.seed, a.beta, a.n, a.matrices, &window)?;
    let edges = &hist.bin_edges;
    let label = a.window.to_string();
    let rows: Vec<BinRow> = hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &count)| BinRow {
            n: a.n,
            beta: beta_code(a.beta),
            window: label.clone(),
            bin_lo: if i == 0 { 0.0 } else { edges[i - 1] },
            bin_hi: edges.get(i).copied().unwrap_or(f64::INFINITY),
            count,
        })
        .collect();
    render(config, &rows, &hist)
}

fn check_window_beta(beta: Beta, w: &Window) -> anyhow::Result<()> {
    match (beta, w.kind == WindowKind::Annulus) {
        (Beta::Real, true) => bail!("the real ensemble takes a real:lo:hi window"),
        (Beta::Complex, false) => bail!("the complex ensemble takes an annulus:r1:r2 window"),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct CompareRow {
    statistic: String,
    value: f64,
    threshold: f64,
    sample_size: u64,
    alpha: f64,
    pass: bool,
}

fn compare(config: &RunConfig, a: &CompareArgs) -> anyhow::Result<Outcome> {
    let window = a.window.scaled(a.n)?;
    check_window_beta(a.beta, &window)?;
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        bail!("--alpha must lie in (0, 1)");
    }
    let hist = campaign(config.seed, a.beta, a.n, a.matrices, &window)?;
    let report = compare_to_analytic(&hist, a.alpha, &QuadSpec::default())?;
    let row = CompareRow {
        statistic: report.statistic_name.clone(),
        value: report.statistic_value,
        threshold: report.threshold,
        sample_size: report.sample_size,
        alpha: a.alpha,
        pass: report.pass,
    };
    let bytes = render(config, &[row], &report)?;
    Ok(Outcome { bytes, statistical_failure: !report.pass })
}

#[derive(Serialize)]
struct DetratioRow {
    n: usize,
    beta: u8,
    #[serde(rename = "L")]
    l: u32,
    z_re: f64,
    z_im: f64,
    p: f64,
    closed: f64,
    mc_mean: Option<f64>,
    mc_stderr: Option<f64>,
    z_score: Option<f64>,
    mc_samples: Option<u64>,
}

fn detratio(config: &RunConfig, a: &DetratioArgs) -> anyhow::Result<Vec<u8>> {
    let q = DetRatioQuery::new(a.n, a.beta, a.l, C64::new(a.lambda, a.z_im), a.p)?;
    let closed = detratio_closed(&q, &QuadSpec::default())?;
    let mc = a.mc.map(|m| detratio_mc(&q, m, config.seed)).transpose()?;
    let row = DetratioRow {
        n: a.n,
        beta: beta_code(a.beta),
        l: a.l,
        z_re: a.lambda,
        z_im: a.z_im,
        p: a.p,
        closed,
        mc_mean: mc.as_ref().map(|e| e.mean),
        mc_stderr: mc.as_ref().map(|e| e.stderr),
        z_score: mc.as_ref().map(|e| e.z_score(closed)),
        mc_samples: mc.as_ref().map(|e| e.n_samples),
    };
    render(config, &[&row], &row)
}

#[derive(Serialize)]
struct CheckRow {
    check: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn check(check: &'static str, value: f64, tolerance: f64) -> CheckRow {
    CheckRow { check, value, tolerance, pass: value.abs() <= tolerance }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn selftest(config: &RunConfig) -> anyhow::Result<Outcome> {
    let quad = QuadSpec::default();
    let mut rows = Vec::new();

    let q = RealJpdQuery::new(7, 1.3, 0.8);
    let g = jpd_real(&q, RealForm::GammaForm)?;
    let s = jpd_real(&q, RealForm::SumForm)?;
    rows.push(check("real_forms_agree", rel(g, s), 1e-12));

    let m = integrate_jpd_real(6, 0.7, &quad)?.value;
    rows.push(check("real_jpd_marginal", rel(m, density_real(6, 0.7)?), 1e-8));

    let m = integrate_jpd_complex(6, 2.0, &quad)?.value;
    rows.push(check("complex_jpd_marginal", rel(m, density_complex(6, 2.0)?), 1e-8));

    let q = DetRatioQuery::complex(4, 1, C64::new(0.3, 0.6), 0.0)?;
    rows.push(check("unit_ratio", detratio_closed(&q, &quad)? - 1.0, 1e-8));

    let q = DetRatioQuery::real(3, 2, 0.5, 1.0)?;
    let est = detratio_mc(&q, 20_000, config.seed)?;
    rows.push(check("detratio_mc_z_score", est.z_score(detratio_closed(&q, &quad)?), 4.0));

    let window = Window::annulus(0.0, 2.0 * 0.8)?;
    let hist = campaign(config.seed, Beta::Complex, 4, 2_000, &window)?;
    let report = compare_to_analytic(&hist, 1e-3, &quad)?;
    rows.push(CheckRow {
        check: "complex_ks",
        value: report.statistic_value,
        tolerance: report.threshold,
        pass: report.pass,
    });

    let failed = rows.iter().any(|r| !r.pass);
    let bytes = render(config, &rows, &rows)?;
    Ok(Outcome { bytes, statistical_failure: failed })
}
