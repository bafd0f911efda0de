//! Sampling campaigns, eigenvalue-windowed overlap histograms and their
//! comparison with the analytic conditional law of `t`.
//!
//! Histograms are pure integer accumulators (moments are kept in fixed
//! point) so any split of the index range merges to the identical result.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic_complex::{density_complex, ComplexJpd};
use crate::analytic_real::{density_real, jpd_real, RealForm, RealJpdQuery};
use crate::ensemble::{overlaps_biorthogonal, sample_ginibre, Beta, EigenKind, EnsembleSpec, OverlapSample};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_finite, integrate_semi_infinite_scaled, Endpoint, QuadSpec};

pub const BINS: usize = 120;
/// Bins span `[1e-3·N, 1e5·N]`.
pub const LOG10_LO: f64 = -3.0;
pub const LOG10_HI: f64 = 5.0;
const CHUNK: u64 = 1024;
const T_FIXED: f64 = 4_294_967_296.0; // 2^32
const T2_FIXED: f64 = 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// Real eigenvalues with `lo <= λ <= hi`.
    RealInterval,
    /// Complex eigenvalues with `lo <= |z| <= hi`.
    Annulus,
}

/// Eigenvalue window in matrix units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub kind: WindowKind,
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn real_interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(domain(format!("real window needs finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { kind: WindowKind::RealInterval, lo, hi })
    }

    pub fn annulus(r1: f64, r2: f64) -> Result<Self> {
        if !(0.0 <= r1 && r1 < r2) || !r2.is_finite() {
            return Err(domain(format!("annulus needs 0 <= r1 < r2, got [{r1}, {r2}]")));
        }
        Ok(Self { kind: WindowKind::Annulus, lo: r1, hi: r2 })
    }

    pub fn contains(&self, s: &OverlapSample) -> bool {
        match (self.kind, s.kind) {
            (WindowKind::RealInterval, EigenKind::RealLine) => {
                self.lo <= s.eigenvalue.re && s.eigenvalue.re <= self.hi
            }
            (WindowKind::Annulus, EigenKind::Complex) => {
                let r = s.eigenvalue.norm();
                self.lo <= r && r <= self.hi
            }
            _ => false,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            WindowKind::RealInterval => "real",
            WindowKind::Annulus => "annulus",
        };
        write!(f, "{kind}:{}:{}", self.lo, self.hi)
    }
}

pub fn bin_edges(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=BINS)
        .map(|i| nf * 10f64.powf(LOG10_LO + (LOG10_HI - LOG10_LO) * i as f64 / BINS as f64))
        .collect()
}

/// Log-binned histogram of `t` over samples inside a window.
///
/// `counts` has `BINS + 2` entries: `counts[0]` holds `t < edges[0]`,
/// `counts[i]` holds `edges[i-1] <= t < edges[i]`, and the last entry holds
/// `t >= edges[BINS]`, so the counts always sum to `n_samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionedHistogram {
    pub spec: EnsembleSpec,
    pub window: Window,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_matrices: u64,
    /// Matrices discarded as numerically degenerate.
    pub n_rejected: u64,
    pub n_samples: u64,
    /// `Σ t` in units of `2^-32`.
    pub sum_t_fixed: u128,
    /// `Σ t²` in units of `2^-8`.
    pub sum_t2_fixed: u128,
}

impl ConditionedHistogram {
    pub fn empty(spec: EnsembleSpec, window: Window) -> Self {
        Self {
            spec,
            window,
            bin_edges: bin_edges(spec.n),
            counts: vec![0; BINS + 2],
            n_matrices: 0,
            n_rejected: 0,
            n_samples: 0,
            sum_t_fixed: 0,
            sum_t2_fixed: 0,
        }
    }

    /// Histogram of externally supplied overlaps, e.g. synthetic draws.
    pub fn from_samples(spec: EnsembleSpec, window: Window, ts: impl IntoIterator<Item = f64>) -> Self {
        let mut h = Self::empty(spec, window);
        for t in ts {
            h.record(t);
        }
        h
    }

    pub fn record(&mut self, t: f64) {
        let slot = self.bin_edges.partition_point(|&e| e <= t);
        self.counts[slot] += 1;
        self.n_samples += 1;
        self.sum_t_fixed += (t * T_FIXED).round() as u128;
        self.sum_t2_fixed += (t * t * T2_FIXED).round() as u128;
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.spec != other.spec || self.window != other.window || self.bin_edges != other.bin_edges {
            return Err(domain("cannot merge histograms of different campaigns"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_matrices += other.n_matrices;
        self.n_rejected += other.n_rejected;
        self.n_samples += other.n_samples;
        self.sum_t_fixed += other.sum_t_fixed;
        self.sum_t2_fixed += other.sum_t2_fixed;
        Ok(())
    }

    /// Empirical CDF at each bin edge.
    pub fn ecdf_at_edges(&self) -> Vec<f64> {
        let n = self.n_samples as f64;
        let mut below = 0u64;
        (0..=BINS)
            .map(|i| {
                below += self.counts[i];
                below as f64 / n
            })
            .collect()
    }

    /// Sample mean of `t` and its standard error.
    pub fn mean_t(&self) -> Result<(f64, f64)> {
        if self.n_samples < 2 {
            return Err(Error::InsufficientSamples { needed: 2, got: self.n_samples as usize });
        }
        let n = self.n_samples as f64;
        let mean = self.sum_t_fixed as f64 / T_FIXED / n;
        let second = self.sum_t2_fixed as f64 / T2_FIXED / n;
        let var = (second - mean * mean).max(0.0) * n / (n - 1.0);
        Ok((mean, (var / n).sqrt()))
    }
}

fn accumulate_chunk(spec: &EnsembleSpec, window: &Window, range: Range<u64>) -> ConditionedHistogram {
    let mut h = ConditionedHistogram::empty(*spec, *window);
    for index in range {
        h.n_matrices += 1;
        match overlaps_biorthogonal(&sample_ginibre(spec, index), index) {
            Ok(samples) => {
                for s in samples.iter().filter(|s| window.contains(s)) {
                    h.record(s.t);
                }
            }
            Err(_) => h.n_rejected += 1,
        }
    }
    h
}

/// Histogram over matrices `range` of the stream; may be empty.
pub fn accumulate(spec: &EnsembleSpec, window: &Window, range: Range<u64>) -> ConditionedHistogram {
    let chunks: Vec<Range<u64>> = (range.start..range.end)
        .step_by(CHUNK as usize)
        .map(|s| s..(s + CHUNK).min(range.end))
        .collect();
    let parts: Vec<ConditionedHistogram> = chunks
        .into_par_iter()
        .map(|r| accumulate_chunk(spec, window, r))
        .collect();
    let mut total = ConditionedHistogram::empty(*spec, *window);
    for p in &parts {
        total.merge(p).expect("chunks share one campaign");
    }
    total
}

/// Sample matrices `0..n_matrices` and histogram `t` inside the window.
pub fn run_campaign(spec: &EnsembleSpec, n_matrices: u64, window: &Window) -> Result<ConditionedHistogram> {
    if n_matrices < 1 {
        return Err(domain("a campaign needs at least one matrix"));
    }
    let h = accumulate(spec, window, 0..n_matrices);
    if h.n_samples == 0 {
        return Err(Error::EmptyWindow);
    }
    Ok(h)
}

fn check_analytic(spec: &EnsembleSpec, window: &Window) -> Result<()> {
    if spec.n < 2 {
        return Err(domain("analytic conditional laws need N >= 2"));
    }
    match (spec.beta, window.kind) {
        (Beta::Real, WindowKind::RealInterval) | (Beta::Complex, WindowKind::Annulus) => Ok(()),
        (Beta::Real, WindowKind::Annulus) => Err(domain(
            "no analytic law for complex eigenvalues of real matrices",
        )),
        (Beta::Complex, WindowKind::RealInterval) => Err(domain(
            "complex matrices have no eigenvalues on the real line almost surely",
        )),
    }
}

/// Runs `f` with an error slot the integrand can fill; a captured error wins
/// over whatever the outer quadrature then reports.
fn with_captured<T>(f: impl FnOnce(&RefCell<Option<Error>>) -> Result<T>) -> Result<T> {
    let slot = RefCell::new(None);
    let out = f(&slot);
    match slot.into_inner() {
        Some(e) => Err(e),
        None => out,
    }
}

fn capture(slot: &RefCell<Option<Error>>, r: Result<f64>) -> f64 {
    match r {
        Ok(v) => v,
        Err(e) => {
            slot.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    }
}

/// `∫_0^T P(t, ·) dt` at one eigenvalue location, via `τ = t/(1+t)`.
fn partial_mass(jpd: &dyn Fn(f64) -> f64, t_max: f64, singular_at_zero: bool, quad: &QuadSpec) -> Result<f64> {
    if t_max <= 0.0 {
        return Ok(0.0);
    }
    let tau_max = if t_max.is_infinite() { 1.0 } else { t_max / (1.0 + t_max) };
    let spec = if singular_at_zero { quad.with_endpoint(Endpoint::InverseSqrt) } else { *quad };
    let integrand = |tau: f64| {
        if tau >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - tau;
        jpd(tau / w) / (w * w)
    };
    Ok(integrate_finite(integrand, 0.0, tau_max, &spec)?.value)
}

fn window_integral(window: &Window, quad: &QuadSpec, f: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    with_captured(|slot| {
        let g = |x: f64| capture(slot, f(x));
        Ok(integrate_finite(g, window.lo, window.hi, quad)?.value)
    })
}

/// Numerator `∫_window ∫_0^T P` for one `T`.
fn window_mass(spec: &EnsembleSpec, window: &Window, t_max: f64, quad: &QuadSpec) -> Result<f64> {
    let n = spec.n as u32;
    match window.kind {
        WindowKind::RealInterval => window_integral(window, quad, &|lambda| {
            let jpd = |t: f64| {
                jpd_real(&RealJpdQuery::new(n, t, lambda), RealForm::SumForm).unwrap_or(f64::NAN)
            };
            partial_mass(&jpd, t_max, n <= 3, quad)
        }),
        WindowKind::Annulus => window_integral(window, quad, &|r| {
            let p = ComplexJpd::new(n, r * r)?;
            Ok(2.0 * PI * r * partial_mass(&|t| p.eval(t), t_max, false, quad)?)
        }),
    }
}

/// Mean eigenvalue count inside the window.
pub fn window_density_mass(spec: &EnsembleSpec, window: &Window, quad: &QuadSpec) -> Result<f64> {
    check_analytic(spec, window)?;
    let n = spec.n as u32;
    match window.kind {
        WindowKind::RealInterval => window_integral(window, quad, &|lambda| density_real(n, lambda)),
        WindowKind::Annulus => window_integral(window, quad, &|r| Ok(2.0 * PI * r * density_complex(n, r * r)?)),
    }
}

/// Conditional CDF of `t` given an eigenvalue in the window, at each grid point.
pub fn analytic_conditional_cdf(
    spec: &EnsembleSpec,
    window: &Window,
    t_grid: &[f64],
    quad: &QuadSpec,
) -> Result<Vec<f64>> {
    let denom = window_density_mass(spec, window, quad)?;
    if !(denom > 0.0) {
        return Err(Error::EmptyWindow);
    }
    t_grid
        .iter()
        .map(|&t| {
            if t <= 0.0 {
                Ok(0.0)
            } else {
                Ok((window_mass(spec, window, t, quad)? / denom).min(1.0))
            }
        })
        .collect()
}

/// Conditional mean of `t` for complex eigenvalues in an annulus.
pub fn analytic_conditional_mean(spec: &EnsembleSpec, window: &Window, quad: &QuadSpec) -> Result<f64> {
    check_analytic(spec, window)?;
    if spec.beta == Beta::Real {
        return Err(domain("the conditional mean of t is infinite for real eigenvalues"));
    }
    let n = spec.n as u32;
    let num = window_integral(window, quad, &|r| {
        let p = ComplexJpd::new(n, r * r)?;
        let scale = (n as f64 * (1.0 - r * r / n as f64)).max((n as f64).sqrt());
        let m = integrate_semi_infinite_scaled(|t| t * p.eval(t), scale, quad)?.value;
        Ok(2.0 * PI * r * m)
    })?;
    Ok(num / window_density_mass(spec, window, quad)?)
}

/// `c(α) = √(-ln(α/2)/2)`, the asymptotic Kolmogorov critical constant.
pub fn ks_critical_constant(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

pub const DEFAULT_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub statistic_name: String,
    pub statistic_value: f64,
    pub threshold: f64,
    pub sample_size: u64,
    pub pass: bool,
    pub metadata: BTreeMap<String, String>,
}

pub fn campaign_metadata(hist: &ConditionedHistogram) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("seed".into(), hist.spec.seed.to_string());
    m.insert("n".into(), hist.spec.n.to_string());
    m.insert("beta".into(), hist.spec.beta.to_string());
    m.insert("window".into(), hist.window.to_string());
    m.insert("n_matrices".into(), hist.n_matrices.to_string());
    m.insert("n_rejected".into(), hist.n_rejected.to_string());
    m
}

/// Kolmogorov distance between the histogram's empirical CDF and `cdf`
/// (given at the histogram's bin edges), at level `alpha`.
pub fn ks_compare(hist: &ConditionedHistogram, cdf_at_edges: &[f64], alpha: f64) -> Result<ComparisonReport> {
    if hist.n_samples < 100 {
        return Err(Error::InsufficientSamples { needed: 100, got: hist.n_samples as usize });
    }
    if cdf_at_edges.len() != hist.bin_edges.len() {
        return Err(domain("analytic CDF must be given at every bin edge"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha must lie in (0, 1)"));
    }
    let d = hist
        .ecdf_at_edges()
        .iter()
        .zip(cdf_at_edges)
        .map(|(e, f)| (e - f).abs())
        .fold(0.0, f64::max);
    let c = ks_critical_constant(alpha);
    let threshold = c / (hist.n_samples as f64).sqrt();
    let mut metadata = campaign_metadata(hist);
    metadata.insert("alpha".into(), alpha.to_string());
    metadata.insert("c_alpha".into(), format!("{c:.6}"));
    Ok(ComparisonReport {
        statistic_name: "kolmogorov-smirnov".into(),
        statistic_value: d,
        threshold,
        sample_size: hist.n_samples,
        pass: d <= threshold,
        metadata,
    })
}

/// [`ks_compare`] against the exact conditional law of the campaign.
pub fn compare_to_analytic(hist: &ConditionedHistogram, alpha: f64, quad: &QuadSpec) -> Result<ComparisonReport> {
    let cdf = analytic_conditional_cdf(&hist.spec, &hist.window, &hist.bin_edges, quad)?;
    ks_compare(hist, &cdf, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Least-squares slope of `ln S(t)` against `ln t` over bin edges `>= t_min`
/// that still have at least ten survivors.
pub fn tail_exponent(hist: &ConditionedHistogram, t_min: f64) -> Result<TailFit> {
    let n = hist.n_samples as f64;
    let mut survivors = hist.n_samples;
    let mut pts = Vec::new();
    for (i, &edge) in hist.bin_edges.iter().enumerate() {
        survivors -= hist.counts[i];
        if edge >= t_min && survivors >= 10 {
            pts.push((edge.ln(), (survivors as f64 / n).ln(), survivors as f64));
        }
    }
    if pts.len() < 5 {
        return Err(Error::InsufficientTail(format!(
            "{} usable edges above t_min = {t_min}, need 5",
            pts.len()
        )));
    }
    // Var(ln S) ≈ 1/survivors, so weight each edge by its survivor count
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = pts.iter().map(|p| p.2 * (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let stderr = (ssr / (pts.len() as f64 - 2.0) / sxx).sqrt();
    Ok(TailFit { slope, stderr, points: pts.len() })
}
