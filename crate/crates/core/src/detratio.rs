//! Averaged ratios of characteristic polynomials
//!
//! `D^(L)_{N,β}(z, p) = E[ det^{βL/2}(W W*) / det^{β/2}((2p/β) I + W W*) ]`
//! with `W = z - G` and `G` drawn from the Ginibre ensemble of index `β`.
//! Closed forms are one-dimensional `t`-integrals; the Monte Carlo route
//! samples the same matrix stream as [`crate::ensemble`].

use std::ops::Range;

use nalgebra::{ComplexField, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic_complex::coeffs;
use crate::ensemble::{sample_ginibre, Beta, EnsembleSpec, GinibreMatrix, C64};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_finite, integrate_semi_infinite_scaled, Endpoint, QuadSpec};
use crate::specfun::{ln_factorial, ln_sum_exp, log_gamma};

const CHUNK: u64 = 4096;
pub const MIN_MC_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetRatioQuery {
    pub n: usize,
    pub beta: Beta,
    pub l: u32,
    pub z: C64,
    pub p: f64,
}

impl DetRatioQuery {
    pub fn new(n: usize, beta: Beta, l: u32, z: C64, p: f64) -> Result<Self> {
        let q = Self { n, beta, l, z, p };
        q.validate()?;
        Ok(q)
    }

    pub fn real(n: usize, l: u32, lambda: f64, p: f64) -> Result<Self> {
        Self::new(n, Beta::Real, l, C64::new(lambda, 0.0), p)
    }

    pub fn complex(n: usize, l: u32, z: C64, p: f64) -> Result<Self> {
        Self::new(n, Beta::Complex, l, z, p)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 || self.n > u32::MAX as usize {
            return Err(domain(format!("matrix size must be at least 1, got {}", self.n)));
        }
        match (self.beta, self.l) {
            (Beta::Real, 0 | 2) | (Beta::Complex, 0 | 1 | 2) => {}
            (b, l) => return Err(domain(format!("unsupported pair (beta={b}, L={l})"))),
        }
        if !(self.p >= 0.0) || !self.p.is_finite() {
            return Err(domain(format!("p must be finite and nonnegative, got {}", self.p)));
        }
        if !self.z.re.is_finite() || !self.z.im.is_finite() {
            return Err(domain("z must be finite"));
        }
        if self.beta == Beta::Real && self.z.im != 0.0 {
            return Err(domain("z must be real for beta=1"));
        }
        Ok(())
    }

    fn a(&self) -> f64 {
        self.z.norm_sqr()
    }
}

/// Mergeable `(count, Σx, Σx²)` accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioAccumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl RatioAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn estimate(&self) -> Result<McEstimate> {
        if self.count < 2 {
            return Err(Error::InsufficientSamples { needed: 2, got: self.count as usize });
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
        Ok(McEstimate { mean, stderr: (var / n).sqrt(), n_samples: self.count })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
}

impl McEstimate {
    /// `(mean - reference)/stderr`.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.stderr
    }
}

/// `ln|det m|` by partial-pivot LU; `-inf` for a singular matrix.
fn ln_abs_det<T: ComplexField<RealField = f64>>(m: DMatrix<T>) -> f64 {
    let lu = m.lu();
    let u = lu.u();
    (0..u.nrows()).map(|i| u[(i, i)].clone().modulus().ln()).sum()
}

/// `ln det(c I + W W*)` by Cholesky, `c > 0`.
fn ln_det_shifted_gram<T: ComplexField<RealField = f64>>(w: &DMatrix<T>, c: f64) -> f64 {
    let n = w.nrows();
    let mut gram = w * w.adjoint();
    for i in 0..n {
        gram[(i, i)] += T::from_real(c);
    }
    let chol = gram.cholesky().expect("shifted Gram matrix is positive definite");
    let l = chol.l_dirty();
    2.0 * (0..n).map(|i| l[(i, i)].clone().real().ln()).sum::<f64>()
}

/// The ratio for one matrix, assembled in log space.
pub fn ratio_sample(q: &DetRatioQuery, g: &GinibreMatrix) -> f64 {
    let beta = q.beta.as_f64();
    let (ln_det_w, ln_den) = match g {
        GinibreMatrix::Real(m) => {
            let w = DMatrix::<f64>::identity(m.nrows(), m.ncols()) * q.z.re - m;
            (ln_abs_det(w.clone()), ln_det_shifted_gram(&w, 2.0 * q.p / beta))
        }
        GinibreMatrix::Complex(m) => {
            let w = DMatrix::<C64>::identity(m.nrows(), m.ncols()) * q.z - m;
            (ln_abs_det(w.clone()), ln_det_shifted_gram(&w, 2.0 * q.p / beta))
        }
    };
    let ln_num = if q.l == 0 { 0.0 } else { beta * q.l as f64 * ln_det_w };
    (ln_num - 0.5 * beta * ln_den).exp()
}

fn accumulate_chunk(q: &DetRatioQuery, spec: &EnsembleSpec, range: Range<u64>) -> RatioAccumulator {
    let mut acc = RatioAccumulator::default();
    for index in range {
        acc.push(ratio_sample(q, &sample_ginibre(spec, index)));
    }
    acc
}

/// Ratios over matrices `range` of the stream with the given seed.
pub fn accumulate(q: &DetRatioQuery, seed: u64, range: Range<u64>) -> Result<RatioAccumulator> {
    q.validate()?;
    let spec = EnsembleSpec::new(q.n, q.beta, seed)?;
    let chunks: Vec<Range<u64>> = (range.start..range.end)
        .step_by(CHUNK as usize)
        .map(|s| s..(s + CHUNK).min(range.end))
        .collect();
    let parts: Vec<RatioAccumulator> =
        chunks.into_par_iter().map(|r| accumulate_chunk(q, &spec, r)).collect();
    let mut total = RatioAccumulator::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// Sample mean and standard error of the ratio over matrices `0..n_samples`.
pub fn detratio_mc(q: &DetRatioQuery, n_samples: u64, seed: u64) -> Result<McEstimate> {
    q.validate()?;
    if !(q.p > 0.0) {
        return Err(domain("Monte Carlo ratios need p > 0"));
    }
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_MC_SAMPLES as usize, got: n_samples as usize });
    }
    accumulate(q, seed, 0..n_samples)?.estimate()
}

/// `ln Σ_{k≤m} a^k/k!`
fn ln_exp_partial(m: u32, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let la = a.ln();
    let terms: Vec<f64> = (0..=m).map(|k| k as f64 * la - ln_factorial(k)).collect();
    ln_sum_exp(&terms)
}

/// `ln Σ_{k≤m} (m-k) a^k/k!`, i.e. `ln[e^a (Γ(m+1,a) - aΓ(m,a))/(m-1)!]`.
fn ln_exp_deficit(m: u32, a: f64) -> f64 {
    if a == 0.0 {
        return (m as f64).ln();
    }
    let la = a.ln();
    let terms: Vec<f64> = (0..m).map(|k| ((m - k) as f64).ln() + k as f64 * la - ln_factorial(k)).collect();
    ln_sum_exp(&terms)
}

/// `ln{e^a [Γ(N+1,a) - τ a Γ(N,a)] / (N-1)!}`, as a positive combination.
fn ln_gamma_bracket(n: u32, a: f64, tau: f64) -> f64 {
    let head = (1.0 - tau).ln() + (n as f64).ln() + ln_exp_partial(n, a);
    let tail = tau.ln() + ln_exp_deficit(n, a);
    ln_sum_exp(&[head, tail])
}

/// `ln[1/(2^{N/2} Γ(N/2))]`
fn ln_c_real(n: u32) -> f64 {
    -(0.5 * n as f64) * std::f64::consts::LN_2 - log_gamma(0.5 * n as f64).expect("N/2 > 0")
}

fn t_integral(q: &DetRatioQuery, quad: &QuadSpec, ln_f: impl Fn(f64) -> f64) -> Result<f64> {
    let odd_real = q.beta == Beta::Real && q.n % 2 == 1;
    let base = if q.p >= 1.0 { 1.0 / q.p } else { 1.0 };
    let (spec, scale) = if odd_real {
        (quad.with_endpoint(Endpoint::InverseSqrt), base.sqrt())
    } else {
        (*quad, base)
    };
    let p = q.p;
    let ln_g = |t: f64| if t <= 0.0 { f64::NEG_INFINITY } else { ln_f(t) - p * t + t.ln() };
    // values can be far below the absolute tolerance, so integrate relative to a peak estimate
    let ln_peak = (-40..=40)
        .map(|k| ln_g(base * 2f64.powf(0.5 * k as f64)))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if ln_peak == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let f = |t: f64| {
        let v = ln_f(t) - p * t - ln_peak;
        if t <= 0.0 || v == f64::NEG_INFINITY {
            0.0
        } else {
            v.exp()
        }
    };
    Ok(integrate_semi_infinite_scaled(f, scale, &spec)?.value * ln_peak.exp())
}

/// The closed-form `t`-integral for every supported `(β, L)`.
///
/// `L = 0` needs `p > 0`; the integral diverges at `p = 0`.
pub fn detratio_closed(q: &DetRatioQuery, quad: &QuadSpec) -> Result<f64> {
    q.validate()?;
    if q.l == 0 && !(q.p > 0.0) {
        return Err(domain("L = 0 ratios diverge at p = 0"));
    }
    let n = q.n as u32;
    let nf = n as f64;
    let a = q.a();
    let ln_tau = |t: f64| t.ln() - t.ln_1p();
    match (q.beta, q.l) {
        (Beta::Real, 0) => {
            let c = ln_c_real(n);
            t_integral(q, quad, |t| {
                let lt = ln_tau(t);
                c - t.ln() - 0.5 * a * lt.exp() + 0.5 * nf * lt
            })
        }
        (Beta::Real, _) => {
            let c = ln_c_real(n) + ln_factorial(n - 1);
            t_integral(q, quad, |t| {
                let lt = ln_tau(t);
                let tau = lt.exp();
                c + 0.5 * (nf - 2.0) * lt - 2.0 * t.ln_1p() - 0.5 * a * tau + ln_gamma_bracket(n, a, tau)
            })
        }
        (Beta::Complex, 0) => {
            let c = -ln_factorial(n - 1);
            t_integral(q, quad, |t| {
                let lt = ln_tau(t);
                c - t.ln() - a * lt.exp() + nf * lt
            })
        }
        (Beta::Complex, 1) => t_integral(q, quad, |t| {
            let lt = ln_tau(t);
            let tau = lt.exp();
            (nf - 1.0) * lt - 2.0 * t.ln_1p() - a * tau + ln_gamma_bracket(n, a, tau)
        }),
        (Beta::Complex, _) => {
            let k = coeffs(n + 1, a)?;
            let c = 2.0 * a - ln_factorial(n - 1) + k.log_scale;
            t_integral(q, quad, |t| {
                let u = 1.0 / (1.0 + t);
                let bracket = k.big_d1 + a * u * (k.big_d2 + a * u * k.d1);
                if !(bracket > 0.0) {
                    return f64::NEG_INFINITY;
                }
                let lt = ln_tau(t);
                c - a * lt.exp() + (nf - 1.0) * lt - 3.0 * t.ln_1p() + bracket.ln()
            })
        }
    }
}

/// `D^(2)_{N,2}(0, p)` via its specialized single-term integral.
pub fn detratio_closed_origin(n: usize, p: f64, quad: &QuadSpec) -> Result<f64> {
    let q = DetRatioQuery::complex(n, 2, C64::new(0.0, 0.0), p)?;
    let n = n as u32;
    let c = (n as f64).ln() + ln_factorial(n + 1);
    t_integral(&q, quad, |t| {
        let lt = t.ln() - t.ln_1p();
        c + (n as f64 - 1.0) * lt - 3.0 * t.ln_1p()
    })
}

/// `D^(2)_{N,1}(λ, 0) = E|det(λ - G)|` for real Ginibre `G`, in closed form
/// up to a one-dimensional Gaussian moment integral.
pub fn abs_det_mean_real(n: usize, lambda: f64, quad: &QuadSpec) -> Result<f64> {
    DetRatioQuery::real(n, 2, lambda, 0.0)?;
    let n = n as u32;
    let a = lambda * lambda;
    let x = lambda.abs();
    let head = (-0.5 * a + ln_factorial(n - 1) + ln_exp_partial(n - 1, a)).exp();
    let moment = if x == 0.0 {
        0.0
    } else {
        integrate_finite(|u: f64| (-0.5 * u * u).exp() * u.powi(n as i32 - 1), 0.0, x, quad)?.value
    };
    Ok(2.0 * ln_c_real(n).exp() * (head + x.powi(n as i32) * moment))
}

/// `E[det²(λ - G)] = λ^{2N} + N!·Σ_{k<N} λ^{2k}/k!` for real Ginibre `G`.
pub fn mean_det_sq_real(n: usize, lambda: f64) -> Result<f64> {
    if n < 1 || n > u32::MAX as usize {
        return Err(domain(format!("matrix size must be at least 1, got {n}")));
    }
    if !lambda.is_finite() {
        return Err(domain("lambda must be finite"));
    }
    let n = n as u32;
    let a = lambda * lambda;
    let lead = if a == 0.0 { f64::NEG_INFINITY } else { n as f64 * a.ln() };
    Ok(ln_sum_exp(&[lead, ln_factorial(n) + ln_exp_partial(n - 1, a)]).exp())
}
