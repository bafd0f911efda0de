//! Self-overlaps of real eigenvalues of the real Ginibre ensemble.
//!
//! `P(t, λ)` is the joint density of the self-overlap `t = O_aa - 1` and a
//! real eigenvalue `λ`, normalized so that `∫ P dt` is the mean density of
//! real eigenvalues.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::{integrate_semi_infinite_scaled, Endpoint, Integral, QuadSpec};
use crate::specfun::{erfc, erfcx, ln_factorial, ln_gaussian_moment, ln_reg_gamma_q, ln_sum_exp};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealJpdQuery {
    pub n: u32,
    pub t: f64,
    pub lambda: f64,
}

impl RealJpdQuery {
    pub fn new(n: u32, t: f64, lambda: f64) -> Self {
        Self { n, t, lambda }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain(format!("real JPD needs N >= 2, got {}", self.n)));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(domain(format!("overlap t must be finite and > 0, got {}", self.t)));
        }
        if !self.lambda.is_finite() {
            return Err(domain("eigenvalue must be finite"));
        }
        Ok(())
    }
}

/// Which of the two equivalent closed forms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RealForm {
    /// Finite sum with nonnegative terms.
    SumForm,
    /// Incomplete-gamma form.
    #[default]
    GammaForm,
}

/// Bulk-scaled coordinates: `s = t/N` and `x = λ/√N` (or `|w| = |z|/√N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkPoint {
    pub s: f64,
    pub x: f64,
}

/// Edge-scaled coordinates: `σ = t/√N` and `δ = λ - √N` (or `|z| - √N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgePoint {
    pub sigma: f64,
    pub delta: f64,
}

impl EdgePoint {
    /// `Δ = 1 - 2σδ`
    pub fn big_delta(&self) -> f64 {
        1.0 - 2.0 * self.sigma * self.delta
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(domain(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

fn ln_jpd_sum_form(n: u32, t: f64, lambda: f64) -> f64 {
    let a = lambda * lambda;
    let nf = n as f64;
    let inv1t = 1.0 / (1.0 + t);
    let ln_a = a.ln();
    let ln_terms: Vec<f64> = (0..n)
        .filter_map(|k| {
            let kf = k as f64;
            let weight = (nf - 1.0 - kf) + kf * inv1t;
            if k > 0 && a == 0.0 {
                return None;
            }
            let ln_pow = if k == 0 { 0.0 } else { kf * ln_a };
            Some(ln_pow - ln_factorial(k) + weight.ln())
        })
        .collect();
    let tau = t * inv1t;
    INV_SQRT_2PI.ln() - std::f64::consts::LN_2 - 0.5 * a * (1.0 + tau)
        + 0.5 * (nf - 3.0) * t.ln()
        - 0.5 * (nf + 1.0) * t.ln_1p()
        + ln_sum_exp(&ln_terms)
}

fn jpd_gamma_form(n: u32, t: f64, lambda: f64) -> Result<f64> {
    let a = lambda * lambda;
    let nf = n as f64;
    let tau = t / (1.0 + t);
    let ln_qn = ln_reg_gamma_q(n, a)?;
    let ratio = (ln_reg_gamma_q(n - 1, a)? - ln_qn).exp();
    let bracket = (nf - 1.0) - a * tau * ratio;
    if bracket <= 0.0 {
        return Ok(0.0);
    }
    let ln_p = INV_SQRT_2PI.ln() - std::f64::consts::LN_2 + a / (2.0 * (1.0 + t))
        - t.ln()
        - t.ln_1p()
        + 0.5 * (nf - 1.0) * tau.ln()
        + ln_qn
        + bracket.ln();
    Ok(ln_p.exp())
}

/// Joint density `P(t, λ)` of the self-overlap and a real eigenvalue at matrix size `N`.
pub fn jpd_real(q: &RealJpdQuery, form: RealForm) -> Result<f64> {
    q.validate()?;
    match form {
        RealForm::SumForm => Ok(ln_jpd_sum_form(q.n, q.t, q.lambda).exp()),
        RealForm::GammaForm => jpd_gamma_form(q.n, q.t, q.lambda),
    }
}

/// Mean density of real eigenvalues at size `N`.
pub fn density_real(n: u32, lambda: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("real eigenvalue density needs N >= 2, got {n}")));
    }
    if !lambda.is_finite() {
        return Err(domain("eigenvalue must be finite"));
    }
    let a = lambda * lambda;
    let first = ln_reg_gamma_q(n - 1, a)?.exp();
    let x = lambda.abs();
    let second = if x == 0.0 {
        0.0
    } else {
        let m = (n - 2) as f64;
        ((n - 1) as f64 * x.ln() - 0.5 * a + ln_gaussian_moment(m, x) - ln_factorial(n - 2)).exp()
    };
    Ok(INV_SQRT_2PI * (first + second))
}

/// Scale for the half-line map that puts most of the overlap mass near `u = 1/2`.
pub(crate) fn overlap_scale(n: u32, x_sq: f64) -> f64 {
    let nf = n as f64;
    (0.5 * nf * (1.0 - x_sq)).max(0.5 * nf.sqrt()).max(0.5)
}

/// `∫_0^∞ P(t, λ) dt` by quadrature; equals [`density_real`].
pub fn integrate_jpd_real(n: u32, lambda: f64, spec: &QuadSpec) -> Result<Integral> {
    RealJpdQuery::new(n, 1.0, lambda).validate()?;
    let spec = if n <= 3 {
        spec.with_endpoint(Endpoint::InverseSqrt)
    } else {
        *spec
    };
    let scale = overlap_scale(n, lambda * lambda / n as f64);
    integrate_semi_infinite_scaled(|t| ln_jpd_sum_form(n, t, lambda).exp(), scale, &spec)
}

/// Bulk limit `lim N·P(N s, √N x)`; zero for `|x| >= 1`.
pub fn jpd_real_bulk(p: BulkPoint) -> Result<f64> {
    check_positive("s", p.s)?;
    let g = 1.0 - p.x * p.x;
    if !(g > 0.0) {
        return Ok(0.0);
    }
    Ok(g * (-g / (2.0 * p.s)).exp() * INV_SQRT_2PI / (2.0 * p.s * p.s))
}

/// Bulk density of real eigenvalues in units of `x = λ/√N`.
pub fn density_real_bulk(x: f64) -> f64 {
    if x.abs() < 1.0 {
        INV_SQRT_2PI
    } else {
        0.0
    }
}

/// Edge limit `lim √N·P(√N σ, √N + δ)`.
pub fn jpd_real_edge(p: EdgePoint) -> Result<f64> {
    check_positive("sigma", p.sigma)?;
    if !p.delta.is_finite() {
        return Err(domain("delta must be finite"));
    }
    let (sigma, delta) = (p.sigma, p.delta);
    let c = 0.5 * INV_SQRT_2PI;
    let shift = 0.5 / sigma - delta;
    let bracket_scaled = if delta > 0.0 {
        // e^{-1/(4σ²)+δ/σ} erfc(√2δ) = e^{-(1/(2σ)-δ)²-δ²} erfcx(√2δ)
        let e = (-(shift * shift) - delta * delta).exp();
        e * (INV_SQRT_2PI + 0.5 * (1.0 / sigma - 2.0 * delta) * erfcx(SQRT_2 * delta))
    } else {
        let e0 = (-0.25 / (sigma * sigma) + delta / sigma).exp();
        (-(shift * shift) - delta * delta).exp() * INV_SQRT_2PI
            + e0 * 0.5 * (1.0 / sigma - 2.0 * delta) * erfc(SQRT_2 * delta)
    };
    Ok((c / (sigma * sigma) * bracket_scaled).max(0.0))
}

/// Edge density of real eigenvalues at offset `δ = λ - √N`.
pub fn density_real_edge(delta: f64) -> f64 {
    0.5 * INV_SQRT_2PI
        * (erfc(SQRT_2 * delta) + FRAC_1_SQRT_2 * (-delta * delta).exp() * erfc(-delta))
}
