//! Self-overlaps of eigenvalues of the complex Ginibre ensemble.
//!
//! `P(t, z)` depends on `z` only through `a = |z|²`. The coefficients
//! `d1, d2` are differences of products of incomplete gamma functions that
//! cancel catastrophically once `a` is comparable with `N`; they are formed
//! from the partial exponential sums `e_m(a) = Σ_{k≤m} a^k/k!` in
//! double-double arithmetic, using `Γ(m+1, a) = m! e^{-a} e_m(a)`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::analytic_real::{check_positive, overlap_scale, BulkPoint, EdgePoint};
use crate::dd::DoubleDouble as Dd;
use crate::error::{domain, Result};
use crate::quadrature::{integrate_semi_infinite_scaled, Integral, QuadSpec};
use crate::specfun::{erfc, erfcx, ln_factorial, ln_reg_gamma_q};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJpdQuery {
    pub n: u32,
    pub t: f64,
    pub z_abs_sq: f64,
}

impl ComplexJpdQuery {
    pub fn new(n: u32, t: f64, z_abs_sq: f64) -> Self {
        Self { n, t, z_abs_sq }
    }

    fn validate(&self) -> Result<()> {
        check_order(self.n)?;
        check_positive("t", self.t)?;
        check_abs_sq(self.z_abs_sq)
    }
}

fn check_order(n: u32) -> Result<()> {
    if n < 2 {
        return Err(domain(format!("complex JPD needs N >= 2, got {n}")));
    }
    Ok(())
}

fn check_abs_sq(a: f64) -> Result<()> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(domain(format!("|z|^2 must be finite and >= 0, got {a}")));
    }
    Ok(())
}

/// The four coefficients at `(N, |z|²)`. Each true value equals the stored
/// field times `e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffBundle {
    pub log_scale: f64,
    pub d1: f64,
    pub d2: f64,
    pub big_d1: f64,
    pub big_d2: f64,
}

impl CoeffBundle {
    /// `(d1, d2, D1, D2)` without scaling; overflows to infinity for large `N`.
    pub fn unscaled(&self) -> [f64; 4] {
        let s = self.log_scale.exp();
        [self.d1 * s, self.d2 * s, self.big_d1 * s, self.big_d2 * s]
    }
}

/// `e_m(a) e^{-L}` for `m = -1 ..= n+1`, index shifted by one.
fn scaled_partial_sums(n: u32, a: f64) -> (Vec<Dd>, f64) {
    let top = n as usize + 1;
    if a == 0.0 {
        let mut e = vec![Dd::ONE; top + 2];
        e[0] = Dd::ZERO;
        return (e, 0.0);
    }
    let k0 = (a.floor() as usize).min(top);
    let ln_lead = k0 as f64 * a.ln() - ln_factorial(k0 as u32);
    let mut terms = vec![Dd::ZERO; top + 1];
    terms[k0] = Dd::ONE;
    for k in (0..k0).rev() {
        terms[k] = terms[k + 1].mul_f64((k + 1) as f64).div_f64(a);
    }
    for k in k0 + 1..=top {
        terms[k] = terms[k - 1].mul_f64(a).div_f64(k as f64);
    }
    let mut e = Vec::with_capacity(top + 2);
    e.push(Dd::ZERO);
    let mut acc = Dd::ZERO;
    for term in terms {
        acc = acc + term;
        e.push(acc);
    }
    (e, ln_lead)
}

struct ScaledCoeffs {
    log_scale: f64,
    b1: Dd,
    b2: Dd,
    big_d1: Dd,
    big_d2: Dd,
}

fn scaled_coeffs(n: u32, a: f64) -> ScaledCoeffs {
    let (e, ln_lead) = scaled_partial_sums(n, a);
    let em = |m: i64| e[(m + 1) as usize];
    let ni = n as i64;
    let nf = n as f64;
    let b1 = em(ni - 2).mul_f64(nf) * em(ni) - (em(ni - 1) * em(ni - 1)).mul_f64(nf - 1.0);
    let b2 = (em(ni - 2) * em(ni + 1)).mul_f64(nf * (nf + 1.0))
        - (em(ni - 1) * em(ni)).mul_f64(nf * (nf - 1.0));
    let c1 = (em(ni - 3) * em(ni - 1)).mul_f64(nf - 1.0) - (em(ni - 2) * em(ni - 2)).mul_f64(nf - 2.0);
    let c2 = (em(ni - 3) * em(ni)).mul_f64(nf) - (em(ni - 2) * em(ni - 1)).mul_f64(nf - 2.0);
    let big_d1 = c1.mul_f64(a * a) + b1.mul_f64((nf - 1.0) * nf - 2.0 * a * (nf + a))
        - c2.mul_f64(a * (nf - a))
        + b2.mul_f64(a);
    let big_d2 = b1.mul_f64(2.0 * nf) - c2.mul_f64(a);
    let log_scale = ln_factorial(n - 2) + ln_factorial(n - 1) - 2.0 * a + 2.0 * ln_lead;
    ScaledCoeffs {
        log_scale,
        b1,
        b2,
        big_d1,
        big_d2,
    }
}

/// The coefficients `d1, d2, D1, D2` entering the finite-N complex JPD.
pub fn coeffs(n: u32, z_abs_sq: f64) -> Result<CoeffBundle> {
    check_order(n)?;
    check_abs_sq(z_abs_sq)?;
    let c = scaled_coeffs(n, z_abs_sq);
    Ok(CoeffBundle {
        log_scale: c.log_scale,
        d1: c.b1.to_f64(),
        d2: c.b2.to_f64(),
        big_d1: c.big_d1.to_f64(),
        big_d2: c.big_d2.to_f64(),
    })
}

/// `P(·, z)` at fixed `(N, |z|²)` with the t-independent parts precomputed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ComplexJpd {
    n: u32,
    a: f64,
    ln_pref: f64,
    big_d1: f64,
    big_d2: f64,
    d1: f64,
}

impl ComplexJpd {
    pub(crate) fn new(n: u32, a: f64) -> Result<Self> {
        check_order(n)?;
        check_abs_sq(a)?;
        let c = scaled_coeffs(n, a);
        // 1/((N-1)!(N-2)!) cancels against the factorials inside log_scale
        let ln_pref = -PI.ln() + c.log_scale - ln_factorial(n - 2) - ln_factorial(n - 1);
        Ok(Self {
            n,
            a,
            ln_pref,
            big_d1: c.big_d1.to_f64(),
            big_d2: c.big_d2.to_f64(),
            d1: c.b1.to_f64(),
        })
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        let u = 1.0 / (1.0 + t);
        let a = self.a;
        let bracket = self.big_d1 + a * u * (self.big_d2 + a * u * self.d1);
        if !(bracket > 0.0) {
            return 0.0;
        }
        let tau = t * u;
        let ln_tau_pow = if self.n == 2 { 0.0 } else { (self.n - 2) as f64 * tau.ln() };
        (self.ln_pref + a * u - 3.0 * t.ln_1p() + ln_tau_pow + bracket.ln()).exp()
    }
}

/// Joint density `P(t, z)` of the self-overlap and a complex eigenvalue.
pub fn jpd_complex(q: &ComplexJpdQuery) -> Result<f64> {
    q.validate()?;
    Ok(ComplexJpd::new(q.n, q.z_abs_sq)?.eval(q.t))
}

/// `P(t, 0) = N(N-1)/π · t^{N-2}/(1+t)^{N+1}`.
pub fn jpd_complex_zero(n: u32, t: f64) -> Result<f64> {
    check_order(n)?;
    check_positive("t", t)?;
    let nf = n as f64;
    let ln_tpow = if n == 2 { 0.0 } else { (nf - 2.0) * t.ln() };
    Ok(((nf * (nf - 1.0) / PI).ln() + ln_tpow - (nf + 1.0) * t.ln_1p()).exp())
}

/// Mean eigenvalue density `Q(N, |z|²)/π`.
pub fn density_complex(n: u32, z_abs_sq: f64) -> Result<f64> {
    if n < 1 {
        return Err(domain("complex eigenvalue density needs N >= 1"));
    }
    check_abs_sq(z_abs_sq)?;
    Ok(ln_reg_gamma_q(n, z_abs_sq)?.exp() / PI)
}

/// `∫_0^∞ P(t, z) dt` by quadrature; equals [`density_complex`].
pub fn integrate_jpd_complex(n: u32, z_abs_sq: f64, spec: &QuadSpec) -> Result<Integral> {
    let jpd = ComplexJpd::new(n, z_abs_sq)?;
    let scale = overlap_scale(n, z_abs_sq / n as f64);
    integrate_semi_infinite_scaled(|t| jpd.eval(t), scale, spec)
}

/// Bulk limit `lim N·P(N s, √N w)` with `p.x = |w|`; zero for `|w| >= 1`.
pub fn jpd_complex_bulk(p: BulkPoint) -> Result<f64> {
    check_positive("s", p.s)?;
    let g = 1.0 - p.x * p.x;
    if !(g > 0.0) {
        return Ok(0.0);
    }
    Ok(g * g * (-g / p.s).exp() / (PI * p.s.powi(3)))
}

/// Edge limit `lim √N·P(√N σ, |z| = √N + δ)`.
pub fn jpd_complex_edge(p: EdgePoint) -> Result<f64> {
    check_positive("sigma", p.sigma)?;
    if !p.delta.is_finite() {
        return Err(domain("delta must be finite"));
    }
    let (sigma, delta) = (p.sigma, p.delta);
    let big = p.big_delta();
    let s2 = sigma * sigma;
    let expo = -big * big / (2.0 * s2);
    let poly1 = (2.0 * s2 - big) / PI;
    let poly2 = -(4.0 * delta * s2 - big * (2.0 * delta + sigma)) * INV_SQRT_2PI;
    let poly3 = 0.5 * (big * big - s2);
    let x = SQRT_2 * delta;
    let braces = if delta > 0.0 {
        let r = erfcx(x);
        (expo - 2.0 * delta * delta).exp() * (poly1 + poly2 * r + poly3 * r * r)
    } else {
        let r = erfc(x);
        (expo - 2.0 * delta * delta).exp() * poly1
            + expo.exp() * poly2 * r
            + (expo + 2.0 * delta * delta).exp() * poly3 * r * r
    };
    Ok((braces / (2.0 * PI * s2 * s2 * sigma)).max(0.0))
}

/// Edge density `erfc(√2 δ)/(2π)`.
pub fn density_complex_edge(delta: f64) -> f64 {
    erfc(SQRT_2 * delta) / (2.0 * PI)
}

/// Density of the eigenvalue shift `w` produced by a small random
/// perturbation, for an eigenvalue at `z`:
/// `∫ N/(π(1+t)) e^{-N|w|²/(1+t)} P(t, z) dt`.
pub fn sensitivity_density(n: u32, w_abs_sq: f64, z_abs_sq: f64, spec: &QuadSpec) -> Result<f64> {
    check_abs_sq(w_abs_sq)?;
    let jpd = ComplexJpd::new(n, z_abs_sq)?;
    let nf = n as f64;
    let kernel = move |t: f64| {
        let u = 1.0 / (1.0 + t);
        nf * u / PI * (-nf * w_abs_sq * u).exp() * jpd.eval(t)
    };
    let scale = overlap_scale(n, z_abs_sq / nf);
    Ok(integrate_semi_infinite_scaled(kernel, scale, spec)?.value)
}
