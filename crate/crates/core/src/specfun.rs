//! Special functions: log-gamma, the regularized upper incomplete gamma
//! function of integer order, and the error functions.
//!
//! Every analytic density in this crate is assembled from these pieces.
//! Factorials are never formed directly; callers receive `ln Γ(n)` and the
//! regularized `Q(n, a) = Γ(n, a) / Γ(n)` separately so products of several
//! incomplete gammas stay inside double range.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FACTORIAL_TABLE_LEN: usize = 171;

fn ln_factorial_table() -> &'static [f64; FACTORIAL_TABLE_LEN] {
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; FACTORIAL_TABLE_LEN];
        let mut fact = 1.0f64;
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            *slot = fact.ln();
        }
        table
    })
}

/// `ln(k!)`, exact to rounding for `k <= 170`.
pub fn ln_factorial(k: u32) -> f64 {
    match ln_factorial_table().get(k as usize) {
        Some(&v) => v,
        None => lanczos_ln_gamma(k as f64 + 1.0),
    }
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return lanczos_ln_gamma(x + 1.0) - x.ln();
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    if x.fract() == 0.0 && x <= FACTORIAL_TABLE_LEN as f64 {
        return Ok(ln_factorial(x as u32 - 1));
    }
    Ok(lanczos_ln_gamma(x))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

const SERIES_MAX_TERMS: usize = 100_000;

/// `ln Q(n, a)` for integer order `n >= 1` and `a >= 0`.
///
/// In the tail regime `a > n` the finite sum `e^{-a} Σ_{k<n} a^k/k!` is
/// accumulated downwards from its largest term, which keeps every summand
/// positive and the result free of underflow. Otherwise `Q = 1 - P` with
/// `P` from the lower series, whose terms are also all positive.
pub fn ln_reg_gamma_q(n: u32, a: f64) -> Result<f64> {
    if n < 1 {
        return Err(domain("reg_gamma_q requires order n >= 1"));
    }
    if !(a >= 0.0) {
        return Err(domain(format!("reg_gamma_q requires a >= 0, got {a}")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    if a.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let nf = n as f64;
    if a > nf {
        // leading term k = n-1, then ratios (k)/a going down
        let ln_lead = (nf - 1.0) * a.ln() - a - ln_factorial(n - 1);
        let mut sum = CompensatedSum::default();
        let mut r = 1.0;
        sum.add(r);
        for k in (1..n).rev() {
            r *= k as f64 / a;
            sum.add(r);
            if r < 1e-18 * sum.value() {
                break;
            }
        }
        Ok(ln_lead + sum.value().ln())
    } else {
        let p = lower_series_p(nf, a);
        Ok((-p).ln_1p())
    }
}

/// Regularized lower incomplete gamma `P(s, x)` via its positive power
/// series; `s > 0` may be non-integer.
fn lower_series_p(s: f64, x: f64) -> f64 {
    let ln_pref = s * x.ln() - x - lanczos_ln_gamma(s + 1.0);
    let mut sum = CompensatedSum::default();
    let mut term = 1.0;
    sum.add(term);
    for j in 1..SERIES_MAX_TERMS {
        term *= x / (s + j as f64);
        sum.add(term);
        if term < 1e-17 * sum.value() {
            break;
        }
    }
    (ln_pref + sum.value().ln()).exp()
}

/// Continued fraction (modified Lentz) for the upper incomplete gamma:
/// returns `h` with `Γ(s, x) = e^{-x} x^s h`. Converges quickly for `x > s + 1`.
fn upper_gamma_cf(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..SERIES_MAX_TERMS {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized upper incomplete gamma `Q(n, a) = Γ(n, a)/Γ(n)` for integer `n >= 1`.
pub fn reg_gamma_q(n: u32, a: f64) -> Result<f64> {
    Ok(ln_reg_gamma_q(n, a)?.exp())
}

/// `ln ∫_0^x e^{-u²/2} u^m du` for `x > 0`, `m >= 0` (real).
///
/// Equals `2^{(m-1)/2} γ((m+1)/2, x²/2)`; needed for the half-integer
/// orders that appear in the density of real eigenvalues.
pub(crate) fn ln_gaussian_moment(m: f64, x: f64) -> f64 {
    let s = 0.5 * (m + 1.0);
    let y = 0.5 * x * x;
    let ln_norm = 0.5 * (m - 1.0) * std::f64::consts::LN_2 + lanczos_ln_gamma(s);
    let ln_p = if y < s + 1.0 {
        lower_series_p(s, y).ln()
    } else {
        let q = (-y + s * y.ln() - lanczos_ln_gamma(s)).exp() * upper_gamma_cf(s, y);
        (-q).ln_1p()
    };
    ln_norm + ln_p
}

/// `ln Σ e^{x_i}` without overflow; `-∞` for an empty or all `-∞` input.
pub(crate) fn ln_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let mut sum = CompensatedSum::default();
    for &x in xs {
        sum.add((x - m).exp());
    }
    m + sum.value().ln()
}

const ERF_SERIES_CUTOFF: f64 = 1.224_744_871_391_589; // sqrt(1.5)

/// Scaled complementary error function `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < ERF_SERIES_CUTOFF {
        return (x * x).exp() * erfc(x);
    }
    // Γ(1/2, x²) = e^{-x²} x h
    x * upper_gamma_cf(0.5, x * x) / PI.sqrt()
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/√π e^{-x²} Σ 2^k x^{2k+1} / (1·3···(2k+1))
    let x2 = x * x;
    let mut term = x;
    let mut sum = CompensatedSum::default();
    sum.add(term);
    for k in 1..200 {
        term *= 2.0 * x2 / (2 * k + 1) as f64;
        sum.add(term);
        if term.abs() < 1e-17 * sum.value().abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum.value()
}

/// Complementary error function, relative error near 1e-15 on `|x| <= 10`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < ERF_SERIES_CUTOFF {
        1.0 - erf_series(x)
    } else if x > 27.3 {
        0.0
    } else {
        (-x * x).exp() * erfcx(x)
    }
}

pub fn erf(x: f64) -> f64 {
    if x.abs() < ERF_SERIES_CUTOFF {
        erf_series(x)
    } else {
        x.signum() * (1.0 - erfc(x.abs()))
    }
}
