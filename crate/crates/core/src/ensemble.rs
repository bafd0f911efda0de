//! Ginibre sampling and bi-orthogonal eigenvector overlaps.
//!
//! Overlaps come from the complex Schur form `G = Q T Q*`. With `V` the
//! upper-triangular eigenvector matrix of `T`, the right eigenvectors are
//! `Q V` and the left ones are the rows of `V^{-1} Q*`, so
//! `O_ab = (V^{-1} V^{-*})_{ab} (V* V)_{ba}` and `Q` drops out.

use std::fmt;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::GaussianStream;

pub type C64 = Complex<f64>;

/// Overlaps above this are treated as numerically degenerate: the
/// eigenvector basis has condition number near `1e5` and the sum rule can
/// no longer be resolved to `1e-8`.
pub const DEGENERACY_LIMIT: f64 = 1e10;

/// Lower tolerance on `t = O_aa - 1` before a sample counts as broken.
pub const T_NEGATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn as_f64(self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 2.0,
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;
    fn try_from(b: u8) -> Result<Self> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            _ => Err(domain(format!("beta must be 1 or 2, got {b}"))),
        }
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> u8 {
        match b {
            Beta::Real => 1,
            Beta::Complex => 2,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub beta: Beta,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(n: usize, beta: Beta, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(domain("matrix size must be >= 1"));
        }
        Ok(Self { n, beta, seed })
    }

    /// `1e-9·√N`
    pub fn tol_real(&self) -> f64 {
        default_tol_real(self.n)
    }
}

pub fn default_tol_real(n: usize) -> f64 {
    1e-9 * (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub enum GinibreMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl GinibreMatrix {
    pub fn n(&self) -> usize {
        match self {
            GinibreMatrix::Real(m) => m.nrows(),
            GinibreMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn beta(&self) -> Beta {
        match self {
            GinibreMatrix::Real(_) => Beta::Real,
            GinibreMatrix::Complex(_) => Beta::Complex,
        }
    }

    pub fn to_complex(&self) -> DMatrix<C64> {
        match self {
            GinibreMatrix::Real(m) => m.map(|x| C64::new(x, 0.0)),
            GinibreMatrix::Complex(m) => m.clone(),
        }
    }
}

/// The `index`-th matrix of the stream. Entries are drawn row by row;
/// for `β = 2` each Box–Muller pair supplies one entry `(x + iy)/√2`.
pub fn sample_ginibre(spec: &EnsembleSpec, index: u64) -> GinibreMatrix {
    let n = spec.n;
    let mut g = GaussianStream::new(spec.seed, index);
    match spec.beta {
        Beta::Real => {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = g.next_normal();
                }
            }
            GinibreMatrix::Real(m)
        }
        Beta::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = g.next_pair();
                    m[(i, j)] = C64::new(x * s, y * s);
                }
            }
            GinibreMatrix::Complex(m)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenKind {
    RealLine,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapSample {
    pub eigenvalue: C64,
    /// `O_aa - 1`, clamped at zero.
    pub t: f64,
    pub kind: EigenKind,
    pub matrix_index: u64,
    /// `‖G x_R - λ x_R‖ / (‖G‖_F ‖x_R‖)`
    pub residual: f64,
}

struct EigenSystem {
    values: Vec<C64>,
    q: DMatrix<C64>,
    v: DMatrix<C64>,
    v_inv: DMatrix<C64>,
}

/// Complex Schur form `(Q, T)`. The shifted QR iteration occasionally
/// cycles; a unitary similarity (index reversal, then a fixed reflection)
/// breaks the cycle without changing eigenvalues or overlaps.
fn schur(g: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = g.nrows();
    let max_iter = 200 * n.max(4);
    let reversal = DMatrix::<C64>::from_fn(n, n, |i, j| {
        C64::new(if i + j == n - 1 { 1.0 } else { 0.0 }, 0.0)
    });
    let v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let reflection = DMatrix::<C64>::from_fn(n, n, |i, j| {
        C64::new(if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / vv, 0.0)
    });
    if let Some(s) = Schur::try_new(g.clone(), f64::EPSILON, max_iter) {
        return Ok(s.unpack());
    }
    // both similarities are real, symmetric and orthogonal: U G U = Q' T Q'* gives Q = U Q'
    for u in [reversal, reflection] {
        if let Some(s) = Schur::try_new(&u * g * &u, f64::EPSILON, max_iter) {
            let (q, t) = s.unpack();
            return Ok((u * q, t));
        }
    }
    Err(Error::Degenerate("Schur iteration did not converge".into()))
}

fn eigensystem(g: &DMatrix<C64>) -> Result<EigenSystem> {
    let n = g.nrows();
    if n != g.ncols() || n == 0 {
        return Err(domain("overlaps need a non-empty square matrix"));
    }
    let (q, t) = schur(g)?;
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let floor = 64.0 * f64::EPSILON * scale;

    // column k solves (T - λ_k) v = 0 with v_k = 1
    let mut v = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        v[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * v[(j, k)];
            }
            let den = t[(i, i)] - values[k];
            if den.norm() < floor {
                return Err(Error::Degenerate(format!(
                    "eigenvalues {} and {} coincide to working precision",
                    values[i], values[k]
                )));
            }
            v[(i, k)] = -acc / den;
        }
    }
    // V is unit upper triangular, so V^{-1} is too
    let mut v_inv = DMatrix::<C64>::identity(n, n);
    for k in 0..n {
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += v[(i, j)] * v_inv[(j, k)];
            }
            v_inv[(i, k)] = -acc;
        }
    }
    Ok(EigenSystem { values, q, v, v_inv })
}

impl EigenSystem {
    fn self_overlaps(&self) -> Vec<f64> {
        let n = self.values.len();
        (0..n)
            .map(|a| {
                let right: f64 = self.v.column(a).norm_squared();
                let left: f64 = self.v_inv.row(a).norm_squared();
                left * right
            })
            .collect()
    }
}

fn classify_one(z: C64, beta: Beta, tol_real: f64) -> EigenKind {
    match beta {
        Beta::Real if z.im.abs() <= tol_real => EigenKind::RealLine,
        _ => EigenKind::Complex,
    }
}

/// One overlap sample per eigenvalue of `g`.
///
/// Kinds are assigned with the default real-axis tolerance `1e-9·√N`.
/// Fails with [`Error::Degenerate`] when two eigenvalues coincide to working
/// precision, when some overlap exceeds [`DEGENERACY_LIMIT`], or when
/// `O_aa < 1 - T_NEGATIVE_TOL`.
pub fn overlaps_biorthogonal(g: &GinibreMatrix, matrix_index: u64) -> Result<Vec<OverlapSample>> {
    let gc = g.to_complex();
    let sys = eigensystem(&gc)?;
    let overlaps = sys.self_overlaps();
    let worst = overlaps.iter().copied().fold(0.0, f64::max);
    if !(worst <= DEGENERACY_LIMIT) {
        return Err(Error::Degenerate(format!("self-overlap {worst:e} exceeds the degeneracy limit")));
    }
    let x_r = &sys.q * &sys.v;
    let gx = &gc * &x_r;
    let g_norm = gc.norm();
    let tol_real = default_tol_real(g.n());
    overlaps
        .iter()
        .enumerate()
        .map(|(a, &o)| {
            let t = o - 1.0;
            if t < -T_NEGATIVE_TOL {
                return Err(Error::Degenerate(format!("self-overlap {o} below one")));
            }
            let lambda = sys.values[a];
            let xa = x_r.column(a);
            let residual = (gx.column(a) - xa * lambda).norm() / (g_norm * xa.norm());
            Ok(OverlapSample {
                eigenvalue: lambda,
                t: t.max(0.0),
                kind: classify_one(lambda, g.beta(), tol_real),
                matrix_index,
                residual,
            })
        })
        .collect()
}

/// Eigenvalues and the full overlap matrix `O_ab = (x_La* x_Lb)(x_Rb* x_Ra)`.
pub fn overlap_matrix(g: &GinibreMatrix) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let sys = eigensystem(&g.to_complex())?;
    let left_gram = &sys.v_inv * sys.v_inv.adjoint();
    let right_gram = sys.v.adjoint() * &sys.v;
    let n = sys.values.len();
    let o = DMatrix::from_fn(n, n, |a, b| left_gram[(a, b)] * right_gram[(b, a)]);
    Ok((sys.values, o))
}

/// Self-overlap `t` of a real eigenvalue `λ` of a real matrix through a
/// partial Schur step: reflect the eigenvector onto `e1`, read off the
/// coupling row `w` and the trailing block `G'`, and return `bᵀb` with
/// `(λ - G')ᵀ b = w`.
pub fn overlap_schur_real(g: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    let n = g.nrows();
    if n != g.ncols() || n == 0 {
        return Err(domain("overlap_schur_real needs a non-empty square matrix"));
    }
    if !lambda.is_finite() {
        return Err(domain("eigenvalue must be finite"));
    }
    if n == 1 {
        if (g[(0, 0)] - lambda).abs() > 1e-8 * g[(0, 0)].abs().max(f64::MIN_POSITIVE) {
            return Err(domain(format!("{lambda} is not an eigenvalue")));
        }
        return Ok(0.0);
    }
    let g_norm = g.norm();
    let x = real_eigenvector(g, lambda)?;
    let residual = (g * &x - &x * lambda).norm();
    if residual > 1e-8 * g_norm {
        return Err(domain(format!(
            "{lambda} is not an eigenvalue (relative residual {:e})",
            residual / g_norm
        )));
    }
    // Householder reflector P = I - 2 u uᵀ/(uᵀu) with P x = ∓e1
    let mut u = x.clone();
    u[0] += if x[0] >= 0.0 { x.norm() } else { -x.norm() };
    let uu = u.norm_squared();
    let apply = |m: &DMatrix<f64>| -> DMatrix<f64> {
        // P M
        let ut_m = u.transpose() * m;
        m - &u * ut_m * (2.0 / uu)
    };
    let pg = apply(g);
    let pgp = apply(&pg.transpose()).transpose();
    let w = pgp.view((0, 1), (1, n - 1)).transpose();
    let block = pgp.view((1, 1), (n - 1, n - 1));
    let shifted = (DMatrix::identity(n - 1, n - 1) * lambda - block).transpose();
    let singular = || Error::Degenerate("shifted trailing block is singular".into());
    let lu = shifted.lu();
    let min_pivot = lu.u().diagonal().iter().map(|p| p.abs()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 64.0 * f64::EPSILON * g_norm) {
        return Err(singular());
    }
    let b = lu.solve(&w).ok_or_else(singular)?;
    let t = b.norm_squared();
    if !(t <= DEGENERACY_LIMIT) {
        return Err(Error::Degenerate(format!("self-overlap {t:e} exceeds the degeneracy limit")));
    }
    Ok(t)
}

fn real_eigenvector(g: &DMatrix<f64>, lambda: f64) -> Result<DVector<f64>> {
    let n = g.nrows();
    let g_norm = g.norm().max(f64::MIN_POSITIVE);
    let mut shifted = g - DMatrix::identity(n, n) * lambda;
    let lu = shifted.clone().lu();
    let lu = if lu.is_invertible() {
        lu
    } else {
        for i in 0..n {
            shifted[(i, i)] -= f64::EPSILON * g_norm;
        }
        shifted.lu()
    };
    let mut x = DVector::from_fn(n, |i, _| 1.0 / (1.0 + i as f64).sqrt());
    for _ in 0..3 {
        let y = lu
            .solve(&x)
            .ok_or_else(|| Error::Degenerate("inverse iteration failed".into()))?;
        let norm = y.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(domain(format!("{lambda} is not an eigenvalue")));
        }
        x = y / norm;
    }
    Ok(x)
}

/// Counts produced by [`classify_eigenvalues`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub real_line: usize,
    pub complex: usize,
    /// `β = 2` eigenvalues within `tol_real` of the real axis (kept as complex).
    pub flagged_near_axis: usize,
}

/// Reassign kinds with tolerance `tol_real`. For `β = 2` every sample is
/// complex; near-axis ones are only counted.
pub fn classify_eigenvalues(samples: &mut [OverlapSample], beta: Beta, tol_real: f64) -> Result<ClassCounts> {
    if !(tol_real > 0.0) {
        return Err(domain("tol_real must be > 0"));
    }
    let mut counts = ClassCounts::default();
    for s in samples.iter_mut() {
        s.kind = classify_one(s.eigenvalue, beta, tol_real);
        match s.kind {
            EigenKind::RealLine => counts.real_line += 1,
            EigenKind::Complex => {
                counts.complex += 1;
                if beta == Beta::Complex && s.eigenvalue.im.abs() <= tol_real {
                    counts.flagged_near_axis += 1;
                }
            }
        }
    }
    Ok(counts)
}
