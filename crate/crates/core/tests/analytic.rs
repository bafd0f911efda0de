use std::f64::consts::PI;

use ginibre_overlap::analytic_complex::*;
use ginibre_overlap::analytic_real::*;
use ginibre_overlap::quadrature::{integrate_finite, integrate_semi_infinite, QuadSpec};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

#[test]
fn real_forms_agree() {
    let ts = log_grid(1e-3, 1e3, 25);
    for n in 2..=20u32 {
        let nf = n as f64;
        for j in 0..=12 {
            let lambda = 1.2 * nf.sqrt() * j as f64 / 12.0;
            for &t in &ts {
                let q = RealJpdQuery::new(n, t, lambda);
                let a = jpd_real(&q, RealForm::SumForm).unwrap();
                let b = jpd_real(&q, RealForm::GammaForm).unwrap();
                assert!(rel(b, a) <= 1e-12, "N={n} λ={lambda} t={t}: {a:e} vs {b:e}");
            }
        }
    }
}

#[test]
fn real_jpd_is_even_in_lambda() {
    for n in [2u32, 5, 11] {
        for lambda in [0.3, 1.7, 4.2] {
            for form in [RealForm::SumForm, RealForm::GammaForm] {
                let p = jpd_real(&RealJpdQuery::new(n, 0.8, lambda), form).unwrap();
                let m = jpd_real(&RealJpdQuery::new(n, 0.8, -lambda), form).unwrap();
                assert_eq!(p, m);
            }
            assert_eq!(density_real(n, lambda).unwrap(), density_real(n, -lambda).unwrap());
        }
    }
}

#[test]
fn real_normalization_on_grid() {
    let spec = QuadSpec::default();
    for n in 2..=20u32 {
        let nf = n as f64;
        for lambda in [0.0, 0.5, 1.0, 0.5 * nf.sqrt(), 0.9 * nf.sqrt(), 1.2 * nf.sqrt()] {
            let got = integrate_jpd_real(n, lambda, &spec).unwrap().value;
            let want = density_real(n, lambda).unwrap();
            assert!(rel(got, want) <= 1e-8, "N={n} λ={lambda}: {got} vs {want}");
        }
    }
}

#[test]
fn real_density_integrates_to_expected_count_at_n2() {
    let spec = QuadSpec::default();
    let half = integrate_semi_infinite(|x| density_real(2, x).unwrap(), &spec).unwrap();
    assert!(rel(2.0 * half.value, 2f64.sqrt()) < 1e-9);
}

#[test]
fn real_tail_is_inverse_square() {
    for n in [2u32, 6, 15] {
        for lambda in [0.0, 1.0] {
            let p = |t: f64| jpd_real(&RealJpdQuery::new(n, t, lambda), RealForm::GammaForm).unwrap();
            let r = p(2e6) / p(1e6);
            assert!((r - 0.25).abs() < 0.0025, "N={n}: ratio {r}");
        }
    }
}

fn sup_err(grid: &[(f64, f64)], finite: impl Fn(f64, f64) -> f64, limit: impl Fn(f64, f64) -> f64) -> f64 {
    grid.iter()
        .map(|&(u, v)| (finite(u, v) - limit(u, v)).abs())
        .fold(0.0, f64::max)
}

fn assert_decreasing(errs: &[f64], what: &str) {
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{what}: errors not decreasing {errs:?}");
    }
}

#[test]
fn real_bulk_convergence() {
    let grid: Vec<(f64, f64)> = [0.1, 0.3, 1.0, 3.0]
        .iter()
        .flat_map(|&s| [0.0, 0.3, 0.6].map(|x| (s, x)))
        .collect();
    let errs: Vec<f64> = [20u32, 40, 80]
        .iter()
        .map(|&n| {
            let nf = n as f64;
            sup_err(
                &grid,
                |s, x| nf * jpd_real(&RealJpdQuery::new(n, nf * s, nf.sqrt() * x), RealForm::GammaForm).unwrap(),
                |s, x| jpd_real_bulk(BulkPoint { s, x }).unwrap(),
            )
        })
        .collect();
    assert_decreasing(&errs, "real bulk");
}

#[test]
fn real_edge_convergence() {
    let grid: Vec<(f64, f64)> = [0.2, 0.5, 1.0, 2.0]
        .iter()
        .flat_map(|&s| [-1.0, 0.0, 0.5].map(|d| (s, d)))
        .collect();
    let errs: Vec<f64> = [20u32, 40, 80]
        .iter()
        .map(|&n| {
            let r = (n as f64).sqrt();
            sup_err(
                &grid,
                |sigma, delta| r * jpd_real(&RealJpdQuery::new(n, r * sigma, r + delta), RealForm::GammaForm).unwrap(),
                |sigma, delta| jpd_real_edge(EdgePoint { sigma, delta }).unwrap(),
            )
        })
        .collect();
    assert_decreasing(&errs, "real edge");
}

#[test]
fn real_limits_integrate_to_limit_densities() {
    let spec = QuadSpec::default();
    for x in [0.0, 0.4, 0.9] {
        let v = integrate_semi_infinite(|s| jpd_real_bulk(BulkPoint { s, x }).unwrap(), &spec).unwrap();
        assert!(rel(v.value, INV_SQRT_2PI) < 1e-9);
    }
    for delta in [-2.0, -0.5, 0.0, 0.7, 2.0] {
        let v = integrate_semi_infinite(|sigma| jpd_real_edge(EdgePoint { sigma, delta }).unwrap(), &spec).unwrap();
        assert!(rel(v.value, density_real_edge(delta)) < 1e-8, "δ={delta}");
    }
}

#[test]
fn complex_zero_collapse() {
    let ts = log_grid(1e-3, 1e3, 31);
    for n in 2..=40u32 {
        for &t in &ts {
            let a = jpd_complex(&ComplexJpdQuery::new(n, t, 0.0)).unwrap();
            let b = jpd_complex_zero(n, t).unwrap();
            assert!(rel(a, b) <= 1e-12, "N={n} t={t}");
        }
    }
}

#[test]
fn complex_normalization_on_grid() {
    let spec = QuadSpec::default();
    for n in 2..=12u32 {
        let nf = n as f64;
        for frac in [0.0, 0.3, 0.7, 0.95, 1.2] {
            let a = frac * frac * nf;
            let got = integrate_jpd_complex(n, a, &spec).unwrap().value;
            let want = density_complex(n, a).unwrap();
            assert!(rel(got, want) <= 1e-6, "N={n} |z|²={a}: {got} vs {want}");
        }
    }
    let v = integrate_jpd_complex(3, 1.0, &spec).unwrap().value;
    assert!(rel(v, (-1.0f64).exp() * 2.5 / PI) < 1e-9);
}

#[test]
fn complex_coefficients_are_nonnegative() {
    for n in 2..=60u32 {
        for i in 0..=60 {
            let a = 2.0 * n as f64 * i as f64 / 60.0;
            let c = coeffs(n, a).unwrap();
            assert!(c.d1 >= 0.0 && c.d2 >= 0.0, "N={n} a={a}: {c:?}");
            assert!(c.log_scale.is_finite());
        }
    }
}

#[test]
fn complex_tail_is_inverse_cube() {
    for n in [2u32, 5, 9] {
        for a in [0.0, 1.0, 4.0] {
            let p = |t: f64| jpd_complex(&ComplexJpdQuery::new(n, t, a)).unwrap();
            let r = p(2e6) / p(1e6);
            assert!((r - 0.125).abs() < 0.00125, "N={n} a={a}: {r}");
        }
    }
}

#[test]
fn complex_bulk_convergence() {
    for w in [0.0, 0.5] {
        let errs: Vec<f64> = [10u32, 20, 40]
            .iter()
            .map(|&n| {
                let nf = n as f64;
                [0.1, 0.3, 1.0, 3.0]
                    .iter()
                    .map(|&s| {
                        let fin = nf * jpd_complex(&ComplexJpdQuery::new(n, nf * s, nf * w * w)).unwrap();
                        (fin - jpd_complex_bulk(BulkPoint { s, x: w }).unwrap()).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert_decreasing(&errs, "complex bulk");
    }
}

#[test]
fn complex_edge_convergence() {
    let grid: Vec<(f64, f64)> = [0.2, 0.5, 1.0, 2.0]
        .iter()
        .flat_map(|&s| [-1.0, 0.0, 0.5].map(|d| (s, d)))
        .collect();
    let errs: Vec<f64> = [20u32, 40, 80]
        .iter()
        .map(|&n| {
            let r = (n as f64).sqrt();
            sup_err(
                &grid,
                |sigma, delta| {
                    r * jpd_complex(&ComplexJpdQuery::new(n, r * sigma, (r + delta).powi(2))).unwrap()
                },
                |sigma, delta| jpd_complex_edge(EdgePoint { sigma, delta }).unwrap(),
            )
        })
        .collect();
    assert_decreasing(&errs, "complex edge");
}

#[test]
fn complex_bulk_edge_matching() {
    let errs: Vec<f64> = [25.0f64, 100.0, 400.0]
        .iter()
        .map(|&n| {
            let r = n.sqrt();
            let mut e: f64 = 0.0;
            for s in [0.2, 0.5, 1.0] {
                for w in [0.0, 0.5, 0.8] {
                    let p = EdgePoint { sigma: r * s, delta: 0.5 * r * (w * w - 1.0) };
                    let lhs = r * jpd_complex_edge(p).unwrap();
                    e = e.max((lhs - jpd_complex_bulk(BulkPoint { s, x: w }).unwrap()).abs());
                }
            }
            e
        })
        .collect();
    assert_decreasing(&errs, "bulk-edge matching");
}

#[test]
fn complex_limits_integrate_to_limit_densities() {
    let spec = QuadSpec::default();
    for w in [0.0, 0.5, 0.9] {
        let first = integrate_semi_infinite(|s| s * jpd_complex_bulk(BulkPoint { s, x: w }).unwrap(), &spec).unwrap();
        assert!(rel(first.value, (1.0 - w * w) / PI) < 1e-8);
        let zeroth = integrate_semi_infinite(|s| jpd_complex_bulk(BulkPoint { s, x: w }).unwrap(), &spec).unwrap();
        assert!(rel(zeroth.value, 1.0 / PI) < 1e-8);
    }
    for delta in [-2.0, -0.5, 0.0, 0.7, 2.0] {
        let v = integrate_semi_infinite(|sigma| jpd_complex_edge(EdgePoint { sigma, delta }).unwrap(), &spec).unwrap();
        assert!(rel(v.value, density_complex_edge(delta)) < 1e-8, "δ={delta}");
    }
}

#[test]
fn sensitivity_density_integrates_to_eigenvalue_density() {
    // ∫ π(w, z) d²w = 2π ∫ r π(r², z) dr
    let spec = QuadSpec::default();
    for (n, a) in [(2u32, 0.0), (4, 1.5), (6, 3.0)] {
        let total = integrate_semi_infinite(
            |r| 2.0 * PI * r * sensitivity_density(n, r * r, a, &spec).unwrap(),
            &spec,
        )
        .unwrap();
        assert!(rel(total.value, density_complex(n, a).unwrap()) < 1e-7, "N={n}");
    }
}

#[test]
fn quadrature_oracles() {
    let spec = QuadSpec::default();
    // erfc(1) from its defining integral
    let tail = integrate_semi_infinite(|u| (-(1.0 + u) * (1.0 + u)).exp(), &spec).unwrap();
    let erfc1 = 2.0 / PI.sqrt() * tail.value;
    assert!(rel(ginibre_overlap::specfun::erfc(1.0), erfc1) < 1e-12);
    assert!(rel(erfc1, 0.157_299_207_050_285_13) < 1e-10);
    let g = integrate_finite(|u| (-0.5 * u * u).exp(), 0.0, 1.0, &spec).unwrap();
    let want = (PI / 2.0).sqrt() * ginibre_overlap::specfun::erf(1.0 / 2f64.sqrt());
    assert!(rel(g.value, want) < 1e-12);
    assert!((g.value - 0.855_624_4).abs() < 1e-7);
}
