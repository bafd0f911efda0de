use ginibre_overlap::ensemble::*;
use ginibre_overlap::Error;
use nalgebra::DMatrix;

#[test]
fn entry_moments() {
    let real = EnsembleSpec::new(2, Beta::Real, 3).unwrap();
    let complex = EnsembleSpec::new(2, Beta::Complex, 3).unwrap();
    let draws = 25_000u64;
    let (mut s, mut s2) = (0.0, 0.0);
    let mut abs2 = 0.0;
    for i in 0..draws {
        if let GinibreMatrix::Real(m) = sample_ginibre(&real, i) {
            s += m.sum();
            s2 += m.norm_squared();
        }
        if let GinibreMatrix::Complex(m) = sample_ginibre(&complex, i) {
            abs2 += m.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
    let count = (4 * draws) as f64;
    assert!((s / count).abs() < 3.0 * 10f64.powf(-2.5));
    assert!((s2 / count - 1.0).abs() < 0.03);
    assert!((abs2 / count - 1.0).abs() < 0.03);
}

#[test]
fn sum_rule_and_residuals() {
    let mut checked = 0;
    for (n, beta) in [(2, Beta::Real), (7, Beta::Complex), (20, Beta::Real), (50, Beta::Complex), (50, Beta::Real)] {
        let spec = EnsembleSpec::new(n, beta, 99).unwrap();
        for i in 0..20 {
            let g = sample_ginibre(&spec, i);
            let (_, o) = match overlap_matrix(&g) {
                Ok(v) => v,
                Err(Error::Degenerate(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            for a in 0..n {
                let row: nalgebra::Complex<f64> = o.row(a).iter().sum();
                assert!((row.re - 1.0).abs() < 1e-8 && row.im.abs() < 1e-8, "N={n} i={i}: {row}");
                assert!(o[(a, a)].re >= 1.0 - 1e-10);
            }
            for s in overlaps_biorthogonal(&g, i).unwrap() {
                assert!(s.t >= 0.0);
                assert!(s.residual < 1e-8, "residual {}", s.residual);
            }
            checked += 1;
        }
    }
    assert!(checked >= 95);
}

#[test]
fn schur_route_matches_biorthogonal() {
    for n in 2..=20 {
        let spec = EnsembleSpec::new(n, Beta::Real, 5).unwrap();
        for i in 0..10 {
            let g = sample_ginibre(&spec, i);
            let GinibreMatrix::Real(m) = &g else { unreachable!() };
            let Ok(samples) = overlaps_biorthogonal(&g, i) else { continue };
            for s in samples.iter().filter(|s| s.kind == EigenKind::RealLine) {
                let t = overlap_schur_real(m, s.eigenvalue.re).unwrap();
                let err = (t - s.t).abs() / s.t.max(1e-300);
                assert!(err < 1e-8, "N={n} i={i} λ={}: {t} vs {}", s.eigenvalue.re, s.t);
            }
        }
    }
}

#[test]
fn real_spectra_come_in_conjugate_pairs() {
    let spec = EnsembleSpec::new(9, Beta::Real, 1).unwrap();
    for i in 0..30 {
        let samples = overlaps_biorthogonal(&sample_ginibre(&spec, i), i).unwrap();
        for s in samples.iter().filter(|s| s.kind == EigenKind::Complex) {
            let partner = samples
                .iter()
                .find(|p| (p.eigenvalue - s.eigenvalue.conj()).norm() < 1e-9)
                .expect("conjugate eigenvalue present");
            assert!((partner.t - s.t).abs() <= 1e-8 * (1.0 + s.t));
        }
    }
}

#[test]
fn expected_real_count_at_n2() {
    let spec = EnsembleSpec::new(2, Beta::Real, 2024).unwrap();
    let draws = 100_000u64;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for i in 0..draws {
        let mut samples = overlaps_biorthogonal(&sample_ginibre(&spec, i), i).unwrap();
        let c = classify_eigenvalues(&mut samples, Beta::Real, spec.tol_real()).unwrap();
        let k = c.real_line as f64;
        sum += k;
        sum2 += k * k;
    }
    let mean = sum / draws as f64;
    let sd = ((sum2 / draws as f64 - mean * mean) / draws as f64).sqrt();
    assert!((mean - 2f64.sqrt()).abs() < 3.0 * sd, "{mean} ± {sd}");
}

#[test]
fn complex_samples_are_never_real_line() {
    let spec = EnsembleSpec::new(4, Beta::Complex, 8).unwrap();
    let mut samples = overlaps_biorthogonal(&sample_ginibre(&spec, 0), 0).unwrap();
    let c = classify_eigenvalues(&mut samples, Beta::Complex, 1.0).unwrap();
    assert_eq!(c.real_line, 0);
    assert_eq!(c.complex, 4);
    assert!(classify_eigenvalues(&mut samples, Beta::Real, 0.0).is_err());
}

#[test]
fn schur_route_singular_block() {
    // λ = 1 twice: trailing block shifted by λ is singular
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 2.0]);
    assert!(overlap_schur_real(&m, 2.0).is_ok());
    assert!(overlap_schur_real(&m, 1.0).is_err());
}
