use ginibre_overlap::analytic_complex::{jpd_complex, jpd_complex_zero, ComplexJpdQuery};
use ginibre_overlap::analytic_real::{jpd_real, RealForm, RealJpdQuery};
use ginibre_overlap::detratio::{detratio_closed, DetRatioQuery};
use ginibre_overlap::ensemble::{Beta, EnsembleSpec, C64};
use ginibre_overlap::mc_harness::{ConditionedHistogram, Window};
use ginibre_overlap::quadrature::{integrate_finite, integrate_semi_infinite_scaled};
use ginibre_overlap::specfun::reg_gamma_q;
use ginibre_overlap::QuadSpec;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_is_additive(a in -3.0..0.0f64, mid in 0.0..1.0f64, c in 0.5..4.0f64, k in 0.1..3.0f64) {
        let f = |x: f64| (k * x).cos() * (-0.3 * x * x).exp();
        let q = QuadSpec::default();
        let b = a + mid * (c - a);
        let whole = integrate_finite(f, a, c, &q).unwrap().value;
        let parts = integrate_finite(f, a, b, &q).unwrap().value + integrate_finite(f, b, c, &q).unwrap().value;
        prop_assert!((whole - parts).abs() < 1e-11);
    }

    #[test]
    fn semi_infinite_map_scale_is_irrelevant(s in 0.01..100.0f64, k in 0.2..5.0f64) {
        let f = |t: f64| (-k * t).exp() / (1.0 + t);
        let q = QuadSpec::default();
        let one = integrate_semi_infinite_scaled(f, 1.0, &q).unwrap().value;
        let other = integrate_semi_infinite_scaled(f, s, &q).unwrap().value;
        prop_assert!(rel(one, other) < 1e-10);
    }

    #[test]
    fn dilation_invariance(b in 0.1..10.0f64) {
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let q = QuadSpec::default();
        let direct = integrate_finite(f, 0.0, b, &q).unwrap().value;
        let stretched = b * integrate_finite(|u| f(b * u), 0.0, 1.0, &q).unwrap().value;
        prop_assert!(rel(direct, stretched) < 1e-12);
        prop_assert!(rel(direct, b.atan()) < 1e-12);
    }

    #[test]
    fn regularized_gamma_is_a_survival_function(n in 1u32..60, a in 0.0..80.0f64, da in 0.0..5.0f64) {
        let q0 = reg_gamma_q(n, a).unwrap();
        let q1 = reg_gamma_q(n, a + da).unwrap();
        prop_assert!((0.0..=1.0).contains(&q0));
        prop_assert!(q1 <= q0 * (1.0 + 1e-14));
        prop_assert!(reg_gamma_q(n + 1, a).unwrap() >= q0 * (1.0 - 1e-14));
    }

    #[test]
    fn real_forms_agree(n in 2u32..30, lt in -3.0..3.0f64, frac in -1.2..1.2f64) {
        let t = 10f64.powf(lt);
        let lambda = frac * (n as f64).sqrt();
        let q = RealJpdQuery::new(n, t, lambda);
        let g = jpd_real(&q, RealForm::GammaForm).unwrap();
        let s = jpd_real(&q, RealForm::SumForm).unwrap();
        prop_assert!(g > 0.0);
        prop_assert!(rel(g, s) < 1e-11, "{} vs {}", g, s);
        prop_assert!(rel(jpd_real(&RealJpdQuery::new(n, t, -lambda), RealForm::GammaForm).unwrap(), g) < 1e-14);
    }

    #[test]
    fn complex_jpd_is_positive(n in 2u32..40, lt in -3.0..3.0f64, frac in 0.0..1.3f64) {
        let t = 10f64.powf(lt);
        let a = frac * frac * n as f64;
        let v = jpd_complex(&ComplexJpdQuery::new(n, t, a)).unwrap();
        prop_assert!(v >= 0.0 && v.is_finite());
        let z = jpd_complex(&ComplexJpdQuery::new(n, t, 0.0)).unwrap();
        prop_assert!(rel(z, jpd_complex_zero(n, t).unwrap()) < 1e-12);
    }

    #[test]
    fn unit_ratio_for_any_z(n in 1usize..9, r in 0.0..3.0f64, phase in 0.0..6.3f64) {
        let q = DetRatioQuery::complex(n, 1, C64::from_polar(r, phase), 0.0).unwrap();
        prop_assert!((detratio_closed(&q, &QuadSpec::default()).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ratios_decrease_in_p(n in 1usize..6, lambda in -2.0..2.0f64, p in 0.1..5.0f64) {
        let quad = QuadSpec::default();
        let lo = detratio_closed(&DetRatioQuery::real(n, 2, lambda, p).unwrap(), &quad).unwrap();
        let hi = detratio_closed(&DetRatioQuery::real(n, 2, lambda, p * 1.5).unwrap(), &quad).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn histogram_merge_is_order_free(xs in prop::collection::vec(1e-6..1e7f64, 1..200), cut in 0usize..200) {
        let spec = EnsembleSpec::new(3, Beta::Complex, 0).unwrap();
        let w = Window::annulus(0.0, 1.0).unwrap();
        let cut = cut.min(xs.len());
        let whole = ConditionedHistogram::from_samples(spec, w, xs.iter().copied());
        let a = ConditionedHistogram::from_samples(spec, w, xs[..cut].iter().copied());
        let b = ConditionedHistogram::from_samples(spec, w, xs[cut..].iter().copied());
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        prop_assert_eq!(&ab, &whole);
        prop_assert_eq!(&ba, &whole);
    }
}
