use ginibre_overlap::ensemble::{Beta, EnsembleSpec};
use ginibre_overlap::mc_harness::*;
use ginibre_overlap::{Error, QuadSpec};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// CDF of `t` at an eigenvalue `z = 0` of a complex `N × N` Ginibre matrix.
fn zero_law_cdf(n: u32, t: f64) -> f64 {
    let tau = t / (1.0 + t);
    let nf = n as f64;
    nf * tau.powi(n as i32 - 1) - (nf - 1.0) * tau.powi(n as i32)
}

fn zero_law_draw(n: u32, u: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let nf = n as f64;
        let f = nf * mid.powi(n as i32 - 1) - (nf - 1.0) * mid.powi(n as i32);
        if f < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    tau / (1.0 - tau)
}

fn synthetic(n_law: u32, count: usize, seed: u64) -> ConditionedHistogram {
    let spec = EnsembleSpec::new(n_law as usize, Beta::Complex, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..count).map(|_| zero_law_draw(n_law, uniform(&mut rng))).collect();
    ConditionedHistogram::from_samples(spec, Window::annulus(0.0, 1e-3).unwrap(), draws)
}

#[test]
fn shards_merge_to_the_full_campaign() {
    let spec = EnsembleSpec::new(5, Beta::Real, 17).unwrap();
    let w = Window::real_interval(-2.0, 2.0).unwrap();
    let full = run_campaign(&spec, 3000, &w).unwrap();
    let mut left = accumulate(&spec, &w, 0..1234);
    let right = accumulate(&spec, &w, 1234..3000);
    left.merge(&right).unwrap();
    assert_eq!(left, full);
    let mut parts = accumulate(&spec, &w, 2000..3000);
    parts.merge(&accumulate(&spec, &w, 0..2000)).unwrap();
    assert_eq!(parts, full);
}

#[test]
fn thread_count_does_not_change_results() {
    let spec = EnsembleSpec::new(4, Beta::Complex, 5).unwrap();
    let w = Window::annulus(0.0, 1.5).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_campaign(&spec, 4000, &w).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn window_outside_spectrum_is_empty() {
    let spec = EnsembleSpec::new(6, Beta::Real, 1).unwrap();
    let r = 6f64.sqrt();
    let w = Window::real_interval(10.0 * r, 11.0 * r).unwrap();
    assert!(matches!(run_campaign(&spec, 200, &w), Err(Error::EmptyWindow)));
}

#[test]
fn real_window_count_matches_density_mass() {
    let spec = EnsembleSpec::new(6, Beta::Real, 2).unwrap();
    let half = 0.5 * 6f64.sqrt();
    let w = Window::real_interval(-half, half).unwrap();
    let matrices = 100_000;
    let h = run_campaign(&spec, matrices, &w).unwrap();
    let expected = matrices as f64 * window_density_mass(&spec, &w, &QuadSpec::default()).unwrap();
    let sd = expected.sqrt();
    assert!(((h.n_samples as f64) - expected).abs() < 3.0 * sd, "{} vs {expected}", h.n_samples);
}

#[test]
fn conditional_cdf_small_disc_matches_zero_law() {
    let spec = EnsembleSpec::new(2, Beta::Complex, 0).unwrap();
    let q = QuadSpec::default();
    let grid = [0.0, 0.01, 0.3, 1.0, 4.0, 50.0, 1e4, f64::INFINITY];
    let tiny = analytic_conditional_cdf(&spec, &Window::annulus(0.0, 1e-3).unwrap(), &grid, &q).unwrap();
    for (&t, &c) in grid.iter().zip(&tiny) {
        let want = if t.is_infinite() { 1.0 } else { zero_law_cdf(2, t) };
        assert!((c - want).abs() < 1e-5, "t={t}: {c} vs {want}");
    }
    let disc = analytic_conditional_cdf(&spec, &Window::annulus(0.0, 0.1).unwrap(), &grid, &q).unwrap();
    assert_eq!(disc[0], 0.0);
    assert!((disc[grid.len() - 1] - 1.0).abs() < 1e-6);
    for (&t, &c) in grid.iter().zip(&disc) {
        let want = if t.is_infinite() { 1.0 } else { zero_law_cdf(2, t) };
        assert!((c - want).abs() < 1e-2);
    }
}

#[test]
fn conditional_cdf_is_monotone() {
    let q = QuadSpec::default();
    let real = EnsembleSpec::new(2, Beta::Real, 0).unwrap();
    let complex = EnsembleSpec::new(5, Beta::Complex, 0).unwrap();
    for (spec, w) in [
        (real, Window::real_interval(-0.7, 0.4).unwrap()),
        (complex, Window::annulus(0.5, 1.9).unwrap()),
    ] {
        let edges = bin_edges(spec.n);
        let cdf = analytic_conditional_cdf(&spec, &w, &edges, &q).unwrap();
        assert!(cdf.windows(2).all(|p| p[1] >= p[0] - 1e-12));
        assert!(cdf[0] >= 0.0 && *cdf.last().unwrap() <= 1.0);
        let inf = analytic_conditional_cdf(&spec, &w, &[f64::INFINITY], &q).unwrap();
        assert!((inf[0] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn ks_accepts_the_true_law_and_rejects_a_wrong_one() {
    let h = synthetic(2, 100_000, 9);
    let right: Vec<f64> = h.bin_edges.iter().map(|&e| zero_law_cdf(2, e)).collect();
    let wrong: Vec<f64> = h.bin_edges.iter().map(|&e| zero_law_cdf(4, e)).collect();
    let pass = ks_compare(&h, &right, DEFAULT_ALPHA).unwrap();
    assert!(pass.pass, "{pass:?}");
    assert!((pass.threshold - 1.9494 / (1e5f64).sqrt()).abs() < 1e-6);
    let fail = ks_compare(&h, &wrong, DEFAULT_ALPHA).unwrap();
    assert!(!fail.pass);
    assert_eq!(fail.metadata["n"], "2");
}

#[test]
fn tail_slope_on_pareto_samples() {
    let spec = EnsembleSpec::new(4, Beta::Real, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let draws: Vec<f64> = (0..200_000).map(|_| 1.0 / uniform(&mut rng)).collect();
    let h = ConditionedHistogram::from_samples(spec, Window::real_interval(-1.0, 1.0).unwrap(), draws);
    let fit = tail_exponent(&h, 10.0).unwrap();
    assert!((fit.slope + 1.0).abs() < 3.0 * fit.stderr.max(0.01), "{fit:?}");
    assert!(matches!(tail_exponent(&h, 1e6), Err(Error::InsufficientTail(_))));
}

#[test]
fn fixed_point_moments() {
    let spec = EnsembleSpec::new(3, Beta::Complex, 0).unwrap();
    let w = Window::annulus(0.0, 1.0).unwrap();
    let h = ConditionedHistogram::from_samples(spec, w, [1.0, 2.0, 3.0, 4.0]);
    let (m, se) = h.mean_t().unwrap();
    assert!((m - 2.5).abs() < 1e-9);
    assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-6);
}
