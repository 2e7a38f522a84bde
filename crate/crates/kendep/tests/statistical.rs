//! Seeded Monte Carlo checks of the distributional claims: null levels,
//! percentile behavior, estimator consistency and the DKW-band agreement
//! of the empirical Kendall cdf with the product law under independence.

use kendep::distributions::{sample_archimedean, ArchimedeanFamily, CopulaSpec};
use kendep::independence::{
    calibrate_percentiles, normal_two_sided_quantile, run_independence_test, TestPolicy,
};
use kendep::kendall::{auk_estimate, pseudo_obs_excluding_self, Convention};
use kendep::rng::stream_rng;
use kendep::*;
use rand::Rng;

fn uniform_sample(n: usize, d: usize, seed: u64) -> Sample {
    let mut rng = stream_rng(seed, 1000, 0);
    let values: Vec<f64> = (0..n * d).map(|_| rng.random()).collect();
    Sample::from_flat(values, n, d).unwrap()
}

#[test]
fn auk_near_half_under_independence() {
    for d in [2usize, 3] {
        let s = uniform_sample(5000, d, 42 + d as u64);
        let law = ProductKendallLaw::new(d).unwrap();
        let auk = auk_estimate(&multivariate_ecdf_at_points(&s), &law).unwrap();
        assert!((auk - 0.5).abs() < 0.02, "d={d}: AUK = {auk}");
    }
}

#[test]
fn exclude_self_pseudo_obs_track_product_law() {
    // empirical cdf of the exclude-self pseudo-observations within the
    // 95% DKW band of the product Kendall law at n = 5000
    let n = 5000;
    let s = uniform_sample(n, 2, 7);
    let pseudo = pseudo_obs_excluding_self(&s);
    assert_eq!(pseudo.convention(), Convention::ExcludeSelf);
    let law = ProductKendallLaw::new(2).unwrap();
    let band = ((2.0f64 / 0.05).ln() / (2.0 * n as f64)).sqrt();
    for i in 1..100 {
        let t = i as f64 / 100.0;
        let emp = empirical_kendall_cdf(&pseudo, t).unwrap();
        let theory = law.cdf(t).unwrap();
        assert!(
            (emp - theory).abs() <= band,
            "t={t}: |{emp} - {theory}| > DKW band {band}"
        );
    }
}

#[test]
fn include_exclude_auk_gap_bound() {
    // 0 <= AUK_excl - AUK_incl <= K(1/n) by concavity of the product law's
    // cdf; for d = 2 that bound is exactly (1 + ln n)/n
    let mut rng = stream_rng(3, 1001, 0);
    for case in 0..12 {
        let n = rng.random_range(10..200);
        let d = if case % 2 == 0 {
            2
        } else {
            rng.random_range(3..5)
        };
        let s = uniform_sample(n, d, rng.random());
        let law = ProductKendallLaw::new(d).unwrap();
        let incl = auk_estimate(&multivariate_ecdf_at_points(&s), &law).unwrap();
        let excl = auk_estimate(&pseudo_obs_excluding_self(&s), &law).unwrap();
        let gap = excl - incl;
        let bound = law.cdf(1.0 / n as f64).unwrap();
        if d == 2 {
            let closed_form = (1.0 + (n as f64).ln()) / n as f64;
            assert!((bound - closed_form).abs() < 1e-12);
        }
        assert!(
            (-1e-12..=bound + 1e-12).contains(&gap),
            "n={n} d={d}: gap {gap} outside [0, {bound}]"
        );
    }
}

#[test]
fn null_level_within_binomial_band() {
    // rejection rate at alpha = 0.05 within a 99% binomial band
    // (plus a small allowance for critical-value estimation error)
    let alpha = 0.05;
    let reps = 800;
    let band = 2.576 * (alpha * (1.0 - alpha) / reps as f64).sqrt() + 0.008;
    for d in [2usize, 3] {
        for n in [100usize, 1000] {
            let table = calibrate_percentiles(d, n, 4000, 500 + n as u64).unwrap();
            let policy = TestPolicy::AutoCachedOnly { table: Some(table) };
            let mut rejections = 0;
            for rep in 0..reps {
                let s = uniform_sample(n, d, 9000 + rep as u64 * 13 + d as u64);
                let report = run_independence_test(&s, alpha, &policy).unwrap();
                rejections += report.reject as usize;
            }
            let rate = rejections as f64 / reps as f64;
            assert!(
                (rate - alpha).abs() <= band,
                "d={d} n={n}: level {rate} outside {alpha} +/- {band}"
            );
        }
    }
}

#[test]
fn percentiles_decrease_toward_asymptote() {
    let mut prev = [f64::INFINITY; 3];
    for &n in &[30usize, 100, 1000] {
        let table = calibrate_percentiles(2, n, 4000, 77).unwrap();
        let now = [
            table.percentile(0.10).unwrap(),
            table.percentile(0.05).unwrap(),
            table.percentile(0.01).unwrap(),
        ];
        for (a, b) in now.iter().zip(prev) {
            assert!(*a <= b + 0.05, "percentile rose with n: {a} after {b}");
        }
        prev = now;
    }
    // converging toward the normal quantiles from above
    for (p, alpha) in prev.iter().zip([0.10, 0.05, 0.01]) {
        let z = normal_two_sided_quantile(alpha);
        assert!(*p >= z - 0.02 && *p <= z + 0.15, "n=1000: {p} vs z = {z}");
    }
}

#[test]
fn power_nondecreasing_on_clayton() {
    let spec = CopulaSpec::new(ArchimedeanFamily::Clayton, 2.0, 2).unwrap();
    let reps = 300;
    let mut last = 0.0;
    for (i, &n) in [100usize, 500, 2000].iter().enumerate() {
        let policy = if n <= 1000 {
            TestPolicy::AutoCachedOnly {
                table: Some(calibrate_percentiles(2, n, 2000, 31).unwrap()),
            }
        } else {
            TestPolicy::Asymptotic
        };
        let mut rejections = 0;
        for rep in 0..reps {
            let s = sample_archimedean(&spec, n, 40_000 + rep as u64).unwrap();
            rejections += run_independence_test(&s, 0.05, &policy).unwrap().reject as usize;
        }
        let rate = rejections as f64 / reps as f64;
        assert!(
            rate + 0.03 >= last,
            "power fell from {last} to {rate} at n = {n}"
        );
        if i == 2 {
            assert!(rate > 0.99, "power at n=2000 should be ~1, got {rate}");
        }
        last = rate;
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_sample() -> impl Strategy<Value = Sample> {
        (2usize..=4, 2usize..=30).prop_flat_map(|(d, n)| {
            proptest::collection::vec(proptest::collection::vec(-8.0f64..8.0, d), n.max(2))
                .prop_map(move |mut rows| {
                    // inject coordinate ties in half the cases
                    for row in rows.iter_mut() {
                        for v in row.iter_mut() {
                            if *v < 0.0 {
                                *v = v.round();
                            }
                        }
                    }
                    Sample::from_rows(&rows).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pseudo_obs_in_range_and_auk_in_unit_interval(s in arb_sample()) {
            let n = s.n() as f64;
            let pseudo = multivariate_ecdf_at_points(&s);
            for &t in pseudo.values() {
                prop_assert!(t >= 1.0 / n - 1e-12 && t <= 1.0 + 1e-12);
            }
            let law = ProductKendallLaw::new(s.d()).unwrap();
            let auk = auk_estimate(&pseudo, &law).unwrap();
            prop_assert!(auk > 0.0 && auk <= 1.0);
        }

        #[test]
        fn empirical_kendall_cdf_is_a_cdf(s in arb_sample(), t in 0.0f64..1.0) {
            let pseudo = multivariate_ecdf_at_points(&s);
            let at_t = empirical_kendall_cdf(&pseudo, t).unwrap();
            let at_one = empirical_kendall_cdf(&pseudo, 1.0).unwrap();
            prop_assert!((0.0..=1.0).contains(&at_t));
            prop_assert!(at_t <= at_one);
            prop_assert_eq!(at_one, 1.0);
        }

        #[test]
        fn index_nonnegative_and_flip_invariant(s in arb_sample(), bits in 0usize..16) {
            let base = index_i(&auk_vector(&s).unwrap());
            prop_assert!(base >= 0.0);
            let flip = SignPattern::new(bits % (1 << s.d()), s.d()).unwrap();
            let flipped = flip.apply(&s).unwrap();
            let other = index_i(&auk_vector(&flipped).unwrap());
            prop_assert_eq!(base.to_bits(), other.to_bits());
        }
    }
}

#[test]
fn sigma_monte_carlo_agrees_with_exact() {
    // the d = 2 closed form and a seeded Algorithm-style run agree to 1%
    // relative (r = 5000 keeps the Monte Carlo error below that band)
    let exact = kendep::independence::sigma_pi_exact_d2();
    let est = kendep::independence::estimate_sigma_pi(2, 5000, 5000, 7).unwrap();
    let rel = (est.value - exact.value).abs() / exact.value;
    assert!(rel < 0.01, "relative deviation {rel}");

    // and the quadrature route sits on the closed form much tighter
    let quad = kendep::independence::sigma_pi_quadrature_d2().unwrap();
    assert!((quad.value - exact.value).abs() < 1e-6);
}

#[test]
fn independent_uniform_auk_vector_and_curves() {
    let s = uniform_sample(5000, 2, 99);
    // all four rotation areas sit near 1/2
    let auk = auk_vector(&s).unwrap();
    for (j, a) in auk.entries().iter().enumerate() {
        assert!((a - 0.5).abs() < 0.02, "pattern {j}: AUK = {a}");
    }
    // and every empirical Kendall curve hugs the product law
    let curves = kendep::diagnostics::kendall_curves_all(&s, 128).unwrap();
    for curve in &curves {
        let sup = curve
            .empirical
            .iter()
            .zip(&curve.reference)
            .map(|(e, r)| (e - r).abs())
            .fold(0.0f64, f64::max);
        assert!(sup <= 0.05, "pattern {}: sup deviation {sup}", curve.pattern.index());
    }
}
