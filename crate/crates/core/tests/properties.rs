mod common;

use alphamu::series::{
    delta_coefficients, evaluate, required_terms, tail_sum, truncation_bound,
};
use alphamu::alpha_mu::alpha_moment;
use alphamu::{
    aser, Error, outage_probability, snr_cdf, CombinerKind, EvalOptions, SeriesKind, SnrConfig, SumSpec,
};
use proptest::prelude::*;

/// Parameters from the full domain box, with r between 2% and 120% of the mean sum.
fn config() -> impl Strategy<Value = (SumSpec, f64)> {
    (0.3f64..4.0, 0.1f64..5.0, 0.5f64..10.0, 1u32..=8, 0.02f64..1.2).prop_map(|(a, m, rh, l, t)| {
        let s = SumSpec::from_parts(a, m, rh, l).unwrap();
        let mean = l as f64 * alpha_moment(s.params(), 1.0).unwrap();
        (s, t * mean)
    })
}

/// Values the series declines to produce in f64 are skipped, not failed.
macro_rules! computed {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(Error::PrecisionLoss { .. } | Error::Convergence { .. }) => {
                prop_assume!(false);
                unreachable!()
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    };
}

fn kind() -> impl Strategy<Value = SeriesKind> {
    prop_oneof![Just(SeriesKind::Pdf), Just(SeriesKind::Cdf)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn coefficient_tables_are_prefix_stable((s, _) in config(), n in 2usize..120) {
        let short = delta_coefficients(&s, n).unwrap();
        let long = delta_coefficients(&s, n + 37).unwrap();
        for i in 0..n {
            prop_assert_eq!(short.normalized_delta(i), long.normalized_delta(i));
        }
        prop_assert_eq!(short.normalized_delta(0), (1, 0.0));
    }

    #[test]
    fn bound_is_nonincreasing_in_terms((s, r) in config(), k in kind(), n in 1usize..60) {
        let b0 = truncation_bound(&s, r, n, k).unwrap();
        let b1 = truncation_bound(&s, r, n + 1, k).unwrap();
        prop_assert!(b1 <= b0 * (1.0 + 1e-12), "{b1:e} > {b0:e}");
    }

    #[test]
    fn bound_dominates_tail((s, r) in config(), k in kind(), n in 1usize..40) {
        let b = truncation_bound(&s, r, n, k).unwrap();
        let t = tail_sum(&s, r, n, k).unwrap();
        prop_assert!(t <= b, "tail {t:e} above bound {b:e}");
    }

    #[test]
    fn required_terms_is_minimal((s, r) in config(), k in kind(), e in 4i32..14) {
        let target = 10f64.powi(-e);
        let n = computed!(required_terms(&s, r, target, k));
        prop_assert!(truncation_bound(&s, r, n, k).unwrap() <= target);
        if n > 1 {
            prop_assert!(truncation_bound(&s, r, n - 1, k).unwrap() > target);
        }
    }

    #[test]
    fn refining_the_target_stays_within_reported_errors((s, r) in config(), k in kind()) {
        let coarse = computed!(evaluate(&s, r, k, &EvalOptions::with_target(1e-6)));
        let fine = computed!(evaluate(&s, r, k, &EvalOptions::with_target(1e-13)));
        prop_assume!(coarse.certified_bound.is_some() && fine.certified_bound.is_some());
        let slack = coarse.certified_bound.unwrap() + coarse.rounding_estimate
            + fine.certified_bound.unwrap() + fine.rounding_estimate;
        prop_assert!((coarse.value - fine.value).abs() <= slack);
    }

    #[test]
    fn cdf_is_a_probability_and_nondecreasing((s, r) in config(), f in 0.1f64..0.99) {
        let opts = EvalOptions::with_target(1e-12);
        let hi = computed!(evaluate(&s, r, SeriesKind::Cdf, &opts));
        let lo = computed!(evaluate(&s, r * f, SeriesKind::Cdf, &opts));
        prop_assert!((0.0..=1.0).contains(&hi.value) && (0.0..=1.0).contains(&lo.value));
        let slack = 2e-12 + hi.rounding_estimate + lo.rounding_estimate;
        prop_assert!(lo.value <= hi.value + slack);
        let pdf = computed!(evaluate(&s, r, SeriesKind::Pdf, &opts));
        prop_assert!(pdf.value >= -(1e-12 + pdf.rounding_estimate));
    }

    #[test]
    fn single_branch_combiners_coincide(a in 0.3f64..4.0, m in 0.1f64..5.0, rh in 0.5f64..5.0, t in 0.05f64..1.0) {
        let s = SumSpec::from_parts(a, m, rh, 1).unwrap();
        let cfg = SnrConfig::from_db(10.0, 1.0, 0.0).unwrap();
        // ψ such that the branch envelope is t times the point where μ (r/r̂)^α = 3.
        let r = t * rh * (3.0 / m).powf(1.0 / a);
        let psi = cfg.es_n0 * r * r;
        let egc = computed!(snr_cdf(&s, CombinerKind::Egc, &cfg, psi, 1e-12));
        let mrc = computed!(snr_cdf(&s, CombinerKind::Mrc, &cfg, psi, 1e-12));
        prop_assert!((egc.value - mrc.value).abs() <= 2e-12 + egc.rounding_estimate + mrc.rounding_estimate);
    }
}

#[test]
fn outage_is_nondecreasing_in_threshold() {
    let s = common::spec(1.2, 0.9, 3.0, 3);
    for c in [CombinerKind::Egc, CombinerKind::Mrc] {
        let mut last = 0.0;
        for k in 0..=30 {
            let cfg = SnrConfig::from_db(20.0, 1.0, -10.0 + k as f64).unwrap();
            let p = outage_probability(&s, c, &cfg, 1e-13).unwrap().value;
            assert!(p >= last, "{c:?} at {k}");
            last = p;
        }
    }
}

#[test]
fn aser_decreases_with_snr_and_modulation_constant() {
    let s = common::spec(1.2, 0.9, 2.0, 3);
    for c in [CombinerKind::Egc, CombinerKind::Mrc] {
        let mut last = 1.0;
        for db in (-5..=40).step_by(3) {
            let cfg = SnrConfig::from_db(db as f64, 1.0, 0.0).unwrap();
            let p = aser(&s, c, &cfg, 0.0).unwrap().value;
            assert!(p < last, "{c:?} at {db} dB");
            last = p;
        }
        let mut last = 1.0;
        for g in [0.1, 0.5, 0.715, 1.0, 4.0, 50.0] {
            let cfg = SnrConfig::from_db(5.0, g, 0.0).unwrap();
            let p = aser(&s, c, &cfg, 0.0).unwrap().value;
            assert!(p < last, "{c:?} at G={g}");
            last = p;
        }
    }
}
