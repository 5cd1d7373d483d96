use pyalphamu::{aser_gains, bound, sum_cdf, sum_pdf};

#[test]
fn pdf_carries_its_certificate() {
    let f = sum_pdf(0.8, 0.2, 5.0, 3, 2.0, 1e-10, 500).unwrap();
    assert!((f.value - 0.0621864).abs() < 1e-6);
    assert_eq!(f.certified_bound, Some(bound(0.8, 0.2, 5.0, 3, 2.0, f.terms_used, "pdf").unwrap()));
    assert_eq!(f.bound_kind, "dagger");
}

#[test]
fn cdf_reaches_one_in_the_far_tail_of_a_single_branch() {
    let c = sum_cdf(2.0, 1.0, 1.0, 1, 1.0, 1e-12, 500).unwrap();
    assert!((c.value - (1.0 - (-1.0f64).exp())).abs() < 1e-11);
}

#[test]
fn unknown_names_are_rejected() {
    assert!(bound(1.0, 1.0, 1.0, 2, 1.0, 5, "sf").is_err());
    assert!(aser_gains(1.0, 1.0, 1.0, 2, "sc", 1.0).is_err());
    assert_eq!(aser_gains(2.0, 1.0, 1.0, 2, "egc", 1.0).unwrap().0, 2.0);
}
