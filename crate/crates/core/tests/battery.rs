use cone_weights::verify::{check_names, run_checks};

#[test]
fn every_invariant_check_passes() {
    let results = run_checks(None, None);
    assert_eq!(results.len(), check_names().len());
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn injected_failure_names_the_check() {
    let target = "fredholm.window_consistency";
    let results = run_checks(Some("fredholm."), Some(target));
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    assert_eq!(failed, vec![target]);
}
