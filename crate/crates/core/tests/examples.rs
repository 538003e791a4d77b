use std::sync::Arc;

use schmearlab::fixtures;
use schmearlab::freegroup::{ball_words, Ambient, Letter};
use schmearlab::schmear::{average_families, sample_schmear, slope_bounds};
use schmearlab::sequences::{LimitConfig, SharedSequence};
use schmearlab::syntax::parse_family;

/// Diamond distance by scanning the expanded letters: 2 for the first
/// letter, then 2 per repeated generator and √2 per change.
fn scan_diamond(letters: &[Letter]) -> f64 {
    letters
        .windows(2)
        .map(|p| if p[0].generator() == p[1].generator() { 2.0 } else { 2f64.sqrt() })
        .sum::<f64>()
        + 2.0
}

#[test]
fn unit_tree_against_diamond_brute_force() {
    let pts = sample_schmear(&fixtures::gamma(), &fixtures::diamond_f2(), 10).unwrap();
    let est = slope_bounds(&pts).unwrap();
    let words = ball_words(2, 10);
    let lambda = words
        .iter()
        .skip(1)
        .map(|w| {
            let nu = scan_diamond(w) / w.len() as f64;
            nu.max(1.0 / nu)
        })
        .fold(0.0, f64::max);
    assert!((est.lambda_est - lambda).abs() < 1e-12);
    assert_eq!(est.lambda_est, 2.0);
    let alternating = (9.0 * 2f64.sqrt() + 2.0) / 10.0;
    assert!((est.nu_min - alternating).abs() < 1e-12, "{}", est.nu_min);
}

fn fam(s: &str) -> SharedSequence {
    Arc::new(parse_family(s, Ambient::new(2, 1).unwrap()).unwrap())
}

#[test]
fn averaging_takes_the_midpoint_of_inverse_ratios() {
    // H₁ ~ n², H₂ ~ 2n² for a^n b^{n²}; H₁ ~ 2n², H₂ ~ 2√2 n² for a^n (ab)^{n²}
    let expected = (0.5 + 1.0 / 2f64.sqrt()) / 2.0;
    let out = average_families(
        fam("a^n b^{n^2}"),
        fam("a^n (ab)^{n^2}"),
        &fixtures::product(),
        &fixtures::star(),
        &LimitConfig::default(),
        0.01,
    )
    .unwrap();
    let six = &out.report.checks[6];
    assert!((six.measured[0] - expected).abs() / expected < 0.01, "{}", six.measured[0]);
    assert!(out.report.pass, "{:#?}", out.report.checks);
    let lim = out.report.c_limit.nu_inv_limit.unwrap();
    assert!((lim - expected).abs() / expected < 0.01, "{lim}");
}
