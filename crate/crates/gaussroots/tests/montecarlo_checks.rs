//! Root-counter structural invariants: sign-change parity, additivity
//! across a split point, and robustness of counts under grid doubling.

use gaussroots::montecarlo::{sample_coefficients, RootCounter};
use gaussroots::orthopoly::OrthonormalBasis;

/// The count over [a, b] has the parity of the endpoint sign flip.
#[test]
fn count_parity_matches_endpoint_signs() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 100usize;
    let (a, b) = (-0.55, 0.45);
    let counter = RootCounter::new(&basis, n, a, b, 8).unwrap();
    for trial in 0..1000u64 {
        let xi = sample_coefficients(n, 321, trial);
        let count = counter.count(&xi).unwrap();
        let flip = basis.eval_combination(&xi, a) * basis.eval_combination(&xi, b) < 0.0;
        assert_eq!(count % 2 == 1, flip, "trial {trial}: count {count}");
    }
}

/// Counts add across a split point at which H does not vanish.
#[test]
fn count_additive_across_split() {
    let basis = OrthonormalBasis::legendre();
    let n = 100usize;
    let (a, b, c) = (-0.6, 0.05, 0.5);
    let whole = RootCounter::new(&basis, n, a, c, 8).unwrap();
    let left = RootCounter::new(&basis, n, a, b, 8).unwrap();
    let right = RootCounter::new(&basis, n, b, c, 8).unwrap();
    for trial in 0..1000u64 {
        let xi = sample_coefficients(n, 7777, trial);
        if basis.eval_combination(&xi, b) == 0.0 {
            continue;
        }
        let w = whole.count(&xi).unwrap();
        let l = left.count(&xi).unwrap();
        let r = right.count(&xi).unwrap();
        assert_eq!(w, l + r, "trial {trial}: {w} != {l} + {r}");
    }
}

/// Doubling the grid factor changes no count: the refinement pass already
/// catches everything the base scan could hide.
#[test]
fn grid_doubling_changes_nothing() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 100usize;
    let coarse = RootCounter::new(&basis, n, -0.5, 0.5, 8).unwrap();
    let fine = RootCounter::new(&basis, n, -0.5, 0.5, 16).unwrap();
    let mut changed = 0;
    for trial in 0..1000u64 {
        let xi = sample_coefficients(n, 1848, trial);
        if coarse.count(&xi).unwrap() != fine.count(&xi).unwrap() {
            changed += 1;
        }
    }
    assert_eq!(changed, 0, "{changed} counts changed under grid doubling");
}

/// Light standardized-moment smoke test (the full n = 200 ensemble runs in
/// the acceptance suite).
#[test]
fn standardized_moments_smoke() {
    use gaussroots::montecarlo::{run_experiment, SimulationConfig};
    use gaussroots::orthopoly::FamilyKind;
    let config = SimulationConfig::new(FamilyKind::Chebyshev1, 50, -0.5, 0.5, 2000, 60101);
    let run = run_experiment(&config).unwrap();
    assert!(run.skewness.unwrap().abs() < 0.5, "skew {:?}", run.skewness);
    assert!(
        run.excess_kurtosis.unwrap().abs() < 1.0,
        "kurt {:?}",
        run.excess_kurtosis
    );
    assert_eq!(run.standardized.len(), 2000);
}
