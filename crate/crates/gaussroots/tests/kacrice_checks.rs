//! Kac-Rice cross-checks against the Monte Carlo oracle: mean for every
//! built-in family, variance at small and moderate degree, pair counts for
//! the two-point intensity, and the scaled two-point limits.

use gaussroots::kacrice::{self, rho2};
use gaussroots::montecarlo::{run_experiment, SimulationConfig};
use gaussroots::orthopoly::{FamilyKind, OrthonormalBasis};
use gaussroots::quad::gauss_legendre;

/// Quadrature mean agrees with the sample mean within 3 standard errors
/// for every built-in family.
#[test]
fn mean_matches_monte_carlo_all_families() {
    let families = [
        FamilyKind::Chebyshev1,
        FamilyKind::Legendre,
        FamilyKind::Jacobi { alpha: 0.5, beta: -0.3 },
        FamilyKind::Gegenbauer { lambda: 1.0 },
    ];
    for family in families {
        let basis = OrthonormalBasis::new(family).unwrap();
        let quad = kacrice::expected_count(&basis, 100, -0.5, 0.5).unwrap();
        let config = SimulationConfig::new(family, 100, -0.5, 0.5, 10_000, 1009);
        let run = run_experiment(&config).unwrap();
        let se = run.se_mean.unwrap();
        assert!(
            (run.mean - quad).abs() <= 3.0 * se,
            "{family:?}: mc {} vs quad {quad} (se {se})",
            run.mean
        );
    }
}

/// Variance quadrature agrees with the sample variance within 3 bootstrap
/// standard errors at two sizes.
#[test]
fn variance_matches_monte_carlo() {
    for (family, n, a, b, trials, seed) in [
        (FamilyKind::Chebyshev1, 20usize, -0.3, 0.3, 30_000usize, 55u64),
        (FamilyKind::Chebyshev1, 100, -0.5, 0.5, 10_000, 56),
    ] {
        let basis = OrthonormalBasis::new(family).unwrap();
        let kr = kacrice::variance_count(&basis, n, a, b).unwrap();
        let config = SimulationConfig::new(family, n, a, b, trials, seed);
        let run = run_experiment(&config).unwrap();
        let mc_var = run.variance.unwrap();
        let se = run.bootstrap_se_variance.unwrap();
        assert!(
            (kr.variance - mc_var).abs() <= 3.0 * se,
            "n={n}: quad {} vs mc {mc_var} (se {se})",
            kr.variance
        );
        assert!(kr.variance > 0.0 && kr.mean > 0.0);
        assert!(kr.quad_error < 0.01 * kr.mean, "quad error {}", kr.quad_error);
    }
}

/// Product of counts over two disjoint intervals equals the double
/// integral of rho2 — the direct validation of the two-point formula (and
/// of the arcsine-argument choice in it).
#[test]
fn rho2_matches_pair_counts() {
    let family = FamilyKind::Chebyshev1;
    let basis = OrthonormalBasis::new(family).unwrap();
    let n = 40usize;
    let (i1, i2) = ((0.05, 0.2), (0.3, 0.45));

    // quadrature of rho2 over I1 x I2
    let rule = gauss_legendre(24);
    let mut quad = 0.0;
    for (i, &xs) in rule.nodes.iter().enumerate() {
        let x = 0.5 * (i1.0 + i1.1) + 0.5 * (i1.1 - i1.0) * xs;
        let wx = 0.5 * (i1.1 - i1.0) * rule.weights[i];
        for (j, &yt) in rule.nodes.iter().enumerate() {
            let y = 0.5 * (i2.0 + i2.1) + 0.5 * (i2.1 - i2.0) * yt;
            let wy = 0.5 * (i2.1 - i2.0) * rule.weights[j];
            quad += wx * wy * rho2(&basis, n, x, y).unwrap().rho2;
        }
    }

    // Monte Carlo E[N(I1) N(I2)]
    let trials = 40_000usize;
    let counter1 =
        gaussroots::montecarlo::RootCounter::new(&basis, n, i1.0, i1.1, 8).unwrap();
    let counter2 =
        gaussroots::montecarlo::RootCounter::new(&basis, n, i2.0, i2.1, 8).unwrap();
    let mut products = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let xi = gaussroots::montecarlo::sample_coefficients(n, 7001, trial);
        let c1 = counter1.count(&xi).unwrap() as f64;
        let c2 = counter2.count(&xi).unwrap() as f64;
        products.push(c1 * c2);
    }
    let mean = products.iter().sum::<f64>() / trials as f64;
    let var = products.iter().map(|&p| (p - mean) * (p - mean)).sum::<f64>()
        / (trials as f64 - 1.0);
    let se = (var / trials as f64).sqrt();
    assert!(
        (mean - quad).abs() <= 3.0 * se,
        "E[N1 N2]: mc {mean} (se {se}) vs quadrature {quad}"
    );
}

/// Two-point deviation from independence obeys the n^2 scaling of the
/// rescaled regime: sup |rho2 - rho1 rho1| / n^2 stays comparable across
/// degrees.
#[test]
fn rho2_rescaled_deviation_stable() {
    let basis = OrthonormalBasis::chebyshev1();
    let x = 0.1;
    let mut sups = Vec::new();
    for n in [100usize, 200] {
        let scale = n as f64 * basis.equilibrium_density(x);
        let mut sup = 0.0f64;
        let mut u = -3.0f64;
        while u <= 3.0 {
            if u.abs() >= 0.05 {
                let y = x + u / scale;
                let kr = rho2(&basis, n, x, y).unwrap();
                sup = sup.max((kr.rho2 - kr.rho1_x * kr.rho1_y).abs() / (n as f64 * n as f64));
            }
            u += 0.1;
        }
        sups.push(sup);
    }
    let ratio = sups[1] / sups[0];
    assert!((0.5..=2.0).contains(&ratio), "sups {sups:?}");
}

/// Bulk mean over a wide interval matches the equilibrium-mass asymptotic.
#[test]
fn mean_wide_interval_mass() {
    let basis = OrthonormalBasis::chebyshev1();
    let got = kacrice::expected_count(&basis, 200, -0.99, 0.99).unwrap();
    let want = 200.0 * basis.equilibrium_mass(-0.99, 0.99) / 3.0_f64.sqrt();
    assert!(
        (got - want).abs() <= 0.02 * want,
        "quad {got} vs mass asymptotic {want}"
    );
}

/// The quadrature variance slope Var/n is stable across degrees.
#[test]
fn variance_slope_quadrature_stable() {
    let basis = OrthonormalBasis::chebyshev1();
    let slopes: Vec<f64> = [100usize, 200, 400]
        .iter()
        .map(|&n| kacrice::variance_count(&basis, n, -0.5, 0.5).unwrap().c_ab)
        .collect();
    let spread = slopes.iter().cloned().fold(f64::MIN, f64::max)
        / slopes.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 1.1, "slopes {slopes:?}");
}

/// Variance slope is proportional to the equilibrium mass of the interval.
#[test]
fn variance_proportional_to_mass() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 200usize;
    let wide = kacrice::variance_count(&basis, n, -0.5, 0.5).unwrap();
    let narrow = kacrice::variance_count(&basis, n, -0.25, 0.25).unwrap();
    let ratio = wide.variance / narrow.variance;
    let want = 0.5_f64.asin() / 0.25_f64.asin();
    assert!(
        (ratio - want).abs() <= 0.1 * want,
        "ratio {ratio} vs mass ratio {want}"
    );
}

/// Scaled two-point correlation: convergence in n, near-independence of
/// the reference point, and decay in the separation.
#[test]
fn scaled_two_point_limits() {
    let basis = OrthonormalBasis::chebyshev1();
    let v500 = kacrice::scaled_two_point(&basis, 500, 0.1, 1.5).unwrap();
    let v1000 = kacrice::scaled_two_point(&basis, 1000, 0.1, 1.5).unwrap();
    assert!((v500 - v1000).abs() <= 0.05 * v1000.abs(), "{v500} vs {v1000}");

    let other = kacrice::scaled_two_point(&basis, 1000, 0.3, 1.5).unwrap();
    assert!((other - v1000).abs() <= 0.05 * v1000.abs(), "{other} vs {v1000}");

    let near = kacrice::scaled_two_point(&basis, 500, 0.1, 0.5).unwrap();
    let far = kacrice::scaled_two_point(&basis, 500, 0.1, 30.0).unwrap();
    assert!(far.abs() <= 0.05 * near.abs(), "near {near} far {far}");
}

#[test]
fn error_paths() {
    let basis = OrthonormalBasis::chebyshev1();
    assert!(kacrice::variance_count(&basis, 50, 0.3, 0.3).is_err());
    assert!(kacrice::expected_count(&basis, 50, 0.5, -0.5).is_err());
    assert!(kacrice::rho1(&basis, 50, 1.0).is_err());
    assert!(kacrice::rho2(&basis, 50, 0.2, 0.2 + 1e-8).is_err());
}
