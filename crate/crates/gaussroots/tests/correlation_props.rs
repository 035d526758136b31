//! Correlation-function properties: positive semidefiniteness, bulk sinc
//! limits, diagonal kernel-ratio limits, and the boundedness of v_n.

use gaussroots::correlations::{bundle, rbar, sinc_limits, sinc_s, v_n};
use gaussroots::orthopoly::OrthonormalBasis;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// [rbar(t_i, t_j)] is a correlation matrix: smallest eigenvalue above
/// -1e-8 for arbitrary point sets of size up to 20.
#[test]
fn correlation_matrix_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for basis in [OrthonormalBasis::chebyshev1(), OrthonormalBasis::legendre()] {
        for trial in 0..10 {
            let n = 80 + 20 * (trial % 3);
            let k = rng.gen_range(5..=20);
            let nf = n as f64;
            let points: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.6 * nf..0.6 * nf)).collect();
            let mut m = DMatrix::zeros(k, k);
            for i in 0..k {
                for j in 0..k {
                    m[(i, j)] = rbar(&basis, n, points[i], points[j]).unwrap();
                }
            }
            // enforce exact symmetry for the eigensolver
            let m = (&m + m.transpose()) * 0.5;
            let eig = m.symmetric_eigenvalues();
            let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8, "{:?} min eigenvalue {min}", basis.kind());
        }
    }
}

/// Bulk sinc limits of all three correlations at n = 2000 (the acceptance
/// suite runs the full theta/tau matrix; this is the single-point spec
/// example).
#[test]
fn sinc_limit_point_check() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 2000usize;
    let nf = n as f64;
    let (theta, tau) = (0.1, 1.0);
    let s = nf * theta - tau / 2.0;
    let t = nf * theta + tau / 2.0;
    let b = bundle(&basis, n, s, t).unwrap();
    let lim = sinc_limits(theta, tau, |x| basis.equilibrium_density(x));
    assert!((b.rbar - lim.rbar).abs() <= 0.02, "rbar {} vs {}", b.rbar, lim.rbar);
    assert!(
        (b.rtilde_prime_st - lim.rtilde_prime).abs() <= 0.02,
        "rtp {} vs {}",
        b.rtilde_prime_st,
        lim.rtilde_prime
    );
    assert!(
        (b.rtilde_doubleprime - lim.rtilde_doubleprime).abs() <= 0.02,
        "rtpp {} vs {}",
        b.rtilde_doubleprime,
        lim.rtilde_doubleprime
    );
}

/// The mixed correlation is antisymmetric to leading order at small
/// separation (the limit is an odd function of tau).
#[test]
fn rtilde_prime_near_antisymmetry() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 2000usize;
    let t0 = 0.1 * n as f64;
    let b = bundle(&basis, n, t0, t0 + 0.5).unwrap();
    let fwd = b.rtilde_prime_st;
    let rev = b.rtilde_prime_ts;
    assert!(
        (fwd + rev).abs() <= 0.1 * fwd.abs(),
        "rtp(s,t) = {fwd}, rtp(t,s) = {rev}"
    );
}

/// v_n is bounded away from zero across the bulk and converges to
/// pi omega / sqrt(3).
#[test]
fn v_n_bounds_and_convergence() {
    for basis in [OrthonormalBasis::chebyshev1(), OrthonormalBasis::legendre()] {
        let n = 2000usize;
        let nf = n as f64;
        let mut min_v = f64::INFINITY;
        for i in 0..=100 {
            let x = -0.5 + i as f64 / 100.0;
            let v = v_n(&basis, n, x * nf).unwrap();
            min_v = min_v.min(v);
        }
        assert!(min_v > 0.1, "{:?} min v_n {min_v}", basis.kind());
    }

    // Cauchy-convergence proxy at t/n = 0.25 for Legendre
    let basis = OrthonormalBasis::legendre();
    let values: Vec<f64> = [500usize, 1000, 2000]
        .iter()
        .map(|&n| v_n(&basis, n, 0.25 * n as f64).unwrap())
        .collect();
    for w in values.windows(2) {
        assert!((w[1] - w[0]).abs() <= 0.03 * w[0].abs(), "{values:?}");
    }

    // limit value at theta = 0: pi omega(0) / sqrt 3 = 1/sqrt 3
    let cheb = OrthonormalBasis::chebyshev1();
    let v = v_n(&cheb, 2000, 0.0).unwrap();
    let lim = 1.0 / 3.0_f64.sqrt();
    assert!((v - lim).abs() <= 0.02 * lim, "v {v} vs {lim}");
}

/// Diagonal kernel-ratio limits at n = 2000: the odd ratio vanishes and the
/// (1,1) ratio approaches (pi omega)^2 / 3.
#[test]
fn diagonal_kernel_ratios() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 2000usize;
    let nf = n as f64;
    for &x in &[-0.4, 0.0, 0.4] {
        let k = basis.kernel_all(n, x, x).unwrap();
        let r01 = k.get(0, 1) / (nf * k.get(0, 0));
        assert!(r01.abs() <= 0.02, "x={x}: K01/(n K) = {r01}");
        let r11 = k.get(1, 1) / (nf * nf * k.get(0, 0));
        let want = (std::f64::consts::PI * basis.equilibrium_density(x)).powi(2) / 3.0;
        assert!(
            (r11 - want).abs() <= 0.05 * want,
            "x={x}: K11/(n^2 K) = {r11} vs {want}"
        );
    }
}

/// Scaled off-diagonal kernel limit: K(x + u/(n omega), x + v/(n omega)) /
/// K(x, x) approaches S(u - v) on a 5x5 grid.
#[test]
fn scaled_offdiagonal_kernel_limit() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 2000usize;
    let x = 0.1;
    let scale = n as f64 * basis.equilibrium_density(x);
    let kxx = basis.kernel(n, x, x, 0, 0).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let u = -2.0 + i as f64;
            let v = -2.0 + j as f64;
            let k = basis
                .kernel(n, x + u / scale, x + v / scale, 0, 0)
                .unwrap();
            let got = k / kxx;
            let want = sinc_s(u - v);
            assert!(
                (got - want).abs() <= 0.05,
                "(u,v)=({u},{v}): {got} vs {want}"
            );
        }
    }
}

/// Big-V stabilizes as n grows (diagonal kernel growth is linear).
#[test]
fn big_v_stabilizes() {
    let basis = OrthonormalBasis::legendre();
    let v1 = gaussroots::correlations::big_v(&basis, 1000, 0.2 * 1000.0).unwrap();
    let v2 = gaussroots::correlations::big_v(&basis, 2000, 0.2 * 2000.0).unwrap();
    assert!(
        (v1 - v2).abs() <= 0.02 * v1.abs(),
        "V_1000 = {v1}, V_2000 = {v2}"
    );
}

/// Light decay check (the full 1e4-pair, two-degree version runs in the
/// acceptance suite).
#[test]
fn correlation_decay_smoke() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 100usize;
    let nf = n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sup = 0.0f64;
    for _ in 0..2000 {
        let s = rng.gen_range(-0.3 * nf..0.3 * nf);
        let t = rng.gen_range(-0.3 * nf..0.3 * nf);
        let b = bundle(&basis, n, s, t).unwrap();
        let w = (s - t).abs() + 1.0;
        sup = sup
            .max(b.rbar.abs() * w)
            .max(b.rtilde_prime_st.abs() * w)
            .max(b.rtilde_doubleprime.abs() * w);
    }
    assert!(sup < 10.0, "sup {sup}");
}
