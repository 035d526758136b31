//! Chaos-expansion checks: Hermite orthogonality by quadrature, Gaussian
//! orthogonality of the level kernels, and the Mehler variance of a chaos
//! level against a direct path-integral Monte Carlo oracle.

use gaussroots::chaos::{self, coefficients, f_q_with, hermite};
use gaussroots::montecarlo::sample_coefficients;
use gaussroots::orthopoly::OrthonormalBasis;
use gaussroots::quad::gauss_legendre;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// (1/sqrt(2pi)) int H_p H_q e^{-x^2/2} dx = q! delta_{pq}, via a 200-node
/// rule on [-12, 12].
#[test]
fn hermite_orthogonality_quadrature() {
    let rule = gauss_legendre(200);
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    for p in 0..=10usize {
        for q in p..=10usize {
            let val = rule.integrate_on(-12.0, 12.0, |x| {
                hermite(p, x) * hermite(q, x) * (-0.5 * x * x).exp() / norm
            });
            let want = if p == q { factorial(q) } else { 0.0 };
            let tol = 1e-8 * factorial(q).max(1.0);
            assert!((val - want).abs() <= tol, "<H_{p}, H_{q}> = {val} vs {want}");
        }
    }
}

/// E[f_q(Z1, Z2) f_q'(Z1, Z2)] = 0 for q != q' under independent standard
/// Gaussians, within 3 standard errors at 1e5 samples; the diagonal terms
/// are positive.
#[test]
fn level_kernels_orthogonal_under_gaussians() {
    let coeffs = coefficients(6);
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let samples = 100_000usize;
    let mut cross: Vec<Vec<f64>> = vec![vec![]; 3];
    let mut diags = [0.0f64; 3];
    let pairs = [(2usize, 4usize), (2, 6), (4, 6)];
    for _ in 0..samples {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let f: Vec<f64> = [2usize, 4, 6]
            .iter()
            .map(|&q| f_q_with(&coeffs, q, z1, z2))
            .collect();
        for (k, &(a, b)) in pairs.iter().enumerate() {
            cross[k].push(f[a / 2 - 1] * f[b / 2 - 1]);
        }
        for (k, v) in f.iter().enumerate() {
            diags[k] += v * v;
        }
    }
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let mean = cross[k].iter().sum::<f64>() / samples as f64;
        let var = cross[k].iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>()
            / (samples as f64 - 1.0);
        let se = (var / samples as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "E[f_{a} f_{b}] = {mean} (se {se})");
    }
    for d in diags {
        assert!(d > 0.0);
    }
}

/// The Mehler-sum variance of one chaos level equals the sample variance
/// of the path integral `int f_q(Tbar(s), T'(s)) v_n(s) ds` over fresh
/// trials. Level 3 vanishes identically (all odd levels carry zero
/// b-weight); level 2 is the substantive check.
#[test]
fn chaos_level_variance_against_path_oracle() {
    let basis = OrthonormalBasis::chebyshev1();
    let n = 50usize;
    let nf = n as f64;
    let (a, b) = (-0.5, 0.5);
    let coeffs = coefficients(4);

    // per-node data for the path integral: composite Gauss panels of one
    // rescaled unit, 6 nodes each
    let gl = gauss_legendre(6);
    let panels = (nf * (b - a)).ceil() as usize;
    struct Node {
        w: f64,
        vn: f64,
        p_row: Vec<f64>,
        dp_row: Vec<f64>,
        k00: f64,
        k01: f64,
    }
    let mut nodes = Vec::new();
    for p in 0..panels {
        let lo = nf * a + p as f64;
        let hi = (lo + 1.0).min(nf * b);
        for (k, &xk) in gl.nodes.iter().enumerate() {
            let st = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xk;
            let w = 0.5 * (hi - lo) * gl.weights[k];
            let x = st / nf;
            let tbl = basis.eval_basis(n, x, 1).unwrap();
            let ker = basis.kernel_all(n, x, x).unwrap();
            let vn = gaussroots::correlations::v_n(&basis, n, st).unwrap();
            nodes.push(Node {
                w,
                vn,
                p_row: (0..=n).map(|j| tbl.value(j, 0)).collect(),
                dp_row: (0..=n).map(|j| tbl.value(j, 1)).collect(),
                k00: ker.get(0, 0),
                k01: ker.get(0, 1),
            });
        }
    }

    let trials = 10_000usize;
    let mut path2 = Vec::with_capacity(trials);
    let mut path3 = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let xi = sample_coefficients(n, 90210, trial);
        let mut i2 = 0.0;
        let mut i3 = 0.0;
        for node in &nodes {
            let mut h = 0.0;
            let mut hp = 0.0;
            for j in 0..=n {
                h += xi[j] * node.p_row[j];
                hp += xi[j] * node.dp_row[j];
            }
            let tbar = h / node.k00.sqrt();
            // d/ds of the standardized process, normalized by v_n
            let tprime =
                (hp / nf - h * node.k01 / (nf * node.k00)) / (node.k00.sqrt() * node.vn);
            i2 += node.w * f_q_with(&coeffs, 2, tbar, tprime) * node.vn;
            i3 += node.w * f_q_with(&coeffs, 3, tbar, tprime) * node.vn;
        }
        path2.push(i2);
        path3.push(i3);
    }

    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
    };

    // level 3 is identically zero
    assert!(path3.iter().all(|&v| v == 0.0));
    assert_eq!(chaos::f_q(3, 0.7, -0.3), 0.0);

    // level 2: Mehler sum vs the oracle, with a bootstrap SE on the
    // oracle's variance estimate
    let kr = gaussroots::kacrice::variance_count(&basis, n, a, b).unwrap();
    let report = chaos::chaos_variances(&basis, n, a, b, 4, Some(kr.c_ab)).unwrap();
    let sigma2_quad = report.sigma2[&2] * kr.c_ab * nf;
    let mc = var(&path2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut boot = Vec::with_capacity(400);
    let mut buf = vec![0.0; trials];
    for _ in 0..400 {
        for slot in buf.iter_mut() {
            *slot = path2[rand::Rng::gen_range(&mut rng, 0..trials)];
        }
        boot.push(var(&buf));
    }
    let bm = boot.iter().sum::<f64>() / boot.len() as f64;
    let bse = (boot.iter().map(|&x| (x - bm) * (x - bm)).sum::<f64>() / (boot.len() as f64 - 1.0))
        .sqrt();
    assert!(
        (mc - sigma2_quad).abs() <= 3.0 * bse,
        "level-2 variance: oracle {mc} (se {bse}) vs Mehler {sigma2_quad}"
    );
}

/// Per-level contributions are non-negative and decrease beyond level 4.
#[test]
fn chaos_levels_decrease() {
    let basis = OrthonormalBasis::chebyshev1();
    let report = chaos::chaos_variances(&basis, 100, -0.5, 0.5, 8, None).unwrap();
    for (&q, &v) in &report.sigma2 {
        assert!(v >= -1e-9, "sigma^2_{q} = {v}");
    }
    let even: Vec<f64> = [2usize, 4, 6, 8].iter().map(|q| report.sigma2[q]).collect();
    for w in even.windows(2) {
        assert!(w[1] <= w[0] * 1.1, "levels {even:?}");
    }
    // odd levels vanish identically
    assert_eq!(report.sigma2[&3], 0.0);
    assert_eq!(report.sigma2[&5], 0.0);
    assert_eq!(report.sigma2[&7], 0.0);
}

#[test]
fn chaos_variance_input_validation() {
    let basis = OrthonormalBasis::chebyshev1();
    assert!(chaos::chaos_variance(&basis, 50, 1, -0.5, 0.5).is_err());
    assert!(chaos::chaos_variance(&basis, 50, 9, -0.5, 0.5).is_err());
    assert!(chaos::chaos_variances(&basis, 500, -0.5, 0.5, 8, Some(0.1)).is_err());
    assert!(chaos::contraction_bound(5, 0.0, 1.0, 100, 1).is_err());
}
