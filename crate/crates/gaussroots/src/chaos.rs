//! Hermite chaos expansion of the root count: expansion coefficients, the
//! level-q kernels `f_q`, the Mehler-formula variance of each chaos level,
//! and the scalar contraction-decay diagnostic.
//!
//! Hermite polynomials use the probabilists' convention throughout
//! (`H_0 = 1`, `H_1 = x`, `H_{q+1} = x H_q - q H_{q-1}`, orthogonal for
//! `e^{-x^2/2}`); the physicists' convention is a classic silent bug and
//! is deliberately not exposed anywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use rand::Rng;

use crate::correlations::bundle_from_kernels;
use crate::error::{Error, Result};
use crate::kacrice;
use crate::orthopoly::OrthonormalBasis;
use crate::quad::{gauss_legendre, KahanSum};

/// Probabilists' Hermite polynomial `H_q(x)`, `0 <= q <= 60`.
pub fn hermite(q: usize, x: f64) -> f64 {
    assert!(q <= 60, "Hermite degree cap is 60");
    if q == 0 {
        return 1.0;
    }
    let mut prev = 1.0_f64;
    let mut cur = x;
    for k in 1..q {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All `H_0(x) ... H_qmax(x)` in one sweep.
pub fn hermite_row(q_max: usize, x: f64) -> Vec<f64> {
    assert!(q_max <= 60, "Hermite degree cap is 60");
    let mut out = Vec::with_capacity(q_max + 1);
    out.push(1.0);
    if q_max == 0 {
        return out;
    }
    out.push(x);
    for k in 1..q_max {
        let next = x * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// Expansion coefficients of the chaos decomposition: `a_{2l}` are the
/// Hermite coefficients of `|y|`, `b_k` those of the Dirac mass at zero.
#[derive(Debug, Clone)]
pub struct ChaosCoefficients {
    pub q_max: usize,
    /// `a[l]` stores `a_{2l}`.
    pub a: Vec<f64>,
    /// `b[k]` stores `b_k`; odd entries are exactly zero.
    pub b: Vec<f64>,
}

/// Closed-form coefficients up to level `q_max <= 60`.
///
/// `a_{2l} = sqrt(2/pi) (-1)^{l+1} / (2^l l! (2l-1))` — the `l = 0` term
/// uses `(2*0 - 1) = -1`, giving `a_0 = sqrt(2/pi)` — and
/// `b_{2k} = H_{2k}(0) / (sqrt(2 pi) (2k)!)`.
pub fn coefficients(q_max: usize) -> ChaosCoefficients {
    assert!(q_max <= 60, "coefficient cap is 60");
    let sqrt_2_over_pi = (2.0 / std::f64::consts::PI).sqrt();
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();

    let mut a = Vec::with_capacity(q_max / 2 + 1);
    for l in 0..=(q_max / 2) {
        // log-space magnitude: 2^l l! |2l - 1|
        let lf = l as f64;
        let ln_mag = lf * std::f64::consts::LN_2 + ln_factorial(l) + ((2.0 * lf - 1.0).abs()).ln();
        let sign = if l % 2 == 0 { -1.0 } else { 1.0 } * (2.0 * lf - 1.0).signum();
        a.push(sqrt_2_over_pi * sign * (-ln_mag).exp());
    }

    let h0 = hermite_row(q_max, 0.0);
    let mut b = Vec::with_capacity(q_max + 1);
    for (k, &h) in h0.iter().enumerate() {
        if k % 2 == 1 {
            b.push(0.0);
        } else {
            b.push(h / (sqrt_2pi * factorial(k)));
        }
    }

    ChaosCoefficients { q_max, a, b }
}

impl ChaosCoefficients {
    /// `a_{2l}`.
    pub fn a2l(&self, l: usize) -> f64 {
        self.a[l]
    }

    /// `b_k` (zero for odd k).
    pub fn bk(&self, k: usize) -> f64 {
        self.b[k]
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Level-q kernel
/// `f_q(x, y) = sum_{l <= q/2} b_{q-2l} a_{2l} H_{q-2l}(x) H_{2l}(y)`.
pub fn f_q(q: usize, x: f64, y: f64) -> f64 {
    let coeffs = coefficients(q);
    f_q_with(&coeffs, q, x, y)
}

/// Same, reusing precomputed coefficients (hot loops).
pub fn f_q_with(coeffs: &ChaosCoefficients, q: usize, x: f64, y: f64) -> f64 {
    debug_assert!(q <= coeffs.q_max);
    let hx = hermite_row(q, x);
    let hy = hermite_row(q, y);
    let mut acc = 0.0;
    for l in 0..=(q / 2) {
        acc += coeffs.bk(q - 2 * l) * coeffs.a2l(l) * hx[q - 2 * l] * hy[2 * l];
    }
    acc
}

/// The admissible pairing-count tuples of the Mehler formula at one
/// `(q, 2l, 2l')` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    pub q: usize,
    pub l: usize,
    pub l_prime: usize,
    /// Tuples `(d1, d2, d3, d4)` with `d1+d2 = q-2l`, `d3+d4 = 2l`,
    /// `d1+d3 = q-2l'`, `d2+d4 = 2l'`.
    pub tuples: Vec<[usize; 4]>,
}

/// Exhaustive enumeration (brute force over `d1`); the mixed `l != l'`
/// blocks are exactly where hand-solving goes wrong, and the set may be
/// empty.
pub fn enumerate_tuples(q: usize, l: usize, l_prime: usize) -> TupleSet {
    assert!(2 * l <= q && 2 * l_prime <= q, "need 0 <= 2l, 2l' <= q");
    let mut tuples = Vec::new();
    for d1 in 0..=q {
        // d2, d3, d4 are forced by the four linear constraints.
        let (s1, s3) = (q - 2 * l, q - 2 * l_prime);
        if d1 > s1 || d1 > s3 {
            continue;
        }
        let d2 = s1 - d1;
        let d3 = s3 - d1;
        if d3 > 2 * l {
            continue;
        }
        let d4 = 2 * l - d3;
        if d2 + d4 != 2 * l_prime {
            continue;
        }
        tuples.push([d1, d2, d3, d4]);
    }
    TupleSet {
        q,
        l,
        l_prime,
        tuples,
    }
}

/// One chaos level's variance contribution, normalized by `c_ab * n`.
///
/// Calls [`kacrice::variance_count`] for the normalizing slope; prefer
/// [`chaos_variances`] when several levels are needed.
pub fn chaos_variance(basis: &OrthonormalBasis, n: usize, q: usize, a: f64, b: f64) -> Result<f64> {
    if !(2..=8).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "chaos level {q} outside the supported range 2..=8"
        )));
    }
    let report = chaos_variances(basis, n, a, b, q, None)?;
    Ok(report.sigma2[&q])
}

/// Per-level variance contributions `sigma_{n,q}^2` for `q = 2..=q_max`.
#[derive(Debug, Clone)]
pub struct ChaosVarianceReport {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub q_max: usize,
    /// Normalizing slope `c_ab = Var(N)/n` used in the denominators.
    pub c_ab: f64,
    /// `sigma2[&q]` is the level-q contribution.
    pub sigma2: std::collections::BTreeMap<usize, f64>,
}

impl ChaosVarianceReport {
    /// Partial Parseval sum over the computed levels.
    pub fn partial_sum(&self) -> f64 {
        self.sigma2.values().sum()
    }
}

/// Precomputed weights of the combined Mehler integrand at one level:
/// `W_q = sum_{l,l'} sum_d w(l, l', d) rbar^{d1} rtp_st^{d2} rtp_ts^{d3}
/// rtpp^{d4}`.
struct LevelWeights {
    q: usize,
    /// `(d1, d2, d3, d4, weight)` flattened over `(l, l', d)`.
    terms: Vec<([usize; 4], f64)>,
}

fn level_weights(coeffs: &ChaosCoefficients, q: usize) -> LevelWeights {
    let mut terms = Vec::new();
    for l in 0..=(q / 2) {
        for lp in 0..=(q / 2) {
            let outer = coeffs.bk(q - 2 * l) * coeffs.a2l(l) * coeffs.bk(q - 2 * lp) * coeffs.a2l(lp);
            if outer == 0.0 {
                continue;
            }
            for &d in &enumerate_tuples(q, l, lp).tuples {
                // multinomial (q-2l)! (2l)! (q-2l')! (2l')! / (d1! d2! d3! d4!)
                // in log space; q! scale cancellations bite at q = 8.
                let ln_w = ln_factorial(q - 2 * l) + ln_factorial(2 * l) + ln_factorial(q - 2 * lp)
                    + ln_factorial(2 * lp)
                    - ln_factorial(d[0])
                    - ln_factorial(d[1])
                    - ln_factorial(d[2])
                    - ln_factorial(d[3]);
                terms.push((d, outer * ln_w.exp()));
            }
        }
    }
    LevelWeights { q, terms }
}

impl LevelWeights {
    /// Evaluate `W_q` from the four correlations of a bundle.
    fn eval(&self, b: &crate::correlations::CorrelationBundle) -> f64 {
        let mut p1 = [1.0_f64; 61];
        let mut p2 = [1.0_f64; 61];
        let mut p3 = [1.0_f64; 61];
        let mut p4 = [1.0_f64; 61];
        for e in 1..=self.q {
            p1[e] = p1[e - 1] * b.rbar;
            p2[e] = p2[e - 1] * b.rtilde_prime_st;
            p3[e] = p3[e - 1] * b.rtilde_prime_ts;
            p4[e] = p4[e - 1] * b.rtilde_doubleprime;
        }
        let mut acc = 0.0;
        for &(d, w) in &self.terms {
            acc += w * p1[d[0]] * p2[d[1]] * p3[d[2]] * p4[d[3]];
        }
        acc
    }
}

/// Mehler-formula expectation `E[f_q(X_s, Y_s) f_q(X_t, Y_t)]` of one
/// chaos level, assembled from a correlation bundle. This is the
/// integrand of the level variance; exposed so oracles can cross-check it
/// against direct sampling of the Gaussian quadruple.
pub fn mehler_expectation(
    coeffs: &ChaosCoefficients,
    q: usize,
    b: &crate::correlations::CorrelationBundle,
) -> f64 {
    level_weights(coeffs, q).eval(b)
}

/// All chaos-level variances in one double-integration pass over the
/// rescaled square `[na, nb]^2`, in `(tau, sigma)` coordinates.
///
/// `c_ab` may be supplied (e.g. from a previous [`kacrice::variance_count`]
/// call); otherwise it is computed here. The integrand decays like
/// `(C/(|tau|+1))^q`, so the `tau` integral is truncated where that bound
/// falls below 1e-6 of the accumulated value.
pub fn chaos_variances(
    basis: &OrthonormalBasis,
    n: usize,
    a: f64,
    b: f64,
    q_max: usize,
    c_ab: Option<f64>,
) -> Result<ChaosVarianceReport> {
    if !(2..=8).contains(&q_max) {
        return Err(Error::InvalidArgument(format!(
            "q_max = {q_max} outside the supported range 2..=8"
        )));
    }
    if n > 200 {
        return Err(Error::InvalidArgument(format!(
            "chaos variance integration is capped at n = 200 (got {n})"
        )));
    }
    let c_ab = match c_ab {
        Some(v) => v,
        None => kacrice::variance_count(basis, n, a, b)?.c_ab,
    };
    if c_ab <= 0.0 {
        return Err(Error::NumericalDegeneracy(format!(
            "nonpositive variance slope c_ab = {c_ab}"
        )));
    }

    let coeffs = coefficients(q_max);
    let levels: Vec<LevelWeights> = (2..=q_max).map(|q| level_weights(&coeffs, q)).collect();

    let nf = n as f64;
    let length = nf * (b - a);
    // Empirical decay constant for the truncation test; the correlations
    // themselves are bounded by 1 and fall off like C/(|tau|+1).
    let decay_c = 4.0_f64;
    let tau_cut = {
        // smallest tau with (C/(tau+1))^2 <= 1e-6, capped by the domain
        let t = decay_c * 1e3 - 1.0;
        t.min(length)
    };

    // g(tau) for all levels at once: GL-8 panels of unit length in tau,
    // GL-64 in sigma (the integrand is macroscopically smooth in sigma).
    let gl_tau = gauss_legendre(8);
    let gl_sigma = gauss_legendre(64);
    let panels = (tau_cut.ceil() as usize).max(1);

    let per_panel: Vec<Vec<f64>> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let lo = p as f64;
            let hi = (lo + 1.0).min(tau_cut);
            let mut acc = vec![KahanSum::new(); levels.len()];
            if lo >= hi {
                return acc.iter().map(|k| k.total()).collect();
            }
            for (ti, &tn) in gl_tau.nodes.iter().enumerate() {
                let tau = lo + 0.5 * (hi - lo) * (tn + 1.0);
                let wt = 0.5 * (hi - lo) * gl_tau.weights[ti];
                let sig_lo = 2.0 * nf * a + tau;
                let sig_hi = 2.0 * nf * b - tau;
                if sig_lo >= sig_hi {
                    continue;
                }
                // sigma integral of v v W_q at this tau
                let mut level_sums = vec![KahanSum::new(); levels.len()];
                for (si, &sn) in gl_sigma.nodes.iter().enumerate() {
                    let sigma = 0.5 * (sig_lo + sig_hi) + 0.5 * (sig_hi - sig_lo) * sn;
                    let ws = 0.5 * (sig_hi - sig_lo) * gl_sigma.weights[si];
                    let s = 0.5 * (sigma - tau);
                    let t = 0.5 * (sigma + tau);
                    let kss = basis.kernel_all(n, s / nf, s / nf).expect("bulk");
                    let ktt = basis.kernel_all(n, t / nf, t / nf).expect("bulk");
                    let kst = basis.kernel_all(n, s / nf, t / nf).expect("bulk");
                    let bun = bundle_from_kernels(&kss, &ktt, &kst, n, s, t).expect("bulk");
                    let vv = bun.v_s * bun.v_t * ws;
                    for (li, lw) in levels.iter().enumerate() {
                        level_sums[li].add(vv * lw.eval(&bun));
                    }
                }
                for (li, ls) in level_sums.iter().enumerate() {
                    acc[li].add(wt * ls.total());
                }
            }
            acc.iter().map(|k| k.total()).collect()
        })
        .collect();

    // Ordered reduction over panels. The 1/2 Jacobian of (s,t) -> (tau,
    // sigma) cancels against the tau -> -tau symmetry, so integrating
    // tau >= 0 only and not halving gives the full square.
    let mut sigma2 = std::collections::BTreeMap::new();
    for (li, lw) in levels.iter().enumerate() {
        let mut acc = KahanSum::new();
        for panel in &per_panel {
            acc.add(panel[li]);
        }
        let val = acc.total() / (c_ab * nf);
        sigma2.insert(lw.q, val);
    }

    Ok(ChaosVarianceReport {
        n,
        a,
        b,
        q_max,
        c_ab,
        sigma2,
    })
}

/// Contraction-decay diagnostic: the closed-form chained bound
/// `8 (b-a) ln^3(n(b-a) + 1) / n` for the normalized four-fold correlation
/// integral, and a direct Monte Carlo estimate of the integral itself.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ContractionBound {
    pub n: u32,
    pub interval_length: f64,
    pub closed_form: f64,
    pub mc_estimate: f64,
    pub mc_std_error: f64,
}

/// Evaluate both sides of the contraction bound.
///
/// The original integral is
/// `(1/n^2) int_{[na,nb]^4} prod 1/(|.|+1)` over the four chained
/// differences; the bound drops one factor and reduces by the change of
/// variables to `8 n (b-a) (int_0^{n(b-a)} dx/(x+1))^3 / n^2`.
pub fn contraction_bound(
    n: u32,
    a: f64,
    b: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<ContractionBound> {
    if n < 10 {
        return Err(Error::InvalidArgument("contraction bound needs n >= 10".into()));
    }
    if !(b > a) {
        return Err(Error::InvalidArgument("empty interval".into()));
    }
    let nf = n as f64;
    let len = b - a;
    let closed_form = 8.0 * len * (nf * len + 1.0).ln().powi(3) / nf;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = nf * a;
    let hi = nf * b;
    let volume = (hi - lo).powi(4);
    let mut sum = KahanSum::new();
    let mut sumsq = KahanSum::new();
    for _ in 0..mc_samples {
        let s: f64 = rng.gen_range(lo..hi);
        let t: f64 = rng.gen_range(lo..hi);
        let sp: f64 = rng.gen_range(lo..hi);
        let tp: f64 = rng.gen_range(lo..hi);
        let f = 1.0
            / (((s - t).abs() + 1.0)
                * ((sp - tp).abs() + 1.0)
                * ((s - sp).abs() + 1.0)
                * ((t - tp).abs() + 1.0));
        sum.add(f);
        sumsq.add(f * f);
    }
    let m = mc_samples as f64;
    let mean = sum.total() / m;
    let var = (sumsq.total() / m - mean * mean).max(0.0);
    let mc_estimate = volume * mean / (nf * nf);
    let mc_std_error = volume * (var / m).sqrt() / (nf * nf);

    Ok(ContractionBound {
        n,
        interval_length: len,
        closed_form,
        mc_estimate,
        mc_std_error,
    })
}
