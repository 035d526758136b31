//! Normalized correlation functions of the rescaled Gaussian polynomial
//! process and their sinc-kernel limits.
//!
//! Rescaled coordinates are canonical here: `s, t` range over `[na, nb]`
//! and the original coordinate is always `s/n`. The quantities are
//!
//! * `V_n(t)^2 = K_n(t/n, t/n) / n`, the variance of the unnormalized
//!   process,
//! * `rbar_n(s,t)`, the correlation of the standardized process,
//! * `v_n(t)`, the standard deviation of its derivative,
//! * `rtilde'_n(s,t)` and `rtilde''_n(s,t)`, the mixed and
//!   derivative-derivative correlations after standardization.
//!
//! In the bulk these converge to sinc-kernel expressions evaluated at
//! `tau * omega(theta)` with `omega` the arcsine density.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::orthopoly::{KernelEval, OrthonormalBasis};

/// Threshold below which sinc and its derivatives switch to Taylor series;
/// direct evaluation loses digits to cancellation under it.
const SINC_SERIES_CUTOFF: f64 = 1e-4;

/// `S(u) = sin(pi u) / (pi u)`.
pub fn sinc_s(u: f64) -> f64 {
    let z = PI * u;
    if u.abs() < SINC_SERIES_CUTOFF {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0
    } else {
        z.sin() / z
    }
}

/// `S'(u)`.
pub fn sinc_s1(u: f64) -> f64 {
    if u.abs() < SINC_SERIES_CUTOFF {
        let z = PI * u;
        let z2 = z * z;
        PI * (-z / 3.0 + z * z2 / 30.0 - z * z2 * z2 / 840.0)
    } else {
        let z = PI * u;
        z.cos() / u - z.sin() / (PI * u * u)
    }
}

/// `S''(u)`; `S''(0) = -pi^2/3`.
pub fn sinc_s2(u: f64) -> f64 {
    if u.abs() < SINC_SERIES_CUTOFF {
        let z = PI * u;
        let z2 = z * z;
        PI * PI * (-1.0 / 3.0 + z2 / 10.0 - z2 * z2 / 168.0)
    } else {
        let z = PI * u;
        -PI * z.sin() / u - 2.0 * z.cos() / (u * u) + 2.0 * z.sin() / (PI * u * u * u)
    }
}

/// Diagonal kernel-ratio constants: `tau_{l,m} = (-1)^{(l-m)/2} / (l+m+1)`
/// for even `l+m`, zero otherwise. Hard-coded for `l + m <= 4`.
pub fn tau_lm(l: usize, m: usize) -> f64 {
    const TABLE: [[f64; 5]; 5] = [
        [1.0, 0.0, -1.0 / 3.0, 0.0, 1.0 / 5.0],
        [0.0, 1.0 / 3.0, 0.0, -1.0 / 5.0, 0.0],
        [-1.0 / 3.0, 0.0, 1.0 / 5.0, 0.0, -1.0 / 7.0],
        [0.0, -1.0 / 5.0, 0.0, 1.0 / 7.0, 0.0],
        [1.0 / 5.0, 0.0, -1.0 / 7.0, 0.0, 1.0 / 9.0],
    ];
    assert!(l + m <= 4, "tau_lm table covers l + m <= 4");
    TABLE[l][m]
}

/// Sinc-kernel limits of the correlation bundle at bulk point `theta`,
/// rescaled separation `tau`.
#[derive(Debug, Clone, Copy)]
pub struct SincLimits {
    pub theta: f64,
    pub tau: f64,
    pub omega: f64,
    pub s_val: f64,
    pub s1_val: f64,
    pub s2_val: f64,
    /// Limit of `rbar_n` at this separation.
    pub rbar: f64,
    /// Limit of `rtilde'_n`: `sqrt(3) S'(tau omega) / pi`.
    pub rtilde_prime: f64,
    /// Limit of `rtilde''_n`: `-3 S''(tau omega) / pi^2`.
    pub rtilde_doubleprime: f64,
    /// Limit of `v_n`: `pi omega / sqrt 3`.
    pub v: f64,
}

/// Evaluate the limiting bundle; `omega_fn` supplies the equilibrium
/// density at `theta`.
pub fn sinc_limits<F: Fn(f64) -> f64>(theta: f64, tau: f64, omega_fn: F) -> SincLimits {
    let omega = omega_fn(theta);
    let u = tau * omega;
    let (s_val, s1_val, s2_val) = (sinc_s(u), sinc_s1(u), sinc_s2(u));
    SincLimits {
        theta,
        tau,
        omega,
        s_val,
        s1_val,
        s2_val,
        rbar: s_val,
        rtilde_prime: 3.0_f64.sqrt() * s1_val / PI,
        rtilde_doubleprime: -3.0 * s2_val / (PI * PI),
        v: PI * omega / 3.0_f64.sqrt(),
    }
}

/// The four standardized correlations at one rescaled point pair.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationBundle {
    pub n: usize,
    pub s: f64,
    pub t: f64,
    /// Correlation of the standardized process at s and t.
    pub rbar: f64,
    /// Correlation of the process at s with the standardized derivative at t.
    pub rtilde_prime_st: f64,
    /// Same with the roles of s and t exchanged.
    pub rtilde_prime_ts: f64,
    /// Correlation of the standardized derivatives.
    pub rtilde_doubleprime: f64,
    pub v_s: f64,
    pub v_t: f64,
}

fn check_interior(n: usize, t: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "rescaled-process quantities need n >= 1".into(),
        ));
    }
    let x = t / n as f64;
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "rescaled point {t} maps outside the support (t/n = {x})"
        )));
    }
    Ok(())
}

fn positive(value: f64, what: &str) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NumericalDegeneracy(format!(
            "{what} = {value} must be positive; this signals a kernel bug"
        )))
    }
}

/// Radicand clamp: tiny negatives are roundoff, larger ones are bugs.
fn clamped_sqrt(radicand: f64, what: &str) -> Result<f64> {
    if radicand < -1e-12 {
        return Err(Error::NumericalDegeneracy(format!(
            "{what} radicand {radicand} below the roundoff tolerance"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `V_n(t) = sqrt(K_n(t/n, t/n) / n)`, the standard deviation of the
/// rescaled process before standardization.
pub fn big_v(basis: &OrthonormalBasis, n: usize, t: f64) -> Result<f64> {
    check_interior(n, t)?;
    let x = t / n as f64;
    let k = positive(basis.kernel(n, x, x, 0, 0)?, "K_n(t/n, t/n)")?;
    Ok((k / n as f64).sqrt())
}

/// `v_n(t)`: standard deviation of the derivative of the standardized
/// process,
/// `v_n^2 = K^{(1,1)}/(n^2 K) - (K^{(0,1)}/(n K))^2` on the diagonal.
pub fn v_n(basis: &OrthonormalBasis, n: usize, t: f64) -> Result<f64> {
    check_interior(n, t)?;
    let x = t / n as f64;
    let k = basis.kernel_all(n, x, x)?;
    v_n_from_kernel(&k, n)
}

pub(crate) fn v_n_from_kernel(k: &KernelEval, n: usize) -> Result<f64> {
    let nf = n as f64;
    let k00 = positive(k.get(0, 0), "K_n(t/n, t/n)")?;
    let ratio11 = k.get(1, 1) / (nf * nf * k00);
    let ratio01 = k.get(0, 1) / (nf * k00);
    clamped_sqrt(ratio11 - ratio01 * ratio01, "v_n")
}

/// `rbar_n(s, t) = K_n(s/n, t/n) / sqrt(K_n(s/n,s/n) K_n(t/n,t/n))`.
pub fn rbar(basis: &OrthonormalBasis, n: usize, s: f64, t: f64) -> Result<f64> {
    check_interior(n, s)?;
    check_interior(n, t)?;
    let nf = n as f64;
    let (xs, xt) = (s / nf, t / nf);
    let kss = positive(basis.kernel(n, xs, xs, 0, 0)?, "K_n(s/n, s/n)")?;
    let ktt = positive(basis.kernel(n, xt, xt, 0, 0)?, "K_n(t/n, t/n)")?;
    let kst = basis.kernel(n, xs, xt, 0, 0)?;
    Ok(kst / (kss * ktt).sqrt())
}

/// `rtilde'_n(s, t)`: correlation between the standardized process at `s`
/// and the standardized derivative at `t`.
pub fn rtilde_prime(basis: &OrthonormalBasis, n: usize, s: f64, t: f64) -> Result<f64> {
    Ok(bundle(basis, n, s, t)?.rtilde_prime_st)
}

/// `rtilde''_n(s, t)`: correlation between the standardized derivatives.
pub fn rtilde_doubleprime(basis: &OrthonormalBasis, n: usize, s: f64, t: f64) -> Result<f64> {
    Ok(bundle(basis, n, s, t)?.rtilde_doubleprime)
}

/// The full bundle in one pass (two basis tables, ten kernel sums).
pub fn bundle(basis: &OrthonormalBasis, n: usize, s: f64, t: f64) -> Result<CorrelationBundle> {
    check_interior(n, s)?;
    check_interior(n, t)?;
    let nf = n as f64;
    let (xs, xt) = (s / nf, t / nf);
    let kss = basis.kernel_all(n, xs, xs)?;
    let ktt = basis.kernel_all(n, xt, xt)?;
    let kst = basis.kernel_all(n, xs, xt)?;
    bundle_from_kernels(&kss, &ktt, &kst, n, s, t)
}

/// Assemble the bundle from precomputed kernel blocks at `(s/n, s/n)`,
/// `(t/n, t/n)` and `(s/n, t/n)`.
pub fn bundle_from_kernels(
    kss: &KernelEval,
    ktt: &KernelEval,
    kst: &KernelEval,
    n: usize,
    s: f64,
    t: f64,
) -> Result<CorrelationBundle> {
    let nf = n as f64;
    let k_ss = positive(kss.get(0, 0), "K_n(s/n, s/n)")?;
    let k_tt = positive(ktt.get(0, 0), "K_n(t/n, t/n)")?;
    let v_s = v_n_from_kernel(kss, n)?;
    let v_t = v_n_from_kernel(ktt, n)?;
    if v_s == 0.0 || v_t == 0.0 {
        return Err(Error::NumericalDegeneracy(
            "v_n vanished; standardized correlations undefined".into(),
        ));
    }
    let norm = (k_ss * k_tt).sqrt();
    let k_st = kst.get(0, 0);
    let rbar = k_st / norm;

    // Diagonal half-derivative ratios d01(t) = K^{(0,1)}(t,t) / (n K(t,t)).
    let d01_s = kss.get(0, 1) / (nf * k_ss);
    let d01_t = ktt.get(0, 1) / (nf * k_tt);

    // rtilde'(s,t) = [K^{(0,1)}(s,t)/n - d01(t) K(s,t)] / (v_t norm)
    let rtp_st = (kst.get(0, 1) / nf - d01_t * k_st) / (v_t * norm);
    // exchanging the roles of s and t turns K^{(0,1)} into K^{(1,0)}
    let rtp_ts = (kst.get(1, 0) / nf - d01_s * k_st) / (v_s * norm);

    // rtilde''(s,t) = [K^{(1,1)}/n^2 - d01(t) K^{(1,0)}/n
    //                  - d01(s) K^{(0,1)}/n + d01(s) d01(t) K] / (v_s v_t norm)
    let rtpp = (kst.get(1, 1) / (nf * nf) - d01_t * kst.get(1, 0) / nf
        - d01_s * kst.get(0, 1) / nf
        + d01_s * d01_t * k_st)
        / (v_s * v_t * norm);

    Ok(CorrelationBundle {
        n,
        s,
        t,
        rbar,
        rtilde_prime_st: rtp_st,
        rtilde_prime_ts: rtp_ts,
        rtilde_doubleprime: rtpp,
        v_s,
        v_t,
    })
}
