//! Quadrature machinery shared by the rest of the crate.
//!
//! Gauss rules are built from the three-term recurrence of the target
//! measure by the Golub-Welsch construction: the nodes are the eigenvalues
//! of the truncated Jacobi matrix and the weights are Christoffel numbers
//! `w_i = 1 / sum_{j<N} p_j(x_i)^2` of the orthonormal polynomials. A
//! tanh-sinh rule is provided for integrands with algebraic endpoint
//! singularities; it does not use the recurrence at all, which makes it a
//! suitable independent cross-check of the Gauss path.

use std::f64::consts::PI;

use once_cell_shim::Lazy;

use crate::error::{Error, Result};

/// Neumaier-compensated accumulator. Oscillatory kernel sums at degree up
/// to a few thousand lose 2-3 digits under naive accumulation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// QL algorithm with implicit shifts for the eigenvalues of a symmetric
/// tridiagonal matrix. `diag` holds the diagonal, `offdiag` the subdiagonal
/// (one entry shorter). Returns the eigenvalues sorted ascending.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if offdiag.len() + 1 != n {
        return Err(Error::InvalidArgument(
            "offdiag must be one shorter than diag".into(),
        ));
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::NumericalDegeneracy(
                    "tridiagonal QL failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0_f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// A Gauss rule on a reference interval; nodes live where the defining
/// measure lives.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Golub-Welsch rule from orthonormal recurrence data: `diag[j]` and
    /// `offdiag[j]` are the Jacobi-matrix entries (offdiag[0] unused slot
    /// omitted; `offdiag[j]` couples degrees j and j+1), `mu0` is the total
    /// mass of the measure.
    pub fn from_jacobi_matrix(diag: &[f64], offdiag: &[f64], mu0: f64) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty Jacobi matrix".into()));
        }
        let nodes = symmetric_tridiagonal_eigenvalues(diag, offdiag)?;
        // Christoffel weights through the orthonormal recurrence:
        // p_0 = 1/sqrt(mu0), a_{j+1} p_{j+1} = (x - b_j) p_j - a_j p_{j-1}.
        let mut weights = Vec::with_capacity(n);
        for &x in &nodes {
            let mut prev = 0.0_f64;
            let mut cur = 1.0 / mu0.sqrt();
            let mut norm = KahanSum::new();
            norm.add(cur * cur);
            for j in 0..n - 1 {
                let a_next = offdiag[j];
                let a_cur = if j == 0 { 0.0 } else { offdiag[j - 1] };
                let next = ((x - diag[j]) * cur - a_cur * prev) / a_next;
                prev = cur;
                cur = next;
                norm.add(cur * cur);
            }
            weights.push(1.0 / norm.total());
        }
        Ok(Self { nodes, weights })
    }

    /// Apply the rule to `f` (no interval mapping; the nodes already carry
    /// the geometry of the defining measure).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = KahanSum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.total()
    }

    /// Apply a [-1,1] rule to `f` on `[a, b]` through the affine map.
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = KahanSum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.total()
    }
}

/// Gauss-Legendre rule with `n` nodes on [-1, 1].
pub fn gauss_legendre(n: usize) -> GaussRule {
    // Monic Legendre recurrence: alpha_j = 0, beta_j = j^2/(4j^2-1), mu0 = 2.
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n)
        .map(|j| {
            let j = j as f64;
            (j * j / (4.0 * j * j - 1.0)).sqrt()
        })
        .collect();
    GaussRule::from_jacobi_matrix(&diag, &offdiag, 2.0)
        .expect("Legendre Jacobi matrix is well formed")
}

mod once_cell_shim {
    //! Minimal lazy cell so the crate does not need once_cell for two values.
    use std::sync::OnceLock;

    pub struct Lazy<T> {
        cell: OnceLock<T>,
        init: fn() -> T,
    }

    impl<T> Lazy<T> {
        pub const fn new(init: fn() -> T) -> Self {
            Self {
                cell: OnceLock::new(),
                init,
            }
        }

        pub fn get(&self) -> &T {
            self.cell.get_or_init(self.init)
        }
    }
}

static GL15: Lazy<GaussRule> = Lazy::new(|| gauss_legendre(15));

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
}

impl QuadResult {
    /// Convert to a hard error if the refinement cap was hit.
    pub fn into_result(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::AccuracyNotReached {
                partial: self.value,
                error: self.abs_error,
            })
        }
    }
}

/// Adaptive bisection with a 15-node Gauss-Legendre panel estimate. The
/// panel error indicator is the defect between one panel and its two
/// halves. `max_depth` caps the bisection levels (the crate-wide default
/// is 14).
pub fn adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> QuadResult {
    let whole = GL15.get().integrate_on(a, b, &mut *f);
    let mut out = QuadResult {
        value: 0.0,
        abs_error: 0.0,
        converged: true,
    };
    adaptive_rec(f, a, b, whole, abs_tol, max_depth, &mut out);
    out
}

fn adaptive_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut QuadResult,
) {
    let mid = 0.5 * (a + b);
    let left = GL15.get().integrate_on(a, mid, &mut *f);
    let right = GL15.get().integrate_on(mid, b, &mut *f);
    let refined = left + right;
    let defect = (refined - whole).abs();
    if defect <= tol || depth == 0 || (b - a) < 1e-14 * (1.0 + mid.abs()) {
        out.value += refined;
        out.abs_error += defect;
        if defect > tol {
            out.converged = false;
        }
        return;
    }
    adaptive_rec(f, a, mid, left, 0.5 * tol, depth - 1, out);
    adaptive_rec(f, mid, b, right, 0.5 * tol, depth - 1, out);
}

/// Tanh-sinh (double-exponential) quadrature on `[a, b]`.
///
/// The integrand receives `(x, x - a, b - x)` with the endpoint distances
/// computed cancellation-free, so weights like `(1-x)^alpha` with
/// `alpha > -1` can be evaluated accurately all the way into the corners.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, level: u32) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let h = 0.5_f64.powi(level as i32);
    let mut acc = KahanSum::new();

    let term = |k: i64| -> Option<f64> {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        if u.abs() > 350.0 {
            return None;
        }
        let w = 0.5 * PI * t.cosh() / u.cosh().powi(2);
        if w < 1e-280 {
            return None;
        }
        // 1 +- tanh(u) without cancellation.
        let (dist_a, dist_b) = if u >= 0.0 {
            let em = (-2.0 * u).exp();
            (half * 2.0 / (1.0 + em), half * 2.0 * em / (1.0 + em))
        } else {
            let ep = (2.0 * u).exp();
            (half * 2.0 * ep / (1.0 + ep), half * 2.0 / (1.0 + ep))
        };
        if dist_a == 0.0 || dist_b == 0.0 {
            return None;
        }
        let x = mid + half * u.tanh();
        Some(w * f(x, dist_a, dist_b))
    };

    acc.add(term(0).unwrap_or(0.0));
    for sign in [1i64, -1] {
        let mut k = 1i64;
        loop {
            match term(sign * k) {
                Some(v) => acc.add(v),
                None => break,
            }
            k += 1;
            if k > 10_000 {
                break;
            }
        }
    }
    half * h * acc.total()
}
