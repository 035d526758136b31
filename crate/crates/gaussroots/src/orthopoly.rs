//! Orthonormal polynomial families on [-1, 1] and their reproducing kernels.
//!
//! All four built-in families are Jacobi-type weights
//! `w(x) = (1-x)^alpha (1+x)^beta`; the orthonormal three-term recurrence
//! coefficients are evaluated in closed form, so no normalization drifts in
//! at high degree. Kernel sums `K_n^{(l,m)}(x,y) = sum_j p_j^{(l)}(x)
//! p_j^{(m)}(y)` run in a fixed ascending-j order with compensated
//! accumulation; the Christoffel-Darboux collapsed form is a cross-check
//! path only.
//!
//! The bulk theory downstream assumes `sup_n ||p_n||_{L^inf[a',b']}` is
//! finite on interior intervals. That holds for all four built-in
//! families; it is an assumption of the model, not something this module
//! certifies programmatically.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad::{GaussRule, KahanSum};

/// Hard cap on polynomial degree; keeps desk-scale runtimes bounded.
pub const MAX_DEGREE: usize = 5000;

/// Highest derivative order the evaluation tables support.
pub const MAX_DERIV: usize = 8;

/// Built-in weight families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyKind {
    Chebyshev1,
    Legendre,
    Jacobi { alpha: f64, beta: f64 },
    Gegenbauer { lambda: f64 },
}

impl FamilyKind {
    /// Jacobi exponents (alpha, beta) of the weight `(1-x)^a (1+x)^b`.
    pub fn jacobi_exponents(self) -> (f64, f64) {
        match self {
            FamilyKind::Chebyshev1 => (-0.5, -0.5),
            FamilyKind::Legendre => (0.0, 0.0),
            FamilyKind::Jacobi { alpha, beta } => (alpha, beta),
            FamilyKind::Gegenbauer { lambda } => (lambda - 0.5, lambda - 0.5),
        }
    }

    /// Short identifier used in file names and CLI output.
    pub fn slug(&self) -> String {
        match self {
            FamilyKind::Chebyshev1 => "chebyshev1".into(),
            FamilyKind::Legendre => "legendre".into(),
            FamilyKind::Jacobi { alpha, beta } => format!("jacobi_a{alpha}_b{beta}"),
            FamilyKind::Gegenbauer { lambda } => format!("gegenbauer_l{lambda}"),
        }
    }
}

/// An orthonormal polynomial family: recurrence data, weight metadata and
/// the equilibrium density of the support.
///
/// The recurrence is stored in Jacobi-matrix form
/// `x p_j = a_{j+1} p_{j+1} + b_j p_j + a_j p_{j-1}` with `a_j > 0`; the
/// `(A_j, B_j, C_j)` coefficients of
/// `p_{j+1} = (A_j x + B_j) p_j - C_j p_{j-1}` are derived views. Immutable
/// after construction and shareable across threads.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    kind: FamilyKind,
    support: (f64, f64),
    /// Diagonal Jacobi-matrix entries b_j, j = 0..=MAX_DEGREE+1.
    diag: Vec<f64>,
    /// Off-diagonal entries a_j = sqrt(beta_j), j = 1..=MAX_DEGREE+1
    /// (index j stores the coefficient coupling degrees j-1 and j).
    offdiag: Vec<f64>,
    /// ln gamma_j of the leading coefficients (gamma_j itself overflows f64
    /// near degree 1000 for Chebyshev).
    ln_leading: Vec<f64>,
    /// Total mass of the weight, mu0 = int w dx.
    mu0: f64,
}

impl OrthonormalBasis {
    /// Construct a built-in family. Jacobi requires `alpha, beta > -1`;
    /// Gegenbauer requires `lambda > -1/2`.
    pub fn new(kind: FamilyKind) -> Result<Self> {
        let (alpha, beta) = kind.jacobi_exponents();
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter("non-finite family parameter".into()));
        }
        if alpha <= -1.0 || beta <= -1.0 {
            return Err(Error::InvalidParameter(format!(
                "Jacobi exponents must exceed -1 (got alpha = {alpha}, beta = {beta})"
            )));
        }

        let m = MAX_DEGREE + 2;
        let ab = alpha + beta;
        // mu0 = 2^(a+b+1) Gamma(a+1) Gamma(b+1) / Gamma(a+b+2)
        let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0)
            + ln_gamma(beta + 1.0)
            - ln_gamma(ab + 2.0))
        .exp();

        let mut diag = Vec::with_capacity(m);
        let mut offdiag = vec![0.0; m];
        diag.push((beta - alpha) / (ab + 2.0));
        for j in 1..m {
            let jf = j as f64;
            let den = (2.0 * jf + ab) * (2.0 * jf + ab + 2.0);
            diag.push((beta * beta - alpha * alpha) / den);
            let beta_j = if j == 1 {
                4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
            } else {
                4.0 * jf * (jf + alpha) * (jf + beta) * (jf + ab)
                    / ((2.0 * jf + ab).powi(2) * (2.0 * jf + ab + 1.0) * (2.0 * jf + ab - 1.0))
            };
            offdiag[j] = beta_j.sqrt();
        }

        // gamma_j = 1 / sqrt(beta_0 ... beta_j) with beta_0 = mu0.
        let mut ln_leading = Vec::with_capacity(m);
        let mut acc = -0.5 * mu0.ln();
        ln_leading.push(acc);
        for j in 1..m {
            acc -= offdiag[j].ln();
            ln_leading.push(acc);
        }

        Ok(Self {
            kind,
            support: (-1.0, 1.0),
            diag,
            offdiag,
            ln_leading,
            mu0,
        })
    }

    pub fn chebyshev1() -> Self {
        Self::new(FamilyKind::Chebyshev1).expect("fixed parameters")
    }

    pub fn legendre() -> Self {
        Self::new(FamilyKind::Legendre).expect("fixed parameters")
    }

    pub fn jacobi(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(FamilyKind::Jacobi { alpha, beta })
    }

    pub fn gegenbauer(lambda: f64) -> Result<Self> {
        if !(lambda > -0.5) {
            return Err(Error::InvalidParameter(format!(
                "Gegenbauer parameter must exceed -1/2 (got {lambda})"
            )));
        }
        Self::new(FamilyKind::Gegenbauer { lambda })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Total mass of the orthogonality weight.
    pub fn weight_mass(&self) -> f64 {
        self.mu0
    }

    /// The `(A_j, B_j, C_j)` recurrence view:
    /// `p_{j+1} = (A_j x + B_j) p_j - C_j p_{j-1}`.
    pub fn recurrence(&self, j: usize) -> (f64, f64, f64) {
        let a_next = self.offdiag[j + 1];
        let a_cur = if j == 0 { 0.0 } else { self.offdiag[j] };
        (1.0 / a_next, -self.diag[j] / a_next, a_cur / a_next)
    }

    /// Jacobi-matrix data truncated to `n` rows, plus the weight mass; this
    /// is what a Golub-Welsch quadrature rule needs.
    pub fn jacobi_matrix(&self, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
        let d = self.diag[..n].to_vec();
        let e = self.offdiag[1..n].to_vec();
        (d, e, self.mu0)
    }

    /// Gauss rule with `n_nodes` nodes for the family's own weight.
    pub fn gauss_rule(&self, n_nodes: usize) -> Result<GaussRule> {
        let (d, e, mu0) = self.jacobi_matrix(n_nodes);
        GaussRule::from_jacobi_matrix(&d, &e, mu0)
    }

    /// ln of the leading coefficient gamma_j (> 0 always; gamma_j itself can
    /// overflow f64 at high degree).
    pub fn ln_leading_coeff(&self, j: usize) -> f64 {
        self.ln_leading[j]
    }

    /// Ratio gamma_{j-1} / gamma_j = a_j; exact and overflow-free.
    pub fn leading_coeff_ratio(&self, j: usize) -> f64 {
        self.offdiag[j]
    }

    /// Arcsine equilibrium density of [-1, 1].
    pub fn equilibrium_density(&self, x: f64) -> f64 {
        1.0 / (std::f64::consts::PI * (1.0 - x * x).sqrt())
    }

    /// Equilibrium mass of `[a, b]`: (arcsin b - arcsin a)/pi.
    pub fn equilibrium_mass(&self, a: f64, b: f64) -> f64 {
        (b.asin() - a.asin()) / std::f64::consts::PI
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "degree {n} exceeds the cap {MAX_DEGREE}"
            )));
        }
        Ok(())
    }

    fn check_point(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.support;
        if !x.is_finite() || x < lo - 1e-12 || x > hi + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "point {x} outside the support [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Evaluate `p_j^{(k)}(x)` for all `0 <= j <= n`, `0 <= k <= max_deriv`
    /// in one sweep of the differentiated recurrence.
    pub fn eval_basis(&self, n: usize, x: f64, max_deriv: usize) -> Result<BasisTable> {
        self.check_degree(n)?;
        self.check_point(x)?;
        if max_deriv > MAX_DERIV {
            return Err(Error::InvalidArgument(format!(
                "derivative order {max_deriv} exceeds the cap {MAX_DERIV}"
            )));
        }
        let cols = max_deriv + 1;
        let mut vals = vec![0.0; (n + 1) * cols];
        vals[0] = 1.0 / self.mu0.sqrt();
        if n == 0 {
            return Ok(BasisTable { n, max_deriv, vals });
        }
        // prev/cur rows hold all derivative orders of p_{j-1}, p_j.
        let mut prev = vec![0.0; cols];
        let mut cur = vec![0.0; cols];
        cur[0] = vals[0];
        for j in 0..n {
            let b_j = self.diag[j];
            let a_j = if j == 0 { 0.0 } else { self.offdiag[j] };
            let a_next = self.offdiag[j + 1];
            let mut next = vec![0.0; cols];
            for k in 0..cols {
                let lower = if k == 0 { 0.0 } else { k as f64 * cur[k - 1] };
                next[k] = ((x - b_j) * cur[k] + lower - a_j * prev[k]) / a_next;
            }
            let row = (j + 1) * cols;
            vals[row..row + cols].copy_from_slice(&next);
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(BasisTable { n, max_deriv, vals })
    }

    /// Evaluate the linear combination `sum_j coeffs[j] p_j(x)` in O(n)
    /// without building a table.
    pub fn eval_combination(&self, coeffs: &[f64], x: f64) -> f64 {
        let n = coeffs.len() - 1;
        let mut prev = 0.0_f64;
        let mut cur = 1.0 / self.mu0.sqrt();
        let mut acc = coeffs[0] * cur;
        for j in 0..n {
            let a_j = if j == 0 { 0.0 } else { self.offdiag[j] };
            let next = ((x - self.diag[j]) * cur - a_j * prev) / self.offdiag[j + 1];
            prev = cur;
            cur = next;
            acc += coeffs[j + 1] * cur;
        }
        acc
    }

    /// Direct kernel sum `K_n^{(l,m)}(x, y)`; `l, m <= 2`.
    pub fn kernel(&self, n: usize, x: f64, y: f64, l: usize, m: usize) -> Result<f64> {
        if l > 2 || m > 2 {
            return Err(Error::InvalidArgument(format!(
                "kernel derivative orders must be <= 2 (got l = {l}, m = {m})"
            )));
        }
        let tx = self.eval_basis(n, x, l)?;
        let ty = self.eval_basis(n, y, m)?;
        Ok(kernel_from_tables(&tx, &ty, n, l, m))
    }

    /// All kernel values `K_n^{(l,m)}(x, y)` for `l, m in {0, 1, 2}` from a
    /// single pair of basis tables.
    pub fn kernel_all(&self, n: usize, x: f64, y: f64) -> Result<KernelEval> {
        let tx = self.eval_basis(n, x, 2)?;
        let ty = self.eval_basis(n, y, 2)?;
        Ok(KernelEval::from_tables(&tx, &ty, n, x, y))
    }

    /// Christoffel-Darboux collapsed form of `K_n(x, y)`; verification path
    /// for the direct sum, valid away from the diagonal.
    pub fn kernel_cd(&self, n: usize, x: f64, y: f64) -> Result<f64> {
        if n < 1 {
            return Err(Error::InvalidArgument("kernel_cd requires n >= 1".into()));
        }
        self.check_degree(n + 1)?;
        self.check_point(x)?;
        self.check_point(y)?;
        let guard = 1e-8 * (self.support.1 - self.support.0);
        let sep = (x - y).abs();
        if sep < guard {
            return Err(Error::NearDiagonal { sep, guard });
        }
        let (pn_x, pn1_x) = self.eval_pair(n, x);
        let (pn_y, pn1_y) = self.eval_pair(n, y);
        // gamma_n / gamma_{n+1} = a_{n+1}
        let ratio = self.offdiag[n + 1];
        Ok(ratio * (pn1_x * pn_y - pn_x * pn1_y) / (x - y))
    }

    /// (p_n(x), p_{n+1}(x)) by plain recurrence.
    fn eval_pair(&self, n: usize, x: f64) -> (f64, f64) {
        let mut prev = 0.0_f64;
        let mut cur = 1.0 / self.mu0.sqrt();
        for j in 0..=n {
            let a_j = if j == 0 { 0.0 } else { self.offdiag[j] };
            let next = ((x - self.diag[j]) * cur - a_j * prev) / self.offdiag[j + 1];
            prev = cur;
            cur = next;
        }
        (prev, cur)
    }
}

/// Values `p_j^{(k)}(x)` for `0 <= j <= n`, `0 <= k <= max_deriv`, row-major
/// in `j`.
#[derive(Debug, Clone)]
pub struct BasisTable {
    n: usize,
    max_deriv: usize,
    vals: Vec<f64>,
}

impl BasisTable {
    #[inline]
    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.vals[j * (self.max_deriv + 1) + k]
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn max_deriv(&self) -> usize {
        self.max_deriv
    }

    /// All derivative values of `p_j` as a slice.
    pub fn row(&self, j: usize) -> &[f64] {
        let c = self.max_deriv + 1;
        &self.vals[j * c..(j + 1) * c]
    }
}

/// Kernel sum from prebuilt tables; the accumulation order is ascending j
/// always, so `K^{(l,m)}(x,y)` and `K^{(m,l)}(y,x)` agree bit-for-bit.
pub fn kernel_from_tables(tx: &BasisTable, ty: &BasisTable, n: usize, l: usize, m: usize) -> f64 {
    debug_assert!(n <= tx.degree() && n <= ty.degree());
    debug_assert!(l <= tx.max_deriv() && m <= ty.max_deriv());
    let mut acc = KahanSum::new();
    for j in 0..=n {
        acc.add(tx.value(j, l) * ty.value(j, m));
    }
    acc.total()
}

/// The 3x3 block of kernel values at one point pair.
#[derive(Debug, Clone, Copy)]
pub struct KernelEval {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    values: [[f64; 3]; 3],
}

impl KernelEval {
    pub fn from_tables(tx: &BasisTable, ty: &BasisTable, n: usize, x: f64, y: f64) -> Self {
        let mut acc = [[KahanSum::new(); 3]; 3];
        for j in 0..=n {
            let rx = tx.row(j);
            let ry = ty.row(j);
            for (l, row) in acc.iter_mut().enumerate() {
                for (m, cell) in row.iter_mut().enumerate() {
                    cell.add(rx[l] * ry[m]);
                }
            }
        }
        let mut values = [[0.0; 3]; 3];
        for l in 0..3 {
            for m in 0..3 {
                values[l][m] = acc[l][m].total();
            }
        }
        Self { n, x, y, values }
    }

    /// `K_n^{(l,m)}(x, y)`.
    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.values[l][m]
    }
}
