//! Polynomials in the Hardy space H² and the coefficient machinery shared by
//! the Dirichlet and de Branges-Rovnyak modules.
//!
//! Every function handled here is an analytic polynomial stored by its dense
//! Taylor coefficients, so the H² inner product is the plain coefficient
//! pairing and boundary values always exist.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with modulus at or below this are treated as exact zeros when
/// normalizing.
pub const ZERO_THRESHOLD: f64 = 1e-300;

/// Slack allowed when classifying a point as lying in the closed disk.
pub const DISK_SLACK: f64 = 1e-12;

/// An analytic polynomial `Σ coeffs[k] z^k`.
///
/// The coefficient vector is kept normalized: no trailing zeros, and the
/// zero polynomial is the empty vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() <= ZERO_THRESHOLD) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    /// Cauchy kernel `k_w(z) = 1/(1 - conj(w) z)` truncated after `z^degree`.
    pub fn cauchy_kernel(w: Complex64, degree: usize) -> Self {
        let wc = w.conj();
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut p = Complex64::new(1.0, 0.0);
        for _ in 0..=degree {
            coeffs.push(p);
            p *= wc;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of stored coefficients (`degree + 1`, or 0).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `‖f‖²` in H².
    pub fn h2_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    /// Multiplication by `z`.
    pub fn shift(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = Vec::with_capacity(self.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Backward shift `(f - f(0))/z`.
    pub fn backward_shift(&self) -> Self {
        if self.len() <= 1 {
            return Self::zero();
        }
        Self::new(self.coeffs[1..].to_vec())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len() + other.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly_eval(self, z)
    }
}

impl From<Vec<Complex64>> for ComplexPoly {
    fn from(coeffs: Vec<Complex64>) -> Self {
        Self::new(coeffs)
    }
}

/// A point of the closed unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    /// Accepts `|z| ≤ 1`; points within [`DISK_SLACK`] outside the circle are
    /// pulled radially onto it.
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::OutsideDisk { re: z.re, im: z.im });
        }
        let r = z.norm();
        if r <= 1.0 {
            Ok(Self(z))
        } else if r <= 1.0 + DISK_SLACK {
            Ok(Self(z / r))
        } else {
            Err(Error::OutsideDisk { re: z.re, im: z.im })
        }
    }

    pub fn origin() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn on_circle(self, tol: f64) -> bool {
        (self.0.norm() - 1.0).abs() <= tol
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// H² inner product `Σ f_k conj(g_k)`.
pub fn h2_inner(f: &ComplexPoly, g: &ComplexPoly) -> Complex64 {
    f.coeffs
        .iter()
        .zip(&g.coeffs)
        .map(|(a, b)| a * b.conj())
        .sum()
}

/// Horner evaluation.
pub fn poly_eval(f: &ComplexPoly, z: Complex64) -> Complex64 {
    f.coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// The quotient `(f - f(ζ))/(z - ζ)` by synthetic division.
pub fn difference_quotient(f: &ComplexPoly, zeta: DiskPoint) -> ComplexPoly {
    let z = zeta.value();
    let Some(d) = f.degree() else {
        return ComplexPoly::zero();
    };
    if d == 0 {
        return ComplexPoly::zero();
    }
    let mut q = vec![Complex64::new(0.0, 0.0); d];
    q[d - 1] = f.coeffs[d];
    for k in (1..d).rev() {
        q[k - 1] = f.coeffs[k] + z * q[k];
    }
    ComplexPoly::new(q)
}

/// First `n` Taylor coefficients of `(c + γz)/(1 - βz)`, unnormalized.
pub(crate) fn moebius_coeffs(
    c: Complex64,
    gamma: Complex64,
    beta: Complex64,
    n: usize,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(c);
    let mut tail = c * beta + gamma;
    for _ in 1..n {
        out.push(tail);
        tail *= beta;
    }
    out
}

/// First `n` Taylor coefficients of `(c + γz)/(1 - βz)`:
/// `c, cβ+γ, β(cβ+γ), β²(cβ+γ), …`.
pub fn moebius_taylor(
    c: Complex64,
    gamma: Complex64,
    beta: Complex64,
    n: usize,
) -> Result<ComplexPoly> {
    if beta.norm() >= 1.0 || !beta.norm().is_finite() {
        return Err(Error::InvalidSymbol(format!(
            "|beta| = {} must be < 1",
            beta.norm()
        )));
    }
    if n == 0 {
        return Err(Error::Precondition("coefficient count must be >= 1".into()));
    }
    Ok(ComplexPoly::new(moebius_coeffs(c, gamma, beta, n)))
}
