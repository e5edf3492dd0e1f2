//! de Branges-Rovnyak spaces H(b) for nonextreme Möbius symbols
//! `b(z) = (c + γz)/(1 - βz)`.
//!
//! The norm is computed through the Pythagorean mate `a`: for `f ∈ H(b)` the
//! unique `f⁺ ∈ H²` with `T_ā f⁺ = T_b̄ f` gives `‖f‖²_b = ‖f‖²_{H²} + ‖f⁺‖²_{H²}`.
//! For polynomial `f` both Toeplitz actions stay polynomial, so `f⁺` comes
//! out of one upper-triangular Toeplitz back-substitution.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dirichlet::{GramMatrix, SpaceTag};
use crate::error::{Error, Result};
use crate::hardy::{h2_inner, moebius_coeffs, ComplexPoly};

/// Absolute slack used by the coefficient criteria for validity and
/// innerness.
pub const CLASSIFY_TOL: f64 = 1e-12;

/// Cap on the truncation degree of `S*b`.
pub const MAX_SHIFT_TRUNCATION: usize = 2000;

/// `b(z) = (c + γz)/(1 - βz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusSymbol {
    pub c: Complex64,
    pub gamma: Complex64,
    pub beta: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolFlags {
    pub valid: bool,
    pub nonextreme: bool,
    pub inner: bool,
}

impl MoebiusSymbol {
    /// Builds a symbol after checking `|β| < 1` and `‖b‖_∞ ≤ 1`.
    pub fn new(c: Complex64, gamma: Complex64, beta: Complex64) -> Result<Self> {
        let b = Self { c, gamma, beta };
        b.check_valid()?;
        Ok(b)
    }

    /// `b ≡ 0`.
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { c: z, gamma: z, beta: z }
    }

    /// `s = 1 + |β|² - |c|² - |γ|²`.
    pub fn s(&self) -> f64 {
        1.0 + self.beta.norm_sqr() - self.c.norm_sqr() - self.gamma.norm_sqr()
    }

    /// `β + conj(c)γ`, the coefficient in
    /// `|1-βz|² - |c+γz|² = s - 2 Re((β + conj(c)γ) z)` on the circle.
    pub fn cross(&self) -> Complex64 {
        self.beta + self.c.conj() * self.gamma
    }

    /// Rounding bound on `s - 2√p` computed from these coefficients.
    pub fn rounding_scale(&self) -> f64 {
        16.0 * f64::EPSILON * (1.0 + self.beta.norm_sqr() + self.c.norm_sqr() + self.gamma.norm_sqr())
    }

    /// `p = |β + conj(c)γ|²`.
    pub fn p(&self) -> f64 {
        self.cross().norm_sqr()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.c + self.gamma * z) / (Complex64::new(1.0, 0.0) - self.beta * z)
    }

    /// First `n` Taylor coefficients.
    pub fn taylor(&self, n: usize) -> Vec<Complex64> {
        moebius_coeffs(self.c, self.gamma, self.beta, n)
    }

    pub fn flags(&self) -> SymbolFlags {
        validate_symbol(self.c, self.gamma, self.beta)
    }

    fn check_valid(&self) -> Result<()> {
        let parts = [self.c, self.gamma, self.beta];
        if parts.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidSymbol("non-finite coefficient".into()));
        }
        if self.beta.norm() >= 1.0 {
            return Err(Error::InvalidSymbol(format!(
                "|beta| = {} must be < 1",
                self.beta.norm()
            )));
        }
        let margin = self.s() - 2.0 * self.p().sqrt();
        if margin < -CLASSIFY_TOL {
            return Err(Error::InvalidSymbol(format!(
                "sup norm exceeds 1: s - 2 sqrt(p) = {margin:e} < 0"
            )));
        }
        Ok(())
    }

    /// Truncated backward shift `S*b = (b - b(0))/z`, cut where `|β|^M ≤ 1e-16`.
    pub fn backward_shift(&self) -> ComplexPoly {
        let m = shift_truncation_degree(self.beta);
        let coeffs = self.taylor(m + 1);
        ComplexPoly::new(coeffs[1..].to_vec())
    }
}

/// Number of retained coefficients `M` for `S*b`: the smallest `M` with
/// `|β|^M ≤ 1e-16`, at least 1, capped at [`MAX_SHIFT_TRUNCATION`].
pub fn shift_truncation_degree(beta: Complex64) -> usize {
    let r = beta.norm();
    if r == 0.0 {
        return 1;
    }
    let m = (-16.0 * std::f64::consts::LN_10 / r.ln()).ceil();
    if !m.is_finite() || m > MAX_SHIFT_TRUNCATION as f64 {
        MAX_SHIFT_TRUNCATION
    } else {
        (m as usize).max(1)
    }
}

/// Exact coefficient classification of `(c + γz)/(1 - βz)`.
///
/// On the circle `|1-βz|² - |c+γz|² = s - 2 Re((β + conj(c)γ) z)`, whose
/// minimum is `s - 2√p`. The symbol is inner exactly when that expression
/// vanishes identically.
pub fn validate_symbol(c: Complex64, gamma: Complex64, beta: Complex64) -> SymbolFlags {
    let b = MoebiusSymbol { c, gamma, beta };
    let valid = b.check_valid().is_ok();
    let inner = valid && b.s().abs() <= CLASSIFY_TOL && b.cross().norm() <= CLASSIFY_TOL;
    SymbolFlags {
        valid,
        nonextreme: valid && !inner,
        inner,
    }
}

/// A nonextreme symbol with its outer mate `a(z) = (ρ - σz)/(1 - βz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PythagoreanPair {
    pub b: MoebiusSymbol,
    pub rho: f64,
    pub sigma: Complex64,
}

impl PythagoreanPair {
    pub fn a_eval(&self, z: Complex64) -> Complex64 {
        (Complex64::new(self.rho, 0.0) - self.sigma * z) / (Complex64::new(1.0, 0.0) - self.b.beta * z)
    }

    pub fn b_eval(&self, z: Complex64) -> Complex64 {
        self.b.eval(z)
    }

    /// Smirnov quotient `φ = b/a`.
    pub fn phi(&self, z: Complex64) -> Complex64 {
        (self.b.c + self.b.gamma * z) / (Complex64::new(self.rho, 0.0) - self.sigma * z)
    }

    pub fn a_taylor(&self, n: usize) -> Vec<Complex64> {
        moebius_coeffs(Complex64::new(self.rho, 0.0), -self.sigma, self.b.beta, n)
    }

    /// `a'(0)/a(0) = β - σ/ρ`.
    pub fn log_derivative_at_zero(&self) -> Complex64 {
        self.b.beta - self.sigma / self.rho
    }

    /// `r = 1 - |β - a'(0)/a(0)|² = 1 - |σ/ρ|²`.
    pub fn ratio_factor(&self) -> f64 {
        1.0 - (self.b.beta - self.log_derivative_at_zero()).norm_sqr()
    }

    /// Largest `| |a|² + |b|² - 1 |` over the `n`-th roots of unity.
    pub fn unit_circle_deviation(&self, n: usize) -> f64 {
        (0..n)
            .map(|k| {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
                (self.a_eval(z).norm_sqr() + self.b_eval(z).norm_sqr() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Residuals of the mate equations `ρ² + |σ|² - s` and `ρ²|σ|² - p`.
    pub fn mate_residuals(&self) -> (f64, f64) {
        let r2 = self.rho * self.rho;
        let s2 = self.sigma.norm_sqr();
        (r2 + s2 - self.b.s(), r2 * s2 - self.b.p())
    }
}

/// Outer mate of a nonextreme Möbius symbol.
///
/// `ρ²` is the larger root of `t² - s t + p = 0`, which is what keeps the zero
/// `ρ/σ` of `a` off the open disk. `σ = (β + conj(c)γ)/ρ` matches the
/// `z`-coefficient of `|a|² = 1 - |b|²` on the circle.
pub fn pythagorean_mate(b: &MoebiusSymbol) -> Result<PythagoreanPair> {
    b.check_valid()?;
    if b.flags().inner {
        return Err(Error::ExtremeSymbol);
    }
    let s = b.s();
    let p = b.p();
    let gap = s - 2.0 * p.sqrt();
    // A rounding-level gap is the double root of the 2-isometric case; its
    // square root would otherwise perturb ρ at the √ε level.
    let disc = if gap.abs() <= b.rounding_scale() {
        0.0
    } else {
        (gap * (s + 2.0 * p.sqrt())).max(0.0)
    };
    let rho2 = 0.5 * (s + disc.sqrt());
    if rho2 <= 0.0 {
        return Err(Error::ExtremeSymbol);
    }
    let rho = rho2.sqrt();
    let sigma = b.cross() / rho;
    Ok(PythagoreanPair { b: *b, rho, sigma })
}

/// `Σ_{j≥i} conj(t_{j-i}) f_j`: the coaction of the Toeplitz operator with
/// conjugate-analytic symbol on a polynomial.
fn conj_toeplitz_apply(symbol: &[Complex64], f: &[Complex64]) -> Vec<Complex64> {
    let d = f.len();
    (0..d)
        .map(|i| {
            (i..d)
                .map(|j| symbol[j - i].conj() * f[j])
                .sum::<Complex64>()
        })
        .collect()
}

/// Solves `T_ā f⁺ = T_b̄ f` for the polynomial `f⁺`.
pub fn fplus(f: &ComplexPoly, pair: &PythagoreanPair) -> ComplexPoly {
    let d = f.len();
    if d == 0 {
        return ComplexPoly::zero();
    }
    let bt = pair.b.taylor(d);
    let at = pair.a_taylor(d);
    let rhs = conj_toeplitz_apply(&bt, f.coeffs());
    let mut x = vec![Complex64::new(0.0, 0.0); d];
    for i in (0..d).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..d {
            acc -= at[j - i].conj() * x[j];
        }
        x[i] = acc / pair.rho;
    }
    ComplexPoly::new(x)
}

/// `‖T_ā f⁺ - T_b̄ f‖_{H²}` for a candidate `f⁺`.
pub fn fplus_residual(f: &ComplexPoly, fp: &ComplexPoly, pair: &PythagoreanPair) -> f64 {
    let d = f.len().max(fp.len());
    if d == 0 {
        return 0.0;
    }
    let pad = |p: &ComplexPoly| (0..d).map(|k| p.coeff(k)).collect::<Vec<_>>();
    let lhs = conj_toeplitz_apply(&pair.a_taylor(d), &pad(fp));
    let rhs = conj_toeplitz_apply(&pair.b.taylor(d), &pad(f));
    lhs.iter()
        .zip(&rhs)
        .map(|(l, r)| (l - r).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `⟨f, g⟩_b = ⟨f, g⟩_{H²} + ⟨f⁺, g⁺⟩_{H²}`.
pub fn hb_inner(f: &ComplexPoly, g: &ComplexPoly, pair: &PythagoreanPair) -> Complex64 {
    h2_inner(f, g) + h2_inner(&fplus(f, pair), &fplus(g, pair))
}

pub fn hb_norm_sqr(f: &ComplexPoly, pair: &PythagoreanPair) -> f64 {
    f.h2_norm_sqr() + fplus(f, pair).h2_norm_sqr()
}

/// Monomial Gram matrix of H(b), built from cached `(zⁿ)⁺` vectors.
pub fn hb_gram(pair: &PythagoreanPair, n: usize) -> Result<GramMatrix> {
    if n == 0 {
        return Err(Error::Precondition("Gram size must be >= 1".into()));
    }
    let plus: Vec<ComplexPoly> = (0..n).map(|k| fplus(&ComplexPoly::monomial(k), pair)).collect();
    let g = DMatrix::from_fn(n, n, |r, s| {
        let base = if r == s { 1.0 } else { 0.0 };
        Complex64::new(base, 0.0) + h2_inner(&plus[r], &plus[s])
    });
    GramMatrix::new(SpaceTag::DeBranges, g)
}

/// `‖k_w‖²_b = (1 + |b(w)/a(w)|²)/(1 - |w|²)`.
pub fn hb_cauchy_norm(pair: &PythagoreanPair, w: Complex64) -> Result<f64> {
    let w2 = w.norm_sqr();
    if w2 >= 1.0 || !w2.is_finite() {
        return Err(Error::Precondition(format!(
            "kernel point must satisfy |w| < 1, got {}",
            w.norm()
        )));
    }
    Ok((1.0 + pair.phi(w).norm_sqr()) / (1.0 - w2))
}

/// `vₙ = ⟨zⁿ, S*b⟩_b` for `n < len`, with `S*b` truncated as in
/// [`MoebiusSymbol::backward_shift`].
pub fn shift_defect_vector(pair: &PythagoreanPair, len: usize) -> Vec<Complex64> {
    let x = pair.b.backward_shift();
    let xp = fplus(&x, pair);
    (0..len)
        .map(|k| {
            let zk = ComplexPoly::monomial(k);
            h2_inner(&zk, &x) + h2_inner(&fplus(&zk, pair), &xp)
        })
        .collect()
}

/// `ρ⁻² ‖S*b‖²_b`, the nonzero eigenvalue of the shift defect on H(b).
pub fn defect_eigenvalue(pair: &PythagoreanPair) -> f64 {
    hb_norm_sqr(&pair.b.backward_shift(), pair) / (pair.rho * pair.rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sym(c0: Complex64, g: Complex64, b: Complex64) -> MoebiusSymbol {
        MoebiusSymbol::new(c0, g, b).unwrap()
    }

    fn half_z() -> MoebiusSymbol {
        sym(c(0.0, 0.0), c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(0.0, 0.0))
    }

    fn example_two() -> MoebiusSymbol {
        let r = 65f64.sqrt();
        sym(c(0.0, 0.0), c(((9.0 - r) / 2.0).sqrt(), 0.0), c((9.0 - r) / 4.0, 0.0))
    }

    #[test]
    fn validate_examples() {
        let f = validate_symbol(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(f.valid && f.inner && !f.nonextreme);

        let f = validate_symbol(c(0.0, 0.0), c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(0.0, 0.0));
        assert!(f.valid && f.nonextreme && !f.inner);

        let f = validate_symbol(c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0));
        assert!(!f.valid && !f.nonextreme && !f.inner);
    }

    #[test]
    fn blaschke_factors_and_unimodular_constants_are_inner() {
        let a = c(0.3, -0.5);
        assert!(validate_symbol(-a, c(1.0, 0.0), a.conj()).inner);
        assert!(validate_symbol(Complex64::from_polar(1.0, 0.4), c(0.0, 0.0), c(0.0, 0.0)).inner);
        assert!(!validate_symbol(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).valid);
    }

    #[test]
    fn mate_examples() {
        let pair = pythagorean_mate(&half_z()).unwrap();
        assert!((pair.rho - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(pair.sigma, c(0.0, 0.0));
        assert!(pair.unit_circle_deviation(64) < 1e-15);

        let pair = pythagorean_mate(&MoebiusSymbol::zero()).unwrap();
        assert_eq!(pair.rho, 1.0);
        assert_eq!(pair.sigma, c(0.0, 0.0));

        let pair = pythagorean_mate(&example_two()).unwrap();
        assert!(pair.unit_circle_deviation(64) <= 1e-12);
        assert!(pair.rho >= pair.sigma.norm());
        let (r1, r2) = pair.mate_residuals();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
    }

    #[test]
    fn mate_rejects_extreme_and_invalid() {
        let inner = MoebiusSymbol { c: c(0.0, 0.0), gamma: c(1.0, 0.0), beta: c(0.0, 0.0) };
        assert!(matches!(pythagorean_mate(&inner), Err(Error::ExtremeSymbol)));
        let big = MoebiusSymbol { c: c(0.0, 0.0), gamma: c(2.0, 0.0), beta: c(0.0, 0.0) };
        assert!(matches!(pythagorean_mate(&big), Err(Error::InvalidSymbol(_))));
    }

    #[test]
    fn mate_with_nonzero_constant_term() {
        let b = sym(c(0.2, 0.1), c(-0.3, 0.25), c(0.1, -0.4));
        let pair = pythagorean_mate(&b).unwrap();
        assert!(pair.unit_circle_deviation(64) < 1e-14);
        assert!(pair.rho > 0.0 && pair.rho >= pair.sigma.norm());
    }

    #[test]
    fn fplus_examples() {
        let pair = pythagorean_mate(&half_z()).unwrap();
        assert!(fplus(&ComplexPoly::constant(c(1.0, 0.0)), &pair).is_zero());
        for n in 1..8 {
            let fp = fplus(&ComplexPoly::monomial(n), &pair);
            let expected = ComplexPoly::monomial(n - 1);
            assert!(fp.sub(&expected).h2_norm_sqr() < 1e-28, "n = {n}");
        }

        let b = sym(c(0.2, 0.1), c(-0.3, 0.25), c(0.1, -0.4));
        let pair = pythagorean_mate(&b).unwrap();
        let f = ComplexPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(2.0, -1.0)]);
        let fp = fplus(&f, &pair);
        assert!(fplus_residual(&f, &fp, &pair) < 1e-13);
    }

    #[test]
    fn hb_inner_examples() {
        let pair = pythagorean_mate(&half_z()).unwrap();
        let one = ComplexPoly::constant(c(1.0, 0.0));
        let z = ComplexPoly::monomial(1);
        assert!((hb_inner(&one, &one, &pair) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((hb_inner(&z, &z, &pair) - c(2.0, 0.0)).norm() < 1e-15);

        let zero_pair = pythagorean_mate(&MoebiusSymbol::zero()).unwrap();
        let f = ComplexPoly::new(vec![c(1.0, -1.0), c(0.5, 0.5)]);
        let g = ComplexPoly::new(vec![c(0.0, 2.0), c(3.0, 0.0), c(1.0, 1.0)]);
        assert_eq!(hb_inner(&f, &g, &zero_pair), h2_inner(&f, &g));
    }

    #[test]
    fn hb_gram_examples() {
        let pair = pythagorean_mate(&half_z()).unwrap();
        let g = hb_gram(&pair, 4).unwrap();
        for r in 0..4 {
            for s in 0..4 {
                let e = if r != s { 0.0 } else if r == 0 { 1.0 } else { 2.0 };
                assert!((g.get(r, s) - c(e, 0.0)).norm() < 1e-14);
            }
        }
        let pair = pythagorean_mate(&MoebiusSymbol::zero()).unwrap();
        assert_eq!(hb_gram(&pair, 3).unwrap().entries, DMatrix::identity(3, 3));
    }

    #[test]
    fn cauchy_norm_examples() {
        let zero_pair = pythagorean_mate(&MoebiusSymbol::zero()).unwrap();
        assert!((hb_cauchy_norm(&zero_pair, c(0.5, 0.0)).unwrap() - 4.0 / 3.0).abs() < 1e-15);

        let pair = pythagorean_mate(&half_z()).unwrap();
        assert!((hb_cauchy_norm(&pair, c(0.5, 0.0)).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!((hb_cauchy_norm(&pair, c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);

        let b = sym(c(0.3, 0.0), c(0.2, 0.0), c(0.1, 0.0));
        let pair = pythagorean_mate(&b).unwrap();
        let at0 = 1.0 + (b.c / pair.rho).norm_sqr();
        assert!((hb_cauchy_norm(&pair, c(0.0, 0.0)).unwrap() - at0).abs() < 1e-15);
        assert!(hb_cauchy_norm(&pair, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn shift_truncation_degrees() {
        assert_eq!(shift_truncation_degree(c(0.0, 0.0)), 1);
        let m = shift_truncation_degree(c(0.5, 0.0));
        assert!(0.5f64.powi(m as i32) <= 1e-16 && 0.5f64.powi(m as i32 - 1) > 1e-16);
        assert_eq!(shift_truncation_degree(c(0.999999, 0.0)), MAX_SHIFT_TRUNCATION);
    }

    #[test]
    fn defect_eigenvalue_of_scaled_identity_symbol() {
        let pair = pythagorean_mate(&half_z()).unwrap();
        assert!((defect_eigenvalue(&pair) - 1.0).abs() < 1e-14);
    }
}
