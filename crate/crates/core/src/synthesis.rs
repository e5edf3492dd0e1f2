//! Symbol synthesis for single-atom measures: given `μ = |α|²δ_λ`, produce
//! `b(z) = A z/(1 - B z)` with `D(μ) = H(b)` isometrically, plus the circle
//! specialization and the Möbius classification.

use num_complex::Complex64;

use crate::debranges::{hb_gram, pythagorean_mate, MoebiusSymbol, PythagoreanPair, CLASSIFY_TOL};
use crate::dirichlet::{dmu_gram, PointMassMeasure};
use crate::error::{Error, Result};
use crate::hardy::DiskPoint;
use crate::operator::Certificate;

pub const DEFAULT_EQUALITY_TOL: f64 = 1e-9;
pub const COROLLARY_TOL: f64 = 1e-10;
pub const TWO_ISOMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisInput {
    pub alpha: Complex64,
    pub lambda: DiskPoint,
}

impl SynthesisInput {
    pub fn new(alpha: Complex64, lambda: Complex64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::Precondition("alpha must be finite".into()));
        }
        Ok(Self {
            alpha,
            lambda: DiskPoint::new(lambda)?,
        })
    }

    /// `|α|² δ_λ`, or the zero measure when `α = 0`.
    pub fn measure(&self) -> Result<PointMassMeasure> {
        let w = self.alpha.norm_sqr();
        if w == 0.0 {
            Ok(PointMassMeasure::empty())
        } else {
            PointMassMeasure::single(self.lambda, w)
        }
    }
}

/// `A ≥ 0` (gauge-fixed) and `B`, for `b(z) = A z/(1 - B z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOutput {
    pub a: f64,
    pub b: Complex64,
}

impl SynthesisOutput {
    pub fn symbol(&self) -> MoebiusSymbol {
        MoebiusSymbol {
            c: Complex64::new(0.0, 0.0),
            gamma: Complex64::new(self.a, 0.0),
            beta: self.b,
        }
    }
}

/// Both roots `(A²₋, A²₊)` of the quadratic behind the synthesis,
/// `A²± = |α|²(S ± √(S² - 4|λ|²))/(2|λ|²)` with `S = 1 + |α|² + |λ|²`.
///
/// The minus root is returned as `2|α|²/(S + √(S² - 4|λ|²))`, which is free of
/// cancellation and continuous at `λ = 0`. The plus root is infinite at
/// `λ = 0`.
pub fn branch_roots(input: &SynthesisInput) -> (f64, f64) {
    let a2 = input.alpha.norm_sqr();
    let l2 = input.lambda.value().norm_sqr();
    let s = 1.0 + a2 + l2;
    let root = (s * s - 4.0 * l2).max(0.0).sqrt();
    let minus = 2.0 * a2 / (s + root);
    let plus = if l2 == 0.0 {
        f64::INFINITY
    } else {
        a2 * (s + root) / (2.0 * l2)
    };
    (minus, plus)
}

pub fn synthesize_symbol(input: &SynthesisInput) -> SynthesisOutput {
    let a2 = input.alpha.norm_sqr();
    if a2 == 0.0 {
        return SynthesisOutput {
            a: 0.0,
            b: Complex64::new(0.0, 0.0),
        };
    }
    let (amp2, _) = branch_roots(input);
    SynthesisOutput {
        a: amp2.sqrt(),
        b: input.lambda.value().conj() * (amp2 / a2),
    }
}

/// The synthesized symbol together with its mate.
pub fn synthesize_pair(input: &SynthesisInput) -> Result<PythagoreanPair> {
    pythagorean_mate(&synthesize_symbol(input).symbol())
}

/// Compares the monomial Grams of `D(|α|²δ_λ)` and `H(b)` entrywise.
pub fn verify_norm_equality(input: &SynthesisInput, n: usize, tol: f64) -> Result<Certificate> {
    if n < 2 {
        return Err(Error::Precondition("Gram size must be >= 2".into()));
    }
    let pair = synthesize_pair(input)?;
    let gd = dmu_gram(&input.measure()?, n)?;
    let gb = hb_gram(&pair, n)?;
    let dev = crate::max_abs(&(&gd.entries - &gb.entries));
    let out = synthesize_symbol(input);
    Ok(Certificate::upper_bound("norm-equality", dev, tol)
        .with("N", n)
        .with("alpha", complex_value(input.alpha))
        .with("lambda", complex_value(input.lambda.value()))
        .with("A", out.a)
        .with("B", complex_value(out.b)))
}

pub(crate) fn complex_value(z: Complex64) -> serde_json::Value {
    serde_json::json!({ "re": z.re, "im": z.im })
}

/// Circle case `b(z) = γz/(1 - βz)` with `|β| + |γ| = 1`: returns the atom
/// weight `|γ|²/|β|` and location `conj(β)/|β|`.
pub fn corollary_params(beta: Complex64, gamma: Complex64) -> Result<(f64, DiskPoint)> {
    let bm = beta.norm();
    if bm == 0.0 {
        return Err(Error::Precondition("beta must be nonzero".into()));
    }
    let gap = bm + gamma.norm() - 1.0;
    if gap.abs() > COROLLARY_TOL {
        return Err(Error::Precondition(format!(
            "|beta| + |gamma| = {} differs from 1",
            bm + gamma.norm()
        )));
    }
    let weight = gamma.norm_sqr() / bm;
    let lambda = DiskPoint::new(beta.conj() / bm)?;
    Ok((weight, lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub completely_hyperexpansive: bool,
    pub two_isometry: bool,
}

/// For a valid nonextreme Möbius symbol the shift on H(b) is always
/// completely hyperexpansive; it is a 2-isometry iff `s = 2|β + conj(c)γ|`.
pub fn classify_symbol(b: &MoebiusSymbol) -> Result<Classification> {
    let flags = b.flags();
    if !flags.valid {
        return Err(Error::InvalidSymbol(
            "symbol violates |beta| < 1 or sup norm <= 1".into(),
        ));
    }
    if !flags.nonextreme {
        return Err(Error::ExtremeSymbol);
    }
    let gap = b.s() - 2.0 * b.p().sqrt();
    debug_assert!(gap >= -CLASSIFY_TOL);
    Ok(Classification {
        completely_hyperexpansive: true,
        two_isometry: gap.abs() <= TWO_ISOMETRY_TOL,
    })
}
