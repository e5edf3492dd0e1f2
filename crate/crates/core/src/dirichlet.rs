//! Dirichlet-type spaces D(μ) for finitely-atomic measures on the closed disk.
//!
//! For `μ = Σ cᵢ δ_{ζᵢ}` the norm is
//! `‖f‖² = ‖f‖²_{H²} + Σ cᵢ ‖(f - f(ζᵢ))/(z - ζᵢ)‖²_{H²}`.
//! Boundary atoms are allowed; all functions are polynomials, so the boundary
//! value `f(ζ)` always exists.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hardy::{difference_quotient, h2_inner, ComplexPoly, DiskPoint};
use crate::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: DiskPoint,
    pub weight: f64,
}

/// `μ = Σ cᵢ δ_{ζᵢ}` with positive weights and distinct locations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointMassMeasure {
    atoms: Vec<Atom>,
}

impl PointMassMeasure {
    pub fn empty() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let mut m = Self::empty();
        for a in atoms {
            m.push(a.location, a.weight)?;
        }
        Ok(m)
    }

    /// Builds a measure from `(location, weight)` pairs, validating each.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, f64)>,
    {
        let mut m = Self::empty();
        for (z, w) in pairs {
            m.push(DiskPoint::new(z)?, w)?;
        }
        Ok(m)
    }

    /// `c δ_ζ`.
    pub fn single(location: DiskPoint, weight: f64) -> Result<Self> {
        let mut m = Self::empty();
        m.push(location, weight)?;
        Ok(m)
    }

    pub fn push(&mut self, location: DiskPoint, weight: f64) -> Result<()> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "atom weight {weight} must be positive and finite"
            )));
        }
        if self.atoms.iter().any(|a| a.location == location) {
            let z = location.value();
            return Err(Error::InvalidMeasure(format!(
                "duplicate atom location {}+{}i",
                z.re, z.im
            )));
        }
        self.atoms.push(Atom { location, weight });
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Whether every atom sits on the unit circle.
    pub fn supported_on_circle(&self, tol: f64) -> bool {
        self.atoms.iter().all(|a| a.location.on_circle(tol))
    }
}

/// Which inner product a Gram matrix was assembled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceTag {
    Hardy,
    Dirichlet,
    DeBranges,
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceTag::Hardy => "H2",
            SpaceTag::Dirichlet => "D(mu)",
            SpaceTag::DeBranges => "H(b)",
        })
    }
}

/// Monomial Gram matrix `G[n][m] = ⟨zⁿ, zᵐ⟩` in the tagged space.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub space: SpaceTag,
    pub entries: ComplexMatrix,
}

impl GramMatrix {
    pub fn new(space: SpaceTag, entries: ComplexMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension(format!(
                "Gram matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { space, entries })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.entries[(n, m)]
    }

    /// Leading `k×k` block (Gram of degrees `< k`).
    pub fn leading(&self, k: usize) -> GramMatrix {
        GramMatrix {
            space: self.space,
            entries: self.entries.view((0, 0), (k, k)).into_owned(),
        }
    }

    /// Largest `|G[n][m] - conj(G[m][n])|`.
    pub fn hermitian_defect(&self) -> f64 {
        crate::hermitian_defect(&self.entries)
    }
}

/// `D_ζ(f) = ‖(f - f(ζ))/(z - ζ)‖²_{H²}`.
pub fn local_dirichlet(f: &ComplexPoly, zeta: DiskPoint) -> f64 {
    difference_quotient(f, zeta).h2_norm_sqr()
}

pub fn dmu_inner(f: &ComplexPoly, g: &ComplexPoly, mu: &PointMassMeasure) -> Complex64 {
    let mut acc = h2_inner(f, g);
    for atom in &mu.atoms {
        let qf = difference_quotient(f, atom.location);
        let qg = difference_quotient(g, atom.location);
        acc += h2_inner(&qf, &qg) * atom.weight;
    }
    acc
}

pub fn dmu_norm_sqr(f: &ComplexPoly, mu: &PointMassMeasure) -> f64 {
    dmu_inner(f, f, mu).re
}

/// Monomial Gram matrix of D(μ).
///
/// Per atom, `P[n][m] = ⟨Q zⁿ, Q zᵐ⟩_{H²}` (Q the difference quotient at ζ)
/// obeys `P[n][m] = P[n-1][m-1] + ζⁿ⁻¹ conj(ζ)ᵐ⁻¹`, so assembly is O(N²)
/// per atom.
pub fn dmu_gram(mu: &PointMassMeasure, n: usize) -> Result<GramMatrix> {
    if n == 0 {
        return Err(Error::Precondition("Gram size must be >= 1".into()));
    }
    let mut g = DMatrix::<Complex64>::identity(n, n);
    for atom in &mu.atoms {
        let z = atom.location.value();
        let pw = powers(z, n);
        let pwc: Vec<Complex64> = pw.iter().map(|p| p.conj()).collect();
        let mut p = DMatrix::<Complex64>::zeros(n, n);
        for r in 1..n {
            for s in 1..n {
                p[(r, s)] = p[(r - 1, s - 1)] + pw[r - 1] * pwc[s - 1];
            }
        }
        g += p * Complex64::new(atom.weight, 0.0);
    }
    GramMatrix::new(SpaceTag::Dirichlet, g)
}

/// `M[n][m] = Σ cᵢ ζᵢⁿ conj(ζᵢ)ᵐ` for `0 ≤ n, m < size`.
pub fn moment_matrix(mu: &PointMassMeasure, size: usize) -> Result<ComplexMatrix> {
    if size == 0 {
        return Err(Error::Precondition("moment matrix size must be >= 1".into()));
    }
    let mut m = DMatrix::<Complex64>::zeros(size, size);
    for atom in &mu.atoms {
        let pw = powers(atom.location.value(), size);
        for r in 0..size {
            for s in 0..size {
                m[(r, s)] += pw[r] * pw[s].conj() * atom.weight;
            }
        }
    }
    Ok(m)
}

/// Closed form of `D_μ(k_w)` for `μ = |α|² δ_λ`:
/// `|α|²|w|² / (|1 - conj(λ)w|² (1 - |w|²))`.
pub fn dmu_cauchy_norm(alpha: Complex64, lambda: DiskPoint, w: Complex64) -> Result<f64> {
    let w2 = w.norm_sqr();
    if w2 >= 1.0 || !w2.is_finite() {
        return Err(Error::Precondition(format!(
            "kernel point must satisfy |w| < 1, got {}",
            w.norm()
        )));
    }
    let denom = (Complex64::new(1.0, 0.0) - lambda.value().conj() * w).norm_sqr() * (1.0 - w2);
    Ok(alpha.norm_sqr() * w2 / denom)
}

/// `[1, z, z², …, z^{n-1}]`.
pub(crate) fn powers(z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        out.push(p);
        p *= z;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(c(re, im)).unwrap()
    }

    fn delta(re: f64, im: f64, w: f64) -> PointMassMeasure {
        PointMassMeasure::single(dp(re, im), w).unwrap()
    }

    #[test]
    fn local_dirichlet_examples() {
        assert!((local_dirichlet(&ComplexPoly::monomial(1), dp(0.0, 0.7)) - 1.0).abs() < 1e-15);
        assert!((local_dirichlet(&ComplexPoly::monomial(2), dp(0.5, 0.0)) - 1.25).abs() < 1e-15);
        assert_eq!(local_dirichlet(&ComplexPoly::constant(c(3.0, 2.0)), dp(0.2, 0.1)), 0.0);
    }

    #[test]
    fn dmu_inner_examples() {
        let f = ComplexPoly::from_real(&[1.0, -2.0, 0.5]);
        let g = ComplexPoly::new(vec![c(0.0, 1.0), c(3.0, 0.0)]);
        assert_eq!(dmu_inner(&f, &g, &PointMassMeasure::empty()), h2_inner(&f, &g));

        let z = ComplexPoly::monomial(1);
        assert!((dmu_inner(&z, &z, &delta(0.0, 0.0, 1.0)) - c(2.0, 0.0)).norm() < 1e-15);

        let z2 = ComplexPoly::monomial(2);
        assert!((dmu_inner(&z2, &z, &delta(0.5, 0.0, 1.0)) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gram_examples() {
        let g = dmu_gram(&delta(0.0, 0.0, 1.0), 4).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(2.0, 0.0),
            c(2.0, 0.0),
            c(2.0, 0.0),
        ]));
        assert!((g.entries - expected).norm() < 1e-15);

        let g = dmu_gram(&PointMassMeasure::empty(), 3).unwrap();
        assert_eq!(g.entries, DMatrix::identity(3, 3));

        // G[1][0] = ⟨z,1⟩_{H²} + ⟨Q z, Q 1⟩ = 0 + ⟨1, 0⟩ = 0.
        let g = dmu_gram(&delta(0.5, 0.0, 1.0), 2).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert!((g.entries - expected).norm() < 1e-15);

        assert!(dmu_gram(&PointMassMeasure::empty(), 0).is_err());
    }

    #[test]
    fn gram_matches_inner_product_oracle() {
        let mu = PointMassMeasure::from_pairs([
            (c(0.3, -0.4), 0.7),
            (Complex64::from_polar(1.0, 2.0), 1.3),
            (c(0.0, 0.0), 0.2),
        ])
        .unwrap();
        let n = 9;
        let g = dmu_gram(&mu, n).unwrap();
        for r in 0..n {
            for s in 0..n {
                let direct = dmu_inner(&ComplexPoly::monomial(r), &ComplexPoly::monomial(s), &mu);
                assert!((g.get(r, s) - direct).norm() < 1e-13, "({r},{s})");
            }
        }
        assert!(g.hermitian_defect() < 1e-15);
    }

    #[test]
    fn moment_matrix_examples() {
        let m = moment_matrix(&delta(0.5, 0.0, 1.0), 3).unwrap();
        for r in 0..3 {
            for s in 0..3 {
                assert!((m[(r, s)] - c(0.5f64.powi((r + s) as i32), 0.0)).norm() < 1e-16);
            }
        }

        let m = moment_matrix(&delta(0.0, 0.5, 2.0), 2).unwrap();
        let expected = [c(2.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.5, 0.0)];
        for (k, e) in expected.iter().enumerate() {
            assert!((m[(k / 2, k % 2)] - e).norm() < 1e-15);
        }

        let m = moment_matrix(&PointMassMeasure::empty(), 2).unwrap();
        assert_eq!(m, DMatrix::zeros(2, 2));
    }

    #[test]
    fn cauchy_closed_form_examples() {
        let v = dmu_cauchy_norm(c(1.0, 0.0), dp(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let v = dmu_cauchy_norm(c(0.3, 2.0), dp(0.1, 0.6), c(0.0, 0.0)).unwrap();
        assert_eq!(v, 0.0);
        let v = dmu_cauchy_norm(c(1.0, 0.0), dp(1.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-15);
        assert!(dmu_cauchy_norm(c(1.0, 0.0), dp(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn measure_validation() {
        assert!(PointMassMeasure::from_pairs([(c(0.1, 0.0), 0.0)]).is_err());
        assert!(PointMassMeasure::from_pairs([(c(0.1, 0.0), -1.0)]).is_err());
        assert!(PointMassMeasure::from_pairs([(c(0.1, 0.0), 1.0), (c(0.1, 0.0), 2.0)]).is_err());
        assert!(PointMassMeasure::from_pairs([(c(1.5, 0.0), 1.0)]).is_err());
        assert!(PointMassMeasure::from_pairs([]).unwrap().is_empty());
    }
}
