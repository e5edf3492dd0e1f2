//! Hyperexpansivity forms, defect matrices and the certificates built on them.
//!
//! Everything here works from a monomial Gram matrix `G[n][m] = ⟨zⁿ, zᵐ⟩`, so
//! the same routines certify the shift on D(μ) and on H(b).

use std::collections::BTreeMap;

use nalgebra::linalg::{Cholesky, SymmetricEigen, SVD};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::debranges::{defect_eigenvalue, PythagoreanPair};
use crate::dirichlet::GramMatrix;
use crate::error::{Error, Result};
use crate::ComplexMatrix;

pub const DEFAULT_NSD_TOL: f64 = 1e-10;
pub const DEFAULT_RANK_TAU: f64 = 1e-8;

/// Largest order for which binomial coefficients are tabulated exactly.
pub const MAX_ORDER: usize = 60;

/// Compression of `Σᵢ (-1)ⁱ C(n,i) T*ⁱTⁱ` to polynomials of degree
/// `< entries.nrows()`, as the matrix of `h ↦ h* B h` on coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    pub order: usize,
    pub entries: ComplexMatrix,
}

impl HermitianForm {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.entries)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.entries)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.norm()
    }
}

/// Outcome of a numerical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub pass: bool,
    #[serde(with = "lenient_f64")]
    pub witness: f64,
    pub tolerance: f64,
    pub context: BTreeMap<String, Value>,
}

impl Certificate {
    /// Passing iff `witness <= tolerance`.
    pub fn upper_bound(kind: impl Into<String>, witness: f64, tolerance: f64) -> Self {
        Self {
            kind: kind.into(),
            pass: witness <= tolerance,
            witness,
            tolerance,
            context: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.context.insert(key.to_string(), value.into());
        self
    }
}

/// Non-finite witnesses serialize as `null` and read back as infinity.
mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Order-`n` form on `span{1, …, z^{N-1-n}}`:
/// `B[j][k] = Σᵢ (-1)ⁱ C(n,i) G[k+i][j+i]`.
pub fn hyperexpansive_form(g: &GramMatrix, order: usize) -> Result<HermitianForm> {
    let n = g.size();
    if order == 0 || order >= n {
        return Err(Error::Precondition(format!(
            "form order {order} must satisfy 1 <= n <= N-1 = {}",
            n.saturating_sub(1)
        )));
    }
    hyperexpansive_form_block(g, order, n - order)
}

/// As [`hyperexpansive_form`] but on the leading `size`-dimensional block.
pub fn hyperexpansive_form_block(
    g: &GramMatrix,
    order: usize,
    size: usize,
) -> Result<HermitianForm> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Precondition(format!(
            "form order {order} must lie in 1..={MAX_ORDER}"
        )));
    }
    if size == 0 || size + order > g.size() {
        return Err(Error::Dimension(format!(
            "form of order {order} on {size} monomials needs a Gram of size {}, got {}",
            size + order,
            g.size()
        )));
    }
    let coeffs: Vec<f64> = (0..=order)
        .map(|i| {
            let c = binomial(order, i) as f64;
            if i % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    let entries = DMatrix::from_fn(size, size, |j, k| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &w)| g.get(k + i, j + i) * w)
            .sum::<Complex64>()
    });
    Ok(HermitianForm { order, entries })
}

/// Real eigenvalues of the Hermitian part `(M + M*)/2`.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(sym).eigenvalues.iter().copied().collect()
}

/// Passes iff the largest eigenvalue is `≤ tol`.
pub fn certify_nsd(form: &HermitianForm, tol: f64) -> Certificate {
    let witness = if form.size() == 0 { 0.0 } else { form.max_eigenvalue() };
    Certificate::upper_bound("nsd", witness, tol)
        .with("order", form.order)
        .with("size", form.size())
}

/// NSD tolerance scaled by the form's size.
pub fn scaled_nsd_tolerance(form: &HermitianForm, base: f64) -> f64 {
    base * form.frobenius().max(1.0)
}

/// `D[n][m] = G[n+1][m+1] - G[n][m]`, the defect `T*T - I` on monomials.
pub fn defect_matrix(g: &GramMatrix) -> Result<ComplexMatrix> {
    let n = g.size();
    if n < 2 {
        return Err(Error::Precondition("defect matrix needs a Gram of size >= 2".into()));
    }
    Ok(DMatrix::from_fn(n - 1, n - 1, |r, s| g.get(r + 1, s + 1) - g.get(r, s)))
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Count of singular values above `tau · σ₁`; 0 for the zero matrix.
pub fn numerical_rank(m: &ComplexMatrix, tau: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&s1) if s1 > 0.0 => sv.iter().filter(|&&s| s > tau * s1).count(),
        _ => 0,
    }
}

/// Checks `B_n = r^{n-2} B₂` for `3 ≤ n ≤ n_max`, with `r = 1 - |σ/ρ|²`,
/// all forms taken on the common block of `N - n_max` monomials.
pub fn ratio_identity_check(
    g: &GramMatrix,
    pair: &PythagoreanPair,
    n_max: usize,
    tol: f64,
) -> Result<Certificate> {
    if n_max < 3 {
        return Err(Error::Precondition(format!("n_max = {n_max} must be >= 3")));
    }
    if n_max >= g.size() {
        return Err(Error::Dimension(format!(
            "n_max = {n_max} needs a Gram larger than {}",
            g.size()
        )));
    }
    let block = g.size() - n_max;
    let r = pair.ratio_factor();
    let b2 = hyperexpansive_form_block(g, 2, block)?;
    let scale = b2.frobenius().max(1.0);
    let mut worst = 0.0f64;
    let mut worst_order = 3;
    for n in 3..=n_max {
        let bn = hyperexpansive_form_block(g, n, block)?;
        let target = &b2.entries * Complex64::new(r.powi(n as i32 - 2), 0.0);
        let dev = (&bn.entries - target).norm() / scale;
        if dev > worst {
            worst = dev;
            worst_order = n;
        }
    }
    Ok(Certificate::upper_bound("ratio-identity", worst, tol)
        .with("r", r)
        .with("n_max", n_max)
        .with("block", block)
        .with("worst_order", worst_order))
}

/// Eigenvalues of the defect compressed to `span{1, …, z^{N-2}}` in the
/// Gram geometry: solutions of `D y = λ G y` with `G` the leading block.
pub fn compressed_defect_eigenvalues(g: &GramMatrix) -> Result<Vec<f64>> {
    let d = defect_matrix(g)?;
    let k = d.nrows();
    let lead = g.leading(k).entries;
    let lead = (&lead + lead.adjoint()) * Complex64::new(0.5, 0.0);
    let chol = Cholesky::new(lead)
        .ok_or_else(|| Error::Precondition("Gram block is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&d)
        .ok_or_else(|| Error::Precondition("singular Cholesky factor".into()))?;
    let y = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::Precondition("singular Cholesky factor".into()))?;
    let mut ev = hermitian_eigenvalues(&y);
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Checks that the H(b) shift defect has rank one with eigenvalue
/// `ρ⁻²‖S*b‖²_b`.
///
/// The rank is read off the raw defect matrix; the eigenvalue is that of the
/// compressed operator, which converges to the true one geometrically in
/// `|β|`.
pub fn rank1_defect_check(g: &GramMatrix, pair: &PythagoreanPair, tol: f64) -> Result<Certificate> {
    let d = defect_matrix(g)?;
    let rank = numerical_rank(&d, DEFAULT_RANK_TAU);
    let expected = defect_eigenvalue(pair);
    if rank == 0 {
        let witness = expected.abs();
        return Ok(Certificate::upper_bound("rank1-defect", witness, tol)
            .with("rank", 0)
            .with("degenerate", true)
            .with("expected_eigenvalue", expected));
    }
    let ev = compressed_defect_eigenvalues(g)?;
    let top = ev[0];
    let rel = (top - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
    let mut cert = Certificate::upper_bound("rank1-defect", rel, tol)
        .with("rank", rank)
        .with("eigenvalue", top)
        .with("expected_eigenvalue", expected);
    if rank != 1 {
        cert.pass = false;
    }
    Ok(cert)
}
