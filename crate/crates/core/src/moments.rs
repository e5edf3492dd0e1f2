//! Recovery of a finitely-atomic measure from its two-index moment matrix
//! `M[n][m] = Σ cᵢ ζᵢⁿ conj(ζᵢ)ᵐ`.
//!
//! The column space of `M` is spanned by the Vandermonde columns `(ζᵢⁿ)ₙ`, so
//! the dominant eigenvectors `U` satisfy the shift relation
//! `U[1..] = U[..N-1] Φ` with `eig(Φ) = {ζᵢ}` (ESPRIT). Weights then come from
//! a nonnegative least-squares fit of `M` by the rank-one terms `vᵢvᵢ*`.

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dirichlet::{dmu_gram, powers, Atom, PointMassMeasure};
use crate::error::{Error, Result};
use crate::hardy::DiskPoint;
use crate::operator::{defect_matrix, numerical_rank, Certificate, DEFAULT_RANK_TAU};
use crate::ComplexMatrix;

/// Locations this far outside the circle are pulled back onto it.
pub const CIRCLE_CLAMP: f64 = 1e-8;
pub const DEFAULT_RECOVERY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomCount {
    Auto,
    Exact(usize),
}

impl std::str::FromStr for AtomCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(AtomCount::Auto);
        }
        s.parse::<usize>()
            .map(AtomCount::Exact)
            .map_err(|_| Error::Parse(format!("atom count must be 'auto' or an integer, got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub measure: PointMassMeasure,
    /// Frobenius norm of `M - Σ cᵢ vᵢvᵢ*`.
    pub residual: f64,
    /// Condition number of the recovered Vandermonde block.
    pub condition: f64,
}

pub fn recover_atoms(m: &ComplexMatrix, count: AtomCount) -> Result<RecoveryResult> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "moment matrix must be square and nonempty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let rank = numerical_rank(&herm, DEFAULT_RANK_TAU);
    let k = match count {
        AtomCount::Auto => rank,
        AtomCount::Exact(k) if k > rank => {
            return Err(Error::Recovery(format!(
                "requested {k} atoms but the moment matrix has numerical rank {rank}"
            )))
        }
        AtomCount::Exact(k) => k,
    };
    if k == 0 {
        return Ok(RecoveryResult {
            measure: PointMassMeasure::empty(),
            residual: m.norm(),
            condition: 1.0,
        });
    }
    if n < k + 1 {
        return Err(Error::Recovery(format!(
            "{k} atoms need a moment matrix of size at least {}, got {n}",
            k + 1
        )));
    }

    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let u = DMatrix::from_fn(n, k, |r, j| eig.eigenvectors[(r, order[j])]);
    let upper = u.rows(0, n - 1).into_owned();
    let lower = u.rows(1, n - 1).into_owned();
    let phi = SVD::new(upper, true, true)
        .solve(&lower, 1e-14)
        .map_err(|e| Error::Recovery(format!("shift relation solve failed: {e}")))?;
    let raw = Schur::new(phi)
        .eigenvalues()
        .ok_or_else(|| Error::Recovery("eigenvalues of the shift matrix unavailable".into()))?;

    let mut locations = Vec::with_capacity(k);
    for z in raw.iter() {
        let r = z.norm();
        if r > 1.0 + CIRCLE_CLAMP || !r.is_finite() {
            return Err(Error::Recovery(format!(
                "recovered location {}+{}i lies outside the closed disk (|z| = {r})",
                z.re, z.im
            )));
        }
        locations.push(if r > 1.0 { z / r } else { *z });
    }

    let vand: Vec<Vec<Complex64>> = locations.iter().map(|&z| powers(z, n)).collect();
    let weights = fit_weights(m, &vand)?;
    let wmax = weights.iter().copied().fold(0.0, f64::max);
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, &w)| w <= 1e-12 * wmax.max(1e-300))
    {
        return Err(Error::Recovery(format!(
            "recovered weight {w:e} for atom {i} is not positive"
        )));
    }

    let mut recon = DMatrix::<Complex64>::zeros(n, n);
    for (v, &w) in vand.iter().zip(&weights) {
        for r in 0..n {
            for s in 0..n {
                recon[(r, s)] += v[r] * v[s].conj() * w;
            }
        }
    }
    let residual = (m - recon).norm();

    let vmat = DMatrix::from_fn(n, k, |r, j| vand[j][r]);
    let sv = SVD::new(vmat, false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    let atoms = locations
        .into_iter()
        .zip(weights)
        .map(|(z, w)| {
            Ok(Atom {
                location: DiskPoint::new(z)?,
                weight: w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let measure = PointMassMeasure::new(atoms)
        .map_err(|e| Error::Recovery(format!("recovered atoms do not form a measure: {e}")))?;
    Ok(RecoveryResult {
        measure,
        residual,
        condition,
    })
}

/// Nonnegative least squares `min ‖M - Σ wᵢ vᵢvᵢ*‖_F` over `w ≥ 0`
/// (Lawson-Hanson on the real-stacked system).
fn fit_weights(m: &ComplexMatrix, vand: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    let n = m.nrows();
    let k = vand.len();
    let rows = 2 * n * n;
    let a = DMatrix::<f64>::from_fn(rows, k, |row, j| {
        let cell = row / 2;
        let (r, s) = (cell / n, cell % n);
        let z = vand[j][r] * vand[j][s].conj();
        if row % 2 == 0 {
            z.re
        } else {
            z.im
        }
    });
    let b = DVector::<f64>::from_fn(rows, |row, _| {
        let cell = row / 2;
        let z = m[(cell / n, cell % n)];
        if row % 2 == 0 {
            z.re
        } else {
            z.im
        }
    });
    nnls(&a, &b)
}

fn lstsq_subset(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> Result<Vec<f64>> {
    let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, j| a[(r, cols[j])]);
    // Householder QR; the columns are few and well separated, so R is well
    // conditioned whenever the atoms are distinct.
    let qr = sub.qr();
    let qtb = qr.q().transpose() * b;
    let x = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Recovery("weight solve failed: singular Vandermonde block".into()))?;
    Ok(x.iter().copied().collect())
}

fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Vec<f64>> {
    let k = a.ncols();
    let mut x = vec![0.0; k];
    let mut passive = vec![false; k];
    let tol = 1e-12 * a.norm() * b.norm().max(1.0);
    for _ in 0..(3 * k + 3) {
        let xv = DVector::from_vec(x.clone());
        let grad = a.transpose() * (b - a * &xv);
        let next = (0..k)
            .filter(|&j| !passive[j] && grad[j] > tol)
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(j) = next else { break };
        passive[j] = true;
        loop {
            let cols: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let z = lstsq_subset(a, b, &cols)?;
            if z.iter().all(|&v| v > 0.0) {
                for (&c, &v) in cols.iter().zip(&z) {
                    x[c] = v;
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (&c, &v) in cols.iter().zip(&z) {
                if v <= 0.0 {
                    alpha = alpha.min(x[c] / (x[c] - v));
                }
            }
            for (&c, &v) in cols.iter().zip(&z) {
                x[c] += alpha * (v - x[c]);
                if x[c] <= 1e-15 {
                    x[c] = 0.0;
                    passive[c] = false;
                }
            }
        }
    }
    Ok(x)
}

/// Greedy minimal-distance pairing of two atom lists. Returns index pairs
/// `(i in a, j in b)`.
pub fn match_atoms(a: &[Atom], b: &[Atom]) -> Vec<(usize, usize)> {
    let mut cands: Vec<(f64, f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let d = (x.location.value() - y.location.value()).norm();
            cands.push((d, -(x.weight + y.weight), i, j));
        }
    }
    cands.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    for (_, _, i, j) in cands {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Largest location or weight mismatch after pairing; infinite when the atom
/// counts differ.
pub fn measure_distance(a: &PointMassMeasure, b: &PointMassMeasure) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    match_atoms(a.atoms(), b.atoms())
        .into_iter()
        .map(|(i, j)| {
            let (x, y) = (a.atoms()[i], b.atoms()[j]);
            (x.location.value() - y.location.value())
                .norm()
                .max((x.weight - y.weight).abs())
        })
        .fold(0.0, f64::max)
}

/// `μ → D(μ) Gram → defect → recovered μ`, compared atom by atom.
pub fn roundtrip_check(mu: &PointMassMeasure, n: usize, tol: f64) -> Result<Certificate> {
    if n < mu.len() + 1 {
        return Err(Error::Precondition(format!(
            "roundtrip with {} atoms needs N >= {}",
            mu.len(),
            mu.len() + 1
        )));
    }
    let d = defect_matrix(&dmu_gram(mu, n + 1)?)?;
    let cert = match recover_atoms(&d, AtomCount::Auto) {
        Ok(rec) => {
            let dist = measure_distance(mu, &rec.measure);
            Certificate::upper_bound("roundtrip", dist, tol)
                .with("atoms", mu.len())
                .with("recovered_atoms", rec.measure.len())
                .with("residual", rec.residual)
                .with("condition", rec.condition)
        }
        Err(e) => Certificate::upper_bound("roundtrip", f64::INFINITY, tol)
            .with("atoms", mu.len())
            .with("error", e.to_string()),
    };
    Ok(cert.with("N", n))
}
