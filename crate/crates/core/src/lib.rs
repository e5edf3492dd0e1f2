//! Numerical models of Dirichlet-type spaces `D(μ)` for finitely-atomic
//! measures on the closed disk, de Branges-Rovnyak spaces `H(b)` for
//! nonextreme Möbius symbols, and the hyperexpansivity of the shift on both.
//!
//! The central computation is the symbol synthesis `μ = |α|²δ_λ ↦ b` with
//! `D(μ) = H(b)` isometrically, verified by comparing monomial Gram matrices.

pub mod cli;
pub mod debranges;
pub mod dirichlet;
pub mod error;
pub mod hardy;
pub mod io;
pub mod moments;
pub mod operator;
pub mod synthesis;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use num_complex;

pub use debranges::{
    fplus, hb_cauchy_norm, hb_gram, hb_inner, pythagorean_mate, validate_symbol, MoebiusSymbol,
    PythagoreanPair, SymbolFlags,
};
pub use dirichlet::{
    dmu_cauchy_norm, dmu_gram, dmu_inner, local_dirichlet, moment_matrix, Atom, GramMatrix,
    PointMassMeasure, SpaceTag,
};
pub use error::{Error, Result};
pub use hardy::{difference_quotient, h2_inner, moebius_taylor, poly_eval, ComplexPoly, DiskPoint};
pub use moments::{recover_atoms, roundtrip_check, AtomCount, RecoveryResult};
pub use operator::{
    certify_nsd, defect_matrix, hyperexpansive_form, numerical_rank, rank1_defect_check,
    ratio_identity_check, Certificate, HermitianForm,
};
pub use synthesis::{
    classify_symbol, corollary_params, synthesize_pair, synthesize_symbol, verify_norm_equality, Classification,
    SynthesisInput, SynthesisOutput,
};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest `|M[i][j] - conj(M[j][i])|`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
