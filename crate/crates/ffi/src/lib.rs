//! C ABI for `dbr-core`.
//!
//! Objects cross the boundary as opaque handles (`DbrMeasure`, `DbrPair`,
//! `DbrGram`) that the caller frees with the matching `*_free` function.
//! Every fallible call returns a [`DbrStatus`]; on anything other than
//! `DBR_STATUS_OK` a message is available from [`dbr_last_error`] on the same
//! thread until the next failing call.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dbr_core::num_complex::Complex64;
use dbr_core::{
    dmu_gram, hb_gram, hyperexpansive_form, numerical_rank, pythagorean_mate, recover_atoms,
    synthesize_pair, synthesize_symbol, validate_symbol, verify_norm_equality, AtomCount, ComplexMatrix,
    DiskPoint, Error, GramMatrix, MoebiusSymbol, PointMassMeasure, PythagoreanPair, SynthesisInput,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideDisk = 3,
    InvalidSymbol = 4,
    ExtremeSymbol = 5,
    InvalidMeasure = 6,
    Dimension = 7,
    Recovery = 8,
    Parse = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DbrComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for DbrComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<DbrComplex> for Complex64 {
    fn from(z: DbrComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DbrSymbolFlags {
    pub valid: bool,
    pub nonextreme: bool,
    pub inner: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DbrCertificate {
    pub pass: bool,
    pub witness: f64,
    pub tolerance: f64,
}

pub struct DbrMeasure(PointMassMeasure);
pub struct DbrPair(PythagoreanPair);
pub struct DbrGram(GramMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DbrStatus {
    match e {
        Error::OutsideDisk { .. } => DbrStatus::OutsideDisk,
        Error::InvalidSymbol(_) => DbrStatus::InvalidSymbol,
        Error::ExtremeSymbol => DbrStatus::ExtremeSymbol,
        Error::InvalidMeasure(_) => DbrStatus::InvalidMeasure,
        Error::Dimension(_) => DbrStatus::Dimension,
        Error::Recovery(_) => DbrStatus::Recovery,
        Error::Parse(_) | Error::Json(_) => DbrStatus::Parse,
        Error::Precondition(_) | Error::Io(_) => DbrStatus::InvalidArgument,
    }
}

struct Fail(DbrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DbrStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error and turns panics into `DBR_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DbrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DbrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            DbrStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn read_matrix(data: *const DbrComplex, n: usize) -> Result<ComplexMatrix, Fail> {
    if data.is_null() {
        return Err(null("matrix data"));
    }
    if n == 0 {
        return Err(Fail(DbrStatus::Dimension, "matrix size must be positive".into()));
    }
    let len = n.checked_mul(n).ok_or_else(|| Fail(DbrStatus::Dimension, "matrix size overflows".into()))?;
    let cells = std::slice::from_raw_parts(data, len);
    Ok(ComplexMatrix::from_fn(n, n, |r, c| cells[r * n + c].into()))
}

fn symbol(c: DbrComplex, gamma: DbrComplex, beta: DbrComplex) -> MoebiusSymbol {
    MoebiusSymbol { c: c.into(), gamma: gamma.into(), beta: beta.into() }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dbr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failing call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn dbr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn dbr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// New empty measure.
#[no_mangle]
pub extern "C" fn dbr_measure_new() -> *mut DbrMeasure {
    Box::into_raw(Box::new(DbrMeasure(PointMassMeasure::empty())))
}

#[no_mangle]
pub unsafe extern "C" fn dbr_measure_free(m: *mut DbrMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Adds an atom of positive `weight` at `location` (closed disk).
#[no_mangle]
pub unsafe extern "C" fn dbr_measure_add(m: *mut DbrMeasure, location: DbrComplex, weight: f64) -> DbrStatus {
    guard(|| {
        let m = out(m, "measure")?;
        m.0.push(DiskPoint::new(location.into())?, weight)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dbr_measure_len(m: *const DbrMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn dbr_measure_atom(
    m: *const DbrMeasure,
    index: usize,
    location: *mut DbrComplex,
    weight: *mut f64,
) -> DbrStatus {
    guard(|| {
        let m = handle(m, "measure")?;
        let atom = m.0.atoms().get(index).ok_or_else(|| {
            Fail(DbrStatus::InvalidArgument, format!("atom index {index} out of range"))
        })?;
        *out(location, "location")? = atom.location.value().into();
        *out(weight, "weight")? = atom.weight;
        Ok(())
    })
}

/// Parses `{"atoms":[{"re":..,"im":..,"weight":..}]}`.
#[no_mangle]
pub unsafe extern "C" fn dbr_measure_from_json(text: *const c_char, result: *mut *mut DbrMeasure) -> DbrStatus {
    guard(|| {
        let result = out(result, "result")?;
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| Fail(DbrStatus::Parse, "text is not UTF-8".into()))?;
        let mu = dbr_core::io::read_measure(text)?;
        *result = Box::into_raw(Box::new(DbrMeasure(mu)));
        Ok(())
    })
}

/// Serializes the measure; free the result with [`dbr_string_free`].
#[no_mangle]
pub unsafe extern "C" fn dbr_measure_to_json(m: *const DbrMeasure, result: *mut *mut c_char) -> DbrStatus {
    guard(|| {
        let m = handle(m, "measure")?;
        let result = out(result, "result")?;
        let json = CString::new(dbr_core::io::measure_to_json(&m.0)).expect("JSON has no nul bytes");
        *result = json.into_raw();
        Ok(())
    })
}

/// Classifies `(c + γz)/(1 - βz)`. Never fails on bad coefficients; those
/// come back with `valid = false`.
#[no_mangle]
pub unsafe extern "C" fn dbr_symbol_validate(
    c: DbrComplex,
    gamma: DbrComplex,
    beta: DbrComplex,
    flags: *mut DbrSymbolFlags,
) -> DbrStatus {
    guard(|| {
        let f = validate_symbol(c.into(), gamma.into(), beta.into());
        *out(flags, "flags")? = DbrSymbolFlags { valid: f.valid, nonextreme: f.nonextreme, inner: f.inner };
        Ok(())
    })
}

/// Outer mate of a nonextreme symbol.
#[no_mangle]
pub unsafe extern "C" fn dbr_pair_new(
    c: DbrComplex,
    gamma: DbrComplex,
    beta: DbrComplex,
    result: *mut *mut DbrPair,
) -> DbrStatus {
    guard(|| {
        let result = out(result, "result")?;
        let pair = pythagorean_mate(&symbol(c, gamma, beta))?;
        *result = Box::into_raw(Box::new(DbrPair(pair)));
        Ok(())
    })
}

/// Mate of the symbol synthesized from `|α|²δ_λ`.
#[no_mangle]
pub unsafe extern "C" fn dbr_pair_from_synthesis(
    alpha: DbrComplex,
    lambda: DbrComplex,
    result: *mut *mut DbrPair,
) -> DbrStatus {
    guard(|| {
        let result = out(result, "result")?;
        let input = SynthesisInput::new(alpha.into(), lambda.into())?;
        *result = Box::into_raw(Box::new(DbrPair(synthesize_pair(&input)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dbr_pair_free(p: *mut DbrPair) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub unsafe extern "C" fn dbr_pair_coefficients(
    p: *const DbrPair,
    rho: *mut f64,
    sigma: *mut DbrComplex,
) -> DbrStatus {
    guard(|| {
        let p = handle(p, "pair")?;
        *out(rho, "rho")? = p.0.rho;
        *out(sigma, "sigma")? = p.0.sigma.into();
        Ok(())
    })
}

/// `A` and `B` of `b(z) = A z/(1 - B z)` for `μ = |α|²δ_λ`.
#[no_mangle]
pub unsafe extern "C" fn dbr_synthesize(
    alpha: DbrComplex,
    lambda: DbrComplex,
    a: *mut f64,
    b: *mut DbrComplex,
) -> DbrStatus {
    guard(|| {
        let input = SynthesisInput::new(alpha.into(), lambda.into())?;
        let s = synthesize_symbol(&input);
        *out(a, "a")? = s.a;
        *out(b, "b")? = s.b.into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dbr_verify_norm_equality(
    alpha: DbrComplex,
    lambda: DbrComplex,
    n: usize,
    tol: f64,
    cert: *mut DbrCertificate,
) -> DbrStatus {
    guard(|| {
        let cert = out(cert, "certificate")?;
        let input = SynthesisInput::new(alpha.into(), lambda.into())?;
        let c = verify_norm_equality(&input, n, tol)?;
        *cert = DbrCertificate { pass: c.pass, witness: c.witness, tolerance: c.tolerance };
        Ok(())
    })
}

/// Monomial Gram of `D(μ)` for `z^0..z^{n-1}`.
#[no_mangle]
pub unsafe extern "C" fn dbr_dmu_gram(m: *const DbrMeasure, n: usize, result: *mut *mut DbrGram) -> DbrStatus {
    guard(|| {
        let m = handle(m, "measure")?;
        let result = out(result, "result")?;
        *result = Box::into_raw(Box::new(DbrGram(dmu_gram(&m.0, n)?)));
        Ok(())
    })
}

/// Monomial Gram of `H(b)` for `z^0..z^{n-1}`.
#[no_mangle]
pub unsafe extern "C" fn dbr_hb_gram(p: *const DbrPair, n: usize, result: *mut *mut DbrGram) -> DbrStatus {
    guard(|| {
        let p = handle(p, "pair")?;
        let result = out(result, "result")?;
        *result = Box::into_raw(Box::new(DbrGram(hb_gram(&p.0, n)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dbr_gram_free(g: *mut DbrGram) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

#[no_mangle]
pub unsafe extern "C" fn dbr_gram_size(g: *const DbrGram) -> usize {
    g.as_ref().map_or(0, |g| g.0.size())
}

/// `⟨z^col, z^row⟩`, i.e. entry `(row, col)`.
#[no_mangle]
pub unsafe extern "C" fn dbr_gram_entry(
    g: *const DbrGram,
    row: usize,
    col: usize,
    value: *mut DbrComplex,
) -> DbrStatus {
    guard(|| {
        let g = handle(g, "gram")?;
        let n = g.0.size();
        if row >= n || col >= n {
            return Err(Fail(DbrStatus::Dimension, format!("entry ({row}, {col}) outside {n}x{n}")));
        }
        *out(value, "value")? = g.0.entries[(row, col)].into();
        Ok(())
    })
}

/// Copies the matrix row-major into `buffer`, which holds `len` cells.
#[no_mangle]
pub unsafe extern "C" fn dbr_gram_copy(g: *const DbrGram, buffer: *mut DbrComplex, len: usize) -> DbrStatus {
    guard(|| {
        let g = handle(g, "gram")?;
        let n = g.0.size();
        if len < n * n {
            return Err(Fail(DbrStatus::Dimension, format!("buffer holds {len} cells, need {}", n * n)));
        }
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let cells = std::slice::from_raw_parts_mut(buffer, n * n);
        for r in 0..n {
            for c in 0..n {
                cells[r * n + c] = g.0.entries[(r, c)].into();
            }
        }
        Ok(())
    })
}

/// Largest eigenvalue of the order-`order` hyperexpansive form.
#[no_mangle]
pub unsafe extern "C" fn dbr_hyperexpansive_max_eigenvalue(
    g: *const DbrGram,
    order: usize,
    value: *mut f64,
) -> DbrStatus {
    guard(|| {
        let g = handle(g, "gram")?;
        *out(value, "value")? = hyperexpansive_form(&g.0, order)?.max_eigenvalue();
        Ok(())
    })
}

/// Numerical rank of a row-major `n×n` matrix at relative threshold `tau`.
#[no_mangle]
pub unsafe extern "C" fn dbr_numerical_rank(
    data: *const DbrComplex,
    n: usize,
    tau: f64,
    rank: *mut usize,
) -> DbrStatus {
    guard(|| {
        let m = read_matrix(data, n)?;
        *out(rank, "rank")? = numerical_rank(&m, tau);
        Ok(())
    })
}

/// Recovers atoms from a row-major `n×n` moment matrix. `atoms = 0` picks the
/// count automatically. `residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn dbr_recover_atoms(
    data: *const DbrComplex,
    n: usize,
    atoms: usize,
    result: *mut *mut DbrMeasure,
    residual: *mut f64,
) -> DbrStatus {
    guard(|| {
        let result = out(result, "result")?;
        let m = read_matrix(data, n)?;
        let count = if atoms == 0 { AtomCount::Auto } else { AtomCount::Exact(atoms) };
        let rec = recover_atoms(&m, count)?;
        if let Some(r) = residual.as_mut() {
            *r = rec.residual;
        }
        *result = Box::into_raw(Box::new(DbrMeasure(rec.measure)));
        Ok(())
    })
}
