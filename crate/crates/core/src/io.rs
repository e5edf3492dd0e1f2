//! File formats: measure, symbol, pair and synthesis-input JSON, recovery
//! output, and the row-major `re,im` CSV used for Gram and moment matrices.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::debranges::{MoebiusSymbol, PythagoreanPair};
use crate::dirichlet::PointMassMeasure;
use crate::error::{Error, Result};
use crate::moments::RecoveryResult;
use crate::synthesis::SynthesisInput;
use crate::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub re: f64,
    pub im: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
}

impl From<&PointMassMeasure> for MeasureJson {
    fn from(mu: &PointMassMeasure) -> Self {
        let atoms = mu
            .atoms()
            .iter()
            .map(|a| {
                let z = a.location.value();
                AtomJson { re: z.re, im: z.im, weight: a.weight }
            })
            .collect();
        Self { atoms }
    }
}

impl TryFrom<MeasureJson> for PointMassMeasure {
    type Error = Error;

    fn try_from(m: MeasureJson) -> Result<Self> {
        PointMassMeasure::from_pairs(m.atoms.into_iter().map(|a| (Complex64::new(a.re, a.im), a.weight)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolJson {
    pub c: ComplexJson,
    pub gamma: ComplexJson,
    pub beta: ComplexJson,
}

impl From<&MoebiusSymbol> for SymbolJson {
    fn from(b: &MoebiusSymbol) -> Self {
        Self { c: b.c.into(), gamma: b.gamma.into(), beta: b.beta.into() }
    }
}

impl SymbolJson {
    /// Raw coefficients, without validity checks.
    pub fn raw(&self) -> MoebiusSymbol {
        MoebiusSymbol { c: self.c.into(), gamma: self.gamma.into(), beta: self.beta.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    pub rho: f64,
    pub sigma: ComplexJson,
}

impl From<&PythagoreanPair> for PairJson {
    fn from(p: &PythagoreanPair) -> Self {
        Self { rho: p.rho, sigma: p.sigma.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisInputJson {
    pub alpha: ComplexJson,
    pub lambda: ComplexJson,
}

impl TryFrom<SynthesisInputJson> for SynthesisInput {
    type Error = Error;

    fn try_from(s: SynthesisInputJson) -> Result<Self> {
        SynthesisInput::new(s.alpha.into(), s.lambda.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryJson {
    pub atoms: Vec<AtomJson>,
    pub residual: f64,
    pub condition: f64,
}

impl From<&RecoveryResult> for RecoveryJson {
    fn from(r: &RecoveryResult) -> Self {
        Self {
            atoms: MeasureJson::from(&r.measure).atoms,
            residual: r.residual,
            condition: r.condition,
        }
    }
}

pub fn read_measure(text: &str) -> Result<PointMassMeasure> {
    serde_json::from_str::<MeasureJson>(text)?.try_into()
}

pub fn measure_to_json(mu: &PointMassMeasure) -> String {
    serde_json::to_string(&MeasureJson::from(mu)).expect("measure serializes")
}

pub fn read_symbol(text: &str) -> Result<MoebiusSymbol> {
    Ok(serde_json::from_str::<SymbolJson>(text)?.raw())
}

/// Row-major CSV with each cell written as two columns `re,im`.
pub fn matrix_to_csv(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|s| {
                let z = m[(r, s)];
                format!("{},{}", fmt_f64(z.re), fmt_f64(z.im))
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<ComplexMatrix> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {t:?}", ln + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "line {}: odd number of columns, expected re,im pairs",
                ln + 1
            )));
        }
        rows.push(vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(n, m, |r, s| rows[r][s]))
}

/// Shortest decimal that round-trips.
pub fn fmt_f64(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

/// Parses `"re"`, `"re+imi"`, `"re-imi"` or `"imi"`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |txt: &str| -> Result<f64> {
        match txt {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => txt.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}
