//! The `dbr` command-line driver.
//!
//! Every subcommand writes JSON (and CSV where noted) and exits 0 only if all
//! emitted certificates pass. Exit status 1 means a certificate failed, 2 an
//! input or precondition error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::debranges::{hb_cauchy_norm, hb_norm_sqr, pythagorean_mate, PythagoreanPair};
use crate::dirichlet::{dmu_cauchy_norm, dmu_gram, local_dirichlet, moment_matrix, PointMassMeasure};
use crate::error::{Error, Result};
use crate::hardy::ComplexPoly;
use crate::io::{self, PairJson, RecoveryJson, SymbolJson};
use crate::moments::{measure_distance, recover_atoms, AtomCount};
use crate::operator::{
    certify_nsd, defect_matrix, hyperexpansive_form, numerical_rank, scaled_nsd_tolerance, Certificate,
};
use crate::synthesis::{synthesize_pair, synthesize_symbol, verify_norm_equality, SynthesisInput};
use crate::{hb_gram, max_abs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Default tolerance table, overridable with `--tol key=value`.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("equality", 1e-9),
        ("kernel", 1e-8),
        ("mate", 1e-12),
        ("moment", 1e-12),
        ("nsd", 1e-10),
        ("rank", 1e-8),
        ("recovery", 1e-8),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[derive(Debug, Parser)]
#[command(name = "dbr", version, about = "Dirichlet-type and de Branges-Rovnyak space verifier")]
struct Cli {
    /// Override a tolerance, e.g. `--tol equality=1e-10` (repeatable).
    #[arg(long = "tol", value_name = "KEY=VALUE", global = true)]
    tol: Vec<String>,

    /// Write the JSON result here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pythagorean mate of a symbol file, with the |a|²+|b|²=1 check.
    Mate {
        symbol: PathBuf,
    },
    /// Symbol b(z) = A z/(1 - B z) for the measure |α|²δ_λ.
    Synthesize {
        #[command(flatten)]
        atom: AtomArgs,
    },
    /// Compare the D(μ) and H(b) monomial Grams for a single-atom measure.
    VerifyEquality {
        #[arg(long, conflicts_with_all = ["alpha", "lambda"])]
        measure: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(short = 'N', long = "size", default_value_t = 24)]
        size: usize,
        /// Directory receiving dmu_gram.csv and hb_gram.csv.
        #[arg(long, default_value = ".")]
        gram_dir: PathBuf,
    },
    /// Hyperexpansivity, defect-rank and moment-identity certificates for D(μ).
    Certify {
        measure: PathBuf,
        #[arg(short = 'N', long = "size", default_value_t = 24)]
        size: usize,
        #[arg(long, default_value_t = 5)]
        n_max: usize,
    },
    /// Recover atoms from a moment CSV or from a measure's D(μ) defect.
    Recover {
        #[arg(long, conflicts_with = "measure", required_unless_present = "measure")]
        moments: Option<PathBuf>,
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Number of atoms, or `auto`.
        #[arg(long, default_value = "auto")]
        atoms: String,
        #[arg(short = 'N', long = "size", default_value_t = 24)]
        size: usize,
    },
    /// Closed-form Cauchy-kernel norms against truncated-kernel sums.
    KernelNorms {
        #[command(flatten)]
        atom: AtomArgs,
        /// Kernel point (repeatable); defaults to 10 fixed points with |w| <= 0.8.
        #[arg(long = "w", allow_hyphen_values = true)]
        points: Vec<String>,
        #[arg(long, default_value_t = 300)]
        degree: usize,
    },
}

#[derive(Debug, Args)]
struct AtomArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
}

impl AtomArgs {
    fn input(&self) -> Result<SynthesisInput> {
        SynthesisInput::new(io::parse_complex(&self.alpha)?, io::parse_complex(&self.lambda)?)
    }
}

struct Outcome {
    body: Value,
    pass: bool,
}

impl Outcome {
    fn ok(body: Value) -> Self {
        Self { body, pass: true }
    }

    fn from_certs(body: Value, certs: &[Certificate]) -> Self {
        Self { body, pass: certs.iter().all(|c| c.pass) }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
            } else {
                let _ = write!(stdout, "{e}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.body).expect("JSON output serializes");
            let written = match &cli.out {
                Some(path) => fs::write(path, format!("{text}\n")).map_err(Error::from),
                None => writeln!(stdout, "{text}").map_err(Error::from),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_ERROR;
            }
            if outcome.pass {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn tolerances(overrides: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut table = default_tolerances();
    for item in overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("--tol expects key=value, got {item:?}")))?;
        let key = k.trim();
        if !table.contains_key(key) {
            let known: Vec<&str> = table.keys().map(String::as_str).collect();
            return Err(Error::Parse(format!(
                "unknown tolerance {key:?}; known keys: {}",
                known.join(", ")
            )));
        }
        let val: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("tolerance {key} has non-numeric value {v:?}")))?;
        if !(val > 0.0 && val.is_finite()) {
            return Err(Error::Parse(format!("tolerance {key} must be positive")));
        }
        table.insert(key.to_string(), val);
    }
    Ok(table)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = tolerances(&cli.tol)?;
    match &cli.command {
        Command::Mate { symbol } => cmd_mate(symbol, &tol),
        Command::Synthesize { atom } => cmd_synthesize(&atom.input()?),
        Command::VerifyEquality { measure, alpha, lambda, size, gram_dir } => {
            let input = match (measure, alpha, lambda) {
                (Some(path), _, _) => single_atom_input(&io::read_measure(&read(path)?)?)?,
                (None, Some(a), Some(l)) => {
                    SynthesisInput::new(io::parse_complex(a)?, io::parse_complex(l)?)?
                }
                _ => {
                    return Err(Error::Precondition(
                        "verify-equality needs --measure or both --alpha and --lambda".into(),
                    ))
                }
            };
            cmd_verify_equality(&input, *size, gram_dir, &tol)
        }
        Command::Certify { measure, size, n_max } => {
            cmd_certify(&io::read_measure(&read(measure)?)?, *size, *n_max, &tol)
        }
        Command::Recover { moments, measure, atoms, size } => {
            let count: AtomCount = atoms.parse()?;
            match (moments, measure) {
                (Some(path), _) => cmd_recover_matrix(&io::matrix_from_csv(&read(path)?)?, count),
                (None, Some(path)) => {
                    cmd_recover_measure(&io::read_measure(&read(path)?)?, *size, count, &tol)
                }
                (None, None) => Err(Error::Precondition("recover needs --moments or --measure".into())),
            }
        }
        Command::KernelNorms { atom, points, degree } => {
            let pts = if points.is_empty() {
                default_kernel_points()
            } else {
                points.iter().map(|p| io::parse_complex(p)).collect::<Result<Vec<_>>>()?
            };
            cmd_kernel_norms(&atom.input()?, &pts, *degree, &tol)
        }
    }
}

/// `|α|²δ_λ` → `(α = √weight, λ)`; anything but one atom (or none) is rejected.
fn single_atom_input(mu: &PointMassMeasure) -> Result<SynthesisInput> {
    match mu.atoms() {
        [] => SynthesisInput::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        [a] => Ok(SynthesisInput {
            alpha: Complex64::new(a.weight.sqrt(), 0.0),
            lambda: a.location,
        }),
        atoms => Err(Error::Precondition(format!(
            "equality of norms needs a single-atom measure, got {} atoms: the shift on H(b) has a \
             rank-one defect, so only one atom can match",
            atoms.len()
        ))),
    }
}

fn cmd_mate(path: &Path, tol: &BTreeMap<String, f64>) -> Result<Outcome> {
    let b = io::read_symbol(&read(path)?)?;
    let pair = pythagorean_mate(&b)?;
    let dev = pair.unit_circle_deviation(64);
    let cert = Certificate::upper_bound("mate-unit-circle", dev, tol["mate"])
        .with("roots_of_unity", 64)
        .with("rho_ge_abs_sigma", pair.rho >= pair.sigma.norm());
    let pj = PairJson::from(&pair);
    let body = json!({ "rho": pj.rho, "sigma": pj.sigma, "certificate": cert });
    Ok(Outcome::from_certs(body, &[cert]))
}

fn cmd_synthesize(input: &SynthesisInput) -> Result<Outcome> {
    let sym = synthesize_symbol(input).symbol();
    Ok(Outcome::ok(serde_json::to_value(SymbolJson::from(&sym))?))
}

fn cmd_verify_equality(
    input: &SynthesisInput,
    n: usize,
    gram_dir: &Path,
    tol: &BTreeMap<String, f64>,
) -> Result<Outcome> {
    let cert = verify_norm_equality(input, n, tol["equality"])?;
    let gd = dmu_gram(&input.measure()?, n)?;
    let gb = hb_gram(&synthesize_pair(input)?, n)?;
    fs::create_dir_all(gram_dir)?;
    let dpath = gram_dir.join("dmu_gram.csv");
    let bpath = gram_dir.join("hb_gram.csv");
    fs::write(&dpath, io::matrix_to_csv(&gd.entries))?;
    fs::write(&bpath, io::matrix_to_csv(&gb.entries))?;
    let body = json!({
        "certificate": cert,
        "dmu_gram": dpath.display().to_string(),
        "hb_gram": bpath.display().to_string(),
    });
    Ok(Outcome::from_certs(body, &[cert]))
}

/// NSD certificates for `B₁..B_{n_max}`, the defect rank, and the
/// defect/moment identity.
pub fn certify_measure(
    mu: &PointMassMeasure,
    n: usize,
    n_max: usize,
    tol: &BTreeMap<String, f64>,
) -> Result<Vec<Certificate>> {
    if n < 2 {
        return Err(Error::Precondition("N must be >= 2".into()));
    }
    if n_max == 0 || n_max >= n {
        return Err(Error::Precondition(format!("n_max = {n_max} must lie in 1..N-1 = 1..{}", n - 1)));
    }
    let g = dmu_gram(mu, n)?;
    let mut certs = Vec::with_capacity(n_max + 2);
    for order in 1..=n_max {
        let form = hyperexpansive_form(&g, order)?;
        let t = scaled_nsd_tolerance(&form, tol["nsd"]);
        certs.push(certify_nsd(&form, t));
    }
    let d = defect_matrix(&g)?;
    let rank = numerical_rank(&d, tol["rank"]);
    let mut rank_cert = Certificate::upper_bound("defect-rank", rank.abs_diff(mu.len()) as f64, 0.0)
        .with("rank", rank)
        .with("atoms", mu.len())
        .with("tau", tol["rank"]);
    if d.nrows() <= mu.len() {
        // Too few monomials to separate the atoms; report without judging.
        rank_cert = rank_cert.with("underdetermined", true);
        rank_cert.pass = rank == d.nrows();
    }
    certs.push(rank_cert);
    let m = moment_matrix(mu, n - 1)?;
    let dev = max_abs(&(&d - &m));
    certs.push(Certificate::upper_bound("moment-identity", dev, tol["moment"]).with("N", n));
    Ok(certs)
}

fn cmd_certify(
    mu: &PointMassMeasure,
    n: usize,
    n_max: usize,
    tol: &BTreeMap<String, f64>,
) -> Result<Outcome> {
    let certs = certify_measure(mu, n, n_max, tol)?;
    Ok(Outcome::from_certs(serde_json::to_value(&certs)?, &certs))
}

fn cmd_recover_matrix(m: &crate::ComplexMatrix, count: AtomCount) -> Result<Outcome> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "moment matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let herm = crate::hermitian_defect(m);
    if herm > 1e-10 * max_abs(m).max(1.0) {
        return Err(Error::Precondition(format!(
            "moment matrix is not Hermitian (defect {herm:e})"
        )));
    }
    let rec = recover_atoms(m, count)?;
    Ok(Outcome::ok(serde_json::to_value(RecoveryJson::from(&rec))?))
}

fn cmd_recover_measure(
    mu: &PointMassMeasure,
    n: usize,
    count: AtomCount,
    tol: &BTreeMap<String, f64>,
) -> Result<Outcome> {
    let d = defect_matrix(&dmu_gram(mu, n + 1)?)?;
    let rec = recover_atoms(&d, count)?;
    let cert = Certificate::upper_bound("roundtrip", measure_distance(mu, &rec.measure), tol["recovery"])
        .with("N", n)
        .with("atoms", mu.len());
    let mut body = serde_json::to_value(RecoveryJson::from(&rec))?;
    body["certificate"] = serde_json::to_value(&cert)?;
    Ok(Outcome::from_certs(body, &[cert]))
}

/// Ten fixed points spiralling out to `|w| = 0.8`.
pub fn default_kernel_points() -> Vec<Complex64> {
    (1..=10)
        .map(|j| Complex64::from_polar(0.08 * j as f64, 2.4 * j as f64))
        .collect()
}

/// Closed-form kernel norms against truncated-kernel sums: returns one
/// certificate for D_μ(k_w) and one for ‖k_w‖²_b, each carrying the worst
/// relative deviation over `points`.
pub fn kernel_norm_certificates(
    input: &SynthesisInput,
    points: &[Complex64],
    degree: usize,
    tol: f64,
) -> Result<Vec<Certificate>> {
    let pair: PythagoreanPair = synthesize_pair(input)?;
    let mu = input.measure()?;
    let mut worst_d = 0.0f64;
    let mut worst_b = 0.0f64;
    for &w in points {
        let k = ComplexPoly::cauchy_kernel(w, degree);
        let closed_d = dmu_cauchy_norm(input.alpha, input.lambda, w)?;
        let direct_d: f64 = mu
            .atoms()
            .iter()
            .map(|a| a.weight * local_dirichlet(&k, a.location))
            .sum();
        worst_d = worst_d.max(relative(closed_d, direct_d));
        let closed_b = hb_cauchy_norm(&pair, w)?;
        let direct_b = hb_norm_sqr(&k, &pair);
        worst_b = worst_b.max(relative(closed_b, direct_b));
    }
    Ok(vec![
        Certificate::upper_bound("kernel-dmu", worst_d, tol)
            .with("points", points.len())
            .with("degree", degree),
        Certificate::upper_bound("kernel-hb", worst_b, tol)
            .with("points", points.len())
            .with("degree", degree),
    ])
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn cmd_kernel_norms(
    input: &SynthesisInput,
    points: &[Complex64],
    degree: usize,
    tol: &BTreeMap<String, f64>,
) -> Result<Outcome> {
    if let Some(w) = points.iter().find(|w| w.norm() >= 1.0) {
        return Err(Error::Precondition(format!("kernel point {w} must satisfy |w| < 1")));
    }
    let certs = kernel_norm_certificates(input, points, degree, tol["kernel"])?;
    Ok(Outcome::from_certs(serde_json::to_value(&certs)?, &certs))
}
