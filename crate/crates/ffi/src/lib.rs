//! C ABI over `pfrmt-core`.
//!
//! Every fallible call returns a [`PfrmtStatus`]; on failure the message is
//! kept per thread and read back with [`pfrmt_last_error_message`]. Handles
//! are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use pfrmt_core::cli::compute::{cmd_compute, pfaffian_path};
use pfrmt_core::cli::config::RunConfig;
use pfrmt_core::ensembles::{Ensemble, EnsembleId};
use pfrmt_core::kernels::{EvalOptions, KernelSet, Parity, Regime};
use pfrmt_core::oracle::{z_eigenvalue_quadrature, QuadratureSpec};
use pfrmt_core::skew_linalg::{pfaffian, SkewMatrix, SpectralParams};
use pfrmt_core::{PfrmtError, Precision};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfrmtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Dimension = 4,
    Numeric = 5,
    SingularMatrix = 6,
    DegenerateShift = 7,
    UnsupportedReduction = 8,
    DivergentMoment = 9,
    OnSupport = 10,
    Regime = 11,
    Breakdown = 12,
    Budget = 13,
    UnsupportedOracle = 14,
    Io = 15,
    Panic = 99,
}

impl From<&PfrmtError> for PfrmtStatus {
    fn from(e: &PfrmtError) -> Self {
        match e {
            PfrmtError::Dimension(_) => PfrmtStatus::Dimension,
            PfrmtError::Numeric(_) => PfrmtStatus::Numeric,
            PfrmtError::SingularMatrix { .. } => PfrmtStatus::SingularMatrix,
            PfrmtError::DegenerateShift(_) => PfrmtStatus::DegenerateShift,
            PfrmtError::UnsupportedReduction(_) => PfrmtStatus::UnsupportedReduction,
            PfrmtError::DivergentMoment(_) => PfrmtStatus::DivergentMoment,
            PfrmtError::OnSupport(_) => PfrmtStatus::OnSupport,
            PfrmtError::Regime(_) => PfrmtStatus::Regime,
            PfrmtError::Breakdown { .. } => PfrmtStatus::Breakdown,
            PfrmtError::Budget { .. } => PfrmtStatus::Budget,
            PfrmtError::UnsupportedOracle(_) => PfrmtStatus::UnsupportedOracle,
            PfrmtError::Config { .. } => PfrmtStatus::Config,
            PfrmtError::Io(_) => PfrmtStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PfrmtComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for PfrmtComplex {
    fn from(z: Complex64) -> Self {
        PfrmtComplex { re: z.re, im: z.im }
    }
}

impl From<PfrmtComplex> for Complex64 {
    fn from(z: PfrmtComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// `regime`: 0 even-sum, 1 odd-sum, 2 sparse.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PfrmtZResult {
    pub value: PfrmtComplex,
    pub regime: i32,
    pub d: i64,
}

/// 0 = K11, 1 = K12, 2 = K22.
pub type PfrmtKernelKind = i32;

/// Opaque ensemble handle.
pub struct PfrmtEnsemble(Ensemble);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Status(PfrmtStatus, String),
    Core(PfrmtError),
}

impl From<PfrmtError> for Fail {
    fn from(e: PfrmtError) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PfrmtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PfrmtStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            set_error(format!("{}: {e}", e.kind()));
            PfrmtStatus::from(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PfrmtStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(PfrmtStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail::Status(PfrmtStatus::InvalidArgument, msg.into())
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn precision_of(p: i32) -> Result<Precision, Fail> {
    match p {
        0 => Ok(Precision::Double),
        1 => Ok(Precision::Extended),
        _ => Err(invalid(format!("precision must be 0 (double) or 1 (extended), got {p}"))),
    }
}

unsafe fn params(
    kappa1: *const PfrmtComplex,
    k1: usize,
    kappa2: *const PfrmtComplex,
    k2: usize,
) -> Result<SpectralParams, Fail> {
    let a = slice(kappa1, k1, "kappa1")?.iter().map(|&z| z.into()).collect();
    let b = slice(kappa2, k2, "kappa2")?.iter().map(|&z| z.into()).collect();
    Ok(SpectralParams::new(a, b)?)
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pfrmt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pfrmt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an ensemble by id (`"gauss-beta1"`, `"gauss-beta4"`,
/// `"laguerre-beta1"`, `"laguerre-beta4"`); `nu` is ignored for gauss.
///
/// # Safety
/// `id` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pfrmt_ensemble_new(id: *const c_char, nu: u32, out: *mut *mut PfrmtEnsemble) -> PfrmtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let s = c_str(id, "id")?;
        let id: EnsembleId = s.parse().map_err(|_| invalid(format!("unknown ensemble {s:?}")))?;
        let e = Ensemble::new(id, nu)?;
        *out = Box::into_raw(Box::new(PfrmtEnsemble(e)));
        Ok(())
    })
}

/// # Safety
/// `e` must come from [`pfrmt_ensemble_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pfrmt_ensemble_free(e: *mut PfrmtEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// 1 or 4, or 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfrmt_ensemble_beta(e: *const PfrmtEnsemble) -> u8 {
    e.as_ref().map_or(0, |e| e.0.beta())
}

/// Unnormalized ordered-eigenvalue average by the Pfaffian formulas; `n` is
/// the matrix dimension (β=1) or quaternion dimension (β=4).
///
/// # Safety
/// Arrays must hold `k1` / `k2` entries; `e` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pfrmt_z(
    e: *const PfrmtEnsemble,
    n: usize,
    kappa1: *const PfrmtComplex,
    k1: usize,
    kappa2: *const PfrmtComplex,
    k2: usize,
    precision: i32,
    out: *mut PfrmtZResult,
) -> PfrmtStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("ensemble"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = params(kappa1, k1, kappa2, k2)?;
        let r = pfaffian_path(&e.0, n, &p, &EvalOptions::with_precision(precision_of(precision)?))?;
        *out = PfrmtZResult {
            value: r.value.into(),
            regime: match r.regime {
                Regime::EvenSum => 0,
                Regime::OddSum => 1,
                Regime::Sparse => 2,
            },
            d: r.d,
        };
        Ok(())
    })
}

/// Quadrature oracle for the same integral as [`pfrmt_z`]; `error` receives
/// the node-halving error estimate and may be null.
///
/// # Safety
/// As for [`pfrmt_z`].
#[no_mangle]
pub unsafe extern "C" fn pfrmt_oracle_quadrature(
    e: *const PfrmtEnsemble,
    n: usize,
    kappa1: *const PfrmtComplex,
    k1: usize,
    kappa2: *const PfrmtComplex,
    k2: usize,
    nodes_per_dim: usize,
    value: *mut PfrmtComplex,
    error: *mut f64,
) -> PfrmtStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("ensemble"))?;
        let value = value.as_mut().ok_or_else(|| null("value"))?;
        let p = params(kappa1, k1, kappa2, k2)?;
        let r = z_eigenvalue_quadrature(&e.0, n, &p, &QuadratureSpec { nodes_per_dim, ..Default::default() })?;
        *value = r.value.into();
        if let Some(err) = error.as_mut() {
            *err = r.error;
        }
        Ok(())
    })
}

/// Pfaffian of a `dim × dim` antisymmetric matrix given row-major.
///
/// # Safety
/// `a` must hold `dim * dim` entries.
#[no_mangle]
pub unsafe extern "C" fn pfrmt_pfaffian(a: *const PfrmtComplex, dim: usize, out: *mut PfrmtComplex) -> PfrmtStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let n2 = dim.checked_mul(dim).ok_or_else(|| invalid("dimension overflow"))?;
        let a = slice(a, n2, "matrix")?;
        let rows: Vec<Vec<Complex64>> = a.chunks(dim.max(1)).take(dim).map(|r| r.iter().map(|&z| z.into()).collect()).collect();
        let m = SkewMatrix::from_rows(&rows, 1e-12)?;
        *out = pfaffian(&m)?.into();
        Ok(())
    })
}

/// Evaluates `count` kernel values `K(xs[i], ys[i])` for the kernel set of an
/// `n`-dimensional matrix average (moment block `d = n` for β=1, `2n` for β=4).
///
/// # Safety
/// `xs`, `ys` and `out` must hold `count` entries.
#[no_mangle]
pub unsafe extern "C" fn pfrmt_kernel_eval(
    e: *const PfrmtEnsemble,
    n: usize,
    kind: PfrmtKernelKind,
    xs: *const PfrmtComplex,
    ys: *const PfrmtComplex,
    count: usize,
    out: *mut PfrmtComplex,
) -> PfrmtStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("ensemble"))?;
        let xs = slice(xs, count, "xs")?;
        let ys = slice(ys, count, "ys")?;
        if count > 0 && out.is_null() {
            return Err(null("out"));
        }
        if !(0..=2).contains(&kind) {
            return Err(invalid(format!("kernel kind must be 0, 1 or 2, got {kind}")));
        }
        let (d, parity) = if e.0.beta() == 1 { (n, Parity::of_vars(n)) } else { (2 * n, Parity::Even) };
        let ks = KernelSet::new(&e.0, d, parity, Precision::Double)?;
        for i in 0..count {
            let (x, y) = (xs[i].into(), ys[i].into());
            let k = match kind {
                0 => ks.k11(x, y),
                1 => ks.k12(x, y)?,
                _ => ks.k22(x, y)?,
            };
            *out.add(i) = k.into();
        }
        Ok(())
    })
}

/// Runs a `compute` configuration given as JSON and returns the result
/// document; free it with [`pfrmt_string_free`].
///
/// # Safety
/// `config_json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pfrmt_compute_json(config_json: *const c_char, out: *mut *mut c_char) -> PfrmtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = RunConfig::from_json(c_str(config_json, "config_json")?)?;
        let r = cmd_compute(&cfg)?;
        *out = CString::new(r.to_json()).expect("JSON has no nul").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pfrmt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
