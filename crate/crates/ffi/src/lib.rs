//! C ABI over `mcc_infer`.
//!
//! Every fallible function returns an [`MccStatus`]. On anything other than
//! `MCC_STATUS_OK` a message is kept per thread and can be read with
//! [`mcc_last_error_message`]. Handles are opaque and must be released with
//! their `_free` function; passing NULL to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mcc_infer::scenario::paired_scenario_with;
use mcc_infer::sim::{CoverageReport, SimConfig};
use mcc_infer::sweep::{run_sweep, SweepConfig, SweepRow};
use mcc_infer::{
    ci_paired, ci_single, phi, psi, run_coverage, single_scenario, ClassifierSummary,
    ConfidenceInterval, CountsTable4, CountsTable8, Error, Method, NaReason, ProbVec4, ProbVec8,
    Scenario,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MccStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    InvalidArgument = 2,
    /// The MCC (or its variance) is undefined for the given table.
    Undefined = 3,
    /// No probability table satisfies the requested scenario.
    Infeasible = 4,
    /// Index past the end of a handle's rows.
    OutOfRange = 5,
    /// A caller-supplied buffer is too small.
    BufferTooSmall = 6,
    /// Internal panic; the handle arguments are left untouched.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MccMethod {
    SimpleSingle = 0,
    FisherZ = 1,
    FisherZNaive = 2,
    SimplePaired = 3,
    Zou = 4,
    Mt = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MccNa {
    None = 0,
    UndefinedMcc = 1,
    TransformBoundary = 2,
}

/// Interval limits are NaN when `na` is not `MCC_NA_NONE`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MccInterval {
    pub method: MccMethod,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub na: MccNa,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MccSummary {
    pub sensitivity: f64,
    pub specificity: f64,
    pub prevalence: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MccMethodCoverage {
    pub method: MccMethod,
    pub coverage: f64,
    pub mc_stderr: f64,
    pub hits: u64,
    pub evaluated: u64,
    pub na_undefined: u64,
    pub na_boundary: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MccSweepRow {
    pub p001: f64,
    pub p110: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub feasible: bool,
    pub na: bool,
}

pub struct MccScenario(Scenario);

pub struct MccCoverageReport(CoverageReport);

pub struct MccSweep(Vec<SweepRow>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(MccStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::MarginZero(_) | Error::PairedMarginZero { .. } | Error::ZeroVariance(_) => {
                MccStatus::Undefined
            }
            Error::NoSolution { .. } | Error::Infeasible { .. } => MccStatus::Infeasible,
            _ => MccStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MccStatus::NullPointer, format!("`{what}` is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MccStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MccStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MccStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

impl From<MccMethod> for Method {
    fn from(m: MccMethod) -> Self {
        match m {
            MccMethod::SimpleSingle => Method::SimpleSingle,
            MccMethod::FisherZ => Method::FisherZ,
            MccMethod::FisherZNaive => Method::FisherZNaive,
            MccMethod::SimplePaired => Method::SimplePaired,
            MccMethod::Zou => Method::Zou,
            MccMethod::Mt => Method::Mt,
        }
    }
}

impl From<Method> for MccMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::SimpleSingle => MccMethod::SimpleSingle,
            Method::FisherZ => MccMethod::FisherZ,
            Method::FisherZNaive => MccMethod::FisherZNaive,
            Method::SimplePaired => MccMethod::SimplePaired,
            Method::Zou => MccMethod::Zou,
            Method::Mt => MccMethod::Mt,
        }
    }
}

/// Reject out-of-range discriminants before they become a Rust enum.
fn method_from_raw(raw: i32) -> Result<MccMethod, Failure> {
    Ok(match raw {
        0 => MccMethod::SimpleSingle,
        1 => MccMethod::FisherZ,
        2 => MccMethod::FisherZNaive,
        3 => MccMethod::SimplePaired,
        4 => MccMethod::Zou,
        5 => MccMethod::Mt,
        _ => {
            return Err(Failure(
                MccStatus::InvalidArgument,
                format!("unknown method code {raw}"),
            ))
        }
    })
}

impl From<&ConfidenceInterval> for MccInterval {
    fn from(ci: &ConfidenceInterval) -> Self {
        Self {
            method: ci.method.into(),
            estimate: ci.estimate,
            lower: ci.lower,
            upper: ci.upper,
            level: ci.level,
            na: match ci.na {
                None => MccNa::None,
                Some(NaReason::UndefinedMcc) => MccNa::UndefinedMcc,
                Some(NaReason::TransformBoundary) => MccNa::TransformBoundary,
            },
        }
    }
}

impl From<MccSummary> for ClassifierSummary {
    fn from(s: MccSummary) -> Self {
        ClassifierSummary {
            sensitivity: s.sensitivity,
            specificity: s.specificity,
            prevalence: s.prevalence,
        }
    }
}

/// Message for the most recent failure on this thread, or NULL after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mcc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn mcc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// MCC of a probability table `(p11, p10, p01, p00)`.
///
/// # Safety
/// `p` must point to 4 doubles and `out_value` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn mcc_phi(p: *const f64, out_value: *mut f64) -> MccStatus {
    guard(|| {
        let p = deref(p.cast::<[f64; 4]>(), "p")?;
        let o = out(out_value, "out_value")?;
        *o = phi(&ProbVec4::from_array(*p)?)?;
        Ok(())
    })
}

/// Difference MCC1 - MCC2 of an 8-cell joint table
/// `(p111, p110, p101, p100, p011, p010, p001, p000)`.
///
/// # Safety
/// `p` must point to 8 doubles and `out_value` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn mcc_psi(p: *const f64, out_value: *mut f64) -> MccStatus {
    guard(|| {
        let p = deref(p.cast::<[f64; 8]>(), "p")?;
        let o = out(out_value, "out_value")?;
        *o = psi(&ProbVec8::from_array(*p)?)?;
        Ok(())
    })
}

/// Interval for one MCC from counts `(TP, FP, FN, TN)`. An NA interval is
/// still `MCC_STATUS_OK`; inspect `out_interval->na`. `method` is an
/// `MccMethod` value from the single family.
///
/// # Safety
/// `counts` must point to 4 integers and `out_interval` to a writable `MccInterval`.
#[no_mangle]
pub unsafe extern "C" fn mcc_ci_single(
    counts: *const u64,
    level: f64,
    method: i32,
    out_interval: *mut MccInterval,
) -> MccStatus {
    guard(|| {
        let c = deref(counts.cast::<[u64; 4]>(), "counts")?;
        let o = out(out_interval, "out_interval")?;
        let m = method_from_raw(method)?;
        *o = (&ci_single(&CountsTable4::from_array(*c), level, m.into())?).into();
        Ok(())
    })
}

/// Interval for MCC1 - MCC2 from the 8 paired counts in cell order
/// `(n111, n110, n101, n100, n011, n010, n001, n000)`; the digits are
/// (classifier 1, classifier 2, truth). `method` is a paired `MccMethod`.
///
/// # Safety
/// `counts` must point to 8 integers and `out_interval` to a writable `MccInterval`.
#[no_mangle]
pub unsafe extern "C" fn mcc_ci_paired(
    counts: *const u64,
    level: f64,
    method: i32,
    out_interval: *mut MccInterval,
) -> MccStatus {
    guard(|| {
        let c = deref(counts.cast::<[u64; 8]>(), "counts")?;
        let o = out(out_interval, "out_interval")?;
        let m = method_from_raw(method)?;
        *o = (&ci_paired(&CountsTable8(*c), level, m.into())?).into();
        Ok(())
    })
}

fn boxed<T>(v: T, dst: &mut *mut T) {
    *dst = Box::into_raw(Box::new(v));
}

/// # Safety
/// The out-parameter must be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn mcc_scenario_single_new(
    prevalence: f64,
    mcc: f64,
    out_scenario: *mut *mut MccScenario,
) -> MccStatus {
    guard(|| {
        let o = out(out_scenario, "out_scenario")?;
        boxed(
            MccScenario(Scenario::Single(single_scenario(prevalence, mcc)?)),
            o,
        );
        Ok(())
    })
}

/// Paired scenario with fixed joint cells `p001` and `p110`.
///
/// # Safety
/// The out-parameter must be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn mcc_scenario_paired_new(
    prevalence: f64,
    mcc1: f64,
    mcc2: f64,
    p001: f64,
    p110: f64,
    out_scenario: *mut *mut MccScenario,
) -> MccStatus {
    guard(|| {
        let o = out(out_scenario, "out_scenario")?;
        let s = paired_scenario_with(prevalence, mcc1, mcc2, p001, p110)?;
        boxed(MccScenario(Scenario::Paired(s)), o);
        Ok(())
    })
}

/// Parse the key-value scenario format written by `mcc-infer scenario`.
///
/// # Safety
/// `text` must be a NUL-terminated string; the out-parameter a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn mcc_scenario_parse(
    text: *const c_char,
    out_scenario: *mut *mut MccScenario,
) -> MccStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let o = out(out_scenario, "out_scenario")?;
        let s = CStr::from_ptr(text).to_str().map_err(|e| {
            Failure(
                MccStatus::InvalidArgument,
                format!("text is not UTF-8: {e}"),
            )
        })?;
        boxed(MccScenario(Scenario::from_kv(s)?), o);
        Ok(())
    })
}

/// Copies the scenario's probability cells (4 or 8) into `buf`.
/// `out_len` receives the number of cells even when `buf` is too small.
///
/// # Safety
/// `buf` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn mcc_scenario_cells(
    scenario: *const MccScenario,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> MccStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let cells = s.0.cells();
        if let Some(l) = out_len.as_mut() {
            *l = cells.len();
        }
        if cap < cells.len() {
            return Err(Failure(
                MccStatus::BufferTooSmall,
                format!("need {} cells, buffer holds {cap}", cells.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(cells.as_ptr(), buf, cells.len());
        Ok(())
    })
}

/// True parameter: the MCC, or MCC1 - MCC2 for paired scenarios.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mcc_scenario_true_value(
    scenario: *const MccScenario,
    out_value: *mut f64,
) -> MccStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        *out(out_value, "out_value")? = s.0.true_value();
        Ok(())
    })
}

/// # Safety
/// `scenario` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcc_scenario_is_paired(scenario: *const MccScenario) -> bool {
    scenario.as_ref().is_some_and(|s| s.0.is_paired())
}

/// # Safety
/// `scenario` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcc_scenario_free(scenario: *mut MccScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Monte Carlo coverage with every method of the scenario's family.
/// `workers == 0` uses one thread per core; results do not depend on it.
///
/// # Safety
/// `scenario` must be a live handle; the out-parameter a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn mcc_coverage_run(
    scenario: *const MccScenario,
    n: u64,
    m: u64,
    level: f64,
    seed: u64,
    workers: usize,
    out_report: *mut *mut MccCoverageReport,
) -> MccStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let o = out(out_report, "out_report")?;
        let mut cfg = SimConfig::new(s.0, n, m, seed);
        cfg.level = level;
        cfg.workers = workers;
        boxed(MccCoverageReport(run_coverage(&cfg)?), o);
        Ok(())
    })
}

/// Number of methods in the report; 0 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mcc_coverage_len(report: *const MccCoverageReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.methods.len())
}

/// # Safety
/// `report` must be a live handle; `out_row` writable.
#[no_mangle]
pub unsafe extern "C" fn mcc_coverage_get(
    report: *const MccCoverageReport,
    index: usize,
    out_row: *mut MccMethodCoverage,
) -> MccStatus {
    guard(|| {
        let r = deref(report, "report")?;
        let o = out(out_row, "out_row")?;
        let c = r.0.methods.get(index).ok_or_else(|| {
            Failure(
                MccStatus::OutOfRange,
                format!("index {index} >= {}", r.0.methods.len()),
            )
        })?;
        *o = MccMethodCoverage {
            method: c.method.into(),
            coverage: c.coverage,
            mc_stderr: c.mc_stderr,
            hits: c.tally.hits,
            evaluated: c.tally.evaluated,
            na_undefined: c.tally.na_undefined,
            na_boundary: c.tally.na_boundary,
        };
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcc_coverage_free(report: *mut MccCoverageReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Sweep `(p001, p110)` over the admissible box of two published summaries.
///
/// # Safety
/// Summary pointers must be valid; the out-parameter a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn mcc_sweep_run(
    a: *const MccSummary,
    b: *const MccSummary,
    n: u64,
    level: f64,
    p001_step: f64,
    p110_step: f64,
    method: i32,
    out_sweep: *mut *mut MccSweep,
) -> MccStatus {
    guard(|| {
        let a = *deref(a, "a")?;
        let b = *deref(b, "b")?;
        let o = out(out_sweep, "out_sweep")?;
        let mut cfg = SweepConfig::new(a.into(), b.into(), n);
        cfg.level = level;
        cfg.p001_step = p001_step;
        cfg.p110_step = p110_step;
        cfg.method = method_from_raw(method)?.into();
        boxed(MccSweep(run_sweep(&cfg)?), o);
        Ok(())
    })
}

/// # Safety
/// `sweep` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mcc_sweep_len(sweep: *const MccSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `sweep` must be a live handle; `out_row` writable.
#[no_mangle]
pub unsafe extern "C" fn mcc_sweep_get(
    sweep: *const MccSweep,
    index: usize,
    out_row: *mut MccSweepRow,
) -> MccStatus {
    guard(|| {
        let s = deref(sweep, "sweep")?;
        let o = out(out_row, "out_row")?;
        let r = s.0.get(index).ok_or_else(|| {
            Failure(
                MccStatus::OutOfRange,
                format!("index {index} >= {}", s.0.len()),
            )
        })?;
        *o = MccSweepRow {
            p001: r.p001,
            p110: r.p110,
            estimate: r.estimate,
            lower: r.lower,
            upper: r.upper,
            feasible: r.feasible,
            na: r.na,
        };
        Ok(())
    })
}

/// # Safety
/// `sweep` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcc_sweep_free(sweep: *mut MccSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}
