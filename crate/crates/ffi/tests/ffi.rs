use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use mcc_infer::scenario::enhancer_benchmark::{BERT_CNN, ENHANCER_PRED, SAMPLE_SIZE};
use mcc_infer::sim::SimConfig;
use mcc_infer::{
    ci_paired, ci_single, paired_scenario, run_coverage, CountsTable4, CountsTable8, Method,
    Scenario,
};
use mcc_infer_ffi::*;

fn last_error() -> Option<String> {
    let p = mcc_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn summary(s: &mcc_infer::ClassifierSummary) -> MccSummary {
    MccSummary {
        sensitivity: s.sensitivity,
        specificity: s.specificity,
        prevalence: s.prevalence,
    }
}

fn blank() -> MccInterval {
    MccInterval {
        method: MccMethod::Mt,
        estimate: 0.0,
        lower: 0.0,
        upper: 0.0,
        level: 0.0,
        na: MccNa::None,
    }
}

#[test]
fn intervals_match_library() {
    let counts = [40u64, 14, 10, 36];
    for (code, m) in [
        (0, Method::SimpleSingle),
        (1, Method::FisherZ),
        (2, Method::FisherZNaive),
    ] {
        let mut ci = blank();
        assert_eq!(
            unsafe { mcc_ci_single(counts.as_ptr(), 0.9, code, &mut ci) },
            MccStatus::Ok
        );
        let want = ci_single(&CountsTable4::from_array(counts), 0.9, m).unwrap();
        assert_eq!(Method::from(ci.method), m);
        assert_eq!(
            (ci.estimate, ci.lower, ci.upper, ci.level),
            (want.estimate, want.lower, want.upper, 0.9)
        );
        assert!(last_error().is_none());
    }
    let counts = [30u64, 5, 12, 3, 8, 6, 2, 34];
    for (code, m) in [(3, Method::SimplePaired), (4, Method::Zou), (5, Method::Mt)] {
        let mut ci = blank();
        assert_eq!(
            unsafe { mcc_ci_paired(counts.as_ptr(), 0.95, code, &mut ci) },
            MccStatus::Ok
        );
        let want = ci_paired(&CountsTable8(counts), 0.95, m).unwrap();
        assert_eq!(
            (ci.estimate, ci.lower, ci.upper),
            (want.estimate, want.lower, want.upper)
        );
    }
}

#[test]
fn na_is_reported_in_the_struct() {
    let mut ci = blank();
    let counts = [0u64, 5, 0, 5];
    assert_eq!(
        unsafe { mcc_ci_single(counts.as_ptr(), 0.95, 1, &mut ci) },
        MccStatus::Ok
    );
    assert_eq!(ci.na, MccNa::UndefinedMcc);
    assert!(ci.lower.is_nan() && ci.upper.is_nan());
}

#[test]
fn error_codes_and_messages() {
    let mut ci = blank();
    let c4 = [1u64, 2, 3, 4];
    assert_eq!(
        unsafe { mcc_ci_single(ptr::null(), 0.95, 0, &mut ci) },
        MccStatus::NullPointer
    );
    assert!(last_error().unwrap().contains("counts"));
    assert_eq!(
        unsafe { mcc_ci_single(c4.as_ptr(), 0.95, 0, ptr::null_mut()) },
        MccStatus::NullPointer
    );
    assert_eq!(
        unsafe { mcc_ci_single(c4.as_ptr(), 1.5, 0, &mut ci) },
        MccStatus::InvalidArgument
    );
    assert!(last_error().unwrap().contains("level"));
    assert_eq!(
        unsafe { mcc_ci_single(c4.as_ptr(), 0.95, 17, &mut ci) },
        MccStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { mcc_ci_single(c4.as_ptr(), 0.95, 5, &mut ci) },
        MccStatus::InvalidArgument
    );
    let tiny = [1u64, 0, 0, 1];
    assert_eq!(
        unsafe { mcc_ci_single(tiny.as_ptr(), 0.95, 2, &mut ci) },
        MccStatus::InvalidArgument
    );

    let mut v = 0.0;
    let p = [0.5, 0.5, 0.0, 0.0];
    assert_eq!(unsafe { mcc_phi(p.as_ptr(), &mut v) }, MccStatus::Undefined);
    let p = [0.4, 0.1, 0.1, 0.4];
    assert_eq!(unsafe { mcc_phi(p.as_ptr(), &mut v) }, MccStatus::Ok);
    assert!((v - 0.6).abs() < 1e-12);
    assert!(last_error().is_none(), "success clears the message");

    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { mcc_scenario_single_new(0.1, 1.5, &mut s) },
        MccStatus::Infeasible
    );
    assert!(s.is_null());
    assert_eq!(
        unsafe { mcc_scenario_paired_new(0.1, 0.4, 0.8, 0.001, 0.5, &mut s) },
        MccStatus::Infeasible
    );
}

#[test]
fn psi_of_scenario_is_its_true_value() {
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { mcc_scenario_paired_new(0.1, 0.6, 0.8, 0.001, 0.01, &mut s) },
        MccStatus::Ok
    );
    assert!(unsafe { mcc_scenario_is_paired(s) });
    let mut len = 0usize;
    let mut small = [0.0; 4];
    assert_eq!(
        unsafe { mcc_scenario_cells(s, small.as_mut_ptr(), small.len(), &mut len) },
        MccStatus::BufferTooSmall
    );
    assert_eq!(len, 8);
    let mut cells = [0.0; 8];
    assert_eq!(
        unsafe { mcc_scenario_cells(s, cells.as_mut_ptr(), 8, &mut len) },
        MccStatus::Ok
    );
    let (mut d, mut t) = (0.0, 0.0);
    assert_eq!(unsafe { mcc_psi(cells.as_ptr(), &mut d) }, MccStatus::Ok);
    assert_eq!(unsafe { mcc_scenario_true_value(s, &mut t) }, MccStatus::Ok);
    assert!((d - t).abs() < 1e-12 && (t + 0.2).abs() < 1e-9);
    unsafe { mcc_scenario_free(s) };
    unsafe { mcc_scenario_free(ptr::null_mut()) };
}

#[test]
fn scenario_parse_round_trip() {
    let text = Scenario::Paired(paired_scenario(0.5, 0.4, 0.8).unwrap()).to_kv();
    let c = std::ffi::CString::new(text).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { mcc_scenario_parse(c.as_ptr(), &mut s) },
        MccStatus::Ok
    );
    let mut t = 0.0;
    unsafe { mcc_scenario_true_value(s, &mut t) };
    assert!((t + 0.4).abs() < 1e-9);
    unsafe { mcc_scenario_free(s) };
    let bad = std::ffi::CString::new("kind = nonsense").unwrap();
    assert_eq!(
        unsafe { mcc_scenario_parse(bad.as_ptr(), &mut s) },
        MccStatus::InvalidArgument
    );
}

#[test]
fn coverage_handle_matches_library() {
    let mut s = ptr::null_mut();
    unsafe { mcc_scenario_paired_new(0.5, 0.8, 0.6, 0.001, 0.01, &mut s) };
    let mut r = ptr::null_mut();
    assert_eq!(
        unsafe { mcc_coverage_run(s, 50, 5000, 0.95, 21, 2, &mut r) },
        MccStatus::Ok
    );
    let mut cfg = SimConfig::new(
        Scenario::Paired(paired_scenario(0.5, 0.8, 0.6).unwrap()),
        50,
        5000,
        21,
    );
    cfg.workers = 1;
    let want = run_coverage(&cfg).unwrap();
    assert_eq!(unsafe { mcc_coverage_len(r) }, want.methods.len());
    for (i, w) in want.methods.iter().enumerate() {
        let mut row = MccMethodCoverage {
            method: MccMethod::SimpleSingle,
            coverage: 0.0,
            mc_stderr: 0.0,
            hits: 0,
            evaluated: 0,
            na_undefined: 0,
            na_boundary: 0,
        };
        assert_eq!(unsafe { mcc_coverage_get(r, i, &mut row) }, MccStatus::Ok);
        assert_eq!(Method::from(row.method), w.method);
        assert_eq!((row.hits, row.evaluated), (w.tally.hits, w.tally.evaluated));
        assert_eq!(
            (row.na_undefined, row.na_boundary),
            (w.tally.na_undefined, w.tally.na_boundary)
        );
        assert_eq!(row.coverage, w.coverage);
    }
    unsafe {
        mcc_coverage_free(r);
        mcc_scenario_free(s);
    }
    assert_eq!(unsafe { mcc_coverage_len(ptr::null()) }, 0);
}

#[test]
fn sweep_handle() {
    let (a, b) = (summary(&BERT_CNN), summary(&ENHANCER_PRED));
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { mcc_sweep_run(&a, &b, SAMPLE_SIZE, 0.95, 0.025, 0.001, 5, &mut h) },
        MccStatus::Ok
    );
    let len = unsafe { mcc_sweep_len(h) };
    assert_eq!(len, 5 * 129);
    let mut row = MccSweepRow {
        p001: 0.0,
        p110: 0.0,
        estimate: 0.0,
        lower: 0.0,
        upper: 0.0,
        feasible: false,
        na: true,
    };
    for i in 0..len {
        assert_eq!(unsafe { mcc_sweep_get(h, i, &mut row) }, MccStatus::Ok);
        assert!(row.feasible && !row.na && row.lower < 0.0);
    }
    assert!((row.p001 - 0.1).abs() < 1e-12 && (row.p110 - 0.1275).abs() < 1e-12);
    assert_eq!(
        unsafe { mcc_sweep_get(h, len, &mut row) },
        MccStatus::OutOfRange
    );
    unsafe { mcc_sweep_free(h) };

    let mut other = b;
    other.prevalence = 0.4;
    assert_eq!(
        unsafe { mcc_sweep_run(&a, &other, 400, 0.95, 0.025, 0.001, 5, &mut h) },
        MccStatus::InvalidArgument
    );
    assert!(last_error().unwrap().contains("prevalence"));
    assert_eq!(
        unsafe { mcc_sweep_run(&a, &b, 400, 0.95, 0.025, 0.001, 0, &mut h) },
        MccStatus::InvalidArgument
    );
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mcc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mcc_infer.h")
}

#[test]
fn header_is_generated() {
    let text = std::fs::read_to_string(header()).unwrap();
    for item in [
        "#ifndef MCC_INFER_H",
        "typedef struct MccScenario MccScenario;",
        "typedef struct MccCoverageReport MccCoverageReport;",
        "typedef struct MccSweep MccSweep;",
        "MCC_STATUS_OK = 0",
        "MCC_METHOD_MT = 5",
        "const char *mcc_last_error_message(void);",
        "void mcc_sweep_free(struct MccSweep *sweep);",
    ] {
        assert!(text.contains(item), "header lacks `{item}`");
    }
}

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc)
        .arg("--version")
        .output()
        .ok()?
        .status
        .success()
        .then_some(cc)
}

#[test]
fn c_program_links_against_static_library() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libmcc_infer_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}
