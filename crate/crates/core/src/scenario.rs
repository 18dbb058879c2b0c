//! Population probability tables for simulation scenarios and for
//! reconstructing paired tables from published sensitivity/specificity.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mcc::{self, ProbVec4};
use crate::paired::{self, ProbVec8, CELL_NAMES};

/// Cells within this distance below zero are treated as exact zeros.
const FEASIBILITY_TOL: f64 = 1e-12;

/// Prevalences and MCC targets of the standard simulation grid, with the
/// population tables `(TP, FP, FN, TN)` rounded to four decimals.
pub const PUBLISHED_SINGLE: [(f64, f64, [f64; 4]); 6] = [
    (0.1, 0.4, [0.0794, 0.1853, 0.0206, 0.7147]),
    (0.1, 0.6, [0.0890, 0.0986, 0.0110, 0.8014]),
    (0.1, 0.8, [0.0956, 0.0396, 0.0044, 0.8604]),
    (0.5, 0.4, [0.3500, 0.1500, 0.1500, 0.3500]),
    (0.5, 0.6, [0.4000, 0.1000, 0.1000, 0.4000]),
    (0.5, 0.8, [0.4500, 0.0500, 0.0500, 0.4500]),
];

/// `P(h1 = 0, h2 = 0, Y = 1)` used to pin down paired simulation tables.
pub const DEFAULT_P001: f64 = 0.001;
/// `P(h1 = 1, h2 = 1, Y = 0)` used to pin down paired simulation tables.
pub const DEFAULT_P110: f64 = 0.01;

/// A single-classifier population table with equal sensitivity and
/// specificity (`TP/FN = TN/FP`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleScenario {
    pub prevalence: f64,
    pub target_mcc: f64,
    pub p: ProbVec4,
}

impl SingleScenario {
    /// MCC of the resolved table.
    pub fn true_mcc(&self) -> f64 {
        mcc::phi(&self.p).expect("scenario tables have positive margins")
    }
}

fn check_prevalence(prevalence: f64) -> Result<()> {
    if !(prevalence > 0.0 && prevalence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "prevalence must lie in (0, 1), got {prevalence}"
        )));
    }
    Ok(())
}

fn balanced_table(prevalence: f64, s: f64) -> [f64; 4] {
    let q = 1.0 - prevalence;
    [prevalence * s, q * (1.0 - s), prevalence * (1.0 - s), q * s]
}

fn balanced_mcc(prevalence: f64, s: f64) -> f64 {
    let p = ProbVec4::from_array(balanced_table(prevalence, s)).expect("simplex by construction");
    mcc::phi(&p).expect("margins positive for prevalence in (0, 1)")
}

/// Solve for the table with the given prevalence, `TP/FN = TN/FP`, and MCC.
///
/// The ratio condition forces sensitivity = specificity = `s`, and the MCC
/// is increasing in `s`, so bisection on `s` over `[0, 1]` finds the table.
pub fn single_scenario(prevalence: f64, target_mcc: f64) -> Result<SingleScenario> {
    check_prevalence(prevalence)?;
    if !target_mcc.is_finite() || target_mcc.abs() > 1.0 {
        return Err(Error::NoSolution {
            prevalence,
            target: target_mcc,
        });
    }
    let s = if target_mcc == 1.0 {
        1.0
    } else if target_mcc == -1.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if balanced_mcc(prevalence, mid) < target_mcc {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let p = ProbVec4::from_array(balanced_table(prevalence, s))?;
    let got = mcc::phi(&p)?;
    if (got - target_mcc).abs() > 1e-6 {
        return Err(Error::NoSolution {
            prevalence,
            target: target_mcc,
        });
    }
    Ok(SingleScenario {
        prevalence,
        target_mcc,
        p,
    })
}

/// A paired population table whose marginals are two [`SingleScenario`]s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedScenario {
    pub prevalence: f64,
    pub target_mcc1: f64,
    pub target_mcc2: f64,
    pub p001_fixed: f64,
    pub p110_fixed: f64,
    pub p: ProbVec8,
}

impl PairedScenario {
    pub fn true_difference(&self) -> f64 {
        paired::psi(&self.p).expect("scenario tables have positive margins")
    }
}

/// Joint table from two marginal confusion tables sharing a prevalence, with
/// `p001` and `p110` fixed.
///
/// Within the truth = 1 stratum the three remaining cells follow from TP1,
/// TP2 and `p001`; within truth = 0 from FP1, FP2 and `p110`.
pub fn identify_joint(m1: &ProbVec4, m2: &ProbVec4, p001: f64, p110: f64) -> Result<ProbVec8> {
    let prev1 = m1.margins().actual_pos;
    let prev2 = m2.margins().actual_pos;
    if (prev1 - prev2).abs() > 1e-12 {
        return Err(Error::PrevalenceMismatch(prev1, prev2));
    }
    if !p001.is_finite() || !p110.is_finite() {
        return Err(Error::InvalidParameter(
            "p001 and p110 must be finite".into(),
        ));
    }
    let prev = prev1;
    let [tp1, fp1, _, _] = *m1.as_array();
    let [tp2, fp2, _, _] = *m2.as_array();

    let p111 = tp1 + tp2 + p001 - prev;
    let p101 = tp1 - p111;
    let p011 = tp2 - p111;
    let p100 = fp1 - p110;
    let p010 = fp2 - p110;
    let p000 = (1.0 - prev) - fp1 - fp2 + p110;

    let mut cells = [p111, p110, p101, p100, p011, p010, p001, p000];
    for (cell, name) in cells.iter_mut().zip(CELL_NAMES) {
        if *cell < -FEASIBILITY_TOL || cell.is_nan() {
            return Err(Error::Infeasible {
                cell: name,
                value: *cell,
            });
        }
        if *cell < 0.0 {
            *cell = 0.0;
        }
    }
    ProbVec8::from_array(cells)
}

/// Paired scenario with the default `p001 = 0.001`, `p110 = 0.01`.
pub fn paired_scenario(prevalence: f64, mcc1: f64, mcc2: f64) -> Result<PairedScenario> {
    paired_scenario_with(prevalence, mcc1, mcc2, DEFAULT_P001, DEFAULT_P110)
}

pub fn paired_scenario_with(
    prevalence: f64,
    mcc1: f64,
    mcc2: f64,
    p001: f64,
    p110: f64,
) -> Result<PairedScenario> {
    let s1 = single_scenario(prevalence, mcc1)?;
    let s2 = single_scenario(prevalence, mcc2)?;
    let p = identify_joint(&s1.p, &s2.p, p001, p110)?;
    Ok(PairedScenario {
        prevalence,
        target_mcc1: mcc1,
        target_mcc2: mcc2,
        p001_fixed: p001,
        p110_fixed: p110,
        p,
    })
}

/// Published operating point of one classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierSummary {
    pub sensitivity: f64,
    pub specificity: f64,
    pub prevalence: f64,
}

impl ClassifierSummary {
    pub fn new(sensitivity: f64, specificity: f64, prevalence: f64) -> Result<Self> {
        for (name, v) in [
            ("sensitivity", sensitivity),
            ("specificity", specificity),
            ("prevalence", prevalence),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(Self {
            sensitivity,
            specificity,
            prevalence,
        })
    }
}

/// Enhancer-identification benchmark (200 enhancers, 200 non-enhancers).
pub mod enhancer_benchmark {
    use super::ClassifierSummary;

    pub const SAMPLE_SIZE: u64 = 400;

    pub const ENHANCER_PRED: ClassifierSummary = ClassifierSummary {
        sensitivity: 0.735,
        specificity: 0.745,
        prevalence: 0.5,
    };
    pub const IENHANCER_2L: ClassifierSummary = ClassifierSummary {
        sensitivity: 0.71,
        specificity: 0.785,
        prevalence: 0.5,
    };
    pub const IENHANCER_EL: ClassifierSummary = ClassifierSummary {
        sensitivity: 0.71,
        specificity: 0.75,
        prevalence: 0.5,
    };
    /// BERT + 2D CNN predictor.
    pub const BERT_CNN: ClassifierSummary = ClassifierSummary {
        sensitivity: 0.80,
        specificity: 0.712,
        prevalence: 0.5,
    };
}

/// Confusion-table probabilities implied by a summary.
pub fn from_sens_spec(s: &ClassifierSummary) -> ProbVec4 {
    let q = 1.0 - s.prevalence;
    let cells = [
        s.prevalence * s.sensitivity,
        q * (1.0 - s.specificity),
        s.prevalence * (1.0 - s.sensitivity),
        q * s.specificity,
    ];
    ProbVec4::from_array(cells).expect("summary fields lie in [0, 1]")
}

fn shared_prevalence(a: &ClassifierSummary, b: &ClassifierSummary) -> Result<f64> {
    if (a.prevalence - b.prevalence).abs() > 1e-12 {
        return Err(Error::PrevalenceMismatch(a.prevalence, b.prevalence));
    }
    Ok(a.prevalence)
}

pub fn joint_from_two_summaries(
    a: &ClassifierSummary,
    b: &ClassifierSummary,
    p001: f64,
    p110: f64,
) -> Result<ProbVec8> {
    shared_prevalence(a, b)?;
    identify_joint(&from_sens_spec(a), &from_sens_spec(b), p001, p110)
}

/// Upper ends `(p001_max, p110_max)` of the admissible ranges for the two
/// free joint cells.
pub fn admissible_ranges(a: &ClassifierSummary, b: &ClassifierSummary) -> Result<(f64, f64)> {
    let prev = shared_prevalence(a, b)?;
    Ok((
        prev * (1.0 - a.sensitivity.max(b.sensitivity)),
        (1.0 - prev) * (1.0 - a.specificity.max(b.specificity)),
    ))
}

/// Either kind of simulation scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Single(SingleScenario),
    Paired(PairedScenario),
}

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

impl Scenario {
    pub fn is_paired(&self) -> bool {
        matches!(self, Scenario::Paired(_))
    }

    pub fn prevalence(&self) -> f64 {
        match self {
            Scenario::Single(s) => s.prevalence,
            Scenario::Paired(s) => s.prevalence,
        }
    }

    pub fn mcc1(&self) -> f64 {
        match self {
            Scenario::Single(s) => s.target_mcc,
            Scenario::Paired(s) => s.target_mcc1,
        }
    }

    pub fn mcc2(&self) -> Option<f64> {
        match self {
            Scenario::Single(_) => None,
            Scenario::Paired(s) => Some(s.target_mcc2),
        }
    }

    /// Parameter the intervals should cover: the MCC, or the MCC difference.
    pub fn true_value(&self) -> f64 {
        match self {
            Scenario::Single(s) => s.true_mcc(),
            Scenario::Paired(s) => s.true_difference(),
        }
    }

    pub fn cells(&self) -> Vec<f64> {
        match self {
            Scenario::Single(s) => s.p.as_array().to_vec(),
            Scenario::Paired(s) => s.p.as_array().to_vec(),
        }
    }

    /// Short identifier such as `single-p0.1-mcc0.4` or `paired-p0.5-mcc0.8-0.6`.
    pub fn id(&self) -> String {
        match self {
            Scenario::Single(s) => format!("single-p{}-mcc{}", s.prevalence, s.target_mcc),
            Scenario::Paired(s) => format!(
                "paired-p{}-mcc{}-{}",
                s.prevalence, s.target_mcc1, s.target_mcc2
            ),
        }
    }

    /// Versioned `key = value` text form.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mcc-infer scenario");
        let _ = writeln!(out, "schema_version = {SCENARIO_SCHEMA_VERSION}");
        match self {
            Scenario::Single(s) => {
                let _ = writeln!(out, "kind = single");
                let _ = writeln!(out, "prevalence = {}", s.prevalence);
                let _ = writeln!(out, "mcc1 = {}", s.target_mcc);
            }
            Scenario::Paired(s) => {
                let _ = writeln!(out, "kind = paired");
                let _ = writeln!(out, "prevalence = {}", s.prevalence);
                let _ = writeln!(out, "mcc1 = {}", s.target_mcc1);
                let _ = writeln!(out, "mcc2 = {}", s.target_mcc2);
                let _ = writeln!(out, "p001 = {}", s.p001_fixed);
                let _ = writeln!(out, "p110 = {}", s.p110_fixed);
            }
        }
        let cells: Vec<String> = self.cells().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "cells = {}", cells.join(","));
        out
    }

    /// Parse the text produced by [`Scenario::to_kv`]. The stored cells are
    /// used as-is after checking that they reproduce the stated targets.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut fields = std::collections::BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            if fields
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(Error::Parse(format!("duplicate key `{}`", k.trim())));
            }
        }
        let get = |k: &str| {
            fields
                .get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::Parse(format!("missing key `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("`{k}`: {e}")))
        };
        let version = get("schema_version")?;
        if version != SCENARIO_SCHEMA_VERSION.to_string() {
            return Err(Error::Parse(format!(
                "unsupported schema_version {version}"
            )));
        }
        let cells = get("cells")?
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("`cells`: {e}")))?;
        let prevalence = num("prevalence")?;
        let mcc1 = num("mcc1")?;
        let check = |got: f64, want: f64, what: &str| -> Result<()> {
            if (got - want).abs() > 1e-6 {
                return Err(Error::Parse(format!(
                    "cells give {what} {got}, file says {want}"
                )));
            }
            Ok(())
        };
        let expected_keys: &[&str] = match get("kind")? {
            "single" => {
                let arr: [f64; 4] = cells
                    .try_into()
                    .map_err(|_| Error::Parse("single scenario needs 4 cells".into()))?;
                let p = ProbVec4::from_array(arr)?;
                check(p.margins().actual_pos, prevalence, "prevalence")?;
                check(mcc::phi(&p)?, mcc1, "MCC")?;
                if fields.len() != 5 {
                    return Err(Error::Parse("unexpected keys for a single scenario".into()));
                }
                return Ok(Scenario::Single(SingleScenario {
                    prevalence,
                    target_mcc: mcc1,
                    p,
                }));
            }
            "paired" => &[
                "schema_version",
                "kind",
                "prevalence",
                "mcc1",
                "mcc2",
                "p001",
                "p110",
                "cells",
            ],
            other => return Err(Error::Parse(format!("unknown kind `{other}`"))),
        };
        if fields.len() != expected_keys.len() {
            return Err(Error::Parse("unexpected keys for a paired scenario".into()));
        }
        let arr: [f64; 8] = cells
            .try_into()
            .map_err(|_| Error::Parse("paired scenario needs 8 cells".into()))?;
        let p = ProbVec8::from_array(arr)?;
        let (m1, m2) = paired::marginals(&p);
        let mcc2 = num("mcc2")?;
        let p001 = num("p001")?;
        let p110 = num("p110")?;
        check(m1.margins().actual_pos, prevalence, "prevalence")?;
        check(mcc::phi(&m1)?, mcc1, "MCC1")?;
        check(mcc::phi(&m2)?, mcc2, "MCC2")?;
        check(p.get(0, 0, 1), p001, "p001")?;
        check(p.get(1, 1, 0), p110, "p110")?;
        Ok(Scenario::Paired(PairedScenario {
            prevalence,
            target_mcc1: mcc1,
            target_mcc2: mcc2,
            p001_fixed: p001,
            p110_fixed: p110,
            p,
        }))
    }
}
