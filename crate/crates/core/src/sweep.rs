//! Sensitivity sweep over the two free joint cells of a paired comparison
//! rebuilt from published sensitivity/specificity pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcc;
use crate::paired::ci_paired_probs;
use crate::scenario::{
    admissible_ranges, from_sens_spec, joint_from_two_summaries, ClassifierSummary,
};
use crate::single::Method;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub summary_a: ClassifierSummary,
    pub summary_b: ClassifierSummary,
    pub n: u64,
    pub level: f64,
    pub p001_step: f64,
    pub p110_step: f64,
    pub method: Method,
}

impl SweepConfig {
    /// MT intervals, 95% level, steps 0.025 (p001) and 0.001 (p110).
    pub fn new(summary_a: ClassifierSummary, summary_b: ClassifierSummary, n: u64) -> Self {
        Self {
            summary_a,
            summary_b,
            n,
            level: 0.95,
            p001_step: 0.025,
            p110_step: 0.001,
            method: Method::Mt,
        }
    }
}

/// One grid point. `estimate`, `lower`, `upper` are NaN when infeasible or NA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p001: f64,
    pub p110: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub feasible: bool,
    pub na: bool,
}

/// `0, step, 2 step, ...` up to `max`, with `max` itself appended when the
/// steps do not land on it.
pub fn grid(max: f64, step: f64) -> Vec<f64> {
    let eps = 1e-9 * step;
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let x = k as f64 * step;
        if x > max + eps {
            break;
        }
        out.push(x.min(max));
        k += 1;
    }
    if max - out.last().copied().unwrap_or(0.0) > eps {
        out.push(max);
    }
    out
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if !(cfg.p001_step > 0.0 && cfg.p110_step > 0.0) {
        return Err(Error::InvalidParameter(
            "grid steps must be positive".into(),
        ));
    }
    if cfg.n == 0 {
        return Err(Error::InvalidN { n: 0, min: 1 });
    }
    if !cfg.method.is_paired() {
        return Err(Error::InvalidParameter(format!(
            "method `{}` is not a paired method",
            cfg.method
        )));
    }
    crate::normal::z_two_sided(cfg.level)?;
    let (p001_max, p110_max) = admissible_ranges(&cfg.summary_a, &cfg.summary_b)?;
    let p110_grid = grid(p110_max, cfg.p110_step);
    let points: Vec<(f64, f64)> = grid(p001_max, cfg.p001_step)
        .into_iter()
        .flat_map(|a| p110_grid.iter().map(move |&b| (a, b)))
        .collect();
    let n = cfg.n as f64;
    points
        .into_par_iter()
        .map(|(p001, p110)| {
            let mut row = SweepRow {
                p001,
                p110,
                estimate: f64::NAN,
                lower: f64::NAN,
                upper: f64::NAN,
                feasible: false,
                na: false,
            };
            let p = match joint_from_two_summaries(&cfg.summary_a, &cfg.summary_b, p001, p110) {
                Ok(p) => p,
                Err(Error::Infeasible { .. }) => return Ok(row),
                Err(e) => return Err(e),
            };
            row.feasible = true;
            let ci = ci_paired_probs(&p, n, cfg.level, cfg.method)?;
            row.estimate = ci.estimate;
            row.na = ci.is_na();
            if !row.na {
                row.lower = ci.lower;
                row.upper = ci.upper;
            }
            Ok(row)
        })
        .collect()
}

/// MCC of the table implied by a published summary.
pub fn mcc_point_check(s: &ClassifierSummary) -> Result<f64> {
    mcc::phi(&from_sens_spec(s))
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    schema_version: &'a str,
    p001: f64,
    p110: f64,
    estimate: f64,
    lower: f64,
    upper: f64,
    feasible: bool,
    na: bool,
}

pub fn write_sweep_csv<W: std::io::Write>(w: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(SweepCsvRow {
            schema_version: crate::sim::CSV_SCHEMA_VERSION,
            p001: r.p001,
            p110: r.p110,
            estimate: r.estimate,
            lower: r.lower,
            upper: r.upper,
            feasible: r.feasible,
            na: r.na,
        })?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: std::io::Read>(r: R) -> csv::Result<Vec<SweepRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}
