//! Monte Carlo coverage study.
//!
//! Each trial draws one multinomial table from the scenario, builds every
//! requested interval from that same table, and records a hit, a miss, or an
//! NA by reason. Trial `t` always uses random stream `t` under the run seed,
//! so results do not depend on how trials are split across workers.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcc::CountsTable4;
use crate::normal::z_two_sided;
use crate::paired::{self, CountsTable8};
use crate::scenario::Scenario;
use crate::single::{self, ConfidenceInterval, Method, NaReason, ZVariance};

/// Trials handed to a worker at a time.
const CHUNK: u64 = 2048;

/// Default outcome-space bound for [`exact_coverage`].
pub const DEFAULT_EXACT_LIMIT: u128 = 2_000_000;

pub type TrialRng = ChaCha8Rng;

/// Independent random stream for one trial: ChaCha8 keyed by `seed`, with
/// the trial index as stream id.
pub fn trial_stream(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One multinomial draw of `n` items over `p`, by sequential conditional
/// binomials.
pub fn sample_counts<const K: usize, R: Rng + ?Sized>(
    p: &[f64; K],
    n: u64,
    rng: &mut R,
) -> [u64; K] {
    let mut out = [0u64; K];
    let Some(last) = p.iter().rposition(|&x| x > 0.0) else {
        return out;
    };
    let mut remaining = n;
    let mut mass = 1.0;
    for i in 0..last {
        if remaining == 0 {
            break;
        }
        let pi = p[i];
        if pi <= 0.0 {
            continue;
        }
        let q = pi / mass;
        let x = if q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q)
                .expect("conditional probability in [0, 1)")
                .sample(rng)
        };
        out[i] = x;
        remaining -= x;
        mass -= pi;
    }
    out[last] += remaining;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub n: u64,
    pub m: u64,
    pub level: f64,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    /// All methods of the scenario's family, 95% level, one worker per core.
    pub fn new(scenario: Scenario, n: u64, m: u64, seed: u64) -> Self {
        let methods = if scenario.is_paired() {
            Method::PAIRED.to_vec()
        } else {
            Method::SINGLE.to_vec()
        };
        Self {
            scenario,
            n,
            m,
            level: 0.95,
            methods,
            seed,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidN { n: 0, min: 1 });
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter(
                "trial count m must be at least 1".into(),
            ));
        }
        z_two_sided(self.level)?;
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods requested".into()));
        }
        for &method in &self.methods {
            if method.is_paired() != self.scenario.is_paired() {
                return Err(Error::InvalidParameter(format!(
                    "method `{method}` does not apply to scenario {}",
                    self.scenario.id()
                )));
            }
            if method == Method::FisherZNaive && self.n <= 3 {
                return Err(Error::InvalidN { n: self.n, min: 4 });
            }
        }
        Ok(())
    }
}

/// Per-method counters; merging is element-wise addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MethodTally {
    pub hits: u64,
    pub evaluated: u64,
    pub na_undefined: u64,
    pub na_boundary: u64,
    pub variance_clamped: u64,
    pub radicand_clamped: u64,
}

impl MethodTally {
    fn record(&mut self, ci: &ConfidenceInterval, truth: f64) {
        match ci.na {
            Some(NaReason::UndefinedMcc) => self.na_undefined += 1,
            Some(NaReason::TransformBoundary) => self.na_boundary += 1,
            None => {
                self.evaluated += 1;
                if ci.lower <= truth && truth <= ci.upper {
                    self.hits += 1;
                }
            }
        }
        self.variance_clamped += ci.diagnostics.variance_clamped as u64;
        self.radicand_clamped += ci.diagnostics.radicand_clamped as u64;
    }

    fn merge(&mut self, other: &Self) {
        self.hits += other.hits;
        self.evaluated += other.evaluated;
        self.na_undefined += other.na_undefined;
        self.na_boundary += other.na_boundary;
        self.variance_clamped += other.variance_clamped;
        self.radicand_clamped += other.radicand_clamped;
    }

    pub fn na_total(&self) -> u64 {
        self.na_undefined + self.na_boundary
    }
}

/// Counters for every configured method, in configuration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tally(pub Vec<MethodTally>);

impl Tally {
    fn zero(k: usize) -> Self {
        Self(vec![MethodTally::default(); k])
    }

    pub fn merge(mut self, other: &Tally) -> Tally {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.merge(b);
        }
        self
    }
}

/// Per-trial evaluation state shared by the sampler and the exact oracle.
struct Evaluator<'a> {
    cfg: &'a SimConfig,
    z: f64,
    truth: f64,
}

impl<'a> Evaluator<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            z: z_two_sided(cfg.level)?,
            truth: cfg.scenario.true_value(),
        })
    }

    fn intervals_single(&self, c: &CountsTable4) -> impl Iterator<Item = ConfidenceInterval> + '_ {
        let (p, n) = crate::mcc::counts_to_probs(c).expect("n >= 1");
        let nf = n as f64;
        let (level, z) = (self.cfg.level, self.z);
        self.cfg.methods.iter().map(move |m| match m {
            Method::SimpleSingle => single::simple_with_z(&p, nf, level, z),
            Method::FisherZ => single::fisher_with_z(&p, nf, level, z, ZVariance::Delta),
            Method::FisherZNaive => single::fisher_with_z(&p, nf, level, z, ZVariance::Naive),
            _ => unreachable!("validated"),
        })
    }

    fn intervals_paired(&self, c: &CountsTable8) -> impl Iterator<Item = ConfidenceInterval> + '_ {
        let (p, n) = c.to_probs().expect("n >= 1");
        let nf = n as f64;
        let (level, z) = (self.cfg.level, self.z);
        self.cfg.methods.iter().map(move |m| match m {
            Method::SimplePaired => paired::simple_paired_with_z(&p, nf, level, z),
            Method::Zou => paired::zou_with_z(&p, nf, level, z),
            Method::Mt => paired::mt_with_z(&p, nf, level, z),
            _ => unreachable!("validated"),
        })
    }

    fn record_cells(&self, cells: &[u64], tally: &mut Tally) {
        match cells.len() {
            4 => {
                let c = CountsTable4::from_array(cells.try_into().unwrap());
                for (t, ci) in tally.0.iter_mut().zip(self.intervals_single(&c)) {
                    t.record(&ci, self.truth);
                }
            }
            8 => {
                let c = CountsTable8(cells.try_into().unwrap());
                for (t, ci) in tally.0.iter_mut().zip(self.intervals_paired(&c)) {
                    t.record(&ci, self.truth);
                }
            }
            _ => unreachable!(),
        }
    }

    fn run_range(&self, trials: Range<u64>) -> Tally {
        let mut tally = Tally::zero(self.cfg.methods.len());
        let (seed, n) = (self.cfg.seed, self.cfg.n);
        for t in trials {
            let mut rng = trial_stream(seed, t);
            match &self.cfg.scenario {
                Scenario::Single(s) => {
                    let c = sample_counts(s.p.as_array(), n, &mut rng);
                    self.record_cells(&c, &mut tally);
                }
                Scenario::Paired(s) => {
                    let c = sample_counts(s.p.as_array(), n, &mut rng);
                    self.record_cells(&c, &mut tally);
                }
            }
        }
        tally
    }
}

/// Run trials `range` of the configured study on the current thread.
///
/// `run_coverage` is the merge of this over disjoint ranges covering `0..m`.
pub fn tally_trials(cfg: &SimConfig, range: Range<u64>) -> Result<Tally> {
    Ok(Evaluator::new(cfg)?.run_range(range))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCoverage {
    pub method: Method,
    #[serde(flatten)]
    pub tally: MethodTally,
    /// `hits / evaluated`; NaN if nothing was evaluated.
    pub coverage: f64,
    /// `sqrt(coverage (1 - coverage) / evaluated)`.
    pub mc_stderr: f64,
}

impl MethodCoverage {
    fn from_tally(method: Method, tally: MethodTally) -> Self {
        let (coverage, mc_stderr) = if tally.evaluated == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let c = tally.hits as f64 / tally.evaluated as f64;
            (c, (c * (1.0 - c) / tally.evaluated as f64).sqrt())
        };
        Self {
            method,
            tally,
            coverage,
            mc_stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub scenario: Scenario,
    pub n: u64,
    pub m: u64,
    pub level: f64,
    pub seed: u64,
    /// The parameter intervals are checked against (full solver precision).
    pub true_value: f64,
    pub methods: Vec<MethodCoverage>,
}

impl CoverageReport {
    pub fn method(&self, m: Method) -> Option<&MethodCoverage> {
        self.methods.iter().find(|c| c.method == m)
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Run the full study. `cfg.workers == 0` uses one worker per core.
pub fn run_coverage(cfg: &SimConfig) -> Result<CoverageReport> {
    let eval = Evaluator::new(cfg)?;
    let chunks = cfg.m.div_ceil(CHUNK);
    let k = cfg.methods.len();
    let pool = build_pool(cfg.workers)?;
    let tally = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| eval.run_range(c * CHUNK..((c + 1) * CHUNK).min(cfg.m)))
            .reduce(|| Tally::zero(k), |a, b| a.merge(&b))
    });
    Ok(CoverageReport {
        scenario: cfg.scenario,
        n: cfg.n,
        m: cfg.m,
        level: cfg.level,
        seed: cfg.seed,
        true_value: eval.truth,
        methods: cfg
            .methods
            .iter()
            .zip(tally.0)
            .map(|(&m, t)| MethodCoverage::from_tally(m, t))
            .collect(),
    })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of count tables with `cells` cells summing to `n`.
pub fn outcome_count(n: u64, cells: usize) -> u128 {
    binomial_u128(n + cells as u64 - 1, cells as u64 - 1)
}

/// Exact probabilities for one method from full enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMethodCoverage {
    pub method: Method,
    pub p_hit: f64,
    pub p_na_undefined: f64,
    pub p_na_boundary: f64,
}

impl ExactMethodCoverage {
    pub fn p_na(&self) -> f64 {
        self.p_na_undefined + self.p_na_boundary
    }

    /// Coverage conditional on the interval being defined.
    pub fn coverage(&self) -> f64 {
        self.p_hit / (1.0 - self.p_na())
    }
}

struct ExactAccumulator {
    hit: Vec<CompensatedSum>,
    na_undefined: Vec<CompensatedSum>,
    na_boundary: Vec<CompensatedSum>,
}

/// Enumerate every count table of size `cfg.n`, weight it by its multinomial
/// probability, and classify it with the same rules as [`run_coverage`].
/// `cfg.m`, `seed` and `workers` are ignored.
pub fn exact_coverage(cfg: &SimConfig, limit: u128) -> Result<Vec<ExactMethodCoverage>> {
    let eval = Evaluator::new(cfg)?;
    let probs = cfg.scenario.cells();
    let k = probs.len();
    let count = outcome_count(cfg.n, k);
    if count > limit {
        return Err(Error::TooLarge { count, limit });
    }
    let nm = cfg.methods.len();
    let mut acc = ExactAccumulator {
        hit: vec![CompensatedSum::default(); nm],
        na_undefined: vec![CompensatedSum::default(); nm],
        na_boundary: vec![CompensatedSum::default(); nm],
    };
    let mut cells = vec![0u64; k];
    enumerate(&eval, &probs, 0, cfg.n, 1, 1.0, &mut cells, &mut acc);
    Ok(cfg
        .methods
        .iter()
        .enumerate()
        .map(|(i, &method)| ExactMethodCoverage {
            method,
            p_hit: acc.hit[i].value(),
            p_na_undefined: acc.na_undefined[i].value(),
            p_na_boundary: acc.na_boundary[i].value(),
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    eval: &Evaluator<'_>,
    probs: &[f64],
    idx: usize,
    remaining: u64,
    coef: u128,
    weight: f64,
    cells: &mut Vec<u64>,
    acc: &mut ExactAccumulator,
) {
    let k = probs.len();
    if idx == k - 1 {
        cells[idx] = remaining;
        let w = weight * probs[idx].powi(remaining as i32);
        if w == 0.0 {
            return;
        }
        let pmf = coef as f64 * w;
        let mut tally = Tally::zero(eval.cfg.methods.len());
        eval.record_cells(cells, &mut tally);
        for (i, t) in tally.0.iter().enumerate() {
            if t.hits == 1 {
                acc.hit[i].add(pmf);
            } else if t.na_undefined == 1 {
                acc.na_undefined[i].add(pmf);
            } else if t.na_boundary == 1 {
                acc.na_boundary[i].add(pmf);
            }
        }
        return;
    }
    for c in 0..=remaining {
        let w = weight * probs[idx].powi(c as i32);
        if w == 0.0 {
            continue;
        }
        cells[idx] = c;
        let next = coef * binomial_u128(remaining, c);
        enumerate(eval, probs, idx + 1, remaining - c, next, w, cells, acc);
    }
}

pub const CSV_SCHEMA_VERSION: &str = "1";

/// One line of the coverage CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub schema_version: String,
    pub scenario_id: String,
    pub prevalence: f64,
    pub mcc1: f64,
    pub mcc2: Option<f64>,
    pub n: u64,
    pub m: u64,
    pub method: String,
    pub coverage: f64,
    pub mc_stderr: f64,
    pub na_undefined: u64,
    pub na_boundary: u64,
    pub seed: u64,
}

impl CoverageReport {
    pub fn rows(&self) -> Vec<CoverageRow> {
        self.methods
            .iter()
            .map(|c| CoverageRow {
                schema_version: CSV_SCHEMA_VERSION.to_string(),
                scenario_id: self.scenario.id(),
                prevalence: self.scenario.prevalence(),
                mcc1: self.scenario.mcc1(),
                mcc2: self.scenario.mcc2(),
                n: self.n,
                m: self.m,
                method: c.method.name().to_string(),
                coverage: c.coverage,
                mc_stderr: c.mc_stderr,
                na_undefined: c.tally.na_undefined,
                na_boundary: c.tally.na_boundary,
                seed: self.seed,
            })
            .collect()
    }

    /// Plain-text table for terminals.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "scenario {}  n={}  m={}  level={}  seed={}  true value={:.6}\n",
            self.scenario.id(),
            self.n,
            self.m,
            self.level,
            self.seed,
            self.true_value
        );
        out.push_str(&format!(
            "{:<14} {:>9} {:>9} {:>10} {:>12} {:>12}\n",
            "method", "coverage", "stderr", "evaluated", "na_undefined", "na_boundary"
        ));
        for c in &self.methods {
            out.push_str(&format!(
                "{:<14} {:>9.4} {:>9.5} {:>10} {:>12} {:>12}\n",
                c.method.name(),
                c.coverage,
                c.mc_stderr,
                c.tally.evaluated,
                c.tally.na_undefined,
                c.tally.na_boundary
            ));
        }
        out
    }
}

pub fn write_coverage_csv<W: std::io::Write>(w: W, reports: &[CoverageReport]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in reports {
        for row in r.rows() {
            wr.serialize(row)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn read_coverage_csv<R: std::io::Read>(r: R) -> csv::Result<Vec<CoverageRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{paired_scenario, single_scenario};

    #[test]
    fn point_mass_sampling() {
        let mut rng = trial_stream(7, 0);
        assert_eq!(
            sample_counts(&[1.0, 0.0, 0.0, 0.0], 37, &mut rng),
            [37, 0, 0, 0]
        );
        assert_eq!(
            sample_counts(&[0.0, 0.0, 1.0, 0.0], 5, &mut rng),
            [0, 0, 5, 0]
        );
        assert_eq!(
            sample_counts(&[0.5, 0.0, 0.5, 0.0], 100, &mut rng)
                .iter()
                .sum::<u64>(),
            100
        );
    }

    #[test]
    fn zero_cells_never_drawn() {
        let p = [0.3, 0.0, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0];
        for t in 0..2000 {
            let c = sample_counts(&p, 50, &mut trial_stream(1, t));
            assert_eq!(c[1] + c[3] + c[4] + c[5] + c[6] + c[7], 0);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trial_stream(9, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| trial_stream(9, 3).random()).collect();
        assert_eq!(a, b);
        let mut r1 = trial_stream(9, 3);
        let mut r2 = trial_stream(9, 4);
        let mut r3 = trial_stream(10, 3);
        let x: u64 = r1.random();
        assert_ne!(x, r2.random::<u64>());
        assert_ne!(x, r3.random::<u64>());
    }

    #[test]
    fn outcome_counts() {
        assert_eq!(outcome_count(5, 4), 56);
        assert_eq!(outcome_count(8, 8), 6435);
        assert_eq!(outcome_count(0, 4), 1);
    }

    #[test]
    fn config_validation() {
        let s = Scenario::Single(single_scenario(0.5, 0.4).unwrap());
        let mut cfg = SimConfig::new(s, 10, 10, 1);
        assert!(cfg.validate().is_ok());
        cfg.methods = vec![Method::Zou];
        assert!(cfg.validate().is_err());
        cfg.methods = vec![Method::FisherZNaive];
        cfg.n = 3;
        assert!(cfg.validate().is_err());
        cfg.n = 10;
        cfg.m = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn exact_too_large() {
        let s = Scenario::Paired(paired_scenario(0.5, 0.4, 0.6).unwrap());
        let cfg = SimConfig::new(s, 40, 1, 1);
        assert!(matches!(
            exact_coverage(&cfg, 1000),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn exact_probabilities_sum_to_one() {
        let s = Scenario::Single(single_scenario(0.1, 0.4).unwrap());
        let cfg = SimConfig::new(s, 5, 1, 1);
        let ex = exact_coverage(&cfg, DEFAULT_EXACT_LIMIT).unwrap();
        // Misses are the remainder, so check hit + na <= 1 and the NA mass.
        let [a, b, c, d] = *single_scenario(0.1, 0.4).unwrap().p.as_array();
        let n = 5;
        let any_zero_margin = 0.9f64.powi(n) + 0.1f64.powi(n) + (c + d).powi(n) + (a + b).powi(n)
            - d.powi(n)
            - b.powi(n)
            - c.powi(n)
            - a.powi(n);
        for e in &ex {
            assert!(e.p_hit + e.p_na() <= 1.0 + 1e-12);
            assert!((e.p_na_undefined - any_zero_margin).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = Scenario::Single(single_scenario(0.5, 0.6).unwrap());
        let mut cfg = SimConfig::new(s, 30, 500, 3);
        cfg.workers = 2;
        let rep = run_coverage(&cfg).unwrap();
        let mut buf = Vec::new();
        write_coverage_csv(&mut buf, std::slice::from_ref(&rep)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "schema_version,scenario_id,prevalence,mcc1,mcc2,n,m,method,coverage,mc_stderr,na_undefined,na_boundary,seed\n"
        ));
        let rows = read_coverage_csv(&buf[..]).unwrap();
        assert_eq!(rows, rep.rows());
        let mut again = Vec::new();
        write_coverage_csv(&mut again, &[rep]).unwrap();
        assert_eq!(again, buf);
    }
}
