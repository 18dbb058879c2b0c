//! Confidence intervals for the Matthews correlation coefficient (MCC) of one
//! binary classifier and for the MCC difference of two classifiers scored on
//! the same sample, with a Monte Carlo coverage simulator and a sensitivity
//! sweep for paired comparisons rebuilt from published summaries.
//!
//! Single tables are `[TP, FP, FN, TN]` (cells `p11, p10, p01, p00`; first
//! index prediction, second truth). Paired tables use the cell order
//! `p111, p110, p101, p100, p011, p010, p001, p000`, indices being
//! (h1 prediction, h2 prediction, truth).
//!
//! ```
//! use mcc_infer::{ci_single, CountsTable4, Method};
//!
//! let ci = ci_single(&CountsTable4::new(40, 14, 10, 36), 0.95, Method::FisherZ).unwrap();
//! let exact = 1300.0 / (54.0f64 * 46.0 * 50.0 * 50.0).sqrt();
//! assert!((ci.estimate - exact).abs() < 1e-12);
//! assert!(ci.lower < ci.estimate && ci.estimate < ci.upper);
//! ```

pub mod cli;
pub mod error;
pub mod mcc;
pub mod normal;
pub mod paired;
pub mod scenario;
pub mod sim;
pub mod single;
pub mod sweep;

pub use error::{Classifier, Error, Margin, Result};
pub use mcc::{counts_to_probs, grad_phi, phi, CountsTable4, ProbVec4};
pub use normal::{norm_ppf, z_two_sided};
pub use paired::{
    ci_paired, ci_paired_probs, corr_mcc_pair, grad_psi, psi, CountsTable8, ProbVec8,
};
pub use scenario::{
    admissible_ranges, from_sens_spec, joint_from_two_summaries, paired_scenario, single_scenario,
    ClassifierSummary, PairedScenario, Scenario, SingleScenario,
};
pub use sim::{exact_coverage, run_coverage, CoverageReport, SimConfig};
pub use single::{ci_single, ConfidenceInterval, Method, NaReason};
pub use sweep::{mcc_point_check, run_sweep, SweepConfig, SweepRow};
