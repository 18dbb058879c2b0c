//! Confidence intervals for a single MCC.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcc::{self, counts_to_probs, CountsTable4, ProbVec4};
use crate::normal::z_two_sided;

/// Interval construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Delta method on the MCC itself.
    SimpleSingle,
    /// Delta method on Fisher's z of the MCC, back-transformed.
    FisherZ,
    /// Fisher's z with the bivariate-normal variance `1/(n-3)`.
    FisherZNaive,
    /// Delta method on the difference of two paired MCCs.
    SimplePaired,
    /// Zou's recovery interval with a delta-method correlation.
    Zou,
    /// Fisher-type transform of half the paired difference.
    Mt,
}

impl Method {
    pub const SINGLE: [Method; 3] = [Method::SimpleSingle, Method::FisherZ, Method::FisherZNaive];
    pub const PAIRED: [Method; 3] = [Method::SimplePaired, Method::Zou, Method::Mt];

    pub fn name(self) -> &'static str {
        match self {
            Method::SimpleSingle => "simple",
            Method::FisherZ => "fisher",
            Method::FisherZNaive => "fisher-naive",
            Method::SimplePaired => "simple-paired",
            Method::Zou => "zou",
            Method::Mt => "mt",
        }
    }

    pub fn is_paired(self) -> bool {
        matches!(self, Method::SimplePaired | Method::Zou | Method::Mt)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "simple" => Method::SimpleSingle,
            "fisher" => Method::FisherZ,
            "fisher-naive" => Method::FisherZNaive,
            "simple-paired" => Method::SimplePaired,
            "zou" => Method::Zou,
            "mt" => Method::Mt,
            other => return Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        })
    }
}

/// Why an interval could not be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NaReason {
    /// A margin of the (marginal) table is zero.
    UndefinedMcc,
    /// The estimate sits on the boundary of the transform's domain, or the
    /// estimator variance vanishes there.
    TransformBoundary,
}

impl NaReason {
    pub fn name(self) -> &'static str {
        match self {
            NaReason::UndefinedMcc => "undefined-mcc",
            NaReason::TransformBoundary => "transform-boundary",
        }
    }
}

impl fmt::Display for NaReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Numerical events that were patched over while building an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// A variance quadratic form came out negative from rounding and was set to 0.
    pub variance_clamped: bool,
    /// A Zou radicand was negative and was set to 0.
    pub radicand_clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub method: Method,
    /// Point estimate; NaN when the MCC itself is undefined.
    pub estimate: f64,
    /// Lower limit; NaN when `na` is set.
    pub lower: f64,
    /// Upper limit; NaN when `na` is set.
    pub upper: f64,
    pub level: f64,
    pub na: Option<NaReason>,
    pub diagnostics: Diagnostics,
}

impl ConfidenceInterval {
    pub(crate) fn na(method: Method, estimate: f64, level: f64, reason: NaReason) -> Self {
        Self {
            method,
            estimate,
            lower: f64::NAN,
            upper: f64::NAN,
            level,
            na: Some(reason),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn is_na(&self) -> bool {
        self.na.is_some()
    }

    /// Closed-interval containment, `None` for NA intervals.
    pub fn contains(&self, value: f64) -> Option<bool> {
        match self.na {
            Some(_) => None,
            None => Some(self.lower <= value && value <= self.upper),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Symmetric `K x K` covariance matrix of a multinomial proportion vector,
/// `diag(p) - p p^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMatrix<const K: usize>(pub [[f64; K]; K]);

pub type CovMatrix4 = CovMatrix<4>;

impl<const K: usize> CovMatrix<K> {
    pub fn multinomial(p: &[f64; K]) -> Self {
        let mut m = [[0.0; K]; K];
        for i in 0..K {
            for j in 0..K {
                m[i][j] = if i == j {
                    p[i] * (1.0 - p[i])
                } else {
                    -p[i] * p[j]
                };
            }
        }
        Self(m)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    /// `g^T M h`.
    pub fn bilinear(&self, g: &[f64; K], h: &[f64; K]) -> f64 {
        self.0
            .iter()
            .zip(g)
            .map(|(row, gi)| gi * row.iter().zip(h).map(|(m, hj)| m * hj).sum::<f64>())
            .sum()
    }

    pub fn quad_form(&self, g: &[f64; K]) -> f64 {
        self.bilinear(g, g)
    }
}

/// Multinomial covariance of the four cell proportions.
pub fn sigma4(p: &ProbVec4) -> CovMatrix4 {
    CovMatrix::multinomial(p.as_array())
}

pub(crate) fn clamp_variance(v: f64) -> (f64, bool) {
    if v < 0.0 {
        (0.0, true)
    } else {
        (v, false)
    }
}

/// Asymptotic variance of `sqrt(n) (phi(p_hat) - phi(p))`: `grad^T Sigma grad`.
pub fn var_simple(p: &ProbVec4) -> Result<f64> {
    let g = mcc::grad_phi(p)?;
    Ok(clamp_variance(sigma4(p).quad_form(&g)).0)
}

fn check_level(level: f64) -> Result<f64> {
    z_two_sided(level)
}

/// Simple (delta-method) interval from proportions and an effective sample size.
///
/// Bounds are not clipped to `[-1, 1]`.
pub fn ci_single_simple_probs(p: &ProbVec4, n: f64, level: f64) -> Result<ConfidenceInterval> {
    let z = check_level(level)?;
    Ok(simple_with_z(p, n, level, z))
}

pub(crate) fn simple_with_z(p: &ProbVec4, n: f64, level: f64, z: f64) -> ConfidenceInterval {
    let method = Method::SimpleSingle;
    let (r, g) = match (mcc::phi(p), mcc::grad_phi(p)) {
        (Ok(r), Ok(g)) => (r, g),
        _ => return ConfidenceInterval::na(method, f64::NAN, level, NaReason::UndefinedMcc),
    };
    let (v, clamped) = clamp_variance(sigma4(p).quad_form(&g));
    let half = z * (v / n).sqrt();
    ConfidenceInterval {
        method,
        estimate: r,
        lower: r - half,
        upper: r + half,
        level,
        na: None,
        diagnostics: Diagnostics {
            variance_clamped: clamped,
            ..Default::default()
        },
    }
}

pub fn ci_single_simple(c: &CountsTable4, level: f64) -> Result<ConfidenceInterval> {
    let (p, n) = counts_to_probs(c)?;
    ci_single_simple_probs(&p, n as f64, level)
}

/// How the variance on the z-scale is obtained.
#[derive(Debug, Clone, Copy)]
pub(crate) enum ZVariance {
    /// Delta method through `f o phi`.
    Delta,
    /// `1 / (n - 3)`.
    Naive,
}

pub(crate) fn fisher_with_z(
    p: &ProbVec4,
    n: f64,
    level: f64,
    z: f64,
    kind: ZVariance,
) -> ConfidenceInterval {
    let method = match kind {
        ZVariance::Delta => Method::FisherZ,
        ZVariance::Naive => Method::FisherZNaive,
    };
    let r = match mcc::phi(p) {
        Ok(r) => r,
        Err(_) => return ConfidenceInterval::na(method, f64::NAN, level, NaReason::UndefinedMcc),
    };
    let center = match mcc::fisher_f(r) {
        Ok(c) => c,
        Err(_) => return ConfidenceInterval::na(method, r, level, NaReason::TransformBoundary),
    };
    let mut diagnostics = Diagnostics::default();
    let var_z = match kind {
        ZVariance::Delta => {
            // grad(f o phi) = f'(phi) grad(phi)
            let scale = mcc::fisher_f_prime(r);
            let g = mcc::grad_phi(p)
                .expect("margins checked by phi")
                .map(|x| scale * x);
            let (v, clamped) = clamp_variance(sigma4(p).quad_form(&g));
            diagnostics.variance_clamped = clamped;
            v / n
        }
        ZVariance::Naive => 1.0 / (n - 3.0),
    };
    let half = z * var_z.sqrt();
    ConfidenceInterval {
        method,
        estimate: r,
        lower: mcc::fisher_f_inv(center - half),
        upper: mcc::fisher_f_inv(center + half),
        level,
        na: None,
        diagnostics,
    }
}

pub fn ci_single_fisher_probs(p: &ProbVec4, n: f64, level: f64) -> Result<ConfidenceInterval> {
    let z = check_level(level)?;
    Ok(fisher_with_z(p, n, level, z, ZVariance::Delta))
}

/// Fisher's z interval with delta-method variance.
pub fn ci_single_fisher(c: &CountsTable4, level: f64) -> Result<ConfidenceInterval> {
    let (p, n) = counts_to_probs(c)?;
    ci_single_fisher_probs(&p, n as f64, level)
}

/// Fisher's z interval with the normal-theory variance `1/(n-3)`; needs `n >= 4`.
pub fn ci_single_fisher_naive(c: &CountsTable4, level: f64) -> Result<ConfidenceInterval> {
    let (p, n) = counts_to_probs(c)?;
    if n <= 3 {
        return Err(Error::InvalidN { n, min: 4 });
    }
    let z = check_level(level)?;
    Ok(fisher_with_z(&p, n as f64, level, z, ZVariance::Naive))
}

/// Dispatch on a single-MCC method.
pub fn ci_single(c: &CountsTable4, level: f64, method: Method) -> Result<ConfidenceInterval> {
    match method {
        Method::SimpleSingle => ci_single_simple(c, level),
        Method::FisherZ => ci_single_fisher(c, level),
        Method::FisherZNaive => ci_single_fisher_naive(c, level),
        other => Err(Error::InvalidParameter(format!(
            "`{other}` is a paired method"
        ))),
    }
}
