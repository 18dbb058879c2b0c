//! Confidence intervals for `MCC[h1] - MCC[h2]` when both classifiers are
//! scored on the same sample.
//!
//! The eight joint cells `p_ijk` (h1 prediction `i`, h2 prediction `j`, truth
//! `k`) are stored in the order
//! `(p111, p110, p101, p100, p011, p010, p001, p000)`.

use crate::error::{Classifier, Error, Result};
use crate::mcc::{self, check_simplex, CountsTable4, ProbVec4};
use crate::normal::z_two_sided;
use crate::single::{
    self, clamp_variance, ConfidenceInterval, CovMatrix, Diagnostics, Method, NaReason, ZVariance,
};

pub type CovMatrix8 = CovMatrix<8>;

/// Labels of the eight cells, in storage order.
pub const CELL_NAMES: [&str; 8] = [
    "p111", "p110", "p101", "p100", "p011", "p010", "p001", "p000",
];

/// For each joint cell, the h1 confusion cell (TP, FP, FN, TN as 0..4) it feeds.
const H1_CELL: [usize; 8] = [0, 1, 0, 1, 2, 3, 2, 3];
/// For each joint cell, the h2 confusion cell it feeds.
const H2_CELL: [usize; 8] = [0, 1, 2, 3, 0, 1, 2, 3];
/// Joint-cell permutation exchanging the roles of h1 and h2.
const SWAP: [usize; 8] = [0, 1, 4, 5, 2, 3, 6, 7];

/// Index of `p_ijk` for binary `i, j, k`.
pub fn cell_index(i: u8, j: u8, k: u8) -> usize {
    4 * (1 - i as usize) + 2 * (1 - j as usize) + (1 - k as usize)
}

fn marginalize<T: Copy + Default + std::ops::AddAssign>(
    cells: &[T; 8],
    map: &[usize; 8],
) -> [T; 4] {
    let mut out = [T::default(); 4];
    for (c, &m) in cells.iter().zip(map) {
        out[m] += *c;
    }
    out
}

fn swap_cells<T: Copy>(cells: &[T; 8]) -> [T; 8] {
    std::array::from_fn(|i| cells[SWAP[i]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbVec8([f64; 8]);

impl ProbVec8 {
    pub fn from_array(cells: [f64; 8]) -> Result<Self> {
        check_simplex(&cells)?;
        Ok(Self(cells))
    }

    pub fn as_array(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn get(&self, i: u8, j: u8, k: u8) -> f64 {
        self.0[cell_index(i, j, k)]
    }

    /// The same joint distribution with h1 and h2 relabelled.
    pub fn swap_classifiers(&self) -> Self {
        Self(swap_cells(&self.0))
    }

    pub fn h1(&self) -> ProbVec4 {
        marginal4(marginalize(&self.0, &H1_CELL))
    }

    pub fn h2(&self) -> ProbVec4 {
        marginal4(marginalize(&self.0, &H2_CELL))
    }
}

fn marginal4(cells: [f64; 4]) -> ProbVec4 {
    // Sums of a valid 8-simplex point stay within tolerance of the 4-simplex.
    ProbVec4::from_array(cells).expect("marginal of a simplex point")
}

/// Observed joint counts in [`ProbVec8`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CountsTable8(pub [u64; 8]);

impl CountsTable8 {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn h1(&self) -> CountsTable4 {
        CountsTable4::from_array(marginalize(&self.0, &H1_CELL))
    }

    pub fn h2(&self) -> CountsTable4 {
        CountsTable4::from_array(marginalize(&self.0, &H2_CELL))
    }

    pub fn swap_classifiers(&self) -> Self {
        Self(swap_cells(&self.0))
    }

    pub fn to_probs(&self) -> Result<(ProbVec8, u64)> {
        let n = self.total();
        if n == 0 {
            return Err(Error::InvalidN { n, min: 1 });
        }
        let nf = n as f64;
        Ok((ProbVec8::from_array(self.0.map(|c| c as f64 / nf))?, n))
    }
}

/// The two induced confusion tables `(h1, h2)`.
pub fn marginals(p: &ProbVec8) -> (ProbVec4, ProbVec4) {
    (p.h1(), p.h2())
}

fn phi_of(which: Classifier, m: &ProbVec4) -> Result<f64> {
    mcc::phi(m).map_err(|e| match e {
        Error::MarginZero(margin) => Error::PairedMarginZero {
            classifier: which,
            margin,
        },
        other => other,
    })
}

fn both_mcc(p: &ProbVec8) -> Result<(f64, f64)> {
    let (m1, m2) = marginals(p);
    Ok((
        phi_of(Classifier::First, &m1)?,
        phi_of(Classifier::Second, &m2)?,
    ))
}

/// `MCC[h1] - MCC[h2]`.
pub fn psi(p: &ProbVec8) -> Result<f64> {
    let (r1, r2) = both_mcc(p)?;
    Ok(r1 - r2)
}

/// Closed-form gradient of [`psi`] over the eight joint cells.
///
/// Each partial is the h1 contribution (through `D1`) minus the h2
/// contribution (through `D2`), written in terms of the marginal sums.
pub fn grad_psi(p: &ProbVec8) -> Result<[f64; 8]> {
    let (mcc1, mcc2) = both_mcc(p)?;
    let q = p.as_array();
    let s = |ix: &[usize]| ix.iter().map(|&i| q[i]).sum::<f64>();

    // one-index margins
    let t1 = s(&[0, 2, 4, 6]); // p++1
    let t0 = s(&[1, 3, 5, 7]); // p++0
    let a1 = s(&[0, 1, 2, 3]); // p1++
    let a0 = s(&[4, 5, 6, 7]); // p0++
    let b1 = s(&[0, 1, 4, 5]); // p+1+
    let b0 = s(&[2, 3, 6, 7]); // p+0+
                               // two-index margins
    let a1t1 = s(&[0, 2]); // p1+1
    let a1t0 = s(&[1, 3]); // p1+0
    let a0t1 = s(&[4, 6]); // p0+1
    let a0t0 = s(&[5, 7]); // p0+0
    let b1t1 = s(&[0, 4]); // p+11
    let b1t0 = s(&[1, 5]); // p+10
    let b0t1 = s(&[2, 6]); // p+01
    let b0t0 = s(&[3, 7]); // p+00

    let d1 = (0.5 * (t1.ln() + a1.ln() + a0.ln() + t0.ln())).exp();
    let d2 = (0.5 * (t1.ln() + b1.ln() + b0.ln() + t0.ln())).exp();
    let w = |x: f64, y: f64| (x + y) / (2.0 * x * y);

    Ok([
        a0t0 / d1 - w(t1, a1) * mcc1 - b0t0 / d2 + w(t1, b1) * mcc2,
        -a0t1 / d1 - w(a1, t0) * mcc1 + b0t1 / d2 + w(b1, t0) * mcc2,
        a0t0 / d1 - w(t1, a1) * mcc1 + b1t0 / d2 + w(t1, b0) * mcc2,
        -a0t1 / d1 - w(a1, t0) * mcc1 - b1t1 / d2 + w(b0, t0) * mcc2,
        -a1t0 / d1 - w(t1, a0) * mcc1 - b0t0 / d2 + w(t1, b1) * mcc2,
        a1t1 / d1 - w(a0, t0) * mcc1 + b0t1 / d2 + w(b1, t0) * mcc2,
        -a1t0 / d1 - w(t1, a0) * mcc1 + b1t0 / d2 + w(t1, b0) * mcc2,
        a1t1 / d1 - w(a0, t0) * mcc1 - b1t1 / d2 + w(b0, t0) * mcc2,
    ])
}

/// Jacobian of `(MCC[h1], MCC[h2])` over the joint cells, as two columns,
/// built from [`mcc::grad_phi`] and the marginalization map.
pub fn psi_tilde_jacobian(p: &ProbVec8) -> Result<[[f64; 8]; 2]> {
    let (m1, m2) = marginals(p);
    phi_of(Classifier::First, &m1)?;
    phi_of(Classifier::Second, &m2)?;
    let g1 = mcc::grad_phi(&m1)?;
    let g2 = mcc::grad_phi(&m2)?;
    Ok([
        std::array::from_fn(|i| g1[H1_CELL[i]]),
        std::array::from_fn(|i| g2[H2_CELL[i]]),
    ])
}

/// Multinomial covariance of the eight joint proportions.
pub fn sigma8(p: &ProbVec8) -> CovMatrix8 {
    CovMatrix::multinomial(p.as_array())
}

/// Point estimates of both MCCs and the delta-method correlation between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedMccEstimates {
    pub r1: f64,
    pub r2: f64,
    /// Correlation clamped to `[-1, 1]`.
    pub corr: f64,
    /// Limit covariance matrix of `sqrt(n) (r1, r2)`.
    pub cov: [[f64; 2]; 2],
}

pub fn corr_mcc_pair(p: &ProbVec8) -> Result<PairedMccEstimates> {
    let (r1, r2) = both_mcc(p)?;
    let [j1, j2] = psi_tilde_jacobian(p)?;
    let s = sigma8(p);
    let v1 = s.quad_form(&j1);
    let v2 = s.quad_form(&j2);
    let c12 = s.bilinear(&j1, &j2);
    if v1 <= 0.0 {
        return Err(Error::ZeroVariance(Classifier::First));
    }
    if v2 <= 0.0 {
        return Err(Error::ZeroVariance(Classifier::Second));
    }
    let corr = (c12 / (v1 * v2).sqrt()).clamp(-1.0, 1.0);
    Ok(PairedMccEstimates {
        r1,
        r2,
        corr,
        cov: [[v1, c12], [c12, v2]],
    })
}

pub(crate) fn simple_paired_with_z(p: &ProbVec8, n: f64, level: f64, z: f64) -> ConfidenceInterval {
    let method = Method::SimplePaired;
    let (d, g) = match (psi(p), grad_psi(p)) {
        (Ok(d), Ok(g)) => (d, g),
        _ => return ConfidenceInterval::na(method, f64::NAN, level, NaReason::UndefinedMcc),
    };
    let (v, clamped) = clamp_variance(sigma8(p).quad_form(&g));
    let half = z * (v / n).sqrt();
    ConfidenceInterval {
        method,
        estimate: d,
        lower: d - half,
        upper: d + half,
        level,
        na: None,
        diagnostics: Diagnostics {
            variance_clamped: clamped,
            ..Default::default()
        },
    }
}

pub(crate) fn mt_with_z(p: &ProbVec8, n: f64, level: f64, z: f64) -> ConfidenceInterval {
    let method = Method::Mt;
    let (d, g) = match (psi(p), grad_psi(p)) {
        (Ok(d), Ok(g)) => (d, g),
        _ => return ConfidenceInterval::na(method, f64::NAN, level, NaReason::UndefinedMcc),
    };
    let center = match mcc::g_half(d) {
        Ok(c) => c,
        Err(_) => return ConfidenceInterval::na(method, d, level, NaReason::TransformBoundary),
    };
    // grad(g o psi) = g'(psi) grad(psi)
    let scale = mcc::g_half_prime(d);
    let g = g.map(|x| scale * x);
    let (v, clamped) = clamp_variance(sigma8(p).quad_form(&g));
    let half = z * (v / n).sqrt();
    ConfidenceInterval {
        method,
        estimate: d,
        lower: mcc::g_half_inv(center - half),
        upper: mcc::g_half_inv(center + half),
        level,
        na: None,
        diagnostics: Diagnostics {
            variance_clamped: clamped,
            ..Default::default()
        },
    }
}

fn clamped_root(x: f64) -> (f64, bool) {
    if x < 0.0 {
        (0.0, true)
    } else {
        (x.sqrt(), false)
    }
}

/// Zou's lower and upper limits from the per-classifier limits `(l, u)`,
/// point estimates and their correlation. The second tuple element reports
/// whether a negative radicand had to be clamped.
pub fn zou_limits(
    r1: f64,
    (l1, u1): (f64, f64),
    r2: f64,
    (l2, u2): (f64, f64),
    corr: f64,
) -> ((f64, f64), bool) {
    let d = r1 - r2;
    let (a, b) = (r1 - l1, u2 - r2);
    let (lo, c1) = clamped_root(a * a + b * b - 2.0 * corr * a * b);
    let (a, b) = (u1 - r1, r2 - l2);
    let (hi, c2) = clamped_root(a * a + b * b - 2.0 * corr * a * b);
    ((d - lo, d + hi), c1 || c2)
}

pub(crate) fn zou_with_z(p: &ProbVec8, n: f64, level: f64, z: f64) -> ConfidenceInterval {
    let method = Method::Zou;
    let (m1, m2) = marginals(p);
    let (r1, r2) = match both_mcc(p) {
        Ok(r) => r,
        Err(_) => return ConfidenceInterval::na(method, f64::NAN, level, NaReason::UndefinedMcc),
    };
    let f1 = single::fisher_with_z(&m1, n, level, z, ZVariance::Delta);
    let f2 = single::fisher_with_z(&m2, n, level, z, ZVariance::Delta);
    if f1.is_na() || f2.is_na() {
        return ConfidenceInterval::na(method, r1 - r2, level, NaReason::TransformBoundary);
    }
    let est = match corr_mcc_pair(p) {
        Ok(e) => e,
        Err(_) => {
            return ConfidenceInterval::na(method, r1 - r2, level, NaReason::TransformBoundary)
        }
    };
    let ((lower, upper), radicand_clamped) =
        zou_limits(r1, (f1.lower, f1.upper), r2, (f2.lower, f2.upper), est.corr);
    ConfidenceInterval {
        method,
        estimate: r1 - r2,
        lower,
        upper,
        level,
        na: None,
        diagnostics: Diagnostics {
            variance_clamped: f1.diagnostics.variance_clamped || f2.diagnostics.variance_clamped,
            radicand_clamped,
        },
    }
}

/// Paired interval from joint proportions and an effective sample size, which
/// need not be an integer.
pub fn ci_paired_probs(
    p: &ProbVec8,
    n: f64,
    level: f64,
    method: Method,
) -> Result<ConfidenceInterval> {
    let z = z_two_sided(level)?;
    if n.is_nan() || n <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sample size {n} must be positive"
        )));
    }
    match method {
        Method::SimplePaired => Ok(simple_paired_with_z(p, n, level, z)),
        Method::Zou => Ok(zou_with_z(p, n, level, z)),
        Method::Mt => Ok(mt_with_z(p, n, level, z)),
        other => Err(Error::InvalidParameter(format!(
            "`{other}` is a single-MCC method"
        ))),
    }
}

pub fn ci_paired(c: &CountsTable8, level: f64, method: Method) -> Result<ConfidenceInterval> {
    let (p, n) = c.to_probs()?;
    ci_paired_probs(&p, n as f64, level, method)
}

pub fn ci_paired_simple(c: &CountsTable8, level: f64) -> Result<ConfidenceInterval> {
    ci_paired(c, level, Method::SimplePaired)
}

pub fn ci_paired_zou(c: &CountsTable8, level: f64) -> Result<ConfidenceInterval> {
    ci_paired(c, level, Method::Zou)
}

pub fn ci_paired_mt(c: &CountsTable8, level: f64) -> Result<ConfidenceInterval> {
    ci_paired(c, level, Method::Mt)
}
