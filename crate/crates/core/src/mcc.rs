//! The Matthews correlation coefficient on a 2x2 table of joint cell
//! probabilities, its variance-stabilizing transforms, and exact gradients.
//!
//! Cells are ordered `(p11, p10, p01, p00)` where the first index is the
//! prediction and the second the truth, so `p11 = TP`, `p10 = FP`,
//! `p01 = FN`, `p00 = TN`.

use crate::error::{Error, Margin, Result};

/// Tolerance on `|sum - 1|` accepted when constructing a probability vector.
pub const SIMPLEX_TOL: f64 = 1e-12;

pub(crate) fn check_simplex(cells: &[f64]) -> Result<()> {
    for (i, &c) in cells.iter().enumerate() {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::NotSimplex(format!("cell {i} is {c}")));
        }
    }
    let sum: f64 = cells.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::NotSimplex(format!("cells sum to {sum}")));
    }
    Ok(())
}

/// Joint probabilities of one classifier's prediction and the true label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbVec4([f64; 4]);

impl ProbVec4 {
    pub fn new(p11: f64, p10: f64, p01: f64, p00: f64) -> Result<Self> {
        Self::from_array([p11, p10, p01, p00])
    }

    /// Rejects vectors with negative or non-finite cells, or whose sum is off
    /// by more than [`SIMPLEX_TOL`]. Nothing is renormalized.
    pub fn from_array(cells: [f64; 4]) -> Result<Self> {
        check_simplex(&cells)?;
        Ok(Self(cells))
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn p11(&self) -> f64 {
        self.0[0]
    }
    pub fn p10(&self) -> f64 {
        self.0[1]
    }
    pub fn p01(&self) -> f64 {
        self.0[2]
    }
    pub fn p00(&self) -> f64 {
        self.0[3]
    }

    /// Margins in the order `(p1+, p0+, p+1, p+0)`.
    pub fn margins(&self) -> Margins {
        let [p11, p10, p01, p00] = self.0;
        Margins {
            pred_pos: p11 + p10,
            pred_neg: p01 + p00,
            actual_pos: p11 + p01,
            actual_neg: p10 + p00,
        }
    }

    /// First margin that is exactly zero, if any.
    pub fn zero_margin(&self) -> Option<Margin> {
        self.margins().first_zero()
    }

    /// True when all four margins are strictly positive, i.e. the MCC is defined.
    pub fn is_interior(&self) -> bool {
        self.zero_margin().is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub pred_pos: f64,
    pub pred_neg: f64,
    pub actual_pos: f64,
    pub actual_neg: f64,
}

impl Margins {
    fn first_zero(&self) -> Option<Margin> {
        // Exact comparison: zero margins come from zero integer counts.
        if self.pred_pos == 0.0 {
            Some(Margin::PredictedPositive)
        } else if self.pred_neg == 0.0 {
            Some(Margin::PredictedNegative)
        } else if self.actual_pos == 0.0 {
            Some(Margin::ActualPositive)
        } else if self.actual_neg == 0.0 {
            Some(Margin::ActualNegative)
        } else {
            None
        }
    }

    /// `sqrt(p1+ p0+ p+1 p+0)` evaluated as `exp(sum(ln m) / 2)`.
    fn root_product(&self) -> f64 {
        (0.5 * (self.pred_pos.ln()
            + self.pred_neg.ln()
            + self.actual_pos.ln()
            + self.actual_neg.ln()))
        .exp()
    }
}

/// Observed confusion-table counts `(TP, FP, FN, TN)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CountsTable4 {
    pub c11: u64,
    pub c10: u64,
    pub c01: u64,
    pub c00: u64,
}

impl CountsTable4 {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self {
            c11: tp,
            c10: fp,
            c01: fn_,
            c00: tn,
        }
    }

    pub fn from_array(c: [u64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn as_array(&self) -> [u64; 4] {
        [self.c11, self.c10, self.c01, self.c00]
    }

    pub fn total(&self) -> u64 {
        self.c11 + self.c10 + self.c01 + self.c00
    }
}

/// Empirical proportions `c / n` and the sample size.
pub fn counts_to_probs(c: &CountsTable4) -> Result<(ProbVec4, u64)> {
    let n = c.total();
    if n == 0 {
        return Err(Error::InvalidN { n, min: 1 });
    }
    let nf = n as f64;
    let p = c.as_array().map(|x| x as f64 / nf);
    Ok((ProbVec4::from_array(p)?, n))
}

/// The MCC of a probability table.
///
/// Tables with both off-diagonal cells zero return exactly `1`, and tables with
/// both diagonal cells zero exactly `-1`, so callers can detect the transform
/// boundary by equality.
pub fn phi(p: &ProbVec4) -> Result<f64> {
    let m = p.margins();
    if let Some(which) = m.first_zero() {
        return Err(Error::MarginZero(which));
    }
    let [p11, p10, p01, p00] = *p.as_array();
    if p10 == 0.0 && p01 == 0.0 {
        return Ok(1.0);
    }
    if p11 == 0.0 && p00 == 0.0 {
        return Ok(-1.0);
    }
    let r = (p11 * p00 - p10 * p01) / m.root_product();
    Ok(r.clamp(-1.0, 1.0))
}

/// Gradient of [`phi`] with respect to `(p11, p10, p01, p00)`.
pub fn grad_phi(p: &ProbVec4) -> Result<[f64; 4]> {
    let r = phi(p)?;
    let m = p.margins();
    let d = m.root_product();
    let [p11, p10, p01, p00] = *p.as_array();
    let (r1, r0, c1, c0) = (m.pred_pos, m.pred_neg, m.actual_pos, m.actual_neg);
    Ok([
        p00 / d - (r1 + c1) / (2.0 * r1 * c1) * r,
        -p01 / d - (r1 + c0) / (2.0 * r1 * c0) * r,
        -p10 / d - (c1 + r0) / (2.0 * c1 * r0) * r,
        p11 / d - (r0 + c0) / (2.0 * r0 * c0) * r,
    ])
}

/// Fisher's z transform, `artanh(x)`, on `(-1, 1)`.
pub fn fisher_f(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() >= 1.0 {
        return Err(Error::OutOfDomain {
            value: x,
            bound: 1.0,
        });
    }
    Ok(x.atanh())
}

/// Derivative of [`fisher_f`], `1 / (1 - x^2)`.
pub fn fisher_f_prime(x: f64) -> f64 {
    1.0 / (1.0 - x * x)
}

pub fn fisher_f_inv(z: f64) -> f64 {
    z.tanh()
}

/// Fisher's z transform of half a difference of correlations, on `(-2, 2)`.
pub fn g_half(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() >= 2.0 {
        return Err(Error::OutOfDomain {
            value: x,
            bound: 2.0,
        });
    }
    Ok((0.5 * x).atanh())
}

/// Derivative of [`g_half`], `2 / (4 - x^2)`.
pub fn g_half_prime(x: f64) -> f64 {
    2.0 / (4.0 - x * x)
}

pub fn g_half_inv(z: f64) -> f64 {
    2.0 * z.tanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phi_of_scenario_row() {
        let p = ProbVec4::new(0.0794, 0.1853, 0.0206, 0.7147).unwrap();
        assert!((phi(&p).unwrap() - 0.4).abs() < 1e-3);
    }

    #[test]
    fn phi_independence_is_zero() {
        let p = ProbVec4::new(0.25, 0.25, 0.25, 0.25).unwrap();
        assert_eq!(phi(&p).unwrap(), 0.0);
    }

    #[test]
    fn phi_from_sensitivity_specificity() {
        let p = ProbVec4::new(0.4, 0.144, 0.1, 0.356).unwrap();
        assert!((phi(&p).unwrap() - 0.514).abs() < 5e-4);
    }

    #[test]
    fn phi_reports_zero_margin() {
        let (p, _) = counts_to_probs(&CountsTable4::new(0, 5, 0, 5)).unwrap();
        assert!(!p.is_interior());
        assert_eq!(phi(&p), Err(Error::MarginZero(Margin::ActualPositive)));
    }

    #[test]
    fn phi_perfect_tables_are_exact() {
        let (p, _) = counts_to_probs(&CountsTable4::new(3, 0, 0, 7)).unwrap();
        assert_eq!(phi(&p).unwrap(), 1.0);
        let (p, _) = counts_to_probs(&CountsTable4::new(0, 3, 7, 0)).unwrap();
        assert_eq!(phi(&p).unwrap(), -1.0);
    }

    #[test]
    fn grad_at_uniform() {
        let p = ProbVec4::new(0.25, 0.25, 0.25, 0.25).unwrap();
        let g = grad_phi(&p).unwrap();
        for (a, b) in g.iter().zip([1.0, -1.0, -1.0, 1.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn simplex_is_validated_not_renormalized() {
        assert!(ProbVec4::new(0.3, 0.3, 0.3, 0.3).is_err());
        assert!(ProbVec4::new(-0.1, 0.5, 0.3, 0.3).is_err());
        assert!(ProbVec4::new(f64::NAN, 0.5, 0.25, 0.25).is_err());
        assert!(ProbVec4::new(0.25, 0.25, 0.25, 0.25 + 5e-13).is_ok());
    }

    #[test]
    fn counts_to_probs_basic() {
        let (p, n) = counts_to_probs(&CountsTable4::new(1, 1, 1, 1)).unwrap();
        assert_eq!(n, 4);
        assert_eq!(p.as_array(), &[0.25; 4]);
        let (p, n) = counts_to_probs(&CountsTable4::new(40, 14, 10, 36)).unwrap();
        assert_eq!(n, 100);
        assert!(p.is_interior());
        assert!(matches!(
            counts_to_probs(&CountsTable4::default()),
            Err(Error::InvalidN { n: 0, .. })
        ));
    }

    #[test]
    fn fisher_values_and_domain() {
        assert_eq!(fisher_f(0.0).unwrap(), 0.0);
        assert_relative_eq!(fisher_f(0.5).unwrap(), 0.5493061443340549, epsilon = 1e-12);
        assert!(fisher_f(0.9999).unwrap().is_finite());
        assert!(fisher_f(1.0).is_err());
        assert!(fisher_f(-1.0).is_err());
        assert_eq!(fisher_f_inv(0.0), 0.0);
        assert_relative_eq!(fisher_f_inv(0.5493061443340549), 0.5, epsilon = 1e-12);
        assert_eq!(fisher_f_inv(1e300), 1.0);
        assert_eq!(fisher_f_inv(-1e300), -1.0);
    }

    #[test]
    fn g_half_values_and_domain() {
        assert_eq!(g_half(0.0).unwrap(), 0.0);
        assert_relative_eq!(g_half(1.0).unwrap(), 0.5 * 3f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(g_half_inv(g_half(1.7).unwrap()), 1.7, epsilon = 1e-12);
        assert!(g_half(2.0).is_err());
        assert!(g_half(-2.5).is_err());
        // literal definition
        let x: f64 = 0.73;
        let direct = 0.5 * ((2.0 + x) / (2.0 - x)).ln();
        assert_relative_eq!(g_half(x).unwrap(), direct, epsilon = 1e-14);
    }
}
