//! Closed-form transition bounds for the mixed random model.
//!
//! The satisfiable-side curve is s_lower(k, r) = ½·log₂(Λ(k, r)) with
//! Λ(k, r) = 4·(((1 − β/2)^k − 2^-k)² / (1 − β)^k)^r, where β is the
//! smallest positive root of β(2 − β)^(k−1) = 1. It is valid for
//! r < 2^k·ln 2 − ½((k+1)·ln 2 + 3). The unsatisfiable-side curve is
//! s_upper(k, r) = r·log₂(1 − 2^-k) + 1. Both are affine in r and meet at
//! s = 1 when r = 0.

use serde::Serialize;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("r = {r} is outside the lower-curve validity region (max {r_validity_max})")]
    OutOfValidity { r: f64, r_validity_max: f64 },
    #[error("curve grid must be sorted ascending")]
    UnsortedGrid,
    #[error("lower curve exceeded upper curve at r = {r}")]
    SandwichViolation { r: f64 },
}

/// Smallest positive root of β(2 − β)^(k−1) = 1, for k ≥ 3.
///
/// On (0, 2/k] the map is strictly increasing (its derivative is
/// (2 − β)^(k−2)·(2 − kβ)), so bisection converges unconditionally; the
/// interval is shrunk to adjacent floats, far below the 1e-12 contract.
pub fn beta(k: usize) -> Result<f64, BoundsError> {
    if k < 3 {
        return Err(BoundsError::InvalidParams(format!(
            "beta is defined for k >= 3, got {k}"
        )));
    }
    let residual = |b: f64| b * (2.0 - b).powi(k as i32 - 1) - 1.0;
    let mut lo = 0.0f64;
    let mut hi = 2.0 / k as f64;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if residual(lo).abs() <= residual(hi).abs() {
        lo
    } else {
        hi
    })
}

fn check_r(r: f64) -> Result<(), BoundsError> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidParams(format!(
            "r must be non-negative, got {r}"
        )))
    }
}

/// Λ(k, r) = 4·(((1 − β/2)^k − 2^-k)² / (1 − β)^k)^r.
pub fn lambda_lower(k: usize, r: f64) -> Result<f64, BoundsError> {
    check_r(r)?;
    Ok(4.0 * lambda_base(k)?.powf(r))
}

/// The r-independent inner ratio of Λ.
fn lambda_base(k: usize) -> Result<f64, BoundsError> {
    let b = beta(k)?;
    let num = ((1.0 - b / 2.0).powi(k as i32) - (0.5f64).powi(k as i32)).powi(2);
    let den = (1.0 - b).powi(k as i32);
    Ok(num / den)
}

/// Upper end of the r-range where the lower curve is proven:
/// 2^k·ln 2 − ((k+1)·ln 2 + 3)/2.
pub fn r_validity_max(k: usize) -> Result<f64, BoundsError> {
    if k < 3 {
        return Err(BoundsError::InvalidParams(format!(
            "validity region is defined for k >= 3, got {k}"
        )));
    }
    let ln2 = std::f64::consts::LN_2;
    Ok((1u64 << k) as f64 * ln2 - ((k as f64 + 1.0) * ln2 + 3.0) / 2.0)
}

/// Satisfiable-side curve ½·log₂(Λ(k, r)); errs outside the validity region.
pub fn s_lower(k: usize, r: f64) -> Result<f64, BoundsError> {
    let max = r_validity_max(k)?;
    if r >= max {
        return Err(BoundsError::OutOfValidity {
            r,
            r_validity_max: max,
        });
    }
    s_lower_unchecked(k, r)
}

/// The same line evaluated without the validity check, for extrapolation.
pub fn s_lower_unchecked(k: usize, r: f64) -> Result<f64, BoundsError> {
    check_r(r)?;
    Ok(1.0 + r / 2.0 * lambda_base(k)?.log2())
}

/// Unsatisfiable-side curve r·log₂(1 − 2^-k) + 1, for k ≥ 2.
pub fn s_upper(k: usize, r: f64) -> Result<f64, BoundsError> {
    if k < 2 {
        return Err(BoundsError::InvalidParams(format!(
            "upper curve is defined for k >= 2, got {k}"
        )));
    }
    if !(r >= 0.0) {
        return Err(BoundsError::InvalidParams(format!(
            "r must be non-negative, got {r}"
        )));
    }
    Ok(r * (1.0 - (0.5f64).powi(k as i32)).log2() + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub r: f64,
    pub s_lower: f64,
    pub s_upper: f64,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub k: usize,
    pub beta_k: f64,
    pub r_validity_max: f64,
    pub samples: Vec<CurvePoint>,
}

/// Samples both curves over a sorted r-grid. Points beyond the validity
/// region are still evaluated but flagged as extrapolated.
pub fn curve(k: usize, r_grid: &[f64]) -> Result<BoundCurve, BoundsError> {
    if r_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(BoundsError::UnsortedGrid);
    }
    let beta_k = beta(k)?;
    let max = r_validity_max(k)?;
    let mut samples = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let lower = s_lower_unchecked(k, r)?;
        let upper = s_upper(k, r)?;
        if lower > upper + 1e-12 {
            return Err(BoundsError::SandwichViolation { r });
        }
        samples.push(CurvePoint {
            r,
            s_lower: lower,
            s_upper: upper,
            extrapolated: r >= max,
        });
    }
    Ok(BoundCurve {
        k,
        beta_k,
        r_validity_max: max,
        samples,
    })
}

/// CSV rows `r,s_lower,s_upper,extrapolated`, in grid order.
pub fn write_curve_csv<W: Write>(curve: &BoundCurve, sink: &mut W) -> std::io::Result<()> {
    writeln!(sink, "r,s_lower,s_upper,extrapolated")?;
    for p in &curve.samples {
        writeln!(sink, "{},{},{},{}", p.r, p.s_lower, p.s_upper, p.extrapolated)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 50-digit arithmetic, frozen here.
    const BETA_3: f64 = 0.3819660112501051518;
    const BETA_10: f64 = 0.0019705297377133013;
    const LAMBDA_3_1: f64 = 2.7725424859373685603;
    const SLOPE_LOWER_3: f64 = -0.26439521592345674565;
    const SLOPE_UPPER_3: f64 = -0.19264507794239589256;
    const R_MAX_3: f64 = 2.6588830833596718565;

    #[test]
    fn beta_3_matches_the_closed_form() {
        let b = beta(3).unwrap();
        assert!((b - BETA_3).abs() < 1e-14);
        assert!((b - (3.0 - 5.0f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn beta_10_is_near_its_asymptote() {
        let b = beta(10).unwrap();
        assert!((b - BETA_10).abs() < 1e-14);
        assert!((b - (0.5f64).powi(9)).abs() < 2e-5);
    }

    #[test]
    fn beta_residuals_meet_the_contract() {
        for k in 3..=16 {
            let b = beta(k).unwrap();
            let residual = (b * (2.0 - b).powi(k as i32 - 1) - 1.0).abs();
            assert!(residual < 1e-12, "k = {k}: residual {residual}");
        }
    }

    #[test]
    fn beta_requires_k_at_least_3() {
        assert!(beta(2).is_err());
    }

    #[test]
    fn lambda_at_zero_density_is_four() {
        for k in [3, 5, 9, 16] {
            assert_eq!(lambda_lower(k, 0.0).unwrap(), 4.0);
        }
    }

    #[test]
    fn lambda_3_1_matches_reference() {
        assert!((lambda_lower(3, 1.0).unwrap() - LAMBDA_3_1).abs() < 1e-12);
    }

    #[test]
    fn lambda_decreases_in_r_for_k3() {
        let inner = lambda_base(3).unwrap();
        assert!(inner < 1.0);
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let v = lambda_lower(3, i as f64 * 0.25).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn curves_meet_at_one_for_r_zero() {
        for k in 3..=16 {
            assert_eq!(s_lower(k, 0.0).unwrap(), 1.0);
            assert_eq!(s_upper(k, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn slopes_match_reference_values() {
        let lower_slope = s_lower(3, 1.0).unwrap() - 1.0;
        assert!((lower_slope - SLOPE_LOWER_3).abs() < 1e-12);
        let upper_slope = s_upper(3, 1.0).unwrap() - 1.0;
        assert!((upper_slope - SLOPE_UPPER_3).abs() < 1e-12);
    }

    #[test]
    fn validity_region_matches_reference() {
        assert!((r_validity_max(3).unwrap() - R_MAX_3).abs() < 1e-12);
    }

    #[test]
    fn lower_curve_errs_beyond_validity_but_extrapolates_on_request() {
        let max = r_validity_max(3).unwrap();
        assert_eq!(
            s_lower(3, max + 0.5).unwrap_err(),
            BoundsError::OutOfValidity {
                r: max + 0.5,
                r_validity_max: max
            }
        );
        assert!(s_lower_unchecked(3, max + 0.5).is_ok());
    }

    #[test]
    fn both_curves_are_affine_in_r() {
        for k in [3usize, 8, 16] {
            for base in [0.0, 0.4, 1.1] {
                let step = 0.3;
                let l: Vec<f64> = (0..3)
                    .map(|i| s_lower_unchecked(k, base + i as f64 * step).unwrap())
                    .collect();
                assert!((l[0] + l[2] - 2.0 * l[1]).abs() < 1e-10);
                let u: Vec<f64> = (0..3)
                    .map(|i| s_upper(k, base + i as f64 * step).unwrap())
                    .collect();
                assert!((u[0] + u[2] - 2.0 * u[1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sandwich_holds_across_validity_regions() {
        for k in 3..=16 {
            let max = r_validity_max(k).unwrap();
            let grid: Vec<f64> = (0..200).map(|i| i as f64 / 200.0 * max).collect();
            let c = curve(k, &grid).unwrap();
            for p in &c.samples {
                assert!(p.s_lower <= p.s_upper + 1e-12, "k = {k}, r = {}", p.r);
                assert!(!p.extrapolated);
            }
        }
    }

    #[test]
    fn single_point_grid() {
        let c = curve(3, &[0.0]).unwrap();
        assert_eq!(c.samples.len(), 1);
        assert_eq!(c.samples[0].r, 0.0);
        assert_eq!(c.samples[0].s_lower, 1.0);
        assert_eq!(c.samples[0].s_upper, 1.0);
    }

    #[test]
    fn csv_first_row_is_origin() {
        let c = curve(3, &[0.0, 0.5, 1.0]).unwrap();
        let mut out = Vec::new();
        write_curve_csv(&c, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,s_lower,s_upper,extrapolated"));
        assert_eq!(lines.next(), Some("0,1,1,false"));
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        assert_eq!(curve(3, &[1.0, 0.5]).unwrap_err(), BoundsError::UnsortedGrid);
    }
}
