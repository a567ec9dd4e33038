//! Standard normal and Gumbel distribution functions.

use core::f64::consts::FRAC_1_SQRT_2;

use crate::error::{domain, Result};

/// `1/√(2π)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Φ(x) without input validation.
///
/// Evaluated as `erfc(-x/√2)/2`, so the lower tail never goes through
/// `1 - something` and keeps full relative accuracy.
#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal distribution function Φ(x), absolute error below 1e-15.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain!("std_normal_cdf needs a finite argument, got {x}"));
    }
    Ok(phi(x))
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Gumbel distribution function `exp(-e^{-τ})`.
pub fn gumbel_cdf(tau: f64) -> Result<f64> {
    if !tau.is_finite() {
        return Err(domain!("gumbel_cdf needs a finite argument, got {tau}"));
    }
    Ok(libm::exp(-libm::exp(-tau)))
}

/// Gumbel quantile `-log(-log p)` for `p ∈ (0, 1)`.
pub fn gumbel_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain!("gumbel_quantile needs p in (0,1), got {p}"));
    }
    Ok(-libm::log(-libm::log(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // mpmath, 40 digits: ncdf(-1)
    const PHI_MINUS_ONE: f64 = 0.158_655_253_931_457_05;

    #[test]
    fn phi_at_zero_is_half() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
    }

    #[test]
    fn phi_symmetry() {
        for x in [0.5, 1.0, 3.0] {
            let s = std_normal_cdf(x).unwrap() + std_normal_cdf(-x).unwrap();
            assert!((s - 1.0).abs() <= 2e-16, "x={x} sum={s}");
        }
    }

    #[test]
    fn phi_minus_one_golden() {
        let v = std_normal_cdf(-1.0).unwrap();
        assert!((v - PHI_MINUS_ONE).abs() <= 1e-15, "{v}");
    }

    #[test]
    fn phi_deep_tail_keeps_relative_accuracy() {
        // mpmath: ncdf(-6) = 9.8658764503769814e-10
        let v = std_normal_cdf(-6.0).unwrap();
        assert!((v / 9.865_876_450_376_981e-10 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn non_finite_inputs_rejected() {
        assert!(matches!(
            std_normal_cdf(f64::NAN),
            Err(crate::Error::Domain(_))
        ));
        assert!(std_normal_cdf(f64::INFINITY).is_err());
        assert!(gumbel_cdf(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn gumbel_reference_points() {
        assert!((gumbel_cdf(0.0).unwrap() - 0.367_879_441_171_442_33).abs() < 1e-16);
        assert_eq!(gumbel_cdf(50.0).unwrap(), 1.0);
        let median = -libm::log(libm::log(2.0));
        assert!((gumbel_cdf(median).unwrap() - 0.5).abs() < 1e-15);
        assert!((gumbel_quantile(0.5).unwrap() - median).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn phi_nondecreasing_and_bounded(x in -40.0f64..40.0, dx in 0.0f64..1.0) {
            let lo = std_normal_cdf(x).unwrap();
            let hi = std_normal_cdf(x + dx).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!(lo <= hi);
        }

        #[test]
        fn gumbel_strictly_increasing(t in -3.0f64..3.0, dt in 1e-3f64..1.0) {
            prop_assert!(gumbel_cdf(t).unwrap() < gumbel_cdf(t + dt).unwrap());
        }
    }
}
