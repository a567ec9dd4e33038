//! Asymptotic extreme-value rates.
//!
//! A family of unit-variance fields has rate `f` when its supremum normalizes
//! with the i.i.d. constants evaluated at `f(n)`. The seven rows below are the
//! rates of the i.i.d. maximum, the Darling–Erdős maxima (discrete and
//! Brownian), the scan statistic, the Brownian modulus with `x₂-x₁ ≥ 1/n`, the
//! Erdős–Rényi window and the fixed-lag Brownian modulus.

use alloc::vec::Vec;

use crate::error::{argument, domain, Result};
use crate::normalization::{cached_h, erdos_renyi_coef, iid_location_from_log, LOG_2_SQRT_PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTableEntry {
    pub row_id: u8,
    pub coef: f64,
    pub n_power: u8,
    pub log_power: u8,
    pub has_loglog: bool,
}

impl RateTableEntry {
    /// Row `row_id ∈ 1..=7` of the table; `c` is needed for row 6 only.
    pub fn row(row_id: u8, c: Option<f64>) -> Result<Self> {
        let (coef, n_power, log_power, has_loglog) = match row_id {
            1 => (1.0, 1, 0, false),
            2 | 3 => (1.0, 0, 1, true),
            4 => (cached_h()?, 1, 1, false),
            5 => (1.0, 1, 2, false),
            6 => {
                let c = c.ok_or_else(|| argument!("rate row 6 needs the window constant c"))?;
                (erdos_renyi_coef(c)?, 1, 0, false)
            }
            7 => (1.0, 1, 1, false),
            _ => return Err(domain!("rate table rows are 1..=7, got {row_id}")),
        };
        Ok(Self {
            row_id,
            coef,
            n_power,
            log_power,
            has_loglog,
        })
    }

    /// Human-readable form of `f(n)`.
    pub fn formula(&self) -> &'static str {
        match self.row_id {
            1 => "n",
            2 | 3 => "log n log log n",
            4 => "H n log n",
            5 => "n log^2 n",
            6 => "(4/c) F(4/c) n",
            _ => "n log n",
        }
    }

    /// The field whose rate this row records.
    pub fn field(&self) -> &'static str {
        match self.row_id {
            1 => "X_k, k in {1..n}",
            2 => "S_k/sqrt(k), k in {1..n}",
            3 => "B(x)/sqrt(x), x in [1,n]",
            4 => "(S_j-S_i)/sqrt(j-i), 0<=i<j<=n",
            5 => "(B(x2)-B(x1))/sqrt(x2-x1), x2-x1>=1/n",
            6 => "(S_{k+[c log n]}-S_k)/sqrt([c log n])",
            _ => "(B(x2)-B(x1))/sqrt(x2-x1), x2-x1=1/n",
        }
    }
}

/// `coef · n^{n_power} · (log n)^{log_power} · (log log n)^{has_loglog}`.
pub fn evr_value(entry: &RateTableEntry, n: u64) -> Result<f64> {
    if n < 16 {
        return Err(domain!("extreme-value rates need n >= 16, got {n}"));
    }
    let nf = n as f64;
    let l = libm::log(nf);
    let mut v =
        entry.coef * libm::pow(nf, entry.n_power as f64) * libm::pow(l, entry.log_power as f64);
    if entry.has_loglog {
        v *= libm::log(l);
    }
    Ok(v)
}

/// `a_{f(n)}` for `f(n) = c n (log n)^b` and its two-term expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    pub exact: f64,
    pub expanded: f64,
    pub n: u64,
}

impl Expansion {
    /// `|exact - expanded|·√(2 log n)`, the `o(1)` remainder on the `b_n` scale.
    pub fn scaled_remainder(&self) -> f64 {
        (self.exact - self.expanded).abs() * libm::sqrt(2.0 * libm::log(self.n as f64))
    }
}

pub fn expansion_check(c: f64, b: f64, n: u64) -> Result<Expansion> {
    if !(c > 0.0) || !c.is_finite() || !b.is_finite() {
        return Err(domain!(
            "expansion needs finite c > 0 and finite b, got c={c}, b={b}"
        ));
    }
    if n < 16 {
        return Err(domain!("expansion needs n >= 16, got {n}"));
    }
    let l = libm::log(n as f64);
    let ll = libm::log(l);
    let log_f = libm::log(c) + l + b * ll;
    if log_f < libm::log(3.0) {
        return Err(domain!(
            "f(n) = c n (log n)^b must be >= 3, got exp({log_f})"
        ));
    }
    let s = libm::sqrt(2.0 * l);
    Ok(Expansion {
        exact: iid_location_from_log(log_f),
        expanded: s + ((b - 0.5) * ll + libm::log(c) - LOG_2_SQRT_PI) / s,
        n,
    })
}

/// Default tolerance for [`types_equivalence_check`].
pub const TYPES_TOL: f64 = 0.05;

/// Numerical convergence-of-types test on a common grid of `n` values.
///
/// True iff `b1/b2 → 1` and `(a1 - a2)/b1 → 0`: both deviations are at most
/// `TYPES_TOL` at the last grid point and non-increasing in magnitude over the
/// second half of the grid.
pub fn types_equivalence_check(a1: &[f64], b1: &[f64], a2: &[f64], b2: &[f64]) -> Result<bool> {
    types_equivalence_check_with(a1, b1, a2, b2, TYPES_TOL)
}

pub fn types_equivalence_check_with(
    a1: &[f64],
    b1: &[f64],
    a2: &[f64],
    b2: &[f64],
    tol: f64,
) -> Result<bool> {
    let len = a1.len();
    if b1.len() != len || a2.len() != len || b2.len() != len {
        return Err(argument!(
            "sequence lengths differ: {}, {}, {}, {}",
            a1.len(),
            b1.len(),
            a2.len(),
            b2.len()
        ));
    }
    if len == 0 {
        return Err(argument!("sequences are empty"));
    }
    if b1.iter().chain(b2).any(|&b| !(b > 0.0)) {
        return Err(domain!("scale sequences must be positive"));
    }
    let ratio: Vec<f64> = b1
        .iter()
        .zip(b2)
        .map(|(x, y)| (x / y - 1.0).abs())
        .collect();
    let shift: Vec<f64> = (0..len).map(|k| ((a1[k] - a2[k]) / b1[k]).abs()).collect();
    let settles = |dev: &[f64]| {
        let tail = &dev[len / 2..];
        dev[len - 1] <= tol && tail.windows(2).all(|w| w[1] <= w[0] + 1e-15)
    };
    Ok(settles(&ratio) && settles(&shift))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let r1 = RateTableEntry::row(1, None).unwrap();
        assert_eq!(evr_value(&r1, 1000).unwrap(), 1000.0);
        let n = libm::exp(10.0);
        let r5 = RateTableEntry::row(5, None).unwrap();
        let v = evr_value(&r5, n as u64).unwrap();
        let nn = (n as u64) as f64;
        assert!((v - nn * libm::pow(libm::log(nn), 2.0)).abs() / v < 1e-14);
        let r4 = RateTableEntry::row(4, None).unwrap();
        let h = cached_h().unwrap();
        let v4 = evr_value(&r4, n as u64).unwrap();
        assert!((v4 - h * nn * libm::log(nn)).abs() / v4 < 1e-14);
        assert!(RateTableEntry::row(6, None).is_err());
        assert!(RateTableEntry::row(8, None).is_err());
        assert!(evr_value(&r1, 15).is_err());
        let r2 = RateTableEntry::row(2, None).unwrap();
        let l = libm::log(1e6);
        assert!((evr_value(&r2, 1_000_000).unwrap() - l * libm::log(l)).abs() < 1e-12);
    }

    #[test]
    fn expansion_is_exact_for_identity_rate() {
        let e = expansion_check(1.0, 0.0, 1_000_000).unwrap();
        assert!((e.exact - e.expanded).abs() < 1e-14);
    }

    #[test]
    fn expansion_remainder_shrinks_for_h() {
        let h = cached_h().unwrap();
        let r4 = expansion_check(h, 1.0, 10_000).unwrap().scaled_remainder();
        let r8 = expansion_check(h, 1.0, 100_000_000)
            .unwrap()
            .scaled_remainder();
        assert!(r8 < r4);
    }

    #[test]
    fn expansion_domain() {
        assert!(expansion_check(0.0, 1.0, 100).is_err());
        assert!(expansion_check(1.0, 1.0, 10).is_err());
        assert!(expansion_check(1e-9, 0.0, 100).is_err());
    }

    fn grid() -> Vec<u64> {
        (4..=16).map(|e| libm::pow(10.0, e as f64) as u64).collect()
    }

    #[test]
    fn identical_sequences_are_equivalent() {
        let a: Vec<f64> = grid()
            .iter()
            .map(|&n| libm::sqrt(2.0 * libm::log(n as f64)))
            .collect();
        let b: Vec<f64> = a.iter().map(|x| 1.0 / x).collect();
        assert!(types_equivalence_check(&a, &b, &a, &b).unwrap());
    }

    #[test]
    fn one_scale_unit_offset_is_not_equivalent() {
        let a1: Vec<f64> = grid()
            .iter()
            .map(|&n| libm::sqrt(2.0 * libm::log(n as f64)))
            .collect();
        let b1: Vec<f64> = a1.iter().map(|x| 1.0 / x).collect();
        let a2: Vec<f64> = a1.iter().zip(&b1).map(|(a, b)| a + b).collect();
        assert!(!types_equivalence_check(&a1, &b1, &a2, &b1).unwrap());
    }

    #[test]
    fn lemma_expansion_is_type_equivalent() {
        let ns = grid();
        let (mut a1, mut a2, mut b) = (Vec::new(), Vec::new(), Vec::new());
        for &n in &ns {
            let e = expansion_check(1.0, 1.0, n).unwrap();
            a1.push(e.exact);
            a2.push(e.expanded);
            b.push(1.0 / libm::sqrt(2.0 * libm::log(n as f64)));
        }
        assert!(types_equivalence_check(&a1, &b, &a2, &b).unwrap());
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            types_equivalence_check(&[1.0], &[1.0], &[1.0, 2.0], &[1.0]),
            Err(crate::Error::Argument(_))
        ));
    }
}
