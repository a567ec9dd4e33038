//! Gumbel normalizing constants `(a_n, b_n)`.
//!
//! Every statistic here satisfies `P[M ≤ a_n + b_n τ] → exp(-e^{-τ})`. All
//! families share `b_n = 1/√(2 log n)` except Darling–Erdős, which lives on the
//! `log log n` scale.

use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{argument, domain, Result};
use crate::spitzer::{constant_h, pickands_f, HMethod};

/// Tolerance used for every constant consumed by [`normalization`].
pub const CONSTANTS_TOL: f64 = 1e-4;

/// `log(2√π)`.
pub const LOG_2_SQRT_PI: f64 = 1.265_512_123_484_645_4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theorem {
    /// Maximum of `n` i.i.d. standard normals.
    IidMax,
    /// `max_k S_k/√k`.
    DarlingErdos,
    /// `max_{i<j} (S_j - S_i)/√(j-i)`.
    MainDiscrete,
    /// Window of length `[c log n]`; carries `c`.
    ErdosRenyi(f64),
    /// Brownian increments with `x₂ - x₁ ≥ 1/n`.
    BrownianContinuous,
}

impl Theorem {
    /// Builds a theorem from its tag, with `aux` carrying `c` for `ERDOS_RENYI`.
    pub fn from_tag(tag: &str, aux: Option<f64>) -> Result<Self> {
        match tag {
            "IID_MAX" => Ok(Theorem::IidMax),
            "DARLING_ERDOS" => Ok(Theorem::DarlingErdos),
            "MAIN_DISCRETE" => Ok(Theorem::MainDiscrete),
            "BROWNIAN_CONTINUOUS" => Ok(Theorem::BrownianContinuous),
            "ERDOS_RENYI" => match aux {
                Some(c) => Ok(Theorem::ErdosRenyi(c)),
                None => Err(argument!("ERDOS_RENYI needs the window constant c")),
            },
            other => Err(argument!("unknown theorem tag {other:?}")),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Theorem::IidMax => "IID_MAX",
            Theorem::DarlingErdos => "DARLING_ERDOS",
            Theorem::MainDiscrete => "MAIN_DISCRETE",
            Theorem::ErdosRenyi(_) => "ERDOS_RENYI",
            Theorem::BrownianContinuous => "BROWNIAN_CONTINUOUS",
        }
    }

    /// Smallest `n` for which every nested logarithm in the formula is defined.
    pub fn min_n(&self) -> u64 {
        match self {
            Theorem::DarlingErdos => 16,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationPair {
    pub a_n: f64,
    pub b_n: f64,
    pub theorem: Theorem,
    pub n: u64,
}

impl NormalizationPair {
    /// `u_n = a_n + b_n τ`.
    pub fn threshold(&self, tau: f64) -> f64 {
        self.a_n + self.b_n * tau
    }

    /// `(x - a_n)/b_n`.
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.a_n) / self.b_n
    }
}

static H_CACHE: AtomicU64 = AtomicU64::new(0);

/// `H` at [`CONSTANTS_TOL`] via the A-form, computed once per process.
///
/// Concurrent first calls may both compute; they store the same bits.
pub fn cached_h() -> Result<f64> {
    let bits = H_CACHE.load(Ordering::Acquire);
    if bits != 0 {
        return Ok(f64::from_bits(bits));
    }
    let h = constant_h(CONSTANTS_TOL, HMethod::AForm)?.value;
    H_CACHE.store(h.to_bits(), Ordering::Release);
    Ok(h)
}

/// `(4/c)·F(4/c)` at [`CONSTANTS_TOL`].
pub fn erdos_renyi_coef(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain!(
            "Erdős–Rényi constant c must be finite and > 0, got {c}"
        ));
    }
    let a = 4.0 / c;
    Ok(a * pickands_f(a, CONSTANTS_TOL)?.f_value)
}

/// `a_m` of the i.i.d. maximum for a real sample size `m` (`log log m > 0`).
pub fn iid_location(m: f64) -> f64 {
    iid_location_from_log(libm::log(m))
}

pub(crate) fn iid_location_from_log(log_m: f64) -> f64 {
    let s = libm::sqrt(2.0 * log_m);
    s + (-0.5 * libm::log(log_m) - LOG_2_SQRT_PI) / s
}

/// Normalizing constants of `theorem` at sample size `n`.
pub fn normalization(theorem: Theorem, n: u64) -> Result<NormalizationPair> {
    if n < theorem.min_n() {
        return Err(domain!(
            "{} needs n >= {}, got {n}",
            theorem.tag(),
            theorem.min_n()
        ));
    }
    let log_n = libm::log(n as f64);
    let loglog = libm::log(log_n);
    let s = libm::sqrt(2.0 * log_n);
    let (a_n, b_n) = match theorem {
        Theorem::IidMax => (iid_location_from_log(log_n), 1.0 / s),
        Theorem::MainDiscrete => {
            let h = cached_h()?;
            (
                s + (0.5 * loglog + libm::log(h) - LOG_2_SQRT_PI) / s,
                1.0 / s,
            )
        }
        Theorem::ErdosRenyi(c) => {
            let coef = erdos_renyi_coef(c)?;
            (
                s + (-0.5 * loglog + libm::log(coef) - LOG_2_SQRT_PI) / s,
                1.0 / s,
            )
        }
        Theorem::BrownianContinuous => (s + (1.5 * loglog - LOG_2_SQRT_PI) / s, 1.0 / s),
        Theorem::DarlingErdos => {
            let sl = libm::sqrt(2.0 * loglog);
            (
                sl + (0.5 * libm::log(loglog) - LOG_2_SQRT_PI) / sl,
                1.0 / sl,
            )
        }
    };
    Ok(NormalizationPair {
        a_n,
        b_n,
        theorem,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_two_sqrt_pi_constant() {
        let v = libm::log(2.0 * libm::sqrt(core::f64::consts::PI));
        assert!((v - LOG_2_SQRT_PI).abs() < 1e-15);
    }

    #[test]
    fn iid_at_sixteen() {
        let p = normalization(Theorem::IidMax, 16).unwrap();
        let l = libm::log(16.0);
        let s = libm::sqrt(2.0 * l);
        let expected =
            s + (-0.5 * libm::log(l) - libm::log(2.0 * libm::sqrt(core::f64::consts::PI))) / s;
        assert!((p.a_n - expected).abs() < 1e-14);
        assert!((p.b_n - 1.0 / s).abs() < 1e-16);
    }

    #[test]
    fn main_minus_iid_identity() {
        let h = cached_h().unwrap();
        for n in [1000u64, 1_000_000, 1 << 20] {
            let m = normalization(Theorem::MainDiscrete, n).unwrap();
            let i = normalization(Theorem::IidMax, n).unwrap();
            let l = libm::log(n as f64);
            let diff = (libm::log(l) + libm::log(h)) / libm::sqrt(2.0 * l);
            assert!((m.a_n - i.a_n - diff).abs() < 1e-13);
            assert_eq!(m.b_n, i.b_n);
        }
    }

    #[test]
    fn erdos_renyi_uses_f_of_four_over_c() {
        let p = normalization(Theorem::ErdosRenyi(4.0), 10_000).unwrap();
        let l = libm::log(10_000.0);
        let s = libm::sqrt(2.0 * l);
        // F(1) from the mpmath summation oracle
        let f1 = 0.280_185_114_210_026_6;
        let expected = s + (-0.5 * libm::log(l) + libm::log(f1) - LOG_2_SQRT_PI) / s;
        assert!((p.a_n - expected).abs() < 1e-5);
    }

    #[test]
    fn domain_guards() {
        assert!(normalization(Theorem::DarlingErdos, 15).is_err());
        assert!(normalization(Theorem::DarlingErdos, 16).is_ok());
        assert!(normalization(Theorem::IidMax, 2).is_err());
        assert!(normalization(Theorem::ErdosRenyi(0.0), 100).is_err());
        assert!(matches!(
            Theorem::from_tag("ERDOS_RENYI", None),
            Err(crate::Error::Argument(_))
        ));
        assert_eq!(
            Theorem::from_tag("ERDOS_RENYI", Some(2.0)).unwrap(),
            Theorem::ErdosRenyi(2.0)
        );
    }

    #[test]
    fn standardize_inverts_threshold() {
        let p = normalization(Theorem::BrownianContinuous, 4096).unwrap();
        assert!((p.standardize(p.threshold(1.7)) - 1.7).abs() < 1e-12);
    }
}
