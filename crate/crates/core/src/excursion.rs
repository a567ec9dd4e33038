//! High-level excursions of the standardized-increment field
//! `X(x, y) = (B(x+y) - B(x))/√y` on the upper half-plane.
//!
//! Over a compact `K` the excursion probability behaves like
//! `(1/(4√(2π))) ∫_K dx dy/y² · u³ e^{-u²/2}`; on a grid of mesh `q` with
//! `q u² → a` the intensity `1/(4y²)` becomes `G(y; a)` and the prefactor
//! `1/√(2π)`.

use alloc::vec::Vec;

use crate::error::{argument, domain, Result};
use crate::normal::INV_SQRT_2PI;
use crate::quadrature::integrate;
use crate::scan::SamplePath;
use crate::spitzer::clump_g;

/// Rectangle `[x_lo, x_hi] × [y_lo, y_hi]` in (position, length) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionRect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl RegionRect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let r = Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x_lo, self.x_hi, self.y_lo, self.y_hi]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_lo < self.x_hi) || !(0.0 < self.y_lo && self.y_lo < self.y_hi) {
            return Err(domain!(
                "region needs x_lo < x_hi and 0 < y_lo < y_hi, got [{}, {}] x [{}, {}]",
                self.x_lo,
                self.x_hi,
                self.y_lo,
                self.y_hi
            ));
        }
        Ok(())
    }

    /// `∫_K dx dy / y²`.
    pub fn inverse_square_measure(&self) -> f64 {
        (self.x_hi - self.x_lo) * (1.0 / self.y_lo - 1.0 / self.y_hi)
    }
}

/// An asymptotic tail value clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailApprox {
    pub probability: f64,
    /// The formula before clamping.
    pub raw: f64,
    /// Set when `raw > 1`: the formula is used outside its regime.
    pub clamped: bool,
}

impl TailApprox {
    fn from_raw(raw: f64) -> Self {
        Self {
            probability: raw.clamp(0.0, 1.0),
            raw,
            clamped: raw > 1.0,
        }
    }
}

fn check_level(u: f64) -> Result<()> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(domain!("excursion level u must be finite and > 0, got {u}"));
    }
    Ok(())
}

#[inline]
fn level_factor(u: f64) -> f64 {
    u * u * u * libm::exp(-0.5 * u * u)
}

/// Continuous-parameter tail asymptotic over a rectangle.
pub fn excursion_tail_rect(region: &RegionRect, u: f64) -> Result<TailApprox> {
    region.validate()?;
    check_level(u)?;
    Ok(TailApprox::from_raw(
        0.25 * INV_SQRT_2PI * region.inverse_square_measure() * level_factor(u),
    ))
}

/// Grid tail asymptotic with `a = lim q u²`; the `y`-integral of `G(y; a)` is
/// evaluated by adaptive quadrature.
pub fn excursion_tail_rect_grid(region: &RegionRect, u: f64, a: f64) -> Result<TailApprox> {
    region.validate()?;
    check_level(u)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain!("grid constant a must be finite and > 0, got {a}"));
    }
    let scale = 0.25 * (1.0 / region.y_lo - 1.0 / region.y_hi);
    let q = integrate(
        |y| clump_g(y, a, 1e-12).map(|g| g.value),
        region.y_lo,
        region.y_hi,
        1e-10 * scale,
        500,
    )?;
    Ok(TailApprox::from_raw(
        INV_SQRT_2PI * (region.x_hi - region.x_lo) * q.value * level_factor(u),
    ))
}

/// Rectangle of grid pairs `x ∈ [x_lo, x_hi]`, `y ∈ [y_lo, y_hi]` in mesh units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridRect {
    pub x_lo: usize,
    pub x_hi: usize,
    pub y_lo: usize,
    pub y_hi: usize,
}

impl GridRect {
    fn validate(&self, path: &SamplePath) -> Result<()> {
        if self.x_lo > self.x_hi || self.y_lo == 0 || self.y_lo > self.y_hi {
            return Err(domain!(
                "grid rectangle needs x_lo <= x_hi and 1 <= y_lo <= y_hi"
            ));
        }
        if self.x_hi + self.y_hi > path.len() {
            return Err(argument!(
                "grid rectangle reaches index {} but the path has {} increments",
                self.x_hi + self.y_hi,
                path.len()
            ));
        }
        Ok(())
    }
}

/// `max (S[x+y] - S[x])/√(y·mesh)` over the grid rectangle.
pub fn rect_grid_sup(path: &SamplePath, rect: &GridRect, mesh: f64) -> Result<f64> {
    rect.validate(path)?;
    let s = path.prefix_sums();
    let mut best = f64::NEG_INFINITY;
    for y in rect.y_lo..=rect.y_hi {
        let mut m = f64::NEG_INFINITY;
        for x in rect.x_lo..=rect.x_hi {
            let d = s[x + y] - s[x];
            if d > m {
                m = d;
            }
        }
        best = best.max(m / libm::sqrt(y as f64 * mesh));
    }
    Ok(best)
}

/// Sparse table answering range max/min queries in O(1).
struct RangeExtrema {
    max: Vec<Vec<f64>>,
    min: Vec<Vec<f64>>,
}

impl RangeExtrema {
    fn new(v: &[f64]) -> Self {
        let mut max = alloc::vec![v.to_vec()];
        let mut min = alloc::vec![v.to_vec()];
        let mut w = 1;
        while 2 * w <= v.len() {
            let (pm, pn) = (max.last().unwrap(), min.last().unwrap());
            let nm: Vec<f64> = (0..=v.len() - 2 * w)
                .map(|i| pm[i].max(pm[i + w]))
                .collect();
            let nn: Vec<f64> = (0..=v.len() - 2 * w)
                .map(|i| pn[i].min(pn[i + w]))
                .collect();
            max.push(nm);
            min.push(nn);
            w *= 2;
        }
        Self { max, min }
    }

    /// (max, min) over `v[lo..=hi]`.
    fn query(&self, lo: usize, hi: usize) -> (f64, f64) {
        let len = hi - lo + 1;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let off = hi + 1 - (1 << k);
        (
            self.max[k][lo].max(self.max[k][off]),
            self.min[k][lo].min(self.min[k][off]),
        )
    }
}

/// Whether the grid supremum exceeds `u`; same answer as
/// `rect_grid_sup(..) > u`, with block pruning and early exit.
pub fn rect_grid_exceeds(path: &SamplePath, rect: &GridRect, mesh: f64, u: f64) -> Result<bool> {
    rect.validate(path)?;
    const BLOCK: usize = 16;
    let s = path.prefix_sums();
    let table = RangeExtrema::new(s);
    let mut yb = rect.y_lo;
    while yb <= rect.y_hi {
        let ye = (yb + BLOCK - 1).min(rect.y_hi);
        let mut xb = rect.x_lo;
        while xb <= rect.x_hi {
            let xe = (xb + BLOCK - 1).min(rect.x_hi);
            let (hi_max, _) = table.query(xb + yb, xe + ye);
            let (_, lo_min) = table.query(xb, xe);
            let num = hi_max - lo_min;
            let denom = if num >= 0.0 { yb } else { ye };
            if num / libm::sqrt(denom as f64 * mesh) > u {
                for y in yb..=ye {
                    let scale = libm::sqrt(y as f64 * mesh);
                    for x in xb..=xe {
                        if (s[x + y] - s[x]) / scale > u {
                            return Ok(true);
                        }
                    }
                }
            }
            xb = xe + 1;
        }
        yb = ye + 1;
    }
    Ok(false)
}
