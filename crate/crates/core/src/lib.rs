//! Numerics for maxima of standardized Gaussian increments.
//!
//! The crate is `no_std` (it needs `alloc`) and carries everything that is a
//! pure function of its inputs:
//!
//! * [`normal`]: the standard normal and Gumbel distribution functions.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration on finite intervals.
//! * [`spitzer`]: the ladder-probability series `p∞(a)`, the Pickands-type
//!   constant `F(a) = p∞(a)²/a`, the clump intensity `G(y)` and the constant
//!   `H` of the scan statistic.
//! * [`normalization`]: Gumbel normalizing constants `(a_n, b_n)`.
//! * [`rates`]: the extreme-value-rate table and the asymptotic expansion of
//!   `a_{f(n)}`.
//! * [`scan`]: exact scans of a Gaussian walk (all standardized increments,
//!   fixed windows, increments from the origin, Brownian grids).
//! * [`excursion`]: closed-form tail asymptotics of the standardized-increment
//!   field and an exceedance test on a grid rectangle.
//!
//! Random path generation and file formats live in the companion `scanmax`
//! crate.
#![no_std]
// NaN-rejecting `!(x > 0.0)` guards and published quadrature nodes are deliberate.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

extern crate alloc;

mod error;

pub mod excursion;
pub mod normal;
pub mod normalization;
pub mod quadrature;
pub mod rates;
pub mod scan;
pub mod spitzer;

pub use error::{Error, Result};
pub use excursion::{
    excursion_tail_rect, excursion_tail_rect_grid, rect_grid_exceeds, rect_grid_sup, GridRect,
    RegionRect, TailApprox,
};
pub use normal::{gumbel_cdf, gumbel_quantile, std_normal_cdf};
pub use normalization::{
    cached_h, erdos_renyi_coef, normalization, NormalizationPair, Theorem, CONSTANTS_TOL,
};
pub use rates::{
    evr_value, expansion_check, types_equivalence_check, types_equivalence_check_with, Expansion,
    RateTableEntry, TYPES_TOL,
};
pub use scan::{
    brownian_grid_sup, darling_erdos_max, erdos_renyi_window, scan_max_naive, scan_max_pruned,
    SamplePath, ScanResult, WindowStat,
};
pub use spitzer::{
    clump_g, constant_h, pickands_f, spitzer_p_inf, HEstimate, HMethod, PickandsEvaluation,
    SeriesValue, SpitzerParams,
};
