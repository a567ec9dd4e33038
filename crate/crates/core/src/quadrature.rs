//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below the absolute tolerance. Integrands are fallible so
//! that series budgets inside an integrand surface as errors instead of NaNs.

use alloc::vec::Vec;

use crate::error::{budget, domain, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Summed Kronrod-vs-Gauss error estimate over the final partition.
    pub err_estimate: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

fn gk15<F>(f: &mut F, lo: f64, hi: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let res_asc = res_asc * half.abs();
    let res_abs = res_abs * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * libm::pow(200.0 * err / res_asc, 1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && round > err {
        err = round;
    }
    Ok(Panel {
        lo,
        hi,
        value: res_k * half,
        err,
    })
}

/// Integrates `f` over `[lo, hi]` to absolute tolerance `abs_tol`.
pub fn integrate<F>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_with_breaks(f, &[lo, hi], abs_tol, max_intervals)
}

/// Like [`integrate`], starting from the partition given by the strictly
/// increasing `breaks` (which include both end points).
pub fn integrate_with_breaks<F>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if breaks.len() < 2 {
        return Err(domain!("quadrature needs at least two break points"));
    }
    if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain!(
            "quadrature break points must be finite and strictly increasing"
        ));
    }
    if !(abs_tol > 0.0) {
        return Err(domain!(
            "quadrature tolerance must be positive, got {abs_tol}"
        ));
    }
    let mut panels: Vec<Panel> = Vec::with_capacity(max_intervals.max(breaks.len()));
    for w in breaks.windows(2) {
        panels.push(gk15(&mut f, w[0], w[1])?);
    }
    loop {
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if err <= abs_tol {
            // Sum small panels first.
            let mut vals: Vec<f64> = panels.iter().map(|p| p.value).collect();
            vals.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
            return Ok(Quadrature {
                value: vals.iter().sum(),
                err_estimate: err,
                evaluations: 15 * (panels.len() * 2 - (breaks.len() - 1)),
                intervals: panels.len(),
            });
        }
        if panels.len() >= max_intervals {
            return Err(budget!(
                "adaptive quadrature hit {max_intervals} intervals with error estimate {err:e} > {abs_tol:e}"
            ));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.total_cmp(&b.1.err))
            .map(|(i, _)| i)
            .expect("panels never empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            return Err(budget!(
                "adaptive quadrature exhausted floating-point resolution near {mid}"
            ));
        }
        panels.push(gk15(&mut f, p.lo, mid)?);
        panels.push(gk15(&mut f, mid, p.hi)?);
    }
}
