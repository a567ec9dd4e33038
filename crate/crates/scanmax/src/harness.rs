//! Seeded ensembles of scan statistics and Monte Carlo oracles for the
//! analytic constants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use scanmax_core::{
    brownian_grid_sup, darling_erdos_max, erdos_renyi_window, normalization, rect_grid_exceeds,
    scan_max_naive, scan_max_pruned, GridRect, NormalizationPair, RegionRect, SamplePath, Theorem,
};

use crate::error::{Error, Result};
use crate::rng::{derive_stream, NormalStream, SeedSpec};

fn domain(msg: String) -> Error {
    Error::Core(scanmax_core::Error::Domain(msg))
}

/// Path of `n` increments drawn from the next `n` normals of `stream`.
pub fn sample_path(stream: &mut NormalStream, n: usize) -> Result<SamplePath> {
    if n == 0 {
        return Err(domain("sample_path needs n >= 1".into()));
    }
    let mut inc = vec![0.0; n];
    stream.fill_normals(&mut inc);
    Ok(SamplePath::from_increments(inc)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Statistic {
    MainDiscrete,
    ErdosRenyi { c: f64 },
    DarlingErdos,
    Brownian { oversample: usize },
}

impl Statistic {
    pub fn theorem(&self) -> Theorem {
        match *self {
            Statistic::MainDiscrete => Theorem::MainDiscrete,
            Statistic::ErdosRenyi { c } => Theorem::ErdosRenyi(c),
            Statistic::DarlingErdos => Theorem::DarlingErdos,
            Statistic::Brownian { .. } => Theorem::BrownianContinuous,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Statistic::MainDiscrete => "MAIN_DISCRETE",
            Statistic::ErdosRenyi { .. } => "ERDOS_RENYI",
            Statistic::DarlingErdos => "DARLING_ERDOS",
            Statistic::Brownian { .. } => "BROWNIAN",
        }
    }

    /// Number of increments one replication consumes.
    pub fn path_len(&self, n: usize) -> usize {
        match *self {
            Statistic::Brownian { oversample } => n * oversample,
            _ => n,
        }
    }
}

/// Which maximizer computes the main statistic. Both give identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanEngine {
    #[default]
    Pruned,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub statistic: Statistic,
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub engine: ScanEngine,
}

impl EnsembleConfig {
    pub fn new(statistic: Statistic, n: usize, replications: usize, master_seed: u64) -> Self {
        Self {
            statistic,
            n,
            replications,
            master_seed,
            engine: ScanEngine::Pruned,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(domain("replications must be >= 1".into()));
        }
        if let Statistic::Brownian { oversample: 0 } = self.statistic {
            return Err(domain("oversample must be >= 1".into()));
        }
        if self.n < 2 {
            return Err(domain(format!("n must be >= 2, got {}", self.n)));
        }
        Ok(())
    }
}

/// Raw and standardized statistic for one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: u64,
    pub raw_value: f64,
    pub standardized_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    /// Standardized values, ascending.
    pub samples: Vec<f64>,
    /// Per-replication values in replication order.
    pub records: Vec<ReplicationRecord>,
    pub n: usize,
    pub replications: usize,
    pub statistic: Statistic,
    pub normalization: NormalizationPair,
}

fn raw_statistic(
    stat: Statistic,
    engine: ScanEngine,
    path: &SamplePath,
    n: usize,
) -> scanmax_core::Result<f64> {
    Ok(match stat {
        Statistic::MainDiscrete => match engine {
            ScanEngine::Pruned => scan_max_pruned(path, 1)?.value,
            ScanEngine::Naive => scan_max_naive(path, 1)?.value,
        },
        Statistic::ErdosRenyi { c } => erdos_renyi_window(path, c)?.value,
        Statistic::DarlingErdos => darling_erdos_max(path)?.value,
        Statistic::Brownian { oversample } => brownian_grid_sup(path, n, oversample)?.value,
    })
}

/// One replication's raw statistic, reproducible from `(master_seed, replication)`.
pub fn replicate(config: &EnsembleConfig, replication: u64) -> Result<f64> {
    let stat = config.statistic;
    let mut stream = derive_stream(SeedSpec::new(config.master_seed, replication));
    let len = stat.path_len(config.n);
    let mut inc = vec![0.0; len];
    stream.fill_normals(&mut inc);
    if let Statistic::Brownian { .. } = stat {
        let sd = (1.0 / len as f64).sqrt();
        inc.iter_mut().for_each(|x| *x *= sd);
    }
    let wrap = |source| Error::Replication {
        index: replication,
        source,
    };
    let path = SamplePath::from_increments(inc).map_err(wrap)?;
    raw_statistic(stat, config.engine, &path, config.n).map_err(wrap)
}

/// Runs all replications in parallel and standardizes with the matching
/// normalizing constants. The result does not depend on the thread count.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EmpiricalDistribution> {
    config.validate()?;
    let norm = normalization(config.statistic.theorem(), config.n as u64)?;
    let records = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| {
            let raw = replicate(config, r)?;
            Ok(ReplicationRecord {
                replication: r,
                raw_value: raw,
                standardized_value: norm.standardize(raw),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut samples: Vec<f64> = records.iter().map(|r| r.standardized_value).collect();
    samples.sort_by(f64::total_cmp);
    Ok(EmpiricalDistribution {
        samples,
        records,
        n: config.n,
        replications: config.replications,
        statistic: config.statistic,
        normalization: norm,
    })
}

/// Kolmogorov–Smirnov distance of ascending `sorted` samples to `cdf`,
/// evaluated exactly at the jump points.
pub fn ks_distance_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(domain("KS distance of an empty sample".into()));
    }
    let r = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((k + 1) as f64 / r - f).max(f - k as f64 / r);
    }
    Ok(d)
}

pub fn ks_distance<F: Fn(f64) -> f64>(emp: &EmpiricalDistribution, cdf: F) -> Result<f64> {
    ks_distance_sorted(&emp.samples, cdf)
}

/// KS distance to the standard Gumbel law.
pub fn gumbel_ks(sorted: &[f64]) -> Result<f64> {
    ks_distance_sorted(sorted, |t| (-(-t).exp()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
}

impl OracleEstimate {
    fn from_samples(x: &[f64]) -> Self {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            std_error: (var / n).sqrt(),
            replications: x.len(),
        }
    }
}

fn check_oracle_args(a: f64, reps: usize) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(domain(format!("a must be positive and finite, got {a}")));
    }
    if reps < 2 {
        return Err(domain(format!("reps must be >= 2, got {reps}")));
    }
    Ok(())
}

/// Once a walk with step law N(-a/2, a) sits below this level, the chance of
/// it ever returning above zero is at most e^{level} < 1e-17 (the Lundberg
/// exponent of this step law is exactly 1), so the rest of the walk is skipped.
const ESCAPE_LEVEL: f64 = -40.0;

/// Fraction of walks with steps N(-a/2, a) staying below zero for `horizon`
/// steps, with its binomial standard error.
pub fn mc_p_inf(a: f64, horizon: usize, reps: usize, master_seed: u64) -> Result<OracleEstimate> {
    check_oracle_args(a, reps)?;
    if horizon == 0 {
        return Err(domain("horizon must be >= 1".into()));
    }
    let (mu, sd) = (-0.5 * a, a.sqrt());
    let stayed: usize = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = derive_stream(SeedSpec::new(master_seed, r));
            let mut z = 0.0;
            for _ in 0..horizon {
                z += mu + sd * s.next_normal();
                if z >= 0.0 {
                    return 0;
                }
                if z < ESCAPE_LEVEL {
                    break;
                }
            }
            1
        })
        .sum();
    let p = stayed as f64 / reps as f64;
    Ok(OracleEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
        replications: reps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PickandsOracle {
    pub estimate: OracleEstimate,
    /// Median over `groups` contiguous blocks of replications of the block means.
    pub median_of_means: f64,
    pub groups: usize,
}

pub const MEDIAN_OF_MEANS_GROUPS: usize = 10;

/// `mean(e^M)/T` with `M` the running maximum (floored at 0) of `floor(T/a)`
/// steps N(-a/2, a).
///
/// `e^M` has only a boundary exponential moment, so its standard error
/// understates the real uncertainty; the median-of-means figure is the more
/// robust of the two.
pub fn mc_pickands_f(a: f64, t: f64, reps: usize, master_seed: u64) -> Result<PickandsOracle> {
    check_oracle_args(a, reps)?;
    if !(t.is_finite() && t >= a) {
        return Err(domain(format!(
            "T must be finite and >= a, got T={t}, a={a}"
        )));
    }
    let steps = (t / a).floor() as usize;
    let (mu, sd) = (-0.5 * a, a.sqrt());
    let w: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = derive_stream(SeedSpec::new(master_seed, r));
            let (mut z, mut m) = (0.0f64, 0.0f64);
            for _ in 0..steps {
                z += mu + sd * s.next_normal();
                m = m.max(z);
            }
            m.exp() / t
        })
        .collect();
    let estimate = OracleEstimate::from_samples(&w);
    let groups = MEDIAN_OF_MEANS_GROUPS.min(reps);
    let size = reps / groups;
    let mut means: Vec<f64> = (0..groups)
        .map(|g| w[g * size..(g + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let median_of_means = if groups % 2 == 1 {
        means[groups / 2]
    } else {
        0.5 * (means[groups / 2 - 1] + means[groups / 2])
    };
    Ok(PickandsOracle {
        estimate,
        median_of_means,
        groups,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub n: usize,
    pub mean_ratio: f64,
    pub std_error: f64,
}

/// Mean of `L_n/√(2 log n)` for each `n`, where every replication evaluates
/// all `n` on prefixes of one path.
pub fn shao_ratio_trend(ns: &[usize], reps: usize, master_seed: u64) -> Result<Vec<RatioPoint>> {
    if reps < 2 {
        return Err(domain(format!("reps must be >= 2, got {reps}")));
    }
    if ns.is_empty() || ns[0] < 2 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain(
            "ns must be nonempty, strictly increasing and start at >= 2".into(),
        ));
    }
    let n_max = *ns.last().unwrap();
    let per_rep: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let wrap = |source| Error::Replication { index: r, source };
            let path = sample_path(&mut derive_stream(SeedSpec::new(master_seed, r)), n_max)?;
            ns.iter()
                .map(|&n| {
                    let l = scan_max_pruned(&path.prefix(n).map_err(wrap)?, 1)
                        .map_err(wrap)?
                        .value;
                    Ok(l / (2.0 * (n as f64).ln()).sqrt())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(ns
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let col: Vec<f64> = per_rep.iter().map(|v| v[k]).collect();
            let e = OracleEstimate::from_samples(&col);
            RatioPoint {
                n,
                mean_ratio: e.mean,
                std_error: e.std_error,
            }
        })
        .collect())
}

/// Frequency with which the grid supremum of standardized Brownian
/// increments over `region` exceeds `u`, using mesh `1/steps_per_unit`.
///
/// Region corners are snapped inward to the mesh. Each path starts at time
/// 0 and runs to `x_hi + y_hi`.
pub fn mc_tail_exceedance(
    region: &RegionRect,
    u: f64,
    steps_per_unit: usize,
    paths: usize,
    master_seed: u64,
) -> Result<OracleEstimate> {
    if paths < 2 || steps_per_unit == 0 || !u.is_finite() {
        return Err(domain(
            "need paths >= 2, steps_per_unit >= 1 and finite u".into(),
        ));
    }
    if region.x_lo < 0.0 {
        return Err(domain(format!(
            "region must start at x >= 0, got {}",
            region.x_lo
        )));
    }
    let m = steps_per_unit as f64;
    let rect = GridRect {
        x_lo: (region.x_lo * m).ceil() as usize,
        x_hi: (region.x_hi * m).floor() as usize,
        y_lo: ((region.y_lo * m).ceil() as usize).max(1),
        y_hi: (region.y_hi * m).floor() as usize,
    };
    let mesh = 1.0 / m;
    let len = rect.x_hi + rect.y_hi;
    let hits: usize = (0..paths as u64)
        .into_par_iter()
        .map(|r| {
            let wrap = |source| Error::Replication { index: r, source };
            let mut s = derive_stream(SeedSpec::new(master_seed, r));
            let mut inc = vec![0.0; len];
            s.fill_normals(&mut inc);
            let sd = mesh.sqrt();
            inc.iter_mut().for_each(|x| *x *= sd);
            let path = SamplePath::from_increments(inc).map_err(wrap)?;
            Ok(rect_grid_exceeds(&path, &rect, mesh, u).map_err(wrap)? as usize)
        })
        .sum::<Result<usize>>()?;
    let p = hits as f64 / paths as f64;
    Ok(OracleEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / paths as f64).sqrt(),
        replications: paths,
    })
}
