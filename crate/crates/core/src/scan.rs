//! Scans of a Gaussian walk for maximal standardized increments.
//!
//! The central object is `L_n = max_{0≤i<j≤n} (S_j - S_i)/√(j-i)`. Two engines
//! compute it: an exhaustive reference scan and a branch-and-bound scan that
//! returns the identical `(value, i, j)` including the tie-break (largest
//! value, then smallest `j - i`, then smallest `i`).

use alloc::vec::Vec;

use crate::error::{argument, domain, Result};

/// Increments `X_1..X_n` and prefix sums `S_0 = 0, .., S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    increments: Vec<f64>,
    prefix_sums: Vec<f64>,
}

impl SamplePath {
    pub fn from_increments(increments: Vec<f64>) -> Result<Self> {
        if increments.is_empty() {
            return Err(domain!("sample path needs at least one increment"));
        }
        if let Some(k) = increments.iter().position(|x| !x.is_finite()) {
            return Err(domain!("increment {k} is not finite"));
        }
        let mut prefix_sums = Vec::with_capacity(increments.len() + 1);
        let mut s = 0.0;
        prefix_sums.push(s);
        for &x in &increments {
            s += x;
            prefix_sums.push(s);
        }
        Ok(Self {
            increments,
            prefix_sums,
        })
    }

    /// Number of increments `n`.
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn prefix_sums(&self) -> &[f64] {
        &self.prefix_sums
    }

    /// The first `n` increments as a new path.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(domain!("prefix length {n} outside 1..={}", self.len()));
        }
        Ok(Self {
            increments: self.increments[..n].to_vec(),
            prefix_sums: self.prefix_sums[..=n].to_vec(),
        })
    }
}

/// Maximizing pair of a scan with work counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    pub value: f64,
    pub i: usize,
    pub j: usize,
    /// Pairs whose standardized increment was evaluated.
    pub pairs_examined: u64,
    /// Block- and row-level upper bounds evaluated (zero for the naive scan).
    pub bounds_checked: u64,
}

impl ScanResult {
    /// Same maximizer and value, ignoring the work counters.
    pub fn same_maximum(&self, other: &ScanResult) -> bool {
        self.value == other.value && self.i == other.i && self.j == other.j
    }
}

/// Value and position of a one-parameter maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStat {
    pub value: f64,
    pub k: usize,
    pub window: usize,
}

#[inline]
fn standardized(s: &[f64], i: usize, j: usize) -> f64 {
    (s[j] - s[i]) / libm::sqrt((j - i) as f64)
}

#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    i: usize,
    j: usize,
}

impl Best {
    #[inline]
    fn offer(&mut self, value: f64, i: usize, j: usize) {
        if value > self.value
            || (value == self.value
                && (j - i < self.j - self.i || (j - i == self.j - self.i && i < self.i)))
        {
            *self = Best { value, i, j };
        }
    }
}

fn check_min_sep(path: &SamplePath, min_sep: usize) -> Result<()> {
    if min_sep == 0 || min_sep > path.len() {
        return Err(domain!(
            "min_sep must lie in 1..={}, got {min_sep}",
            path.len()
        ));
    }
    Ok(())
}

/// Exhaustive scan over all pairs with `j - i ≥ min_sep`.
pub fn scan_max_naive(path: &SamplePath, min_sep: usize) -> Result<ScanResult> {
    check_min_sep(path, min_sep)?;
    let s = path.prefix_sums();
    let n = path.len();
    let mut best = Best {
        value: f64::NEG_INFINITY,
        i: 0,
        j: n,
    };
    let mut pairs = 0u64;
    for j in min_sep..=n {
        for i in 0..=j - min_sep {
            best.offer(standardized(s, i, j), i, j);
        }
        pairs += (j - min_sep + 1) as u64;
    }
    Ok(ScanResult {
        value: best.value,
        i: best.i,
        j: best.j,
        pairs_examined: pairs,
        bounds_checked: 0,
    })
}

/// Tuning of the branch-and-bound scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrunedScanner {
    /// Largest block of prefix sums summarized by one max/min pair.
    pub max_block: usize,
    /// Separations up to `seed_factor · min_sep` are scanned exhaustively first.
    pub seed_factor: usize,
}

impl Default for PrunedScanner {
    fn default() -> Self {
        Self {
            max_block: 64,
            seed_factor: 8,
        }
    }
}

/// Per-block maxima and minima of the prefix sums for block sizes 2, 4, .., 2^L.
struct BlockPyramid {
    levels: Vec<(Vec<f64>, Vec<f64>)>,
}

impl BlockPyramid {
    fn new(s: &[f64], max_block: usize) -> Self {
        let mut levels: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        let mut size = 2;
        while size <= max_block {
            let (maxs, mins) = match levels.last() {
                None => s
                    .chunks(2)
                    .map(|c| {
                        c.iter()
                            .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), &x| {
                                (hi.max(x), lo.min(x))
                            })
                    })
                    .unzip(),
                Some((pmax, pmin)) => (
                    pmax.chunks(2)
                        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                        .collect(),
                    pmin.chunks(2)
                        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
                        .collect(),
                ),
            };
            levels.push((maxs, mins));
            size *= 2;
        }
        Self { levels }
    }

    /// Level index for block size `2^(level+1)`.
    fn get(&self, level: usize) -> (&[f64], &[f64]) {
        let (a, b) = &self.levels[level];
        (a, b)
    }
}

#[inline]
fn bound(num: f64, dmin: usize, dmax: usize) -> f64 {
    if num >= 0.0 {
        num / libm::sqrt(dmin as f64)
    } else {
        num / libm::sqrt(dmax as f64)
    }
}

impl PrunedScanner {
    pub fn scan(&self, path: &SamplePath, min_sep: usize) -> Result<ScanResult> {
        check_min_sep(path, min_sep)?;
        if self.max_block < 2 || !self.max_block.is_power_of_two() {
            return Err(argument!(
                "max_block must be a power of two >= 2, got {}",
                self.max_block
            ));
        }
        let s = path.prefix_sums();
        let n = path.len();
        let seed_to = (self.seed_factor.max(1) * min_sep).min(n);
        let mut best = Best {
            value: f64::NEG_INFINITY,
            i: 0,
            j: n,
        };
        let mut pairs = 0u64;
        let mut bounds = 0u64;

        for d in min_sep..=seed_to {
            for i in 0..=n - d {
                best.offer(standardized(s, i, i + d), i, i + d);
            }
            pairs += (n - d + 1) as u64;
        }
        if seed_to == n {
            return Ok(ScanResult {
                value: best.value,
                i: best.i,
                j: best.j,
                pairs_examined: pairs,
                bounds_checked: 0,
            });
        }

        let pyramid = BlockPyramid::new(s, self.max_block);
        // Separation bands [lo, hi] doubling from seed_to + 1; each pair (i, j)
        // falls in exactly one band and one (block of j, block of i) cell.
        let mut lo = seed_to + 1;
        while lo <= n {
            let hi = (2 * lo - 1).min(n);
            let size = prev_power_of_two(lo / 4).clamp(2, self.max_block);
            let level = size.trailing_zeros() as usize - 1;
            let (bmax, bmin) = pyramid.get(level);
            let blocks = n / size + 1;
            for jb in 0..blocks {
                let jlo = jb * size;
                let jhi = (jlo + size - 1).min(n);
                if jhi < lo {
                    continue;
                }
                let i_first = jlo.saturating_sub(hi);
                let i_last = jhi - lo;
                for ib in i_first / size..=i_last / size {
                    let ilo = ib * size;
                    let ihi = ilo + size - 1;
                    let dmin = lo.max(jlo.saturating_sub(ihi));
                    let dmax = hi.min(jhi - ilo);
                    if dmin > dmax {
                        continue;
                    }
                    bounds += 1;
                    let min_i = bmin[ib];
                    if bound(bmax[jb] - min_i, dmin, dmax) < best.value {
                        continue;
                    }
                    for j in jlo.max(lo + ilo)..=jhi {
                        let rdmin = lo.max(j.saturating_sub(ihi));
                        let rdmax = hi.min(j - ilo);
                        if rdmin > rdmax {
                            continue;
                        }
                        bounds += 1;
                        if bound(s[j] - min_i, rdmin, rdmax) < best.value {
                            continue;
                        }
                        let (i0, i1) = (j - rdmax, j - rdmin);
                        for i in i0..=i1 {
                            best.offer(standardized(s, i, j), i, j);
                        }
                        pairs += (i1 - i0 + 1) as u64;
                    }
                }
            }
            lo = hi + 1;
        }
        Ok(ScanResult {
            value: best.value,
            i: best.i,
            j: best.j,
            pairs_examined: pairs,
            bounds_checked: bounds,
        })
    }
}

fn prev_power_of_two(x: usize) -> usize {
    if x == 0 {
        1
    } else {
        1 << (usize::BITS - 1 - x.leading_zeros())
    }
}

/// Branch-and-bound scan with the default [`PrunedScanner`].
pub fn scan_max_pruned(path: &SamplePath, min_sep: usize) -> Result<ScanResult> {
    PrunedScanner::default().scan(path, min_sep)
}

/// Maximum over windows of length `[c log n]`: `max_k (S_{k+l} - S_k)/√l`.
pub fn erdos_renyi_window(path: &SamplePath, c: f64) -> Result<WindowStat> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain!("window constant c must be finite and > 0, got {c}"));
    }
    let n = path.len();
    let l = libm::floor(c * libm::log(n as f64));
    if l < 1.0 || l > n as f64 {
        return Err(domain!("window length [c log n] = {l} outside 1..={n}"));
    }
    fixed_window(path, l as usize)
}

/// Maximum of `(S_{k+l} - S_k)/√l` over `0 ≤ k ≤ n - l`, smallest `k` on ties.
pub fn fixed_window(path: &SamplePath, l: usize) -> Result<WindowStat> {
    let n = path.len();
    if l == 0 || l > n {
        return Err(domain!("window length {l} outside 1..={n}"));
    }
    let s = path.prefix_sums();
    let mut best = WindowStat {
        value: f64::NEG_INFINITY,
        k: 0,
        window: l,
    };
    for k in 0..=n - l {
        let v = standardized(s, k, k + l);
        if v > best.value {
            best.value = v;
            best.k = k;
        }
    }
    Ok(best)
}

/// `max_k S_k/√k`; `window` and `k` both carry the smallest maximizing `k`.
pub fn darling_erdos_max(path: &SamplePath) -> Result<WindowStat> {
    let s = path.prefix_sums();
    let mut best = WindowStat {
        value: f64::NEG_INFINITY,
        k: 1,
        window: 1,
    };
    for k in 1..=path.len() {
        let v = standardized(s, 0, k);
        if v > best.value {
            best = WindowStat {
                value: v,
                k,
                window: k,
            };
        }
    }
    Ok(best)
}

/// Supremum of standardized Brownian increments over grid pairs `x₂ - x₁ ≥ 1/n`.
///
/// `path` holds `n·oversample` increments of a Brownian path on `[0, 1]` at
/// mesh `q = 1/(n·oversample)`. Indices are in grid units; the value is
/// rescaled by `1/√q`. The grid supremum never exceeds the continuous one.
pub fn brownian_grid_sup(path: &SamplePath, n: usize, oversample: usize) -> Result<ScanResult> {
    if n == 0 || oversample == 0 {
        return Err(domain!(
            "n and oversample must be >= 1, got n={n}, oversample={oversample}"
        ));
    }
    if path.len() != n * oversample {
        return Err(argument!(
            "path has {} increments, expected n*oversample = {}",
            path.len(),
            n * oversample
        ));
    }
    let mut r = scan_max_pruned(path, oversample)?;
    let q = 1.0 / (n * oversample) as f64;
    r.value /= libm::sqrt(q);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn path(x: &[f64]) -> SamplePath {
        SamplePath::from_increments(x.to_vec()).unwrap()
    }

    // Small deterministic generator for test paths (xorshift + Box–Muller-free sum of uniforms).
    fn pseudo_path(seed: u64, n: usize) -> SamplePath {
        let mut st = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            st ^= st << 13;
            st ^= st >> 7;
            st ^= st << 17;
            (st >> 11) as f64 / (1u64 << 53) as f64
        };
        let inc: Vec<f64> = (0..n)
            .map(|_| (0..12).map(|_| next()).sum::<f64>() - 6.0)
            .collect();
        path(&inc)
    }

    #[test]
    fn prefix_sums_invariant() {
        let p = path(&[1.0, -2.5, 0.25]);
        assert_eq!(p.prefix_sums(), &[0.0, 1.0, -1.5, -1.25]);
        assert!(SamplePath::from_increments(vec![]).is_err());
        assert!(SamplePath::from_increments(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn naive_hand_cases() {
        let r = scan_max_naive(&path(&[0.7]), 1).unwrap();
        assert_eq!((r.value, r.i, r.j, r.pairs_examined), (0.7, 0, 1, 1));
        let r = scan_max_naive(&path(&[1.0, -1.0]), 1).unwrap();
        assert_eq!((r.value, r.i, r.j, r.pairs_examined), (1.0, 0, 1, 3));
        let r = scan_max_naive(&path(&[3.0, 4.0]), 1).unwrap();
        assert_eq!((r.i, r.j), (0, 2));
        assert!((r.value - 7.0 / libm::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn min_sep_out_of_range() {
        let p = path(&[1.0, 2.0]);
        assert!(scan_max_naive(&p, 3).is_err());
        assert!(scan_max_naive(&p, 0).is_err());
        assert!(scan_max_pruned(&p, 3).is_err());
    }

    #[test]
    fn tie_break_prefers_short_then_left() {
        // every single step equals 1, pairs of length 4 give 2 > 1, so use a flat path with spikes
        let p = path(&[1.0, -1.0, 1.0, -1.0, 1.0]);
        let r = scan_max_naive(&p, 1).unwrap();
        assert_eq!((r.value, r.i, r.j), (1.0, 0, 1));
        let q = scan_max_pruned(&p, 1).unwrap();
        assert!(q.same_maximum(&r));
    }

    #[test]
    fn monotone_path_attains_full_span() {
        for n in [1usize, 7, 64, 300] {
            let p = path(&vec![1.0; n]);
            let r = scan_max_pruned(&p, 1).unwrap();
            assert_eq!((r.i, r.j), (0, n));
            assert!((r.value - libm::sqrt(n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn pruned_matches_naive_and_saves_work() {
        let mut fewer = 0;
        for seed in 0..200u64 {
            let n = 16 + (seed as usize * 37) % 497;
            let p = pseudo_path(seed, n);
            for min_sep in [1usize, 2, 8] {
                let a = scan_max_naive(&p, min_sep).unwrap();
                let b = scan_max_pruned(&p, min_sep).unwrap();
                assert!(
                    a.same_maximum(&b),
                    "seed={seed} n={n} min_sep={min_sep}: {a:?} vs {b:?}"
                );
                if min_sep == 1 && b.pairs_examined < a.pairs_examined {
                    fewer += 1;
                }
            }
        }
        assert!(fewer >= 190, "only {fewer}/200 paths pruned");
    }

    #[test]
    fn erdos_renyi_hand_case() {
        let p = path(&[1.0, 2.0, 3.0, 4.0]);
        // l = floor(c log 4) = 2 for c = 1.5 (1.5·1.386 = 2.08)
        let w = erdos_renyi_window(&p, 1.5).unwrap();
        assert_eq!((w.k, w.window), (2, 2));
        assert!((w.value - 7.0 / libm::sqrt(2.0)).abs() < 1e-15);
        let z = erdos_renyi_window(&path(&[0.0; 10]), 1.0).unwrap();
        assert_eq!(z.value, 0.0);
        // l = n: c log n >= n for n = 2, c = 3
        let full = erdos_renyi_window(&path(&[1.0, 2.0]), 3.0).unwrap();
        assert_eq!(full.window, 2);
        assert!((full.value - 3.0 / libm::sqrt(2.0)).abs() < 1e-15);
        assert!(erdos_renyi_window(&path(&[1.0, 2.0]), 0.1).is_err());
        assert!(erdos_renyi_window(&path(&[1.0, 2.0]), 10.0).is_err());
    }

    #[test]
    fn darling_erdos_cases() {
        let w = darling_erdos_max(&path(&[2.0, -1.0])).unwrap();
        assert_eq!((w.value, w.k), (2.0, 1));
        let z = darling_erdos_max(&path(&[0.0; 5])).unwrap();
        assert_eq!((z.value, z.k), (0.0, 1));
        let m = darling_erdos_max(&path(&[1.0; 9])).unwrap();
        assert_eq!((m.value, m.k), (3.0, 9));
    }

    #[test]
    fn brownian_grid_cases() {
        let p = path(&[0.3, -0.2, 0.9, 0.1]);
        // oversample 1: same as the plain scan, rescaled by 1/sqrt(q)
        let b = brownian_grid_sup(&p, 4, 1).unwrap();
        let s = scan_max_pruned(&p, 1).unwrap();
        assert!(b.same_maximum(&ScanResult {
            value: s.value * 2.0,
            ..s
        }));
        // n = 2, oversample = 2: pairs with separation >= 2 grid steps
        let b = brownian_grid_sup(&p, 2, 2).unwrap();
        let sums = p.prefix_sums();
        let mut best = f64::NEG_INFINITY;
        for (i, j) in [(0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 4)] {
            best = best.max((sums[j] - sums[i]) / libm::sqrt((j - i) as f64 * 0.25));
        }
        assert!((b.value - best).abs() < 1e-14);
        assert!(brownian_grid_sup(&p, 3, 1).is_err());
    }

    #[test]
    fn brownian_refinement_is_monotone() {
        let fine = pseudo_path(7, 64 * 4);
        let coarse_inc: Vec<f64> = fine.increments().chunks(2).map(|c| c[0] + c[1]).collect();
        let coarse = path(&coarse_inc);
        let v2 = brownian_grid_sup(&coarse, 64, 2).unwrap().value;
        let v4 = brownian_grid_sup(&fine, 64, 4).unwrap().value;
        assert!(v4 >= v2 - 1e-12);
    }

    proptest! {
        #[test]
        fn pruned_equals_naive(inc in proptest::collection::vec(-3.0f64..3.0, 1..300), sep in 1usize..10) {
            let p = SamplePath::from_increments(inc).unwrap();
            let sep = sep.min(p.len());
            let a = scan_max_naive(&p, sep).unwrap();
            let b = scan_max_pruned(&p, sep).unwrap();
            prop_assert!(a.same_maximum(&b));
        }

        #[test]
        fn ties_on_integer_paths(inc in proptest::collection::vec(-2i32..3, 1..200)) {
            let p = SamplePath::from_increments(inc.iter().map(|&x| x as f64).collect()).unwrap();
            for sep in [1usize, 2] {
                if sep <= p.len() {
                    prop_assert!(scan_max_naive(&p, sep).unwrap().same_maximum(&scan_max_pruned(&p, sep).unwrap()));
                }
            }
        }

        #[test]
        fn scaling_and_shift(inc in proptest::collection::vec(-3.0f64..3.0, 2..120), lambda in 0.1f64..10.0) {
            let p = SamplePath::from_increments(inc.clone()).unwrap();
            let q = SamplePath::from_increments(inc.iter().map(|x| x * lambda).collect()).unwrap();
            let a = scan_max_pruned(&p, 1).unwrap();
            let b = scan_max_pruned(&q, 1).unwrap();
            prop_assert!((b.value - lambda * a.value).abs() <= 1e-9 * (1.0 + b.value.abs()));
            let max_inc = inc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // prefix-sum differences round, so allow a few ulps
            prop_assert!(a.value >= max_inc - 1e-12);
        }

        #[test]
        fn window_and_origin_maxima_are_subsets(inc in proptest::collection::vec(-3.0f64..3.0, 3..200), c in 0.3f64..2.0) {
            let p = SamplePath::from_increments(inc).unwrap();
            let all = scan_max_naive(&p, 1).unwrap().value;
            if let Ok(w) = erdos_renyi_window(&p, c) {
                prop_assert!(w.value <= all);
            }
            let de = darling_erdos_max(&p).unwrap();
            // restricted scan with i = 0
            let s = p.prefix_sums();
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for j in 1..=p.len() {
                let v = (s[j] - s[0]) / libm::sqrt(j as f64);
                if v > best { best = v; arg = j; }
            }
            prop_assert_eq!(de.value, best);
            prop_assert_eq!(de.k, arg);
        }
    }
}
