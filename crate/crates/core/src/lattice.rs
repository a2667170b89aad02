//! Exact measure and counting on `ℝ × ℤ` and `ℤ²`, with worst-case scans.
//!
//! * [`annulus_measure`]: measure of `{ξ ∈ ℝ×ℤ : C ≤ |ξ−ξ′|² ≤ C+K}`.
//! * [`count_quadric`], [`count_hyperbola`]: lattice points on
//!   `m² + n² + km + kn = C` and `mn = C` in a box.
//! * [`setb_measure`]: measure of
//!   `{(x,m,n) : |x| ≤ 2l, m,n ≠ 0, |m−k| ≤ N, |n| ≤ N, |lx + mn + C| ≤ slack}`.
//!
//! The "comparable to" relations in these sets are instantiated with constant
//! one (`|m−k| ≤ N`, `|n| ≤ N`) and an explicit `slack` for `≲ 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::par::{self, Execution};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusQuery {
    pub c: f64,
    pub k: f64,
    pub xi1: f64,
    pub xi2: i64,
}

impl AnnulusQuery {
    pub fn new(c: f64, k: f64, xi1: f64, xi2: i64) -> Result<Self> {
        if !(k >= 1.0) || !c.is_finite() || !k.is_finite() || !xi1.is_finite() {
            return domain(format!("annulus query needs finite C and K >= 1, got C = {c}, K = {k}"));
        }
        Ok(Self { c, k, xi1, xi2 })
    }
}

/// Row-by-row closed form: on row `ξ₂ = ξ₂′ + d` the set is
/// `{x : C − d² ≤ (x−ξ₁′)² ≤ C+K−d²}`, of length `2(√hi − √max(lo,0))`.
pub fn annulus_measure(q: &AnnulusQuery) -> f64 {
    let top = q.c + q.k;
    if top < 0.0 {
        return 0.0;
    }
    let d_max = top.sqrt().floor() as i64;
    let mut total = 0.0;
    for d in -d_max..=d_max {
        let d2 = (d * d) as f64;
        let hi = top - d2;
        if hi < 0.0 {
            continue;
        }
        let lo = (q.c - d2).max(0.0);
        total += 2.0 * (hi.sqrt() - lo.sqrt());
    }
    total
}

/// `(2m+k)² + (2n+k)² = 4C + 2k²` rearranged per row: for each `m`, the roots
/// of `n² + kn + (m² + km − C) = 0` via an exact integer discriminant.
pub fn count_quadric(k: i64, c: i64, n_box: i64) -> Result<u64> {
    if n_box < 1 {
        return domain(format!("count_quadric needs N >= 1, got {n_box}"));
    }
    let (k, c) = (k as i128, c as i128);
    let mut count = 0;
    for m in -n_box as i128..=n_box as i128 {
        let disc = k * k - 4 * (m * m + k * m - c);
        if disc < 0 {
            continue;
        }
        let r = disc.isqrt();
        if r * r != disc {
            continue;
        }
        // n = (−k ± r) / 2, both integers iff −k + r is even.
        if (r - k).rem_euclid(2) != 0 {
            continue;
        }
        let roots = if r == 0 { vec![-k / 2] } else { vec![(-k + r) / 2, (-k - r) / 2] };
        count += roots.iter().filter(|&&n| n.abs() <= n_box as i128).count() as u64;
    }
    Ok(count)
}

/// Pairs `m, n ≠ 0` with `|m−k| ≤ N`, `|n| ≤ N` and `mn = C`. Enumerates the
/// `n` box when it is shorter than `√|C|`, otherwise divisors of `|C|` by
/// trial division.
pub fn count_hyperbola(k: i64, c: i64, n_box: i64) -> Result<u64> {
    if n_box < 1 {
        return domain(format!("count_hyperbola needs N >= 1, got {n_box}"));
    }
    if c == 0 {
        return Ok(0);
    }
    if c == i64::MIN {
        return domain("|C| must fit in 63 bits");
    }
    let in_box = |m: i128, n: i128| {
        m != 0 && n != 0 && (m - k as i128).abs() <= n_box as i128 && n.abs() <= n_box as i128
    };
    let abs_c = c.unsigned_abs();
    let root = abs_c.isqrt();
    let c = c as i128;
    let mut count = 0;
    if ((2 * n_box + 1) as u64) < root {
        for n in -n_box as i128..=n_box as i128 {
            if n != 0 && c % n == 0 && in_box(c / n, n) {
                count += 1;
            }
        }
    } else {
        for d in 1..=root as i128 {
            if c % d != 0 {
                continue;
            }
            let e = c / d;
            let mut candidates = vec![d, -d];
            if e.abs() != d {
                candidates.extend([e.abs(), -e.abs()]);
            }
            for n in candidates {
                if in_box(c / n, n) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetBQuery {
    pub l: f64,
    pub k: i64,
    pub c: f64,
    pub m_width: f64,
    pub n_box: f64,
}

impl SetBQuery {
    /// Checks `l ≥ 1` and `1 ≤ M ≤ N`. The upper bound on `l` depends on `δ`
    /// and is checked by [`SetBQuery::check_delta`].
    pub fn new(l: f64, k: i64, c: f64, m_width: f64, n_box: f64) -> Result<Self> {
        if !(l >= 1.0) || !(m_width >= 1.0) || !(n_box >= m_width) || !c.is_finite() || !n_box.is_finite() {
            return domain(format!("need l >= 1 and 1 <= M <= N, got l = {l}, M = {m_width}, N = {n_box}"));
        }
        Ok(Self { l, k, c, m_width, n_box })
    }

    /// `M^{1−4δ} N^{4δ}`.
    pub fn l_max(m_width: f64, n_box: f64, delta: f64) -> f64 {
        m_width.powf(1.0 - 4.0 * delta) * n_box.powf(4.0 * delta)
    }

    pub fn check_delta(&self, delta: f64) -> Result<()> {
        let lm = Self::l_max(self.m_width, self.n_box, delta);
        if self.l > lm * (1.0 + 1e-12) {
            return domain(format!("l = {} exceeds M^(1-4d) N^(4d) = {lm}", self.l));
        }
        Ok(())
    }

    /// `(M/N)^{4δ} N`.
    pub fn scale(&self, delta: f64) -> f64 {
        (self.m_width / self.n_box).powf(4.0 * delta) * self.n_box
    }
}

/// Admissible `(m, n)` with a nonempty `x`-interval, and the total measure.
fn setb_walk(q: &SetBQuery, slack: f64) -> (u64, f64) {
    let nb = q.n_box.floor() as i64;
    if nb < 1 {
        return (0, 0.0);
    }
    let l = q.l;
    let reach = 2.0 * l * l + slack;
    let mut pairs = 0;
    let mut total = 0.0;
    for m in (q.k - nb)..=(q.k + nb) {
        if m == 0 {
            continue;
        }
        // |mn + C| ≤ 2l² + slack is necessary for a nonempty x-interval.
        let (a, b) = ((-q.c - reach) / m as f64, (-q.c + reach) / m as f64);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let n_lo = (lo.ceil() as i64 - 1).max(-nb);
        let n_hi = (hi.floor() as i64 + 1).min(nb);
        for n in n_lo..=n_hi {
            if n == 0 {
                continue;
            }
            let s = (m as f64) * (n as f64) + q.c;
            let x_lo = ((-slack - s) / l).max(-2.0 * l);
            let x_hi = ((slack - s) / l).min(2.0 * l);
            if x_hi > x_lo {
                pairs += 1;
                total += x_hi - x_lo;
            }
        }
    }
    (pairs, total)
}

/// Exact measure of the set `𝓑`; see the module docs.
pub fn setb_measure(q: &SetBQuery, slack: f64) -> f64 {
    setb_walk(q, slack).1
}

/// Number of admissible `(m, n)` whose `x`-interval is nonempty.
pub fn setb_support_pairs(q: &SetBQuery, slack: f64) -> u64 {
    setb_walk(q, slack).0
}

/// Monte-Carlo estimate `(mean, standard error)` of the `𝓑` measure, sampling
/// `x` uniformly in `[−2l, 2l]` and `(m, n)` uniformly in the admissible box.
pub fn setb_monte_carlo(q: &SetBQuery, slack: f64, samples: usize, seed: u64) -> (f64, f64) {
    let nb = q.n_box.floor() as i64;
    if nb < 1 || samples == 0 {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ms: Vec<i64> = ((q.k - nb)..=(q.k + nb)).filter(|&m| m != 0).collect();
    let ns: Vec<i64> = (-nb..=nb).filter(|&n| n != 0).collect();
    let volume = 4.0 * q.l * ms.len() as f64 * ns.len() as f64;
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = rng.random_range(-2.0 * q.l..=2.0 * q.l);
        let m = ms[rng.random_range(0..ms.len())];
        let n = ns[rng.random_range(0..ns.len())];
        if (q.l * x + (m as f64) * (n as f64) + q.c).abs() <= slack {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (volume * p, volume * (p * (1.0 - p) / samples as f64).sqrt())
}

// ---------------------------------------------------------------------------
// Scans

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma {
    /// Annulus measure on `ℝ × ℤ`.
    Measure,
    /// Quadric count `m² + n² + km + kn = C`.
    Quadric,
    /// Hyperbola count `mn = C`.
    Hyperbola,
    /// Measure of the set `𝓑`.
    SetB,
}

impl Lemma {
    pub fn label(self) -> &'static str {
        match self {
            Lemma::Measure => "5.1",
            Lemma::Quadric => "5.2a",
            Lemma::Hyperbola => "5.2b",
            Lemma::SetB => "5.3",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [Lemma::Measure, Lemma::Quadric, Lemma::Hyperbola, Lemma::SetB]
            .into_iter()
            .find(|l| l.label() == s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureGrid {
    pub queries: usize,
    pub c_max: f64,
    pub k_max: f64,
}

impl Default for MeasureGrid {
    fn default() -> Self {
        Self { queries: 10_000, c_max: 1e6, k_max: 1e3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub lemma: &'static str,
    /// How `C` was drawn: `uniform`, `near-square` or `small`.
    pub bucket: &'static str,
    pub c: f64,
    pub k: f64,
    pub xi1: f64,
    pub xi2: i64,
    pub value: f64,
    pub normalized_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub lemma: String,
    pub rows: usize,
    pub max: f64,
    pub argmax: usize,
    /// Growth exponent or slope, when the scan defines one.
    pub fitted: Option<f64>,
    /// Per-slice maxima, `(slice label, max)`.
    pub slices: Vec<(String, f64)>,
}

fn summarize(lemma: Lemma, values: &[f64], fitted: Option<f64>, slices: Vec<(String, f64)>) -> ScanSummary {
    let (argmax, max) = stats::argmax(values).unwrap_or((0, f64::NAN));
    ScanSummary { lemma: lemma.label().into(), rows: values.len(), max, argmax, fitted, slices }
}

/// Random annulus queries; a third each with `C` uniform in `[0, C_max]`,
/// `C` just below a perfect square, and small `C ∈ [−K, 10]`.
pub fn scan_measure(grid: &MeasureGrid, seed: u64, exec: Execution) -> (Vec<MeasureRow>, ScanSummary) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let queries: Vec<(&'static str, AnnulusQuery)> = (0..grid.queries)
        .map(|i| {
            let k = rng.random_range(1.0..=grid.k_max);
            let (bucket, c) = match i % 3 {
                0 => ("uniform", rng.random_range(0.0..=grid.c_max)),
                1 => {
                    let s = rng.random_range(1..=(grid.c_max.sqrt() as i64)) as f64;
                    ("near-square", s * s - rng.random_range(0.0..=1.0) * k)
                }
                _ => ("small", rng.random_range(-k..=10.0)),
            };
            let xi1 = rng.random_range(-100.0..=100.0);
            let xi2 = rng.random_range(-100..=100);
            (bucket, AnnulusQuery { c, k, xi1, xi2 })
        })
        .collect();
    let rows: Vec<MeasureRow> = par::map(exec, &queries, |(bucket, q)| {
        let value = annulus_measure(q);
        MeasureRow {
            lemma: Lemma::Measure.label(),
            bucket,
            c: q.c,
            k: q.k,
            xi1: q.xi1,
            xi2: q.xi2,
            value,
            normalized_ratio: value / q.k,
        }
    });
    let ratios: Vec<f64> = rows.iter().map(|r| r.normalized_ratio).collect();
    let slices = ["uniform", "near-square", "small"]
        .iter()
        .map(|b| {
            let mx = rows.iter().filter(|r| r.bucket == *b).map(|r| r.normalized_ratio).fold(0.0, f64::max);
            (b.to_string(), mx)
        })
        .collect();
    (rows, summarize(Lemma::Measure, &ratios, None, slices))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountGrid {
    pub n_values: Vec<i64>,
    pub trials: usize,
}

impl Default for CountGrid {
    fn default() -> Self {
        Self { n_values: vec![64, 128, 256, 512], trials: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub lemma: &'static str,
    pub n_box: i64,
    pub k: i64,
    pub c: i64,
    pub value: u64,
    /// `count / N^{0.3}`.
    pub normalized_ratio: f64,
}

/// Random `(k, C)` per box size, `C` taken from a random point of the box so
/// the count is at least one; `k` uniform in `[−4N, 4N]`. The fitted value is
/// the least-squares exponent of the per-`N` maximum count.
pub fn scan_counts(lemma: Lemma, grid: &CountGrid, seed: u64, exec: Execution) -> Result<(Vec<CountRow>, ScanSummary)> {
    if !matches!(lemma, Lemma::Quadric | Lemma::Hyperbola) {
        return domain("scan_counts handles the quadric and hyperbola counts only");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    for &nb in &grid.n_values {
        if nb < 1 {
            return domain(format!("box size must be >= 1, got {nb}"));
        }
        for _ in 0..grid.trials {
            let k = rng.random_range(-4 * nb..=4 * nb);
            let c = match lemma {
                Lemma::Quadric => {
                    let (m, n) = (rng.random_range(-nb..=nb), rng.random_range(-nb..=nb));
                    m * m + n * n + k * (m + n)
                }
                _ => {
                    let m = loop {
                        let m = k + rng.random_range(-nb..=nb);
                        if m != 0 {
                            break m;
                        }
                    };
                    let n = loop {
                        let n = rng.random_range(-nb..=nb);
                        if n != 0 {
                            break n;
                        }
                    };
                    m * n
                }
            };
            jobs.push((nb, k, c));
        }
    }
    let rows: Vec<CountRow> = par::map(exec, &jobs, |&(nb, k, c)| {
        let value = match lemma {
            Lemma::Quadric => count_quadric(k, c, nb),
            _ => count_hyperbola(k, c, nb),
        }
        .expect("box size checked above");
        CountRow {
            lemma: lemma.label(),
            n_box: nb,
            k,
            c,
            value,
            normalized_ratio: value as f64 / (nb as f64).powf(0.3),
        }
    });
    let mut slices = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &nb in &grid.n_values {
        let mx = rows.iter().filter(|r| r.n_box == nb).map(|r| r.value).max().unwrap_or(0);
        slices.push((format!("N={nb}"), mx as f64));
        xs.push(nb as f64);
        ys.push(mx as f64);
    }
    let fitted = (xs.len() >= 2).then(|| stats::power_law_exponent(&xs, &ys));
    let values: Vec<f64> = rows.iter().map(|r| r.value as f64).collect();
    Ok((rows, summarize(lemma, &values, fitted, slices)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetBGrid {
    pub n_values: Vec<f64>,
    pub delta: f64,
    pub slack: f64,
    /// Log-spaced `l` values per `(N, M, regime)`; each gets a structured and
    /// a random query.
    pub l_points: usize,
}

impl Default for SetBGrid {
    fn default() -> Self {
        Self { n_values: vec![64.0, 128.0, 256.0, 512.0, 1024.0], delta: 0.1, slack: 1.0, l_points: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetBRow {
    pub lemma: &'static str,
    /// `a`: `1 ≤ l ≤ 2`; `b`: `2 < l ≤ √N`; `c`: `√N < l ≤ M^{1−4δ}N^{4δ}`.
    pub regime: char,
    pub n_box: f64,
    pub m_width: f64,
    pub l: f64,
    pub k: i64,
    pub c: f64,
    pub value: f64,
    /// `|𝓑| / ((M/N)^{4δ} N)`.
    pub normalized_ratio: f64,
}

/// Worst-case search over `N`, `M ∈ {1, √N, N}` and the three `l` regimes.
/// Each `l` on a log-spaced grid (endpoints included) is queried at the
/// structured point `k = 0, C = 0`, where `mn + C` has the most small values,
/// and at a random one: `k` uniform in `[−2N, 2N]`, `C` within 1 of `−m₀n₀`
/// for a random admissible `(m₀, n₀)`. Fitted value per regime: growth
/// exponent of the per-`N` maximum ratio against `N`; the summary reports the
/// largest of the three.
pub fn scan_setb(grid: &SetBGrid, seed: u64, exec: Execution) -> Result<(Vec<SetBRow>, ScanSummary)> {
    if !(grid.delta > 0.0 && grid.delta < 0.125) {
        return domain(format!("delta must lie in (0, 1/8), got {}", grid.delta));
    }
    if grid.l_points < 2 {
        return domain("l_points must be >= 2");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs: Vec<(char, SetBQuery)> = Vec::new();
    for &nb in &grid.n_values {
        if nb < 1.0 {
            return domain(format!("box size must be >= 1, got {nb}"));
        }
        let ni = nb.floor() as i64;
        for mw in [1.0, nb.sqrt(), nb] {
            let lmax = SetBQuery::l_max(mw, nb, grid.delta);
            let regimes = [('a', 1.0, 2.0), ('b', 2.0, nb.sqrt()), ('c', nb.sqrt(), lmax)];
            for (tag, lo, hi) in regimes {
                let hi: f64 = hi.min(lmax);
                if hi < lo {
                    continue;
                }
                for i in 0..grid.l_points {
                    let l = lo * (hi / lo).powf(i as f64 / (grid.l_points - 1) as f64);
                    jobs.push((tag, SetBQuery::new(l, 0, 0.0, mw, nb)?));
                    let k = rng.random_range(-2 * ni..=2 * ni);
                    let m0 = k + rng.random_range(-ni..=ni);
                    let n0 = rng.random_range(-ni..=ni);
                    let c = -((m0 * n0) as f64) + rng.random_range(-1.0..=1.0);
                    jobs.push((tag, SetBQuery::new(l, k, c, mw, nb)?));
                }
            }
        }
    }
    let rows: Vec<SetBRow> = par::map(exec, &jobs, |(regime, q)| {
        let value = setb_measure(q, grid.slack);
        SetBRow {
            lemma: Lemma::SetB.label(),
            regime: *regime,
            n_box: q.n_box,
            m_width: q.m_width,
            l: q.l,
            k: q.k,
            c: q.c,
            value,
            normalized_ratio: value / q.scale(grid.delta),
        }
    });
    let mut slices = Vec::new();
    let mut worst_exponent = f64::NEG_INFINITY;
    for regime in ['a', 'b', 'c'] {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for &nb in &grid.n_values {
            let mx = rows
                .iter()
                .filter(|r| r.regime == regime && r.n_box == nb)
                .map(|r| r.normalized_ratio)
                .fold(f64::NAN, f64::max);
            if mx.is_finite() {
                slices.push((format!("{regime}:N={nb}"), mx));
                xs.push(nb);
                ys.push(mx);
            }
        }
        if xs.len() >= 2 {
            let exponent = stats::power_law_exponent(&xs, &ys);
            slices.push((format!("{regime}:exponent"), exponent));
            worst_exponent = worst_exponent.max(exponent);
        }
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.normalized_ratio).collect();
    let fitted = worst_exponent.is_finite().then_some(worst_exponent);
    Ok((rows, summarize(Lemma::SetB, &ratios, fitted, slices)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_examples() {
        let q = AnnulusQuery::new(0.0, 1.0, 0.0, 0).unwrap();
        assert_eq!(annulus_measure(&q), 2.0);
        let empty = AnnulusQuery::new(-5.0, 1.0, 0.0, 0).unwrap();
        assert_eq!(annulus_measure(&empty), 0.0);
        assert!(AnnulusQuery::new(0.0, 0.5, 0.0, 0).is_err());
    }

    #[test]
    fn quadric_examples() {
        assert_eq!(count_quadric(0, 25, 5).unwrap(), 12);
        assert_eq!(count_quadric(0, -1, 7).unwrap(), 0);
        assert_eq!(count_quadric(0, 0, 3).unwrap(), 1);
        assert!(count_quadric(0, 1, 0).is_err());
    }

    #[test]
    fn hyperbola_examples() {
        assert_eq!(count_hyperbola(0, 12, 12).unwrap(), 12);
        assert_eq!(count_hyperbola(0, 0, 12).unwrap(), 0);
        assert_eq!(count_hyperbola(1_000_000, 7_000_000, 16).unwrap(), 1);
        let brute = |k: i64, c: i64, nb: i64| {
            let mut t = 0;
            for m in k - nb..=k + nb {
                for n in -nb..=nb {
                    if m != 0 && n != 0 && m * n == c {
                        t += 1;
                    }
                }
            }
            t
        };
        // box branch (2N+1 < √|C|) and divisor branch
        for (k, c, nb) in [(3, 3600, 10), (70, -3600, 12), (3, 3600, 100), (-5, -36, 9)] {
            assert_eq!(count_hyperbola(k, c, nb).unwrap(), brute(k, c, nb), "{k} {c} {nb}");
        }
    }

    #[test]
    fn setb_small() {
        let q = SetBQuery::new(1.0, 0, 0.0, 4.0, 4.0).unwrap();
        // Direct sum: every (m, n) with |mn| ≤ 1 + 2 = 3 gives an interval
        // [max(−2, −1 − mn), min(2, 1 − mn)].
        let mut expect = 0.0;
        for m in -4i64..=4 {
            for n in -4i64..=4 {
                if m == 0 || n == 0 {
                    continue;
                }
                let s = (m * n) as f64;
                let len = (1.0 - s).min(2.0) - (-1.0 - s).max(-2.0);
                if len > 0.0 {
                    expect += len;
                }
            }
        }
        assert!((setb_measure(&q, 1.0) - expect).abs() < 1e-12);
        assert!(SetBQuery::new(1.0, 0, 0.0, 4.0, 2.0).is_err());
    }

    #[test]
    fn lemma_labels_round_trip() {
        for l in [Lemma::Measure, Lemma::Quadric, Lemma::Hyperbola, Lemma::SetB] {
            assert_eq!(Lemma::from_label(l.label()), Some(l));
        }
    }
}
