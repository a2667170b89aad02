use std::path::PathBuf;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::{num, RunDir};
use crate::{usage, Outcome};
use s3lab::bilinear::{
    product_l2_exact, product_l2_quadrature_batch, quadrature_levels, random_pair, ratio_scan, zonal_ratio, RatioRow,
};
use s3lab::par::Execution;
use s3lab::stats::ls_slope;
use s3lab::su2::haar_quadrature;

/// Largest `m` for which the Haar quadrature cross-check runs.
const CROSS_CHECK_M_MAX: u32 = 8;
const CROSS_CHECK_TOL: f64 = 1e-4;
const ZONAL_FLOOR: f64 = 0.1;

#[derive(Debug, clap::Args, Serialize, Deserialize)]
pub struct Args {
    #[arg(long, default_value_t = 8)]
    pub m_max: u32,
    #[arg(long, default_value_t = 8)]
    pub n_max: u32,
    /// Random pairs per `(m, n)` cell.
    #[arg(long, default_value_t = 50)]
    pub seeds: u64,
    /// First seed; cell seeds are `seed..seed + seeds`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explicit `m` values instead of `1..=m-max`.
    #[arg(long, value_delimiter = ',')]
    pub m_values: Option<Vec<u32>>,
    /// Explicit `n` values instead of `0..=min(m, n-max)`.
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<u32>>,
    #[arg(long)]
    pub no_cross_check: bool,
    /// Also emit the zonal saturation ratios for `n = 1..=n-max`.
    #[arg(long)]
    pub zonal: bool,
    /// Bound asserted for every ratio, up to a relative 1e-9.
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
    /// Allowed `|slope|` of the per-`n` maximum against `log(n+1)`, fitted over `n ≥ 4`.
    #[arg(long, default_value_t = 0.05)]
    pub slope_tol: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn cells(a: &Args) -> Vec<(u32, u32)> {
    let ms: Vec<u32> = a.m_values.clone().unwrap_or_else(|| (1..=a.m_max).collect());
    let mut out = Vec::new();
    for m in ms {
        let top = m.min(a.n_max);
        let ns: Vec<u32> = match &a.n_values {
            Some(v) => v.iter().copied().filter(|&n| n <= top).collect(),
            None => (0..=top).collect(),
        };
        out.extend(ns.into_iter().map(|n| (m, n)));
    }
    out
}

pub fn run(a: &Args, exec: Execution, dir: &mut RunDir) -> Result<Outcome> {
    if a.seeds == 0 {
        return usage("--seeds must be positive");
    }
    let cells = cells(a);
    if cells.is_empty() {
        return usage("empty (m, n) grid");
    }
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    let mut rows: Vec<RatioRow> = Vec::new();
    for &(m, n) in &cells {
        rows.extend(ratio_scan(m, n, &seeds, exec)?);
    }
    dir.csv(
        "ratios.csv",
        &["m", "n", "seed", "ratio"],
        rows.iter().map(|r| vec![r.m.to_string(), r.n.to_string(), r.seed.to_string(), num(r.ratio)]),
    )?;
    let mut outcome = Outcome::default();

    let best = rows.iter().max_by(|x, y| x.ratio.total_cmp(&y.ratio)).copied().expect("nonempty grid");
    outcome.check(best.ratio <= a.constant * (1.0 + 1e-9), || format!("max ratio {} exceeds constant {}", best.ratio, a.constant));
    let n0_max = rows.iter().filter(|r| r.n == 0).map(|r| r.ratio).fold(f64::NAN, f64::max);
    outcome.check(n0_max.is_nan() || n0_max <= 1.0 + 1e-9, || format!("n = 0 ratio {n0_max} above 1"));

    let mut ns: Vec<u32> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let per_n: Vec<(u32, f64)> = ns
        .iter()
        .map(|&n| (n, rows.iter().filter(|r| r.n == n).map(|r| r.ratio).fold(f64::MIN, f64::max)))
        .collect();
    let fit: Vec<&(u32, f64)> = per_n.iter().filter(|(n, _)| *n >= 4).collect();
    let slope = (fit.len() >= 2).then(|| {
        let xs: Vec<f64> = fit.iter().map(|(n, _)| (*n as f64 + 1.0).ln()).collect();
        let ys: Vec<f64> = fit.iter().map(|(_, v)| *v).collect();
        ls_slope(&xs, &ys)
    });
    if let Some(s) = slope {
        outcome.check(s.abs() <= a.slope_tol, || format!("slope {s} vs log(n+1) outside ±{}", a.slope_tol));
    }

    let mut cross = Vec::new();
    if !a.no_cross_check {
        for &(m, n) in cells.iter().filter(|(m, _)| *m <= CROSS_CHECK_M_MAX) {
            let q = haar_quadrature(quadrature_levels(m, n))?;
            let pairs: Vec<_> = seeds.iter().map(|&s| random_pair(m, n, s)).collect();
            let quad = product_l2_quadrature_batch(&pairs, &q, exec);
            for ((s, (f, g)), qn) in seeds.iter().zip(&pairs).zip(quad) {
                let exact = product_l2_exact(f, g)?;
                cross.push((m, n, *s, exact, qn.value, (exact - qn.value).abs() / exact));
            }
        }
        dir.csv(
            "cross_check.csv",
            &["m", "n", "seed", "exact", "quadrature", "rel_diff"],
            cross.iter().map(|c| vec![c.0.to_string(), c.1.to_string(), c.2.to_string(), num(c.3), num(c.4), num(c.5)]),
        )?;
    }
    let cross_max = cross.iter().map(|c| c.5).fold(0.0, f64::max);
    outcome.check(cross_max <= CROSS_CHECK_TOL, || format!("quadrature cross-check off by {cross_max:e}"));

    let mut zonal = Vec::new();
    if a.zonal {
        for n in 1..=a.n_max {
            zonal.push((n, zonal_ratio(n)?));
        }
        dir.csv("zonal.csv", &["n", "ratio"], zonal.iter().map(|(n, r)| vec![n.to_string(), num(*r)]))?;
        let low = zonal.iter().map(|z| z.1).fold(f64::INFINITY, f64::min);
        outcome.check(low >= ZONAL_FLOOR, || format!("zonal ratio {low} below the sharpness floor {ZONAL_FLOOR}"));
    }

    dir.json(
        "summary.json",
        &json!({
            "max": best.ratio,
            "argmax": { "m": best.m, "n": best.n, "seed": best.seed },
            "constant": a.constant,
            "per_n_max": per_n,
            "fitted_slope": slope,
            "slope_tolerance": a.slope_tol,
            "n0_max": if n0_max.is_nan() { None } else { Some(n0_max) },
            "cross_check": { "pairs": cross.len(), "max_rel_diff": cross_max, "tolerance": CROSS_CHECK_TOL },
            "zonal": zonal,
            "breaches": outcome.breaches,
        }),
    )?;
    Ok(outcome)
}
