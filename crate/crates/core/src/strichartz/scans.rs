use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    evolve_l4_norm_flagged, quartic_pair_binned, sample_slab_packet, Dispersion, FrequencyGrid, Node, PacketMode,
    SlabSpec, TimeIntegration, WavePacket,
};
use crate::error::{domain, Result};
use crate::par::{self, Execution};
use crate::stats::{argmax, power_law_exponent};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub nodes: usize,
    /// Trial 0 is the slab indicator, the rest are Gaussian packets.
    pub quotients: Vec<f64>,
    pub max: f64,
    pub argmax: usize,
    /// Set when any trial's time integration was truncated or under-resolved.
    pub truncated: bool,
    pub under_resolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientParams {
    pub delta: f64,
    /// Gaussian packets on top of the indicator.
    pub trials: usize,
    pub k: i64,
    pub seed: u64,
    pub integration: TimeIntegration,
}

fn packet_mode(trial: usize) -> PacketMode {
    if trial == 0 {
        PacketMode::Indicator
    } else {
        PacketMode::GaussianRandom
    }
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

/// `‖φ^{1/4} u‖_{L⁴} / ((M/N)^δ N^{1/4} ‖φ‖₂)` for the indicator of the slab
/// and `trials` Gaussian packets on it, exact periodic time integration.
pub fn strichartz_quotient(
    slab: &SlabSpec,
    h: f64,
    delta: f64,
    trials: usize,
    k: i64,
    seed: u64,
    exec: Execution,
) -> Result<QuotientReport> {
    let params = QuotientParams { delta, trials, k, seed, integration: TimeIntegration::Periodic };
    strichartz_quotient_with(slab, &FrequencyGrid::covering(slab, h)?, &params, exec)
}

/// [`strichartz_quotient`] on an explicit grid and time integration.
pub fn strichartz_quotient_with(
    slab: &SlabSpec,
    grid: &FrequencyGrid,
    params: &QuotientParams,
    exec: Execution,
) -> Result<QuotientReport> {
    let delta = params.delta;
    if !(delta > 0.0 && delta < 0.125) {
        return domain(format!("delta must lie in (0, 1/8), got {delta}"));
    }
    let scale = (slab.m_width / slab.n_radius).powf(delta) * slab.n_radius.powf(0.25);
    let packets = (0..=params.trials)
        .map(|t| sample_slab_packet(slab, grid, packet_mode(t), trial_seed(params.seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let norms = par::map(exec, &packets, |p| {
        evolve_l4_norm_flagged(p, Dispersion::Elliptic, params.k, params.integration, Execution::Sequential)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let quotients: Vec<f64> = norms.iter().zip(&packets).map(|(n, p)| n.value / (scale * p.l2_norm())).collect();
    let (argmax, max) = argmax(&quotients).unwrap_or((0, f64::NAN));
    Ok(QuotientReport {
        nodes: packets[0].len(),
        quotients,
        max,
        argmax,
        truncated: norms.iter().any(|n| n.truncated),
        under_resolved: norms.iter().any(|n| n.under_resolved),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n_values: Vec<u32>,
    pub delta: f64,
    /// Gaussian packets per slab, on top of the indicator.
    pub trials: usize,
    pub h: f64,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { n_values: vec![8, 16, 32, 64], delta: 0.1, trials: 2, h: 0.5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientScanRow {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: f64,
    /// `random` or `boundary` (`|a₂| = (M/N)^{1−4δ}`).
    pub direction: String,
    pub a1: f64,
    pub a2: f64,
    pub c: f64,
    pub xi0_1: f64,
    pub xi0_2: i64,
    pub nodes: usize,
    pub trial: usize,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientScan {
    pub rows: Vec<QuotientScanRow>,
    /// `(N, max quotient)`.
    pub per_n_max: Vec<(u32, f64)>,
    /// Log-log growth exponent of the per-N maximum.
    pub exponent: f64,
    pub max: f64,
}

/// Slabs over `N × {1, √N, N}` with a random and a case-boundary direction each.
pub fn quotient_scan(cfg: &ScanConfig, exec: Execution) -> Result<QuotientScan> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut slabs = Vec::new();
    for &n in &cfg.n_values {
        let nf = n as f64;
        for m in [1.0, nf.sqrt(), nf] {
            for direction in ["random", "boundary"] {
                let xi0 = (rng.random_range(-8.0..8.0), rng.random_range(-8i64..=8));
                let a = if direction == "random" {
                    let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
                    (th.cos(), th.sin())
                } else {
                    let a2 = (m / nf).powf(1.0 - 4.0 * cfg.delta);
                    ((1.0 - a2 * a2).max(0.0).sqrt(), a2)
                };
                let c = a.0 * xi0.0 + a.1 * xi0.1 as f64 + rng.random_range(-0.5..0.5) * m;
                let slab = SlabSpec::new(xi0, a, c, m, nf)?;
                slabs.push((n, direction, slab, rng.random::<u64>()));
            }
        }
    }
    let reports = par::map(exec, &slabs, |(_, _, slab, seed)| {
        strichartz_quotient(slab, cfg.h, cfg.delta, cfg.trials, 0, *seed, Execution::Sequential)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for ((n, direction, slab, _), rep) in slabs.iter().zip(&reports) {
        for (trial, &quotient) in rep.quotients.iter().enumerate() {
            rows.push(QuotientScanRow {
                n: *n,
                m: slab.m_width,
                direction: direction.to_string(),
                a1: slab.a.0,
                a2: slab.a.1,
                c: slab.c,
                xi0_1: slab.xi0.0,
                xi0_2: slab.xi0.1,
                nodes: rep.nodes,
                trial,
                quotient,
            });
        }
    }
    let per_n_max: Vec<(u32, f64)> = cfg
        .n_values
        .iter()
        .map(|&n| (n, rows.iter().filter(|r| r.n == n).map(|r| r.quotient).fold(f64::MIN, f64::max)))
        .collect();
    let xs: Vec<f64> = per_n_max.iter().map(|(n, _)| *n as f64).collect();
    let ys: Vec<f64> = per_n_max.iter().map(|(_, v)| *v).collect();
    let exponent = if xs.len() >= 2 { power_law_exponent(&xs, &ys) } else { f64::NAN };
    let max = ys.iter().cloned().fold(f64::MIN, f64::max);
    Ok(QuotientScan { rows, per_n_max, exponent, max })
}

/// Normalized indicator of `[−N, N]²` on the grid with step `h`.
pub fn box_indicator(n: u32, h: f64) -> Result<WavePacket> {
    box_packet(n, h, PacketMode::Indicator, 0)
}

fn box_packet(n: u32, h: f64, mode: PacketMode, seed: u64) -> Result<WavePacket> {
    if !(h > 0.0 && h.is_finite()) {
        return domain(format!("grid step must be positive, got {h}"));
    }
    let q = (n as f64 / h).floor() as i64;
    let n = n as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::new();
    for xi2 in -n..=n {
        for j in -q..=q {
            let value = match mode {
                PacketMode::Indicator => Complex64::new(1.0, 0.0),
                PacketMode::GaussianRandom => Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
            };
            nodes.push(Node { j, xi2, value });
        }
    }
    Ok(WavePacket::from_nodes(h, nodes)?.normalized())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxScalingRow {
    #[serde(rename = "N")]
    pub n: u32,
    pub nodes: usize,
    pub norm: f64,
    /// `norm / N^{1/4}`.
    pub ratio: f64,
}

/// Elliptic `L⁴_{t,x₁}` norm of the normalized box indicator for each `N`.
pub fn box_scaling(n_values: &[u32], h: f64, exec: Execution) -> Result<Vec<BoxScalingRow>> {
    n_values
        .iter()
        .map(|&n| {
            let p = box_indicator(n, h)?;
            let norm = evolve_l4_norm_flagged(&p, Dispersion::Elliptic, 0, TimeIntegration::Periodic, exec)?.value;
            Ok(BoxScalingRow { n, nodes: p.len(), norm, ratio: norm / (n as f64).powf(0.25) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub dispersion: Dispersion,
    /// Trial 0 is the box indicator, the rest are Gaussian packets.
    pub quotients: Vec<f64>,
    pub max: f64,
}

/// `‖φ^{1/4} u‖_{L⁴_{t,x₁,x₂}} / ‖f‖₂` for data on `[−N, N]²`, hyperbolic by
/// default; `dispersion` allows the elliptic comparison on the same data.
pub fn hyperbolic_l4_quotient(
    n: u32,
    trials: usize,
    h: f64,
    seed: u64,
    dispersion: Dispersion,
    exec: Execution,
) -> Result<HyperbolicReport> {
    if n == 0 || n > 64 {
        return domain(format!("box half-width must lie in 1..=64, got {n}"));
    }
    let packets = (0..=trials)
        .map(|t| box_packet(n, h, packet_mode(t), trial_seed(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let quotients = packets
        .iter()
        .map(|p| Ok(quartic_pair_binned(p, dispersion, 0, true, exec)?.max(0.0).powf(0.25) / p.l2_norm()))
        .collect::<Result<Vec<_>>>()?;
    let max = quotients.iter().cloned().fold(f64::MIN, f64::max);
    Ok(HyperbolicReport { n, dispersion, quotients, max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_quotient() {
        // M = N = 1, h = 2, ξ₀ = (0.9, 0): only the node at the origin survives
        let slab = SlabSpec::new((0.9, 0), (1.0, 0.0), 0.9, 1.0, 1.0).unwrap();
        let rep = strichartz_quotient(&slab, 2.0, 0.1, 0, 0, 0, Execution::Sequential).unwrap();
        assert_eq!(rep.nodes, 1);
        // |u|⁴ = h⁴/h² = h² at unit mass, so the norm⁴ is 4π · (2π/h) · h²
        let want = (4.0 * std::f64::consts::PI * 2.0 * std::f64::consts::PI * 2.0f64).powf(0.25);
        assert!((rep.max - want).abs() < 1e-12 * want);
        assert!(strichartz_quotient(&slab, 2.0, 0.2, 0, 0, 0, Execution::Sequential).is_err());
    }

    #[test]
    fn box_packet_shape() {
        let p = box_indicator(2, 0.5).unwrap();
        assert_eq!(p.len(), 9 * 5);
        assert!((p.mass() - 1.0).abs() < 1e-12);
        assert!(hyperbolic_l4_quotient(65, 0, 0.5, 0, Dispersion::Hyperbolic, Execution::Sequential).is_err());
    }
}
