//! Free Schrödinger evolution on `ℝ × 𝕋` for frequency-localized data.
//!
//! Data live on the frequency lattice `hℤ × ℤ`: node `(j, ξ₂)` sits at
//! `ξ = (jh, ξ₂)`. With `u(t, x₁) = h Σ_ξ e^{i x₁ξ₁ − itΛ(ξ)} v(ξ)` the
//! variable `x₁` lives on the circle of length `2π/h`, and
//!
//! ```text
//! ∫_ℝ φ(t) ∫_0^{2π/h} |u|⁴ dx₁ dt = (2π)² h³ Σ_{ξ₁⁽¹⁾+ξ₁⁽³⁾=ξ₁⁽²⁾+ξ₁⁽⁴⁾} φ̂(⟨Λ⟩) v₁ v₃ v̄₂ v̄₄
//! ```
//!
//! where `φ(t) = ∫ φ̂(τ) e^{itτ} dτ` is the Fejér weight and `⟨Λ⟩` the
//! alternating sum of `Λ` over the four nodes. Masses are `h Σ |v|²`.
//!
//! Dispersion relations: `Λ = ξ₁² + ξ₂² + kξ₂` (elliptic, with the Galilean
//! parameter `k`) and `Λ = ξ₁² − ξ₂²` (hyperbolic, `k` ignored).

mod evolve;
mod quartic;
mod scans;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Complex64;

pub use evolve::{evolve_l4_norm, evolve_l4_norm_flagged, fejer_window_mass, sine_integral, L4Norm, TimeIntegration};
pub use quartic::{
    kernel_split_diagnostics, quadrilinear_form_frequency, quartic_pair_binned, KernelSplitReport, MAX_BRUTE_NODES,
};
pub use scans::{
    box_indicator, box_scaling, hyperbolic_l4_quotient, quotient_scan, strichartz_quotient, strichartz_quotient_with,
    BoxScalingRow, HyperbolicReport, QuotientParams, QuotientReport, QuotientScan, QuotientScanRow, ScanConfig,
};

/// `φ(t) = 2 (sin(t/2) / (t/2))²`, with value 2 at `t = 0`.
pub fn fejer_weight(t: f64) -> f64 {
    let s = 0.5 * t;
    if s.abs() < 1e-8 {
        return 2.0 * (1.0 - s * s / 3.0);
    }
    let r = s.sin() / s;
    2.0 * r * r
}

/// `φ̂(τ) = 2 max(0, 1 − |τ|)`.
pub fn fejer_hat(tau: f64) -> f64 {
    2.0 * (1.0 - tau.abs()).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dispersion {
    Elliptic,
    Hyperbolic,
}

/// `ℛ = {ξ ∈ ℝ×ℤ : |ξ − ξ₀| ≤ N, |a·ξ − c| ≤ M}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabSpec {
    pub xi0: (f64, i64),
    pub a: (f64, f64),
    pub c: f64,
    #[serde(rename = "M")]
    pub m_width: f64,
    #[serde(rename = "N")]
    pub n_radius: f64,
}

impl SlabSpec {
    /// Rescales `a` to unit length; requires `1 ≤ M ≤ N`.
    pub fn new(xi0: (f64, i64), a: (f64, f64), c: f64, m_width: f64, n_radius: f64) -> Result<Self> {
        let norm = a.0.hypot(a.1);
        if !(norm > 0.0) || !norm.is_finite() {
            return domain("slab direction must be a nonzero finite vector");
        }
        if !(m_width >= 1.0 && n_radius >= m_width && n_radius.is_finite()) {
            return domain(format!("slab needs 1 <= M <= N, got M = {m_width}, N = {n_radius}"));
        }
        if !c.is_finite() || !xi0.0.is_finite() {
            return domain("slab offset and center must be finite");
        }
        Ok(Self { xi0, a: (a.0 / norm, a.1 / norm), c, m_width, n_radius })
    }

    /// Membership from offsets relative to `ξ₀`, so translating `ξ₀` and `c`
    /// together maps node sets onto each other.
    pub fn contains_relative(&self, d1: f64, d2: i64) -> bool {
        let d2 = d2 as f64;
        let c_rel = self.c - (self.a.0 * self.xi0.0 + self.a.1 * self.xi0.1 as f64);
        // nodes on the boundary stay in after translating by grid steps
        let eps = 1e-9 * self.n_radius;
        d1 * d1 + d2 * d2 <= self.n_radius * (self.n_radius + eps)
            && (self.a.0 * d1 + self.a.1 * d2 - c_rel).abs() <= self.m_width + eps
    }

    /// The slab translated by `(r, j)` in frequency, `c` moved along.
    pub fn translated(&self, r: f64, j: i64) -> Self {
        Self {
            xi0: (self.xi0.0 + r, self.xi0.1 + j),
            c: self.c + self.a.0 * r + self.a.1 * j as f64,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub h: f64,
    pub xi1_extent: f64,
    pub xi2_min: i64,
    pub xi2_max: i64,
}

impl FrequencyGrid {
    /// Smallest grid with step `h` covering the slab's disk.
    pub fn covering(slab: &SlabSpec, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return domain(format!("grid step must be positive, got {h}"));
        }
        let r = slab.n_radius.floor() as i64;
        Ok(Self {
            h,
            xi1_extent: slab.xi0.0.abs() + slab.n_radius + h,
            xi2_min: slab.xi0.1 - r,
            xi2_max: slab.xi0.1 + r,
        })
    }

    pub fn covers(&self, slab: &SlabSpec) -> bool {
        let r = slab.n_radius.floor() as i64;
        self.xi1_extent >= slab.xi0.0.abs() + slab.n_radius + self.h
            && self.xi2_min <= slab.xi0.1 - r
            && self.xi2_max >= slab.xi0.1 + r
    }

    /// `h = p/q` in lowest terms with `q ≤ 1024`, when such a form exists.
    pub fn rational_step(&self) -> Option<(i64, i64)> {
        rational_step(self.h)
    }
}

pub(crate) fn rational_step(h: f64) -> Option<(i64, i64)> {
    (1..=1024i64).find_map(|q| {
        let p = (h * q as f64).round();
        (p >= 1.0 && (p / q as f64 - h).abs() <= 1e-12 * h).then_some((p as i64, q))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// `ξ₁ = j·h`.
    pub j: i64,
    pub xi2: i64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    pub h: f64,
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PacketMode {
    Indicator,
    GaussianRandom,
}

impl WavePacket {
    /// Packet from explicit nodes; duplicate positions are rejected.
    pub fn from_nodes(h: f64, mut nodes: Vec<Node>) -> Result<Self> {
        if !(h > 0.0) {
            return domain(format!("grid step must be positive, got {h}"));
        }
        nodes.sort_by_key(|n| (n.xi2, n.j));
        if nodes.windows(2).any(|w| (w[0].xi2, w[0].j) == (w[1].xi2, w[1].j)) {
            return domain("duplicate node in packet");
        }
        Ok(Self { h, nodes })
    }

    pub fn mass(&self) -> f64 {
        self.h * self.nodes.iter().map(|n| n.value.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.l2_norm();
        if norm > 0.0 {
            self.nodes.iter_mut().for_each(|n| n.value /= norm);
        }
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Translation by `(di·h, dxi2)` in frequency.
    pub fn shifted(&self, di: i64, dxi2: i64) -> Self {
        let nodes = self.nodes.iter().map(|n| Node { j: n.j + di, xi2: n.xi2 + dxi2, value: n.value }).collect();
        Self { h: self.h, nodes }
    }

    /// Distinct rows `ξ₂` in the support.
    pub fn rows(&self) -> Vec<i64> {
        let mut r: Vec<i64> = self.nodes.iter().map(|n| n.xi2).collect();
        r.dedup();
        r
    }

    /// `Λ` in units of `1/q²` for `h = p/q`, an integer.
    pub(crate) fn lambda_units(n: &Node, (p, q): (i64, i64), k: i64, dispersion: Dispersion) -> i64 {
        let row = match dispersion {
            Dispersion::Elliptic => n.xi2 * n.xi2 + k * n.xi2,
            Dispersion::Hyperbolic => -n.xi2 * n.xi2,
        };
        p * p * n.j * n.j + q * q * row
    }

    /// `Λ` in real units.
    pub(crate) fn lambda(&self, n: &Node, k: i64, dispersion: Dispersion) -> f64 {
        let x1 = n.j as f64 * self.h;
        let x2 = n.xi2 as f64;
        match dispersion {
            Dispersion::Elliptic => x1 * x1 + x2 * x2 + k as f64 * x2,
            Dispersion::Hyperbolic => x1 * x1 - x2 * x2,
        }
    }
}

/// Nodes of `grid` inside `slab`, visited in order of their offsets from
/// `ξ₀`; indicator mode sets 1, random mode draws i.i.d. complex Gaussians.
/// Normalized to unit mass.
pub fn sample_slab_packet(slab: &SlabSpec, grid: &FrequencyGrid, mode: PacketMode, seed: u64) -> Result<WavePacket> {
    if !grid.covers(slab) {
        return domain("frequency grid does not cover the slab");
    }
    let h = grid.h;
    let r = slab.n_radius.floor() as i64;
    // first node at or right of ξ₀ − N, as an offset index from ξ₀'s cell
    let base = (slab.xi0.0 / h).floor() as i64;
    let frac = slab.xi0.0 - base as f64 * h;
    let span = (slab.n_radius / h).ceil() as i64 + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::new();
    for d2 in -r..=r {
        for dj in -span..=span {
            let d1 = dj as f64 * h - frac;
            if !slab.contains_relative(d1, d2) {
                continue;
            }
            let value = match mode {
                PacketMode::Indicator => Complex64::new(1.0, 0.0),
                PacketMode::GaussianRandom => Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
            };
            nodes.push(Node { j: base + dj, xi2: slab.xi0.1 + d2, value });
        }
    }
    if nodes.is_empty() {
        return domain("slab contains no grid nodes");
    }
    Ok(WavePacket::from_nodes(h, nodes)?.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fejer_values() {
        assert_eq!(fejer_weight(0.0), 2.0);
        assert!((fejer_weight(1.0) - 2.0 * (0.5f64.sin() / 0.5).powi(2)).abs() < 1e-15);
        assert!((fejer_weight(1.0) - 1.838_79).abs() < 1e-5);
        assert_eq!(fejer_hat(0.0), 2.0);
        assert_eq!(fejer_hat(1.5), 0.0);
        for i in 0..=100 {
            assert!(fejer_weight(i as f64 / 100.0) >= 1.0);
        }
    }

    #[test]
    fn slab_validation() {
        assert!(SlabSpec::new((0.0, 0), (0.0, 0.0), 0.0, 1.0, 2.0).is_err());
        assert!(SlabSpec::new((0.0, 0), (1.0, 0.0), 0.0, 3.0, 2.0).is_err());
        let s = SlabSpec::new((0.0, 0), (3.0, 4.0), 0.0, 1.0, 2.0).unwrap();
        assert!((s.a.0.hypot(s.a.1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn packet_support() {
        let slab = SlabSpec::new((0.3, 2), (0.0, 1.0), 2.0, 1.0, 4.0).unwrap();
        let grid = FrequencyGrid::covering(&slab, 0.25).unwrap();
        let p = sample_slab_packet(&slab, &grid, PacketMode::Indicator, 0).unwrap();
        assert!(p.rows().len() <= 3);
        assert!((p.mass() - 1.0).abs() < 1e-12);
        let bad = FrequencyGrid { h: 0.25, xi1_extent: 1.0, xi2_min: 0, xi2_max: 1 };
        assert!(sample_slab_packet(&slab, &bad, PacketMode::Indicator, 0).is_err());
    }
}
