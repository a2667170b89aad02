use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{fejer_hat, rational_step, Dispersion, Node, WavePacket};
use crate::error::{domain, Error, Result};
use crate::par::{self, Execution};
use crate::Complex64;

/// Support size beyond which the cubic enumeration refuses to run.
pub const MAX_BRUTE_NODES: usize = 64;

fn check_size(p: &WavePacket) -> Result<()> {
    if p.len() > MAX_BRUTE_NODES {
        return Err(Error::Refused(format!(
            "packet has {} nodes, enumeration is limited to {MAX_BRUTE_NODES}",
            p.len()
        )));
    }
    if p.is_empty() {
        return domain("empty wave packet");
    }
    Ok(())
}

/// Nodes bucketed by ξ₁ index, for the solve-for-the-fourth-node step.
fn by_column(p: &WavePacket) -> std::collections::BTreeMap<i64, Vec<usize>> {
    let mut cols = std::collections::BTreeMap::<i64, Vec<usize>>::new();
    for (i, n) in p.nodes.iter().enumerate() {
        cols.entry(n.j).or_default().push(i);
    }
    cols
}

/// `(2π)² h³ Σ φ̂(⟨Λ⟩) v₁v₃v̄₂v̄₄` over quadruples with `ξ₁⁽¹⁾+ξ₁⁽³⁾ = ξ₁⁽²⁾+ξ₁⁽⁴⁾`,
/// by direct enumeration. With `integrate_x2` the `ξ₂` sums must match as
/// well and a further `2π` appears (the `x₂`-integrated quartic).
pub fn quadrilinear_form_frequency(p: &WavePacket, dispersion: Dispersion, k: i64, integrate_x2: bool) -> Result<f64> {
    check_size(p)?;
    let cols = by_column(p);
    let lam: Vec<f64> = p.nodes.iter().map(|n| p.lambda(n, k, dispersion)).collect();
    let nodes = &p.nodes;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i1, n1) in nodes.iter().enumerate() {
        for (i3, n3) in nodes.iter().enumerate() {
            let v13 = n1.value * n3.value;
            for (i2, n2) in nodes.iter().enumerate() {
                let Some(cands) = cols.get(&(n1.j + n3.j - n2.j)) else { continue };
                for &i4 in cands {
                    let n4 = &nodes[i4];
                    if integrate_x2 && n1.xi2 + n3.xi2 != n2.xi2 + n4.xi2 {
                        continue;
                    }
                    let w = fejer_hat(lam[i1] + lam[i3] - lam[i2] - lam[i4]);
                    if w != 0.0 {
                        acc += w * v13 * (n2.value * n4.value).conj();
                    }
                }
            }
        }
    }
    let h3 = p.h.powi(3);
    let pre = if integrate_x2 { (2.0 * PI).powi(3) } else { (2.0 * PI).powi(2) };
    Ok(pre * h3 * acc.re)
}

/// Same quantity as [`quadrilinear_form_frequency`] in `O(P²)`: ordered pairs
/// are binned by their `ξ₁` sum (and `ξ₂` sum) and by `Λ₁+Λ₃` in units of
/// `1/q²` (for `h = p/q`), then neighbouring bins are paired through `φ̂`.
pub fn quartic_pair_binned(
    p: &WavePacket,
    dispersion: Dispersion,
    k: i64,
    integrate_x2: bool,
    exec: Execution,
) -> Result<f64> {
    if p.is_empty() {
        return domain("empty wave packet");
    }
    let Some((pn, q)) = rational_step(p.h) else {
        return domain(format!("pair binning needs a rational step p/q with q <= 1024, got h = {}", p.h));
    };
    let q2 = q * q;
    let jmin = p.nodes.iter().map(|n| n.j).min().unwrap();
    let jmax = p.nodes.iter().map(|n| n.j).max().unwrap();
    let rmin = p.nodes.iter().map(|n| n.xi2).min().unwrap();
    let rmax = p.nodes.iter().map(|n| n.xi2).max().unwrap();
    let nc = (jmax - jmin + 1) as usize;
    let nr = (rmax - rmin + 1) as usize;
    let mut grid = vec![Complex64::new(0.0, 0.0); nc * nr];
    for n in &p.nodes {
        grid[(n.j - jmin) as usize * nr + (n.xi2 - rmin) as usize] = n.value;
    }
    let lam_c: Vec<i64> = (jmin..=jmax).map(|j| pn * pn * j * j).collect();
    let lam_r: Vec<i64> = (rmin..=rmax)
        .map(|x| {
            let row = Node { j: 0, xi2: x, value: Complex64::new(0.0, 0.0) };
            WavePacket::lambda_units(&row, (pn, q), k, dispersion)
        })
        .collect();
    let lo = 2 * (lam_c.iter().min().unwrap() + lam_r.iter().min().unwrap());
    let hi = 2 * (lam_c.iter().max().unwrap() + lam_r.iter().max().unwrap());
    let bins = (hi - lo + 1) as usize;
    let hat: Vec<f64> = (0..q2).map(|d| fejer_hat(d as f64 / q2 as f64)).collect();

    let partial = par::map_range(exec, 2 * nc - 1, |s1| {
        let mut bank = Bins::new(bins);
        let mut acc = 0.0;
        let ca_lo = s1.saturating_sub(nc - 1);
        let ca_hi = s1.min(nc - 1);
        let add = |bank: &mut Bins, ca: usize, ra: usize, rb: usize| {
            let cb = s1 - ca;
            let a = grid[ca * nr + ra];
            let b = grid[cb * nr + rb];
            if a == Complex64::new(0.0, 0.0) || b == Complex64::new(0.0, 0.0) {
                return;
            }
            bank.add((lam_c[ca] + lam_r[ra] + lam_c[cb] + lam_r[rb] - lo) as usize, a * b);
        };
        if integrate_x2 {
            for s2 in 0..(2 * nr - 1) {
                let ra_lo = s2.saturating_sub(nr - 1);
                let ra_hi = s2.min(nr - 1);
                for ca in ca_lo..=ca_hi {
                    for ra in ra_lo..=ra_hi {
                        add(&mut bank, ca, ra, s2 - ra);
                    }
                }
                acc += bank.flush(&hat);
            }
        } else {
            for ca in ca_lo..=ca_hi {
                for ra in 0..nr {
                    for rb in 0..nr {
                        add(&mut bank, ca, ra, rb);
                    }
                }
            }
            acc += bank.flush(&hat);
        }
        acc
    });
    let h3 = p.h.powi(3);
    let pre = if integrate_x2 { (2.0 * PI).powi(3) } else { (2.0 * PI).powi(2) };
    Ok(pre * h3 * partial.iter().sum::<f64>())
}

/// Dense accumulator over `Λ₁+Λ₃` bins, cleared sparsely.
struct Bins {
    val: Vec<Complex64>,
    seen: Vec<bool>,
    touched: Vec<usize>,
}

impl Bins {
    fn new(n: usize) -> Self {
        Self { val: vec![Complex64::new(0.0, 0.0); n], seen: vec![false; n], touched: Vec::new() }
    }

    fn add(&mut self, bin: usize, z: Complex64) {
        if !self.seen[bin] {
            self.seen[bin] = true;
            self.touched.push(bin);
        }
        self.val[bin] += z;
    }

    /// `Σ_{b,b'} B(b) B̄(b') φ̂((b−b')h²)` over the touched bins, then reset.
    fn flush(&mut self, hat: &[f64]) -> f64 {
        let n = self.val.len();
        let mut total = 0.0;
        for &b in &self.touched {
            let z = self.val[b];
            total += hat[0] * z.norm_sqr();
            for (d, w) in hat.iter().enumerate().skip(1) {
                if b + d < n {
                    // (b, b+d) and (b+d, b) together give twice the real part
                    total += 2.0 * w * (z * self.val[b + d].conj()).re;
                }
            }
        }
        for &b in &self.touched {
            self.val[b] = Complex64::new(0.0, 0.0);
            self.seen[b] = false;
        }
        self.touched.clear();
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSplitReport {
    /// Tuples in `Γ`.
    pub gamma_count: u64,
    pub k1_count: u64,
    pub k2_count: u64,
    /// Tuples where any of the two `+k = 0` clauses holds.
    pub k_clause_count: u64,
    /// Tuples with `K₁ + K₂ < 1_Γ`; zero when the cover holds.
    pub cover_violations: u64,
    /// `Σ_Γ |v₁v₂v₃v₄|`.
    pub gamma_total: f64,
    /// `Σ_Γ K₁ |v₁v₂v₃v₄|`, with `K₁` counting its clauses.
    pub k1_part: f64,
    pub k2_part: f64,
}

/// Enumerates `Γ` (ordered pairs `ξ₁⁽¹⁾ ≥ ξ₁⁽³⁾`, `ξ₁⁽²⁾ ≥ ξ₁⁽⁴⁾`, on the
/// `ξ₁` constraint surface with `|⟨|ξ|²+kξ₂⟩| ≤ 1`) and splits each tuple into
/// the four coincidence clauses `K₁` and the remainder `K₂`.
pub fn kernel_split_diagnostics(p: &WavePacket, k: i64) -> Result<KernelSplitReport> {
    check_size(p)?;
    let cols = by_column(p);
    let lam: Vec<f64> = p.nodes.iter().map(|n| p.lambda(n, k, Dispersion::Elliptic)).collect();
    let nodes = &p.nodes;
    let mut r = KernelSplitReport {
        gamma_count: 0,
        k1_count: 0,
        k2_count: 0,
        k_clause_count: 0,
        cover_violations: 0,
        gamma_total: 0.0,
        k1_part: 0.0,
        k2_part: 0.0,
    };
    for (i1, n1) in nodes.iter().enumerate() {
        for (i3, n3) in nodes.iter().enumerate() {
            if n1.j < n3.j {
                continue;
            }
            for (i2, n2) in nodes.iter().enumerate() {
                let Some(cands) = cols.get(&(n1.j + n3.j - n2.j)) else { continue };
                for &i4 in cands {
                    let n4 = &nodes[i4];
                    if n2.j < n4.j || (lam[i1] + lam[i3] - lam[i2] - lam[i4]).abs() > 1.0 {
                        continue;
                    }
                    let clauses = [
                        n1.xi2 == n4.xi2,
                        n3.xi2 == n2.xi2,
                        n1.xi2 + n4.xi2 + k == 0,
                        n3.xi2 + n2.xi2 + k == 0,
                    ];
                    let k1 = clauses.iter().filter(|c| **c).count() as u64;
                    let k2 = u64::from(k1 == 0);
                    let w = (n1.value * n2.value * n3.value * n4.value).norm();
                    r.gamma_count += 1;
                    r.gamma_total += w;
                    r.k1_count += u64::from(k1 > 0);
                    r.k2_count += k2;
                    r.k_clause_count += u64::from(clauses[2] || clauses[3]);
                    r.cover_violations += u64::from(k1 + k2 < 1);
                    r.k1_part += k1 as f64 * w;
                    r.k2_part += k2 as f64 * w;
                }
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet(h: f64, pts: &[(i64, i64, f64, f64)]) -> WavePacket {
        let nodes = pts.iter().map(|&(j, xi2, re, im)| Node { j, xi2, value: Complex64::new(re, im) }).collect();
        WavePacket::from_nodes(h, nodes).unwrap()
    }

    #[test]
    fn single_node() {
        let p = packet(0.5, &[(1, 2, 0.7, -0.2)]);
        let v4 = Complex64::new(0.7, -0.2).norm_sqr().powi(2);
        let want = (2.0 * PI).powi(2) * 0.125 * 2.0 * v4;
        let got = quadrilinear_form_frequency(&p, Dispersion::Elliptic, 3, false).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
        let fast = quartic_pair_binned(&p, Dispersion::Elliptic, 3, false, Execution::Sequential).unwrap();
        assert!((fast - want).abs() < 1e-12 * want);
    }

    #[test]
    fn two_nodes_by_hand() {
        // distinct rows, same column: tuples (1,1,1,1), (2,2,2,2) and the
        // four with {1,3} = {2,4} = {a,b}; ⟨Λ⟩ = 0 on all of them
        let (a, b) = (Complex64::new(1.0, 0.5), Complex64::new(-0.3, 2.0));
        let p = packet(1.0, &[(0, 0, a.re, a.im), (0, 1, b.re, b.im)]);
        let sum = a.norm_sqr().powi(2) + b.norm_sqr().powi(2) + 4.0 * a.norm_sqr() * b.norm_sqr();
        let want = (2.0 * PI).powi(2) * 2.0 * sum;
        let got = quadrilinear_form_frequency(&p, Dispersion::Elliptic, 0, false).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn refuses_large_support() {
        let pts: Vec<_> = (0..65).map(|i| (i, 0, 1.0, 0.0)).collect();
        let p = packet(1.0, &pts);
        assert!(matches!(
            quadrilinear_form_frequency(&p, Dispersion::Elliptic, 0, false),
            Err(Error::Refused(_))
        ));
        assert!(kernel_split_diagnostics(&p, 0).is_err());
    }

    #[test]
    fn single_row_is_all_k1() {
        let pts: Vec<_> = (0..8).map(|i| (i - 4, 3, 1.0 + i as f64, 0.0)).collect();
        let r = kernel_split_diagnostics(&packet(0.5, &pts), 0).unwrap();
        assert!(r.gamma_count > 0);
        assert_eq!(r.k1_count, r.gamma_count);
        assert_eq!(r.k2_count, 0);
        assert_eq!(r.cover_violations, 0);
    }
}
