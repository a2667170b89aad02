//! Laplace eigenfunctions on `S³ ≅ SU(2)` and `L²` norms of their products.
//!
//! An eigenfunction of degree `m` (eigenvalue `−m(m+2)`) is stored by its
//! coefficients `a_{α,α′}` in the orthonormal matrix-entry basis
//! `√(m+1)·⟨π_m(g)v_{m,α}, v_{m,α′}⟩`, so `‖f‖_{L²}` is the Frobenius norm of
//! `a`.
//!
//! Three independent routes to `‖fg‖_{L²}`:
//! * [`product_l2_exact`]: Clebsch–Gordan decomposition of `fg` into
//!   eigenspaces (sums `S(k, M, M′)`).
//! * [`product_l2_quadrature`]: the tensor-product Haar rule of
//!   [`crate::su2::haar_quadrature`].
//! * [`TorusQuadrature`]: uses that on `a = cos θ e^{iφ₁}`, `b = sin θ e^{iφ₂}`
//!   the entry `(j, i)` of `π_m` is `d_{ji}(θ)·e^{i(i+j−m)φ₁ + i(i−j)φ₂}`.
//!   For fixed `θ` a product is a trigonometric polynomial, sampled exactly by
//!   a 2-D FFT; after averaging the phases the integrand is a polynomial of
//!   degree `≤ D` in `x = cos 2θ`, so Gauss–Legendre in `x` with `D/2 + 2`
//!   nodes is exact. This is the fast path used by the scans.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::cg::{cg_decompose, CgTable};
use crate::error::{domain, Error, Result};
use crate::par::{self, Execution};
use crate::su2::{
    gauss_legendre, haar_samples, GroupElement, HaarQuadrature, IrrepEvaluator, IrrepMatrix,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenfunction {
    m: u32,
    coeffs: Vec<Complex64>,
}

impl Eigenfunction {
    /// `coeffs` is `(m+1)×(m+1)` row major, row = `α`, column = `α′`.
    pub fn new(m: u32, coeffs: Vec<Complex64>) -> Result<Self> {
        let d = m as usize + 1;
        if coeffs.len() != d * d {
            return domain(format!("degree {m} needs {} coefficients, got {}", d * d, coeffs.len()));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("eigenfunction coefficients must be finite");
        }
        Ok(Self { m, coeffs })
    }

    pub fn constant(c: Complex64) -> Self {
        Self { m: 0, coeffs: vec![c] }
    }

    /// I.i.d. complex Gaussian coefficients, normalized to unit `L²` norm.
    pub fn random<R: Rng + ?Sized>(m: u32, rng: &mut R) -> Self {
        let d = m as usize + 1;
        let coeffs: Vec<Complex64> = (0..d * d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self { m, coeffs }.normalized()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m as usize + 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, row: usize, col: usize) -> Complex64 {
        self.coeffs[row * self.dim() + col]
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.l2_norm();
        if norm > 0.0 {
            self.coeffs.iter_mut().for_each(|z| *z /= norm);
        }
        self
    }

    /// Value at `g` given the representation matrix `π_m(g)`.
    pub fn evaluate_with(&self, d: &IrrepMatrix) -> Complex64 {
        debug_assert_eq!(d.m(), self.m);
        let s: Complex64 = self.coeffs.iter().zip(d.entries()).map(|(a, x)| a * x).sum();
        s * (self.m as f64 + 1.0).sqrt()
    }
}

/// `Σ a_{α,α′}·√(m+1)·⟨π_m(g)v_{m,α}, v_{m,α′}⟩`.
pub fn evaluate(f: &Eigenfunction, g: &GroupElement) -> Complex64 {
    f.evaluate_with(&IrrepEvaluator::new(f.m).matrix(g))
}

/// Normalized zonal eigenfunction `χ_n`: coefficients `I/√(n+1)`.
pub fn zonal(n: u32) -> Eigenfunction {
    let d = n as usize + 1;
    let mut coeffs = vec![ZERO; d * d];
    let v = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        coeffs[i * d + i] = Complex64::new(v, 0.0);
    }
    Eigenfunction { m: n, coeffs }
}

/// Unit-norm random eigenfunction from a seeded stream.
pub fn random_eigenfunction(m: u32, seed: u64) -> Eigenfunction {
    Eigenfunction::random(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// The random pair used by the scans for `(m, n, seed)`.
pub fn random_pair(m: u32, n: u32, seed: u64) -> (Eigenfunction, Eigenfunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = Eigenfunction::random(m, &mut rng);
    let g = Eigenfunction::random(n, &mut rng);
    (f, g)
}

/// Decomposition of `fg` into eigenspace components, `deg f = m ≥ n = deg g`.
#[derive(Debug, Clone)]
pub struct ProductDecomposition {
    m: u32,
    n: u32,
    /// Degrees `m+n, m+n−2, …, m−n`.
    ks: Vec<u32>,
    /// `S(k, γ, γ′)`, one `(k+1)×(k+1)` block per `k`.
    sums: Vec<Vec<Complex64>>,
    components: Vec<Eigenfunction>,
}

impl ProductDecomposition {
    pub fn ks(&self) -> &[u32] {
        &self.ks
    }

    pub fn components(&self) -> &[Eigenfunction] {
        &self.components
    }

    pub fn component(&self, k: u32) -> Option<&Eigenfunction> {
        self.ks.iter().position(|&x| x == k).map(|s| &self.components[s])
    }

    /// `S(k, M, M′)`; zero outside the triangle range.
    pub fn s_sum(&self, k: u32, big_m: i32, big_m_prime: i32) -> Complex64 {
        let Some(s) = self.ks.iter().position(|&x| x == k) else {
            return ZERO;
        };
        let ki = k as i32;
        if big_m.abs() > ki || big_m_prime.abs() > ki || (big_m + ki) % 2 != 0 || (big_m_prime + ki) % 2 != 0 {
            return ZERO;
        }
        let (r, c) = (((big_m + ki) / 2) as usize, ((big_m_prime + ki) / 2) as usize);
        self.sums[s][r * (k as usize + 1) + c]
    }

    /// `(n+1) Σ_{k,M,M′} (m+1)/(k+1) |S(k,M,M′)|²`.
    pub fn norm_sqr(&self) -> f64 {
        let (mf, nf) = (self.m as f64 + 1.0, self.n as f64 + 1.0);
        self.ks
            .iter()
            .zip(&self.sums)
            .map(|(&k, s)| nf * mf / (k as f64 + 1.0) * s.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn evaluate(&self, g: &GroupElement) -> Complex64 {
        self.components.iter().map(|c| evaluate(c, g)).sum()
    }
}

/// Degree check shared by the product routines.
fn check_order(f: &Eigenfunction, g: &Eigenfunction) -> Result<()> {
    if f.m < g.m {
        return domain(format!("need deg f >= deg g, got {} < {}; swap the factors", f.m, g.m));
    }
    Ok(())
}

/// [`product_decompose`] with a prebuilt table for `(deg f, deg g)`.
pub fn product_decompose_with(t: &CgTable, f: &Eigenfunction, g: &Eigenfunction) -> Result<ProductDecomposition> {
    check_order(f, g)?;
    if t.m() != f.m || t.n() != g.m {
        return domain(format!("table ({}, {}) does not match degrees ({}, {})", t.m(), t.n(), f.m, g.m));
    }
    let (mu, nu) = (f.m as usize, g.m as usize);
    let top = mu + nu;
    let ks = t.ks();
    let mut sums: Vec<Vec<Complex64>> =
        ks.iter().map(|&k| vec![ZERO; (k as usize + 1) * (k as usize + 1)]).collect();

    let nz_f: Vec<(usize, usize, Complex64)> = (0..=mu)
        .flat_map(|i| (0..=mu).map(move |ip| (i, ip)))
        .map(|(i, ip)| (i, ip, f.coeff(i, ip)))
        .filter(|x| x.2 != ZERO)
        .collect();
    let nz_g: Vec<(usize, usize, Complex64)> = (0..=nu)
        .flat_map(|j| (0..=nu).map(move |jp| (j, jp)))
        .map(|(j, jp)| (j, jp, g.coeff(j, jp)))
        .filter(|x| x.2 != ZERO)
        .collect();

    for &(i, ip, a) in &nz_f {
        for &(j, jp, b) in &nz_g {
            let (big, big_p) = (i + j, ip + jp);
            let c1 = t.pair_column(i, j);
            let c2 = t.pair_column(ip, jp);
            let ab = a * b;
            let s_max = nu.min(big).min(top - big).min(big_p).min(top - big_p);
            for s in 0..=s_max {
                let w = (top - 2 * s) + 1;
                sums[s][(big - s) * w + big_p - s] += ab * (c1[s] * c2[s]);
            }
        }
    }

    let scale = (f.m as f64 + 1.0) * (g.m as f64 + 1.0);
    let components = ks
        .iter()
        .zip(&sums)
        .map(|(&k, s)| {
            let c = (scale / (k as f64 + 1.0)).sqrt();
            Eigenfunction { m: k, coeffs: s.iter().map(|z| z * c).collect() }
        })
        .collect();
    Ok(ProductDecomposition { m: f.m, n: g.m, ks, sums, components })
}

pub fn product_decompose(f: &Eigenfunction, g: &Eigenfunction) -> Result<ProductDecomposition> {
    check_order(f, g)?;
    let t = cg_decompose(f.m, g.m)?;
    product_decompose_with(&t, f, g)
}

/// `‖fg‖_{L²}` from the Clebsch–Gordan sums.
pub fn product_l2_exact(f: &Eigenfunction, g: &Eigenfunction) -> Result<f64> {
    Ok(product_decompose(f, g)?.norm_sqr().sqrt())
}

pub fn product_l2_exact_with(t: &CgTable, f: &Eigenfunction, g: &Eigenfunction) -> Result<f64> {
    Ok(product_decompose_with(t, f, g)?.norm_sqr().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureNorm {
    pub value: f64,
    /// Set when some quadrature level is below `4(m+n)+8`.
    pub under_resolved: bool,
}

/// Level rule for the Haar quadrature oracle: `max(32, 4(m+n)+8)`.
pub fn quadrature_levels(m: u32, n: u32) -> (usize, usize, usize) {
    let l = 32.max(4 * (m + n) as usize + 8);
    (l, l, l)
}

/// `√(Σ wᵢ |f(gᵢ) g(gᵢ)|²)` over the quadrature nodes.
pub fn product_l2_quadrature(f: &Eigenfunction, g: &Eigenfunction, q: &HaarQuadrature) -> QuadratureNorm {
    product_l2_quadrature_batch(&[(f.clone(), g.clone())], q, Execution::Sequential)[0]
}

/// Quadrature norms for many pairs sharing degrees `(m, n)`; the
/// representation matrices are built once per node.
pub fn product_l2_quadrature_batch(
    pairs: &[(Eigenfunction, Eigenfunction)],
    q: &HaarQuadrature,
    exec: Execution,
) -> Vec<QuadratureNorm> {
    let Some((f0, g0)) = pairs.first() else {
        return Vec::new();
    };
    let (m, n) = (f0.m, g0.m);
    assert!(pairs.iter().all(|(f, g)| f.m == m && g.m == n), "batch must share degrees");
    let (em, en) = (IrrepEvaluator::new(m), IrrepEvaluator::new(n));
    let chunk = 4096;
    let n_chunks = q.len().div_ceil(chunk);
    let partial: Vec<Vec<f64>> = par::map_range(exec, n_chunks, |c| {
        let mut acc = vec![0.0; pairs.len()];
        for idx in c * chunk..((c + 1) * chunk).min(q.len()) {
            let (dm, dn) = (em.matrix(&q.nodes[idx]), en.matrix(&q.nodes[idx]));
            let w = q.weights[idx];
            for (slot, (f, g)) in acc.iter_mut().zip(pairs) {
                *slot += w * (f.evaluate_with(&dm) * g.evaluate_with(&dn)).norm_sqr();
            }
        }
        acc
    });
    let need = 4 * (m + n) as usize + 8;
    (0..pairs.len())
        .map(|p| QuadratureNorm {
            value: partial.iter().map(|v| v[p]).sum::<f64>().sqrt(),
            under_resolved: q.min_level() < need,
        })
        .collect()
}

fn smooth_len(min: usize) -> usize {
    (min.max(1)..)
        .find(|&l| {
            let mut x = l;
            for p in [2, 3, 5] {
                while x % p == 0 {
                    x /= p;
                }
            }
            x == 1
        })
        .expect("smooth numbers are unbounded")
}

/// Exact product norms on the torus-by-interval parameterization; see the
/// module docs. Immutable and shareable across threads.
pub struct TorusQuadrature {
    max_degree: u32,
    len: usize,
    weights: Vec<f64>,
    /// `π_m(θ_t)` at `φ₁ = φ₂ = 0`, per degree and node.
    tables: BTreeMap<u32, Vec<IrrepMatrix>>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TorusQuadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusQuadrature")
            .field("max_degree", &self.max_degree)
            .field("len", &self.len)
            .field("nodes", &self.weights.len())
            .finish()
    }
}

impl TorusQuadrature {
    /// Rule exact for products of eigenfunctions whose degrees are drawn from
    /// `degrees` (as a multiset) and sum to at most `Σ degrees`.
    pub fn new(degrees: &[u32]) -> Self {
        let max_degree: u32 = degrees.iter().sum();
        let n_theta = max_degree as usize / 2 + 2;
        let (x, w) = gauss_legendre(n_theta);
        let thetas: Vec<f64> = x.iter().map(|x| 0.5 * x.clamp(-1.0, 1.0).acos()).collect();
        let mut tables = BTreeMap::new();
        for &m in degrees {
            tables.entry(m).or_insert_with(|| {
                let ev = IrrepEvaluator::new(m);
                thetas.iter().map(|&t| ev.matrix(&GroupElement::from_angles(t, 0.0, 0.0))).collect()
            });
        }
        let len = smooth_len(2 * max_degree as usize + 1);
        let fft = FftPlanner::new().plan_fft_inverse(len);
        Self { max_degree, len, weights: w.iter().map(|w| 0.5 * w).collect(), tables, fft }
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Samples `f` on the `L×L` phase grid at node `t` (axes transposed, which
    /// is harmless for pointwise products).
    fn sample(&self, f: &Eigenfunction, d: &IrrepMatrix, grid: &mut [Complex64], scratch: &mut [Complex64]) {
        let l = self.len;
        let mu = f.m as usize;
        grid.iter_mut().for_each(|z| *z = ZERO);
        let root = (f.m as f64 + 1.0).sqrt();
        for j in 0..=mu {
            for i in 0..=mu {
                let p1 = (i + j) as i64 - mu as i64;
                let p2 = i as i64 - j as i64;
                let r1 = p1.rem_euclid(l as i64) as usize;
                let r2 = p2.rem_euclid(l as i64) as usize;
                grid[r1 * l + r2] += f.coeff(j, i) * d.at(j, i) * root;
            }
        }
        self.fft.process(grid);
        for r in 0..l {
            for c in 0..l {
                scratch[c * l + r] = grid[r * l + c];
            }
        }
        self.fft.process(scratch);
        grid.copy_from_slice(scratch);
    }

    /// `‖f₁ f₂ ⋯ f_r‖_{L²}`.
    pub fn l2_norm_of_product(&self, factors: &[&Eigenfunction]) -> Result<f64> {
        let total: u32 = factors.iter().map(|f| f.m).sum();
        if total > self.max_degree {
            return domain(format!("product degree {total} exceeds rule degree {}", self.max_degree));
        }
        let mut per_factor = Vec::with_capacity(factors.len());
        for f in factors {
            let t = self.tables.get(&f.m).ok_or_else(|| {
                Error::Domain(format!("no table for degree {} in this rule", f.m))
            })?;
            per_factor.push(t);
        }
        let cells = self.len * self.len;
        let mut prod = vec![ZERO; cells];
        let mut grid = vec![ZERO; cells];
        let mut scratch = vec![ZERO; cells];
        let mut acc = 0.0;
        for (t, w) in self.weights.iter().enumerate() {
            prod.iter_mut().for_each(|z| *z = Complex64::new(1.0, 0.0));
            for (f, tab) in factors.iter().zip(&per_factor) {
                self.sample(f, &tab[t], &mut grid, &mut scratch);
                prod.iter_mut().zip(&grid).for_each(|(p, g)| *p *= g);
            }
            acc += w * prod.iter().map(|z| z.norm_sqr()).sum::<f64>() / cells as f64;
        }
        Ok(acc.max(0.0).sqrt())
    }
}

/// `‖fg‖ / (‖f‖·‖g‖·√(n+1))` with `n = min(deg f, deg g)`.
pub fn bilinear_ratio(f: &Eigenfunction, g: &Eigenfunction) -> Result<f64> {
    let (hi, lo) = if f.m >= g.m { (f, g) } else { (g, f) };
    let rule = TorusQuadrature::new(&[hi.m, lo.m]);
    bilinear_ratio_with(&rule, hi, lo)
}

pub fn bilinear_ratio_with(rule: &TorusQuadrature, f: &Eigenfunction, g: &Eigenfunction) -> Result<f64> {
    let (nf, ng) = (f.l2_norm(), g.l2_norm());
    if nf == 0.0 || ng == 0.0 {
        return domain("bilinear_ratio of a zero eigenfunction");
    }
    let n = f.m.min(g.m) as f64;
    Ok(rule.l2_norm_of_product(&[f, g])? / (nf * ng * (n + 1.0).sqrt()))
}

/// `‖f₁f₂f₃‖ / ((m₂+1)^{1/2}(m₃+1) Π‖fᵢ‖)` with degrees sorted `m₁ ≥ m₂ ≥ m₃`.
pub fn trilinear_ratio_with(rule: &TorusQuadrature, fs: [&Eigenfunction; 3]) -> Result<f64> {
    let mut degs: Vec<u32> = fs.iter().map(|f| f.m).collect();
    degs.sort_unstable_by(|a, b| b.cmp(a));
    let norms: f64 = fs.iter().map(|f| f.l2_norm()).product();
    if norms == 0.0 {
        return domain("trilinear_ratio of a zero eigenfunction");
    }
    let scale = (degs[1] as f64 + 1.0).sqrt() * (degs[2] as f64 + 1.0);
    Ok(rule.l2_norm_of_product(&fs)? / (norms * scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub m: u32,
    pub n: u32,
    pub seed: u64,
    pub ratio: f64,
}

/// Ratios for the random pairs `random_pair(m, n, seed)`, `seed ∈ seeds`.
pub fn ratio_scan(m: u32, n: u32, seeds: &[u64], exec: Execution) -> Result<Vec<RatioRow>> {
    if m < n {
        return domain(format!("ratio_scan needs m >= n, got ({m}, {n})"));
    }
    let rule = TorusQuadrature::new(&[m, n]);
    par::map(exec, seeds, |&seed| {
        let (f, g) = random_pair(m, n, seed);
        bilinear_ratio_with(&rule, &f, &g).map(|ratio| RatioRow { m, n, seed, ratio })
    })
    .into_iter()
    .collect()
}

/// Ratio of the zonal pair `(χ_{2n}, χ_n)` from the exact decomposition.
pub fn zonal_ratio(n: u32) -> Result<f64> {
    let (f, g) = (zonal(2 * n), zonal(n));
    Ok(product_l2_exact(&f, &g)? / (n as f64 + 1.0).sqrt())
}

/// Lower bound on `sup |f|`: best of `samples` Haar points, then 20 rounds of
/// coordinate-wise golden-section search in `(θ, φ₁, φ₂)`.
pub fn sup_norm_estimate(f: &Eigenfunction, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return domain("sup_norm_estimate needs at least one sample");
    }
    let ev = IrrepEvaluator::new(f.m);
    let value = |x: &[f64; 3]| f.evaluate_with(&ev.matrix(&GroupElement::from_angles(x[0], x[1], x[2]))).norm();
    let mut best = [0.0; 3];
    let mut best_val = f64::NEG_INFINITY;
    for g in haar_samples(seed, samples) {
        let x = [g.b().norm().atan2(g.a().norm()), g.a().arg(), g.b().arg()];
        let v = value(&x);
        if v > best_val {
            best_val = v;
            best = x;
        }
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut width = [PI / 8.0, PI / 4.0, PI / 4.0];
    for _ in 0..20 {
        for axis in 0..3 {
            let (mut lo, mut hi) = (best[axis] - width[axis], best[axis] + width[axis]);
            let at = |t: f64| {
                let mut x = best;
                x[axis] = t;
                value(&x)
            };
            let mut x1 = hi - ratio * (hi - lo);
            let mut x2 = lo + ratio * (hi - lo);
            let (mut v1, mut v2) = (at(x1), at(x2));
            for _ in 0..30 {
                if v1 > v2 {
                    hi = x2;
                    x2 = x1;
                    v2 = v1;
                    x1 = hi - ratio * (hi - lo);
                    v1 = at(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    v1 = v2;
                    x2 = lo + ratio * (hi - lo);
                    v2 = at(x2);
                }
            }
            let (x, v) = if v1 > v2 { (x1, v1) } else { (x2, v2) };
            if v > best_val {
                best_val = v;
                best[axis] = x;
            }
            width[axis] *= 0.5;
        }
    }
    Ok(best_val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{character, haar_sample};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constants() {
        let (f, g) = (Eigenfunction::constant(c(3.0)), Eigenfunction::constant(Complex64::new(0.0, -2.0)));
        assert!((evaluate(&f, &haar_sample(1)) - c(3.0)).norm() < 1e-15);
        let d = product_decompose(&f, &g).unwrap();
        assert_eq!(d.ks(), &[0]);
        assert!((d.component(0).unwrap().coeff(0, 0) - Complex64::new(0.0, -6.0)).norm() < 1e-15);
        assert!((product_l2_exact(&f, &g).unwrap() - 6.0).abs() < 1e-14);
        assert!((bilinear_ratio(&f, &g).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zonal_values() {
        let z = zonal(4);
        assert!((z.l2_norm() - 1.0).abs() < 1e-15);
        assert!((evaluate(&z, &GroupElement::identity()).re - 5.0).abs() < 1e-13);
        let g = haar_sample(5);
        assert!((evaluate(&z, &g) - character(4, &g)).norm() < 1e-12);
    }

    #[test]
    fn zonal_products() {
        assert!((product_l2_exact(&zonal(1), &zonal(1)).unwrap() - 2f64.sqrt()).abs() < 1e-13);
        assert!((product_l2_exact(&zonal(2), &zonal(2)).unwrap() - 3f64.sqrt()).abs() < 1e-13);
        for n in [0, 1, 5, 12] {
            assert!((zonal_ratio(n).unwrap() - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Eigenfunction::new(2, vec![c(1.0); 8]).is_err());
        assert!(product_decompose(&zonal(1), &zonal(2)).is_err());
        let zero = Eigenfunction::new(1, vec![ZERO; 4]).unwrap();
        assert!(bilinear_ratio(&zonal(1), &zero).is_err());
        assert!(sup_norm_estimate(&zonal(1), 0, 0).is_err());
    }

    #[test]
    fn torus_matches_exact() {
        let (f, g) = random_pair(6, 3, 9);
        let exact = product_l2_exact(&f, &g).unwrap();
        let torus = TorusQuadrature::new(&[6, 3]).l2_norm_of_product(&[&f, &g]).unwrap();
        assert!((exact - torus).abs() < 1e-12 * exact);
    }

    #[test]
    fn sup_norm_of_zonal() {
        let s = sup_norm_estimate(&zonal(3), 200, 4).unwrap();
        assert!((s - 4.0).abs() < 1e-6, "{s}");
        let s0 = sup_norm_estimate(&Eigenfunction::constant(c(-2.5)), 3, 4).unwrap();
        assert!((s0 - 2.5).abs() < 1e-15);
    }
}
