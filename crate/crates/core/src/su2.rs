//! Irreducible representations of `SU(2)`.
//!
//! A group element is stored by its first row `(a, b)`; the full matrix is
//! `[[a, b], [-b̄, ā]]`. The representation `π_m` acts on homogeneous
//! polynomials of degree `m` by `(π_m(g) f)(u, v) = f(au + cv, bu + dv)` with
//! `c = -b̄`, `d = ā`, and the orthonormal basis is
//! `v_{m,α} = u^j v^{m-j} / √(j!(m-j)!)` with weight `α = 2j - m`.
//!
//! Index convention used by every module: weight `α` is stored at index
//! `j = (α + m) / 2`, and an [`IrrepMatrix`] entry `(α, α')` holds
//! `⟨π_m(g) v_{m,α}, v_{m,α'}⟩` (row = input vector, column = output
//! component). With this layout `D(gh) = D(h)·D(g)`; the matrix of the linear
//! map itself is the transpose, see [`IrrepMatrix::action_matrix`].

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A point of `SU(2)`, equivalently a unit vector of `ℂ² ≅ ℝ⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    a: Complex64,
    b: Complex64,
}

impl GroupElement {
    /// Builds `(a, b)` rescaled onto the unit sphere.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return domain(format!("cannot normalize ({a}, {b}) onto SU(2)"));
        }
        Ok(Self { a: a / norm, b: b / norm })
    }

    pub fn identity() -> Self {
        Self { a: ONE, b: ZERO }
    }

    /// `a = cos θ·e^{iφ₁}`, `b = sin θ·e^{iφ₂}`.
    pub fn from_angles(theta: f64, phi1: f64, phi2: f64) -> Self {
        Self {
            a: Complex64::from_polar(theta.cos(), phi1),
            b: Complex64::from_polar(theta.sin(), phi2),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Full 2×2 matrix, row major.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [-self.b.conj(), self.a.conj()]]
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.a.conj(), b: -self.b }
    }

    /// Rotation angle `θ ∈ [0, π]` with eigenvalues `e^{±iθ}`.
    pub fn rotation_angle(&self) -> f64 {
        let sin = (self.a.im * self.a.im + self.b.norm_sqr()).sqrt();
        sin.atan2(self.a.re)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        ((self.a - other.a).norm_sqr() + (self.b - other.b).norm_sqr()).sqrt()
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        let a = self.a * rhs.a - self.b * rhs.b.conj();
        let b = self.a * rhs.b + self.b * rhs.a.conj();
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        GroupElement { a: a / norm, b: b / norm }
    }
}

pub fn group_mul(g: GroupElement, h: GroupElement) -> GroupElement {
    g * h
}

/// A weight `α ∈ {-m, -m+2, …, m}` of `π_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Weight {
    m: u32,
    alpha: i32,
}

impl Weight {
    pub fn new(m: u32, alpha: i32) -> Result<Self> {
        let mi = m as i64;
        let a = alpha as i64;
        if a.abs() > mi || (a + mi) % 2 != 0 {
            return domain(format!("alpha = {alpha} is not a weight of pi_{m}"));
        }
        Ok(Self { m, alpha })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn alpha(&self) -> i32 {
        self.alpha
    }

    /// Storage index `j = (α + m) / 2`.
    pub fn index(&self) -> usize {
        ((self.alpha + self.m as i32) / 2) as usize
    }
}

/// Weight stored at index `j` of an `(m+1)`-dimensional basis.
pub fn weight_at(m: u32, j: usize) -> i32 {
    2 * j as i32 - m as i32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

/// `c₊(m,α) = ½√((m+α+2)(m-α))` and `c₋(m,α) = ½√((m-α+2)(m+α))`.
pub fn ladder_coeff(m: u32, alpha: i32, direction: Ladder) -> Result<f64> {
    let w = Weight::new(m, alpha)?;
    Ok(ladder_unchecked(w.m as f64, w.alpha as f64, direction))
}

#[inline]
pub(crate) fn ladder_unchecked(m: f64, alpha: f64, direction: Ladder) -> f64 {
    match direction {
        Ladder::Raise => 0.5 * ((m + alpha + 2.0) * (m - alpha)).sqrt(),
        Ladder::Lower => 0.5 * ((m - alpha + 2.0) * (m + alpha)).sqrt(),
    }
}

/// `ln k!` for `k = 0..=n`, by running sums of logarithms.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Matrix of `π_m(g)` in the orthonormal weight basis.
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepMatrix {
    m: u32,
    entries: Vec<Complex64>,
}

impl IrrepMatrix {
    pub fn identity(m: u32) -> Self {
        let d = m as usize + 1;
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = ONE;
        }
        Self { m, entries }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m as usize + 1
    }

    /// Entry by storage indices.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    /// Entry `⟨π_m(g) v_{m,α}, v_{m,α'}⟩` by weights.
    pub fn get(&self, alpha: i32, alpha_prime: i32) -> Result<Complex64> {
        let r = Weight::new(self.m, alpha)?.index();
        let c = Weight::new(self.m, alpha_prime)?.index();
        Ok(self.at(r, c))
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.at(i, i)).sum()
    }

    /// Matrix of the linear map `π_m(g)` (the transpose of the stored layout);
    /// satisfies `A(gh) = A(g)·A(h)`.
    pub fn action_matrix(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                out[c * d + r] = self.at(r, c);
            }
        }
        out
    }

    /// `max |(DᴴD − I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut s = ZERO;
                for k in 0..d {
                    s += self.at(k, i).conj() * self.at(k, j);
                }
                if i == j {
                    s -= ONE;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

/// Dense product of two square row-major matrices of equal size.
pub fn matmul(lhs: &[Complex64], rhs: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let l = lhs[i * d + k];
            if l == ZERO {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += l * rhs[k * d + j];
            }
        }
    }
    out
}

pub fn max_abs_diff(lhs: &[Complex64], rhs: &[Complex64]) -> f64 {
    lhs.iter().zip(rhs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn powers(z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = ONE;
    out.push(acc);
    for _ in 0..n {
        acc *= z;
        out.push(acc);
    }
    out
}

/// Above this dimension the rotation block goes through real matrix products.
const GEMM_MIN_DIM: usize = 32;

/// Spectral evaluation of `π_m`.
///
/// Writing `g = t(α) r(θ) t(β)` with the torus `t(ψ) = diag(e^{iψ}, e^{-iψ})`
/// and the rotation `r(θ) = [[cos θ, sin θ], [-sin θ, cos θ]]`, the torus acts
/// diagonally by `e^{iψα}` and `π_m(r(θ)) = exp(θL)` for the real
/// antisymmetric tridiagonal generator `L = u∂_v − v∂_u`. Conjugating by
/// `diag(i^j)` turns `L` into `iT` with `T` real symmetric, and `exp(θL)` is
/// read off the eigendecomposition of `T`. Every entry is a sum of terms of
/// modulus at most one, so accuracy does not degrade with `m`.
#[derive(Debug, Clone)]
pub struct IrrepEvaluator {
    m: u32,
    /// Eigenvectors of `T` as columns.
    q: DMatrix<f64>,
    lambda: Vec<f64>,
}

impl IrrepEvaluator {
    pub fn new(m: u32) -> Self {
        let d = m as usize + 1;
        let mut t = DMatrix::<f64>::zeros(d, d);
        for j in 0..d - 1 {
            let c = -(((j + 1) * (d - 1 - j)) as f64).sqrt();
            t[(j, j + 1)] = c;
            t[(j + 1, j)] = c;
        }
        let eig = nalgebra::SymmetricEigen::new(t);
        Self { m, q: eig.eigenvectors, lambda: eig.eigenvalues.iter().copied().collect() }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn matrix(&self, g: &GroupElement) -> IrrepMatrix {
        let d = self.m as usize + 1;
        let (a, b) = (g.a(), g.b());
        let theta = b.norm().atan2(a.norm());
        let phi1 = if a.norm() > 0.0 { a.arg() } else { 0.0 };
        let phi2 = if b.norm() > 0.0 { b.arg() } else { 0.0 };
        let (alpha, beta) = (0.5 * (phi1 + phi2), 0.5 * (phi1 - phi2));
        // D(g) = D(t(β)) D(r(θ)) D(t(α)); D(r(θ)) = exp(θL)ᵀ = S Q e^{-iθΛ} Qᵀ S⁻¹,
        // with Q e^{-iθΛ} Qᵀ = Q cos(θΛ) Qᵀ − i Q sin(θΛ) Qᵀ as two real products
        let rot = if d <= GEMM_MIN_DIM { self.rotation_direct(theta) } else { self.rotation_gemm(theta) };
        let weight = |j: usize| (2 * j) as f64 - self.m as f64;
        let ipow = [ONE, Complex64::new(0.0, 1.0), -ONE, Complex64::new(0.0, -1.0)];
        let mut entries = vec![ZERO; d * d];
        for j in 0..d {
            for i in 0..d {
                let s = rot[j * d + i];
                let phase = Complex64::from_polar(1.0, beta * weight(j) + alpha * weight(i));
                entries[j * d + i] = ipow[(j + 4 * d - i) % 4] * phase * s;
            }
        }
        IrrepMatrix { m: self.m, entries }
    }

    /// `Q e^{-iθΛ} Qᵀ`, row-major.
    fn rotation_direct(&self, theta: f64) -> Vec<Complex64> {
        let d = self.lambda.len();
        let e: Vec<Complex64> = self.lambda.iter().map(|l| Complex64::from_polar(1.0, -theta * l)).collect();
        let mut out = vec![ZERO; d * d];
        for j in 0..d {
            for i in 0..d {
                out[j * d + i] = (0..d).map(|l| e[l] * (self.q[(j, l)] * self.q[(i, l)])).sum();
            }
        }
        out
    }

    /// Same as [`Self::rotation_direct`] through two real matrix products.
    fn rotation_gemm(&self, theta: f64) -> Vec<Complex64> {
        let scaled = |f: fn(f64) -> f64| {
            let mut qs = self.q.clone();
            for (l, mut col) in qs.column_iter_mut().enumerate() {
                col *= f(theta * self.lambda[l]);
            }
            qs * self.q.transpose()
        };
        let (re, im) = (scaled(f64::cos), scaled(f64::sin));
        let d = self.lambda.len();
        (0..d * d).map(|idx| Complex64::new(re[(idx / d, idx % d)], -im[(idx / d, idx % d)])).collect()
    }
}

/// Expansion coefficients of `π_m`, independent of the group element.
///
/// Entry `(j, i)` is `Σ_p coef · a^p c^{j-p} b^q d^{m-j-q}` with `q = i − p`,
/// from expanding `(au+cv)^j (bu+dv)^{m-j}` and rescaling by the basis norms.
/// Factorial ratios are evaluated in log space. The alternating sum loses
/// about `m/2` bits to cancellation near `|a| = |b|`, so this form serves as
/// a cross-check for small `m`; [`IrrepEvaluator`] is the production path.
#[derive(Debug, Clone)]
pub struct ExpansionEvaluator {
    m: u32,
    /// `(j, i, p, coef)` grouped by `(j, i)` in row-major order.
    terms: Vec<(u32, u32, u32, f64)>,
}

impl ExpansionEvaluator {
    pub fn new(m: u32) -> Self {
        let mu = m as usize;
        let lf = ln_factorials(mu);
        let mut terms = Vec::new();
        for j in 0..=mu {
            for i in 0..=mu {
                let norm_part = 0.5 * (lf[j] + lf[mu - j] + lf[i] + lf[mu - i]);
                for p in i.saturating_sub(mu - j)..=i.min(j) {
                    let q = i - p;
                    let coef = (norm_part - lf[p] - lf[j - p] - lf[q] - lf[mu - j - q]).exp();
                    terms.push((j as u32, i as u32, p as u32, coef));
                }
            }
        }
        Self { m, terms }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn matrix(&self, g: &GroupElement) -> IrrepMatrix {
        let mu = self.m as usize;
        let d = mu + 1;
        let [[a, b], [c, dd]] = g.matrix();
        let (pa, pb, pc, pd) = (powers(a, mu), powers(b, mu), powers(c, mu), powers(dd, mu));
        let mut entries = vec![ZERO; d * d];
        for &(j, i, p, coef) in &self.terms {
            let (j, i, p) = (j as usize, i as usize, p as usize);
            let q = i - p;
            entries[j * d + i] += pa[p] * pc[j - p] * pb[q] * pd[mu - j - q] * coef;
        }
        IrrepMatrix { m: self.m, entries }
    }
}

/// `π_m(g)` in the orthonormal weight basis; see [`IrrepEvaluator`].
pub fn irrep_matrix(m: u32, g: &GroupElement) -> IrrepMatrix {
    IrrepEvaluator::new(m).matrix(g)
}

/// `χ_m(g) = tr π_m(g)`.
pub fn character(m: u32, g: &GroupElement) -> Complex64 {
    irrep_matrix(m, g).trace()
}

/// `sin((m+1)θ)/sin θ`, replaced by its limit `(±1)^m (m+1)` when
/// `|sin θ| < 1e-8`.
pub fn character_closed_form(m: u32, g: &GroupElement) -> f64 {
    let theta = g.rotation_angle();
    let s = theta.sin();
    if s.abs() < 1e-8 {
        let sign = if theta < PI / 2.0 || m % 2 == 0 { 1.0 } else { -1.0 };
        return sign * (m as f64 + 1.0);
    }
    ((m as f64 + 1.0) * theta).sin() / s
}

/// Haar-distributed element from a normalized 4-dimensional Gaussian.
pub fn haar_sample_rng<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
    loop {
        let x: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if let Ok(g) = GroupElement::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])) {
            return g;
        }
    }
}

pub fn haar_sample(seed: u64) -> GroupElement {
    haar_sample_rng(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// `n` Haar samples from one seeded stream.
pub fn haar_samples(seed: u64, n: usize) -> Vec<GroupElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| haar_sample_rng(&mut rng)).collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor-product cubature for the normalized Haar measure.
#[derive(Debug, Clone)]
pub struct HaarQuadrature {
    pub nodes: Vec<GroupElement>,
    pub weights: Vec<f64>,
    pub levels: (usize, usize, usize),
}

impl HaarQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(&GroupElement) -> Complex64,
    {
        self.nodes.iter().zip(&self.weights).map(|(g, w)| f(g) * *w).sum()
    }

    /// Smallest trapezoid level; trigonometric polynomials of degree below it
    /// in each phase are integrated exactly.
    pub fn min_level(&self) -> usize {
        self.levels.0.min(self.levels.1).min(self.levels.2)
    }
}

/// Gauss–Legendre in `θ ∈ [0, π/2]`, uniform trapezoid in `φ₁, φ₂`, density
/// `cos θ sin θ / (2π²)`. Weights are rescaled to sum to exactly one.
pub fn haar_quadrature(levels: (usize, usize, usize)) -> Result<HaarQuadrature> {
    let (nt, n1, n2) = levels;
    if nt < 2 || n1 < 2 || n2 < 2 {
        return domain(format!("quadrature levels must be >= 2, got {levels:?}"));
    }
    let (x, w) = gauss_legendre(nt);
    let mut nodes = Vec::with_capacity(nt * n1 * n2);
    let mut weights = Vec::with_capacity(nt * n1 * n2);
    let (h1, h2) = (2.0 * PI / n1 as f64, 2.0 * PI / n2 as f64);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = PI / 4.0 * (xi + 1.0);
        let wt = wi * PI / 4.0 * theta.cos() * theta.sin() / (2.0 * PI * PI) * h1 * h2;
        for k1 in 0..n1 {
            for k2 in 0..n2 {
                nodes.push(GroupElement::from_angles(theta, k1 as f64 * h1, k2 as f64 * h2));
                weights.push(wt);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(HaarQuadrature { nodes, weights, levels })
}
