//! Clebsch–Gordan tables for `π_m ⊗ π_n`.
//!
//! Chains are labelled by `s = 0..=n` with `k = m + n − 2s`. Each chain starts
//! at the top vector `u_{k,k}`, the unit vector of the weight space `V_k` that
//! is orthogonal to all earlier chains, and is lowered with
//! `F = ρ_m(F) ⊗ I + I ⊗ ρ_n(F)`. Phase convention: every chain top has a
//! strictly positive coefficient on the product basis element with the largest
//! `α`. All coefficients then come out real.
//!
//! Weight spaces are addressed by `G = (γ + m + n) / 2`, the sum of the storage
//! indices of `α` and `β`; inside `V_G` vectors are dense over the index of
//! `α`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::su2::{ladder_unchecked, weight_at, GroupElement, IrrepEvaluator, Ladder};

const ORTHO_TOL: f64 = 1e-8;

/// Range of `α` indices present in the weight space `G` of `π_m ⊗ π_n`.
#[inline]
fn alpha_range(m: usize, n: usize, g: usize) -> (usize, usize) {
    (g.saturating_sub(n), g.min(m))
}

#[derive(Debug, Clone)]
struct Chain {
    k: u32,
    /// `vectors[g]` is `u_{k, 2g−k}` over the `α` range of `V_{g+s}`.
    vectors: Vec<Vec<f64>>,
}

/// All coefficients `C^{k,γ}_{m,α;n,β}` for one pair `m ≥ n`.
#[derive(Debug, Clone)]
pub struct CgTable {
    m: u32,
    n: u32,
    chains: Vec<Chain>,
    /// `pair[(i(n+1)+j)(n+1)+s]`: coefficient of `v_{m,α_i}⊗v_{n,β_j}` in
    /// chain `s`, zero when structurally absent.
    pair: Vec<f64>,
}

/// One flat record of a serialized table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgRecord {
    pub m: u32,
    pub n: u32,
    pub k: u32,
    pub gamma: i32,
    pub alpha: i32,
    pub beta: i32,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub max_row_defect: f64,
    pub max_col_defect: f64,
}

/// Vector in `𝒫_m ⊗ 𝒫_n`, entry `(α, β)` at `i(n+1) + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorVector {
    pub m: u32,
    pub n: u32,
    pub entries: Vec<Complex64>,
}

impl TensorVector {
    pub fn zeros(m: u32, n: u32) -> Self {
        let len = (m as usize + 1) * (n as usize + 1);
        Self { m, n, entries: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn get(&self, alpha: i32, beta: i32) -> Complex64 {
        let i = (alpha + self.m as i32) / 2;
        let j = (beta + self.n as i32) / 2;
        self.entries[i as usize * (self.n as usize + 1) + j as usize]
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    norm
}

fn subtract_projections(v: &mut [f64], basis: &[&[f64]]) {
    for b in basis {
        let c = dot(v, b);
        v.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= c * y);
    }
}

fn max_overlap(v: &[f64], basis: &[&[f64]]) -> f64 {
    basis.iter().map(|b| dot(v, b).abs()).fold(0.0, f64::max)
}

/// Builds the table for `π_m ⊗ π_n`.
pub fn cg_decompose(m: u32, n: u32) -> Result<CgTable> {
    if m < n {
        return domain(format!("cg_decompose needs m >= n, got m = {m}, n = {n}"));
    }
    let (mu, nu) = (m as usize, n as usize);
    let mut chains: Vec<Chain> = Vec::with_capacity(nu + 1);

    for s in 0..=nu {
        let k = mu + nu - 2 * s;
        let g_top = k + s;
        let (lo, hi) = alpha_range(mu, nu, g_top);
        let dim = hi - lo + 1;
        let prior: Vec<&[f64]> = chains
            .iter()
            .enumerate()
            .map(|(sp, c)| c.vectors[g_top - sp].as_slice())
            .collect();

        // Complement of the earlier chains in V_{g_top}: Gram–Schmidt on the
        // coordinate vector with the largest residual, two passes.
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..dim {
            let mut v = vec![0.0; dim];
            v[e] = 1.0;
            subtract_projections(&mut v, &prior);
            subtract_projections(&mut v, &prior);
            let r = dot(&v, &v).sqrt();
            if best.as_ref().is_none_or(|(br, _)| r > *br) {
                best = Some((r, v));
            }
        }
        let (residual, mut top) = best.expect("weight space is nonempty");
        if residual < 1e-6 {
            return Err(Error::Construction(format!(
                "no complement for chain k = {k} in ({m}, {n}): residual {residual:e}"
            )));
        }
        normalize(&mut top);
        if max_overlap(&top, &prior) > ORTHO_TOL {
            return Err(Error::Construction(format!(
                "chain top k = {k} of ({m}, {n}) not orthogonal to earlier chains"
            )));
        }
        let lead = top
            .iter()
            .rev()
            .copied()
            .find(|x| x.abs() > 1e-12)
            .expect("unit vector has a nonzero entry");
        if lead < 0.0 {
            top.iter_mut().for_each(|x| *x = -*x);
        }

        let mut vectors = Vec::with_capacity(k + 1);
        vectors.push(top);
        for g in (0..k).rev() {
            // current vector lives at G = g + 1 + s, lower to G = g + s.
            let big = g + 1 + s;
            let (lo_src, hi_src) = alpha_range(mu, nu, big);
            let (lo_dst, hi_dst) = alpha_range(mu, nu, big - 1);
            let src = vectors.last().expect("chain has a top");
            let mut dst = vec![0.0; hi_dst - lo_dst + 1];
            for i in lo_src..=hi_src {
                let j = big - i;
                let c = src[i - lo_src];
                if c == 0.0 {
                    continue;
                }
                if i > 0 {
                    let a = weight_at(m, i) as f64;
                    dst[i - 1 - lo_dst] += c * ladder_unchecked(m as f64, a, Ladder::Lower);
                }
                if j > 0 {
                    let b = weight_at(n, j) as f64;
                    dst[i - lo_dst] += c * ladder_unchecked(n as f64, b, Ladder::Lower);
                }
            }
            normalize(&mut dst);
            let prior: Vec<&[f64]> = chains
                .iter()
                .enumerate()
                .map(|(sp, c)| c.vectors[big - 1 - sp].as_slice())
                .collect();
            // lowering is exact in theory; projecting out earlier chains at
            // every step keeps rounding drift from compounding down the chain
            let drift = max_overlap(&dst, &prior);
            if drift > 1e-6 {
                return Err(Error::Construction(format!(
                    "lost orthogonality in chain k = {k} of ({m}, {n}) at G = {}: {drift:e}",
                    big - 1
                )));
            }
            subtract_projections(&mut dst, &prior);
            normalize(&mut dst);
            vectors.push(dst);
        }
        vectors.reverse();
        chains.push(Chain { k: k as u32, vectors });
    }

    let mut pair = vec![0.0; (mu + 1) * (nu + 1) * (nu + 1)];
    for (s, chain) in chains.iter().enumerate() {
        for (g, vec) in chain.vectors.iter().enumerate() {
            let big = g + s;
            let (lo, _) = alpha_range(mu, nu, big);
            for (off, &c) in vec.iter().enumerate() {
                let i = lo + off;
                let j = big - i;
                pair[(i * (nu + 1) + j) * (nu + 1) + s] = c;
            }
        }
    }
    Ok(CgTable { m, n, chains, pair })
}

impl CgTable {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `k` values in chain order: `m+n, m+n−2, …, m−n`.
    pub fn ks(&self) -> Vec<u32> {
        self.chains.iter().map(|c| c.k).collect()
    }

    fn chain_index(&self, k: u32) -> Option<usize> {
        let top = self.m + self.n;
        if k > top || k < self.m - self.n || (top - k) % 2 != 0 {
            return None;
        }
        Some(((top - k) / 2) as usize)
    }

    /// `C^{k,γ}_{m,α;n,β}`, zero for structurally absent entries.
    pub fn coeff(&self, k: u32, gamma: i32, alpha: i32, beta: i32) -> f64 {
        if alpha + beta != gamma || alpha.abs() > self.m as i32 || beta.abs() > self.n as i32 {
            return 0.0;
        }
        if (alpha + self.m as i32) % 2 != 0 || (beta + self.n as i32) % 2 != 0 {
            return 0.0;
        }
        match self.chain_index(k) {
            Some(s) => {
                let i = ((alpha + self.m as i32) / 2) as usize;
                let j = ((beta + self.n as i32) / 2) as usize;
                self.pair_column(i, j)[s]
            }
            None => 0.0,
        }
    }

    /// Coefficients of `v_{m,α_i} ⊗ v_{n,β_j}` across chains `s = 0..=n`.
    #[inline]
    pub fn pair_column(&self, i: usize, j: usize) -> &[f64] {
        let w = self.n as usize + 1;
        let start = (i * w + j) * w;
        &self.pair[start..start + w]
    }

    /// `u_{k,γ}` in the product basis.
    pub fn expand_in_product_basis(&self, k: u32, gamma: i32) -> Result<TensorVector> {
        let Some(s) = self.chain_index(k) else {
            return domain(format!("k = {k} outside the range of ({}, {})", self.m, self.n));
        };
        if gamma.abs() > k as i32 || (gamma + k as i32) % 2 != 0 {
            return domain(format!("gamma = {gamma} is not a weight of pi_{k}"));
        }
        let (mu, nu) = (self.m as usize, self.n as usize);
        let g = ((gamma + k as i32) / 2) as usize;
        let big = g + s;
        let (lo, _) = alpha_range(mu, nu, big);
        let mut out = TensorVector::zeros(self.m, self.n);
        for (off, &c) in self.chains[s].vectors[g].iter().enumerate() {
            let i = lo + off;
            out.entries[i * (nu + 1) + big - i] = Complex64::new(c, 0.0);
        }
        Ok(out)
    }

    /// Flat records in chain order, then `γ` ascending, then `α` ascending.
    pub fn records(&self) -> Vec<CgRecord> {
        let (mu, nu) = (self.m as usize, self.n as usize);
        let mut out = Vec::new();
        for (s, chain) in self.chains.iter().enumerate() {
            for (g, vec) in chain.vectors.iter().enumerate() {
                let big = g + s;
                let (lo, _) = alpha_range(mu, nu, big);
                for (off, &value) in vec.iter().enumerate() {
                    let i = lo + off;
                    out.push(CgRecord {
                        m: self.m,
                        n: self.n,
                        k: chain.k,
                        gamma: 2 * g as i32 - chain.k as i32,
                        alpha: weight_at(self.m, i),
                        beta: weight_at(self.n, big - i),
                        value,
                    });
                }
            }
        }
        out
    }

    /// Real orthogonal matrix whose columns are the `u_{k,γ}`, in chain order
    /// then `γ` ascending; rows follow the product basis `i(n+1)+j`.
    pub fn change_of_basis(&self) -> DMatrix<f64> {
        let (mu, nu) = (self.m as usize, self.n as usize);
        let dim = (mu + 1) * (nu + 1);
        let mut u = DMatrix::zeros(dim, dim);
        let mut col = 0;
        for (s, chain) in self.chains.iter().enumerate() {
            for (g, vec) in chain.vectors.iter().enumerate() {
                let big = g + s;
                let (lo, _) = alpha_range(mu, nu, big);
                for (off, &c) in vec.iter().enumerate() {
                    let i = lo + off;
                    u[(i * (nu + 1) + big - i, col)] = c;
                }
                col += 1;
            }
        }
        u
    }

    /// Orthogonal projector onto the span of `{u_{k,γ}}_γ`.
    pub fn projector(&self, k: u32) -> Result<DMatrix<f64>> {
        let Some(s) = self.chain_index(k) else {
            return domain(format!("k = {k} outside the range of ({}, {})", self.m, self.n));
        };
        let u = self.change_of_basis();
        let start: usize = self.chains[..s].iter().map(|c| c.k as usize + 1).sum();
        let block = u.columns(start, k as usize + 1);
        Ok(&block * block.transpose())
    }
}

/// Both defects of the orthogonality relations. Row relations are taken over
/// pairs `(α,β), (α′,β′)` with `α+β = α′+β′`; for different totals the sum
/// over `k` has no shared `γ` and the relation is vacuous.
pub fn verify_orthogonality(t: &CgTable) -> OrthogonalityReport {
    let (mu, nu) = (t.m as usize, t.n as usize);
    let mut row: f64 = 0.0;
    let mut col: f64 = 0.0;
    for big in 0..=mu + nu {
        let (lo, hi) = alpha_range(mu, nu, big);
        let s_max = big.min(mu + nu - big).min(nu);
        // square block: rows = chains present, columns = α indices
        let block: Vec<&[f64]> = (0..=s_max).map(|s| t.chains[s].vectors[big - s].as_slice()).collect();
        for (a, va) in block.iter().enumerate() {
            for (b, vb) in block.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                col = col.max((dot(va, vb) - target).abs());
            }
        }
        for i in lo..=hi {
            for ip in lo..=hi {
                let sum: f64 = block.iter().map(|v| v[i - lo] * v[ip - lo]).sum();
                let target = if i == ip { 1.0 } else { 0.0 };
                row = row.max((sum - target).abs());
            }
        }
    }
    OrthogonalityReport { max_row_defect: row, max_col_defect: col }
}

fn apply_ladder(v: &[f64], m: usize, n: usize, dir: Ladder) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for i in 0..=m {
        for j in 0..=n {
            let c = v[i * (n + 1) + j];
            if c == 0.0 {
                continue;
            }
            let (a, b) = (weight_at(m as u32, i) as f64, weight_at(n as u32, j) as f64);
            match dir {
                Ladder::Raise => {
                    if i < m {
                        out[(i + 1) * (n + 1) + j] += c * ladder_unchecked(m as f64, a, dir);
                    }
                    if j < n {
                        out[i * (n + 1) + j + 1] += c * ladder_unchecked(n as f64, b, dir);
                    }
                }
                Ladder::Lower => {
                    if i > 0 {
                        out[(i - 1) * (n + 1) + j] += c * ladder_unchecked(m as f64, a, dir);
                    }
                    if j > 0 {
                        out[i * (n + 1) + j - 1] += c * ladder_unchecked(n as f64, b, dir);
                    }
                }
            }
        }
    }
    out
}

/// `Ω = H² + 2EF + 2FE` of `π_m ⊗ π_n` on the product basis. Real symmetric.
pub fn casimir_matrix(m: u32, n: u32) -> Result<DMatrix<f64>> {
    if m < n {
        return domain(format!("casimir_matrix needs m >= n, got m = {m}, n = {n}"));
    }
    let (mu, nu) = (m as usize, n as usize);
    let dim = (mu + 1) * (nu + 1);
    if dim > 4096 {
        return domain(format!("casimir_matrix dimension {dim} exceeds 4096"));
    }
    let mut omega = DMatrix::zeros(dim, dim);
    for p in 0..dim {
        let mut e = vec![0.0; dim];
        e[p] = 1.0;
        let (i, j) = (p / (nu + 1), p % (nu + 1));
        let h = (weight_at(m, i) + weight_at(n, j)) as f64;
        let ef = apply_ladder(&apply_ladder(&e, mu, nu, Ladder::Lower), mu, nu, Ladder::Raise);
        let fe = apply_ladder(&apply_ladder(&e, mu, nu, Ladder::Raise), mu, nu, Ladder::Lower);
        for q in 0..dim {
            omega[(q, p)] = 2.0 * (ef[q] + fe[q]);
        }
        omega[(p, p)] += h * h;
    }
    Ok(omega)
}

/// Eigenprojectors of the Casimir matrix, grouped by the nearest `k(k+2)`.
/// Returns `(k, projector)` for every `k` with a nonempty eigenspace, in
/// decreasing `k`.
pub fn casimir_projectors(m: u32, n: u32) -> Result<Vec<(u32, DMatrix<f64>)>> {
    let omega = casimir_matrix(m, n)?;
    let dim = omega.nrows();
    let eig = SymmetricEigen::new(omega);
    let top = m + n;
    let mut out: Vec<(u32, DMatrix<f64>)> = Vec::new();
    for k in (0..=top).rev() {
        let target = (k * (k + 2)) as f64;
        let cols: Vec<usize> =
            (0..dim).filter(|&c| (eig.eigenvalues[c] - target).abs() < 0.5).collect();
        if cols.is_empty() {
            continue;
        }
        let mut p = DMatrix::zeros(dim, dim);
        for &c in &cols {
            let v = eig.eigenvectors.column(c);
            p += &v * v.transpose();
        }
        out.push((k, p));
    }
    Ok(out)
}

/// `max |Uᵀ (D^m ⊗ D^n)(g) U − ⊕_k D^k(g)|` over `gs`, with both sides in
/// the row = input convention of [`crate::su2::IrrepMatrix`].
pub fn block_diagonalization_defect(t: &CgTable, gs: &[GroupElement]) -> f64 {
    let (mu, nu) = (t.m as usize, t.n as usize);
    let w = nu + 1;
    let dim = (mu + 1) * w;
    let (em, en) = (IrrepEvaluator::new(t.m), IrrepEvaluator::new(t.n));
    let blocks: Vec<IrrepEvaluator> = t.ks().into_iter().map(IrrepEvaluator::new).collect();

    // Sparse columns of U: (row, value) lists.
    let u = t.change_of_basis();
    let cols: Vec<Vec<(usize, f64)>> = (0..dim)
        .map(|c| (0..dim).filter(|&r| u[(r, c)] != 0.0).map(|r| (r, u[(r, c)])).collect())
        .collect();

    let mut worst: f64 = 0.0;
    let mut tu = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut expected = vec![Complex64::new(0.0, 0.0); dim * dim];
    for g in gs {
        let (dm, dn) = (em.matrix(g), en.matrix(g));
        let tensor = |p: usize, q: usize| dm.at(p / w, q / w) * dn.at(p % w, q % w);

        // TU, then Uᵀ(TU).
        for (b, col) in cols.iter().enumerate() {
            for p in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(q, v) in col {
                    acc += tensor(p, q) * v;
                }
                tu[p * dim + b] = acc;
            }
        }
        expected.fill(Complex64::new(0.0, 0.0));
        let mut start = 0;
        for ev in &blocks {
            let dk = ev.matrix(g);
            let d = dk.dim();
            for r in 0..d {
                for c in 0..d {
                    expected[(start + r) * dim + start + c] = dk.at(r, c);
                }
            }
            start += d;
        }
        for (a, col) in cols.iter().enumerate() {
            for b in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(p, v) in col {
                    acc += tu[p * dim + b] * v;
                }
                worst = worst.max((acc - expected[a * dim + b]).norm());
            }
        }
    }
    worst
}
