use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{fejer_hat, fejer_weight, rational_step, Dispersion, WavePacket};
use crate::error::{domain, Result};
use crate::par::{self, Execution};
use crate::su2::gauss_legendre;
use crate::Complex64;

/// How the time integral against the Fejér weight is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TimeIntegration {
    /// Exact for `h = p/q`: `u` is `2π q²`-periodic in `t`, so the weight is
    /// periodized and the trigonometric integrand sampled above Nyquist.
    #[default]
    Periodic,
    /// Composite Simpson on `[t_min, t_max]` with `n_t` (even) intervals.
    Window { t_min: f64, t_max: f64, n_t: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L4Norm {
    /// `(∫φ ∫|u|⁴)^{1/4}`.
    pub value: f64,
    pub fourth_power: f64,
    /// Time samples used.
    pub samples: usize,
    /// Relative size of the Fejér mass outside the window (0 when periodic).
    pub truncation_estimate: f64,
    pub truncated: bool,
    /// Time step too coarse for the largest frequency of `|u|⁴`.
    pub under_resolved: bool,
}

/// `Si(x) = ∫_0^x sin(t)/t dt`.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax > 200.0 {
        let y = 1.0 / (ax * ax);
        let f = (1.0 - 2.0 * y + 24.0 * y * y) / ax;
        let g = (1.0 - 6.0 * y + 120.0 * y * y) * y;
        PI / 2.0 - f * ax.cos() - g * ax.sin()
    } else {
        let (nodes, weights) = gauss_legendre(12);
        let panels = ax.ceil().max(1.0) as usize;
        let w = ax / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * w;
            for (z, wt) in nodes.iter().zip(&weights) {
                let t = mid + 0.5 * w * z;
                s += wt * 0.5 * w * if t == 0.0 { 1.0 } else { t.sin() / t };
            }
        }
        s
    };
    v.copysign(x)
}

fn fejer_antiderivative(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        return 2.0 * t;
    }
    let s = (0.5 * t).sin();
    4.0 * sine_integral(t) - 8.0 * s * s / t
}

/// `∫_a^b φ(t) dt`; the whole line carries `4π`.
pub fn fejer_window_mass(a: f64, b: f64) -> f64 {
    fejer_antiderivative(b) - fejer_antiderivative(a)
}

/// Packet laid out for per-time FFT slices.
struct Slicer {
    h: f64,
    /// Node values, grouped by row.
    rows: Vec<(usize, Vec<(usize, Complex64)>)>,
    row_xi2: Vec<i64>,
    cols_j: Vec<i64>,
    nx: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Slicer {
    fn new(p: &WavePacket) -> Self {
        let jmin = p.nodes.iter().map(|n| n.j).min().unwrap_or(0);
        let jmax = p.nodes.iter().map(|n| n.j).max().unwrap_or(0);
        let span = (jmax - jmin) as usize;
        let nx = smooth_at_least(2 * span + 1);
        let row_xi2 = p.rows();
        let mut rows: Vec<(usize, Vec<(usize, Complex64)>)> =
            row_xi2.iter().enumerate().map(|(i, _)| (i, Vec::new())).collect();
        for n in &p.nodes {
            let r = row_xi2.binary_search(&n.xi2).expect("row listed");
            rows[r].1.push(((n.j - jmin) as usize, n.value));
        }
        let cols_j = (jmin..=jmax).collect();
        let fft = FftPlanner::new().plan_fft_inverse(nx);
        Self { h: p.h, rows, row_xi2, cols_j, nx, fft }
    }

    /// `∫_0^{2π/h} |u(t, x₁)|⁴ dx₁` given the time phases per row and column.
    fn slice(&self, row_phase: &[Complex64], col_phase: &[Complex64], buf: &mut Vec<Complex64>) -> f64 {
        buf.clear();
        buf.resize(self.nx, Complex64::new(0.0, 0.0));
        for (r, entries) in &self.rows {
            let ph = row_phase[*r];
            for &(c, v) in entries {
                buf[c] += v * ph;
            }
        }
        for (c, ph) in col_phase.iter().enumerate() {
            buf[c] *= ph * self.h;
        }
        self.fft.process(buf);
        let period = 2.0 * PI / self.h;
        period / self.nx as f64 * buf.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<f64>()
    }
}

fn smooth_at_least(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Convenience form: exact periodic integration, default execution.
pub fn evolve_l4_norm(p: &WavePacket, dispersion: Dispersion, k: i64) -> Result<f64> {
    Ok(evolve_l4_norm_flagged(p, dispersion, k, TimeIntegration::Periodic, Execution::default())?.value)
}

/// L⁴ norm of `φ(t)^{1/4} u` over the time axis and one `x₁`-period.
pub fn evolve_l4_norm_flagged(
    p: &WavePacket,
    dispersion: Dispersion,
    k: i64,
    integration: TimeIntegration,
    exec: Execution,
) -> Result<L4Norm> {
    if p.is_empty() {
        return domain("empty wave packet");
    }
    let slicer = Slicer::new(p);
    let (fourth, samples, trunc, under) = match integration {
        TimeIntegration::Periodic => periodic(p, &slicer, dispersion, k, exec)?,
        TimeIntegration::Window { t_min, t_max, n_t } => window(p, &slicer, dispersion, k, t_min, t_max, n_t, exec)?,
    };
    Ok(L4Norm {
        value: fourth.max(0.0).powf(0.25),
        fourth_power: fourth,
        samples,
        truncation_estimate: trunc,
        truncated: trunc > 0.01,
        under_resolved: under,
    })
}

const CHUNKS: usize = 64;

fn periodic(
    p: &WavePacket,
    slicer: &Slicer,
    dispersion: Dispersion,
    k: i64,
    exec: Execution,
) -> Result<(f64, usize, f64, bool)> {
    let Some((pn, q)) = rational_step(p.h) else {
        return domain(format!("periodic time integration needs a rational step p/q with q <= 1024, got h = {}", p.h));
    };
    let q2 = q * q;
    let lam: Vec<i64> = p.nodes.iter().map(|n| WavePacket::lambda_units(n, (pn, q), k, dispersion)).collect();
    let span = lam.iter().max().unwrap() - lam.iter().min().unwrap();
    let l = (2 * span + q2 + 1) as usize;
    let li = l as i64;
    // Λ = λ/q²; e^{-itΛ} at t_s = 2πq²s/L is w[(sλ) mod L]
    let rows: Vec<i64> = slicer
        .row_xi2
        .iter()
        .map(|&x| {
            q2 * match dispersion {
                Dispersion::Elliptic => x * x + k * x,
                Dispersion::Hyperbolic => -x * x,
            }
        })
        .map(|v| v.rem_euclid(li))
        .collect();
    let cols: Vec<i64> = slicer.cols_j.iter().map(|j| (pn * pn * j * j).rem_euclid(li)).collect();
    let tw: Vec<Complex64> = (0..l).map(|r| Complex64::from_polar(1.0, -2.0 * PI * r as f64 / l as f64)).collect();
    let unit = 1.0 / q2 as f64;
    let hat: Vec<f64> = (1..q2).map(|j| fejer_hat(j as f64 * unit)).collect();
    let chunk = l.div_ceil(CHUNKS);
    let partial = par::map_range(exec, CHUNKS, |c| {
        let mut buf = Vec::new();
        let mut rp = vec![Complex64::new(0.0, 0.0); rows.len()];
        let mut cp = vec![Complex64::new(0.0, 0.0); cols.len()];
        let mut acc = 0.0;
        for s in (c * chunk)..((c + 1) * chunk).min(l) {
            let si = s as i64;
            for (o, &v) in rp.iter_mut().zip(&rows) {
                *o = tw[((si * v) % li) as usize];
            }
            for (o, &v) in cp.iter_mut().zip(&cols) {
                *o = tw[((si * v) % li) as usize];
            }
            let mut weight = fejer_hat(0.0);
            for (j, w) in hat.iter().enumerate() {
                let idx = ((s as i64 * (j as i64 + 1)) % li) as usize;
                weight += 2.0 * w * tw[idx].re;
            }
            acc += unit * weight * slicer.slice(&rp, &cp, &mut buf);
        }
        acc
    });
    let period = 2.0 * PI * q2 as f64;
    Ok((period / l as f64 * partial.iter().sum::<f64>(), l, 0.0, false))
}

#[allow(clippy::too_many_arguments)]
fn window(
    p: &WavePacket,
    slicer: &Slicer,
    dispersion: Dispersion,
    k: i64,
    t_min: f64,
    t_max: f64,
    n_t: usize,
    exec: Execution,
) -> Result<(f64, usize, f64, bool)> {
    if !(t_max > t_min) || n_t < 2 || n_t % 2 == 1 {
        return domain("time window needs t_max > t_min and an even n_t >= 2");
    }
    let dt = (t_max - t_min) / n_t as f64;
    let row_lam: Vec<f64> = slicer
        .row_xi2
        .iter()
        .map(|&x| {
            let x = x as f64;
            match dispersion {
                Dispersion::Elliptic => x * x + k as f64 * x,
                Dispersion::Hyperbolic => -x * x,
            }
        })
        .collect();
    let col_lam: Vec<f64> = slicer.cols_j.iter().map(|&j| (j as f64 * p.h).powi(2)).collect();
    let lam: Vec<f64> = p.nodes.iter().map(|n| p.lambda(n, k, dispersion)).collect();
    let lam_span = lam.iter().cloned().fold(f64::MIN, f64::max) - lam.iter().cloned().fold(f64::MAX, f64::min);
    let under = dt >= PI / (2.0 * lam_span + 1.0);
    let n = n_t + 1;
    let chunk = n.div_ceil(CHUNKS);
    let partial = par::map_range(exec, CHUNKS, |c| {
        let mut buf = Vec::new();
        let mut rp = vec![Complex64::new(0.0, 0.0); row_lam.len()];
        let mut cp = vec![Complex64::new(0.0, 0.0); col_lam.len()];
        let mut acc = 0.0;
        for i in (c * chunk)..((c + 1) * chunk).min(n) {
            let t = t_min + i as f64 * dt;
            for (o, v) in rp.iter_mut().zip(&row_lam) {
                *o = Complex64::from_polar(1.0, -t * v);
            }
            for (o, v) in cp.iter_mut().zip(&col_lam) {
                *o = Complex64::from_polar(1.0, -t * v);
            }
            let w = if i == 0 || i == n_t { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * fejer_weight(t) * slicer.slice(&rp, &cp, &mut buf);
        }
        acc
    });
    let fourth = dt / 3.0 * partial.iter().sum::<f64>();
    let inside = fejer_window_mass(t_min, t_max);
    let trunc = (4.0 * PI - inside) / inside;
    Ok((fourth, n, trunc, under))
}
