use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::{num, RunDir};
use crate::{usage, Outcome};
use s3lab::par::Execution;
use s3lab::stats::power_law_exponent;
use s3lab::strichartz::{
    box_scaling, evolve_l4_norm_flagged, hyperbolic_l4_quotient, kernel_split_diagnostics, quadrilinear_form_frequency,
    quartic_pair_binned, quotient_scan, sample_slab_packet, strichartz_quotient_with, Dispersion, FrequencyGrid,
    PacketMode, QuotientParams, ScanConfig, SlabSpec, TimeIntegration, WavePacket, MAX_BRUTE_NODES,
};

const PLANCHEREL_TOL: f64 = 0.02;
const GROWTH_TOL: f64 = 0.05;
const BOX_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Slab quotient for one slab, or the quotient scan with `"scan": true`.
    Elliptic,
    /// `x₂`-integrated quotient for data on `[−N, N]²`, over `n_values`.
    Hyperbolic,
    /// Time-side norm against the frequency-side quadrilinear form.
    Quadrilinear,
    /// `K₁`/`K₂` cover diagnostics on the slab packets.
    KernelSplit,
    /// Box indicator norms against `N^{1/4}`.
    BoxScaling,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabConfig {
    pub xi0: (f64, i64),
    pub a: (f64, f64),
    pub c: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    /// `|ξ₁|` bound of the grid; default covers the slab.
    #[serde(default)]
    pub extent: Option<f64>,
    /// Inclusive `ξ₂` range; default covers the slab.
    #[serde(default)]
    pub xi2_range: Option<(i64, i64)>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub slab: SlabConfig,
    pub grid: GridConfig,
    /// Windowed Simpson integration; exact periodic integration when absent.
    pub window: Option<WindowConfig>,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub dispersion: Option<Dispersion>,
    pub k: i64,
    pub n_values: Option<Vec<u32>>,
    pub scan: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            slab: SlabConfig { xi0: (0.0, 0), a: (1.0, 0.0), c: 0.0, m: 2.0, n: 8.0 },
            grid: GridConfig { h: 0.5, extent: None, xi2_range: None },
            window: None,
            delta: 0.1,
            trials: 2,
            seed: 0,
            dispersion: None,
            k: 0,
            n_values: None,
            scan: false,
        }
    }
}

impl Config {
    fn slab(&self) -> Result<SlabSpec> {
        let s = &self.slab;
        Ok(SlabSpec::new(s.xi0, s.a, s.c, s.m, s.n)?)
    }

    fn grid(&self, slab: &SlabSpec) -> Result<FrequencyGrid> {
        let mut g = FrequencyGrid::covering(slab, self.grid.h)?;
        if let Some(e) = self.grid.extent {
            g.xi1_extent = e;
        }
        if let Some((lo, hi)) = self.grid.xi2_range {
            (g.xi2_min, g.xi2_max) = (lo, hi);
        }
        if !g.covers(slab) {
            return usage("grid extent or xi2_range does not cover the slab");
        }
        Ok(g)
    }

    fn integration(&self) -> TimeIntegration {
        match self.window {
            Some(w) => TimeIntegration::Window { t_min: w.t_min, t_max: w.t_max, n_t: w.n_t },
            None => TimeIntegration::Periodic,
        }
    }

    /// Indicator of the slab, then `trials` Gaussian packets.
    fn packets(&self) -> Result<Vec<WavePacket>> {
        let slab = self.slab()?;
        let grid = self.grid(&slab)?;
        (0..=self.trials)
            .map(|t| {
                let mode = if t == 0 { PacketMode::Indicator } else { PacketMode::GaussianRandom };
                Ok(sample_slab_packet(&slab, &grid, mode, self.seed.wrapping_add(t as u64))?)
            })
            .collect()
    }
}

#[derive(Debug, clap::Args, Serialize, Deserialize)]
pub struct Args {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// JSON config; built-in defaults when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// The config as resolved at launch; recorded in the manifest.
    #[arg(skip)]
    #[serde(rename = "config")]
    pub resolved: Option<Config>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Args {
    pub fn resolve(&mut self) -> Result<()> {
        if self.resolved.is_some() {
            return Ok(());
        }
        let cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                match serde_json::from_str(&text) {
                    Ok(c) => c,
                    Err(e) => return usage(format!("bad config {}: {e}", p.display())),
                }
            }
            None => Config::default(),
        };
        self.resolved = Some(cfg);
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.resolved.as_ref().map_or(0, |c| c.seed)
    }
}

pub fn run(a: &Args, exec: Execution, dir: &mut RunDir) -> Result<Outcome> {
    let cfg = a.resolved.as_ref().expect("config resolved before run");
    match a.mode {
        Mode::Elliptic if cfg.scan => elliptic_scan(cfg, exec, dir),
        Mode::Elliptic => elliptic(cfg, exec, dir),
        Mode::Hyperbolic => hyperbolic(cfg, exec, dir),
        Mode::Quadrilinear => quadrilinear(cfg, exec, dir),
        Mode::KernelSplit => kernel_split(cfg, dir),
        Mode::BoxScaling => boxes(cfg, exec, dir),
    }
}

fn no_window(cfg: &Config, mode: &str) -> Result<()> {
    if cfg.window.is_some() {
        return usage(format!("{mode} uses the exact frequency-side form; remove \"window\""));
    }
    Ok(())
}

fn growth(per_n: &[(u32, f64)]) -> Option<f64> {
    (per_n.len() >= 2).then(|| {
        let xs: Vec<f64> = per_n.iter().map(|(n, _)| *n as f64).collect();
        let ys: Vec<f64> = per_n.iter().map(|(_, v)| *v).collect();
        power_law_exponent(&xs, &ys)
    })
}

fn elliptic(cfg: &Config, exec: Execution, dir: &mut RunDir) -> Result<Outcome> {
    let slab = cfg.slab()?;
    let grid = cfg.grid(&slab)?;
    let params = QuotientParams {
        delta: cfg.delta,
        trials: cfg.trials,
        k: cfg.k,
        seed: cfg.seed,
        integration: cfg.integration(),
    };
    let rep = strichartz_quotient_with(&slab, &grid, &params, exec)?;
    dir.csv(
        "quotients.csv",
        &["trial", "quotient"],
        rep.quotients.iter().enumerate().map(|(t, q)| vec![t.to_string(), num(*q)]),
    )?;
    dir.json(
        "summary.json",
        &json!({
            "mode": "elliptic",
            "nodes": rep.nodes,
            "max": rep.max,
            "argmax_trial": rep.argmax,
            "flags": { "truncated": rep.truncated, "under_resolved": rep.under_resolved },
        }),
    )?;
    Ok(Outcome::default())
}

fn elliptic_scan(cfg: &Config, exec: Execution, dir: &mut RunDir) -> Result<Outcome> {
    no_window(cfg, "the quotient scan")?;
    let d = ScanConfig::default();
    let sc = ScanConfig {
        n_values: cfg.n_values.clone().unwrap_or(d.n_values),
        delta: cfg.delta,
        trials: cfg.trials,
        h: cfg.grid.h,
        seed: cfg.seed,
    };
    let scan = quotient_scan(&sc, exec)?;
    dir.csv(
        "quotients.csv",
        &["N", "M", "direction", "a1", "a2", "c", "xi0_1", "xi0_2", "nodes", "trial", "quotient"],
        scan.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                num(r.m),
                r.direction.clone(),
                num(r.a1),
                num(r.a2),
                num(r.c),
                num(r.xi0_1),
                r.xi0_2.to_string(),
                r.nodes.to_string(),
                r.trial.to_string(),
                num(r.quotient),
            ]
        }),
    )?;
    let mut outcome = Outcome::default();
    outcome.check(scan.exponent <= GROWTH_TOL, || format!("quotient growth exponent {} exceeds {GROWTH_TOL}", scan.exponent));
    dir.json(
        "summary.json",
        &json!({
            "mode": "elliptic-scan",
            "max": scan.max,
            "per_n_max": scan.per_n_max,
            "slope_fit": scan.exponent,
            "tolerance": GROWTH_TOL,
            "flags": { "truncated": false, "under_resolved": false },
            "breaches": outcome.breaches,
        }),
    )?;
    Ok(outcome)
}

fn hyperbolic(cfg: &Config, exec: Execution, dir: &mut RunDir) -> Result<Outcome> {
    no_window(cfg, "hyperbolic mode")?;
    let dispersion = cfg.dispersion.unwrap_or(Dispersion::Hyperbolic);
    let ns = cfg.n_values.clone().unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
    let reports = ns
        .iter()
        .map(|&n| hyperbolic_l4_quotient(n, cfg.trials, cfg.grid.h, cfg.seed, dispersion, exec))
        .collect::<s3lab::Result<Vec<_>>>()?;
    dir.csv(
        "quotients.csv",
        &["N", "trial", "quotient"],
        reports
            .iter()
            .flat_map(|r| r.quotients.iter().enumerate().map(move |(t, q)| vec![r.n.to_string(), t.to_string(), num(*q)])),
    )?;
    let per_n: Vec<(u32, f64)> = reports.iter().map(|r| (r.n, r.max)).collect();
    let slope = growth(&per_n);
    let mut outcome = Outcome::default();
    if let Some(e) = slope {
        outcome.check(e <= GROWTH_TOL, || format!("hyperbolic growth exponent {e} exceeds {GROWTH_TOL}"));
    }
    dir.json(
        "summary.json",
        &json!({
            "mode": "hyperbolic",
            "dispersion": dispersion,
            "max": per_n.iter().map(|p| p.1).fold(f64::MIN, f64::max),
            "per_n_max": per_n,
            "slope_fit": slope,
            "tolerance": GROWTH_TOL,
            "flags": { "truncated": false, "under_resolved": false },
            "breaches": outcome.breaches,
        }),
    )?;
    Ok(outcome)
}

fn quadrilinear(cfg: &Config, exec: Execution, dir: &mut RunDir) -> Result<Outcome> {
    let dispersion = cfg.dispersion.unwrap_or(Dispersion::Elliptic);
    let mut rows = Vec::new();
    let (mut truncated, mut under_resolved) = (false, false);
    for (t, p) in cfg.packets()?.iter().enumerate() {
        let time = evolve_l4_norm_flagged(p, dispersion, cfg.k, cfg.integration(), exec)?;
        truncated |= time.truncated;
        under_resolved |= time.under_resolved;
        let binned = quartic_pair_binned(p, dispersion, cfg.k, false, exec)?;
        let brute = (p.len() <= MAX_BRUTE_NODES).then(|| quadrilinear_form_frequency(p, dispersion, cfg.k, false)).transpose()?;
        let rel = (time.fourth_power - binned).abs() / binned.abs();
        rows.push((t, p.len(), time.fourth_power, binned, brute, rel));
    }
    dir.csv(
        "plancherel.csv",
        &["trial", "nodes", "time_side", "frequency_binned", "frequency_brute", "rel_diff"],
        rows.iter().map(|r| {
            vec![r.0.to_string(), r.1.to_string(), num(r.2), num(r.3), r.4.map(num).unwrap_or_default(), num(r.5)]
        }),
    )?;
    let worst = rows.iter().map(|r| r.5).fold(0.0, f64::max);
    let mut outcome = Outcome::default();
    outcome.check(worst <= PLANCHEREL_TOL, || format!("Plancherel mismatch {worst} exceeds {PLANCHEREL_TOL}"));
    dir.json(
        "summary.json",
        &json!({
            "mode": "quadrilinear",
            "dispersion": dispersion,
            "max_rel_diff": worst,
            "tolerance": PLANCHEREL_TOL,
            "flags": { "truncated": truncated, "under_resolved": under_resolved },
            "breaches": outcome.breaches,
        }),
    )?;
    Ok(outcome)
}

fn kernel_split(cfg: &Config, dir: &mut RunDir) -> Result<Outcome> {
    no_window(cfg, "kernel-split mode")?;
    let mut reports = Vec::new();
    for p in cfg.packets()? {
        reports.push((p.len(), kernel_split_diagnostics(&p, cfg.k)?));
    }
    dir.csv(
        "kernel_split.csv",
        &[
            "trial",
            "nodes",
            "gamma_count",
            "k1_count",
            "k2_count",
            "k_clause_count",
            "cover_violations",
            "gamma_total",
            "k1_part",
            "k2_part",
        ],
        reports.iter().enumerate().map(|(t, (n, r))| {
            vec![
                t.to_string(),
                n.to_string(),
                r.gamma_count.to_string(),
                r.k1_count.to_string(),
                r.k2_count.to_string(),
                r.k_clause_count.to_string(),
                r.cover_violations.to_string(),
                num(r.gamma_total),
                num(r.k1_part),
                num(r.k2_part),
            ]
        }),
    )?;
    let violations: u64 = reports.iter().map(|(_, r)| r.cover_violations).sum();
    let mut outcome = Outcome::default();
    outcome.check(violations == 0, || format!("{violations} tuples not covered by K1 + K2"));
    dir.json(
        "summary.json",
        &json!({
            "mode": "kernel-split",
            "k": cfg.k,
            "gamma_tuples": reports.iter().map(|(_, r)| r.gamma_count).sum::<u64>(),
            "cover_violations": violations,
            "flags": { "truncated": false, "under_resolved": false },
            "breaches": outcome.breaches,
        }),
    )?;
    Ok(outcome)
}

fn boxes(cfg: &Config, exec: Execution, dir: &mut RunDir) -> Result<Outcome> {
    no_window(cfg, "box-scaling mode")?;
    let ns = cfg.n_values.clone().unwrap_or_else(|| vec![4, 8, 16, 32]);
    let rows = box_scaling(&ns, cfg.grid.h, exec)?;
    dir.csv(
        "box_scaling.csv",
        &["N", "nodes", "norm", "ratio"],
        rows.iter().map(|r| vec![r.n.to_string(), r.nodes.to_string(), num(r.norm), num(r.ratio)]),
    )?;
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let norms: Vec<(u32, f64)> = rows.iter().map(|r| (r.n, r.norm)).collect();
    let mut outcome = Outcome::default();
    outcome.check(hi <= BOX_FACTOR * lo, || format!("norm / N^(1/4) spans {lo}..{hi}, more than a factor {BOX_FACTOR}"));
    dir.json(
        "summary.json",
        &json!({
            "mode": "box-scaling",
            "ratio_min": lo,
            "ratio_max": hi,
            "norm_exponent": growth(&norms),
            "factor": BOX_FACTOR,
            "flags": { "truncated": false, "under_resolved": false },
            "breaches": outcome.breaches,
        }),
    )?;
    Ok(outcome)
}
