use std::path::PathBuf;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::{num, RunDir};
use crate::{usage, Outcome};
use s3lab::lattice::{scan_counts, scan_measure, scan_setb, CountGrid, Lemma, MeasureGrid, ScanSummary, SetBGrid};
use s3lab::par::Execution;

#[derive(Debug, clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// One of 5.1 (annulus measure), 5.2a (quadric), 5.2b (hyperbola), 5.3 (set 𝓑).
    #[arg(long)]
    pub lemma: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// 5.1: number of random queries.
    #[arg(long)]
    pub queries: Option<usize>,
    /// 5.1: largest `C`.
    #[arg(long)]
    pub c_max: Option<f64>,
    /// 5.1: largest `K`.
    #[arg(long)]
    pub k_max: Option<f64>,
    /// 5.2 and 5.3: box sizes `N`.
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<f64>>,
    /// 5.2: queries per `N`.
    #[arg(long)]
    pub trials: Option<usize>,
    /// 5.3: `δ ∈ (0, 1/8)`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// 5.3: width of the `|·| ≲ 1` condition.
    #[arg(long)]
    pub slack: Option<f64>,
    /// 5.3: `l` points per regime.
    #[arg(long)]
    pub l_points: Option<usize>,
    /// Bound asserted for the largest normalized ratio (5.1 and 5.3).
    #[arg(long)]
    pub constant: Option<f64>,
    /// Bound asserted for the fitted growth exponent (5.2 and 5.3).
    #[arg(long)]
    pub exponent_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

const MEASURE_CONSTANT: f64 = 6.5;
const COUNT_EXPONENT: f64 = 0.3;
const SETB_CONSTANT: f64 = 40.0;
const SETB_EXPONENT: f64 = 0.05;

pub fn run(a: &Args, exec: Execution, dir: &mut RunDir) -> Result<Outcome> {
    let Some(lemma) = Lemma::from_label(&a.lemma) else {
        return usage(format!("unknown lemma {:?}; expected 5.1, 5.2a, 5.2b or 5.3", a.lemma));
    };
    let header = |params: &[&'static str]| {
        let mut h = vec!["lemma"];
        h.extend_from_slice(params);
        h.extend(["value", "normalized_ratio"]);
        h
    };
    let (summary, constant, exponent_tol) = match lemma {
        Lemma::Measure => {
            let d = MeasureGrid::default();
            let grid = MeasureGrid {
                queries: a.queries.unwrap_or(d.queries),
                c_max: a.c_max.unwrap_or(d.c_max),
                k_max: a.k_max.unwrap_or(d.k_max),
            };
            if grid.queries == 0 || !(grid.k_max >= 1.0) || !(grid.c_max >= 1.0) {
                return usage("5.1 needs queries > 0, k-max >= 1 and c-max >= 1");
            }
            let (rows, summary) = scan_measure(&grid, a.seed, exec);
            dir.csv(
                "rows.csv",
                &header(&["bucket", "C", "K", "xi1", "xi2"]),
                rows.iter().map(|r| {
                    vec![
                        r.lemma.into(),
                        r.bucket.into(),
                        num(r.c),
                        num(r.k),
                        num(r.xi1),
                        r.xi2.to_string(),
                        num(r.value),
                        num(r.normalized_ratio),
                    ]
                }),
            )?;
            (summary, Some(a.constant.unwrap_or(MEASURE_CONSTANT)), None)
        }
        Lemma::Quadric | Lemma::Hyperbola => {
            let d = CountGrid::default();
            let n_values = match &a.n_values {
                Some(v) if v.iter().all(|n| n.fract() == 0.0 && *n >= 1.0) => v.iter().map(|n| *n as i64).collect(),
                Some(_) => return usage("5.2 box sizes must be positive integers"),
                None => d.n_values,
            };
            let grid = CountGrid { n_values, trials: a.trials.unwrap_or(d.trials) };
            let (rows, summary) = scan_counts(lemma, &grid, a.seed, exec)?;
            dir.csv(
                "rows.csv",
                &header(&["N", "k", "C"]),
                rows.iter().map(|r| {
                    vec![
                        r.lemma.into(),
                        r.n_box.to_string(),
                        r.k.to_string(),
                        r.c.to_string(),
                        r.value.to_string(),
                        num(r.normalized_ratio),
                    ]
                }),
            )?;
            (summary, None, Some(a.exponent_tol.unwrap_or(COUNT_EXPONENT)))
        }
        Lemma::SetB => {
            let d = SetBGrid::default();
            let grid = SetBGrid {
                n_values: a.n_values.clone().unwrap_or(d.n_values),
                delta: a.delta.unwrap_or(d.delta),
                slack: a.slack.unwrap_or(d.slack),
                l_points: a.l_points.unwrap_or(d.l_points),
            };
            let (rows, summary) = scan_setb(&grid, a.seed, exec)?;
            dir.csv(
                "rows.csv",
                &header(&["regime", "N", "M", "l", "k", "C"]),
                rows.iter().map(|r| {
                    vec![
                        r.lemma.into(),
                        r.regime.to_string(),
                        num(r.n_box),
                        num(r.m_width),
                        num(r.l),
                        r.k.to_string(),
                        num(r.c),
                        num(r.value),
                        num(r.normalized_ratio),
                    ]
                }),
            )?;
            (summary, Some(a.constant.unwrap_or(SETB_CONSTANT)), Some(a.exponent_tol.unwrap_or(SETB_EXPONENT)))
        }
    };
    let mut outcome = Outcome::default();
    check(&summary, constant, exponent_tol, &mut outcome);
    dir.json(
        "summary.json",
        &json!({
            "lemma": summary.lemma,
            "rows": summary.rows,
            "max": summary.max,
            "argmax": summary.argmax,
            "fitted_exponent": summary.fitted,
            "slices": summary.slices,
            "constant": constant,
            "exponent_tolerance": exponent_tol,
            "breaches": outcome.breaches,
        }),
    )?;
    Ok(outcome)
}

fn check(s: &ScanSummary, constant: Option<f64>, exponent_tol: Option<f64>, outcome: &mut Outcome) {
    if let Some(c) = constant {
        outcome.check(s.max <= c, || format!("max normalized ratio {} exceeds {c}", s.max));
    }
    if let (Some(tol), Some(e)) = (exponent_tol, s.fitted) {
        outcome.check(e <= tol, || format!("fitted growth exponent {e} exceeds {tol}"));
    }
}
