use std::path::PathBuf;

use anyhow::Result;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::{num, RunDir};
use crate::{usage, Outcome};
use s3lab::cg::{cg_decompose, verify_orthogonality};

const DEFECT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Larger degree.
    pub m: u32,
    /// Smaller degree, `n ≤ m`.
    pub n: u32,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output directory (default: `$S3LAB_OUT_DIR/cg-table`).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &Args, dir: &mut RunDir) -> Result<Outcome> {
    if a.m < a.n || a.m + a.n > 200 {
        return usage(format!("cg-table needs m >= n and m + n <= 200, got ({}, {})", a.m, a.n));
    }
    let t = cg_decompose(a.m, a.n)?;
    let records = t.records();
    match a.format {
        Format::Csv => dir.csv(
            "cg_table.csv",
            &["m", "n", "k", "gamma", "alpha", "beta", "value"],
            records.iter().map(|r| {
                vec![
                    r.m.to_string(),
                    r.n.to_string(),
                    r.k.to_string(),
                    r.gamma.to_string(),
                    r.alpha.to_string(),
                    r.beta.to_string(),
                    num(r.value),
                ]
            }),
        )?,
        Format::Json => dir.json("cg_table.json", &records)?,
    }
    let rep = verify_orthogonality(&t);
    let mut outcome = Outcome::default();
    outcome.check(rep.max_row_defect <= DEFECT_TOL && rep.max_col_defect <= DEFECT_TOL, || {
        format!("orthogonality defects {:e}, {:e} exceed {DEFECT_TOL:e}", rep.max_row_defect, rep.max_col_defect)
    });
    dir.json(
        "report.json",
        &json!({
            "m": a.m,
            "n": a.n,
            "ks": t.ks(),
            "rows": records.len(),
            "max_row_defect": rep.max_row_defect,
            "max_col_defect": rep.max_col_defect,
            "tolerance": DEFECT_TOL,
            "pass": outcome.breaches.is_empty(),
        }),
    )?;
    Ok(outcome)
}
