//! `s3lab`: command-line front end for the numerical experiments in the
//! `s3lab` library. Every run writes CSV/JSON files plus a `manifest.json`
//! from which `s3lab replay` reproduces the same files byte for byte.

mod bilinear;
mod cg;
mod lattice;
mod output;
mod strichartz;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use output::{RunDir, RunManifest};
use s3lab::par::Execution;

#[derive(Parser)]
#[command(name = "s3lab", version, about = "Bilinear eigenfunction and Strichartz experiments on S³ and ℝ × 𝕋")]
struct Cli {
    /// Run every scan on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Clebsch–Gordan table for `D^m ⊗ D^n` with its orthogonality report.
    CgTable(cg::Args),
    /// Bilinear ratio scan over random pairs, with quadrature cross-checks.
    BilinearVerify(bilinear::Args),
    /// Measure and counting scans for the lattice lemmas.
    LatticeScan(lattice::Args),
    /// Strichartz experiments on ℝ × 𝕋 driven by a JSON config.
    Strichartz(strichartz::Args),
    /// Re-run the experiment recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(clap::Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Output directory (default: next to the manifest, in `replay/`).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid arguments; maps to exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

/// Assertion breaches of a finished run; outputs are written either way.
#[derive(Debug, Default)]
pub struct Outcome {
    pub breaches: Vec<String>,
}

impl Outcome {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.breaches.push(what());
        }
    }
}

fn record<A: Serialize>(args: &A) -> Result<Value> {
    Ok(serde_json::to_value(args)?)
}

fn run(cmd: Command, exec: Execution) -> Result<Outcome> {
    let (name, params, seed, out, body): (&str, Value, Option<u64>, Option<PathBuf>, Box<dyn FnOnce(&mut RunDir) -> Result<Outcome>>) =
        match cmd {
            Command::CgTable(a) => {
                let p = record(&a)?;
                ("cg-table", p, None, a.out.clone(), Box::new(move |d| cg::run(&a, d)))
            }
            Command::BilinearVerify(a) => {
                let p = record(&a)?;
                ("bilinear-verify", p, Some(a.seed), a.out.clone(), Box::new(move |d| bilinear::run(&a, exec, d)))
            }
            Command::LatticeScan(a) => {
                let p = record(&a)?;
                ("lattice-scan", p, Some(a.seed), a.out.clone(), Box::new(move |d| lattice::run(&a, exec, d)))
            }
            Command::Strichartz(mut a) => {
                a.resolve()?;
                let p = record(&a)?;
                let seed = a.seed();
                ("strichartz", p, Some(seed), a.out.clone(), Box::new(move |d| strichartz::run(&a, exec, d)))
            }
            Command::Replay(r) => return replay(&r, exec),
        };
    let mut dir = RunDir::create(out.as_deref(), name)?;
    let outcome = body(&mut dir)?;
    let path = dir.finish(name, params, seed)?;
    println!("{}", path.display());
    Ok(outcome)
}

fn replay(r: &ReplayArgs, exec: Execution) -> Result<Outcome> {
    let text = std::fs::read_to_string(&r.manifest).with_context(|| format!("reading {}", r.manifest.display()))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| Usage(format!("not a run manifest: {e}")))?;
    let mut tagged = serde_json::Map::new();
    tagged.insert(m.subcommand.clone(), m.params);
    let mut cmd: Command =
        serde_json::from_value(Value::Object(tagged)).map_err(|e| Usage(format!("cannot replay manifest: {e}")))?;
    let out = r.out.clone().unwrap_or_else(|| r.manifest.parent().unwrap_or(Path::new(".")).join("replay"));
    match &mut cmd {
        Command::CgTable(a) => a.out = Some(out),
        Command::BilinearVerify(a) => a.out = Some(out),
        Command::LatticeScan(a) => a.out = Some(out),
        Command::Strichartz(a) => a.out = Some(out),
        Command::Replay(_) => return usage("a manifest cannot replay another replay"),
    }
    run(cmd, exec)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<s3lab::Error>() {
        Some(s3lab::Error::Domain(_) | s3lab::Error::Refused(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match run(cli.command, exec) {
        Ok(outcome) if outcome.breaches.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for b in &outcome.breaches {
                eprintln!("assertion failed: {b}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str], out: &Path) -> Command {
        let mut argv = vec!["s3lab"];
        argv.extend_from_slice(args);
        let out = out.to_str().unwrap();
        argv.extend(["--out", out]);
        Cli::try_parse_from(argv).unwrap().command
    }

    fn data_rows(path: &Path) -> usize {
        std::fs::read_to_string(path).unwrap().lines().count() - 1
    }

    #[test]
    fn cg_table_sizes() {
        let tmp = tempfile::tempdir().unwrap();
        for (m, n, rows) in [("1", "1", 6), ("5", "0", 6)] {
            let dir = tmp.path().join(format!("{m}-{n}"));
            let outcome = run(parse(&["cg-table", m, n], &dir), Execution::Sequential).unwrap();
            assert!(outcome.breaches.is_empty());
            assert_eq!(data_rows(&dir.join("cg_table.csv")), rows);
        }
    }

    #[test]
    fn invalid_arguments_exit_two() {
        let tmp = tempfile::tempdir().unwrap();
        for args in [
            vec!["cg-table", "1", "2"],
            vec!["cg-table", "150", "60"],
            vec!["lattice-scan", "--lemma", "5.4"],
            vec!["lattice-scan", "--lemma", "5.3", "--delta", "0.2"],
            vec!["bilinear-verify", "--seeds", "0"],
        ] {
            let err = run(parse(&args, tmp.path()), Execution::Sequential).unwrap_err();
            assert_eq!(exit_code(&err), 2, "{args:?}");
        }
    }

    #[test]
    fn oversized_brute_force_is_refused() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = tmp.path().join("big.json");
        std::fs::write(&cfg, r#"{"slab": {"xi0": [0, 0], "a": [1, 0], "c": 0, "M": 8, "N": 8}}"#).unwrap();
        let cmd = parse(&["strichartz", "--mode", "kernel-split", "--config", cfg.to_str().unwrap()], tmp.path());
        assert_eq!(exit_code(&run(cmd, Execution::Sequential).unwrap_err()), 2);
    }

    #[test]
    fn breaches_are_reported_with_outputs() {
        let tmp = tempfile::tempdir().unwrap();
        let args = ["bilinear-verify", "--m-max", "3", "--n-max", "3", "--seeds", "2", "--constant", "0.1"];
        let outcome = run(parse(&args, tmp.path()), Execution::Sequential).unwrap();
        assert_eq!(outcome.breaches.len(), 1);
        let summary: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["breaches"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn replay_reproduces_outputs() {
        let tmp = tempfile::tempdir().unwrap();
        let first = tmp.path().join("first");
        run(parse(&["lattice-scan", "--lemma", "5.1", "--queries", "90", "--seed", "7"], &first), Execution::Parallel)
            .unwrap();
        let again = tmp.path().join("again");
        let manifest = first.join("manifest.json");
        run(parse(&["replay", manifest.to_str().unwrap()], &again), Execution::Sequential).unwrap();
        for name in ["rows.csv", "summary.json"] {
            assert_eq!(std::fs::read(first.join(name)).unwrap(), std::fs::read(again.join(name)).unwrap());
        }
        let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
        assert_eq!(m.seed, Some(7));
        assert_eq!(m.outputs, ["rows.csv", "summary.json"]);
    }
}
