//! Acceptance suite: one PASS/FAIL line per criterion, measured values and
//! runtime included. Run with `cargo test -p s3lab-cli --test acceptance`;
//! numeric arguments select criteria (`-- 1 7`).

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use s3lab::bilinear::*;
use s3lab::cg::*;
use s3lab::lattice::*;
use s3lab::par::Execution;
use s3lab::stats::{ls_slope, power_law_exponent};
use s3lab::strichartz::*;
use s3lab::su2::{haar_quadrature, haar_samples};

struct Check {
    pass: bool,
    what: String,
}

fn check(pass: bool, what: impl Into<String>) -> Check {
    Check { pass, what: what.into() }
}

type Criterion = (u32, u64, fn() -> Vec<Check>);

const EXEC: Execution = Execution::Parallel;

fn cg_structure() -> Vec<Check> {
    let (mut weight, mut triangle, mut dimension) = (true, true, true);
    let mut worst: f64 = 0.0;
    let mut tables = 0;
    for m in 0..=60u32 {
        for n in 0..=m.min(60 - m) {
            let t = cg_decompose(m, n).expect("table");
            let ks = t.ks();
            dimension &= ks.iter().map(|k| k + 1).sum::<u32>() == (m + 1) * (n + 1);
            triangle &= ks == (0..=n).map(|s| m + n - 2 * s).collect::<Vec<_>>();
            for r in t.records() {
                weight &= r.gamma == r.alpha + r.beta;
                triangle &= r.gamma.unsigned_abs() <= r.k && r.k >= m - n && r.k <= m + n;
            }
            let rep = verify_orthogonality(&t);
            worst = worst.max(rep.max_row_defect).max(rep.max_col_defect);
            tables += 1;
        }
    }
    vec![
        check(weight, format!("weight conservation on {tables} tables")),
        check(triangle, "triangle support"),
        check(dimension, "dimension identity"),
        check(worst <= 1e-9, format!("max orthogonality defect {worst:.2e} <= 1e-9")),
    ]
}

fn cg_oracles() -> Vec<Check> {
    let (mut proj, mut block): (f64, f64) = (0.0, 0.0);
    let samples = haar_samples(2, 20);
    let mut cells = 0;
    for n in 0..=15u32 {
        for m in n..=255u32 {
            if (m + 1) * (n + 1) > 256 {
                break;
            }
            let t = cg_decompose(m, n).expect("table");
            for (k, p) in casimir_projectors(m, n).expect("casimir") {
                proj = proj.max((t.projector(k).expect("projector") - p).amax());
            }
            block = block.max(block_diagonalization_defect(&t, &samples));
            cells += 1;
        }
    }
    vec![
        check(proj <= 1e-8, format!("projector vs Casimir {proj:.2e} <= 1e-8 over {cells} pairs")),
        check(block <= 1e-8, format!("block-diagonalization {block:.2e} <= 1e-8")),
    ]
}

fn bilinear_exactness() -> Vec<Check> {
    let (mut quad_err, mut point_err): (f64, f64) = (0.0, 0.0);
    let points = haar_samples(3, 50);
    for m in 0..=8u32 {
        for n in 0..=m {
            let q = haar_quadrature(quadrature_levels(m, n)).expect("quadrature");
            let pairs: Vec<_> = (0..50).map(|s| random_pair(m, n, s)).collect();
            let quad = product_l2_quadrature_batch(&pairs, &q, EXEC);
            for ((f, g), qn) in pairs.iter().zip(&quad) {
                let exact = product_l2_exact(f, g).expect("exact");
                quad_err = quad_err.max((exact - qn.value).abs() / exact);
            }
            let (f, g) = &pairs[0];
            let dec = product_decompose(f, g).expect("decomposition");
            for x in &points {
                point_err = point_err.max((dec.evaluate(x) - evaluate(f, x) * evaluate(g, x)).norm());
            }
        }
    }
    vec![
        check(quad_err <= 1e-4, format!("exact vs Haar quadrature {quad_err:.2e} <= 1e-4")),
        check(point_err <= 1e-8, format!("pointwise decomposition {point_err:.2e} <= 1e-8")),
    ]
}

/// Recorded constant for random pairs (measured max 0.481).
const BILINEAR_CONSTANT: f64 = 0.5;

fn bilinear_no_log() -> Vec<Check> {
    let seeds: Vec<u64> = (0..500).collect();
    let ns = [4u32, 8, 16, 32, 64];
    let mut per_n = vec![f64::MIN; ns.len()];
    for m in [8u32, 16, 32, 64] {
        for (i, &n) in ns.iter().enumerate().filter(|(_, n)| **n <= m) {
            let rows = ratio_scan(m, n, &seeds, EXEC).expect("scan");
            per_n[i] = rows.iter().map(|r| r.ratio).fold(per_n[i], f64::max);
        }
    }
    let max = per_n.iter().cloned().fold(f64::MIN, f64::max);
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64 + 1.0).ln()).collect();
    let slope = ls_slope(&xs, &per_n);
    let zonal_min = (1..=60).map(|n| zonal_ratio(n).expect("zonal")).fold(f64::INFINITY, f64::min);
    vec![
        check(max <= BILINEAR_CONSTANT, format!("max ratio {max:.4} <= {BILINEAR_CONSTANT}")),
        check((-0.05..=0.05).contains(&slope), format!("slope vs log(n+1) {slope:.4} in [-0.05, 0.05]")),
        check(zonal_min >= 0.1, format!("zonal min {zonal_min:.4} >= 0.1")),
    ]
}

/// Recorded constant for trilinear ratios (measured max 1.0, zonal with m₃ = 0).
const TRILINEAR_CONSTANT: f64 = 1.05;

fn trilinear() -> Vec<Check> {
    let mut max: f64 = 0.0;
    for m1 in 0..=8u32 {
        for m2 in 0..=m1 {
            for m3 in 0..=m2 {
                let rule = TorusQuadrature::new(&[m1, m2, m3]);
                let mut triples: Vec<[Eigenfunction; 3]> = (0..20u64)
                    .map(|s| {
                        [
                            random_eigenfunction(m1, 3 * s),
                            random_eigenfunction(m2, 3 * s + 1),
                            random_eigenfunction(m3, 3 * s + 2),
                        ]
                    })
                    .collect();
                triples.push([zonal(m1), zonal(m2), zonal(m3)]);
                for [a, b, c] in &triples {
                    max = max.max(trilinear_ratio_with(&rule, [a, b, c]).expect("trilinear"));
                }
            }
        }
    }
    vec![check(max <= TRILINEAR_CONSTANT, format!("max trilinear ratio {max:.4} <= {TRILINEAR_CONSTANT}"))]
}

const MEASURE_CONSTANT: f64 = 6.5;
const SETB_CONSTANT: f64 = 40.0;

fn lattice() -> Vec<Check> {
    let (_, measure) = scan_measure(&MeasureGrid::default(), 0, EXEC);
    let (_, quadric) = scan_counts(Lemma::Quadric, &CountGrid::default(), 0, EXEC).expect("quadric");
    let (_, hyperbola) = scan_counts(Lemma::Hyperbola, &CountGrid::default(), 0, EXEC).expect("hyperbola");
    let (_, setb) = scan_setb(&SetBGrid::default(), 0, EXEC).expect("set B");
    let exp = |s: &ScanSummary| s.fitted.unwrap_or(f64::NAN);
    let regimes: Vec<String> = setb
        .slices
        .iter()
        .filter(|(l, _)| l.ends_with("exponent"))
        .map(|(l, v)| format!("{}={v:.3}", &l[..1]))
        .collect();
    vec![
        check(measure.max <= MEASURE_CONSTANT, format!("5.1 max measure/K {:.3} <= {MEASURE_CONSTANT}", measure.max)),
        check(exp(&quadric) <= 0.3, format!("5.2 quadric exponent {:.3} <= 0.3", exp(&quadric))),
        check(exp(&hyperbola) <= 0.3, format!("5.2 hyperbola exponent {:.3} <= 0.3", exp(&hyperbola))),
        check(setb.max <= SETB_CONSTANT, format!("5.3 max ratio {:.2} <= {SETB_CONSTANT}", setb.max)),
        check(exp(&setb) <= 0.05, format!("5.3 regime exponents {} <= 0.05", regimes.join(" "))),
    ]
}

fn slab_packets(slab: &SlabSpec, h: f64, trials: u64) -> Vec<WavePacket> {
    let grid = FrequencyGrid::covering(slab, h).expect("grid");
    (0..=trials)
        .map(|t| {
            let mode = if t == 0 { PacketMode::Indicator } else { PacketMode::GaussianRandom };
            sample_slab_packet(slab, &grid, mode, t).expect("packet")
        })
        .collect()
}

fn strichartz() -> Vec<Check> {
    let slabs = [
        SlabSpec::new((0.3, 1), (0.6, 0.8), 2.0, 2.0, 3.0).unwrap(),
        SlabSpec::new((-1.7, 0), (1.0, 0.0), -1.7, 1.0, 4.0).unwrap(),
        SlabSpec::new((2.0, -3), (0.2, -1.0), 3.5, 1.5, 2.5).unwrap(),
    ];
    let mut plancherel: f64 = 0.0;
    let mut largest = 0;
    let (mut violations, mut tuples) = (0u64, 0u64);
    for slab in &slabs {
        for p in slab_packets(slab, 0.5, 3).iter().filter(|p| p.len() <= 32) {
            largest = largest.max(p.len());
            for (disp, k) in [(Dispersion::Elliptic, 0), (Dispersion::Elliptic, -3), (Dispersion::Hyperbolic, 0)] {
                let time = evolve_l4_norm(p, disp, k).unwrap().powi(4);
                let freq = quadrilinear_form_frequency(p, disp, k, false).unwrap();
                plancherel = plancherel.max((time - freq).abs() / freq);
            }
            for k in [-3, 0, 2, 5] {
                let r = kernel_split_diagnostics(p, k).unwrap();
                violations += r.cover_violations;
                tuples += r.gamma_count;
            }
        }
    }

    let scan = quotient_scan(&ScanConfig::default(), EXEC).expect("quotient scan");
    let boxes = box_scaling(&[4, 8, 16, 32], 0.5, EXEC).expect("box scaling");
    let ratios: Vec<f64> = boxes.iter().map(|r| r.ratio).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));

    let ns = [4u32, 8, 16, 32, 64];
    let hyp: Vec<f64> = ns
        .iter()
        .map(|&n| hyperbolic_l4_quotient(n, 2, 0.5, 0, Dispersion::Hyperbolic, EXEC).expect("hyperbolic").max)
        .collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let hyp_exp = power_law_exponent(&xs, &hyp);

    let mut galilean: f64 = 0.0;
    let p = &slab_packets(&slabs[1], 0.25, 1)[1];
    for (di, j, k) in [(4, 1, 0), (-9, -2, 3), (0, 3, -1)] {
        let a = evolve_l4_norm(&p.shifted(di, j), Dispersion::Elliptic, k).unwrap();
        let b = evolve_l4_norm(p, Dispersion::Elliptic, k + 2 * j).unwrap();
        galilean = galilean.max((a - b).abs() / b);
    }
    for slab in &slabs {
        let base = strichartz_quotient(slab, 0.5, 0.1, 2, 6, 1, EXEC).unwrap();
        let moved = strichartz_quotient(&slab.translated(2.5, 3), 0.5, 0.1, 2, 0, 1, EXEC).unwrap();
        for (a, b) in base.quotients.iter().zip(&moved.quotients) {
            galilean = galilean.max((a - b).abs() / b);
        }
    }

    let per_n: Vec<String> = scan.per_n_max.iter().map(|(n, v)| format!("{n}:{v:.3}")).collect();
    vec![
        check(plancherel <= 0.02, format!("Plancherel {plancherel:.1e} <= 2% (<= {largest} nodes)")),
        check(violations == 0, format!("kernel cover violations {violations} on {tuples} tuples")),
        check(
            scan.exponent <= 0.05,
            format!("quotient scan exponent {:.3} <= 0.05 (max {})", scan.exponent, per_n.join(" ")),
        ),
        check(hi <= 2.0 * lo, format!("box norm/N^(1/4) in [{lo:.3}, {hi:.3}], within factor 2")),
        check(hyp_exp <= 0.05, format!("hyperbolic exponent {hyp_exp:.3} <= 0.05")),
        check(galilean <= 1e-6, format!("Galilean {galilean:.1e} <= 1e-6")),
    ]
}

fn s3lab(args: &[&str], out: &Path, sequential: bool) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_s3lab"));
    if sequential {
        cmd.arg("--sequential");
    }
    let status = cmd.args(args).arg("--out").arg(out).output().expect("spawn s3lab").status;
    status.code().unwrap_or(-1)
}

fn outputs(dir: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(dir.join("manifest.json")).expect("manifest");
    let v: serde_json::Value = serde_json::from_str(&text).expect("manifest json");
    v["outputs"].as_array().expect("outputs").iter().map(|s| s.as_str().unwrap().to_owned()).collect()
}

fn determinism() -> Vec<Check> {
    let tmp = tempfile::tempdir().expect("tempdir");
    let cfg = |name: &str, body: &str| {
        let p = tmp.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let slab = cfg("slab.json", r#"{"slab": {"xi0": [0.3, 1], "a": [0.6, 0.8], "c": 2.0, "M": 2, "N": 3}}"#);
    let small = cfg("small.json", r#"{"n_values": [2, 4], "trials": 1, "seed": 5}"#);
    let scan = cfg("scan.json", r#"{"scan": true, "n_values": [8, 16], "trials": 1}"#);
    let window = cfg("window.json", r#"{"slab": {"xi0": [0, 0], "a": [1, 0], "c": 0, "M": 1, "N": 2}, "window": {"t_min": -60, "t_max": 60, "n_t": 4096}}"#);
    let runs: Vec<Vec<&str>> = vec![
        vec!["cg-table", "12", "8"],
        vec!["cg-table", "7", "3", "--format", "json"],
        vec!["bilinear-verify", "--m-max", "5", "--n-max", "5", "--seeds", "4", "--zonal"],
        vec!["lattice-scan", "--lemma", "5.1", "--queries", "600"],
        vec!["lattice-scan", "--lemma", "5.2a", "--n-values", "16,32", "--trials", "100"],
        vec!["lattice-scan", "--lemma", "5.2b", "--n-values", "16,32", "--trials", "100", "--seed", "3"],
        vec!["lattice-scan", "--lemma", "5.3", "--n-values", "16,64", "--l-points", "4"],
        vec!["strichartz", "--mode", "elliptic", "--config", &slab],
        vec!["strichartz", "--mode", "elliptic", "--config", &scan],
        vec!["strichartz", "--mode", "elliptic", "--config", &window],
        vec!["strichartz", "--mode", "hyperbolic", "--config", &small],
        vec!["strichartz", "--mode", "quadrilinear", "--config", &slab],
        vec!["strichartz", "--mode", "kernel-split", "--config", &slab],
        vec!["strichartz", "--mode", "box-scaling", "--config", &small],
    ];
    let mut mismatches = Vec::new();
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let first = tmp.path().join(format!("run{i}"));
        let again = tmp.path().join(format!("again{i}"));
        let replayed = tmp.path().join(format!("replay{i}"));
        let code = s3lab(args, &first, false);
        let code_again = s3lab(args, &again, true);
        let manifest = first.join("manifest.json");
        let code_replay = s3lab(&["replay", manifest.to_str().unwrap()], &replayed, false);
        if !(code == 0 || code == 1) || code != code_again || code != code_replay {
            mismatches.push(format!("{}: exit codes {code}/{code_again}/{code_replay}", args.join(" ")));
            continue;
        }
        let names = outputs(&first);
        if names.is_empty() || names != outputs(&replayed) {
            mismatches.push(format!("{}: output lists differ", args.join(" ")));
        }
        for name in names {
            let a = std::fs::read(first.join(&name)).unwrap();
            for other in [&again, &replayed] {
                if std::fs::read(other.join(&name)).ok().as_ref() != Some(&a) {
                    mismatches.push(format!("{}: {name} differs", args.join(" ")));
                }
            }
            files += 1;
        }
    }
    let what = if mismatches.is_empty() {
        format!("{} runs, {files} files identical across rerun, --sequential and replay", runs.len())
    } else {
        mismatches.join("; ")
    };
    vec![check(mismatches.is_empty(), what)]
}

fn main() {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let suite: [Criterion; 8] = [
        (1, 60, cg_structure),
        (2, 120, cg_oracles),
        (3, 120, bilinear_exactness),
        (4, 600, bilinear_no_log),
        (5, 120, trilinear),
        (6, 300, lattice),
        (7, 900, strichartz),
        (8, 300, determinism),
    ];
    let mut failed = Vec::new();
    for (id, limit, run) in suite {
        if !picked.is_empty() && !picked.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut checks = run();
        let elapsed = start.elapsed();
        checks.push(check(elapsed <= Duration::from_secs(limit), format!("runtime {:.1} s <= {limit} s", elapsed.as_secs_f64())));
        let pass = checks.iter().all(|c| c.pass);
        let detail: Vec<String> =
            checks.iter().map(|c| if c.pass { c.what.clone() } else { format!("FAILED {}", c.what) }).collect();
        println!("criterion {id}: {} | {}", if pass { "PASS" } else { "FAIL" }, detail.join("; "));
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
