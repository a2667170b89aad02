use proptest::prelude::*;
use s3lab::lattice::*;
use s3lab::par::Execution;

fn brute_quadric(k: i64, c: i64, n: i64) -> u64 {
    let mut count = 0;
    for a in -n..=n {
        for b in -n..=n {
            if a * a + b * b + k * (a + b) == c {
                count += 1;
            }
        }
    }
    count
}

fn brute_hyperbola(k: i64, c: i64, n: i64) -> u64 {
    let mut count = 0;
    for a in (k - n)..=(k + n) {
        for b in -n..=n {
            if a != 0 && b != 0 && a * b == c {
                count += 1;
            }
        }
    }
    count
}

/// Per-pair interval lengths over the whole box, no pruning.
fn brute_setb(q: &SetBQuery, slack: f64) -> f64 {
    let nb = q.n_box.floor() as i64;
    let mut total = 0.0;
    for m in (q.k - nb)..=(q.k + nb) {
        for n in -nb..=nb {
            if m == 0 || n == 0 {
                continue;
            }
            let s = (m * n) as f64 + q.c;
            let lo = ((-slack - s) / q.l).max(-2.0 * q.l);
            let hi = ((slack - s) / q.l).min(2.0 * q.l);
            total += (hi - lo).max(0.0);
        }
    }
    total
}

#[test]
fn annulus_by_midpoint_rule() {
    for (c, k, x1, x2) in [(0.0, 1.0, 0.0, 0), (50.3, 4.0, 1.7, -3), (400.0, 25.0, -3.2, 5)] {
        let q = AnnulusQuery::new(c, k, x1, x2).unwrap();
        let r = (c + k).sqrt().ceil() as i64 + 1;
        let steps = 400_000;
        let w = 2.0 * r as f64 / steps as f64;
        let mut total = 0.0;
        for d in -r..=r {
            for s in 0..steps {
                let t = -(r as f64) + (s as f64 + 0.5) * w;
                let rho = t * t + (d * d) as f64;
                if rho >= c && rho <= c + k {
                    total += w;
                }
            }
        }
        let exact = annulus_measure(&q);
        assert!((exact - total).abs() < 1e-3 * exact.max(1.0), "C = {c}: {exact} vs {total}");
    }
}

#[test]
fn annulus_small_cases() {
    // C = 0, K = 1: unit disk rows d = 0 (length 2) and d = ±1 (length 0)
    let q = AnnulusQuery::new(0.0, 1.0, 0.0, 0).unwrap();
    assert!((annulus_measure(&q) - 2.0).abs() < 1e-15);
    assert!(AnnulusQuery::new(1.0, 0.5, 0.0, 0).is_err());
}

#[test]
fn counts_reject_empty_box() {
    assert!(count_quadric(0, 0, 0).is_err());
    assert!(count_hyperbola(0, 1, 0).is_err());
    assert_eq!(count_hyperbola(3, 0, 10).unwrap(), 0);
}

#[test]
fn setb_walk_matches_full_box() {
    for (l, k, c, m, n) in [(1.0, 0, 0.0, 1.0, 20.0), (3.5, 7, -40.0, 4.0, 30.0), (6.0, -12, 11.5, 16.0, 64.0)] {
        let q = SetBQuery::new(l, k, c, m, n).unwrap();
        let fast = setb_measure(&q, 1.0);
        let slow = brute_setb(&q, 1.0);
        assert!((fast - slow).abs() < 1e-9 * slow.max(1.0), "{q:?}: {fast} vs {slow}");
    }
}

#[test]
fn setb_monte_carlo_brackets_exact() {
    let q = SetBQuery::new(2.0, 3, -5.0, 4.0, 16.0).unwrap();
    let exact = setb_measure(&q, 1.0);
    let (mean, se) = setb_monte_carlo(&q, 1.0, 400_000, 5);
    assert!((mean - exact).abs() < 5.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn measure_scan_is_deterministic_across_modes() {
    let grid = MeasureGrid { queries: 300, ..MeasureGrid::default() };
    let (a, sa) = scan_measure(&grid, 4, Execution::Parallel);
    let (b, sb) = scan_measure(&grid, 4, Execution::Sequential);
    assert_eq!(a, b);
    assert_eq!(sa, sb);
}

#[test]
fn lemma_labels_round_trip() {
    for l in [Lemma::Measure, Lemma::Quadric, Lemma::Hyperbola, Lemma::SetB] {
        assert_eq!(Lemma::from_label(l.label()), Some(l));
    }
    assert_eq!(Lemma::from_label("5.4"), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quadric_count_matches_brute_force(k in -40i64..40, c in -50i64..900, n in 1i64..25) {
        prop_assert_eq!(count_quadric(k, c, n).unwrap(), brute_quadric(k, c, n));
    }

    #[test]
    fn hyperbola_count_matches_brute_force(k in -40i64..40, c in -2000i64..2000, n in 1i64..40) {
        prop_assert_eq!(count_hyperbola(k, c, n).unwrap(), brute_hyperbola(k, c, n));
    }

    #[test]
    fn annulus_measure_is_monotone_in_width(c in 0.0f64..1e4, k in 1.0f64..100.0, extra in 0.0f64..50.0) {
        let a = annulus_measure(&AnnulusQuery::new(c, k, 0.0, 0).unwrap());
        let b = annulus_measure(&AnnulusQuery::new(c, k + extra, 0.0, 0).unwrap());
        prop_assert!(b >= a - 1e-9);
    }
}
