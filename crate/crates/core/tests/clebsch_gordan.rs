use proptest::prelude::*;
use s3lab::cg::*;
use s3lab::su2::haar_samples;

fn pairs(max_sum: u32) -> Vec<(u32, u32)> {
    (0..=max_sum).flat_map(|m| (0..=m).filter(move |n| m + n <= max_sum).map(move |n| (m, n))).collect()
}

#[test]
fn structure_up_to_degree_twenty() {
    for (m, n) in pairs(20) {
        let t = cg_decompose(m, n).unwrap();
        let ks = t.ks();
        let want: Vec<u32> = (0..=n).map(|s| m + n - 2 * s).collect();
        assert_eq!(ks, want, "({m},{n})");
        assert_eq!(ks.iter().map(|k| k + 1).sum::<u32>(), (m + 1) * (n + 1));
        for r in t.records() {
            assert_eq!(r.gamma, r.alpha + r.beta);
            assert!(r.alpha.unsigned_abs() <= m && r.beta.unsigned_abs() <= n && r.gamma.unsigned_abs() <= r.k);
            assert_eq!((r.alpha + m as i32) % 2, 0);
        }
        let rep = verify_orthogonality(&t);
        assert!(rep.max_row_defect <= 1e-9 && rep.max_col_defect <= 1e-9, "({m},{n}): {rep:?}");
    }
}

#[test]
fn twelve_eight_report() {
    let rep = verify_orthogonality(&cg_decompose(12, 8).unwrap());
    assert!(rep.max_row_defect <= 1e-9 && rep.max_col_defect <= 1e-9);
}

#[test]
fn top_weight_coefficient_is_one() {
    // the top of the k = m + n chain is v_m ⊗ v_n
    for (m, n) in [(3, 2), (7, 7), (10, 1)] {
        let t = cg_decompose(m, n).unwrap();
        let k = m + n;
        assert!((t.coeff(k, k as i32, m as i32, n as i32) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn projectors_match_casimir() {
    for (m, n) in [(1, 1), (3, 2), (6, 4), (9, 5)] {
        let t = cg_decompose(m, n).unwrap();
        for (k, p) in casimir_projectors(m, n).unwrap() {
            let q = t.projector(k).unwrap();
            assert!((q - p).amax() < 1e-8, "({m},{n}) k = {k}");
        }
    }
}

#[test]
fn block_diagonalizes_tensor_products() {
    for (m, n) in [(2, 1), (5, 5), (8, 3)] {
        let t = cg_decompose(m, n).unwrap();
        assert!(block_diagonalization_defect(&t, &haar_samples(77, 5)) < 1e-8);
    }
}

#[test]
fn refuses_bad_order() {
    assert!(cg_decompose(1, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn change_of_basis_is_orthogonal(m in 0u32..14, d in 0u32..14) {
        let n = d.min(m);
        let u = cg_decompose(m, n).unwrap().change_of_basis();
        let dim = ((m + 1) * (n + 1)) as usize;
        let defect = (u.transpose() * &u - nalgebra::DMatrix::<f64>::identity(dim, dim)).amax();
        prop_assert!(defect < 1e-10);
    }

    #[test]
    fn chain_vectors_have_unit_norm(m in 1u32..12, d in 0u32..12, pick in 0usize..100) {
        let n = d.min(m);
        let t = cg_decompose(m, n).unwrap();
        let ks = t.ks();
        let k = ks[pick % ks.len()];
        let gamma = k as i32 - 2 * (pick % (k as usize + 1)) as i32;
        let v = t.expand_in_product_basis(k, gamma).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
    }
}
