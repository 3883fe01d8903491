use super::*;
use proptest::prelude::*;

fn sl2_closed_form(level: usize, i: usize, j: usize, k: usize) -> u32 {
    // Clebsch–Gordan with the level truncation i + j + k ≤ 2·level.
    let parity = (i + j + k).is_multiple_of(2);
    let triangle = k >= i.abs_diff(j) && k <= i + j;
    u32::from(parity && triangle && i + j + k <= 2 * level)
}

#[test]
fn sl2_small_levels() {
    let r = sl2_verlinde(1);
    assert_eq!(r.product(1, 1), vec![(0, 1)]);
    let r = sl2_verlinde(2);
    assert_eq!(r.product(1, 1), vec![(0, 1), (2, 1)]);
}

#[test]
fn sl2_matches_truncated_clebsch_gordan() {
    for level in 1..=6 {
        let r = sl2_verlinde(level);
        for i in 0..=level {
            for j in 0..=level {
                for k in 0..=level {
                    assert_eq!(r.coeff(i, j, k), sl2_closed_form(level, i, j, k), "level {level}: {i} {j} {k}");
                }
            }
        }
    }
}

#[test]
fn sln_agrees_with_sl2() {
    for ell in 3..=8 {
        let (r, _) = sln_verlinde(2, ell).unwrap();
        let s = sl2_verlinde(ell - 2);
        let n = s.rank();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert_eq!(r.coeff(i, j, k), s.coeff(i, j, k));
                }
            }
        }
    }
}

#[test]
fn sl3_minimal_level_is_pointed() {
    let (r, wd) = sln_verlinde(3, 4).unwrap();
    assert_eq!(r.rank(), 3);
    let x = wd.index_of(&wd.fundamental(1)).unwrap();
    let x2 = wd.index_of(&wd.fundamental(2)).unwrap();
    assert_eq!(r.product(x, x), vec![(x2, 1)]);
    assert_eq!(r.product(x2, x), vec![(0, 1)]);
    assert_eq!(r.dual(x), x2);
}

#[test]
fn sl3_classical_product() {
    let (r, wd) = sln_verlinde(3, 9).unwrap();
    let l1 = wd.index_of(&wd.fundamental(1)).unwrap();
    let two = wd.index_of(&[2, 0, 0]).unwrap();
    let l2 = wd.index_of(&wd.fundamental(2)).unwrap();
    assert_eq!(r.product(l1, l1), vec![(two, 1), (l2, 1)].into_iter().collect::<std::collections::BTreeMap<_, _>>().into_iter().collect::<Vec<_>>());
    let adj = wd.index_of(&[2, 1, 0]).unwrap();
    let prod: Vec<usize> = r.product(l1, l2).iter().map(|&(k, _)| k).collect();
    assert!(prod.contains(&0) && prod.contains(&adj));
}

#[test]
fn sl3_classical_dims_match_weights() {
    for mu in [vec![2, 1, 0], vec![3, 0, 0], vec![2, 2, 0]] {
        let total: i64 = Freudenthal::new(&mu).weights().iter().map(|(_, m)| m).sum();
        assert_eq!(total as u64, classical_dim(&mu));
    }
}

#[test]
fn quantum_dimensions() {
    let wd = WeightData::new(2, 4).unwrap();
    let d1 = qdim(&wd, &[1, 0]).unwrap();
    assert_eq!(&d1 * &d1, CycScalar::from_i64(2));
    assert!(qdim(&wd, &[0, 0]).unwrap().is_one());
    let wd = WeightData::new(4, 7).unwrap();
    let q = cyc(14, 1).unwrap();
    assert_eq!(qdim(&wd, &wd.fundamental(1)).unwrap(), q_integer(4, &q).unwrap());
}

#[test]
fn ribbon_values() {
    for k in 1..=6usize {
        let wd = WeightData::new(2, k + 2).unwrap();
        assert_eq!(ribbon_theta(&wd, &[k as i64, 0]).unwrap(), cyc(4, k as i64).unwrap());
        assert!(ribbon_theta(&wd, &[0, 0]).unwrap().is_one());
    }
    for n in 2..=5usize {
        let wd = WeightData::new(n, n + 1).unwrap();
        for k in 1..n {
            let expected = cyc(2 * n as u32, (k * (n - k)) as i64).unwrap();
            assert_eq!(ribbon_theta(&wd, &wd.fundamental(k)).unwrap(), expected);
        }
    }
}

#[test]
fn fp_dimensions_of_sl2() {
    for level in 1..=6 {
        let r = sl2_verlinde(level);
        let d = fp_dimension(&r, 1);
        let expected = 2.0 * (std::f64::consts::PI / (level as f64 + 2.0)).cos();
        assert!(d.lower <= expected + 1e-12 && expected - 1e-12 <= d.upper);
        assert!((d.value - expected).abs() < 1e-9);
    }
    assert!(fp_dimensions(&BasedRing::pointed(4)).iter().all(|d| (d.value - 1.0).abs() < 1e-12));
}

#[test]
fn weak_dimension_functions() {
    let r = sl2_verlinde(2);
    let classical: Vec<f64> = (0..3).map(|i| i as f64 + 1.0).collect();
    assert!(is_weak_dimension_function(&r, &classical, 1e-9).unwrap().passed());
    let ones = vec![1.0; 3];
    let check = is_weak_dimension_function(&r, &ones, 1e-9).unwrap();
    assert_eq!(check.witness, Some(WdfWitness::Inequality { i: 1, j: 1, lhs: 2.0, rhs: 1.0 }));
    let fp: Vec<f64> = fp_dimensions(&r).iter().map(|d| d.value).collect();
    assert_eq!(integral_wdf(&r, &fp, 4).unwrap(), vec![1, 4, 4]);
    assert_eq!(constant_wdf(&r), vec![1, 2, 2]);
    let p = BasedRing::pointed(3);
    assert_eq!(integral_wdf(&p, &[1.0; 3], 4).unwrap(), vec![1, 4, 4]);
    assert!(matches!(integral_wdf(&p, &[1.0; 3], 3), Err(FusionError::SmallScale(3))));
}

#[test]
fn modular_data_of_small_rings() {
    let (_, md) = sln_modular_data(2, 3).unwrap();
    let one = CycScalar::one();
    let expected = Mat::from_rows(&[vec![one.clone(), one.clone()], vec![one.clone(), -one.clone()]], 2);
    assert!(proportional(&md.s, &expected).is_some());
    assert!(md.report.passed(), "{}", md.report);
    let (_, md) = sln_modular_data(2, 4).unwrap();
    assert!(md.modular && md.report.passed());
    let p = BasedRing::pointed(2);
    let md = modular_data(&p, &[one.clone(), one.clone()], &[one.clone(), one]).unwrap();
    assert!(!md.modular);
    assert_eq!(md.s.rank(), 1);
}

#[test]
fn sl3_modular_data_with_dual_pairs() {
    // ℓ = 4 is pointed Z₃ with θ = e^{2πi/3} off the unit: S_{Λ1,Λ1} = θ⁻²θ_{Λ2} = e^{−2πi/3}
    for ell in [4, 5, 6] {
        let (_, md) = sln_modular_data(3, ell).unwrap();
        assert!(md.modular && md.report.passed(), "ℓ = {ell}: {}", md.report);
    }
    let (r, md) = sln_modular_data(3, 4).unwrap();
    let (a, b) = (1, r.dual(1));
    assert_ne!(a, b);
    assert_eq!(md.s.get(a, a), md.s.get(a, b).conj());
    assert_eq!(md.s.get(a, a), cyc(3, -1).unwrap());
}

#[test]
fn ring_text_round_trip() {
    let (r, _) = sln_verlinde(3, 5).unwrap();
    assert_eq!(BasedRing::from_text(&r.to_text()).unwrap(), r);
}

#[test]
fn rejects_non_associative_table() {
    let mut coeffs = vec![vec![vec![0u32; 3]; 3]; 3];
    for i in 0..3 {
        coeffs[0][i][i] = 1;
        coeffs[i][0][i] = 1;
    }
    coeffs[1][1][2] = 1;
    coeffs[1][2][0] = 1;
    coeffs[2][1][0] = 1;
    coeffs[2][2][1] = 1;
    coeffs[2][2][2] = 1;
    let r = BasedRing::new(vec!["e".into(), "a".into(), "b".into()], 0, coeffs, vec![0, 2, 1]);
    assert!(matches!(r, Err(FusionError::NotAssociative(..))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fp_dims_are_multiplicative(level in 1usize..7, i in 0usize..7, j in 0usize..7) {
        let r = sl2_verlinde(level);
        let (i, j) = (i % (level + 1), j % (level + 1));
        let d: Vec<f64> = fp_dimensions(&r).iter().map(|x| x.value).collect();
        let rhs: f64 = r.product(i, j).iter().map(|&(k, c)| f64::from(c) * d[k]).sum();
        prop_assert!((d[i] * d[j] - rhs).abs() < 1e-9);
    }

    #[test]
    fn integral_wdfs_dominate_fp(level in 1usize..7, scale in 4u64..9) {
        let r = sl2_verlinde(level);
        let fp: Vec<f64> = fp_dimensions(&r).iter().map(|x| x.value).collect();
        for cand in [integral_wdf(&r, &fp, scale).unwrap(), constant_wdf(&r)] {
            let d: Vec<f64> = cand.iter().map(|&x| x as f64).collect();
            prop_assert!(is_weak_dimension_function(&r, &d, 1e-9).unwrap().passed());
            prop_assert!(d.iter().zip(&fp).all(|(a, b)| *a >= b - 1e-9));
        }
    }

    #[test]
    fn sln_is_dual_symmetric(n in 2usize..4, extra in 1usize..4) {
        let (r, _) = sln_verlinde(n, n + extra).unwrap();
        let k = r.rank();
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    prop_assert_eq!(r.coeff(i, j, l), r.coeff(r.dual(j), r.dual(i), r.dual(l)));
                }
            }
        }
    }
}
