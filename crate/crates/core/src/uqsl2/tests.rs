use super::*;
use crate::fusion::sl2_verlinde;
use crate::scalars::{q_integer, Certified};
use crate::tannaka::rep_tensor_decompose;

/// Kassel's closed form c_k = q^{k(k−1)/2}(q − q⁻¹)^k/[k]! for the Θ coefficients.
fn kassel_r(a: &Sl2ModuleData, b: &Sl2ModuleData) -> Mat {
    let q = &a.q;
    let diff = q - &q.inv().unwrap();
    let mut acc = Mat::zeros(a.dim() * b.dim(), a.dim() * b.dim());
    let (mut ek, mut fk) = (Mat::identity(a.dim()), Mat::identity(b.dim()));
    for k in 0..=a.weight.min(b.weight) as i64 {
        let c = &(&q.pow(k * (k - 1) / 2).unwrap() * &diff.pow(k).unwrap()) * &q_factorial(k, q).unwrap().inv().unwrap();
        acc = acc.add(&ek.kron(&fk).scale(&c));
        ek = ek.mul(&a.e);
        fk = fk.mul(&b.f);
    }
    pi_factor(a, b).unwrap().mul(&acc)
}

#[test]
fn trivial_and_fundamental_modules() {
    let v0 = weyl_module(0, 4).unwrap();
    assert!(v0.e.is_zero() && v0.f.is_zero() && v0.k.is_identity());
    let v1 = weyl_module(1, 4).unwrap();
    let q = cyc(8, 1).unwrap();
    assert_eq!(v1.k, Mat::diag(&[q.clone(), q.inv().unwrap()]));
    assert_eq!(v1.ribbon_scalar().unwrap(), cyc(16, -3).unwrap());
}

#[test]
fn relations_hold_for_large_weights() {
    for m in 0..9 {
        weyl_module(m, 5).unwrap();
    }
}

#[test]
fn gram_makes_f_the_adjoint_of_e() {
    for m in 0..5 {
        let v = weyl_module(m, 6).unwrap();
        let h = Mat::diag(&v.gram().unwrap());
        assert_eq!(v.e.conj_transpose().mul(&h), h.mul(&v.f));
        for x in v.gram().unwrap() {
            assert_eq!(x.is_positive_real(), Certified::Positive);
        }
    }
}

#[test]
fn rmatrix_matches_closed_form() {
    for ell in [4, 7] {
        for a in 0..3 {
            for b in 0..3 {
                let (va, vb) = (weyl_module(a, ell).unwrap(), weyl_module(b, ell).unwrap());
                assert_eq!(solve_rmatrix(&va, &vb).unwrap(), kassel_r(&va, &vb), "V{a}⊗V{b} at ℓ = {ell}");
            }
        }
    }
}

#[test]
fn rmatrix_on_trivial_charge_is_identity() {
    let (v0, v3) = (weyl_module(0, 6).unwrap(), weyl_module(3, 6).unwrap());
    assert!(solve_rmatrix(&v0, &v3).unwrap().is_identity());
}

#[test]
fn braiding_eigenvalues_on_v1_v1() {
    // Generic q: ℓ large enough that nothing truncates.
    let ell = 9;
    let v1 = weyl_module(1, ell).unwrap();
    let braid = flip_matrix(2, 2).mul(&solve_rmatrix(&v1, &v1).unwrap());
    let top = braid.get(0, 0);
    assert_eq!(top, cyc(4 * ell as u32, 1).unwrap());
    let x = braid.submatrix(&[1, 2], &[1, 2]);
    // On the singlet the eigenvalue is −q^{−3/2}; the trace of the middle block is q^{1/2} − q^{−3/2}.
    let expected = &cyc(4 * ell as u32, 1).unwrap() - &cyc(4 * ell as u32, -3).unwrap();
    assert_eq!(x.trace(), expected);
}

#[test]
fn yang_baxter_and_unitarity() {
    let ell = 5;
    let m: Vec<_> = (0..4).map(|k| weyl_module(k, ell).unwrap()).collect();
    assert!(yang_baxter_holds(&m[2], &m[1], &m[1]).unwrap());
    assert!(yang_baxter_holds(&m[1], &m[2], &m[3]).unwrap());
    for a in 0..4 {
        for b in 0..4 {
            assert!(rmatrix_unitary(&m[a], &m[b]).unwrap(), "V{a}⊗V{b}");
        }
    }
}

#[test]
fn truncated_powers_reproduce_verlinde() {
    for ell in 3..=8 {
        let oracle = truncated_fusion_oracle(ell).unwrap();
        let ring = sl2_verlinde(ell - 2);
        for i in 0..ring.rank() {
            for j in 0..ring.rank() {
                for k in 0..ring.rank() {
                    assert_eq!(oracle[i][j][k], ring.coeff(i, j, k) as i64, "ℓ = {ell}, ({i}, {j}, {k})");
                }
            }
        }
    }
}

#[test]
fn truncated_power_of_v1() {
    // ℓ = 4: V1^{⊗̲3} = 2·V1 since V3 is negligible.
    assert_eq!(truncated_power_multiplicities(4, 3).unwrap(), vec![0, 2, 0]);
}

#[test]
fn wenzl_idempotents() {
    let w = wenzl_decompose(1, 3).unwrap();
    assert_eq!(w.summands.iter().map(|(g, _)| *g).collect::<Vec<_>>(), vec![0]);
    assert_eq!(w.negligible.rank(), 3);
    assert!(w.report.passed(), "{}", w.report);
    let w = wenzl_decompose(1, 4).unwrap();
    assert_eq!(w.summands.iter().map(|(g, _)| *g).collect::<Vec<_>>(), vec![0, 2]);
    assert!(w.negligible.is_zero());
    assert!(w.report.passed(), "{}", w.report);
    assert!(q_integer(4, &cyc(8, 1).unwrap()).unwrap().is_zero());
    assert!(matches!(wenzl_decompose(3, 4), Err(Uqsl2Error::OutsideAlcove { .. })));
}

#[test]
fn aw_at_three_is_pointed() {
    let aw = assemble_aw(3).unwrap();
    assert_eq!(aw.presentation.shape.dims(), &[1, 2]);
    assert_eq!(rep_tensor_decompose(&aw.presentation, 1, 1), vec![1, 0]);
}

#[test]
fn aw_at_four_ranks() {
    let aw = assemble_aw(4).unwrap();
    let ring = sl2_verlinde(2);
    let p = aw.presentation.p();
    for i in 0..3 {
        for j in 0..3 {
            let expected: usize = (0..3).map(|k| ring.coeff(i, j, k) as usize * (k + 1)).sum();
            assert_eq!(p.block_or_zero(&[i, j]).rank(), expected);
        }
    }
}

#[test]
fn aw_at_four_verifies() {
    let aw = assemble_aw(4).unwrap();
    let rep = verify_aw(&aw).unwrap();
    assert!(rep.passed(), "{rep}");
}

#[test]
fn dk_table_at_four() {
    let aw = assemble_aw(4).unwrap();
    let table = dk_braiding_table(&aw, 1e-9).unwrap();
    assert!(table.passed(), "{}", table.report);
    let get = |l: usize, g: usize| table.entries.iter().find(|e| e.lambda == l && e.gamma == g).unwrap();
    assert_eq!(get(1, 2).expected, cyc(16, 1).unwrap());
    assert_eq!(get(1, 0).expected, cyc(16, -3).unwrap());
    assert!((get(0, 1).eigenvalue - Complex64::new(1.0, 0.0)).norm() < 1e-9);
}

#[test]
fn categorical_s_matches_ring() {
    for ell in [3, 4] {
        let aw = assemble_aw(ell).unwrap();
        let s = categorical_s(&aw).unwrap();
        assert!(s.report.passed(), "{}", s.report);
    }
}
