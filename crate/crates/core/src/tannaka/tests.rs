use super::*;
use crate::fixtures::fun_zn;
use crate::fusion::sl2_verlinde;
use crate::quasitri::verify_quasitriangular;
use crate::scalars::cyc;

fn pointed_braiding(order: usize, root: &CycScalar) -> Braiding {
    let mut b = Braiding::new();
    for g in 0..order {
        for h in 0..order {
            b.insert((g, h, (g + h) % order), Mat::scalar(1, &root.pow((g * h) as i64).unwrap()));
        }
    }
    b
}

#[test]
fn pointed_reconstruction_is_fun_zn() {
    for n in 2..=4 {
        let ring = BasedRing::pointed(n);
        let fd = choose_structure(&ring, &vec![1; n], 0).unwrap();
        let rec = reconstruct(&fd, &Associativity::Strict, None).unwrap();
        let w = rec.presentation;
        assert!(w.verify_wqb().passed());
        assert!(w.verify_antipode().unwrap().passed());
        let reference = fun_zn(n);
        assert_eq!(w.phi, reference.phi);
        for r in 0..n {
            assert_eq!(w.delta.unit_image(r, 0, 0), reference.delta.unit_image(r, 0, 0));
        }
    }
}

#[test]
fn pointed_braiding_gives_r_matrix() {
    let ring = BasedRing::pointed(3);
    let fd = choose_structure(&ring, &[1, 1, 1], 0).unwrap();
    let root = cyc(3, 1).unwrap();
    let rec = reconstruct(&fd, &Associativity::Strict, Some(&pointed_braiding(3, &root))).unwrap();
    let q = rec.braiding.unwrap();
    let rep = verify_quasitriangular(&rec.presentation, &q);
    assert!(rep.passed(), "{rep}");
    assert_eq!(q.r.block(&[1, 2]).unwrap().get(0, 0), root.pow(2).unwrap());
}

#[test]
fn seeds_are_connected_by_explicit_twist() {
    let ring = BasedRing::pointed(3);
    let base = choose_structure(&ring, &[1, 2, 2], 0).unwrap();
    let other = choose_structure(&ring, &[1, 2, 2], 7).unwrap();
    let assoc = Associativity::Explicit(SixJ::trivial(&base));
    let w0 = reconstruct(&base, &assoc, None).unwrap().presentation;
    let w1 = reconstruct(&other, &assoc, None).unwrap().presentation;
    assert!(w0.verify_wqb().passed());
    let tw = twist_between(&base, &other).unwrap();
    tw.validate(&w0).unwrap();
    let twisted = w0.twist(&tw).unwrap();
    assert_eq!(twisted.phi, w1.phi);
    assert_eq!(twisted.phi_inv, w1.phi_inv);
    for (r, i, j) in crate::wqh::units(&w0.shape) {
        assert_eq!(twisted.delta.unit_image(r, i, j), w1.delta.unit_image(r, i, j));
    }
}

#[test]
fn classical_dims_on_sl2_level_one() {
    let ring = sl2_verlinde(1);
    let fd = choose_structure(&ring, &[1, 2], 0).unwrap();
    assert_eq!(fd.f_matrix(1, 1).rows(), 1);
    assert_eq!(fd.f_matrix(1, 1).cols(), 4);
    let w = reconstruct(&fd, &Associativity::Strict, None).unwrap().presentation;
    assert_eq!(rep_tensor_decompose(&w, 1, 1), vec![1, 0]);
}

#[test]
fn rejects_dimension_below_fusion() {
    let ring = sl2_verlinde(2);
    assert!(matches!(choose_structure(&ring, &[1, 1, 1], 0), Err(TannakaError::NotWeak(_))));
}

#[test]
fn pointed_pre_associator_is_weak_tensor() {
    let ring = BasedRing::pointed(2);
    let fd = choose_structure(&ring, &[1, 1], 0).unwrap();
    let pre = cft_pre_associator(&fd).unwrap();
    assert!(pre.weak_tensor, "{}", pre.report);
    assert_eq!(pre.phi, AlgTensor::identity(&fd.shape().unwrap(), 3));
}

#[test]
fn coordinate_embeddings_are_not_weak_tensor() {
    let ring = BasedRing::pointed(2);
    let fd = choose_structure(&ring, &[1, 2], 0).unwrap();
    let pre = cft_pre_associator(&fd).unwrap();
    assert!(!pre.weak_tensor);
    assert_eq!(pre.failing_triple, Some(vec!["g1".to_string(), "g1".into(), "g1".into()]));
    let w = reconstruct(&fd, &Associativity::Explicit(SixJ::trivial(&fd)), None).unwrap().presentation;
    assert!(w.verify_wqb().passed());
}
