use super::*;
use crate::scalars::cyc;
use proptest::prelude::*;
use smallvec::smallvec;

fn s(v: i64) -> CycScalar {
    CycScalar::from_i64(v)
}

fn shape(dims: Vec<usize>) -> Arc<BlockShape> {
    Arc::new(BlockShape::numbered(dims, "b").unwrap())
}

/// Fun(Z_n) coproduct from group convolution.
fn fun_zn(n: usize) -> CoproductMap {
    let sh = shape(vec![1; n]);
    let table = (0..n)
        .map(|g| {
            let blocks = (0..n).map(|h| -> (Key, Mat) { (smallvec![h, (g + n - h) % n], Mat::identity(1)) });
            vec![AlgTensor::from_blocks(&sh, 2, blocks).unwrap()]
        })
        .collect();
    CoproductMap::from_table(&sh, table).unwrap()
}

fn dense_mul(a: &[Vec<CycScalar>], b: &[Vec<CycScalar>]) -> Vec<Vec<CycScalar>> {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![CycScalar::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += &(&a[i][k] * &bk[j]);
            }
        }
    }
    out
}

#[test]
fn shape_validation() {
    assert!(BlockShape::new(vec![], vec![]).is_err());
    assert!(BlockShape::new(vec![1, 0], vec!["a".into(), "b".into()]).is_err());
    assert!(BlockShape::new(vec![1, 2], vec!["a".into(), "a".into()]).is_err());
    let sh = BlockShape::numbered(vec![1, 2], "b").unwrap();
    assert!(sh.clone().with_gram(vec![vec![s(1)], vec![s(1), cyc(4, 1).unwrap()]]).is_err());
    assert_eq!(sh.keys(3).len(), 8);
}

#[test]
fn identity_and_idempotent() {
    let sh = shape(vec![1, 2]);
    let a = AlgTensor::element(&sh, vec![Mat::scalar(1, &s(3)), Mat::from_dense(2, 2, &[s(1), s(2), s(3), s(4)])]).unwrap();
    let id = AlgTensor::identity(&sh, 1);
    assert_eq!(id.mul(&a).unwrap(), a);
    let delta = fun_zn(2);
    let p = delta.delta_identity();
    assert_eq!(p.mul(&p).unwrap(), p);
    assert_eq!(p, AlgTensor::identity(delta.shape(), 2));
}

#[test]
fn mul_matches_dense_oracle() {
    let sh = shape(vec![2, 3]);
    let q = cyc(12, 1).unwrap();
    let mk = |off: i64| {
        let blocks = (0..2)
            .map(|r| {
                let n = sh.dim(r);
                Mat::from_fn(n, n, |i, j| &q.pow((i + 2 * j) as i64 + off).unwrap() + &s(i as i64 - j as i64))
            })
            .collect();
        AlgTensor::element(&sh, blocks).unwrap()
    };
    let (a, b) = (mk(0), mk(3));
    let ab = a.mul(&b).unwrap();
    for r in 0..2 {
        let expect = dense_mul(&a.block(&[r]).unwrap().to_dense(), &b.block(&[r]).unwrap().to_dense());
        assert_eq!(ab.block(&[r]).unwrap().to_dense(), expect);
    }
    assert_eq!(a.mul(&AlgTensor::identity(&sh, 2)).unwrap_err(), BlockError::Legs(1, 2));
}

#[test]
fn outer_and_flip() {
    let sh = shape(vec![1, 2]);
    let a = AlgTensor::element(&sh, vec![Mat::scalar(1, &s(2)), Mat::from_dense(2, 2, &[s(1), s(5), s(0), s(1)])]).unwrap();
    let b = AlgTensor::element(&sh, vec![Mat::scalar(1, &s(7)), Mat::from_dense(2, 2, &[s(0), s(1), s(1), s(0)])]).unwrap();
    let ab = a.outer(&b).unwrap();
    assert_eq!(ab.permute_legs(&[1, 0]).unwrap(), b.outer(&a).unwrap());
    let id = AlgTensor::identity(&sh, 1);
    assert_eq!(id.outer(&id).unwrap().outer(&id).unwrap(), AlgTensor::identity(&sh, 3));
    // (a⊗b)(c⊗d) = ac⊗bd
    let lhs = ab.mul(&b.outer(&a).unwrap()).unwrap();
    let rhs = a.mul(&b).unwrap().outer(&b.mul(&a).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
    let four = ab.outer(&ab).unwrap();
    assert_eq!(four.outer(&a).unwrap_err(), BlockError::LegOverflow(5));
    // a⊗b⊗c with perm [2,0,1] is b⊗c⊗a
    let c = a.mul(&b).unwrap();
    let abc = ab.outer(&c).unwrap();
    assert_eq!(abc.permute_legs(&[2, 0, 1]).unwrap(), b.outer(&c).unwrap().outer(&a).unwrap());
    assert_eq!(abc.permuted_block(&[2, 0, 1], &[1, 1, 0]), Some(b.outer(&c).unwrap().outer(&a).unwrap().block(&[1, 1, 0]).unwrap().clone()));
    assert!(abc.permute_legs(&[0, 0, 1]).is_err());
}

#[test]
fn partial_inverse_cases() {
    let delta = fun_zn(3);
    let sh = delta.shape().clone();
    let p = delta.delta_identity();
    let (pinv, q) = p.partial_inverse(&p, None).unwrap();
    assert_eq!((pinv, q), (p.clone(), p.clone()));
    // ordinary inverse against dense elimination
    let sh2 = shape(vec![2]);
    let m = Mat::from_dense(2, 2, &[s(2), s(1), s(1), s(1)]);
    let t = AlgTensor::element(&sh2, vec![m.clone()]).unwrap();
    let (tinv, q) = t.partial_inverse(&AlgTensor::identity(&sh2, 1), None).unwrap();
    assert_eq!(tinv.block(&[0]).unwrap(), &m.inverse().unwrap());
    assert_eq!(q, AlgTensor::identity(&sh2, 1));
    // a rank-deficient element is not invertible on the full domain
    let sing = AlgTensor::element(&sh2, vec![Mat::from_dense(2, 2, &[s(1), s(1), s(1), s(1)])]).unwrap();
    assert!(matches!(
        sing.partial_inverse(&AlgTensor::identity(&sh2, 1), None),
        Err(BlockError::NotPartiallyInvertible(_))
    ));
    let _ = sh;
}

#[test]
fn trivial_twist_partial_inverse() {
    // two rank-one idempotents D, P on C²⊗C² with DPD = D and PDP = P
    let sh = shape(vec![2]);
    let d = Mat::unit(4, 4, 0, 0);
    let p = Mat::from_triplets(4, 4, [(0, 0, s(1)), (3, 0, s(1))]);
    let di = AlgTensor::from_blocks(&sh, 2, [(smallvec![0, 0], d)]).unwrap();
    let p = AlgTensor::from_blocks(&sh, 2, [(smallvec![0, 0], p)]).unwrap();
    let e = p.mul(&di).unwrap();
    let (einv, q) = e.partial_inverse(&di, Some(&p)).unwrap();
    assert_eq!(einv, di.mul(&p).unwrap());
    assert_eq!(e.mul(&einv).unwrap(), p);
    assert_eq!(einv.mul(&e).unwrap(), di);
    assert_eq!(q, p);
}

#[test]
fn coproduct_of_group_algebra_dual() {
    let n = 4;
    let delta = fun_zn(n);
    let sh = delta.shape().clone();
    for g in 0..n {
        let img = delta.apply(&AlgTensor::matrix_unit(&sh, g, 0, 0));
        for h in 0..n {
            for k in 0..n {
                let expect = if (h + k) % n == g { s(1) } else { s(0) };
                assert_eq!(img.block_or_zero(&[h, k]).get(0, 0), expect);
            }
        }
        // coassociativity on basis elements
        let l = delta.apply_slot(&img, 0).unwrap();
        let r = delta.apply_slot(&img, 1).unwrap();
        assert_eq!(l, r);
    }
    assert!(delta.check_multiplicative_pairwise().is_none());
    let p3 = delta.apply_slot(&delta.delta_identity(), 0).unwrap();
    assert_eq!(p3, AlgTensor::identity(&sh, 3));
    for key in sh.keys(3) {
        assert_eq!(delta.slot_block(&delta.delta_identity(), 1, &key), Mat::identity(1));
    }
}

#[test]
fn non_homomorphic_table_rejected() {
    let sh = shape(vec![1, 1]);
    // Δ(δ_0) = δ_0⊗δ_0 + δ_0⊗δ_1 but Δ(δ_1) overlaps it
    let t0 = AlgTensor::from_blocks(&sh, 2, [(smallvec![0, 0], Mat::identity(1)), (smallvec![0, 1], Mat::identity(1))]).unwrap();
    let t1 = AlgTensor::from_blocks(&sh, 2, [(smallvec![0, 1], Mat::identity(1))]).unwrap();
    let err = CoproductMap::from_table(&sh, vec![vec![t0], vec![t1]]).unwrap_err();
    assert!(matches!(err, BlockError::NotHomomorphism(_)));
}

#[test]
fn matrix_block_coproduct_factorization() {
    // A = C ⊕ M2 with Δ(x) = x⊗δ_0 + δ_0⊗x on the M2 block
    let sh = shape(vec![1, 2]);
    let mut comps = BTreeMap::new();
    for r in 0..2 {
        let n = sh.dim(r);
        comps.insert((r, 0), vec![Component { target: r, iota: Mat::identity(n), pi: Mat::identity(n) }]);
        if r != 0 {
            comps.insert((0, r), vec![Component { target: r, iota: Mat::identity(n), pi: Mat::identity(n) }]);
        }
    }
    let delta = CoproductMap::from_components(&sh, comps).unwrap();
    assert!(delta.check_multiplicative_pairwise().is_none());
    let again = CoproductMap::from_table(&sh, delta.table().to_vec()).unwrap();
    for r in 0..2 {
        for i in 0..sh.dim(r) {
            for j in 0..sh.dim(r) {
                assert_eq!(again.unit_image(r, i, j), delta.unit_image(r, i, j));
            }
        }
    }
    assert_eq!(delta.multiplicity(1, 0, 1), 1);
}

#[test]
fn text_round_trip() {
    let sh = shape(vec![1, 2]);
    let q = cyc(8, 1).unwrap();
    let a = AlgTensor::element(&sh, vec![Mat::scalar(1, &q), Mat::from_dense(2, 2, &[s(1), q.clone(), s(0), CycScalar::from_ratio(-2, 3).unwrap()])]).unwrap();
    let t = a.outer(&a).unwrap();
    let txt = t.to_text();
    assert_eq!(AlgTensor::from_text(&sh, 2, &txt).unwrap(), t);
    assert!(AlgTensor::from_text(&sh, 2, "block b0 b9\n 1").is_err());
}

#[test]
fn unit_map_inverse_and_anti() {
    let sh = shape(vec![1, 2]);
    let transpose = UnitMap::from_fn(&sh, |r, i, j| AlgTensor::matrix_unit(&sh, r, j, i));
    assert!(transpose.anti_multiplicative_witness().is_none());
    assert!(UnitMap::identity(&sh).anti_multiplicative_witness().is_some());
    let inv = transpose.inverse().unwrap();
    let comp = inv.compose(&transpose);
    for r in 0..2 {
        for i in 0..sh.dim(r) {
            for j in 0..sh.dim(r) {
                assert_eq!(comp.image(r, i, j), &AlgTensor::matrix_unit(&sh, r, i, j));
            }
        }
    }
}

fn arb_element(sh: Arc<BlockShape>) -> impl Strategy<Value = AlgTensor> {
    let total: usize = sh.dims().iter().map(|n| n * n).sum();
    prop::collection::vec((-3i64..4, 0i64..8), total).prop_map(move |vals| {
        let mut it = vals.into_iter();
        let blocks = sh
            .dims()
            .iter()
            .map(|&n| {
                let entries: Vec<CycScalar> =
                    (0..n * n).map(|_| { let (a, k) = it.next().unwrap(); &s(a) * &cyc(8, k).unwrap() }).collect();
                Mat::from_dense(n, n, &entries)
            })
            .collect();
        AlgTensor::element(&sh, blocks).unwrap()
    })
}

fn gram_shape() -> Arc<BlockShape> {
    let r2 = &cyc(8, 1).unwrap() + &cyc(8, -1).unwrap();
    Arc::new(BlockShape::numbered(vec![1, 2], "b").unwrap().with_gram(vec![vec![s(1)], vec![s(1), r2]]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn permute_is_multiplicative(a in arb_element(shape(vec![1, 2])), b in arb_element(shape(vec![1, 2])),
                                 c in arb_element(shape(vec![1, 2])), d in arb_element(shape(vec![1, 2]))) {
        let x = a.outer(&b).unwrap();
        let y = c.outer(&d).unwrap();
        let lhs = x.mul(&y).unwrap().permute_legs(&[1, 0]).unwrap();
        let rhs = x.permute_legs(&[1, 0]).unwrap().mul(&y.permute_legs(&[1, 0]).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(x.permute_legs(&[1, 0]).unwrap().permute_legs(&[1, 0]).unwrap(), x);
    }

    #[test]
    fn adjoint_is_anti_automorphism(a in arb_element(gram_shape()), b in arb_element(gram_shape())) {
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(ab.adjoint(), b.adjoint().mul(&a.adjoint()).unwrap());
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        let x = a.outer(&b).unwrap();
        prop_assert_eq!(x.adjoint(), a.adjoint().outer(&b.adjoint()).unwrap());
    }

    #[test]
    fn partial_inverse_round_trip(a in arb_element(gram_shape())) {
        let sh = a.shape().clone();
        // domain: projection onto the first basis vector of each block
        let p = AlgTensor::element(&sh, sh.dims().iter().map(|&n| Mat::unit(n, n, 0, 0)).collect()).unwrap();
        let t = a.mul(&p).unwrap();
        if let Ok((tinv, q)) = t.partial_inverse(&p, None) {
            prop_assert_eq!(tinv.mul(&t).unwrap(), p.clone());
            prop_assert_eq!(q.mul(&q).unwrap(), q.clone());
            let (back, p2) = tinv.partial_inverse(&q, Some(&p)).unwrap();
            prop_assert_eq!(back, t);
            prop_assert_eq!(p2, p);
        }
    }
}
