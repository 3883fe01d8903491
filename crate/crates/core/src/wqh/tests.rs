use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smallvec::smallvec;

use super::*;
use crate::fixtures::{
    coboundary_twist, fun_zn, group_algebra_s3, random_central, random_counital_unit, random_invertible_twist,
};
use crate::pointed::{antipode_obstruction, fun_omega, omega_w, Obstruction, ThreeCocycle, TwoCochain};
use crate::scalars::cyc;

fn minus_one() -> CycScalar {
    CycScalar::from_i64(-1)
}

fn fun_minus_one() -> WqhPresentation {
    fun_omega(&omega_w(2, &minus_one()).unwrap()).unwrap()
}

/// The trivial one-block algebra C.
fn complex_numbers() -> WqhPresentation {
    let w = fun_zn(1);
    assert_eq!(w.shape.len(), 1);
    w
}

fn assert_all_pass(rep: &Report) {
    assert!(rep.passed(), "{rep}");
}

#[test]
fn fun_z2_passes() {
    let w = fun_zn(2);
    assert_all_pass(&w.verify_wqb());
    assert_all_pass(&w.verify_antipode().unwrap());
    assert_all_pass(&w.is_w_bialgebra());
}

#[test]
fn fun_minus_one_passes_but_is_not_w_bialgebra() {
    let w = fun_minus_one();
    assert_all_pass(&w.verify_wqb());
    assert_all_pass(&w.verify_antipode().unwrap());
    let rep = w.is_w_bialgebra();
    assert_eq!(rep.verdict_of("Φ = Q₃P₃"), Some(Verdict::Fail));
    assert_eq!(rep.verdict_of("P₃Q₃P₃ = P₃"), Some(Verdict::Pass));
}

/// Pentagon oracle for commutative one-dimensional blocks: ω(a,b,cd)ω(ab,c,d) = ω(b,c,d)ω(a,bc,d)ω(a,b,c).
fn pentagon_oracle(n: usize, om: impl Fn(usize, usize, usize) -> CycScalar) -> bool {
    let mut ok = true;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let lhs = &om(a, b, (c + d) % n) * &om((a + b) % n, c, d);
                    let rhs = &(&om(b, c, d) * &om(a, (b + c) % n, d)) * &om(a, b, c);
                    ok &= lhs == rhs;
                }
            }
        }
    }
    ok
}

#[test]
fn corrupted_associator_fails_pentagon() {
    let mut w = fun_minus_one();
    let i = cyc(4, 1).unwrap();
    let key: Key = smallvec![1, 1, 0];
    let changed = w.phi.block_or_zero(&key).scale(&i);
    w.phi = w.phi.map_blocks(|k, m| if *k == key { changed.clone() } else { m.clone() });
    let omega = omega_w(2, &minus_one()).unwrap();
    let oracle = pentagon_oracle(2, |a, b, c| {
        let v = omega.get(a, b, c);
        if (a, b, c) == (1, 1, 0) {
            &v * &i
        } else {
            v
        }
    });
    assert!(!oracle);
    let rep = w.verify_wqb();
    assert_eq!(rep.verdict_of("pentagon"), Some(Verdict::Fail));
    assert!(rep.get("pentagon").unwrap().witness.is_some());
}

#[test]
fn pentagon_matches_oracle_on_all_n2_tables() {
    // ω(1,1,1) ranges over fourth roots of unity; only ±1 are cocycles
    for k in 0..4 {
        let x = cyc(4, k).unwrap();
        let mut w = fun_zn(2);
        let key: Key = smallvec![1, 1, 1];
        w.phi = w.phi.map_blocks(|kk, m| if *kk == key { Mat::scalar(1, &x) } else { m.clone() });
        let oracle = pentagon_oracle(2, |a, b, c| if (a, b, c) == (1, 1, 1) { x.clone() } else { CycScalar::one() });
        assert_eq!(w.pentagon_residual().is_none(), oracle, "k={k}");
    }
}

#[test]
fn one_block_algebra_antipode() {
    let w = complex_numbers();
    assert_all_pass(&w.verify_antipode().unwrap());
}

#[test]
fn replacing_alpha_breaks_antip2() {
    let mut w = fun_minus_one();
    w.antipode.as_mut().unwrap().alpha = w.identity(1);
    let rep = w.verify_antipode().unwrap();
    assert_eq!(rep.verdict_of("xβS(y)αz = I"), Some(Verdict::Fail));
    // direct evaluation: Σ_g ω(g,g⁻¹,g)δ_g = δ₀ − δ₁ ≠ I
    let x = w.antipode.as_ref().unwrap().map.apply_leg(&w.phi, 1).contract(&[&w.identity(1), &w.identity(1)]);
    assert_eq!(x.block_or_zero(&[1]).get(0, 0), minus_one());
}

#[test]
fn missing_antipode_is_an_error() {
    let mut w = fun_zn(2);
    w.antipode = None;
    assert_eq!(w.verify_antipode().unwrap_err(), WqhError::NoAntipode);
}

#[test]
fn strong_antipode_of_hopf_algebra_is_s() {
    for n in 1..=4 {
        let w = fun_zn(n);
        let s = w.strong_antipode().unwrap();
        let strong = s.strong().expect("Hopf algebra has a strong antipode");
        for (r, i, j) in units(&w.shape) {
            assert_eq!(strong.map.image(r, i, j), w.antipode.as_ref().unwrap().map.image(r, i, j));
        }
    }
}

#[test]
fn strong_antipode_iff_trivial_w() {
    for n in 2..=4 {
        for (k, root) in crate::pointed::roots_of_unity(n).into_iter().enumerate() {
            let w = fun_omega(&omega_w(n, &root).unwrap()).unwrap();
            assert_eq!(w.strong_antipode().unwrap().strong().is_some(), k == 0, "N={n} k={k}");
        }
    }
}

#[test]
fn trivial_twist_is_identity_deformation() {
    for w in [fun_minus_one(), group_algebra_s3()] {
        let tw = w.twist(&Twist::trivial(&w)).unwrap();
        assert_eq!(tw.delta.table(), w.delta.table());
        assert_eq!(tw.phi, w.phi);
        assert_eq!(tw.phi_inv, w.phi_inv);
        let (a, b) = (tw.antipode.unwrap(), w.antipode.clone().unwrap());
        assert_eq!((a.alpha, a.beta), (b.alpha, b.beta));
    }
}

#[test]
fn cochain_twist_gives_twisted_cocycle() {
    let omega = omega_w(4, &cyc(4, 1).unwrap()).unwrap();
    let mu: Vec<CycScalar> = (0..4).map(|g| cyc(8, g as i64 * 3).unwrap()).collect();
    let mut vals: Vec<CycScalar> = (0..16).map(|_| CycScalar::one()).collect();
    let f0 = TwoCochain::coboundary(&mu).unwrap();
    for g in 1..4 {
        for h in 1..4 {
            vals[g * 4 + h] = &f0.get(g, h) * &cyc(4, (g * h) as i64).unwrap();
        }
    }
    let f = TwoCochain::new(4, vals).unwrap();
    let w = fun_omega(&omega).unwrap();
    let tw = w.twist(&f.to_twist(&w)).unwrap();
    let expected = omega.twisted(&f);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                assert_eq!(tw.phi.block_or_zero(&[a, b, c]).get(0, 0), expected.get(a, b, c));
            }
        }
    }
    assert_all_pass(&tw.verify_wqb());
    assert_all_pass(&tw.verify_antipode().unwrap());
}

#[test]
fn coboundary_twist_conjugates_coproduct() {
    let w = group_algebra_s3();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = random_counital_unit(&w, &mut rng);
    let uinv = invert_element(&u).unwrap();
    let tw = w.twist(&coboundary_twist(&w, &u)).unwrap();
    let uu = u.outer(&u).unwrap();
    let uu_inv = uinv.outer(&uinv).unwrap();
    for (r, i, j) in units(&w.shape) {
        let a = w.unit(r, i, j);
        let conj = AlgTensor::product(&[&uinv, &a, &u]).unwrap();
        let expected = AlgTensor::product(&[&uu, &w.delta.apply(&conj), &uu_inv]).unwrap();
        assert_eq!(tw.delta.apply(&a), expected);
    }
    assert_all_pass(&tw.verify_wqb());
    assert_all_pass(&tw.verify_antipode().unwrap());
    assert_all_pass(&tw.is_w_bialgebra());
}

#[test]
fn twist_validation() {
    let w = fun_zn(2);
    let mut bad = Twist::trivial(&w);
    bad.t = bad.t.scale(&CycScalar::from_i64(2));
    assert!(matches!(w.twist(&bad), Err(WqhError::InvalidTwist(_))));
    let derived = Twist::from_element(&w, w.p()).unwrap();
    assert_eq!(derived, Twist::trivial(&w));
}

#[test]
fn group_algebra_passes_everything() {
    let w = group_algebra_s3();
    assert!(w.delta.check_multiplicative_pairwise().is_none());
    assert_all_pass(&w.verify_wqb());
    assert_all_pass(&w.verify_antipode().unwrap());
    assert_all_pass(&w.is_w_bialgebra());
    assert!(w.hopf_degeneracy_check().unwrap());
}

#[test]
fn bialgebras_are_w_bialgebras() {
    for w in [fun_zn(3), group_algebra_s3()] {
        assert_all_pass(&w.is_w_bialgebra());
    }
}

#[test]
fn two_cocycle_examples() {
    let w = group_algebra_s3();
    assert!(w.is_two_cocycle(&Twist::trivial(&w)).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let z = random_central(&w, &mut rng);
    // Θ_z = z⁻¹⊗z⁻¹·Δ(z)
    let theta = coboundary_twist(&w, &invert_element(&z).unwrap());
    assert!(w.is_two_cocycle(&theta).unwrap());
    assert_all_pass(&w.twist(&theta).unwrap().is_w_bialgebra());
}

#[test]
fn two_cocycle_iff_twisted_w_bialgebra() {
    let w = group_algebra_s3();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = [false; 2];
    for round in 0..6 {
        let f = if round % 2 == 0 {
            coboundary_twist(&w, &random_counital_unit(&w, &mut rng))
        } else {
            random_invertible_twist(&w, &mut rng)
        };
        let cocycle = w.is_two_cocycle(&f).unwrap();
        let twisted = w.twist(&f).unwrap();
        assert_eq!(cocycle, twisted.is_w_bialgebra().passed(), "round {round}");
        assert_all_pass(&twisted.verify_wqb());
        seen[cocycle as usize] = true;
    }
    assert!(seen[0] && seen[1], "both outcomes exercised");
}

#[test]
fn three_coboundary_examples() {
    let w = fun_zn(3);
    assert!(w.is_three_coboundary(&Twist::trivial(&w)).unwrap());
    let s3 = group_algebra_s3();
    assert!(s3.is_three_coboundary(&Twist::trivial(&s3)).unwrap());
    // exhaustive over normalized ±1 cochains on Z₂: only F(1,1) is free
    let wm = fun_minus_one();
    for sign in [1, -1] {
        let f = TwoCochain::new(2, vec![1, 1, 1, sign].into_iter().map(CycScalar::from_i64).collect()).unwrap();
        assert!(!wm.is_three_coboundary(&f.to_twist(&wm)).unwrap());
    }
}

#[test]
fn coboundary_associator_of_cochain_twist() {
    // Φ_F on the twisted algebra is the 3-coboundary of F⁻¹
    let w = fun_zn(3);
    let mu = vec![CycScalar::one(), cyc(3, 1).unwrap(), cyc(3, 1).unwrap()];
    let f0 = TwoCochain::coboundary(&mu).unwrap();
    let mut v: Vec<CycScalar> = (0..9).map(|i| f0.get(i / 3, i % 3)).collect();
    v[4] = &v[4] * &cyc(6, 1).unwrap();
    let f = TwoCochain::new(3, v).unwrap().to_twist(&w);
    let tw = w.twist(&f).unwrap();
    let back = Twist::new(f.tinv.clone(), f.t.clone());
    assert!(tw.is_three_coboundary(&back).unwrap());
}

#[test]
fn f_element_trivial_cases() {
    for w in [fun_zn(3), group_algebra_s3()] {
        let fe = w.f_element().unwrap();
        assert_eq!(fe.f, w.identity(2));
        assert_eq!(fe.finv, w.identity(2));
        assert_all_pass(&fe.report);
    }
}

#[test]
fn f_element_after_twists() {
    let s3 = group_algebra_s3();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // a generic twist breaks β = α⁻¹; coboundary twists keep the antipode strong
    let generic = s3.twist(&random_invertible_twist(&s3, &mut rng)).unwrap();
    assert!(generic.f_element().is_err());
    let u = random_counital_unit(&s3, &mut rng);
    let tw = s3.twist(&coboundary_twist(&s3, &u)).unwrap();
    let fe = tw.f_element().unwrap();
    assert_all_pass(&fe.report);

    let omega = omega_w(3, &cyc(3, 1).unwrap()).unwrap();
    let w = fun_omega(&omega).unwrap();
    let Obstruction::Solved(f) = antipode_obstruction(&omega) else { panic!("odd order") };
    let tw = w.twist(&f.to_twist(&w)).unwrap();
    let fe = tw.f_element().unwrap();
    assert_all_pass(&fe.report);
}

#[test]
fn f_element_requires_strong_antipode() {
    assert!(matches!(fun_minus_one().f_element(), Err(WqhError::NoStrongAntipode(_))));
}

#[test]
fn hopf_degeneracy() {
    assert!(fun_zn(2).hopf_degeneracy_check().unwrap());
    assert!(fun_zn(3).hopf_degeneracy_check().unwrap());
}

#[test]
fn non_unital_coassociative_fails_precondition() {
    // Δ(δ_g) = δ_g⊗δ_g on two points: coassociative, Δ(I) ≠ I⊗I
    let shape = Arc::new(BlockShape::numbered(vec![1, 1], "g").unwrap());
    let table = (0..2)
        .map(|g| vec![AlgTensor::from_blocks(&shape, 2, [(smallvec![g, g], Mat::identity(1))]).unwrap()])
        .collect();
    let delta = CoproductMap::from_table(&shape, table).unwrap();
    let w = WqhPresentation::with_trivial_associator(delta, 0)
        .unwrap()
        .with_antipode(Antipode { map: UnitMap::identity(&shape), alpha: AlgTensor::identity(&shape, 1), beta: AlgTensor::identity(&shape, 1) })
        .unwrap();
    assert!(matches!(w.hopf_degeneracy_check(), Err(WqhError::Precondition(_))));
}

#[test]
fn text_round_trip() {
    for w in [fun_minus_one(), group_algebra_s3()] {
        let text = w.to_text();
        let back = WqhPresentation::from_text(&text).unwrap();
        assert_eq!(back.delta.table(), w.delta.table());
        assert_eq!(back.phi, w.phi);
        assert_eq!(back.counit, w.counit);
        assert_eq!(back.star, w.star);
        assert_eq!(back.antipode.as_ref().unwrap().alpha, w.antipode.as_ref().unwrap().alpha);
        assert_eq!(back.to_text(), text);
    }
}

#[test]
fn malformed_text_rejected() {
    assert!(WqhPresentation::from_text("[shape]\nlabels: a\ndims: 2\ncounit: a\n[phi]\n[phi_inv]\n").is_err());
    assert!(WqhPresentation::from_text("[phi]\n").is_err());
}

#[test]
fn counit_is_antipode_invariant() {
    let w = group_algebra_s3();
    let rep = w.verify_antipode().unwrap();
    assert_eq!(rep.verdict_of("ε∘S = ε"), Some(Verdict::Pass));
    let rep = w.verify_wqb();
    assert_eq!(rep.verdict_of("ε(a*) = conj ε(a)"), Some(Verdict::Pass));
}

#[test]
fn w_bialgebra_associator_passes_wqb() {
    let s3 = group_algebra_s3();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let tw = s3.twist(&coboundary_twist(&s3, &random_counital_unit(&s3, &mut rng))).unwrap();
    let mut rebuilt = tw.clone();
    rebuilt.phi = tw.q3().mul(&tw.p3()).unwrap();
    rebuilt.phi_inv = tw.p3().mul(&tw.q3()).unwrap();
    assert_all_pass(&rebuilt.verify_wqb());
}

#[test]
fn trivial_cocycle_presentations() {
    let w = fun_omega(&ThreeCocycle::trivial(4)).unwrap();
    assert_eq!(w.phi, w.p3());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn twist_composition(seed in any::<u64>()) {
        let w = group_algebra_s3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_invertible_twist(&w, &mut rng);
        let once = w.twist(&f).unwrap();
        let g = coboundary_twist(&once, &random_counital_unit(&once, &mut rng));
        let twice = once.twist(&g).unwrap();
        let direct = w.twist(&f.then(&g).unwrap()).unwrap();
        prop_assert_eq!(twice.delta.table(), direct.delta.table());
        prop_assert_eq!(&twice.phi, &direct.phi);
        prop_assert_eq!(&twice.phi_inv, &direct.phi_inv);
        let (a, b) = (twice.antipode.unwrap(), direct.antipode.unwrap());
        prop_assert_eq!(a.alpha, b.alpha);
        prop_assert_eq!(a.beta, b.beta);
    }

    #[test]
    fn random_twists_preserve_wqb(seed in any::<u64>()) {
        let w = group_algebra_s3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tw = w.twist(&random_invertible_twist(&w, &mut rng)).unwrap();
        prop_assert!(tw.verify_wqb().passed());
        prop_assert!(tw.verify_antipode().unwrap().passed());
    }
}
