use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wqh_core::blockalg::Mat;
use wqh_core::fusion::BasedRing;
use wqh_core::tannaka::{
    choose_structure, cft_pre_associator, reconstruct, reseed, sixj_from_maps, twist_between, Associativity, FunctorData, SixJ,
};
use wqh_core::uqsl2::sl2_functor_data;
use wqh_core::wqh::{units, WqhPresentation};
use wqh_core::CycScalar;

fn same_algebra(a: &WqhPresentation, b: &WqhPresentation) -> bool {
    a.phi == b.phi
        && a.phi_inv == b.phi_inv
        && units(&a.shape).into_iter().all(|(r, i, j)| a.delta.unit_image(r, i, j) == b.delta.unit_image(r, i, j))
}

fn connected(base: &FunctorData, assoc: &Associativity, seed: u64) {
    let other = reseed(base.clone(), seed);
    let w0 = reconstruct(base, assoc, None).unwrap().presentation;
    let w1 = reconstruct(&other, assoc, None).unwrap().presentation;
    assert!(w1.verify_wqb().passed(), "seed {seed}");
    let tw = twist_between(base, &other).unwrap();
    assert!(same_algebra(&w0.twist(&tw).unwrap(), &w1), "seed {seed}");
}

#[test]
fn pointed_seeds_are_twist_equivalent() {
    let ring = BasedRing::pointed(3);
    let base = choose_structure(&ring, &[1, 2, 2], 0).unwrap();
    let assoc = Associativity::Explicit(SixJ::trivial(&base));
    for seed in 1..4 {
        connected(&base, &assoc, seed);
    }
}

#[test]
fn sl2_seeds_are_twist_equivalent() {
    for ell in [3, 4] {
        let (_, base) = sl2_functor_data(ell).unwrap();
        let assoc = Associativity::Explicit(sixj_from_maps(&base).unwrap());
        let w = reconstruct(&base, &assoc, None).unwrap().presentation;
        assert!(w.verify_wqb().passed());
        assert!(w.is_w_bialgebra().passed());
        for seed in [1, 2] {
            connected(&base, &assoc, seed);
        }
    }
}

#[test]
fn sixj_matches_strict_on_equivariant_maps() {
    let (_, fd) = sl2_functor_data(4).unwrap();
    let strict = reconstruct(&fd, &Associativity::Strict, None).unwrap().presentation;
    let explicit = reconstruct(&fd, &Associativity::Explicit(sixj_from_maps(&fd).unwrap()), None).unwrap().presentation;
    assert!(same_algebra(&strict, &explicit));
}

/// A section G′ = G + K·X with K spanning ker F, so F∘G′ = 1 still holds.
fn perturbed_section(fd: &FunctorData, i: usize, j: usize, rng: &mut impl Rng) -> Mat {
    let kernel = fd.f_matrix(i, j).nullspace();
    let iota = &fd.channels(i, j)[0].iota;
    let x = Mat::from_fn(kernel.cols(), iota.cols(), |_, _| CycScalar::from_i64(rng.gen_range(1..=3)));
    iota.add(&kernel.mul(&x))
}

#[test]
fn random_section_breaks_weak_tensor_structure() {
    let (_, fd) = sl2_functor_data(4).unwrap();
    let pre = cft_pre_associator(&fd).unwrap();
    assert!(pre.weak_tensor, "{}", pre.report);
    let w = reconstruct(&fd, &Associativity::Strict, None).unwrap().presentation;
    assert_eq!(pre.phi, w.q3().mul(&w.p3()).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    // V2⊗V1 keeps only V1 at ℓ = 4, so F has a four-dimensional kernel there
    let section = perturbed_section(&fd, 2, 1, &mut rng);
    let bad = fd.with_section(2, 1, 0, section).unwrap();
    let pre = cft_pre_associator(&bad).unwrap();
    assert!(!pre.weak_tensor);
    let triple = pre.failing_triple.expect("a witness triple");
    assert_eq!(triple.len(), 3);
    assert!(triple.iter().any(|l| l == "X2"), "{triple:?}");
}
