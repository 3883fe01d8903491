//! Small reference presentations and seeded random twists used by the test
//! suites and the command line.

use std::sync::Arc;

use rand::Rng;

use crate::blockalg::{AlgTensor, BlockShape, CoproductMap, Key, Mat, UnitMap};
use crate::pointed::{fun_omega, ThreeCocycle};
use crate::quasitri::{drinfeld_element, verify_quasitriangular, verify_ribbon, QuasiTriData};
use crate::scalars::CycScalar;
use crate::wqh::{Antipode, Twist, WqhPresentation};

/// Fun(Z_N) with trivial associator.
pub fn fun_zn(n: usize) -> WqhPresentation {
    fun_omega(&ThreeCocycle::trivial(n)).expect("trivial cocycle")
}

/// Permutations of {0,1,2}; element g sends i to g[i].
fn s3_elements() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]]
}

fn perm_inverse(p: &[usize; 3]) -> [usize; 3] {
    let mut out = [0; 3];
    for (i, &j) in p.iter().enumerate() {
        out[j] = i;
    }
    out
}

fn perm_sign(p: &[usize; 3]) -> i64 {
    let mut inv = 0;
    for i in 0..3 {
        for j in i + 1..3 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Irreducible matrices of g: trivial, sign and the two-dimensional
/// representation on {x : Σx = 0} with orthogonal basis e₀−e₁, e₀+e₁−2e₂.
fn s3_irreps(p: &[usize; 3]) -> [Mat; 3] {
    let basis = [[1i64, -1, 0], [1, 1, -2]];
    let image = |v: &[i64; 3]| {
        let mut out = [0i64; 3];
        for i in 0..3 {
            out[p[i]] += v[i];
        }
        // coordinates a = x₀ + x₂/2, b = −x₂/2
        [
            CycScalar::from_ratio(2 * out[0] + out[2], 2).expect("nonzero denominator"),
            CycScalar::from_ratio(-out[2], 2).expect("nonzero denominator"),
        ]
    };
    let cols: Vec<[CycScalar; 2]> = basis.iter().map(image).collect();
    let std = Mat::from_fn(2, 2, |i, j| cols[j][i].clone());
    [Mat::identity(1), Mat::scalar(1, &CycScalar::from_i64(perm_sign(p))), std]
}

/// The group algebra C[S₃] = C ⊕ C ⊕ M₂ with Δ(g) = g⊗g and S(g) = g⁻¹.
pub fn group_algebra_s3() -> WqhPresentation {
    let shape = Arc::new(BlockShape::new(vec![1, 1, 2], vec!["triv".into(), "sign".into(), "std".into()])
            .and_then(|s| {
                let one = CycScalar::one();
                s.with_gram(vec![vec![one.clone()], vec![one], vec![CycScalar::from_i64(2), CycScalar::from_i64(6)]])
            })
            .expect("valid shape"),
    );
    let elems = s3_elements();
    let reps: Vec<[Mat; 3]> = elems.iter().map(s3_irreps).collect();
    let inv_reps: Vec<[Mat; 3]> = elems.iter().map(|g| s3_irreps(&perm_inverse(g))).collect();
    let order = CycScalar::from_i64(elems.len() as i64);
    // e^ρ_{ij} = (d_ρ/|G|) Σ_g ρ(g⁻¹)_{ji} g
    let coeff = |r: usize, i: usize, j: usize, g: usize| {
        let d = CycScalar::from_i64(shape.dim(r) as i64);
        &(&d * &order.inv().expect("nonzero")) * &inv_reps[g][r].get(j, i)
    };
    let group_element = |g: usize, legs: usize| -> AlgTensor {
        let blocks: Vec<(Key, Mat)> = shape
            .keys(legs)
            .into_iter()
            .map(|k| {
                let m = k.iter().skip(1).fold(reps[g][k[0]].clone(), |acc, &r| acc.kron(&reps[g][r]));
                (k, m)
            })
            .collect();
        AlgTensor::from_blocks(&shape, legs, blocks).expect("valid blocks")
    };
    let table = (0..3)
        .map(|r| {
            let n = shape.dim(r);
            (0..n * n)
                .map(|ij| {
                    let (i, j) = (ij / n, ij % n);
                    (0..elems.len()).fold(AlgTensor::zero(&shape, 2), |acc, g| {
                        acc.add(&group_element(g, 2).scale(&coeff(r, i, j, g))).expect("same legs")
                    })
                })
                .collect()
        })
        .collect();
    let delta = CoproductMap::from_table(&shape, table).expect("group coproduct is multiplicative");
    let map = UnitMap::from_fn(&shape, |r, i, j| {
        (0..elems.len()).fold(AlgTensor::zero(&shape, 1), |acc, g| {
            let ginv = elems.iter().position(|h| *h == perm_inverse(&elems[g])).expect("group closed");
            acc.add(&group_element(ginv, 1).scale(&coeff(r, i, j, g))).expect("same legs")
        })
    });
    let id = AlgTensor::identity(&shape, 1);
    WqhPresentation::with_trivial_associator(delta, 0)
        .expect("counit block")
        .with_antipode(Antipode { map, alpha: id.clone(), beta: id })
        .expect("one-leg α, β")
        .with_star(true)
}

/// Small nonzero integer.
fn small_nonzero(rng: &mut impl Rng) -> CycScalar {
    let v: i64 = rng.gen_range(1..=2);
    CycScalar::from_i64(if rng.gen_bool(0.5) { v } else { -v })
}

/// Random matrix L·D·U with unit triangular L, U and small nonzero diagonal D.
pub fn random_invertible(rng: &mut impl Rng, n: usize, unit_det: bool) -> Mat {
    let lower = Mat::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => CycScalar::one(),
        std::cmp::Ordering::Greater => CycScalar::from_i64(rng.gen_range(-1..=1)),
        std::cmp::Ordering::Less => CycScalar::zero(),
    });
    let upper = Mat::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => CycScalar::one(),
        std::cmp::Ordering::Less => CycScalar::from_i64(rng.gen_range(-1..=1)),
        std::cmp::Ordering::Greater => CycScalar::zero(),
    });
    let diag: Vec<CycScalar> = (0..n).map(|_| if unit_det { CycScalar::one() } else { small_nonzero(rng) }).collect();
    lower.mul(&Mat::diag(&diag)).mul(&upper)
}

/// Random invertible u with ε(u) = 1.
pub fn random_counital_unit(w: &WqhPresentation, rng: &mut impl Rng) -> AlgTensor {
    let blocks = (0..w.shape.len())
        .map(|r| if r == w.counit { Mat::identity(1) } else { random_invertible(rng, w.shape.dim(r), false) })
        .collect();
    AlgTensor::element(&w.shape, blocks).expect("valid blocks")
}

/// The 2-coboundary twist u⊗u·Δ(u⁻¹) with inverse Δ(u)·u⁻¹⊗u⁻¹.
pub fn coboundary_twist(w: &WqhPresentation, u: &AlgTensor) -> Twist {
    let uinv = crate::wqh::invert_element(u).expect("invertible");
    let uu = u.outer(u).expect("two legs");
    let uu_inv = uinv.outer(&uinv).expect("two legs");
    Twist::new(uu.mul(&w.delta.apply(&uinv)).expect("two legs"), w.delta.apply(u).mul(&uu_inv).expect("two legs"))
}

/// A trivial twist E = P with P = Δ(I) + (I−Δ(I))·Y·Δ(I), E⁻¹ = Δ(I); Y vanishes on counit legs.
pub fn random_trivial_twist(w: &WqhPresentation, rng: &mut impl Rng) -> Twist {
    let d = w.p();
    let id = w.identity(2);
    let blocks: Vec<(Key, Mat)> = w
        .shape
        .keys(2)
        .into_iter()
        .filter(|k| k[0] != w.counit && k[1] != w.counit)
        .map(|k| {
            let n = w.shape.tuple_dim(&k);
            let m = Mat::from_fn(n, n, |_, _| CycScalar::from_i64(rng.gen_range(-1..=1)));
            (k, m)
        })
        .collect();
    let y = AlgTensor::from_blocks(&w.shape, 2, blocks).expect("valid blocks");
    let comp = id.sub(&d).expect("two legs");
    let p = d.add(&AlgTensor::product(&[&comp, &y, &d]).expect("two legs")).expect("two legs");
    Twist::new(p, d)
}

/// A random normalized invertible twist: identity on tuples touching the counit block.
pub fn random_invertible_twist(w: &WqhPresentation, rng: &mut impl Rng) -> Twist {
    let blocks: Vec<(Key, Mat)> = w
        .shape
        .keys(2)
        .into_iter()
        .map(|k| {
            let n = w.shape.tuple_dim(&k);
            let m = if k[0] == w.counit || k[1] == w.counit { Mat::identity(n) } else { random_invertible(rng, n, false) };
            (k, m)
        })
        .collect();
    let t = AlgTensor::from_blocks(&w.shape, 2, blocks).expect("valid blocks");
    let tinv = t.map_blocks(|_, m| m.inverse().expect("invertible block"));
    Twist::new(t, tinv)
}

/// Central z with ε(z) = 1 and random nonzero values elsewhere.
pub fn random_central(w: &WqhPresentation, rng: &mut impl Rng) -> AlgTensor {
    let vals: Vec<CycScalar> =
        (0..w.shape.len()).map(|r| if r == w.counit { CycScalar::one() } else { small_nonzero(rng) }).collect();
    AlgTensor::central(&w.shape, &vals)
}

/// Pass/fail of each verified property class, flagged by whether every twist
/// preserves it (`true`) or only 2-cocycle twists do (`false`).
pub fn property_classes(w: &WqhPresentation, q: Option<&QuasiTriData>) -> Vec<(&'static str, bool, bool)> {
    let mut out = vec![("wqb", true, w.verify_wqb().passed()), ("w-bialgebra", false, w.is_w_bialgebra().passed())];
    if w.antipode.is_some() {
        out.push(("antipode", true, w.verify_antipode().is_ok_and(|r| r.passed())));
        out.push(("strong antipode", false, w.strong_antipode().is_ok_and(|s| s.strong().is_some())));
    }
    if let Some(q) = q {
        out.push(("R-matrix", true, verify_quasitriangular(w, q).passed()));
        if q.ribbon_v.is_some() {
            out.push(("ribbon", true, verify_ribbon(w, q).is_ok_and(|r| r.passed())));
        }
        if w.antipode.is_some() {
            out.push(("Drinfeld", false, drinfeld_element(w, q).is_ok_and(|d| d.report.passed())));
        }
    }
    out
}

/// Classes that held before twisting by `tw` and should survive it but fail afterwards.
/// A w-bialgebra must stay one exactly when `tw` is a 2-cocycle.
pub fn lost_classes(w: &WqhPresentation, q: Option<&QuasiTriData>, tw: &Twist) -> Vec<&'static str> {
    let before = property_classes(w, q);
    let Ok(wt) = w.twist(tw) else { return vec!["twist"] };
    let Ok(qt) = q.map(|q| q.twisted(tw)).transpose() else { return vec!["twisted R"] };
    let Ok(cocycle) = w.is_two_cocycle(tw) else { return vec!["2-cocycle test"] };
    let after = property_classes(&wt, qt.as_ref());
    let mut lost: Vec<&'static str> = before
        .iter()
        .zip(&after)
        .filter(|((_, always, b), (_, _, a))| *b && !*a && (*always || cocycle))
        .map(|((name, _, _), _)| *name)
        .collect();
    let wb = |v: &[(&str, bool, bool)]| v.iter().any(|&(n, _, ok)| n == "w-bialgebra" && ok);
    if wb(&before) && wb(&after) != cocycle {
        lost.push("w-bialgebra iff 2-cocycle");
    }
    lost
}

/// Presentations used by the twist robustness suites, with their braidings where known.
pub fn robustness_fixtures() -> Vec<(String, WqhPresentation, Option<QuasiTriData>)> {
    let mut out = Vec::new();
    for n in 2..=4 {
        out.push((format!("Fun(Z_{n})"), fun_zn(n), None));
    }
    out.push(("C[S3]".to_string(), group_algebra_s3(), None));
    for (n, k) in [(2, 1), (3, 1), (4, 2)] {
        let root = crate::scalars::cyc(n as u32, k).expect("positive order");
        let omega = crate::pointed::omega_w(n, &root).expect("root of unity");
        out.push((format!("Fun_ω(Z_{n}), w = ζ_{n}^{k}"), fun_omega(&omega).expect("cocycle"), None));
    }
    for ell in [3, 4] {
        let aw = crate::uqsl2::assemble_aw(ell).expect("A_W assembles");
        out.push((format!("A_W(sl2, ℓ = {ell})"), aw.presentation, Some(aw.quasi)));
    }
    out
}
