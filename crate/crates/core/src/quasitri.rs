//! Quasitriangular structures: R-matrices, ribbon and coboundary data,
//! Ω-involutions, positivity certificates and the spectral square-root twist.

mod numeric;

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

pub use numeric::{gram_sqrt, to_cmat, CMat, NumTensor};

use crate::blockalg::{AlgTensor, BlockError, BlockShape, Key, Mat, Witness};
use crate::report::{Report, Verdict};
use crate::scalars::{Certified, CycScalar};
use crate::textfmt::Section;
use crate::wqh::{invert_element, unit_residual, units, StrongAntipode, Twist, WqhError, WqhPresentation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuasiError {
    #[error(transparent)]
    Wqh(#[from] WqhError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error("missing structure: {0}")]
    Missing(&'static str),
    #[error("no strong antipode: {0}")]
    NoStrongAntipode(String),
    #[error("R̄ is not selfadjoint: {0}")]
    NotSelfadjoint(Witness),
    #[error("spectral split not certified on block ({0})")]
    Uncertified(String),
}

/// R-matrix with optional ribbon element v, its square root w and an Ω-involution.
#[derive(Debug, Clone)]
pub struct QuasiTriData {
    pub r: AlgTensor,
    pub rinv: AlgTensor,
    pub ribbon_v: Option<AlgTensor>,
    pub ribbon_sqrt_w: Option<AlgTensor>,
    pub omega: Option<(AlgTensor, AlgTensor)>,
}

/// The Drinfeld element with its inverse and the relations it was checked against.
#[derive(Debug, Clone)]
pub struct DrinfeldElement {
    pub u: AlgTensor,
    pub uinv: AlgTensor,
    pub report: Report,
}

/// R̄ = RΘ_w with its inverse.
#[derive(Debug, Clone)]
pub struct Coboundary {
    pub rbar: AlgTensor,
    pub rbar_inv: AlgTensor,
    pub report: Report,
}

/// Per-tuple positivity certificates.
#[derive(Debug, Clone)]
pub struct Positivity {
    pub verdict: Certified,
    pub blocks: Vec<(Key, Certified)>,
}

/// The spectral square-root twist T = R̄^{1/2} with spectral projections.
#[derive(Debug, Clone)]
pub struct DkTwist {
    pub t: NumTensor,
    pub tinv: NumTensor,
    pub pos_proj: NumTensor,
    pub neg_proj: NumTensor,
    pub trivial_pairs: BTreeSet<(usize, usize)>,
    pub report: Report,
}

fn flip(a: &AlgTensor) -> AlgTensor {
    a.permute_legs(&[1, 0]).expect("two legs")
}

fn prod(factors: &[&AlgTensor]) -> AlgTensor {
    AlgTensor::product(factors).expect("matching legs")
}

/// True when every block is a scalar multiple of the identity.
pub fn is_central(a: &AlgTensor) -> bool {
    let shape = a.shape();
    (0..shape.len()).all(|r| {
        let b = a.block_or_zero(&[r]);
        b == Mat::scalar(shape.dim(r), &b.get(0, 0))
    })
}

impl QuasiTriData {
    pub fn new(r: AlgTensor, rinv: AlgTensor) -> QuasiTriData {
        QuasiTriData { r, rinv, ribbon_v: None, ribbon_sqrt_w: None, omega: None }
    }

    /// R with R⁻¹ the partial inverse from Δ^op(I) onto Δ(I).
    pub fn from_r(w: &WqhPresentation, r: AlgTensor) -> Result<QuasiTriData, QuasiError> {
        let p = w.p();
        let (rinv, _) = r.partial_inverse(&p, Some(&flip(&p)))?;
        Ok(QuasiTriData::new(r, rinv))
    }

    pub fn with_ribbon(mut self, v: AlgTensor, sqrt_w: Option<AlgTensor>) -> QuasiTriData {
        self.ribbon_v = Some(v);
        self.ribbon_sqrt_w = sqrt_w;
        self
    }

    pub fn with_omega(mut self, omega: AlgTensor, omega_inv: AlgTensor) -> QuasiTriData {
        self.omega = Some((omega, omega_inv));
        self
    }

    /// The R-matrix R₂₁⁻¹ with ribbon data v⁻¹, w⁻¹.
    pub fn opposite(&self) -> QuasiTriData {
        let inv = |x: &Option<AlgTensor>| x.as_ref().and_then(invert_element);
        QuasiTriData {
            r: flip(&self.rinv),
            rinv: flip(&self.r),
            ribbon_v: inv(&self.ribbon_v),
            ribbon_sqrt_w: inv(&self.ribbon_sqrt_w),
            omega: None,
        }
    }

    /// R_T = T₂₁RT⁻¹ and Ω_T = (T⁻¹)*ΩT⁻¹ for the twisted presentation.
    pub fn twisted(&self, tw: &Twist) -> Result<QuasiTriData, QuasiError> {
        let r = AlgTensor::product(&[&flip(&tw.t), &self.r, &tw.tinv])?;
        let rinv = AlgTensor::product(&[&tw.t, &self.rinv, &flip(&tw.tinv)])?;
        let omega = match &self.omega {
            Some((o, oinv)) => Some((
                AlgTensor::product(&[&tw.tinv.adjoint(), o, &tw.tinv])?,
                AlgTensor::product(&[&tw.t, oinv, &tw.t.adjoint()])?,
            )),
            None => None,
        };
        Ok(QuasiTriData { r, rinv, ribbon_v: self.ribbon_v.clone(), ribbon_sqrt_w: self.ribbon_sqrt_w.clone(), omega })
    }

    /// `[r]`, `[rinv]`, `[v]`, `[w]`, `[omega]`, `[omega_inv]` sections.
    pub fn to_sections(&self) -> Vec<Section> {
        let mut out = vec![Section::new("r", &[], self.r.to_text()), Section::new("rinv", &[], self.rinv.to_text())];
        if let Some(v) = &self.ribbon_v {
            out.push(Section::new("v", &[], v.to_text()));
        }
        if let Some(w) = &self.ribbon_sqrt_w {
            out.push(Section::new("w", &[], w.to_text()));
        }
        if let Some((o, oinv)) = &self.omega {
            out.push(Section::new("omega", &[], o.to_text()));
            out.push(Section::new("omega_inv", &[], oinv.to_text()));
        }
        out
    }

    /// Reads the sections written by [`QuasiTriData::to_sections`]; `None` without `[r]`.
    pub fn from_sections(shape: &Arc<BlockShape>, secs: &[Section]) -> Result<Option<QuasiTriData>, QuasiError> {
        let find = |name: &str, legs: usize| -> Result<Option<AlgTensor>, QuasiError> {
            match secs.iter().find(|s| s.name == name) {
                Some(s) => Ok(Some(AlgTensor::from_text(shape, legs, &s.body)?)),
                None => Ok(None),
            }
        };
        let Some(r) = find("r", 2)? else { return Ok(None) };
        let rinv = find("rinv", 2)?.ok_or(QuasiError::Missing("[rinv] section"))?;
        let mut q = QuasiTriData::new(r, rinv);
        q.ribbon_v = find("v", 1)?;
        q.ribbon_sqrt_w = find("w", 1)?;
        if let Some(o) = find("omega", 2)? {
            let oinv = find("omega_inv", 2)?.ok_or(QuasiError::Missing("[omega_inv] section"))?;
            q.omega = Some((o, oinv));
        }
        Ok(Some(q))
    }
}

/// Φ = Q₃P₃ and Φ⁻¹ = P₃Q₃: the associator of a w-bialgebra.
pub fn has_canonical_associator(w: &WqhPresentation) -> bool {
    let (p3, q3) = (w.p3(), w.q3());
    prod(&[&q3, &p3]) == w.phi && prod(&[&p3, &q3]) == w.phi_inv
}

/// The R-matrix axioms, the Yang–Baxter form and, for w-bialgebras, the simplified relations.
pub fn verify_quasitriangular(w: &WqhPresentation, q: &QuasiTriData) -> Report {
    let mut rep = Report::new("quasitriangular structure");
    let p = w.p();
    let pop = flip(&p);
    let (r, rinv) = (&q.r, &q.rinv);
    rep.equality("R⁻¹R = Δ(I)", prod(&[rinv, r]).residual(&p));
    rep.equality("RR⁻¹ = Δ^op(I)", prod(&[r, rinv]).residual(&pop));
    rep.equality("R = Δ^op(I)RΔ(I)", prod(&[&pop, r, &p]).residual(r));
    let inter = unit_residual(&w.shape, |b, i, j| {
        let a = w.unit(b, i, j);
        Ok((w.delta.apply_op(&a), AlgTensor::product(&[r, &w.delta.apply(&a), rinv])?))
    });
    rep.equality("Δ^op(a) = RΔ(a)R⁻¹", inter.expect("two legs"));

    let id = w.identity(1);
    let perm = |t: &AlgTensor, p: &[usize]| t.permute_legs(p).expect("three legs");
    let r12 = r.outer(&id).expect("legs");
    let r23 = id.outer(r).expect("legs");
    let r13 = perm(&r12, &[0, 2, 1]);
    let rinv12 = rinv.outer(&id).expect("legs");
    let (phi, phi_inv) = (&w.phi, &w.phi_inv);
    let delta_r = w.delta.apply_slot(r, 0).expect("two legs");
    let r_delta = w.delta.apply_slot(r, 1).expect("two legs");
    let hex3 = delta_r.residual(&prod(&[&perm(phi, &[2, 0, 1]), &r13, &perm(phi_inv, &[0, 2, 1]), &r23, phi]));
    let hex4 = r_delta.residual(&prod(&[&perm(phi_inv, &[1, 2, 0]), &r13, &perm(phi, &[1, 0, 2]), &r12, phi_inv]));
    let (ok3, ok4) = (hex3.is_none(), hex4.is_none());
    rep.equality("Δ⊗1(R) = Φ₃₁₂R₁₃Φ⁻¹₁₃₂R₂₃Φ", hex3);
    rep.equality("1⊗Δ(R) = Φ⁻¹₂₃₁R₁₃Φ₂₁₃R₁₂Φ⁻¹", hex4);
    let delta_rinv = w.delta.apply_slot(rinv, 0).expect("two legs");
    let yb = prod(&[&r23, &r_delta, phi, &delta_rinv, &rinv12]);
    rep.equality("Yang–Baxter form Φ⁻¹₃₂₁ = I⊗R·1⊗Δ(R)·Φ·Δ⊗1(R⁻¹)·R⁻¹⊗I", yb.residual(&perm(phi_inv, &[2, 1, 0])));

    let e = w.counit;
    rep.equality("ε⊗1(R) = I", r.eval_leg(0, e).expect("counit block").residual(&id));
    rep.equality("1⊗ε(R) = I", r.eval_leg(1, e).expect("counit block").residual(&id));

    if has_canonical_associator(w) {
        let s5 = delta_r.residual(&prod(&[&perm(phi, &[2, 0, 1]), &r13, &r23, phi]));
        let s6 = r_delta.residual(&prod(&[&perm(phi_inv, &[1, 2, 0]), &r13, &r12, phi_inv]));
        let agree = s5.is_none() == ok3 && s6.is_none() == ok4;
        rep.equality("w-bialgebra form Δ⊗1(R) = Φ₃₁₂R₁₃R₂₃Φ", s5);
        rep.equality("w-bialgebra form 1⊗Δ(R) = Φ⁻¹₂₃₁R₁₃R₁₂Φ⁻¹", s6);
        rep.flag("simplified forms agree with the general ones", agree, None);
    } else {
        rep.push("w-bialgebra forms", Verdict::Skipped, Some("associator is not Q₃P₃".into()));
    }
    rep
}

/// Centrality, normalization and R₂₁R = v⊗vΔ(v⁻¹); the square root w when present.
pub fn verify_ribbon(w: &WqhPresentation, q: &QuasiTriData) -> Result<Report, QuasiError> {
    let v = q.ribbon_v.as_ref().ok_or(QuasiError::Missing("ribbon element v"))?;
    let mut rep = Report::new("ribbon element");
    rep.flag("v central", is_central(v), None);
    rep.flag("ε(v) = 1", w.counit_of(v).is_one(), None);
    match &w.antipode {
        Some(ap) => rep.equality("S(v) = v", ap.map.apply(v).residual(v)),
        None => rep.push("S(v) = v", Verdict::Skipped, Some("no antipode".into())),
    };
    let Some(vinv) = invert_element(v) else {
        rep.flag("v invertible", false, None);
        return Ok(rep);
    };
    let rhs = prod(&[&v.outer(v)?, &w.delta.apply(&vinv)]);
    rep.equality("R₂₁R = v⊗vΔ(v⁻¹)", prod(&[&flip(&q.r), &q.r]).residual(&rhs));
    if let Some(sw) = &q.ribbon_sqrt_w {
        rep.flag("w central", is_central(sw), None);
        rep.equality("w² = v", sw.mul(sw)?.residual(v));
        rep.flag("ε(w) = 1", w.counit_of(sw).is_one(), None);
        if let Some(ap) = &w.antipode {
            rep.equality("S(w) = w", ap.map.apply(sw).residual(sw));
        }
    }
    Ok(rep)
}

/// u = ΣS(t_i)r_i for the strong antipode, with S² = Ad(u) and the related identities.
pub fn drinfeld_element(w: &WqhPresentation, q: &QuasiTriData) -> Result<DrinfeldElement, QuasiError> {
    let strong = match w.strong_antipode()? {
        StrongAntipode::Strong(a) => a,
        StrongAntipode::NotStrong { reason, .. } => return Err(QuasiError::NoStrongAntipode(reason)),
    };
    let s = &strong.map;
    let sinv = s.inverse().ok_or(QuasiError::NoStrongAntipode("S is not bijective".into()))?;
    let id = w.identity(1);
    let u = flip(&s.apply_leg(&q.r, 1)).contract(&[&id]);
    let uinv = flip(&sinv.apply_leg(&q.rinv, 1)).contract(&[&id]);
    let mut rep = Report::new("Drinfeld element");
    rep.equality("u·ΣS⁻¹(t̄_j)r̄_j = I", u.mul(&uinv)?.residual(&id));
    rep.equality("ΣS⁻¹(t̄_j)r̄_j·u = I", uinv.mul(&u)?.residual(&id));
    let inner = unit_residual(&w.shape, |b, i, j| {
        let x = w.unit(b, i, j);
        Ok((s.apply(s.image(b, i, j)), AlgTensor::product(&[&u, &x, &uinv])?))
    })?;
    rep.equality("S²(x) = uxu⁻¹", inner);
    let su = s.apply(&u);
    if let Some(v) = &q.ribbon_v {
        rep.equality("v² = uS(u)", v.mul(v)?.residual(&u.mul(&su)?));
    }
    match w.f_element() {
        Ok(f) => {
            let ss = |t: &AlgTensor| s.apply_leg(&s.apply_leg(t, 0), 1);
            let f21 = flip(&f.f);
            rep.equality("S⊗S(R) = f₂₁Rf⁻¹", ss(&q.r).residual(&prod(&[&f21, &q.r, &f.finv])));
            if let Some(vinv) = q.ribbon_v.as_ref().and_then(invert_element) {
                let pivot = u.mul(&vinv)?;
                let rhs = prod(&[&f.finv, &ss(&f21), &pivot.outer(&pivot)?]);
                rep.equality("Δ(uv⁻¹) = f⁻¹·S⊗S(f₂₁)·uv⁻¹⊗uv⁻¹", w.delta.apply(&pivot).residual(&rhs));
            }
        }
        Err(e) => {
            rep.push("S⊗S(R) = f₂₁Rf⁻¹", Verdict::Skipped, Some(e.to_string()));
        }
    }
    Ok(DrinfeldElement { u, uinv, report: rep })
}

/// Θ_z = z⁻¹⊗z⁻¹Δ(z) and its inverse for central invertible z.
pub fn theta(w: &WqhPresentation, z: &AlgTensor) -> Result<(AlgTensor, AlgTensor), QuasiError> {
    let zinv = invert_element(z).ok_or(QuasiError::Missing("invertible central element"))?;
    let t = zinv.outer(&zinv)?.mul(&w.delta.apply(z))?;
    let tinv = z.outer(z)?.mul(&w.delta.apply(&zinv))?;
    Ok((t, tinv))
}

/// R̄ = RΘ_w with the check R̄₂₁R̄ = Δ(I).
pub fn coboundary(w: &WqhPresentation, q: &QuasiTriData) -> Result<Coboundary, QuasiError> {
    let sw = q.ribbon_sqrt_w.as_ref().ok_or(QuasiError::Missing("square root w of the ribbon element"))?;
    let (th, thinv) = theta(w, sw)?;
    let rbar = q.r.mul(&th)?;
    let rbar_inv = thinv.mul(&q.rinv)?;
    let mut rep = Report::new("coboundary matrix");
    rep.equality("R̄₂₁R̄ = Δ(I)", flip(&rbar).mul(&rbar)?.residual(&w.p()));
    Ok(Coboundary { rbar, rbar_inv, report: rep })
}

/// The axioms of an Ω-involution.
pub fn verify_omega_involution(w: &WqhPresentation, omega: &AlgTensor, omega_inv: &AlgTensor) -> Result<Report, QuasiError> {
    if !w.star {
        return Err(QuasiError::Missing("star structure"));
    }
    let mut rep = Report::new("Ω-involution");
    let p = w.p();
    rep.equality("Ω* = Ω", omega.adjoint().residual(omega));
    rep.equality("Ω⁻¹Ω = Δ(I)", omega_inv.mul(omega)?.residual(&p));
    rep.equality("ΩΩ⁻¹ = Δ(I)*", omega.mul(omega_inv)?.residual(&p.adjoint()));
    let inter = unit_residual(&w.shape, |b, i, j| {
        let a = w.unit(b, i, j);
        Ok((w.delta.apply(&a.adjoint()), AlgTensor::product(&[omega_inv, &w.delta.apply(&a).adjoint(), omega])?))
    })?;
    rep.equality("Δ(a*) = Ω⁻¹Δ(a)*Ω", inter);
    let id = w.identity(1);
    rep.equality("ε⊗1(Ω) = I", omega.eval_leg(0, w.counit)?.residual(&id));
    rep.equality("1⊗ε(Ω) = I", omega.eval_leg(1, w.counit)?.residual(&id));
    let rhs = AlgTensor::product(&[
        &id.outer(omega)?,
        &w.delta.apply_slot(omega, 1)?,
        &w.phi,
        &w.delta.apply_slot(omega_inv, 0)?,
        &omega_inv.outer(&id)?,
    ])?;
    rep.equality("(Φ*)⁻¹ = I⊗Ω·1⊗Δ(Ω)·Φ·Δ⊗1(Ω⁻¹)·Ω⁻¹⊗I", w.phi_inv.adjoint().residual(&rhs));
    Ok(rep)
}

fn unitary_residual(a: &AlgTensor) -> Option<Witness> {
    let id = AlgTensor::identity(a.shape(), 1);
    a.adjoint().mul(a).expect("one leg").residual(&id).or_else(|| a.mul(&a.adjoint()).expect("one leg").residual(&id))
}

/// Hermitian coboundary axioms and the four compatibility conditions.
pub fn hermitian_coboundary_check(w: &WqhPresentation, q: &QuasiTriData) -> Result<Report, QuasiError> {
    if !w.star {
        return Err(QuasiError::Missing("star structure"));
    }
    let v = q.ribbon_v.as_ref().ok_or(QuasiError::Missing("ribbon element v"))?;
    let sw = q.ribbon_sqrt_w.as_ref().ok_or(QuasiError::Missing("square root w of the ribbon element"))?;
    let cob = coboundary(w, q)?;
    let mut rep = Report::new("Hermitian coboundary structure");
    rep.equality("v unitary", unitary_residual(v));
    rep.equality("w unitary", unitary_residual(sw));
    let p = w.p();
    let pstar = p.adjoint();
    let pop = flip(&p);
    let e = pstar.mul(&pop)?;
    let einv = pop.mul(&pstar)?;
    rep.equality("E⁻¹E = Δ^op(I)", einv.mul(&e)?.residual(&pop));
    rep.equality("EE⁻¹ = Δ(I)*", e.mul(&einv)?.residual(&pstar));
    let adj = unit_residual(&w.shape, |b, i, j| {
        let a = w.unit(b, i, j);
        Ok((w.delta.apply(&a.adjoint()).adjoint(), AlgTensor::product(&[&e, &w.delta.apply_op(&a), &einv])?))
    })?;
    rep.equality("Δ(a*)* = EΔ^op(a)E⁻¹", adj);
    let r_adj_inv = q.rinv.adjoint();
    rep.equality("(R*)⁻¹ = E₂₁R₂₁E⁻¹", r_adj_inv.residual(&prod(&[&flip(&e), &flip(&q.r), &einv])));
    let c1 = e.residual(&pstar).or_else(|| e.residual(&pop));
    rep.equality("compatibility: E = Δ(I)* = Δ^op(I)", c1);
    let c2 = unit_residual(&w.shape, |b, i, j| {
        let a = w.unit(b, i, j);
        Ok((w.delta.apply(&a).adjoint(), w.delta.apply_op(&a.adjoint())))
    })?;
    rep.equality("compatibility: Δ(a)* = Δ^op(a*)", c2);
    let omega = e.mul(&cob.rbar)?;
    rep.equality("compatibility: Ω = ER̄ equals R̄", omega.residual(&cob.rbar));
    rep.equality("compatibility: R̄ selfadjoint", cob.rbar.adjoint().residual(&cob.rbar));
    if let Some((o, _)) = &q.omega {
        rep.equality("declared Ω = ER̄", o.residual(&omega));
    }
    Ok(rep)
}

/// (R*)⁻¹ = Ω₂₁RΩ⁻¹.
pub fn braiding_unitarity_check(q: &QuasiTriData) -> Result<Option<Witness>, QuasiError> {
    let (o, oinv) = q.omega.as_ref().ok_or(QuasiError::Missing("Ω-involution"))?;
    Ok(q.rinv.adjoint().residual(&AlgTensor::product(&[&flip(o), &q.r, oinv])?))
}

/// Sign of every pivot of an exact LDL† elimination of a Hermitian matrix.
fn hermitian_positive(m: &Mat) -> Certified {
    let n = m.rows();
    let mut a = m.to_dense();
    let mut undecided = false;
    for k in 0..n {
        let piv = a[k][k].clone();
        match piv.real_sign() {
            Some(std::cmp::Ordering::Greater) => {}
            Some(_) => return Certified::NotPositive,
            None => {
                undecided = true;
                if piv.is_zero() {
                    return Certified::NotPositive;
                }
            }
        }
        let inv = piv.inv().expect("nonzero pivot");
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] * &inv;
            for j in k + 1..n {
                if !a[k][j].is_zero() {
                    let d = &f * &a[k][j];
                    a[i][j] -= &d;
                }
            }
        }
    }
    if undecided {
        Certified::Indeterminate
    } else {
        Certified::Positive
    }
}

/// Positivity of Ω on its support, per tuple; `generator` restricts to tuples (σ, generator).
pub fn positivity_check(omega: &AlgTensor, generator: Option<usize>) -> Positivity {
    let shape = omega.shape().clone();
    let keys: Vec<Key> = omega.blocks().map(|(k, _)| k.clone()).filter(|k| generator.is_none_or(|g| k[1] == g)).collect();
    let blocks = crate::par::map_collect(&keys, |k| {
        let m = omega.block(k).expect("listed block");
        let h = Mat::diag(&shape.gram_weights(k));
        let hm = h.mul(m);
        if hm.conj_transpose() != hm {
            return (k.clone(), Certified::NotPositive);
        }
        let basis = m.cr_factor().c;
        let restricted = basis.conj_transpose().mul(&hm).mul(&basis);
        (k.clone(), hermitian_positive(&restricted))
    });
    let verdict = if blocks.iter().any(|(_, c)| *c == Certified::NotPositive) {
        Certified::NotPositive
    } else if blocks.iter().any(|(_, c)| *c == Certified::Indeterminate) {
        Certified::Indeterminate
    } else {
        Certified::Positive
    };
    Positivity { verdict, blocks }
}

/// Spectral pieces of one selfadjoint block in the original frame.
struct SpectralBlock {
    sqrt: CMat,
    sqrt_pinv: CMat,
    pos: CMat,
    neg: CMat,
    has_negative: bool,
}

fn spectral_block(shape: &BlockShape, key: &[usize], m: &Mat, rank: usize, tol: f64) -> Result<SpectralBlock, QuasiError> {
    let n = m.rows();
    let d = gram_sqrt(shape, key);
    let mut h = to_cmat(m);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] *= d[i] / d[j];
        }
    }
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].abs().total_cmp(&eig.eigenvalues[b].abs()));
    let kernel: BTreeSet<usize> = order[..n - rank].iter().copied().collect();
    let label = || shape.key_labels(key).join(",");
    for (idx, &i) in order.iter().enumerate() {
        let lam = eig.eigenvalues[i].abs();
        if (idx < n - rank && lam > tol.sqrt()) || (idx >= n - rank && lam <= tol) {
            return Err(QuasiError::Uncertified(label()));
        }
    }
    let spectral = |f: &dyn Fn(usize, f64) -> Complex64| {
        let mut diag = CMat::zeros(n, n);
        for i in 0..n {
            diag[(i, i)] = f(i, eig.eigenvalues[i]);
        }
        let mut out = &eig.eigenvectors * diag * eig.eigenvectors.adjoint();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= d[j] / d[i];
            }
        }
        out
    };
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let sqrt = spectral(&|i, l| {
        if kernel.contains(&i) {
            zero
        } else if l > 0.0 {
            Complex64::new(l.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-l).sqrt())
        }
    });
    let sqrt_pinv = spectral(&|i, l| {
        if kernel.contains(&i) {
            zero
        } else if l > 0.0 {
            Complex64::new(1.0 / l.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, -1.0 / (-l).sqrt())
        }
    });
    let pos = spectral(&|i, l| if kernel.contains(&i) || l > 0.0 { one } else { zero });
    let neg = spectral(&|i, l| if !kernel.contains(&i) && l < 0.0 { one } else { zero });
    let has_negative = (0..n).any(|i| !kernel.contains(&i) && eig.eigenvalues[i] < 0.0);
    Ok(SpectralBlock { sqrt, sqrt_pinv, pos, neg, has_negative })
}

/// Flip conjugation of a (a, b) block to the (b, a) block.
fn flip_block(m: &CMat, a: usize, b: usize) -> CMat {
    let swap = |i: usize| (i % b) * a + i / b;
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(swap(i), swap(j))] = m[(i, j)];
        }
    }
    out
}

/// Gram-weighted adjoint H⁻¹X†H of one block.
fn block_adjoint(shape: &BlockShape, key: &[usize], m: &CMat) -> CMat {
    let h: Vec<f64> = shape.gram_weights(key).iter().map(|x| x.embed().value.re).collect();
    let mut t = m.adjoint();
    for i in 0..t.nrows() {
        for j in 0..t.ncols() {
            t[(i, j)] *= h[j] / h[i];
        }
    }
    t
}

/// Hermitian inverse square root of a positive definite matrix.
fn inv_sqrt_pd(m: &CMat, tol: f64) -> Option<CMat> {
    let eig = SymmetricEigen::new((m + m.adjoint()) * Complex64::new(0.5, 0.0));
    if eig.eigenvalues.iter().any(|&l| l <= tol) {
        return None;
    }
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)));
    Some(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// On a positive diagonal tuple (a, a): T = U·R̄^{1/2} with U the polar part sending the ±1
/// eigenspaces of C = R̄^{-1/2}·ΣΔ(I)·R̄^{-1/2} into those of the flip Σ, so that T⁻¹ = ΣT*Σ
/// satisfies both T⁻¹T = Δ(I) and T = (T⁻¹)₂₁*.
fn diagonal_polar(shape: &BlockShape, key: &[usize], m: &Mat, p: &Mat, rank: usize, tol: f64) -> Result<(CMat, CMat), QuasiError> {
    let n = m.rows();
    let a = shape.dim(key[0]);
    let d = gram_sqrt(shape, key);
    let frame = |x: &CMat, inward: bool| {
        let mut out = x.clone();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= if inward { d[i] / d[j] } else { d[j] / d[i] };
            }
        }
        out
    };
    let label = || shape.key_labels(key).join(",");
    let h = frame(&to_cmat(m), true);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let delta = frame(&to_cmat(p), true);
    let flip = CMat::from_fn(n, n, |i, j| if i == (j % a) * a + j / a { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let top = &order[..rank];
    if top.iter().any(|&i| eig.eigenvalues[i] <= tol) {
        return Err(QuasiError::Uncertified(label()));
    }
    let vr = CMat::from_fn(n, rank, |i, c| eig.eigenvectors[(i, top[c])]);
    let root = CMat::from_diagonal(&nalgebra::DVector::from_fn(rank, |c, _| Complex64::new(eig.eigenvalues[top[c]].sqrt(), 0.0)));
    let root_inv = CMat::from_diagonal(&nalgebra::DVector::from_fn(rank, |c, _| Complex64::new(1.0 / eig.eigenvalues[top[c]].sqrt(), 0.0)));
    let c = &root_inv * vr.adjoint() * (&flip * &delta) * &vr * &root_inv;
    let ce = SymmetricEigen::new((&c + c.adjoint()) * Complex64::new(0.5, 0.0));
    if ce.eigenvalues.iter().any(|l| (l.abs() - 1.0).abs() > tol.sqrt()) {
        return Err(QuasiError::Uncertified(format!("{}: flip form is not a symmetry", label())));
    }
    let proj = |sign: f64| {
        let mut acc = CMat::zeros(rank, rank);
        for (i, l) in ce.eigenvalues.iter().enumerate() {
            if l * sign > 0.0 {
                let v = ce.eigenvectors.column(i);
                acc += v * v.adjoint();
            }
        }
        acc
    };
    let half = Complex64::new(0.5, 0.0);
    let id = CMat::identity(n, n);
    let (fp, fm) = ((&id + &flip) * half, (&id - &flip) * half);
    let guess = fp * &vr * proj(1.0) + fm * &vr * proj(-1.0);
    let norm = inv_sqrt_pd(&(guess.adjoint() * &guess), tol).ok_or_else(|| QuasiError::Uncertified(format!("{}: polar part is singular", label())))?;
    let u = guess * norm;
    let t = u * root * vr.adjoint();
    let tinv = &flip * t.adjoint() * &flip;
    Ok((frame(&t, false), frame(&tinv, false)))
}

/// T = R̄^{1/2}Δ(I) with the mixed square root (A₊)^{1/2} + i(A₋)^{1/2}, adjusted so that T = (T⁻¹)₂₁*:
/// for a < b the (b, a) tuple is defined through T_{ba} = Σ(T⁻¹_{ab})*Σ, and positive diagonal
/// tuples get a polar correction.
pub fn dk_sqrt_twist(w: &WqhPresentation, q: &QuasiTriData, tol: f64) -> Result<DkTwist, QuasiError> {
    let cob = coboundary(w, q)?;
    if let Some(wit) = cob.rbar.adjoint().residual(&cob.rbar) {
        return Err(QuasiError::NotSelfadjoint(wit));
    }
    let shape = w.shape.clone();
    let p = w.p();
    let keys: Vec<Key> = shape.keys(2).into_iter().filter(|k| k[0] <= k[1]).collect();
    let pieces = crate::par::map_collect(&keys, |k| {
        let rank = p.block(k).map_or(0, Mat::rank);
        if rank == 0 {
            return Ok::<_, QuasiError>(None);
        }
        let m = cob.rbar.block_or_zero(k);
        let sb = spectral_block(&shape, k, &m, rank, tol)?;
        let polar = if k[0] == k[1] && !sb.has_negative {
            Some(diagonal_polar(&shape, k, &m, &p.block_or_zero(k), rank, tol)?)
        } else {
            None
        };
        Ok(Some((sb, polar)))
    });
    let pn = NumTensor::from_exact(&p);
    let (mut t, mut tinv, mut pos, mut neg) =
        (NumTensor::zero(&shape), NumTensor::zero(&shape), NumTensor::zero(&shape), NumTensor::zero(&shape));
    let mut trivial_pairs = BTreeSet::new();
    for (k, piece) in keys.iter().zip(pieces) {
        let (a, b) = (k[0], k[1]);
        let rev: Key = smallvec::smallvec![b, a];
        let (da, db) = (shape.dim(a), shape.dim(b));
        match piece? {
            Some((sb, polar)) => {
                if !sb.has_negative {
                    trivial_pairs.insert((a, b));
                    trivial_pairs.insert((b, a));
                }
                let (tk, tik) = match polar {
                    Some(pair) => pair,
                    None => (sb.sqrt, pn.block(k) * &sb.sqrt_pinv),
                };
                if a != b {
                    t.insert(rev.clone(), flip_block(&block_adjoint(&shape, k, &tik), da, db));
                    tinv.insert(rev.clone(), flip_block(&block_adjoint(&shape, k, &tk), da, db));
                    pos.insert(rev.clone(), flip_block(&sb.pos, da, db));
                    neg.insert(rev.clone(), flip_block(&sb.neg, da, db));
                }
                t.insert(k.clone(), tk);
                tinv.insert(k.clone(), tik);
                pos.insert(k.clone(), sb.pos);
                neg.insert(k.clone(), sb.neg);
            }
            None => {
                for key in [k.clone(), rev] {
                    let n = shape.tuple_dim(&key);
                    pos.insert(key.clone(), CMat::identity(n, n));
                    neg.insert(key, CMat::zeros(n, n));
                }
            }
        }
    }
    let mut rep = Report::new("spectral square-root twist");
    let idn = NumTensor::from_exact(&w.identity(2));
    rep.equality("PQ = 0", pos.mul(&neg).residual(&NumTensor::zero(&shape), tol));
    rep.equality("P + Q = I", pos.add(&neg).residual(&idn, tol));
    rep.equality("T⁻¹T = Δ(I)", tinv.mul(&t).residual(&pn, tol));
    rep.equality("T = (T⁻¹)₂₁*", tinv.flip().adjoint().residual(&t, tol));
    let sign = pos.sub(&neg);
    let rbar = NumTensor::from_exact(&cob.rbar);
    let rbar_inv = NumTensor::from_exact(&cob.rbar_inv);
    rep.equality("R̄ = T*(P−Q)T", NumTensor::product(&[&t.adjoint(), &sign, &t]).residual(&rbar, tol));
    rep.equality("R̄⁻¹ = T⁻¹(P−Q)(T⁻¹)*", NumTensor::product(&[&tinv, &sign, &tinv.adjoint()]).residual(&rbar_inv, tol));

    let pt = t.mul(&tinv);
    let omega_t = NumTensor::product(&[&tinv.adjoint(), &rbar, &tinv]);
    let form = NumTensor::product(&[&pt.adjoint(), &sign, &pt]);
    rep.equality("Ω_T = Δ_T(I)*(P−Q)Δ_T(I)", omega_t.residual(&form, tol));
    let trivial: Vec<Key> = trivial_pairs.iter().map(|&(a, b)| smallvec::smallvec![a, b]).collect();
    rep.equality("Ω_T = Δ_T(I) on trivial pairs", omega_t.residual_on(&pt, &trivial, tol));
    let both: Vec<Key> =
        trivial_pairs.iter().filter(|&&(a, b)| trivial_pairs.contains(&(b, a))).map(|&(a, b)| smallvec::smallvec![a, b]).collect();
    if let Some(sw) = &q.ribbon_sqrt_w {
        let swinv = invert_element(sw).ok_or(QuasiError::Missing("invertible w"))?;
        let r_t = NumTensor::product(&[&t.flip(), &NumTensor::from_exact(&q.r), &tinv]);
        let ww = NumTensor::from_exact(&sw.outer(sw)?);
        let rhs = NumTensor::product(&[&ww, &t, &NumTensor::from_exact(&w.delta.apply(&swinv)), &tinv]);
        rep.equality("R_T = w⊗wΔ_T(w⁻¹) on trivial pairs", r_t.residual_on(&rhs, &both, tol));
    }
    let adj = units(&shape).into_iter().find_map(|(b, i, j)| {
        let a = w.unit(b, i, j);
        let lhs = NumTensor::product(&[&t, &NumTensor::from_exact(&w.delta.apply(&a.adjoint())), &tinv]);
        let rhs = NumTensor::product(&[&t, &NumTensor::from_exact(&w.delta.apply(&a)), &tinv]).adjoint();
        lhs.residual_on(&rhs, &both, tol)
    });
    rep.equality("Δ_T(a*) = Δ_T(a)* on trivial pairs", adj);
    Ok(DkTwist { t, tinv, pos_proj: pos, neg_proj: neg, trivial_pairs, report: rep })
}

impl DkTwist {
    /// Δ_T(a) = TΔ(a)T⁻¹.
    pub fn twisted_delta(&self, w: &WqhPresentation, a: &AlgTensor) -> NumTensor {
        NumTensor::product(&[&self.t, &NumTensor::from_exact(&w.delta.apply(a)), &self.tinv])
    }

    /// R_T = T₂₁RT⁻¹.
    pub fn twisted_r(&self, q: &QuasiTriData) -> NumTensor {
        NumTensor::product(&[&self.t.flip(), &NumTensor::from_exact(&q.r), &self.tinv])
    }
}

/// The scalar by which X acts on the range of the idempotent E within one tuple block.
pub fn eigenvalue_on(x: &CMat, e: &CMat) -> Complex64 {
    (x * e).trace() / e.trace()
}

/// Twist-invariance of the verified quasitriangular classes.
pub fn twist_preserves(w: &WqhPresentation, q: &QuasiTriData, tw: &Twist) -> Result<bool, QuasiError> {
    let before = verify_quasitriangular(w, q).passed();
    let wt = w.twist(tw)?;
    let after = verify_quasitriangular(&wt, &q.twisted(tw)?).passed();
    Ok(!before || after)
}

/// Central element with value `vals[r]` on block r.
pub fn central(shape: &Arc<BlockShape>, vals: &[CycScalar]) -> AlgTensor {
    AlgTensor::central(shape, vals)
}
