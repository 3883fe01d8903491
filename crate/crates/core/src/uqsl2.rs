//! U_q(sl₂) at the minimal root q = e^{iπ/ℓ}: Weyl modules, R-matrices solved from the
//! intertwining equations, Wenzl idempotents, and the assembled algebra A_W with its braiding data.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::blockalg::{AlgTensor, BlockError, Mat};
use crate::fusion::{modular_data, proportional, qdim, ribbon_theta, sl2_verlinde, FusionError, ModularData, WeightData};
use crate::quasitri::{
    coboundary, dk_sqrt_twist, drinfeld_element, eigenvalue_on, hermitian_coboundary_check, positivity_check, verify_omega_involution,
    verify_quasitriangular, verify_ribbon, QuasiError, QuasiTriData,
};
use crate::report::{Report, Verdict};
use crate::scalars::{cyc, q_factorial, q_integer, CycScalar, ScalarError};
use crate::tannaka::{reconstruct, Associativity, Channel, FunctorData, TannakaError};
use crate::wqh::{invert_element, WqhError, WqhPresentation};

/// Dual Coxeter number of sl₂; the level is k = ℓ − h^∨ and the braiding scale is 2(k + h^∨) = 2ℓ.
pub const DUAL_COXETER: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Uqsl2Error {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Wqh(#[from] WqhError),
    #[error(transparent)]
    Quasi(#[from] QuasiError),
    #[error(transparent)]
    Tannaka(#[from] TannakaError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("ℓ = {0} is below 3")]
    LevelTooSmall(usize),
    #[error("weight {lambda} is outside the open alcove for ℓ = {ell}")]
    OutsideAlcove { lambda: usize, ell: usize },
    #[error("defining relation fails: {0}")]
    Relation(String),
    #[error("intertwiners for {context}: dimension {dim}")]
    Intertwiner { context: String, dim: usize },
    #[error("R-matrix on V{a}⊗V{b}: {reason}")]
    RMatrix { a: usize, b: usize, reason: String },
    #[error("modules at different roots")]
    RootMismatch,
    #[error("axiom fails: {0}")]
    Verification(String),
}

/// Open alcove {0, …, ℓ−2} and closed alcove {0, …, ℓ−1} for q = e^{iπ/ℓ}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlcoveData {
    pub ell: usize,
}

impl AlcoveData {
    pub fn new(ell: usize) -> Result<AlcoveData, Uqsl2Error> {
        if ell < 3 {
            return Err(Uqsl2Error::LevelTooSmall(ell));
        }
        Ok(AlcoveData { ell })
    }

    pub fn level(&self) -> usize {
        self.ell - DUAL_COXETER
    }

    pub fn open(&self) -> RangeInclusive<usize> {
        0..=self.ell - 2
    }

    pub fn closed(&self) -> RangeInclusive<usize> {
        0..=self.ell - 1
    }

    pub fn check(&self, lambda: usize) -> Result<(), Uqsl2Error> {
        if self.open().contains(&lambda) {
            Ok(())
        } else {
            Err(Uqsl2Error::OutsideAlcove { lambda, ell: self.ell })
        }
    }
}

/// Generator actions on a module in a weight basis; weights are integral H-eigenvalues.
#[derive(Debug, Clone)]
struct Action {
    weights: Vec<i64>,
    e: Mat,
    f: Mat,
    k: Mat,
    kinv: Mat,
}

impl Action {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Δ(E) = 1⊗E + E⊗K, Δ(F) = K⁻¹⊗F + F⊗1, Δ(K) = K⊗K.
    fn tensor(&self, other: &Action) -> Action {
        let (ia, ib) = (Mat::identity(self.dim()), Mat::identity(other.dim()));
        Action {
            weights: self.weights.iter().flat_map(|a| other.weights.iter().map(move |b| a + b)).collect(),
            e: ia.kron(&other.e).add(&self.e.kron(&other.k)),
            f: self.kinv.kron(&other.f).add(&self.f.kron(&ib)),
            k: self.k.kron(&other.k),
            kinv: self.kinv.kron(&other.kinv),
        }
    }

    /// The opposite coproduct on the same space.
    fn tensor_op(&self, other: &Action) -> Action {
        let (ia, ib) = (Mat::identity(self.dim()), Mat::identity(other.dim()));
        Action {
            weights: self.weights.iter().flat_map(|a| other.weights.iter().map(move |b| a + b)).collect(),
            e: self.e.kron(&ib).add(&self.k.kron(&other.e)),
            f: self.f.kron(&other.kinv).add(&ia.kron(&other.f)),
            k: self.k.kron(&other.k),
            kinv: self.kinv.kron(&other.kinv),
        }
    }
}

/// The Weyl module V_m with basis v_0, …, v_m of weights m, m−2, …, −m.
#[derive(Debug, Clone)]
pub struct Sl2ModuleData {
    pub weight: usize,
    pub ell: usize,
    pub q: CycScalar,
    pub q_half: CycScalar,
    pub e: Mat,
    pub f: Mat,
    pub k: Mat,
    pub kinv: Mat,
}

impl Sl2ModuleData {
    pub fn dim(&self) -> usize {
        self.weight + 1
    }

    fn action(&self) -> Action {
        let m = self.weight as i64;
        Action {
            weights: (0..=m).map(|p| m - 2 * p).collect(),
            e: self.e.clone(),
            f: self.f.clone(),
            k: self.k.clone(),
            kinv: self.kinv.clone(),
        }
    }

    /// Invariant form h_p = [m choose p]_q, for which E* = F and K* = K⁻¹.
    pub fn gram(&self) -> Result<Vec<CycScalar>, Uqsl2Error> {
        let m = self.weight as i64;
        let top = q_factorial(m, &self.q)?;
        (0..=m)
            .map(|p| {
                let den = &q_factorial(p, &self.q)? * &q_factorial(m - p, &self.q)?;
                Ok(&top * &den.inv()?)
            })
            .collect()
    }

    /// The ribbon scalar q^{−m(m+2)/2}.
    pub fn ribbon_scalar(&self) -> Result<CycScalar, Uqsl2Error> {
        let m = self.weight as i64;
        Ok(cyc(4 * self.ell as u32, -m * (m + 2))?)
    }

    /// The chosen square root q^{−m(m+2)/4} of the ribbon scalar.
    pub fn ribbon_sqrt(&self) -> Result<CycScalar, Uqsl2Error> {
        let m = self.weight as i64;
        Ok(cyc(8 * self.ell as u32, -m * (m + 2))?)
    }
}

/// V_m at q = e^{iπ/ℓ}: K v_p = q^{m−2p}v_p, E v_{p+1} = [m−p]v_p, F v_p = [p+1]v_{p+1}.
pub fn weyl_module(m: usize, ell: usize) -> Result<Sl2ModuleData, Uqsl2Error> {
    if ell < 2 {
        return Err(Uqsl2Error::LevelTooSmall(ell));
    }
    let order = 2 * ell as u32;
    let q = cyc(order, 1)?;
    let q_half = cyc(2 * order, 1)?;
    let mi = m as i64;
    let n = m + 1;
    let mut e = Vec::new();
    let mut f = Vec::new();
    for p in 0..m {
        e.push((p, p + 1, q_integer(mi - p as i64, &q)?));
        f.push((p + 1, p, q_integer(p as i64 + 1, &q)?));
    }
    let k = Mat::diag(&(0..n).map(|p| cyc(order, mi - 2 * p as i64)).collect::<Result<Vec<_>, _>>()?);
    let kinv = Mat::diag(&(0..n).map(|p| cyc(order, 2 * p as i64 - mi)).collect::<Result<Vec<_>, _>>()?);
    let module = Sl2ModuleData {
        weight: m,
        ell,
        q_half,
        e: Mat::from_triplets(n, n, e),
        f: Mat::from_triplets(n, n, f),
        k,
        kinv,
        q,
    };
    check_relations(&module.action(), &module.q)?;
    Ok(module)
}

fn check_relations(a: &Action, q: &CycScalar) -> Result<(), Uqsl2Error> {
    let q2 = q.pow(2)?;
    let q2inv = q2.inv()?;
    if a.k.mul(&a.kinv) != Mat::identity(a.dim()) {
        return Err(Uqsl2Error::Relation("KK⁻¹ = 1".into()));
    }
    if a.k.mul(&a.e) != a.e.mul(&a.k).scale(&q2) {
        return Err(Uqsl2Error::Relation("KE = q²EK".into()));
    }
    if a.k.mul(&a.f) != a.f.mul(&a.k).scale(&q2inv) {
        return Err(Uqsl2Error::Relation("KF = q⁻²FK".into()));
    }
    let lhs = a.e.mul(&a.f).sub(&a.f.mul(&a.e)).scale(&(q - &q.inv()?));
    if lhs != a.k.sub(&a.kinv) {
        return Err(Uqsl2Error::Relation("EF − FE = (K − K⁻¹)/(q − q⁻¹)".into()));
    }
    Ok(())
}

/// Basis of the weight-preserving maps X: src → dst with X·E = E·X and X·F = F·X.
fn intertwiners(src: &Action, dst: &Action) -> Vec<Mat> {
    let (sd, dd) = (src.dim(), dst.dim());
    let unknowns: Vec<(usize, usize)> =
        (0..dd).flat_map(|i| (0..sd).map(move |j| (i, j))).filter(|&(i, j)| dst.weights[i] == src.weights[j]).collect();
    let mut eqs: BTreeMap<(usize, usize), CycScalar> = BTreeMap::new();
    for (g, (a, b)) in [(&dst.e, &src.e), (&dst.f, &src.f)].into_iter().enumerate() {
        let at = a.transpose();
        let base = g * dd * sd;
        for (u, &(r, c)) in unknowns.iter().enumerate() {
            for (i, v) in at.row(r) {
                *eqs.entry((base + i * sd + c, u)).or_insert_with(CycScalar::zero) += v;
            }
            for (j, v) in b.row(c) {
                *eqs.entry((base + r * sd + j, u)).or_insert_with(CycScalar::zero) -= v;
            }
        }
    }
    let sys = Mat::from_triplets(2 * dd * sd, unknowns.len(), eqs.into_iter().filter(|(_, v)| !v.is_zero()).map(|((i, j), v)| (i, j, v)));
    let null = sys.nullspace();
    (0..null.cols())
        .map(|t| {
            Mat::from_triplets(
                dd,
                sd,
                unknowns.iter().enumerate().filter_map(|(u, &(r, c))| {
                    let v = null.get(u, t);
                    (!v.is_zero()).then_some((r, c, v))
                }),
            )
        })
        .collect()
}

/// A split copy of V_ν inside X: ι: V_ν → X and π: X → V_ν with πι = 1, ι normalized to a leading 1.
fn split_summand(x: &Action, nu: &Action, context: &str) -> Result<Option<(Mat, Mat)>, Uqsl2Error> {
    let iotas = intertwiners(nu, x);
    let pis = intertwiners(x, nu);
    let pairing: Vec<Vec<CycScalar>> = pis.iter().map(|p| iotas.iter().map(|i| p.mul(i).get(0, 0)).collect()).collect();
    let rank = if pairing.is_empty() || iotas.is_empty() { 0 } else { Mat::from_rows(&pairing, iotas.len()).rank() };
    if rank == 0 {
        return Ok(None);
    }
    if iotas.len() != 1 || pis.len() != 1 {
        return Err(Uqsl2Error::Intertwiner { context: context.to_string(), dim: iotas.len().max(pis.len()) });
    }
    let iota = &iotas[0];
    let lead = (0..iota.rows()).map(|r| iota.get(r, 0)).find(|v| !v.is_zero()).expect("nonzero intertwiner");
    let iota = iota.scale(&lead.inv()?);
    let c = pis[0].mul(&iota).get(0, 0);
    let pi = pis[0].scale(&c.inv()?);
    if !pi.mul(&iota).is_identity() {
        return Err(Uqsl2Error::Intertwiner { context: format!("{context}: πι is not scalar"), dim: 1 });
    }
    Ok(Some((iota, pi)))
}

/// Non-negligible summands V_ν of V_a⊗V_b: split copies with ν in the closed alcove and [ν+1]_q ≠ 0.
fn alcove_channels(modules: &[Sl2ModuleData], a: usize, b: usize, ell: usize) -> Result<Vec<(usize, Mat, Mat)>, Uqsl2Error> {
    let x = modules[a].action().tensor(&modules[b].action());
    let q = &modules[0].q;
    let mut out = Vec::new();
    for nu in 0..ell {
        let nu_mod = if nu < modules.len() { modules[nu].clone() } else { weyl_module(nu, ell)? };
        if q_integer(nu as i64 + 1, q)?.is_zero() {
            continue;
        }
        if let Some((iota, pi)) = split_summand(&x, &nu_mod.action(), &format!("V{nu} in V{a}⊗V{b}"))? {
            out.push((nu, iota, pi));
        }
    }
    Ok(out)
}

/// Multiplicities of the non-negligible summands of V_γ⊗V₁, one row per γ in the open alcove.
pub fn truncated_step(ell: usize) -> Result<Vec<Vec<u32>>, Uqsl2Error> {
    let alcove = AlcoveData::new(ell)?;
    let modules = alcove.open().map(|m| weyl_module(m, ell)).collect::<Result<Vec<_>, _>>()?;
    let n = modules.len();
    alcove
        .open()
        .map(|g| {
            let mut row = vec![0u32; n];
            for (nu, _, _) in alcove_channels(&modules, g, 1, ell)? {
                if nu < n {
                    row[nu] += 1;
                }
            }
            Ok(row)
        })
        .collect()
}

/// Multiplicities of V_γ in the n-th truncated power of V₁.
pub fn truncated_power_multiplicities(ell: usize, n: usize) -> Result<Vec<u32>, Uqsl2Error> {
    let step = truncated_step(ell)?;
    let mut v = vec![0u32; step.len()];
    v[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u32; step.len()];
        for (g, &c) in v.iter().enumerate() {
            for (nu, &m) in step[g].iter().enumerate() {
                next[nu] += c * m;
            }
        }
        v = next;
    }
    Ok(v)
}

/// Fusion coefficients N[i][j][k] from truncated tensoring with V₁ and X_{i+1} = X₁X_i − X_{i−1}.
pub fn truncated_fusion_oracle(ell: usize) -> Result<Vec<Vec<Vec<i64>>>, Uqsl2Error> {
    let step = truncated_step(ell)?;
    let n = step.len();
    let times_x = |v: &[i64]| -> Vec<i64> {
        let mut out = vec![0i64; n];
        for (g, &c) in v.iter().enumerate() {
            for (nu, &m) in step[g].iter().enumerate() {
                out[nu] += c * m as i64;
            }
        }
        out
    };
    let mut table = vec![vec![vec![0i64; n]; n]; n];
    for j in 0..n {
        let mut prev = vec![0i64; n];
        let mut cur = vec![0i64; n];
        cur[j] = 1;
        for row in table.iter_mut() {
            row[j] = cur.clone();
            let next: Vec<i64> = times_x(&cur).iter().zip(&prev).map(|(a, b)| a - b).collect();
            prev = std::mem::replace(&mut cur, next);
        }
    }
    Ok(table)
}

/// The diagonal factor Π(v_p⊗w_s) = q^{(a−2p)(b−2s)/2}.
fn pi_factor(a: &Sl2ModuleData, b: &Sl2ModuleData) -> Result<Mat, Uqsl2Error> {
    let order = 4 * a.ell as u32;
    let (ma, mb) = (a.weight as i64, b.weight as i64);
    let diag = (0..=ma)
        .flat_map(|p| (0..=mb).map(move |s| (ma - 2 * p) * (mb - 2 * s)))
        .map(|e| cyc(order, e))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Mat::diag(&diag))
}

/// R on V_a⊗V_b as Π·Σ_k c_k E^k⊗F^k with c_0 = 1, the c_k solved from RΔ(g) = Δ^op(g)R.
pub fn solve_rmatrix(a: &Sl2ModuleData, b: &Sl2ModuleData) -> Result<Mat, Uqsl2Error> {
    if a.ell != b.ell {
        return Err(Uqsl2Error::RootMismatch);
    }
    let err = |reason: &str| Uqsl2Error::RMatrix { a: a.weight, b: b.weight, reason: reason.to_string() };
    let pi = pi_factor(a, b)?;
    let (x, xop) = (a.action().tensor(&b.action()), a.action().tensor_op(&b.action()));
    let top = a.weight.min(b.weight);
    let mut terms = vec![Mat::identity(a.dim() * b.dim())];
    let (mut ek, mut fk) = (Mat::identity(a.dim()), Mat::identity(b.dim()));
    for _ in 0..top {
        ek = ek.mul(&a.e);
        fk = fk.mul(&b.f);
        terms.push(ek.kron(&fk));
    }
    let residual_of = |t: &Mat| -> Vec<Mat> {
        let r = pi.mul(t);
        [(&x.e, &xop.e), (&x.f, &xop.f)].into_iter().map(|(g, gop)| r.mul(g).sub(&gop.mul(&r))).collect()
    };
    let blocks: Vec<Vec<Mat>> = terms.iter().map(residual_of).collect();
    let n = a.dim() * b.dim();
    let rows = 2 * n * n;
    let flat = |ms: &[Mat]| -> Vec<(usize, CycScalar)> {
        ms.iter().enumerate().flat_map(|(g, m)| m.entries().map(move |(i, j, v)| (g * n * n + i * n + j, v.clone())).collect::<Vec<_>>()).collect()
    };
    let lhs = Mat::from_triplets(rows, top, blocks[1..].iter().enumerate().flat_map(|(k, ms)| flat(ms).into_iter().map(move |(r, v)| (r, k, v))));
    let rhs = Mat::from_triplets(rows, 1, flat(&blocks[0]).into_iter().map(|(r, v)| (r, 0, -v)));
    let coeffs = lhs.solve_any(&rhs).ok_or_else(|| err("no solution to the intertwining equations"))?;
    if lhs.rank() != top {
        return Err(err("solution is not unique"));
    }
    let theta = (0..top).fold(terms[0].clone(), |acc, k| acc.add(&terms[k + 1].scale(&coeffs.get(k, 0))));
    let r = pi.mul(&theta);
    for (g, gop, name) in [(&x.e, &xop.e, "E"), (&x.f, &xop.f, "F"), (&x.k, &xop.k, "K")] {
        if r.mul(g) != gop.mul(&r) {
            return Err(err(&format!("RΔ({name}) ≠ Δ^op({name})R")));
        }
    }
    Ok(r)
}

/// The flip V_a⊗V_b → V_b⊗V_a.
fn flip_matrix(da: usize, db: usize) -> Mat {
    Mat::from_triplets(da * db, da * db, (0..da).flat_map(|i| (0..db).map(move |j| (j * da + i, i * db + j, CycScalar::one()))))
}

/// R₁₂R₁₃R₂₃ = R₂₃R₁₃R₁₂ on V_a⊗V_b⊗V_c.
pub fn yang_baxter_holds(a: &Sl2ModuleData, b: &Sl2ModuleData, c: &Sl2ModuleData) -> Result<bool, Uqsl2Error> {
    let (da, db, dc) = (a.dim(), b.dim(), c.dim());
    let r12 = solve_rmatrix(a, b)?.kron(&Mat::identity(dc));
    let r23 = Mat::identity(da).kron(&solve_rmatrix(b, c)?);
    // R₁₃ = (1⊗P)(R_{ac}⊗1)(1⊗P) with P the flip of the last two factors.
    let p_to = Mat::identity(da).kron(&flip_matrix(db, dc));
    let p_back = Mat::identity(da).kron(&flip_matrix(dc, db));
    let r13 = p_back.mul(&solve_rmatrix(a, c)?.kron(&Mat::identity(db))).mul(&p_to);
    Ok(r12.mul(&r13).mul(&r23) == r23.mul(&r13).mul(&r12))
}

/// R* = (R₂₁)⁻¹ on V_a⊗V_b with respect to the product of the invariant forms.
pub fn rmatrix_unitary(a: &Sl2ModuleData, b: &Sl2ModuleData) -> Result<bool, Uqsl2Error> {
    let r = solve_rmatrix(a, b)?;
    let gb = b.gram()?;
    let h: Vec<CycScalar> = a.gram()?.iter().flat_map(|x| gb.iter().map(move |y| x * y)).collect();
    let hinv: Vec<CycScalar> = h.iter().map(|x| x.inv()).collect::<Result<_, _>>()?;
    let adj = Mat::diag(&hinv).mul(&r.conj_transpose()).mul(&Mat::diag(&h));
    let (da, db) = (a.dim(), b.dim());
    let r21 = flip_matrix(db, da).mul(&solve_rmatrix(b, a)?).mul(&flip_matrix(da, db));
    Ok(adj.mul(&r21).is_identity())
}

/// Projections of V_λ⊗V₁ onto its alcove summands and the negligible complement.
#[derive(Debug, Clone)]
pub struct WenzlDecomposition {
    pub lambda: usize,
    pub ell: usize,
    pub summands: Vec<(usize, Mat)>,
    pub negligible: Mat,
    pub report: Report,
}

/// p_γ = ι_γπ_γ for each alcove summand of V_λ⊗V₁, checked against the R̄-twisted form.
pub fn wenzl_decompose(lambda: usize, ell: usize) -> Result<WenzlDecomposition, Uqsl2Error> {
    let alcove = AlcoveData::new(ell)?;
    alcove.check(lambda)?;
    let modules = (0..=lambda.max(1)).map(|m| weyl_module(m, ell)).collect::<Result<Vec<_>, _>>()?;
    let channels = alcove_channels(&modules, lambda, 1, ell)?;
    let n = modules[lambda].dim() * 2;
    let summands: Vec<(usize, Mat)> = channels.iter().map(|(nu, i, p)| (*nu, i.mul(p))).collect();
    let total = summands.iter().fold(Mat::zeros(n, n), |acc, (_, p)| acc.add(p));
    let negligible = Mat::identity(n).sub(&total);

    let mut rep = Report::new(format!("Wenzl idempotents of V{lambda}⊗V1"));
    let mut all: Vec<&Mat> = summands.iter().map(|(_, p)| p).collect();
    all.push(&negligible);
    let idempotent = all.iter().all(|p| p.mul(p) == **p);
    let orthogonal = all.iter().enumerate().all(|(i, p)| all.iter().enumerate().all(|(j, r)| i == j || p.mul(r).is_zero()));
    rep.flag("idempotent", idempotent, None);
    rep.flag("orthogonal", orthogonal, None);
    rep.flag("ranges are Weyl modules", summands.iter().all(|(nu, p)| p.rank() == nu + 1), None);

    // R̄ = R·Σ_γ (w_γ/(w_λw₁)) p_γ on the truncated part.
    let r = solve_rmatrix(&modules[lambda], &modules[1])?;
    let wl = &modules[lambda].ribbon_sqrt()? * &modules[1].ribbon_sqrt()?;
    let wl_inv = wl.inv()?;
    let mut theta = Mat::zeros(n, n);
    for (nu, p) in &summands {
        let wg = weyl_module(*nu, ell)?.ribbon_sqrt()?;
        theta = theta.add(&p.scale(&(&wg * &wl_inv)));
    }
    let rbar = r.mul(&theta);
    let h: Vec<CycScalar> = {
        let (ga, gb) = (modules[lambda].gram()?, modules[1].gram()?);
        ga.iter().flat_map(|x| gb.iter().map(move |y| x * y)).collect()
    };
    let hinv: Vec<CycScalar> = h.iter().map(|x| x.inv()).collect::<Result<_, _>>()?;
    let adjoint = |m: &Mat| Mat::diag(&hinv).mul(&m.conj_transpose()).mul(&Mat::diag(&h));
    let selfadjoint = summands.iter().all(|(_, p)| adjoint(p).mul(&rbar) == rbar.mul(p));
    rep.flag("p* R̄ = R̄ p", selfadjoint, None);
    Ok(WenzlDecomposition { lambda, ell, summands, negligible, report: rep })
}

/// A_W(sl₂, q, ℓ) with the data it was built from.
#[derive(Debug, Clone)]
pub struct AwAlgebra {
    pub alcove: AlcoveData,
    pub modules: Vec<Sl2ModuleData>,
    pub functor: FunctorData,
    pub presentation: WqhPresentation,
    pub quasi: QuasiTriData,
}

/// The canonical (F, G) data: split intertwiners of V_a⊗V_b onto its alcove summands.
pub fn sl2_functor_data(ell: usize) -> Result<(Vec<Sl2ModuleData>, FunctorData), Uqsl2Error> {
    let alcove = AlcoveData::new(ell)?;
    let modules = alcove.open().map(|m| weyl_module(m, ell)).collect::<Result<Vec<_>, _>>()?;
    let n = modules.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let lists = crate::par::map_collect(&pairs, |&(a, b)| alcove_channels(&modules, a, b, ell));
    let mut channels = BTreeMap::new();
    for (&(a, b), list) in pairs.iter().zip(lists) {
        let list = list?
            .into_iter()
            .filter(|(nu, _, _)| *nu < n)
            .map(|(target, iota, pi)| Channel { target, copy: 0, iota, pi })
            .collect::<Vec<_>>();
        channels.insert((a, b), list);
    }
    let gram = modules.iter().map(Sl2ModuleData::gram).collect::<Result<Vec<_>, _>>()?;
    let dims = modules.iter().map(Sl2ModuleData::dim).collect();
    let fd = FunctorData::new(sl2_verlinde(alcove.level()), dims, Some(gram), channels)?;
    Ok((modules, fd))
}

/// Builds A_W: Δ and Φ = Q₃P₃ by reconstruction, R = R^U·Δ(I), v, w and Ω = R̄ as central and two-leg elements.
pub fn assemble_aw(ell: usize) -> Result<AwAlgebra, Uqsl2Error> {
    let alcove = AlcoveData::new(ell)?;
    let (modules, functor) = sl2_functor_data(ell)?;
    let w = reconstruct(&functor, &Associativity::Strict, None)?.presentation;
    let shape = w.shape.clone();
    let n = modules.len();
    let p = w.p();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let rs = crate::par::map_collect(&pairs, |&(a, b)| solve_rmatrix(&modules[a], &modules[b]));
    let mut blocks = Vec::new();
    for (&(a, b), r) in pairs.iter().zip(rs) {
        let d = p.block_or_zero(&[a, b]);
        if !d.is_zero() {
            blocks.push((smallvec::smallvec![a, b], r?.mul(&d)));
        }
    }
    let r = AlgTensor::from_blocks(&shape, 2, blocks)?;
    let v = AlgTensor::central(&shape, &modules.iter().map(Sl2ModuleData::ribbon_scalar).collect::<Result<Vec<_>, _>>()?);
    let sw = AlgTensor::central(&shape, &modules.iter().map(Sl2ModuleData::ribbon_sqrt).collect::<Result<Vec<_>, _>>()?);
    let quasi = QuasiTriData::from_r(&w, r)?.with_ribbon(v, Some(sw));
    let cob = coboundary(&w, &quasi)?;
    let quasi = quasi.with_omega(cob.rbar, cob.rbar_inv);
    Ok(AwAlgebra { alcove, modules, functor, presentation: w, quasi })
}

/// Every axiom suite A_W is claimed to satisfy.
pub fn verify_aw(aw: &AwAlgebra) -> Result<Report, Uqsl2Error> {
    let w = &aw.presentation;
    let q = &aw.quasi;
    let mut rep = Report::new(format!("A_W(sl2, q, {})", aw.alcove.ell));
    rep.absorb("wqb", w.verify_wqb());
    rep.absorb("w-bialgebra", w.is_w_bialgebra());
    match w.verify_antipode() {
        Ok(r) => rep.absorb("antipode", r),
        Err(e) => rep.push("antipode", Verdict::Fail, Some(e.to_string())),
    };
    rep.absorb("R-matrix", verify_quasitriangular(w, q));
    rep.absorb("ribbon", verify_ribbon(w, q)?);
    rep.absorb("coboundary", coboundary(w, q)?.report);
    let (omega, omega_inv) = q.omega.as_ref().ok_or(QuasiError::Missing("Ω"))?;
    rep.absorb("Ω-involution", verify_omega_involution(w, omega, omega_inv)?);
    rep.absorb("hermitian", hermitian_coboundary_check(w, q)?);
    match drinfeld_element(w, q) {
        Ok(d) => rep.absorb("Drinfeld", d.report),
        Err(e) => rep.push("Drinfeld element", Verdict::Fail, Some(e.to_string())),
    };
    let pos = positivity_check(omega, Some(1));
    for (k, c) in &pos.blocks {
        rep.push(format!("Ω positive on ({}, {})", w.shape.label(k[0]), w.shape.label(k[1])), Verdict::from(*c), None);
    }
    Ok(rep)
}

/// Assembles A_W and stops at the first failing axiom.
pub fn assemble_verified_aw(ell: usize) -> Result<(AwAlgebra, Report), Uqsl2Error> {
    let aw = assemble_aw(ell)?;
    let rep = verify_aw(&aw)?;
    if let Some(c) = rep.failures().next() {
        return Err(Uqsl2Error::Verification(c.name.clone()));
    }
    Ok((aw, rep))
}

/// Eigenvalue of the twisted braiding on the γ-summand of V_λ⊗V₁.
#[derive(Debug, Clone)]
pub struct DkEntry {
    pub lambda: usize,
    pub gamma: usize,
    pub eigenvalue: Complex64,
    pub expected: CycScalar,
    pub deviation: f64,
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct DkTable {
    pub ell: usize,
    pub entries: Vec<DkEntry>,
    pub report: Report,
}

impl DkTable {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

/// e^{iπ(C_γ − C_λ − C₁)/(2ℓ)} with C_m = m(m+2)/2.
pub fn dk_expected(lambda: usize, gamma: usize, ell: usize) -> Result<CycScalar, Uqsl2Error> {
    let c = |m: usize| (m * (m + 2)) as i64;
    Ok(cyc(8 * ell as u32, c(gamma) - c(lambda) - c(1))?)
}

/// Twisted braiding eigenvalues after the spectral square-root twist of R̄.
pub fn dk_braiding_table(aw: &AwAlgebra, tol: f64) -> Result<DkTable, Uqsl2Error> {
    let w = &aw.presentation;
    let q = &aw.quasi;
    let ell = aw.alcove.ell;
    let dk = dk_sqrt_twist(w, q, tol)?;
    let mut rep = Report::new(format!("Drinfeld–Kohno braiding table, ℓ = {ell}"));
    rep.absorb("sqrt twist", dk.report.clone());
    let r_t = dk.twisted_r(q);
    let sw = q.ribbon_sqrt_w.as_ref().ok_or(QuasiError::Missing("w"))?;
    let w_of = |m: usize| sw.block_or_zero(&[m]).get(0, 0);
    let n = aw.modules.len();
    let mut entries = Vec::new();
    for lambda in 0..n {
        rep.flag(format!("(V{lambda}, V1) is a trivial pair"), dk.trivial_pairs.contains(&(lambda, 1)), None);
        let x = r_t.block(&[lambda, 1]);
        for ch in aw.functor.channels(lambda, 1) {
            let gamma = ch.target;
            let mut vals = vec![CycScalar::zero(); n];
            vals[gamma] = CycScalar::one();
            let e = dk.twisted_delta(w, &AlgTensor::central(&w.shape, &vals)).block(&[lambda, 1]);
            let eigenvalue = eigenvalue_on(&x, &e);
            let expected = dk_expected(lambda, gamma, ell)?;
            let deviation = (eigenvalue - expected.embed().value).norm();
            let exact = &(&w_of(lambda) * &w_of(1)) * &w_of(gamma).inv()? == expected;
            rep.flag(format!("eigenvalue on V{gamma} ⊂ V{lambda}⊗V1"), deviation <= tol && exact, Some(format!("{eigenvalue:.12}")));
            entries.push(DkEntry { lambda, gamma, eigenvalue, expected, deviation, exact });
        }
    }
    Ok(DkTable { ell, entries, report: rep })
}

/// S_{ρσ} = Tr(Δ(uv⁻¹)·R₂₁R) on V_ρ⊗V_σ together with the ring-level data it is compared to.
#[derive(Debug, Clone)]
pub struct CategoricalS {
    pub s: Mat,
    pub dims: Vec<CycScalar>,
    pub ring: ModularData,
    pub normalization: Option<CycScalar>,
    pub report: Report,
}

pub fn categorical_s(aw: &AwAlgebra) -> Result<CategoricalS, Uqsl2Error> {
    let w = &aw.presentation;
    let q = &aw.quasi;
    let ell = aw.alcove.ell;
    let n = aw.modules.len();
    let u = drinfeld_element(w, q)?.u;
    let v = q.ribbon_v.as_ref().ok_or(QuasiError::Missing("ribbon element"))?;
    let pivot = u.mul(&invert_element(v).ok_or(QuasiError::Missing("invertible v"))?)?;
    let dims: Vec<CycScalar> = (0..n).map(|r| pivot.block_trace(&[r])).collect();
    let double = AlgTensor::product(&[&w.delta.apply(&pivot), &q.r.permute_legs(&[1, 0])?, &q.r])?;
    let s = Mat::from_fn(n, n, |a, b| double.block_trace(&[a, b]));

    let wd = WeightData::new(2, ell)?;
    let weights: Vec<Vec<i64>> = wd.weights().to_vec();
    let theta = weights.iter().map(|l| ribbon_theta(&wd, l)).collect::<Result<Vec<_>, _>>()?;
    let qd = weights.iter().map(|l| qdim(&wd, l)).collect::<Result<Vec<_>, _>>()?;
    let ring = modular_data(&sl2_verlinde(aw.alcove.level()), &theta, &qd)?;
    let normalization = proportional(&s, &ring.s);

    let mut rep = Report::new(format!("categorical S, ℓ = {ell}"));
    rep.flag("Tr(uv⁻¹) = [ρ+1]", dims.iter().zip(&qd).all(|(a, b)| a == b), None);
    rep.flag("S ∝ ring-level S", normalization.is_some(), normalization.as_ref().map(|c| format!("factor {c}")));
    Ok(CategoricalS { s, dims, ring, normalization, report: rep })
}

/// The emitted presentation file: the algebra sections followed by the braiding sections.
pub fn emit_presentation(aw: &AwAlgebra) -> String {
    let mut text = aw.presentation.to_text();
    text.push_str(&crate::textfmt::render(&aw.quasi.to_sections()));
    text
}

#[cfg(test)]
mod tests;
