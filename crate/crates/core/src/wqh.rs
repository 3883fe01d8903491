//! Discrete weak quasi-bialgebras and weak quasi-Hopf algebras: the data
//! model, axiom verification, twists and the w-bialgebra relations.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::blockalg::{block_witness, contract_pairs_block, AlgTensor, BlockError, BlockShape, CoproductMap, Key, Mat, UnitMap, Witness};
use crate::report::{Report, Verdict};
use crate::scalars::CycScalar;
use crate::textfmt::{self, Section};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WqhError {
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error("malformed presentation: {0}")]
    Malformed(String),
    #[error("invalid twist: {0}")]
    InvalidTwist(String),
    #[error("no antipode present")]
    NoAntipode,
    #[error("no strong antipode: {0}")]
    NoStrongAntipode(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Format(#[from] textfmt::FormatError),
}

/// Antipode data (S, α, β) with S stored on matrix units.
#[derive(Debug, Clone)]
pub struct Antipode {
    pub map: UnitMap,
    pub alpha: AlgTensor,
    pub beta: AlgTensor,
}

/// A discrete weak quasi-bialgebra with optional antipode and star.
#[derive(Debug, Clone)]
pub struct WqhPresentation {
    pub shape: Arc<BlockShape>,
    pub counit: usize,
    pub delta: CoproductMap,
    pub phi: AlgTensor,
    pub phi_inv: AlgTensor,
    pub antipode: Option<Antipode>,
    pub star: bool,
}

/// A twist T with partial left inverse T⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct Twist {
    pub t: AlgTensor,
    pub tinv: AlgTensor,
}

/// Result of searching for a strong antipode.
#[derive(Debug, Clone)]
pub enum StrongAntipode {
    Strong(Antipode),
    NotStrong { reason: String, witness: Option<Witness> },
}

impl StrongAntipode {
    pub fn strong(&self) -> Option<&Antipode> {
        match self {
            StrongAntipode::Strong(a) => Some(a),
            StrongAntipode::NotStrong { .. } => None,
        }
    }
}

/// The element f with its inverse and the relations it was checked against.
#[derive(Debug, Clone)]
pub struct FElement {
    pub f: AlgTensor,
    pub finv: AlgTensor,
    pub report: Report,
}

/// All matrix units (block, row, col) in canonical order.
pub fn units(shape: &BlockShape) -> Vec<(usize, usize, usize)> {
    (0..shape.len())
        .flat_map(|r| {
            let n = shape.dim(r);
            (0..n).flat_map(move |i| (0..n).map(move |j| (r, i, j)))
        })
        .collect()
}

/// Largest residual over lazily computed block pairs.
pub fn lazy_residual<F>(shape: &BlockShape, keys: &[Key], f: F) -> Option<Witness>
where
    F: Fn(&Key) -> (Mat, Mat) + Sync + Send,
{
    let found = crate::par::map_collect(keys, |k| {
        let (a, b) = f(k);
        if a == b {
            None
        } else {
            block_witness(shape, k, &a.sub(&b))
        }
    });
    found.into_iter().flatten().max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
}

/// Largest residual of an identity checked on every matrix unit.
pub fn unit_residual<F>(shape: &BlockShape, f: F) -> Result<Option<Witness>, BlockError>
where
    F: Fn(usize, usize, usize) -> Result<(AlgTensor, AlgTensor), BlockError> + Sync + Send,
{
    let us = units(shape);
    let found = crate::par::map_collect(&us, |&(r, i, j)| f(r, i, j).map(|(a, b)| a.residual(&b)));
    let mut best: Option<Witness> = None;
    for w in found {
        if let Some(w) = w? {
            if best.as_ref().is_none_or(|b| w.magnitude > b.magnitude) {
                best = Some(w);
            }
        }
    }
    Ok(best)
}

fn or_zero(m: Option<Mat>, n: usize) -> Mat {
    m.unwrap_or_else(|| Mat::zeros(n, n))
}

/// Blockwise inverse of a one-leg element.
pub fn invert_element(a: &AlgTensor) -> Option<AlgTensor> {
    let shape = a.shape();
    let blocks: Option<Vec<Mat>> = (0..shape.len()).map(|r| a.block_or_zero(&[r]).inverse()).collect();
    AlgTensor::element(shape, blocks?).ok()
}

/// Blocks reached by S from each block.
fn block_targets(s: &UnitMap, shape: &BlockShape) -> Vec<BTreeSet<usize>> {
    (0..shape.len())
        .map(|r| {
            let n = shape.dim(r);
            let mut set = BTreeSet::new();
            for i in 0..n {
                for j in 0..n {
                    set.extend(s.image(r, i, j).blocks().map(|(k, _)| k[0]));
                }
            }
            set
        })
        .collect()
}

/// Which pair contraction of a four-leg tensor to perform.
#[derive(Clone, Copy)]
enum PairMap {
    /// a⊗b⊗c⊗d ↦ S(b)·m·c ⊗ S(a)·m·d
    Left,
    /// a⊗b⊗c⊗d ↦ a·m·S(d) ⊗ b·m·S(c)
    Right,
}

impl WqhPresentation {
    pub fn new(
        delta: CoproductMap,
        counit: usize,
        phi: AlgTensor,
        phi_inv: AlgTensor,
    ) -> Result<WqhPresentation, WqhError> {
        let shape = delta.shape().clone();
        if counit >= shape.len() || shape.dim(counit) != 1 {
            return Err(WqhError::Malformed("counit block must be one-dimensional".into()));
        }
        for (name, t) in [("associator", &phi), ("inverse associator", &phi_inv)] {
            if t.legs() != 3 || **t.shape() != *shape {
                return Err(WqhError::Malformed(format!("{name} must be a three-leg tensor over the algebra")));
            }
        }
        Ok(WqhPresentation { shape, counit, delta, phi, phi_inv, antipode: None, star: false })
    }

    /// Coassociative presentation with the trivial associator Φ = Δ⊗1(Δ(I)).
    pub fn with_trivial_associator(delta: CoproductMap, counit: usize) -> Result<WqhPresentation, WqhError> {
        let p3 = delta.apply_slot(&delta.delta_identity(), 0)?;
        WqhPresentation::new(delta, counit, p3.clone(), p3)
    }

    pub fn with_antipode(mut self, antipode: Antipode) -> Result<WqhPresentation, WqhError> {
        if antipode.alpha.legs() != 1 || antipode.beta.legs() != 1 {
            return Err(WqhError::Malformed("α and β must be one-leg elements".into()));
        }
        self.antipode = Some(antipode);
        Ok(self)
    }

    pub fn with_star(mut self, star: bool) -> WqhPresentation {
        self.star = star;
        self
    }

    pub fn identity(&self, legs: usize) -> AlgTensor {
        AlgTensor::identity(&self.shape, legs)
    }

    pub fn unit(&self, r: usize, i: usize, j: usize) -> AlgTensor {
        AlgTensor::matrix_unit(&self.shape, r, i, j)
    }

    /// P = Δ(I).
    pub fn p(&self) -> AlgTensor {
        self.delta.delta_identity()
    }

    /// P₃ = Δ⊗1(Δ(I)).
    pub fn p3(&self) -> AlgTensor {
        self.delta.apply_slot(&self.p(), 0).expect("two legs")
    }

    /// Q₃ = 1⊗Δ(Δ(I)).
    pub fn q3(&self) -> AlgTensor {
        self.delta.apply_slot(&self.p(), 1).expect("two legs")
    }

    pub fn counit_of(&self, a: &AlgTensor) -> CycScalar {
        a.eval_scalar(self.counit)
    }

    fn antipode_ref(&self) -> Result<&Antipode, WqhError> {
        self.antipode.as_ref().ok_or(WqhError::NoAntipode)
    }

    /// Δ(x) for x a 1-leg element given by the stored table on units.
    fn delta_unit(&self, r: usize, i: usize, j: usize) -> &AlgTensor {
        self.delta.unit_image(r, i, j)
    }

    /// Checks the weak quasi-bialgebra axioms.
    pub fn verify_wqb(&self) -> Report {
        let mut rep = Report::new("weak quasi-bialgebra axioms");
        rep.push("coproduct is an algebra homomorphism", Verdict::Pass, Some("validated on load".into()));
        let e = self.counit;
        let counit_left = unit_residual(&self.shape, |r, i, j| Ok((self.delta_unit(r, i, j).eval_leg(0, e)?, self.unit(r, i, j))));
        let counit_right = unit_residual(&self.shape, |r, i, j| Ok((self.delta_unit(r, i, j).eval_leg(1, e)?, self.unit(r, i, j))));
        rep.equality("counit (ε⊗1)Δ = id", counit_left.expect("counit block is one-dimensional"));
        rep.equality("counit (1⊗ε)Δ = id", counit_right.expect("counit block is one-dimensional"));
        if self.star {
            let ok = units(&self.shape).into_iter().all(|(r, i, j)| {
                let a = self.unit(r, i, j);
                self.counit_of(&a.adjoint()) == self.counit_of(&a).conj()
            });
            rep.flag("ε(a*) = conj ε(a)", ok, None);
        }

        let p = self.p();
        let p3 = self.p3();
        let q3 = self.q3();
        let prod = |a: &AlgTensor, b: &AlgTensor| a.mul(b).expect("same legs");
        rep.equality("associator domain Φ⁻¹Φ = Δ⊗1(Δ(I))", prod(&self.phi_inv, &self.phi).residual(&p3));
        rep.equality("associator range ΦΦ⁻¹ = 1⊗Δ(Δ(I))", prod(&self.phi, &self.phi_inv).residual(&q3));
        let support = AlgTensor::product(&[&q3, &self.phi, &p3])
            .expect("same legs")
            .residual(&self.phi)
            .or_else(|| AlgTensor::product(&[&p3, &self.phi_inv, &q3]).expect("same legs").residual(&self.phi_inv));
        rep.equality("associator support Φ = Q₃ΦP₃, Φ⁻¹ = P₃Φ⁻¹Q₃", support);

        let quasi = unit_residual(&self.shape, |r, i, j| {
            let d = self.delta_unit(r, i, j);
            let left = self.phi.mul(&self.delta.apply_slot(d, 0)?)?;
            let right = self.delta.apply_slot(d, 1)?.mul(&self.phi)?;
            Ok((left, right))
        });
        rep.equality("quasi-coassociativity ΦΔ⊗1(Δ(a)) = 1⊗Δ(Δ(a))Φ", quasi.expect("three legs"));
        rep.equality("pentagon", self.pentagon_residual());

        let mid = self.phi.eval_leg(1, e).expect("counit block");
        rep.equality("normalization 1⊗ε⊗1(Φ) = Δ(I)", mid.residual(&p));
        let first = self.phi.eval_leg(0, e).expect("counit block").residual(&p);
        let last = self.phi.eval_leg(2, e).expect("counit block").residual(&p);
        rep.equality("derived normalization ε⊗1⊗1(Φ) = Δ(I)", first);
        rep.equality("derived normalization 1⊗1⊗ε(Φ) = Δ(I)", last);
        rep
    }

    /// (1⊗1⊗Δ(Φ))(Δ⊗1⊗1(Φ)) against (I⊗Φ)(1⊗Δ⊗1(Φ))(Φ⊗I), one 4-tuple at a time.
    pub fn pentagon_residual(&self) -> Option<Witness> {
        let id1 = self.identity(1);
        let keys = self.shape.keys(4);
        lazy_residual(&self.shape, &keys, |k| {
            let n = self.shape.tuple_dim(k);
            let lhs = self.delta.slot_block(&self.phi, 2, k).mul(&self.delta.slot_block(&self.phi, 0, k));
            let left = or_zero(AlgTensor::outer_block(&id1, &self.phi, k), n);
            let right = or_zero(AlgTensor::outer_block(&self.phi, &id1, k), n);
            let rhs = left.mul(&self.delta.slot_block(&self.phi, 1, k)).mul(&right);
            (lhs, rhs)
        })
    }

    /// Checks the antipode axioms; errors only when no antipode is present.
    pub fn verify_antipode(&self) -> Result<Report, WqhError> {
        let ap = self.antipode_ref()?;
        let mut rep = Report::new("antipode axioms");
        let s = &ap.map;
        rep.flag("S is unital", s.is_unital(), None);
        rep.flag("S is bijective", s.inverse().is_some(), None);
        rep.equality("S is anti-multiplicative", s.anti_multiplicative_witness());
        let eps_ok = units(&self.shape)
            .into_iter()
            .all(|(r, i, j)| self.counit_of(s.image(r, i, j)) == self.counit_of(&self.unit(r, i, j)));
        rep.flag("ε∘S = ε", eps_ok, None);

        let left = unit_residual(&self.shape, |r, i, j| {
            let d = self.delta_unit(r, i, j);
            let lhs = s.apply_leg(d, 0).contract(&[&ap.alpha]);
            Ok((lhs, ap.alpha.scale(&self.counit_of(&self.unit(r, i, j)))))
        })
        .expect("one-leg contraction");
        rep.equality("S(a₁)αa₂ = ε(a)α", left);
        let right = unit_residual(&self.shape, |r, i, j| {
            let d = self.delta_unit(r, i, j);
            let lhs = s.apply_leg(d, 1).contract(&[&ap.beta]);
            Ok((lhs, ap.beta.scale(&self.counit_of(&self.unit(r, i, j)))))
        })
        .expect("one-leg contraction");
        rep.equality("a₁βS(a₂) = ε(a)β", right);

        let id = self.identity(1);
        let x = s.apply_leg(&self.phi, 1).contract(&[&ap.beta, &ap.alpha]);
        rep.equality("xβS(y)αz = I", x.residual(&id));
        let y = s.apply_leg(&s.apply_leg(&self.phi_inv, 0), 2).contract(&[&ap.alpha, &ap.beta]);
        rep.equality("S(x′)αy′βS(z′) = I", y.residual(&id));
        Ok(rep)
    }

    /// The strong antipode ad(α⁻¹)∘S when α, β are invertible with β = α⁻¹.
    pub fn strong_antipode(&self) -> Result<StrongAntipode, WqhError> {
        let ap = self.antipode_ref()?;
        let Some(alpha_inv) = invert_element(&ap.alpha) else {
            return Ok(StrongAntipode::NotStrong { reason: "α is not invertible".into(), witness: None });
        };
        if let Some(w) = ap.beta.residual(&alpha_inv) {
            let reason = if invert_element(&ap.beta).is_none() { "β is not invertible" } else { "β ≠ α⁻¹" };
            return Ok(StrongAntipode::NotStrong { reason: reason.into(), witness: Some(w) });
        }
        let map = UnitMap::from_fn(&self.shape, |r, i, j| {
            AlgTensor::product(&[&alpha_inv, ap.map.image(r, i, j), &ap.alpha]).expect("one leg")
        });
        let strong = Antipode { map, alpha: self.identity(1), beta: self.identity(1) };
        let mut copy = self.clone();
        copy.antipode = Some(strong.clone());
        let rep = copy.verify_antipode()?;
        if let Some(c) = rep.failures().next() {
            return Ok(StrongAntipode::NotStrong {
                reason: format!("ad(α⁻¹)∘S fails `{}`", c.name),
                witness: c.witness.clone(),
            });
        }
        Ok(StrongAntipode::Strong(strong))
    }

    /// Φ_T and Φ_T⁻¹ for a candidate twist, without validating it.
    pub fn twisted_associator(&self, tw: &Twist) -> Result<(AlgTensor, AlgTensor), WqhError> {
        let id = self.identity(1);
        let i_t = id.outer(&tw.t)?;
        let t_i = tw.t.outer(&id)?;
        let i_tinv = id.outer(&tw.tinv)?;
        let tinv_i = tw.tinv.outer(&id)?;
        let one_delta_t = self.delta.apply_slot(&tw.t, 1)?;
        let delta_one_t = self.delta.apply_slot(&tw.t, 0)?;
        let one_delta_tinv = self.delta.apply_slot(&tw.tinv, 1)?;
        let delta_one_tinv = self.delta.apply_slot(&tw.tinv, 0)?;
        let phi = AlgTensor::product(&[&i_t, &one_delta_t, &self.phi, &delta_one_tinv, &tinv_i])?;
        let phi_inv = AlgTensor::product(&[&t_i, &delta_one_t, &self.phi_inv, &one_delta_tinv, &i_tinv])?;
        Ok((phi, phi_inv))
    }

    /// The twisted presentation A_T.
    pub fn twist(&self, tw: &Twist) -> Result<WqhPresentation, WqhError> {
        tw.validate(self)?;
        let table = self
            .delta
            .table()
            .iter()
            .map(|row| row.iter().map(|d| AlgTensor::product(&[&tw.t, d, &tw.tinv])).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let delta = CoproductMap::from_table(&self.shape, table)?;
        let (phi, phi_inv) = self.twisted_associator(tw)?;
        let mut out = WqhPresentation::new(delta, self.counit, phi, phi_inv)?.with_star(self.star);
        if let Some(ap) = &self.antipode {
            let alpha = ap.map.apply_leg(&tw.tinv, 0).contract(&[&ap.alpha]);
            let beta = ap.map.apply_leg(&tw.t, 1).contract(&[&ap.beta]);
            out.antipode = Some(Antipode { map: ap.map.clone(), alpha, beta });
        }
        Ok(out)
    }

    /// The w-bialgebra relations built from P = Δ(I).
    pub fn is_w_bialgebra(&self) -> Report {
        let mut rep = Report::new("w-bialgebra relations");
        let p = self.p();
        let p3 = self.p3();
        let q3 = self.q3();
        let int1 = unit_residual(&self.shape, |r, i, j| {
            let d = self.delta_unit(r, i, j);
            Ok((q3.mul(&self.delta.apply_slot(d, 0)?)?, self.delta.apply_slot(d, 1)?.mul(&p3)?))
        });
        rep.equality("Q₃·Δ⊗1(Δ(a)) = 1⊗Δ(Δ(a))·P₃", int1.expect("three legs"));
        let int2 = unit_residual(&self.shape, |r, i, j| {
            let d = self.delta_unit(r, i, j);
            Ok((p3.mul(&self.delta.apply_slot(d, 1)?)?, self.delta.apply_slot(d, 0)?.mul(&q3)?))
        });
        rep.equality("P₃·1⊗Δ(Δ(a)) = Δ⊗1(Δ(a))·Q₃", int2.expect("three legs"));
        let pqp = AlgTensor::product(&[&p3, &q3, &p3]).expect("three legs");
        let qpq = AlgTensor::product(&[&q3, &p3, &q3]).expect("three legs");
        rep.equality("P₃Q₃P₃ = P₃", pqp.residual(&p3));
        rep.equality("Q₃P₃Q₃ = Q₃", qpq.residual(&q3));

        let id = self.identity(1);
        let mixed = id.outer(&p).expect("legs").mul(&p.outer(&id).expect("legs")).expect("legs");
        let keys = self.shape.keys(4);
        let cocycle = lazy_residual(&self.shape, &keys, |k| {
            let q4 = self.delta.slot_block(&q3, 2, k);
            let p4 = self.delta.slot_block(&p3, 0, k);
            let lhs = q4.mul(&self.delta.slot_block(&mixed, 1, k)).mul(&p4);
            let rhs = q4.mul(&self.delta.slot_block(&q3, 0, k)).mul(&p4);
            (lhs, rhs)
        });
        rep.equality("Q₄·1⊗Δ⊗1(I⊗P·P⊗I)·P₄ = Q₄·Δ⊗Δ(P)·P₄", cocycle);
        rep.equality("Φ = Q₃P₃", q3.mul(&p3).expect("legs").residual(&self.phi));
        rep.equality("Φ⁻¹ = P₃Q₃", p3.mul(&q3).expect("legs").residual(&self.phi_inv));
        rep
    }

    /// 1⊗Δ(F⁻¹)·I⊗F⁻¹·F⊗I·Δ⊗1(F) and Δ⊗1(F⁻¹)·F⁻¹⊗I·I⊗F·1⊗Δ(F).
    fn coboundary_pair(&self, f: &Twist) -> Result<(AlgTensor, AlgTensor), WqhError> {
        let id = self.identity(1);
        let a = AlgTensor::product(&[
            &self.delta.apply_slot(&f.tinv, 1)?,
            &id.outer(&f.tinv)?,
            &f.t.outer(&id)?,
            &self.delta.apply_slot(&f.t, 0)?,
        ])?;
        let b = AlgTensor::product(&[
            &self.delta.apply_slot(&f.tinv, 0)?,
            &f.tinv.outer(&id)?,
            &id.outer(&f.t)?,
            &self.delta.apply_slot(&f.t, 1)?,
        ])?;
        Ok((a, b))
    }

    pub fn two_cocycle_report(&self, f: &Twist) -> Result<Report, WqhError> {
        let (a, b) = self.coboundary_pair(f)?;
        let p3 = self.p3();
        let q3 = self.q3();
        let mut rep = Report::new("2-cocycle equations");
        rep.equality("1⊗Δ(F⁻¹)·I⊗F⁻¹·F⊗I·Δ⊗1(F) = Q₃P₃", a.residual(&q3.mul(&p3)?));
        rep.equality("Δ⊗1(F⁻¹)·F⁻¹⊗I·I⊗F·1⊗Δ(F) = P₃Q₃", b.residual(&p3.mul(&q3)?));
        Ok(rep)
    }

    pub fn is_two_cocycle(&self, f: &Twist) -> Result<bool, WqhError> {
        Ok(self.two_cocycle_report(f)?.passed())
    }

    pub fn three_coboundary_report(&self, f: &Twist) -> Result<Report, WqhError> {
        let (a, b) = self.coboundary_pair(f)?;
        let mut rep = Report::new("3-coboundary equations");
        rep.equality("Φ = 1⊗Δ(F⁻¹)·I⊗F⁻¹·F⊗I·Δ⊗1(F)", a.residual(&self.phi));
        rep.equality("Φ⁻¹ = Δ⊗1(F⁻¹)·F⁻¹⊗I·I⊗F·1⊗Δ(F)", b.residual(&self.phi_inv));
        Ok(rep)
    }

    pub fn is_three_coboundary(&self, f: &Twist) -> Result<bool, WqhError> {
        Ok(self.three_coboundary_report(f)?.passed())
    }

    /// Applies a pair contraction to a lazily given four-leg tensor.
    fn pair_map<F>(&self, s: &UnitMap, mid: &AlgTensor, kind: PairMap, block: F) -> AlgTensor
    where
        F: Fn(&Key) -> Mat + Sync + Send,
    {
        let targets = block_targets(s, &self.shape);
        let (s_legs, first, second) = match kind {
            PairMap::Left => ([0, 1], (1, 2), (0, 3)),
            PairMap::Right => ([2, 3], (0, 3), (1, 2)),
        };
        let keys: Vec<Key> = self
            .shape
            .keys(4)
            .into_iter()
            .filter(|k| match kind {
                PairMap::Left => targets[k[1]].contains(&k[2]) && targets[k[0]].contains(&k[3]),
                PairMap::Right => targets[k[3]].contains(&k[0]) && targets[k[2]].contains(&k[1]),
            })
            .collect();
        let parts = crate::par::map_collect(&keys, |k| {
            let m = block(k);
            if m.is_zero() {
                return Vec::new();
            }
            let t = AlgTensor::from_blocks(&self.shape, 4, [(k.clone(), m)]).expect("valid block");
            let t = s.apply_leg(&s.apply_leg(&t, s_legs[0]), s_legs[1]);
            t.blocks()
                .filter_map(|(k2, m2)| {
                    contract_pairs_block(&self.shape, k2, m2, (first.0, first.1, mid), (second.0, second.1, mid))
                })
                .collect()
        });
        let mut out = AlgTensor::zero(&self.shape, 2);
        for (k, m) in parts.into_iter().flatten() {
            out.accumulate(k, m);
        }
        out
    }

    /// γ = V((I⊗Φ⁻¹)(1⊗1⊗Δ(Φ))) for antipode data (S, α).
    fn gamma(&self, ap: &Antipode) -> AlgTensor {
        let id1 = self.identity(1);
        self.pair_map(&ap.map, &ap.alpha, PairMap::Left, |k| {
            let n = self.shape.tuple_dim(k);
            or_zero(AlgTensor::outer_block(&id1, &self.phi_inv, k), n).mul(&self.delta.slot_block(&self.phi, 2, k))
        })
    }

    /// δ = V′((Δ⊗1⊗1(Φ))(Φ⁻¹⊗I)).
    fn delta_elem(&self, ap: &Antipode) -> AlgTensor {
        let id1 = self.identity(1);
        self.pair_map(&ap.map, &ap.beta, PairMap::Right, |k| {
            let n = self.shape.tuple_dim(k);
            self.delta.slot_block(&self.phi, 0, k).mul(&or_zero(AlgTensor::outer_block(&self.phi_inv, &id1, k), n))
        })
    }

    /// γ from V((Φ⊗I)(Δ⊗1⊗1(Φ⁻¹))).
    fn gamma_alt(&self, ap: &Antipode) -> AlgTensor {
        let id1 = self.identity(1);
        self.pair_map(&ap.map, &ap.alpha, PairMap::Left, |k| {
            let n = self.shape.tuple_dim(k);
            or_zero(AlgTensor::outer_block(&self.phi, &id1, k), n).mul(&self.delta.slot_block(&self.phi_inv, 0, k))
        })
    }

    /// δ from V′((1⊗1⊗Δ(Φ⁻¹))(I⊗Φ)).
    fn delta_alt(&self, ap: &Antipode) -> AlgTensor {
        let id1 = self.identity(1);
        self.pair_map(&ap.map, &ap.beta, PairMap::Right, |k| {
            let n = self.shape.tuple_dim(k);
            self.delta.slot_block(&self.phi_inv, 2, k).mul(&or_zero(AlgTensor::outer_block(&id1, &self.phi, k), n))
        })
    }

    /// The twist f relating Δ∘S to S⊗S∘Δ^op, via the strong antipode.
    pub fn f_element(&self) -> Result<FElement, WqhError> {
        let strong = match self.strong_antipode()? {
            StrongAntipode::Strong(a) => a,
            StrongAntipode::NotStrong { reason, .. } => return Err(WqhError::NoStrongAntipode(reason)),
        };
        let s = &strong.map;
        let f = self.gamma(&strong);
        let finv = self.delta_elem(&strong);
        let mut rep = Report::new("f-element relations");
        let p = self.p();
        let ss = |t: &AlgTensor| s.apply_leg(&s.apply_leg(t, 0), 1);
        let range = ss(&self.delta.apply_op(&self.identity(1)));
        rep.equality("f⁻¹f = Δ(I)", finv.mul(&f)?.residual(&p));
        rep.equality("ff⁻¹ = S⊗S(Δ^op(I))", f.mul(&finv)?.residual(&range));
        let inter = unit_residual(&self.shape, |r, i, j| {
            let lhs = AlgTensor::product(&[&f, &self.delta.apply(s.image(r, i, j)), &finv])?;
            let rhs = ss(&self.delta.apply_op(&self.unit(r, i, j)));
            Ok((lhs, rhs))
        })?;
        rep.equality("fΔ(S(a))f⁻¹ = S⊗S(Δ^op(a))", inter);
        let (phi_f, _) = self.twisted_associator(&Twist { t: f.clone(), tinv: finv.clone() })?;
        let reversed = self.phi.permute_legs(&[2, 1, 0])?;
        let sss = s.apply_leg(&s.apply_leg(&s.apply_leg(&reversed, 0), 1), 2);
        rep.equality("S⊗S⊗S(Φ₃₂₁) = Φ_f", sss.residual(&phi_f));
        rep.equality("γ from (Φ⊗I)(Δ⊗1⊗1(Φ⁻¹))", self.gamma_alt(&strong).residual(&f));
        rep.equality("δ from (1⊗1⊗Δ(Φ⁻¹))(I⊗Φ)", self.delta_alt(&strong).residual(&finv));
        Ok(FElement { f, finv, report: rep })
    }

    /// With coassociative Δ, Φ = Δ⊗1(Δ(I)) = Φ⁻¹ and an antipode, reports whether Δ(I) = I⊗I.
    pub fn hopf_degeneracy_check(&self) -> Result<bool, WqhError> {
        let coassoc = unit_residual(&self.shape, |r, i, j| {
            let d = self.delta_unit(r, i, j);
            Ok((self.delta.apply_slot(d, 0)?, self.delta.apply_slot(d, 1)?))
        })?;
        if let Some(w) = coassoc {
            return Err(WqhError::Precondition(format!("coproduct is not coassociative: {w}")));
        }
        let p3 = self.p3();
        if self.phi != p3 || self.phi_inv != p3 {
            return Err(WqhError::Precondition("associator is not Δ⊗1(Δ(I))".into()));
        }
        let wqb = self.verify_wqb();
        if let Some(c) = wqb.failures().next() {
            return Err(WqhError::Precondition(format!("axiom `{}` fails", c.name)));
        }
        let ant = self.verify_antipode()?;
        if let Some(c) = ant.failures().next() {
            return Err(WqhError::Precondition(format!("antipode axiom `{}` fails", c.name)));
        }
        Ok(self.p() == self.identity(2))
    }

    /// Sectioned text form; see [`WqhPresentation::from_text`].
    pub fn to_text(&self) -> String {
        let mut secs = shape_sections(&self.shape);
        secs[0].body.push_str(&format!("counit: {}\nstar: {}\n", self.shape.label(self.counit), self.star));
        for (r, i, j) in units(&self.shape) {
            let d = self.delta_unit(r, i, j);
            if !d.is_zero() {
                secs.push(Section::new("delta", &unit_args(&self.shape, r, i, j), d.to_text()));
            }
        }
        secs.push(Section::new("phi", &[], self.phi.to_text()));
        secs.push(Section::new("phi_inv", &[], self.phi_inv.to_text()));
        if let Some(ap) = &self.antipode {
            for (r, i, j) in units(&self.shape) {
                let img = ap.map.image(r, i, j);
                if !img.is_zero() {
                    secs.push(Section::new("antipode", &unit_args(&self.shape, r, i, j), img.to_text()));
                }
            }
            secs.push(Section::new("alpha", &[], ap.alpha.to_text()));
            secs.push(Section::new("beta", &[], ap.beta.to_text()));
        }
        textfmt::render(&secs)
    }

    /// Parses `[shape]`, `[gram L]`, `[delta L i j]`, `[phi]`, `[phi_inv]`,
    /// `[antipode L i j]`, `[alpha]`, `[beta]` sections; other sections are ignored.
    pub fn from_text(text: &str) -> Result<WqhPresentation, WqhError> {
        let secs = textfmt::parse(text)?;
        Self::from_sections(&secs)
    }

    pub fn from_sections(secs: &[Section]) -> Result<WqhPresentation, WqhError> {
        let shape = parse_shape(secs)?;
        let head = secs.iter().find(|s| s.name == "shape").expect("checked by parse_shape");
        let counit_label = head.field("counit").ok_or_else(|| WqhError::Malformed("missing counit".into()))?;
        let counit = shape
            .index_of(&counit_label)
            .ok_or_else(|| WqhError::Malformed(format!("unknown counit block `{counit_label}`")))?;
        let star = head.field("star").is_some_and(|v| v == "true");
        let mut table: Vec<Vec<AlgTensor>> =
            (0..shape.len()).map(|r| vec![AlgTensor::zero(&shape, 2); shape.dim(r) * shape.dim(r)]).collect();
        let mut s_images: Option<Vec<Vec<AlgTensor>>> = None;
        let (mut phi, mut phi_inv, mut alpha, mut beta) = (None, None, None, None);
        for sec in secs {
            match sec.name.as_str() {
                "delta" => {
                    let (r, i, j) = parse_unit_args(&shape, &sec.args)?;
                    table[r][i * shape.dim(r) + j] = AlgTensor::from_text(&shape, 2, &sec.body)?;
                }
                "antipode" => {
                    let (r, i, j) = parse_unit_args(&shape, &sec.args)?;
                    let imgs = s_images.get_or_insert_with(|| {
                        (0..shape.len()).map(|q| vec![AlgTensor::zero(&shape, 1); shape.dim(q) * shape.dim(q)]).collect()
                    });
                    imgs[r][i * shape.dim(r) + j] = AlgTensor::from_text(&shape, 1, &sec.body)?;
                }
                "phi" => phi = Some(AlgTensor::from_text(&shape, 3, &sec.body)?),
                "phi_inv" => phi_inv = Some(AlgTensor::from_text(&shape, 3, &sec.body)?),
                "alpha" => alpha = Some(AlgTensor::from_text(&shape, 1, &sec.body)?),
                "beta" => beta = Some(AlgTensor::from_text(&shape, 1, &sec.body)?),
                _ => {}
            }
        }
        let delta = CoproductMap::from_table(&shape, table)?;
        let phi = phi.ok_or_else(|| WqhError::Malformed("missing [phi]".into()))?;
        let phi_inv = phi_inv.ok_or_else(|| WqhError::Malformed("missing [phi_inv]".into()))?;
        let mut w = WqhPresentation::new(delta, counit, phi, phi_inv)?.with_star(star);
        if let Some(imgs) = s_images {
            let map = UnitMap::new(&shape, imgs)?;
            let alpha = alpha.ok_or_else(|| WqhError::Malformed("antipode without [alpha]".into()))?;
            let beta = beta.ok_or_else(|| WqhError::Malformed("antipode without [beta]".into()))?;
            w = w.with_antipode(Antipode { map, alpha, beta })?;
        }
        Ok(w)
    }
}

fn unit_args(shape: &BlockShape, r: usize, i: usize, j: usize) -> Vec<String> {
    vec![shape.label(r).to_string(), i.to_string(), j.to_string()]
}

fn parse_unit_args(shape: &BlockShape, args: &[String]) -> Result<(usize, usize, usize), WqhError> {
    let bad = || WqhError::Malformed(format!("bad matrix unit `{}`", args.join(" ")));
    if args.len() != 3 {
        return Err(bad());
    }
    let r = shape.index_of(&args[0]).ok_or_else(bad)?;
    let i: usize = args[1].parse().map_err(|_| bad())?;
    let j: usize = args[2].parse().map_err(|_| bad())?;
    if i >= shape.dim(r) || j >= shape.dim(r) {
        return Err(bad());
    }
    Ok((r, i, j))
}

/// `[shape]` with labels and dims, plus one `[gram L]` section per nontrivial weight vector.
pub fn shape_sections(shape: &BlockShape) -> Vec<Section> {
    let dims: Vec<String> = shape.dims().iter().map(usize::to_string).collect();
    let body = format!("labels: {}\ndims: {}\n", shape.labels().join(" "), dims.join(" "));
    let mut out = vec![Section::new("shape", &[], body)];
    for r in 0..shape.len() {
        if shape.gram(r).iter().any(|h| !h.is_one()) {
            let line: Vec<String> = shape.gram(r).iter().map(CycScalar::to_string).collect();
            out.push(Section::new("gram", &[shape.label(r).to_string()], line.join(" ") + "\n"));
        }
    }
    out
}

pub fn parse_shape(secs: &[Section]) -> Result<Arc<BlockShape>, WqhError> {
    let head = secs
        .iter()
        .find(|s| s.name == "shape")
        .ok_or_else(|| WqhError::Malformed("missing [shape] section".into()))?;
    let labels: Vec<String> = head
        .field("labels")
        .ok_or_else(|| WqhError::Malformed("missing labels".into()))?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let dims: Vec<usize> = head
        .field("dims")
        .ok_or_else(|| WqhError::Malformed("missing dims".into()))?
        .split_whitespace()
        .map(|d| d.parse().map_err(|_| WqhError::Malformed(format!("bad dimension `{d}`"))))
        .collect::<Result<_, _>>()?;
    let mut shape = BlockShape::new(dims, labels)?;
    let grams: Vec<&Section> = secs.iter().filter(|s| s.name == "gram").collect();
    if !grams.is_empty() {
        let mut gram: Vec<Vec<CycScalar>> = (0..shape.len()).map(|r| vec![CycScalar::one(); shape.dim(r)]).collect();
        for g in grams {
            let label = g.args.first().ok_or_else(|| WqhError::Malformed("[gram] needs a block label".into()))?;
            let r = shape.index_of(label).ok_or_else(|| WqhError::Malformed(format!("unknown block `{label}`")))?;
            gram[r] = crate::blockalg::split_literals(g.body.trim())
                .into_iter()
                .map(crate::blockalg::parse_scalar)
                .collect::<Result<_, _>>()?;
        }
        shape = shape.with_gram(gram)?;
    }
    Ok(Arc::new(shape))
}

impl Twist {
    pub fn new(t: AlgTensor, tinv: AlgTensor) -> Twist {
        Twist { t, tinv }
    }

    /// The identity twist Δ(I).
    pub fn trivial(w: &WqhPresentation) -> Twist {
        let p = w.p();
        Twist { t: p.clone(), tinv: p }
    }

    /// A twist from T alone, with T⁻¹ the partial inverse on domain Δ(I).
    pub fn from_element(w: &WqhPresentation, t: AlgTensor) -> Result<Twist, WqhError> {
        let (tinv, _) = t.partial_inverse(&w.p(), None)?;
        Ok(Twist { t, tinv })
    }

    /// T⁻¹T = Δ(I) and ε⊗1(T) = 1⊗ε(T) = I.
    pub fn validate(&self, w: &WqhPresentation) -> Result<(), WqhError> {
        if self.t.legs() != 2 || self.tinv.legs() != 2 {
            return Err(WqhError::InvalidTwist("T and T⁻¹ must have two legs".into()));
        }
        if let Some(wit) = self.tinv.mul(&self.t)?.residual(&w.p()) {
            return Err(WqhError::InvalidTwist(format!("T⁻¹T ≠ Δ(I): {wit}")));
        }
        let id = w.identity(1);
        for leg in 0..2 {
            if let Some(wit) = self.t.eval_leg(leg, w.counit)?.residual(&id) {
                return Err(WqhError::InvalidTwist(format!("counit on leg {leg} is not I: {wit}")));
            }
        }
        Ok(())
    }

    /// The twist `outer ∘ self`: first self, then `outer` on the twisted algebra.
    pub fn then(&self, outer: &Twist) -> Result<Twist, WqhError> {
        Ok(Twist { t: outer.t.mul(&self.t)?, tinv: self.tinv.mul(&outer.tinv)? })
    }
}

#[cfg(test)]
mod tests;
