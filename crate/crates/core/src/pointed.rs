//! Normalized 3-cocycles on cyclic groups, the quasi-Hopf algebras
//! Fun_ω(Z_N), cochain twists and the strong-antipode obstruction.

use std::sync::Arc;

use smallvec::smallvec;

use crate::blockalg::{AlgTensor, BlockShape, CoproductMap, Mat, UnitMap};
use crate::scalars::{cyc, CycScalar};
use crate::textfmt::{self, Section};
use crate::wqh::{Antipode, Twist, WqhError, WqhPresentation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PointedError {
    #[error("group order must be positive")]
    ZeroOrder,
    #[error("{0} is not an N-th root of unity")]
    NotRoot(String),
    #[error("cochain value at {0:?} is zero")]
    ZeroValue(Vec<usize>),
    #[error("cochain is not normalized at {0:?}")]
    NotNormalized(Vec<usize>),
    #[error("cocycle identity fails at {0:?}")]
    NotCocycle([usize; 4]),
    #[error("malformed cocycle file: {0}")]
    Format(String),
    #[error(transparent)]
    Wqh(#[from] WqhError),
}

/// Carry of addition mod `n`: ⌊(a+b)/n⌋ − ⌊a/n⌋ − ⌊b/n⌋.
pub fn carry(a: usize, b: usize, n: usize) -> usize {
    (a + b) / n - a / n - b / n
}

/// A normalized 3-cocycle ω: Z_N³ → C^×.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeCocycle {
    order: usize,
    values: Vec<CycScalar>,
}

/// A normalized 2-cochain F: Z_N² → C^×.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoCochain {
    order: usize,
    values: Vec<CycScalar>,
}

/// Outcome of solving F(g⁻¹,g)ω(g,g⁻¹,g) = F(g,g⁻¹).
#[derive(Debug, Clone, PartialEq)]
pub enum Obstruction {
    Solved(TwoCochain),
    /// g has order two and ω(g,g,g) = −1.
    ObstructedAt(usize),
}

impl ThreeCocycle {
    /// Validates nonzero values, normalization and the cocycle identity.
    pub fn new(order: usize, values: Vec<CycScalar>) -> Result<ThreeCocycle, PointedError> {
        if order == 0 {
            return Err(PointedError::ZeroOrder);
        }
        assert_eq!(values.len(), order.pow(3), "one value per triple");
        let w = ThreeCocycle { order, values };
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if w.get(a, b, c).is_zero() {
                        return Err(PointedError::ZeroValue(vec![a, b, c]));
                    }
                    if (a == 0 || b == 0 || c == 0) && !w.get(a, b, c).is_one() {
                        return Err(PointedError::NotNormalized(vec![a, b, c]));
                    }
                }
            }
        }
        if let Some(q) = w.cocycle_failure() {
            return Err(PointedError::NotCocycle(q));
        }
        Ok(w)
    }

    pub fn trivial(order: usize) -> ThreeCocycle {
        ThreeCocycle { order, values: vec![CycScalar::one(); order.pow(3)] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> CycScalar {
        let n = self.order;
        self.values[((a % n) * n + b % n) * n + c % n].clone()
    }

    /// First quadruple where ω(b,c,d)ω(a,bc,d)ω(a,b,c) ≠ ω(ab,c,d)ω(a,b,cd).
    pub fn cocycle_failure(&self) -> Option<[usize; 4]> {
        let n = self.order;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let lhs = &(&self.get(b, c, d) * &self.get(a, b + c, d)) * &self.get(a, b, c);
                        let rhs = &self.get(a + b, c, d) * &self.get(a, b, c + d);
                        if lhs != rhs {
                            return Some([a, b, c, d]);
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(CycScalar::is_one)
    }

    /// Pointwise product, again a cocycle.
    pub fn product(&self, other: &ThreeCocycle) -> ThreeCocycle {
        assert_eq!(self.order, other.order);
        ThreeCocycle { order: self.order, values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect() }
    }

    /// ω_F(g,h,k) = F(h,k)F(g,hk)ω(g,h,k)F⁻¹(gh,k)F⁻¹(g,h).
    pub fn twisted(&self, f: &TwoCochain) -> ThreeCocycle {
        assert_eq!(self.order, f.order);
        let n = self.order;
        let mut values = Vec::with_capacity(n.pow(3));
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    let num = &(&f.get(h, k) * &f.get(g, h + k)) * &self.get(g, h, k);
                    let den = &f.get(g + h, k) * &f.get(g, h);
                    values.push(&num * &den.inv().expect("nonzero cochain"));
                }
            }
        }
        ThreeCocycle { order: n, values }
    }

    /// Text form: `order: N` and one `a b c: value` line per nontrivial value.
    pub fn to_text(&self) -> String {
        let n = self.order;
        let mut body = String::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = self.get(a, b, c);
                    if !v.is_one() {
                        body.push_str(&format!("{a} {b} {c}: {v}\n"));
                    }
                }
            }
        }
        textfmt::render(&[Section::new("cocycle", &[], format!("order: {n}\n")), Section::new("values", &[], body)])
    }

    pub fn from_text(text: &str) -> Result<ThreeCocycle, PointedError> {
        let secs = textfmt::parse(text).map_err(|e| PointedError::Format(e.to_string()))?;
        let head = secs
            .iter()
            .find(|s| s.name == "cocycle")
            .ok_or_else(|| PointedError::Format("missing [cocycle]".into()))?;
        let n: usize = head
            .field("order")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| PointedError::Format("missing or bad order".into()))?;
        if n == 0 {
            return Err(PointedError::ZeroOrder);
        }
        let mut values = vec![CycScalar::one(); n.pow(3)];
        if let Some(sec) = secs.iter().find(|s| s.name == "values") {
            for (k, v) in sec.fields() {
                let idx: Vec<usize> = k
                    .split_whitespace()
                    .map(|t| t.parse::<usize>().ok().filter(|&x| x < n))
                    .collect::<Option<_>>()
                    .filter(|v: &Vec<usize>| v.len() == 3)
                    .ok_or_else(|| PointedError::Format(format!("bad triple `{k}`")))?;
                let val = crate::blockalg::parse_scalar(&v).map_err(|e| PointedError::Format(e.to_string()))?;
                values[(idx[0] * n + idx[1]) * n + idx[2]] = val;
            }
        }
        ThreeCocycle::new(n, values)
    }
}

/// ω_w(a,b,c) = w^{γ(a,b)c}.
pub fn omega_w(order: usize, w: &CycScalar) -> Result<ThreeCocycle, PointedError> {
    if order == 0 {
        return Err(PointedError::ZeroOrder);
    }
    if !w.pow(order as i64).is_ok_and(|p| p.is_one()) {
        return Err(PointedError::NotRoot(w.to_string()));
    }
    let n = order;
    let mut values = Vec::with_capacity(n.pow(3));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                values.push(w.pow((carry(a, b, n) * c) as i64).expect("root of unity is invertible"));
            }
        }
    }
    ThreeCocycle::new(n, values)
}

/// All N-th roots of unity ζ_N^k, k = 0…N−1.
pub fn roots_of_unity(order: usize) -> Vec<CycScalar> {
    (0..order as i64).map(|k| cyc(order as u32, k).expect("positive order")).collect()
}

impl TwoCochain {
    pub fn new(order: usize, values: Vec<CycScalar>) -> Result<TwoCochain, PointedError> {
        if order == 0 {
            return Err(PointedError::ZeroOrder);
        }
        assert_eq!(values.len(), order * order, "one value per pair");
        let f = TwoCochain { order, values };
        for g in 0..order {
            for h in 0..order {
                if f.get(g, h).is_zero() {
                    return Err(PointedError::ZeroValue(vec![g, h]));
                }
                if (g == 0 || h == 0) && !f.get(g, h).is_one() {
                    return Err(PointedError::NotNormalized(vec![g, h]));
                }
            }
        }
        Ok(f)
    }

    pub fn trivial(order: usize) -> TwoCochain {
        TwoCochain { order, values: vec![CycScalar::one(); order * order] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, g: usize, h: usize) -> CycScalar {
        let n = self.order;
        self.values[(g % n) * n + h % n].clone()
    }

    /// Coboundary δμ(g,h) = μ(g)μ(h)μ(gh)⁻¹ of a normalized 1-cochain.
    pub fn coboundary(mu: &[CycScalar]) -> Result<TwoCochain, PointedError> {
        let n = mu.len();
        let mut values = Vec::with_capacity(n * n);
        for g in 0..n {
            for h in 0..n {
                let inv = mu[(g + h) % n].inv().map_err(|_| PointedError::ZeroValue(vec![(g + h) % n]))?;
                values.push(&(&mu[g] * &mu[h]) * &inv);
            }
        }
        TwoCochain::new(n, values)
    }

    /// Twist T = Σ F(g,h) δ_g⊗δ_h with T⁻¹ the pointwise inverse.
    pub fn to_twist(&self, w: &WqhPresentation) -> Twist {
        let n = self.order;
        let mk = |inv: bool| {
            let blocks = (0..n).flat_map(|g| (0..n).map(move |h| (g, h))).map(|(g, h)| {
                let v = self.get(g, h);
                let v = if inv { v.inv().expect("nonzero cochain") } else { v };
                (smallvec![g, h], Mat::scalar(1, &v))
            });
            AlgTensor::from_blocks(&w.shape, 2, blocks).expect("one-dimensional blocks")
        };
        Twist::new(mk(false), mk(true))
    }
}

/// Fun_ω(Z_N): N one-dimensional blocks δ_g, Δ(δ_g) = Σ_{h+k=g} δ_h⊗δ_k,
/// Φ = Σ ω(g,h,k) δ_g⊗δ_h⊗δ_k, S(δ_g) = δ_{−g}, α(g) = ω(g,g⁻¹,g)⁻¹, β = 1.
pub fn fun_omega(omega: &ThreeCocycle) -> Result<WqhPresentation, PointedError> {
    let n = omega.order;
    let shape = Arc::new(BlockShape::numbered(vec![1; n], "g").map_err(WqhError::from)?);
    let table = (0..n)
        .map(|g| {
            let blocks = (0..n).map(|h| (smallvec![h, (g + n - h) % n], Mat::identity(1)));
            vec![AlgTensor::from_blocks(&shape, 2, blocks).expect("valid blocks")]
        })
        .collect();
    let delta = CoproductMap::from_table(&shape, table).map_err(WqhError::from)?;
    let triples = || (0..n).flat_map(move |a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c))));
    let phi = AlgTensor::from_blocks(&shape, 3, triples().map(|(a, b, c)| (smallvec![a, b, c], Mat::scalar(1, &omega.get(a, b, c)))))
        .map_err(WqhError::from)?;
    let phi_inv = AlgTensor::from_blocks(
        &shape,
        3,
        triples().map(|(a, b, c)| (smallvec![a, b, c], Mat::scalar(1, &omega.get(a, b, c).inv().expect("nonzero")))),
    )
    .map_err(WqhError::from)?;
    let map = UnitMap::from_fn(&shape, |g, _, _| AlgTensor::matrix_unit(&shape, (n - g) % n, 0, 0));
    let alpha: Vec<CycScalar> = (0..n).map(|g| omega.get(g, (n - g) % n, g).inv().expect("nonzero")).collect();
    let antipode = Antipode {
        map,
        alpha: AlgTensor::central(&shape, &alpha),
        beta: AlgTensor::identity(&shape, 1),
    };
    Ok(WqhPresentation::new(delta, 0, phi, phi_inv)?.with_antipode(antipode)?.with_star(true))
}

/// Solves F(g⁻¹,g)ω(g,g⁻¹,g) = F(g,g⁻¹) with a normalized F, or names an order-two obstruction.
pub fn antipode_obstruction(omega: &ThreeCocycle) -> Obstruction {
    let n = omega.order;
    let mut values = vec![CycScalar::one(); n * n];
    for g in 1..n {
        let ginv = n - g;
        let lambda = omega.get(g, ginv, g);
        if g == ginv {
            if !lambda.is_one() {
                return Obstruction::ObstructedAt(g);
            }
        } else if g < ginv {
            // F(g⁻¹, g) = 1 and F(g, g⁻¹) = ω(g, g⁻¹, g); the equation at g⁻¹ then
            // needs ω(g,g⁻¹,g)ω(g⁻¹,g,g⁻¹) = 1, which every normalized cocycle satisfies
            if !(&lambda * &omega.get(ginv, g, ginv)).is_one() {
                return Obstruction::ObstructedAt(g);
            }
            values[g * n + ginv] = lambda;
        }
    }
    Obstruction::Solved(TwoCochain { order: n, values })
}

/// Searches a normalized F with target = source_F, with row F(1,·) ranging over
/// `root_order`-th roots of unity; the remaining rows follow from the cocycle
/// equations with first argument the generator.
pub fn find_cohomology(source: &ThreeCocycle, target: &ThreeCocycle, root_order: usize) -> Option<TwoCochain> {
    assert_eq!(source.order, target.order);
    let n = source.order;
    if n == 1 {
        return Some(TwoCochain::trivial(1));
    }
    let rho: Vec<CycScalar> = target
        .values
        .iter()
        .zip(&source.values)
        .map(|(t, s)| t * &s.inv().expect("nonzero"))
        .collect();
    let rho_at = |g: usize, h: usize, k: usize| &rho[((g % n) * n + h % n) * n + k % n];
    let roots = roots_of_unity(root_order);
    let free = n - 1;
    let total = root_order.pow(free as u32);
    let candidates: Vec<usize> = (0..total).collect();
    let found = crate::par::map_collect(&candidates, |&idx| {
        let mut row1 = vec![CycScalar::one(); n];
        let mut rest = idx;
        for slot in row1.iter_mut().skip(1) {
            *slot = roots[rest % root_order].clone();
            rest /= root_order;
        }
        let mut f = vec![CycScalar::one(); n * n];
        f[n..2 * n].clone_from_slice(&row1);
        for h in 1..n - 1 {
            for k in 0..n {
                let num = &f[h * n + k] * &row1[(h + k) % n];
                let den = &row1[h] * rho_at(1, h, k);
                f[(h + 1) * n + k] = &num * &den.inv().ok()?;
            }
        }
        let cand = TwoCochain::new(n, f).ok()?;
        (source.twisted(&cand) == *target).then_some(cand)
    });
    found.into_iter().flatten().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;
    use crate::wqh::StrongAntipode;

    fn minus_one() -> CycScalar {
        CycScalar::from_i64(-1)
    }

    #[test]
    fn carry_values() {
        assert_eq!(carry(0, 1, 2), 0);
        assert_eq!(carry(1, 1, 2), 1);
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(carry(a, b, 5), carry(b, a, 5));
                assert!(carry(a, b, 5) <= 1);
            }
        }
    }

    #[test]
    fn omega_examples() {
        assert!(omega_w(3, &CycScalar::one()).unwrap().is_trivial());
        let w = omega_w(2, &minus_one()).unwrap();
        assert_eq!(w.get(1, 1, 1), minus_one());
        let z3 = omega_w(3, &cyc(3, 1).unwrap()).unwrap();
        assert_eq!(z3.cocycle_failure(), None);
        assert!(matches!(omega_w(3, &minus_one()), Err(PointedError::NotRoot(_))));
    }

    #[test]
    fn rejects_non_cocycle() {
        let mut vals = vec![CycScalar::one(); 8];
        vals[7] = cyc(4, 1).unwrap();
        assert!(matches!(ThreeCocycle::new(2, vals), Err(PointedError::NotCocycle(_))));
    }

    #[test]
    fn fun_z2_is_hopf() {
        let w = fun_omega(&ThreeCocycle::trivial(2)).unwrap();
        assert!(w.verify_wqb().passed());
        assert!(w.verify_antipode().unwrap().passed());
        assert!(w.hopf_degeneracy_check().unwrap());
    }

    #[test]
    fn fun_minus_one_alpha() {
        let w = fun_omega(&omega_w(2, &minus_one()).unwrap()).unwrap();
        let ap = w.antipode.as_ref().unwrap();
        assert_eq!(ap.alpha.block_or_zero(&[1]).get(0, 0), minus_one());
        assert!(w.verify_wqb().passed());
        assert!(w.verify_antipode().unwrap().passed());
        assert!(matches!(w.strong_antipode().unwrap(), StrongAntipode::NotStrong { .. }));
    }

    #[test]
    fn obstruction_cases() {
        assert_eq!(antipode_obstruction(&omega_w(2, &minus_one()).unwrap()), Obstruction::ObstructedAt(1));
        assert_eq!(antipode_obstruction(&ThreeCocycle::trivial(2)), Obstruction::Solved(TwoCochain::trivial(2)));
        for w in roots_of_unity(3) {
            assert!(matches!(antipode_obstruction(&omega_w(3, &w).unwrap()), Obstruction::Solved(_)));
        }
    }

    #[test]
    fn solved_obstruction_gives_strong_antipode_after_twist() {
        for n in [3, 4] {
            for w in roots_of_unity(n) {
                let omega = omega_w(n, &w).unwrap();
                let pres = fun_omega(&omega).unwrap();
                match antipode_obstruction(&omega) {
                    Obstruction::Solved(f) => {
                        let tw = pres.twist(&f.to_twist(&pres)).unwrap();
                        assert!(tw.strong_antipode().unwrap().strong().is_some(), "N={n} w={w}");
                    }
                    Obstruction::ObstructedAt(g) => {
                        assert_eq!(n % 2, 0);
                        assert_eq!(omega.get(g, g, g), minus_one());
                    }
                }
            }
        }
    }

    #[test]
    fn twist_matches_twisted_cocycle() {
        let omega = omega_w(3, &cyc(3, 1).unwrap()).unwrap();
        let mu = vec![CycScalar::one(), cyc(6, 1).unwrap(), cyc(6, 5).unwrap()];
        let mut vals = TwoCochain::coboundary(&mu).unwrap().values;
        vals[4] = &vals[4] * &cyc(3, 1).unwrap();
        let f = TwoCochain::new(3, vals).unwrap();
        let pres = fun_omega(&omega).unwrap();
        let twisted = pres.twist(&f.to_twist(&pres)).unwrap();
        let direct = fun_omega(&omega.twisted(&f)).unwrap();
        assert_eq!(twisted.phi, direct.phi);
        assert_eq!(twisted.phi_inv, direct.phi_inv);
        assert!(twisted.verify_wqb().passed());
    }

    #[test]
    fn coboundary_trivializes() {
        let mu = vec![CycScalar::one(), cyc(3, 1).unwrap(), cyc(3, 1).unwrap()];
        let f = TwoCochain::coboundary(&mu).unwrap();
        let triv = ThreeCocycle::trivial(3);
        assert!(triv.twisted(&f).is_trivial());
        assert!(find_cohomology(&triv, &triv.twisted(&f), 6).is_some());
    }

    #[test]
    fn classes_distinguished() {
        for n in 2..=3 {
            let roots = roots_of_unity(n);
            for (i, a) in roots.iter().enumerate() {
                for (j, b) in roots.iter().enumerate() {
                    let found = find_cohomology(&omega_w(n, a).unwrap(), &omega_w(n, b).unwrap(), 2 * n);
                    assert_eq!(found.is_some(), i == j, "N={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let w = omega_w(3, &cyc(3, 2).unwrap()).unwrap();
        assert_eq!(ThreeCocycle::from_text(&w.to_text()).unwrap(), w);
    }

    #[test]
    fn fun_omega_full_suite() {
        let w = fun_omega(&omega_w(3, &cyc(3, 1).unwrap()).unwrap()).unwrap();
        let rep = w.verify_wqb();
        assert!(rep.passed(), "{rep}");
        assert!(w.verify_antipode().unwrap().passed());
        assert_eq!(rep.verdict_of("pentagon"), Some(Verdict::Pass));
    }
}
