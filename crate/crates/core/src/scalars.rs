//! Exact arithmetic in cyclotomic fields Q(ζ_m).
//!
//! A [`CycScalar`] stores rational coefficients over the power basis
//! 1, ζ, …, ζ^{φ(m)−1}, reduced modulo the m-th cyclotomic polynomial, so
//! equality is coefficient equality. Small values use machine integers with
//! `i128` intermediates; anything that would overflow moves to `BigInt`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("cyclotomic order must be positive")]
    ZeroOrder,
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed scalar literal `{0}`")]
    Parse(String),
}

/// Per-order tables, built once and leaked so scalars can hold `&'static`.
pub struct Field {
    order: u32,
    degree: usize,
    /// Low coefficients of the monic cyclotomic polynomial.
    poly: Vec<i64>,
    /// Bits of growth one reduction step may add.
    step_bits: u32,
    /// Canonical coefficients of ζ^k for k < order.
    powers: Vec<Vec<i64>>,
    roots: Vec<Complex64>,
}

impl Field {
    pub fn get(order: u32) -> &'static Field {
        static CACHE: OnceLock<Mutex<HashMap<u32, &'static Field>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("field cache poisoned");
        if let Some(f) = guard.get(&order) {
            return f;
        }
        let f: &'static Field = Box::leak(Box::new(Field::build(order)));
        guard.insert(order, f);
        f
    }

    fn build(order: u32) -> Field {
        assert!(order > 0);
        let full = cyclotomic_poly(order as usize);
        let degree = full.len() - 1;
        let poly = full[..degree].to_vec();
        let max = poly.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let step_bits = 64 - (max + 1).leading_zeros();
        let mut powers = Vec::with_capacity(order as usize);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..order {
            powers.push(cur.clone());
            // multiply by x and reduce
            let top = cur[degree - 1];
            for j in (1..degree).rev() {
                cur[j] = cur[j - 1] - top * poly[j];
            }
            cur[0] = -top * poly[0];
        }
        let roots = (0..order)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / order as f64;
                Complex64::new(t.cos(), t.sin())
            })
            .collect();
        Field { order, degree, poly, step_bits, powers, roots }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Integer coefficients of Φ_n, lowest degree first.
fn cyclotomic_poly(n: usize) -> Vec<i64> {
    // x^n − 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let den = cyclotomic_poly(d);
            num = poly_div_exact(&num, &den);
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = num.len() - 1 - dd;
    let mut quo = vec![0i64; qd + 1];
    for k in (0..=qd).rev() {
        let c = rem[k + dd];
        quo[k] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[k + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quo
}

type Small = SmallVec<[i64; 8]>;

#[derive(Clone)]
enum Repr {
    Small { num: Small, den: i64 },
    Big { num: Vec<BigInt>, den: BigInt },
}

/// Exact element of Q(ζ_m).
#[derive(Clone)]
pub struct CycScalar {
    field: &'static Field,
    repr: Repr,
}

/// Floating value of a scalar with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Embedding {
    pub value: Complex64,
    pub error: f64,
}

/// Certified sign of a real quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Certified {
    Positive,
    NotPositive,
    Indeterminate,
}

fn bits(x: i64) -> u32 {
    64 - x.unsigned_abs().leading_zeros()
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

impl CycScalar {
    pub fn zero() -> Self {
        Self::from_i64(0)
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn from_i64(v: i64) -> Self {
        CycScalar {
            field: Field::get(1),
            repr: Repr::Small { num: SmallVec::from_slice(&[v]), den: 1 },
        }
    }

    pub fn from_ratio(n: i64, d: i64) -> Result<Self, ScalarError> {
        if d == 0 {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::from_parts_i128(Field::get(1), &[n as i128], d as i128))
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::from_parts_big(Field::get(1), vec![r.numer().clone()], r.denom().clone())
    }

    /// ζ_order^power.
    pub fn root(order: u32, power: i64) -> Result<Self, ScalarError> {
        if order == 0 {
            return Err(ScalarError::ZeroOrder);
        }
        let field = Field::get(order);
        let k = power.rem_euclid(order as i64) as usize;
        Ok(CycScalar {
            field,
            repr: Repr::Small { num: SmallVec::from_slice(&field.powers[k]), den: 1 },
        })
    }

    /// Σ coeffs[k] ζ_order^k with rational coefficients; any length is accepted.
    pub fn from_coeffs(order: u32, coeffs: &[BigRational]) -> Result<Self, ScalarError> {
        if order == 0 {
            return Err(ScalarError::ZeroOrder);
        }
        let field = Field::get(order);
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let mut num = vec![BigInt::zero(); field.degree];
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scaled = c.numer() * (&den / c.denom());
            for (j, &p) in field.powers[k % order as usize].iter().enumerate() {
                if p != 0 {
                    num[j] += &scaled * p;
                }
            }
        }
        Ok(Self::from_parts_big(field, num, den))
    }

    pub fn order(&self) -> u32 {
        self.field.order
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    fn from_parts_i128(field: &'static Field, num: &[i128], den: i128) -> Self {
        debug_assert!(den != 0);
        let mut g = den;
        if den != 1 {
            for &n in num {
                if g == 1 {
                    break;
                }
                g = gcd_i128(g, n);
            }
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = g.abs() * sign;
        let den = den / g;
        let fits = |v: i128| v >= i64::MIN as i128 && v <= i64::MAX as i128;
        if fits(den) && num.iter().all(|&n| fits(n / g)) {
            CycScalar {
                field,
                repr: Repr::Small { num: num.iter().map(|&n| (n / g) as i64).collect(), den: den as i64 },
            }
        } else {
            Self::from_parts_big(
                field,
                num.iter().map(|&n| BigInt::from(n / g)).collect(),
                BigInt::from(den),
            )
        }
    }

    fn from_parts_big(field: &'static Field, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        debug_assert!(!den.is_zero());
        let mut g = den.clone();
        for n in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(n);
        }
        if den.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for n in &mut num {
                *n = &*n / &g;
            }
            den /= &g;
        }
        let small = num.iter().map(|n| n.to_i64()).collect::<Option<Small>>().zip(den.to_i64());
        match small {
            Some((num, den)) => CycScalar { field, repr: Repr::Small { num, den } },
            None => CycScalar { field, repr: Repr::Big { num, den } },
        }
    }

    fn big_parts(&self) -> (Vec<BigInt>, BigInt) {
        match &self.repr {
            Repr::Small { num, den } => (num.iter().map(|&n| BigInt::from(n)).collect(), BigInt::from(*den)),
            Repr::Big { num, den } => (num.clone(), den.clone()),
        }
    }

    /// Canonical rational coefficients over the power basis.
    pub fn coeffs(&self) -> Vec<BigRational> {
        let (num, den) = self.big_parts();
        num.into_iter().map(|n| BigRational::new(n, den.clone())).collect()
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Small { num, .. } => num.iter().all(|&n| n == 0),
            Repr::Big { num, .. } => num.iter().all(|n| n.is_zero()),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Small { num, den } => *den == 1 && num[0] == 1 && num[1..].iter().all(|&n| n == 0),
            Repr::Big { .. } => false,
        }
    }

    /// Rational value if the scalar lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        let (num, den) = self.big_parts();
        if num[1..].iter().all(|n| n.is_zero()) {
            Some(BigRational::new(num[0].clone(), den))
        } else {
            None
        }
    }

    /// Re-express in Q(ζ_target); `target` must be a multiple of the order.
    pub fn lift(&self, target: u32) -> CycScalar {
        if target == self.field.order {
            return self.clone();
        }
        assert!(target.is_multiple_of(self.field.order), "lift target must be a multiple of the order");
        let to = Field::get(target);
        let step = (target / self.field.order) as usize;
        match &self.repr {
            Repr::Small { num, den } => {
                let mut out = vec![0i128; to.degree];
                for (i, &c) in num.iter().enumerate() {
                    if c != 0 {
                        for (j, &p) in to.powers[i * step].iter().enumerate() {
                            out[j] += c as i128 * p as i128;
                        }
                    }
                }
                Self::from_parts_i128(to, &out, *den as i128)
            }
            Repr::Big { num, den } => {
                let mut out = vec![BigInt::zero(); to.degree];
                for (i, c) in num.iter().enumerate() {
                    if !c.is_zero() {
                        for (j, &p) in to.powers[i * step].iter().enumerate() {
                            if p != 0 {
                                out[j] += c * p;
                            }
                        }
                    }
                }
                Self::from_parts_big(to, out, den.clone())
            }
        }
    }

    /// Smallest order whose field contains the value, found by trying divisors.
    pub fn reduced_order(&self) -> CycScalar {
        let m = self.field.order;
        for d in 1..m {
            if !m.is_multiple_of(d) {
                continue;
            }
            if let Some(c) = self.try_descend(d) {
                return c;
            }
        }
        self.clone()
    }

    fn try_descend(&self, d: u32) -> Option<CycScalar> {
        // the embedding Q(ζ_d) → Q(ζ_m) is linear; solve by matching against lifted basis
        let sub = Field::get(d);
        let step = (self.field.order / d) as usize;
        let (num, den) = self.big_parts();
        // greedy elimination over the images of ζ_d^i, i < φ(d)
        let mut rem = num;
        let mut sol = vec![BigRational::zero(); sub.degree];
        let images: Vec<&Vec<i64>> = (0..sub.degree).map(|i| &self.field.powers[i * step]).collect();
        // images are distinct powers; solve with exact rational elimination
        let mut rows: Vec<(Vec<BigRational>, usize)> = Vec::new();
        for (i, img) in images.iter().enumerate() {
            rows.push((img.iter().map(|&p| BigRational::from_integer(BigInt::from(p))).collect(), i));
        }
        let mut target: Vec<BigRational> = rem.drain(..).map(|n| BigRational::new(n, den.clone())).collect();
        // Gaussian elimination on columns of the image matrix
        let n = self.field.degree;
        let mut pivots = Vec::new();
        let mut basis: Vec<(Vec<BigRational>, Vec<BigRational>)> = Vec::new();
        for (v, i) in rows {
            let mut v = v;
            let mut comb = vec![BigRational::zero(); sub.degree];
            comb[i] = BigRational::one();
            for (k, (bv, bc)) in basis.iter().enumerate() {
                let p: usize = pivots[k];
                if !v[p].is_zero() {
                    let f = v[p].clone() / bv[p].clone();
                    for j in 0..n {
                        v[j] -= &f * &bv[j];
                    }
                    for j in 0..sub.degree {
                        comb[j] -= &f * &bc[j];
                    }
                }
            }
            let p = v.iter().position(|x| !x.is_zero())?;
            pivots.push(p);
            basis.push((v, comb));
        }
        for (k, (bv, bc)) in basis.iter().enumerate() {
            let p = pivots[k];
            if !target[p].is_zero() {
                let f = target[p].clone() / bv[p].clone();
                for j in 0..n {
                    target[j] -= &f * &bv[j];
                }
                for j in 0..sub.degree {
                    sol[j] += &f * &bc[j];
                }
            }
        }
        if target.iter().all(|t| t.is_zero()) {
            Self::from_coeffs(d, &sol).ok()
        } else {
            None
        }
    }

    fn unify(a: &CycScalar, b: &CycScalar) -> (CycScalar, CycScalar) {
        let m = (a.field.order).lcm(&b.field.order);
        (a.lift(m), b.lift(m))
    }

    fn scale_rational(&self, n: &BigInt, d: &BigInt) -> CycScalar {
        let (num, den) = self.big_parts();
        Self::from_parts_big(self.field, num.into_iter().map(|c| c * n).collect(), den * d)
    }

    fn add_same(a: &CycScalar, b: &CycScalar, negate_b: bool) -> CycScalar {
        let field = a.field;
        if let (Repr::Small { num: na, den: da }, Repr::Small { num: nb, den: db }) = (&a.repr, &b.repr) {
            let sgn: i128 = if negate_b { -1 } else { 1 };
            if da == db {
                let out: SmallVec<[i128; 8]> =
                    na.iter().zip(nb.iter()).map(|(&x, &y)| x as i128 + sgn * y as i128).collect();
                return Self::from_parts_i128(field, &out, *da as i128);
            }
            let (da, db) = (*da as i128, *db as i128);
            let out: SmallVec<[i128; 8]> =
                na.iter().zip(nb.iter()).map(|(&x, &y)| x as i128 * db + sgn * y as i128 * da).collect();
            return Self::from_parts_i128(field, &out, da * db);
        }
        let (na, da) = a.big_parts();
        let (nb, db) = b.big_parts();
        let out = na
            .iter()
            .zip(nb.iter())
            .map(|(x, y)| if negate_b { x * &db - y * &da } else { x * &db + y * &da })
            .collect();
        Self::from_parts_big(field, out, da * db)
    }

    fn mul_same(a: &CycScalar, b: &CycScalar) -> CycScalar {
        let field = a.field;
        let d = field.degree;
        if let (Repr::Small { num: na, den: da }, Repr::Small { num: nb, den: db }) = (&a.repr, &b.repr) {
            let ba = na.iter().map(|&x| bits(x)).max().unwrap_or(0);
            let bb = nb.iter().map(|&x| bits(x)).max().unwrap_or(0);
            let log_d = 64 - (d as u64).leading_zeros();
            let budget = ba + bb + log_d + 1 + (d as u32).saturating_sub(1) * field.step_bits;
            if budget < 125 && d <= 32 {
                let mut c = [0i128; 64];
                for (i, &x) in na.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in nb.iter().enumerate() {
                        c[i + j] += x as i128 * y as i128;
                    }
                }
                for k in (d..2 * d - 1).rev() {
                    let t = c[k];
                    if t != 0 {
                        for (j, &p) in field.poly.iter().enumerate() {
                            c[k - d + j] -= t * p as i128;
                        }
                    }
                }
                return Self::from_parts_i128(field, &c[..d], *da as i128 * *db as i128);
            }
        }
        let (na, da) = a.big_parts();
        let (nb, db) = b.big_parts();
        let mut c = vec![BigInt::zero(); 2 * d - 1];
        for (i, x) in na.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in nb.iter().enumerate() {
                if !y.is_zero() {
                    c[i + j] += x * y;
                }
            }
        }
        for k in (d..2 * d - 1).rev() {
            let t = std::mem::take(&mut c[k]);
            if !t.is_zero() {
                for (j, &p) in field.poly.iter().enumerate() {
                    if p != 0 {
                        c[k - d + j] -= &t * p;
                    }
                }
            }
        }
        c.truncate(d);
        Self::from_parts_big(field, c, da * db)
    }

    fn rational_parts(&self) -> Option<(BigInt, BigInt)> {
        if self.field.order <= 2 {
            let (n, d) = self.big_parts();
            return Some((n[0].clone(), d));
        }
        None
    }

    /// Galois automorphism ζ ↦ ζ^k (k coprime to the order).
    pub fn galois(&self, k: i64) -> CycScalar {
        let m = self.field.order as i64;
        let k = k.rem_euclid(m) as usize;
        if k == 1 {
            return self.clone();
        }
        let m = m as usize;
        match &self.repr {
            Repr::Small { num, den } => {
                let mut out = vec![0i128; self.field.degree];
                for (i, &c) in num.iter().enumerate() {
                    if c != 0 {
                        for (j, &p) in self.field.powers[(i * k) % m].iter().enumerate() {
                            out[j] += c as i128 * p as i128;
                        }
                    }
                }
                Self::from_parts_i128(self.field, &out, *den as i128)
            }
            Repr::Big { num, den } => {
                let mut out = vec![BigInt::zero(); self.field.degree];
                for (i, c) in num.iter().enumerate() {
                    if !c.is_zero() {
                        for (j, &p) in self.field.powers[(i * k) % m].iter().enumerate() {
                            if p != 0 {
                                out[j] += c * p;
                            }
                        }
                    }
                }
                Self::from_parts_big(self.field, out, den.clone())
            }
        }
    }

    /// Complex conjugate: ζ ↦ ζ^{−1}.
    pub fn conj(&self) -> CycScalar {
        self.galois(-1)
    }

    pub fn inv(&self) -> Result<CycScalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if let Some((n, d)) = self.rational_parts().or_else(|| {
            self.as_rational().map(|r| (r.numer().clone(), r.denom().clone()))
        }) {
            let field = self.field;
            let mut num = vec![BigInt::zero(); field.degree];
            num[0] = d;
            return Ok(Self::from_parts_big(field, num, n));
        }
        // product of the other Galois conjugates, divided by the norm
        let m = self.field.order as i64;
        let mut adj = CycScalar::one();
        for k in 2..m {
            if k.gcd(&m) == 1 {
                adj = &adj * &self.galois(k);
            }
        }
        let norm = (&adj * self)
            .as_rational()
            .expect("norm of a cyclotomic integer combination is rational");
        Ok(adj.scale_rational(norm.denom(), norm.numer()))
    }

    pub fn pow(&self, e: i64) -> Result<CycScalar, ScalarError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = CycScalar::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// Complex value with a rigorous absolute error bound.
    pub fn embed(&self) -> Embedding {
        let field = self.field;
        if let Repr::Small { num, den } = &self.repr {
            if num[1..].iter().all(|&n| n == 0) {
                // rationals: only the final division rounds
                let exact = *den == 1 && num[0].unsigned_abs() < 1 << 53;
                let v = num[0] as f64 / *den as f64;
                let error = if exact { 0.0 } else { 2.0 * f64::EPSILON * v.abs() };
                return Embedding { value: Complex64::new(v, 0.0), error };
            }
        }
        let (vals, scale): (Vec<f64>, f64) = match &self.repr {
            Repr::Small { num, den } => (num.iter().map(|&n| n as f64).collect(), *den as f64),
            Repr::Big { num, den } => {
                (num.iter().map(|n| n.to_f64().unwrap_or(f64::INFINITY)).collect(), den.to_f64().unwrap_or(f64::INFINITY))
            }
        };
        let mut re = 0.0;
        let mut im = 0.0;
        let mut mag = 0.0;
        for (k, &v) in vals.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let c = v / scale;
            re += c * field.roots[k].re;
            im += c * field.roots[k].im;
            mag += c.abs();
        }
        // per-term trig and conversion error plus summation error
        let eps = f64::EPSILON;
        let error = (field.degree as f64 + 16.0) * eps * mag;
        Embedding { value: Complex64::new(re, im), error }
    }

    /// True iff conjugation fixes the value exactly.
    pub fn is_real(&self) -> bool {
        self.conj() == *self
    }

    /// Certified test for a strictly positive real number.
    pub fn is_positive_real(&self) -> Certified {
        if !self.is_real() {
            return Certified::NotPositive;
        }
        if let Some(r) = self.as_rational() {
            return if r.is_positive() { Certified::Positive } else { Certified::NotPositive };
        }
        let e = self.embed();
        if e.value.re > e.error {
            Certified::Positive
        } else if e.value.re < -e.error || self.is_zero() {
            Certified::NotPositive
        } else {
            Certified::Indeterminate
        }
    }

    /// Certified sign of a real scalar: `Some(ordering)` or `None` when undecided.
    pub fn real_sign(&self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        if self.is_zero() {
            return Some(Ordering::Equal);
        }
        if let Some(r) = self.as_rational() {
            return Some(if r.is_positive() { Ordering::Greater } else { Ordering::Less });
        }
        let e = self.embed();
        if e.value.re > e.error {
            Some(Ordering::Greater)
        } else if e.value.re < -e.error {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    pub fn mul_i64(&self, k: i64) -> CycScalar {
        match &self.repr {
            Repr::Small { num, den } => {
                let out: SmallVec<[i128; 8]> = num.iter().map(|&n| n as i128 * k as i128).collect();
                Self::from_parts_i128(self.field, &out, *den as i128)
            }
            Repr::Big { .. } => self.scale_rational(&BigInt::from(k), &BigInt::one()),
        }
    }
}

impl PartialEq for CycScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.field.order != other.field.order {
            let (a, b) = CycScalar::unify(self, other);
            return a == b;
        }
        match (&self.repr, &other.repr) {
            (Repr::Small { num: na, den: da }, Repr::Small { num: nb, den: db }) => da == db && na == nb,
            _ => self.big_parts() == other.big_parts(),
        }
    }
}

impl Eq for CycScalar {}

impl Default for CycScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl<'a> Add<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn add(self, rhs: &CycScalar) -> CycScalar {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.field.order == rhs.field.order {
            CycScalar::add_same(self, rhs, false)
        } else {
            let (a, b) = CycScalar::unify(self, rhs);
            CycScalar::add_same(&a, &b, false)
        }
    }
}

impl<'a> Sub<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn sub(self, rhs: &CycScalar) -> CycScalar {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.field.order == rhs.field.order {
            CycScalar::add_same(self, rhs, true)
        } else {
            let (a, b) = CycScalar::unify(self, rhs);
            CycScalar::add_same(&a, &b, true)
        }
    }
}

impl<'a> Mul<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn mul(self, rhs: &CycScalar) -> CycScalar {
        if self.is_zero() || rhs.is_zero() {
            return CycScalar::zero();
        }
        if self.field.order == 1 || rhs.field.order == 1 {
            let (r, other) = if self.field.order == 1 { (self, rhs) } else { (rhs, self) };
            if r.is_one() {
                return other.clone();
            }
            if let Repr::Small { num, den } = &r.repr {
                if let Repr::Small { num: on, den: od } = &other.repr {
                    let out: SmallVec<[i128; 8]> = on.iter().map(|&n| n as i128 * num[0] as i128).collect();
                    return CycScalar::from_parts_i128(other.field, &out, *od as i128 * *den as i128);
                }
            }
            let (n, d) = r.big_parts();
            return other.scale_rational(&n[0], &d);
        }
        if self.field.order == rhs.field.order {
            CycScalar::mul_same(self, rhs)
        } else {
            let (a, b) = CycScalar::unify(self, rhs);
            CycScalar::mul_same(&a, &b)
        }
    }
}

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        self.mul_i64(-1)
    }
}

impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        (&self).neg()
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl $tr<CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $f(self, rhs: CycScalar) -> CycScalar {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $f(self, rhs: &CycScalar) -> CycScalar {
                (&self).$f(rhs)
            }
        }
        impl<'a> $tr<CycScalar> for &'a CycScalar {
            type Output = CycScalar;
            fn $f(self, rhs: CycScalar) -> CycScalar {
                self.$f(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl AddAssign<&CycScalar> for CycScalar {
    fn add_assign(&mut self, rhs: &CycScalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&CycScalar> for CycScalar {
    fn sub_assign(&mut self, rhs: &CycScalar) {
        *self = &*self - rhs;
    }
}

impl From<i64> for CycScalar {
    fn from(v: i64) -> Self {
        CycScalar::from_i64(v)
    }
}

/// ζ_order^power; the order must be positive.
pub fn cyc(order: u32, power: i64) -> Result<CycScalar, ScalarError> {
    CycScalar::root(order, power)
}

/// Quantum integer [k]_q = q^{k−1} + q^{k−3} + … + q^{−(k−1)}.
pub fn q_integer(k: i64, q: &CycScalar) -> Result<CycScalar, ScalarError> {
    if k == 0 {
        return Ok(CycScalar::zero());
    }
    if k < 0 {
        return Ok(-q_integer(-k, q)?);
    }
    let qinv2 = q.inv()?.pow(2)?;
    let mut term = q.pow(k - 1)?;
    let mut acc = CycScalar::zero();
    for _ in 0..k {
        acc += &term;
        term = &term * &qinv2;
    }
    Ok(acc)
}

/// Quantum factorial [k]_q! = [1][2]…[k].
pub fn q_factorial(k: i64, q: &CycScalar) -> Result<CycScalar, ScalarError> {
    let mut acc = CycScalar::one();
    for j in 1..=k {
        acc = &acc * &q_integer(j, q)?;
    }
    Ok(acc)
}

fn fmt_rational(n: &BigInt, d: &BigInt) -> String {
    if d.is_one() {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs = self.coeffs();
        let last = coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
        write!(f, "cyc({};", self.field.order)?;
        for (k, c) in coeffs[..=last].iter().enumerate() {
            let sep = if k == 0 { " " } else { ", " };
            write!(f, "{sep}{}", fmt_rational(c.numer(), c.denom()))?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.embed();
        write!(f, "{self} ≈ {:.6}{:+.6}i", e.value.re, e.value.im)
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

impl FromStr for CycScalar {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Self, ScalarError> {
        let bad = || ScalarError::Parse(s.to_string());
        let body = s
            .trim()
            .strip_prefix("cyc(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (order, rest) = body.split_once(';').ok_or_else(bad)?;
        let order: u32 = order.trim().parse().map_err(|_| bad())?;
        let coeffs = rest
            .split(',')
            .map(parse_rational)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(bad)?;
        CycScalar::from_coeffs(order, &coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(m: u32, k: i64) -> CycScalar {
        cyc(m, k).unwrap()
    }

    #[test]
    fn roots_embed() {
        let i = c(4, 1).embed();
        assert!((i.value - Complex64::new(0.0, 1.0)).norm() <= 1e-15);
        assert_eq!(c(2, 1), CycScalar::from_i64(-1));
        assert_eq!(&c(2, 1) * &c(2, 1), CycScalar::one());
        let s2 = (&c(8, 1) + &c(8, -1)).embed();
        assert!((s2.value.re - 2f64.sqrt()).abs() <= s2.error.max(1e-15));
        assert_eq!(cyc(0, 1).unwrap_err(), ScalarError::ZeroOrder);
    }

    #[test]
    fn cube_roots_sum() {
        assert_eq!(&c(3, 1) + &c(3, 2), CycScalar::from_i64(-1));
        let e = CycScalar::one().embed();
        assert_eq!(e.value, Complex64::new(1.0, 0.0));
        assert_eq!(e.error, 0.0);
    }

    #[test]
    fn quantum_integers() {
        let q = c(10, 1);
        assert_eq!(q_integer(1, &q).unwrap(), CycScalar::one());
        let three = q_integer(3, &q).unwrap().embed();
        assert!((three.value.re - (1.0 + 2.0 * (std::f64::consts::TAU / 5.0).cos())).abs() < 1e-12);
        let two = q_integer(2, &c(8, 1)).unwrap();
        assert!((two.embed().value.re - 2f64.sqrt()).abs() < 1e-12);
        // [ℓ] vanishes at q = e^{iπ/ℓ}
        for l in 3..9 {
            assert!(q_integer(l, &c(2 * l as u32, 1)).unwrap().is_zero());
        }
        assert_eq!(q_integer(-2, &q).unwrap(), -q_integer(2, &q).unwrap());
    }

    #[test]
    fn conjugation() {
        assert_eq!(c(7, 3).conj(), c(7, -3));
        let r = &c(8, 1) + &c(8, -1);
        assert_eq!(r.conj(), r);
        assert_eq!(c(4, 1).conj(), -c(4, 1));
    }

    #[test]
    fn literal_round_trip() {
        let x = &(&c(12, 1) * &CycScalar::from_ratio(3, 7).unwrap()) + &c(12, 5);
        let s = x.to_string();
        let y: CycScalar = s.parse().unwrap();
        assert_eq!(x, y);
        assert_eq!(y.to_string(), s);
        assert!("cyc(0; 1)".parse::<CycScalar>().is_err());
        assert!("cyc(3; 1/0)".parse::<CycScalar>().is_err());
        assert!("zeta(3; 1)".parse::<CycScalar>().is_err());
        assert_eq!("cyc(4; 0, 0, 1)".parse::<CycScalar>().unwrap(), CycScalar::from_i64(-1));
    }

    #[test]
    fn big_path_and_inverse() {
        let mut x = &c(24, 1) + &CycScalar::from_i64(3);
        for _ in 0..6 {
            x = &x * &x;
        }
        let inv = x.inv().unwrap();
        assert!((&x * &inv).is_one());
        assert_eq!(CycScalar::zero().inv().unwrap_err(), ScalarError::DivisionByZero);
    }

    #[test]
    fn positivity_verdicts() {
        assert_eq!((&c(8, 1) + &c(8, -1)).is_positive_real(), Certified::Positive);
        assert_eq!(c(4, 1).is_positive_real(), Certified::NotPositive);
        assert_eq!(CycScalar::from_i64(-2).is_positive_real(), Certified::NotPositive);
        assert_eq!(CycScalar::zero().is_positive_real(), Certified::NotPositive);
    }

    #[test]
    fn descend_order() {
        let x = (&c(8, 1) + &c(8, -1)).lift(24);
        let r = (&x * &x).reduced_order();
        assert_eq!(r.order(), 1);
        assert_eq!(r, CycScalar::from_i64(2));
        assert_eq!(c(24, 6).reduced_order().order(), 4);
    }

    fn arb_scalar() -> impl Strategy<Value = CycScalar> {
        (prop::sample::select(vec![3u32, 4, 5, 8, 12, 15, 16]), prop::collection::vec((-20i64..20, 1i64..6), 1..10))
            .prop_map(|(m, cs)| {
                let coeffs: Vec<BigRational> =
                    cs.iter().map(|&(n, d)| BigRational::new(n.into(), d.into())).collect();
                CycScalar::from_coeffs(m, &coeffs).unwrap()
            })
    }

    proptest! {
        #[test]
        fn distributive(a in arb_scalar(), b in arb_scalar(), x in arb_scalar()) {
            prop_assert_eq!(&(&a + &b) * &x, &(&a * &x) + &(&b * &x));
        }

        #[test]
        fn inverse(a in arb_scalar()) {
            prop_assume!(!a.is_zero());
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }

        #[test]
        fn conj_is_automorphism(a in arb_scalar(), b in arb_scalar()) {
            prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
            prop_assert_eq!(a.conj().conj(), a.clone());
            let n = &a * &a.conj();
            let e = n.embed();
            prop_assert!(e.value.re >= -e.error);
            prop_assert!(e.value.im.abs() <= e.error + 1e-12 * e.value.re.abs());
        }

        #[test]
        fn q_integer_identity(k in -12i64..12, m in 3u32..30, j in 1i64..30) {
            let q = cyc(m, j).unwrap();
            let qi = q.inv().unwrap();
            prop_assume!(q != qi);
            let lhs = &q_integer(k, &q).unwrap() * &(&q - &qi);
            prop_assert_eq!(lhs, &q.pow(k).unwrap() - &q.pow(-k).unwrap());
        }

        #[test]
        fn lift_then_reduce(a in arb_scalar(), f in 1u32..4) {
            let up = a.lift(a.order() * f);
            prop_assert_eq!(&up, &a);
            prop_assert_eq!(up.reduced_order(), a.reduced_order());
        }

        #[test]
        fn embedding_matches_oracle(a in arb_scalar()) {
            // independent oracle: evaluate Σ c_k e^{2πik/m} from the canonical coefficients
            let m = a.order() as f64;
            let mut z = Complex64::new(0.0, 0.0);
            for (k, c) in a.coeffs().iter().enumerate() {
                let v = c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap();
                z += Complex64::from_polar(v, std::f64::consts::TAU * k as f64 / m);
            }
            let e = a.embed();
            prop_assert!((e.value - z).norm() <= 2.0 * e.error + 1e-13);
        }

        #[test]
        fn literal_round_trips(a in arb_scalar()) {
            let s = a.to_string();
            let b: CycScalar = s.parse().unwrap();
            prop_assert_eq!(b.to_string(), s);
            prop_assert_eq!(b, a);
        }
    }
}
