//! Based rings, type-A Verlinde fusion, quantum dimensions, ribbon values,
//! Frobenius–Perron dimensions, weak dimension functions and modular data.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::blockalg::Mat;
use crate::report::Report;
use crate::scalars::{cyc, q_integer, CycScalar, ScalarError};
use crate::textfmt::{self, FormatError, Section};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("structure constants are not associative at ({0}, {1}, {2}) → {3}")]
    NotAssociative(usize, usize, usize, usize),
    #[error("unit axiom fails at label {0}")]
    Unit(usize),
    #[error("duality axiom fails at ({0}, {1})")]
    Duality(usize, usize),
    #[error("table has inconsistent size")]
    Size,
    #[error("level ℓ = {ell} is too small for sl_{n}")]
    LevelTooSmall { n: usize, ell: usize },
    #[error("weight {0:?} lies outside the alcove")]
    OutsideAlcove(Vec<i64>),
    #[error("negative fusion coefficient {coeff} at ({i}, {j}) → {k}")]
    NegativeCoefficient { i: usize, j: usize, k: usize, coeff: i64 },
    #[error("dimension function below 1 at label {0}")]
    BelowOne(usize),
    #[error("integral scale M = {0} must be at least 4")]
    SmallScale(u64),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("malformed ring: {0}")]
    Malformed(String),
}

/// A fusion ring with basis labels, structure constants N_{ij}^k, unit and duality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasedRing {
    labels: Vec<String>,
    unit: usize,
    coeffs: Vec<Vec<Vec<u32>>>,
    dual: Vec<usize>,
}

impl BasedRing {
    /// Validates unit, duality and associativity.
    pub fn new(labels: Vec<String>, unit: usize, coeffs: Vec<Vec<Vec<u32>>>, dual: Vec<usize>) -> Result<BasedRing, FusionError> {
        let n = labels.len();
        let square = |v: &Vec<Vec<u32>>| v.len() == n && v.iter().all(|r| r.len() == n);
        if unit >= n || dual.len() != n || coeffs.len() != n || !coeffs.iter().all(square) || dual.iter().any(|&d| d >= n) {
            return Err(FusionError::Size);
        }
        let ring = BasedRing { labels, unit, coeffs, dual };
        ring.validate()?;
        Ok(ring)
    }

    fn validate(&self) -> Result<(), FusionError> {
        let n = self.rank();
        for i in 0..n {
            for j in 0..n {
                let delta = u32::from(i == j);
                if self.coeff(i, self.unit, j) != delta || self.coeff(self.unit, i, j) != delta {
                    return Err(FusionError::Unit(i));
                }
                if self.coeff(i, j, self.unit) != u32::from(j == self.dual[i]) {
                    return Err(FusionError::Duality(i, j));
                }
            }
        }
        if let Some((i, j, k, l)) = self.associativity_failure() {
            return Err(FusionError::NotAssociative(i, j, k, l));
        }
        Ok(())
    }

    /// First (i, j, k, l) with (X_iX_j)X_k ≠ X_i(X_jX_k) at X_l.
    pub fn associativity_failure(&self) -> Option<(usize, usize, usize, usize)> {
        let n = self.rank();
        let quads: Vec<(usize, usize, usize)> =
            (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k)))).collect();
        let found = crate::par::map_collect(&quads, |&(i, j, k)| {
            (0..n).find(|&l| {
                let left: u64 = (0..n).map(|m| u64::from(self.coeff(i, j, m)) * u64::from(self.coeff(m, k, l))).sum();
                let right: u64 = (0..n).map(|m| u64::from(self.coeff(j, k, m)) * u64::from(self.coeff(i, m, l))).sum();
                left != right
            })
        });
        quads.iter().zip(found).find_map(|(&(i, j, k), l)| l.map(|l| (i, j, k, l)))
    }

    /// Z_N with X_aX_b = X_{a+b}.
    pub fn pointed(order: usize) -> BasedRing {
        let labels = (0..order).map(|g| format!("g{g}")).collect();
        let coeffs =
            (0..order).map(|i| (0..order).map(|j| (0..order).map(|k| u32::from((i + j) % order == k)).collect()).collect()).collect();
        let dual = (0..order).map(|g| (order - g) % order).collect();
        BasedRing::new(labels, 0, coeffs, dual).expect("cyclic group ring")
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn dual(&self, i: usize) -> usize {
        self.dual[i]
    }

    /// N_{ij}^k.
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> u32 {
        self.coeffs[i][j][k]
    }

    /// Nonzero terms of X_iX_j.
    pub fn product(&self, i: usize, j: usize) -> Vec<(usize, u32)> {
        (0..self.rank()).filter(|&k| self.coeffs[i][j][k] > 0).map(|k| (k, self.coeffs[i][j][k])).collect()
    }

    /// Left multiplication by X_i: entry (k, j) is N_{ij}^k.
    pub fn fusion_matrix(&self, i: usize) -> Vec<Vec<u32>> {
        let n = self.rank();
        (0..n).map(|k| (0..n).map(|j| self.coeffs[i][j][k]).collect()).collect()
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| (0..n).all(|j| self.coeffs[i][j] == self.coeffs[j][i]))
    }

    /// Max over pairs of the total multiplicity Σ_k N_{ij}^k.
    pub fn max_total_multiplicity(&self) -> u32 {
        self.coeffs.iter().flat_map(|row| row.iter().map(|ks| ks.iter().sum::<u32>())).max().unwrap_or(0)
    }

    /// `[ring]` header with labels, unit and duals, then one `i j k n` line per nonzero coefficient.
    pub fn to_text(&self) -> String {
        let duals: Vec<&str> = self.dual.iter().map(|&d| self.label(d)).collect();
        let head = format!("labels: {}\nunit: {}\ndual: {}\n", self.labels.join(" "), self.label(self.unit), duals.join(" "));
        let mut table = String::new();
        let n = self.rank();
        for i in 0..n {
            for j in 0..n {
                for (k, c) in self.product(i, j) {
                    let _ = writeln!(table, "{} {} {} {c}", self.label(i), self.label(j), self.label(k));
                }
            }
        }
        textfmt::render(&[Section::new("ring", &[], head), Section::new("table", &[], table)])
    }

    pub fn from_text(text: &str) -> Result<BasedRing, FusionError> {
        let secs = textfmt::parse(text)?;
        let find = |name: &str| secs.iter().find(|s| s.name == name).ok_or_else(|| FusionError::Malformed(format!("missing [{name}]")));
        let head = find("ring")?;
        let field = |k: &str| head.field(k).ok_or_else(|| FusionError::Malformed(format!("missing {k}")));
        let labels: Vec<String> = field("labels")?.split_whitespace().map(str::to_string).collect();
        let idx = |l: &str| labels.iter().position(|x| x == l).ok_or_else(|| FusionError::Malformed(format!("unknown label {l}")));
        let unit = idx(&field("unit")?)?;
        let dual = field("dual")?.split_whitespace().map(idx).collect::<Result<Vec<_>, _>>()?;
        let n = labels.len();
        let mut coeffs = vec![vec![vec![0u32; n]; n]; n];
        for line in find("table")?.body.lines() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [i, j, k, c] = parts[..] else {
                return Err(FusionError::Malformed(format!("bad table line {line:?}")));
            };
            let c: u32 = c.parse().map_err(|_| FusionError::Malformed(format!("bad coefficient {c:?}")))?;
            coeffs[idx(i)?][idx(j)?][idx(k)?] = c;
        }
        BasedRing::new(labels, unit, coeffs, dual)
    }
}

/// The sl₂ Verlinde ring at level k: X_iX_j = Σ_{r=max(i+j−k,0)}^{min(i,j)} X_{i+j−2r}.
pub fn sl2_verlinde(level: usize) -> BasedRing {
    let n = level + 1;
    let labels = (0..n).map(|i| format!("X{i}")).collect();
    let mut coeffs = vec![vec![vec![0u32; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for r in (i + j).saturating_sub(level)..=i.min(j) {
                coeffs[i][j][i + j - 2 * r] += 1;
            }
        }
    }
    BasedRing::new(labels, 0, coeffs, (0..n).collect()).expect("Verlinde formula")
}

/// Type A weight data at ℓ = k + N; weights are partitions with N parts, the last one zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightData {
    n: usize,
    ell: usize,
    weights: Vec<Vec<i64>>,
}

impl WeightData {
    pub fn new(n: usize, ell: usize) -> Result<WeightData, FusionError> {
        if n < 2 || ell < n + 1 {
            return Err(FusionError::LevelTooSmall { n, ell });
        }
        let level = (ell - n) as i64;
        let mut dynkin: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..n - 1 {
            dynkin = dynkin.into_iter().flat_map(|d| (0..=level).map(move |a| [d.clone(), vec![a]].concat())).collect();
        }
        dynkin.retain(|d| d.iter().sum::<i64>() <= level);
        dynkin.sort_by(|a, b| a.iter().sum::<i64>().cmp(&b.iter().sum()).then(b.cmp(a)));
        let weights = dynkin.iter().map(|d| from_dynkin(d)).collect();
        Ok(WeightData { n, ell, weights })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn level(&self) -> usize {
        self.ell - self.n
    }

    /// Alcove weights in the ring's label order.
    pub fn weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    pub fn index_of(&self, lambda: &[i64]) -> Option<usize> {
        let norm = normalize(lambda);
        self.weights.iter().position(|w| *w == norm)
    }

    /// The fundamental weight Λ_k = (1^k, 0^{N−k}).
    pub fn fundamental(&self, k: usize) -> Vec<i64> {
        (0..self.n).map(|i| i64::from(i < k)).collect()
    }

    pub fn rho(&self) -> Vec<i64> {
        (0..self.n).rev().map(|i| i as i64).collect()
    }

    /// N·⟨λ, μ⟩ for the form with ⟨α, α⟩ = 2.
    pub fn form_times_n(&self, lambda: &[i64], mu: &[i64]) -> i64 {
        let dot: i64 = lambda.iter().zip(mu).map(|(a, b)| a * b).sum();
        self.n as i64 * dot - lambda.iter().sum::<i64>() * mu.iter().sum::<i64>()
    }

    pub fn in_alcove(&self, lambda: &[i64]) -> bool {
        lambda.len() == self.n && lambda.windows(2).all(|w| w[0] >= w[1]) && lambda[0] - lambda[self.n - 1] <= self.level() as i64
    }

    pub fn label(lambda: &[i64]) -> String {
        let d: Vec<String> = to_dynkin(lambda).iter().map(i64::to_string).collect();
        format!("({})", d.join(","))
    }
}

fn from_dynkin(d: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; d.len() + 1];
    for i in (0..d.len()).rev() {
        out[i] = out[i + 1] + d[i];
    }
    out
}

fn to_dynkin(lambda: &[i64]) -> Vec<i64> {
    lambda.windows(2).map(|w| w[0] - w[1]).collect()
}

fn normalize(lambda: &[i64]) -> Vec<i64> {
    let last = *lambda.last().unwrap_or(&0);
    lambda.iter().map(|x| x - last).collect()
}

fn dominated(nu: &[i64], mu: &[i64]) -> bool {
    let (mut a, mut b) = (0, 0);
    nu.iter().zip(mu).all(|(x, y)| {
        a += x;
        b += y;
        a <= b
    }) && a == b
}

/// Weight multiplicities of the polynomial representation with highest weight μ, by Freudenthal recursion.
struct Freudenthal {
    mu: Vec<i64>,
    rho: Vec<i64>,
    memo: HashMap<Vec<i64>, i64>,
}

impl Freudenthal {
    fn new(mu: &[i64]) -> Freudenthal {
        let n = mu.len();
        Freudenthal { mu: mu.to_vec(), rho: (0..n).rev().map(|i| i as i64).collect(), memo: HashMap::new() }
    }

    fn norm_shifted(&self, x: &[i64]) -> i64 {
        x.iter().zip(&self.rho).map(|(a, r)| (a + r) * (a + r)).sum()
    }

    fn mult(&mut self, nu: &[i64]) -> i64 {
        if nu.iter().any(|&x| x < 0) {
            return 0;
        }
        let mut dom = nu.to_vec();
        dom.sort_unstable_by(|a, b| b.cmp(a));
        if !dominated(&dom, &self.mu) {
            return 0;
        }
        if dom == self.mu {
            return 1;
        }
        if let Some(&m) = self.memo.get(&dom) {
            return m;
        }
        let n = dom.len();
        let mut sum = 0i64;
        for a in 0..n {
            for b in a + 1..n {
                for j in 1.. {
                    let mut shifted = dom.clone();
                    shifted[a] += j;
                    shifted[b] -= j;
                    if shifted[b] < 0 {
                        break;
                    }
                    let m = self.mult(&shifted);
                    sum += 2 * (shifted[a] - shifted[b]) * m;
                }
            }
        }
        let denom = self.norm_shifted(&self.mu) - self.norm_shifted(&dom);
        let m = sum / denom;
        self.memo.insert(dom, m);
        m
    }

    /// All weights with positive multiplicity.
    fn weights(&mut self) -> Vec<(Vec<i64>, i64)> {
        let n = self.mu.len();
        let total: i64 = self.mu.iter().sum();
        let mut comps: Vec<Vec<i64>> = vec![vec![]];
        for i in 0..n {
            comps = comps
                .into_iter()
                .flat_map(|c| {
                    let used: i64 = c.iter().sum();
                    let lo = if i == n - 1 { total - used } else { 0 };
                    (lo..=total - used).map(move |x| [c.clone(), vec![x]].concat())
                })
                .collect();
        }
        comps.into_iter().filter_map(|c| Some((c.clone(), self.mult(&c))).filter(|(_, m)| *m > 0)).collect()
    }
}

/// Sorts x descending with the permutation sign; 0 if entries repeat.
fn sort_signed(x: &mut [i64]) -> i64 {
    let mut sign = 1;
    for i in 0..x.len() {
        for j in 0..x.len() - 1 - i {
            if x[j] < x[j + 1] {
                x.swap(j, j + 1);
                sign = -sign;
            } else if x[j] == x[j + 1] {
                return 0;
            }
        }
    }
    if x.windows(2).any(|w| w[0] == w[1]) {
        0
    } else {
        sign
    }
}

/// Folds x = λ + ρ into the open alcove of level ℓ under the affine Weyl group; returns the sign and the alcove point.
fn affine_fold(mut x: Vec<i64>, ell: i64) -> Option<(i64, Vec<i64>)> {
    let mut sign = 1;
    loop {
        let s = sort_signed(&mut x);
        if s == 0 {
            return None;
        }
        sign *= s;
        let n = x.len();
        let spread = x[0] - x[n - 1];
        if spread < ell {
            return Some((sign, x));
        }
        if spread == ell {
            return None;
        }
        let d = spread - ell;
        x[0] -= d;
        x[n - 1] += d;
        sign = -sign;
    }
}

/// Level-ℓ fusion of sl_N by Racah–Speiser with Kac–Walton folding.
pub fn sln_verlinde(n: usize, ell: usize) -> Result<(BasedRing, WeightData), FusionError> {
    let wd = WeightData::new(n, ell)?;
    let ws = wd.weights().to_vec();
    let rho = wd.rho();
    let count = ws.len();
    let rows = crate::par::map_collect(&ws, |mu| {
        let weights = Freudenthal::new(mu).weights();
        ws.iter()
            .map(|lambda| {
                let mut row = vec![0i64; count];
                for (nu, m) in &weights {
                    let x: Vec<i64> = lambda.iter().zip(nu).zip(&rho).map(|((a, b), r)| a + b + r).collect();
                    if let Some((sign, folded)) = affine_fold(x, ell as i64) {
                        let target: Vec<i64> = folded.iter().zip(&rho).map(|(a, r)| a - r).collect();
                        let k = wd.index_of(&target).expect("folded weight lies in the alcove");
                        row[k] += sign * m;
                    }
                }
                row
            })
            .collect::<Vec<_>>()
    });
    let mut coeffs = vec![vec![vec![0u32; count]; count]; count];
    for (j, by_lambda) in rows.iter().enumerate() {
        for (i, row) in by_lambda.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                coeffs[i][j][k] = u32::try_from(c).map_err(|_| FusionError::NegativeCoefficient { i, j, k, coeff: c })?;
            }
        }
    }
    let dual = ws
        .iter()
        .map(|l| {
            let mut d = to_dynkin(l);
            d.reverse();
            wd.index_of(&from_dynkin(&d)).expect("duals stay in the alcove")
        })
        .collect();
    let labels = ws.iter().map(|l| WeightData::label(l)).collect();
    Ok((BasedRing::new(labels, 0, coeffs, dual)?, wd))
}

/// Quantum dimension Π_{α>0}[⟨λ+ρ,α⟩]_q/[⟨ρ,α⟩]_q at q = e^{iπ/ℓ}.
pub fn qdim(wd: &WeightData, lambda: &[i64]) -> Result<CycScalar, FusionError> {
    let n = wd.rank();
    if lambda.len() != n {
        return Err(FusionError::OutsideAlcove(lambda.to_vec()));
    }
    let q = cyc(2 * wd.ell() as u32, 1)?;
    let mut num = CycScalar::one();
    let mut den = CycScalar::one();
    for i in 0..n {
        for j in i + 1..n {
            let gap = (j - i) as i64;
            num = &num * &q_integer(lambda[i] - lambda[j] + gap, &q)?;
            den = &den * &q_integer(gap, &q)?;
        }
    }
    if num.is_zero() {
        return Err(FusionError::OutsideAlcove(lambda.to_vec()));
    }
    Ok(&num * &den.inv()?)
}

/// Classical dimension by the Weyl formula.
pub fn classical_dim(lambda: &[i64]) -> u64 {
    let n = lambda.len();
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..n {
        for j in i + 1..n {
            num *= (lambda[i] - lambda[j] + (j - i) as i64) as u128;
            den *= (j - i) as u128;
        }
    }
    (num / den) as u64
}

/// θ_λ = q^{⟨λ,λ+2ρ⟩} in Q(ζ_{2Nℓ}).
pub fn ribbon_theta(wd: &WeightData, lambda: &[i64]) -> Result<CycScalar, FusionError> {
    let two_rho: Vec<i64> = wd.rho().iter().map(|r| 2 * r).collect();
    let shifted: Vec<i64> = lambda.iter().zip(&two_rho).map(|(a, b)| a + b).collect();
    let m = wd.form_times_n(lambda, &shifted);
    Ok(cyc((2 * wd.rank() * wd.ell()) as u32, m)?)
}

/// A Perron–Frobenius eigenvalue with a Collatz–Wielandt enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpDim {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// The common Perron vector of the fusion matrices.
fn perron_vector(r: &BasedRing) -> Vec<f64> {
    let n = r.rank();
    let mut total = vec![vec![0f64; n]; n];
    for i in 0..n {
        for (k, row) in r.fusion_matrix(i).iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                total[k][j] += f64::from(c);
            }
        }
    }
    let mut v = vec![1f64; n];
    for _ in 0..2000 {
        let next: Vec<f64> = (0..n).map(|k| v[k] + (0..n).map(|j| total[k][j] * v[j]).sum::<f64>()).collect();
        let norm = next.iter().cloned().fold(0f64, f64::max);
        let next: Vec<f64> = next.iter().map(|x| x / norm).collect();
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0f64, f64::max);
        v = next;
        if diff < 1e-15 {
            break;
        }
    }
    let u = v[r.unit()];
    v.iter().map(|x| x / u).collect()
}

/// FPdim of every label with certified bounds.
pub fn fp_dimensions(r: &BasedRing) -> Vec<FpDim> {
    let xi = perron_vector(r);
    let n = r.rank();
    (0..n)
        .map(|i| {
            let m = r.fusion_matrix(i);
            let ratios: Vec<f64> =
                (0..n).map(|k| (0..n).map(|j| f64::from(m[k][j]) * xi[j]).sum::<f64>() / xi[k]).collect();
            let lower = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let upper = ratios.iter().cloned().fold(0f64, f64::max);
            let slack = 4.0 * f64::EPSILON * upper.max(1.0);
            FpDim { value: 0.5 * (lower + upper), lower: lower - slack, upper: upper + slack }
        })
        .collect()
}

pub fn fp_dimension(r: &BasedRing, i: usize) -> FpDim {
    fp_dimensions(r)[i]
}

/// Why a candidate weak dimension function fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WdfWitness {
    UnitNotOne(f64),
    NotPositive(usize),
    Inequality { i: usize, j: usize, lhs: f64, rhs: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WdfCheck {
    pub witness: Option<WdfWitness>,
    pub symmetric: bool,
}

impl WdfCheck {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Σ_k D(k)N_{ij}^k ≤ D(i)D(j) on all pairs, with D(unit) = 1 and D > 0.
pub fn is_weak_dimension_function(r: &BasedRing, d: &[f64], tol: f64) -> Result<WdfCheck, FusionError> {
    let n = r.rank();
    if d.len() != n {
        return Err(FusionError::Length { expected: n, got: d.len() });
    }
    let symmetric = (0..n).all(|i| (d[i] - d[r.dual(i)]).abs() <= tol);
    let witness = if (d[r.unit()] - 1.0).abs() > tol {
        Some(WdfWitness::UnitNotOne(d[r.unit()]))
    } else if let Some(i) = (0..n).find(|&i| d[i] <= 0.0) {
        Some(WdfWitness::NotPositive(i))
    } else {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find_map(|(i, j)| {
            let lhs: f64 = r.product(i, j).iter().map(|&(k, c)| f64::from(c) * d[k]).sum();
            let rhs = d[i] * d[j];
            (lhs > rhs + tol).then_some(WdfWitness::Inequality { i, j, lhs, rhs })
        })
    };
    Ok(WdfCheck { witness, symmetric })
}

/// D(unit) = 1 and D(i) = M⌊d(i)⌋ elsewhere.
pub fn integral_wdf(r: &BasedRing, d: &[f64], scale: u64) -> Result<Vec<u64>, FusionError> {
    if scale < 4 {
        return Err(FusionError::SmallScale(scale));
    }
    if d.len() != r.rank() {
        return Err(FusionError::Length { expected: r.rank(), got: d.len() });
    }
    (0..r.rank())
        .map(|i| {
            if i == r.unit() {
                Ok(1)
            } else if d[i] < 1.0 - 1e-12 {
                Err(FusionError::BelowOne(i))
            } else {
                Ok(scale * (d[i] + 1e-12).floor() as u64)
            }
        })
        .collect()
}

/// The constant function Max_{i,j} Σ_k N_{ij}^k off the unit.
pub fn constant_wdf(r: &BasedRing) -> Vec<u64> {
    let c = u64::from(r.max_total_multiplicity());
    (0..r.rank()).map(|i| if i == r.unit() { 1 } else { c }).collect()
}

/// S and T matrices with the modularity relations.
#[derive(Debug, Clone)]
pub struct ModularData {
    pub theta: Vec<CycScalar>,
    pub dims: Vec<CycScalar>,
    pub s: Mat,
    pub t: Mat,
    pub modular: bool,
    pub report: Report,
}

impl ModularData {
    /// S/√(Σ d_i²) as floats.
    pub fn normalized_s(&self) -> Vec<Vec<num_complex::Complex64>> {
        let total: f64 = self.dims.iter().map(|d| d.embed().value.norm_sqr()).sum();
        let scale = total.sqrt();
        self.s.to_dense().iter().map(|row| row.iter().map(|x| x.embed().value / scale).collect()).collect()
    }
}

/// Scalar c with a = c·b when one exists.
pub fn proportional(a: &Mat, b: &Mat) -> Option<CycScalar> {
    let (i, j, bv) = b.entries().next().map(|(i, j, v)| (i, j, v.clone()))?;
    let c = &a.get(i, j) * &bv.inv().ok()?;
    (*a == b.scale(&c)).then_some(c)
}

/// S_{ij} = θ_i⁻¹θ_j⁻¹Σ_k N_{ij}^k θ_k d_k, the trace of the double braiding on X_i⊗X_j, and T = diag(θ⁻¹).
pub fn modular_data(r: &BasedRing, theta: &[CycScalar], dims: &[CycScalar]) -> Result<ModularData, FusionError> {
    let n = r.rank();
    for len in [theta.len(), dims.len()] {
        if len != n {
            return Err(FusionError::Length { expected: n, got: len });
        }
    }
    let tinv: Vec<CycScalar> = theta.iter().map(CycScalar::inv).collect::<Result<_, _>>()?;
    let s = Mat::from_fn(n, n, |i, j| {
        let sum = r.product(i, j).iter().fold(CycScalar::zero(), |acc, &(k, c)| &acc + &(&theta[k] * &dims[k]).mul_i64(c.into()));
        &(&tinv[i] * &tinv[j]) * &sum
    });
    let t = Mat::diag(&tinv);
    let conj = Mat::from_fn(n, n, |i, j| if j == r.dual(i) { CycScalar::one() } else { CycScalar::zero() });
    let mut report = Report::new("modular data");
    let invertible = s.inverse().is_some();
    report.flag("S invertible", invertible, None);
    report.flag("S symmetric", s.transpose() == s, None);
    let s2 = s.mul(&s);
    let s2c = proportional(&s2, &conj);
    report.flag("S² ∝ C", s2c.is_some(), s2c.map(|c| format!("factor {c}")));
    let st = s.mul(&t);
    let st3 = st.mul(&st).mul(&st);
    report.flag("(ST)³ ∝ S²", invertible && proportional(&st3, &s2).is_some(), None);
    Ok(ModularData { theta: theta.to_vec(), dims: dims.to_vec(), s, t, modular: invertible, report })
}

/// θ, quantum dimensions and modular data of the level-ℓ sl_N category.
pub fn sln_modular_data(n: usize, ell: usize) -> Result<(BasedRing, ModularData), FusionError> {
    let (ring, wd) = sln_verlinde(n, ell)?;
    let theta = wd.weights().iter().map(|l| ribbon_theta(&wd, l)).collect::<Result<Vec<_>, _>>()?;
    let dims = wd.weights().iter().map(|l| qdim(&wd, l)).collect::<Result<Vec<_>, _>>()?;
    let md = modular_data(&ring, &theta, &dims)?;
    Ok((ring, md))
}

#[cfg(test)]
mod tests;
