//! Multi-matrix block algebras A = ⊕_r M_{n_r} and their tensor powers.
//!
//! An [`AlgTensor`] with k legs stores one matrix per block tuple
//! (r_1, …, r_k); absent tuples are zero. Composite indices inside a tuple
//! block are row-major with the first leg most significant.

mod mat;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use smallvec::SmallVec;

pub use mat::{CrFactors, Mat};

use crate::scalars::{CycScalar, ScalarError};

pub type Key = SmallVec<[usize; 4]>;

pub const MAX_LEGS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlockError {
    #[error("invalid block shape: {0}")]
    Shape(String),
    #[error("leg count mismatch: {0} vs {1}")]
    Legs(usize, usize),
    #[error("tensors live over different block shapes")]
    ShapeMismatch,
    #[error("at most {MAX_LEGS} legs are supported, got {0}")]
    LegOverflow(usize),
    #[error("block {key:?} has size {got}, expected {expected}")]
    BlockSize { key: Vec<usize>, got: usize, expected: usize },
    #[error("invalid leg permutation {0:?}")]
    Permutation(Vec<usize>),
    #[error("not partially invertible on block {0:?}")]
    NotPartiallyInvertible(Vec<usize>),
    #[error("coproduct is not an algebra homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("block {0} is not one-dimensional")]
    NotCounitBlock(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Block dimensions, labels and the positive diagonal Gram weights that define the star.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockShape {
    dims: Vec<usize>,
    labels: Vec<String>,
    gram: Vec<Vec<CycScalar>>,
}

impl BlockShape {
    pub fn new(dims: Vec<usize>, labels: Vec<String>) -> Result<BlockShape, BlockError> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(BlockError::Shape("dimensions must be nonempty and positive".into()));
        }
        if labels.len() != dims.len() {
            return Err(BlockError::Shape("one label per block required".into()));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(BlockError::Shape("labels must be distinct".into()));
        }
        let gram = dims.iter().map(|&n| vec![CycScalar::one(); n]).collect();
        Ok(BlockShape { dims, labels, gram })
    }

    /// Blocks labelled `prefix0`, `prefix1`, ….
    pub fn numbered(dims: Vec<usize>, prefix: &str) -> Result<BlockShape, BlockError> {
        let labels = (0..dims.len()).map(|i| format!("{prefix}{i}")).collect();
        BlockShape::new(dims, labels)
    }

    /// Replaces the Gram weights; each must be nonzero and fixed by conjugation.
    pub fn with_gram(mut self, gram: Vec<Vec<CycScalar>>) -> Result<BlockShape, BlockError> {
        if gram.len() != self.dims.len() || gram.iter().zip(&self.dims).any(|(g, &n)| g.len() != n) {
            return Err(BlockError::Shape("Gram weights must match block dimensions".into()));
        }
        if gram.iter().flatten().any(|h| h.is_zero() || !h.is_real()) {
            return Err(BlockError::Shape("Gram weights must be nonzero reals".into()));
        }
        self.gram = gram;
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, r: usize) -> usize {
        self.dims[r]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, r: usize) -> &str {
        &self.labels[r]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn gram(&self, r: usize) -> &[CycScalar] {
        &self.gram[r]
    }

    pub fn has_trivial_gram(&self) -> bool {
        self.gram.iter().flatten().all(CycScalar::is_one)
    }

    pub fn tuple_dim(&self, key: &[usize]) -> usize {
        key.iter().map(|&r| self.dims[r]).product()
    }

    /// All block tuples with `legs` entries in lexicographic index order.
    pub fn keys(&self, legs: usize) -> Vec<Key> {
        let s = self.len();
        let mut out = vec![Key::new()];
        for _ in 0..legs {
            out = out
                .into_iter()
                .flat_map(|k| {
                    (0..s).map(move |r| {
                        let mut k2 = k.clone();
                        k2.push(r);
                        k2
                    })
                })
                .collect();
        }
        out
    }

    /// Product Gram weights on the composite basis of a tuple.
    pub fn gram_weights(&self, key: &[usize]) -> Vec<CycScalar> {
        let mut w = vec![CycScalar::one()];
        for &r in key {
            w = w.iter().flat_map(|a| self.gram[r].iter().map(move |h| a * h)).collect();
        }
        w
    }

    pub fn key_labels(&self, key: &[usize]) -> Vec<String> {
        key.iter().map(|&r| self.labels[r].clone()).collect()
    }
}

/// Location and size of the largest residual entry of a failed tensor identity.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Witness {
    pub block: Vec<String>,
    pub row: usize,
    pub col: usize,
    pub magnitude: f64,
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "block ({}) entry ({}, {}) |residual| = {:.3e}", self.block.join(","), self.row, self.col, self.magnitude)
    }
}

/// Element of A^{⊗k}, k ≤ 4.
#[derive(Clone, Debug)]
pub struct AlgTensor {
    shape: Arc<BlockShape>,
    legs: usize,
    blocks: BTreeMap<Key, Mat>,
}

impl PartialEq for AlgTensor {
    fn eq(&self, other: &Self) -> bool {
        self.legs == other.legs && self.blocks == other.blocks
    }
}

/// Composite index ↔ per-leg indices for a block tuple.
fn split_index(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

fn join_index(parts: &[usize], dims: &[usize]) -> usize {
    parts.iter().zip(dims).fold(0, |acc, (&p, &d)| acc * d + p)
}

impl AlgTensor {
    pub fn zero(shape: &Arc<BlockShape>, legs: usize) -> AlgTensor {
        AlgTensor { shape: shape.clone(), legs, blocks: BTreeMap::new() }
    }

    pub fn identity(shape: &Arc<BlockShape>, legs: usize) -> AlgTensor {
        let blocks = shape
            .keys(legs)
            .into_iter()
            .map(|k| {
                let n = shape.tuple_dim(&k);
                (k, Mat::identity(n))
            })
            .collect();
        AlgTensor { shape: shape.clone(), legs, blocks }
    }

    /// Builds from explicit blocks, dropping zero blocks and checking sizes.
    pub fn from_blocks(
        shape: &Arc<BlockShape>,
        legs: usize,
        blocks: impl IntoIterator<Item = (Key, Mat)>,
    ) -> Result<AlgTensor, BlockError> {
        if legs == 0 || legs > MAX_LEGS {
            return Err(BlockError::LegOverflow(legs));
        }
        let mut out = AlgTensor::zero(shape, legs);
        for (k, m) in blocks {
            if k.len() != legs || k.iter().any(|&r| r >= shape.len()) {
                return Err(BlockError::Shape(format!("bad block tuple {k:?}")));
            }
            let n = shape.tuple_dim(&k);
            if m.rows() != n || m.cols() != n {
                return Err(BlockError::BlockSize { key: k.to_vec(), got: m.rows().max(m.cols()), expected: n });
            }
            out.accumulate(k, m);
        }
        Ok(out)
    }

    /// One-leg element from a matrix per block.
    pub fn element(shape: &Arc<BlockShape>, blocks: Vec<Mat>) -> Result<AlgTensor, BlockError> {
        AlgTensor::from_blocks(shape, 1, blocks.into_iter().enumerate().map(|(r, m)| (smallvec::smallvec![r], m)))
    }

    /// One-leg element acting as the scalar `vals[r]` on block r.
    pub fn central(shape: &Arc<BlockShape>, vals: &[CycScalar]) -> AlgTensor {
        let blocks = vals.iter().enumerate().map(|(r, v)| Mat::scalar(shape.dim(r), v)).collect();
        AlgTensor::element(shape, blocks).expect("central element sizes match")
    }

    pub fn matrix_unit(shape: &Arc<BlockShape>, r: usize, i: usize, j: usize) -> AlgTensor {
        let n = shape.dim(r);
        let mut out = AlgTensor::zero(shape, 1);
        out.blocks.insert(smallvec::smallvec![r], Mat::unit(n, n, i, j));
        out
    }

    pub(crate) fn accumulate(&mut self, key: Key, m: Mat) {
        if m.is_zero() {
            return;
        }
        match self.blocks.remove(&key) {
            Some(prev) => {
                let sum = prev.add(&m);
                if !sum.is_zero() {
                    self.blocks.insert(key, sum);
                }
            }
            None => {
                self.blocks.insert(key, m);
            }
        }
    }

    pub fn shape(&self) -> &Arc<BlockShape> {
        &self.shape
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn block(&self, key: &[usize]) -> Option<&Mat> {
        self.blocks.get(key)
    }

    pub fn block_or_zero(&self, key: &[usize]) -> Mat {
        match self.blocks.get(key) {
            Some(m) => m.clone(),
            None => {
                let n = self.shape.tuple_dim(key);
                Mat::zeros(n, n)
            }
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&Key, &Mat)> {
        self.blocks.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    fn check(&self, other: &AlgTensor) -> Result<(), BlockError> {
        if self.legs != other.legs {
            return Err(BlockError::Legs(self.legs, other.legs));
        }
        if !Arc::ptr_eq(&self.shape, &other.shape) && self.shape != other.shape {
            return Err(BlockError::ShapeMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &AlgTensor) -> Result<AlgTensor, BlockError> {
        self.check(other)?;
        let pairs: Vec<(&Key, &Mat, &Mat)> =
            self.blocks.iter().filter_map(|(k, a)| other.blocks.get(k).map(|b| (k, a, b))).collect();
        let prods = crate::par::map_collect(&pairs, |(k, a, b)| ((*k).clone(), a.mul(b)));
        let blocks = prods.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        Ok(AlgTensor { shape: self.shape.clone(), legs: self.legs, blocks })
    }

    /// Product of a chain of tensors, left to right.
    pub fn product(factors: &[&AlgTensor]) -> Result<AlgTensor, BlockError> {
        let (first, rest) = factors.split_first().expect("nonempty product");
        rest.iter().try_fold((*first).clone(), |acc, f| acc.mul(f))
    }

    pub fn add(&self, other: &AlgTensor) -> Result<AlgTensor, BlockError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, m) in &other.blocks {
            out.accumulate(k.clone(), m.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &AlgTensor) -> Result<AlgTensor, BlockError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> AlgTensor {
        self.map_blocks(|_, m| m.neg())
    }

    pub fn scale(&self, s: &CycScalar) -> AlgTensor {
        self.map_blocks(|_, m| m.scale(s))
    }

    pub fn map_blocks(&self, f: impl Fn(&Key, &Mat) -> Mat) -> AlgTensor {
        let blocks = self
            .blocks
            .iter()
            .map(|(k, m)| (k.clone(), f(k, m)))
            .filter(|(_, m)| !m.is_zero())
            .collect();
        AlgTensor { shape: self.shape.clone(), legs: self.legs, blocks }
    }

    /// Kronecker product a⊗b with legs concatenated.
    pub fn outer(&self, other: &AlgTensor) -> Result<AlgTensor, BlockError> {
        let legs = self.legs + other.legs;
        if legs > MAX_LEGS {
            return Err(BlockError::LegOverflow(legs));
        }
        if !Arc::ptr_eq(&self.shape, &other.shape) && self.shape != other.shape {
            return Err(BlockError::ShapeMismatch);
        }
        let mut blocks = BTreeMap::new();
        for (ka, a) in &self.blocks {
            for (kb, b) in &other.blocks {
                let mut k = ka.clone();
                k.extend(kb.iter().copied());
                blocks.insert(k, a.kron(b));
            }
        }
        Ok(AlgTensor { shape: self.shape.clone(), legs, blocks })
    }

    /// Block of a⊗b at a tuple without forming the full tensor.
    pub fn outer_block(a: &AlgTensor, b: &AlgTensor, key: &[usize]) -> Option<Mat> {
        let (ka, kb) = key.split_at(a.legs);
        Some(a.blocks.get(ka)?.kron(b.blocks.get(kb)?))
    }

    /// Leg j moves to position perm[j], so (a⊗b⊗c) with perm [2, 0, 1] gives b⊗c⊗a.
    pub fn permute_legs(&self, perm: &[usize]) -> Result<AlgTensor, BlockError> {
        let mut seen = vec![false; self.legs];
        if perm.len() != self.legs || perm.iter().any(|&p| p >= self.legs || std::mem::replace(&mut seen[p], true)) {
            return Err(BlockError::Permutation(perm.to_vec()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|(k, m)| {
                let (nk, mapped) = permute_block(&self.shape, k, m, perm);
                (nk, mapped)
            })
            .collect();
        Ok(AlgTensor { shape: self.shape.clone(), legs: self.legs, blocks })
    }

    /// Block of the permuted tensor at `key` (a key of the result).
    pub fn permuted_block(&self, perm: &[usize], key: &[usize]) -> Option<Mat> {
        let src: Key = (0..self.legs).map(|j| key[perm[j]]).collect();
        let m = self.blocks.get(&src)?;
        Some(permute_block(&self.shape, &src, m, perm).1)
    }

    /// The star a ↦ a*: H⁻¹ a† H per tuple with the product Gram weights H.
    pub fn adjoint(&self) -> AlgTensor {
        let trivial = self.shape.has_trivial_gram();
        let blocks = self
            .blocks
            .iter()
            .map(|(k, m)| {
                let t = m.conj_transpose();
                if trivial {
                    return (k.clone(), t);
                }
                let w = self.shape.gram_weights(k);
                let winv: Vec<CycScalar> = w.iter().map(|h| h.inv().expect("nonzero Gram weight")).collect();
                let items = t.entries().map(|(i, j, v)| (i, j, &(&winv[i] * v) * &w[j])).collect::<Vec<_>>();
                (k.clone(), Mat::from_triplets(t.rows(), t.cols(), items))
            })
            .collect();
        AlgTensor { shape: self.shape.clone(), legs: self.legs, blocks }
    }

    /// Gram-weighted Hermitian form H·a of a tuple block.
    pub fn hermitian_block(&self, key: &[usize]) -> Option<Mat> {
        let m = self.blocks.get(key)?;
        let w = self.shape.gram_weights(key);
        Some(Mat::diag(&w).mul(m))
    }

    /// Partial inverse of `self` with domain `p`.
    ///
    /// With `range` given, returns the unique X = p·X·q with X·t = p and t·X = q.
    /// Without it, q is the Gram-orthogonal projection onto the range of t.
    pub fn partial_inverse(&self, p: &AlgTensor, range: Option<&AlgTensor>) -> Result<(AlgTensor, AlgTensor), BlockError> {
        self.check(p)?;
        if let Some(q) = range {
            self.check(q)?;
        }
        let keys: Vec<Key> = p.blocks.keys().cloned().collect();
        let results = crate::par::map_collect(&keys, |k| {
            let t = self.block_or_zero(k);
            let pk = &p.blocks[k];
            let q = range.map(|q| q.block_or_zero(k));
            partial_inverse_block(&self.shape, k, &t, pk, q.as_ref())
        });
        let mut tinv = AlgTensor::zero(&self.shape, self.legs);
        let mut qout = AlgTensor::zero(&self.shape, self.legs);
        for (k, r) in keys.into_iter().zip(results) {
            let (x, q) = r?;
            tinv.accumulate(k.clone(), x);
            qout.accumulate(k, q);
        }
        // blocks of t outside the domain must vanish for t = t·p
        if self.blocks.keys().any(|k| !p.blocks.contains_key(k)) {
            let k = self.blocks.keys().find(|k| !p.blocks.contains_key(*k)).expect("exists");
            return Err(BlockError::NotPartiallyInvertible(k.to_vec()));
        }
        Ok((tinv, qout))
    }

    /// Removes leg `leg` by evaluating on a one-dimensional block (ε on that leg).
    pub fn eval_leg(&self, leg: usize, block: usize) -> Result<AlgTensor, BlockError> {
        if self.shape.dim(block) != 1 {
            return Err(BlockError::NotCounitBlock(block));
        }
        if self.legs == 1 {
            return Err(BlockError::LegOverflow(0));
        }
        let blocks = self
            .blocks
            .iter()
            .filter(|(k, _)| k[leg] == block)
            .map(|(k, m)| {
                let mut nk = k.clone();
                nk.remove(leg);
                (nk, m.clone())
            })
            .collect();
        Ok(AlgTensor { shape: self.shape.clone(), legs: self.legs - 1, blocks })
    }

    /// ε of a one-leg element: the entry on the one-dimensional block.
    pub fn eval_scalar(&self, block: usize) -> CycScalar {
        self.blocks.get([block].as_slice()).map(|m| m.get(0, 0)).unwrap_or_default()
    }

    /// Largest entry of self − other, or None when equal.
    pub fn residual(&self, other: &AlgTensor) -> Option<Witness> {
        let mut best: Option<Witness> = None;
        let mut keys: Vec<&Key> = self.blocks.keys().chain(other.blocks.keys()).collect();
        keys.sort();
        keys.dedup();
        for k in keys {
            let d = match (self.blocks.get(k), other.blocks.get(k)) {
                (Some(a), Some(b)) => {
                    if a == b {
                        continue;
                    }
                    a.sub(b)
                }
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => continue,
            };
            if let Some(w) = block_witness(&self.shape, k, &d) {
                if best.as_ref().is_none_or(|b| w.magnitude > b.magnitude) {
                    best = Some(w);
                }
            }
        }
        best
    }

    /// Trace of the block on a tuple.
    pub fn block_trace(&self, key: &[usize]) -> CycScalar {
        self.blocks.get(key).map(Mat::trace).unwrap_or_default()
    }

    /// Σ x_1·m_1·x_2·…·m_{k−1}·x_k for self = Σ x_1⊗…⊗x_k and one-leg `mids`.
    pub fn contract(&self, mids: &[&AlgTensor]) -> AlgTensor {
        assert_eq!(mids.len() + 1, self.legs, "one inserted element per adjacent leg pair");
        let mut out = AlgTensor::zero(&self.shape, 1);
        for (k, x) in &self.blocks {
            let r = k[0];
            if k.iter().any(|&q| q != r) {
                continue;
            }
            let n = self.shape.dim(r);
            let dims = vec![n; self.legs];
            let ms: Vec<Mat> = mids.iter().map(|m| m.block_or_zero(&[r])).collect();
            let mut pi = vec![0; self.legs];
            let mut pj = vec![0; self.legs];
            let mut items = Vec::new();
            for (row, col, v) in x.entries() {
                split_index(row, &dims, &mut pi);
                split_index(col, &dims, &mut pj);
                let mut f = v.clone();
                for t in 0..mids.len() {
                    let m = ms[t].get(pj[t], pi[t + 1]);
                    if m.is_zero() {
                        f = CycScalar::zero();
                        break;
                    }
                    f = &f * &m;
                }
                if !f.is_zero() {
                    items.push((pi[0], pj[self.legs - 1], f));
                }
            }
            out.accumulate(smallvec::smallvec![r], Mat::from_triplets(n, n, items));
        }
        out
    }

    /// Two-leg contraction of a four-leg tensor: the first output leg is
    /// x_{a}·m·x_{b} for `first = (a, b, m)`, the second likewise.
    pub fn contract_pairs(&self, first: (usize, usize, &AlgTensor), second: (usize, usize, &AlgTensor)) -> AlgTensor {
        let mut out = AlgTensor::zero(&self.shape, 2);
        for (k, x) in &self.blocks {
            if let Some((nk, m)) = contract_pairs_block(&self.shape, k, x, first, second) {
                out.accumulate(nk, m);
            }
        }
        out
    }

    /// Dense text form: one row-major matrix of scalar literals per tuple, ordered by labels.
    pub fn to_text(&self) -> String {
        let mut keys: Vec<&Key> = self.blocks.keys().collect();
        keys.sort_by_key(|k| self.shape.key_labels(k));
        let mut s = String::new();
        for k in keys {
            let m = &self.blocks[k];
            let _ = writeln!(s, "block {}", self.shape.key_labels(k).join(" "));
            for row in m.to_dense() {
                let line: Vec<String> =
                    row.iter().map(|v| if v.is_zero() { "0".to_string() } else { v.to_string() }).collect();
                let _ = writeln!(s, "  {}", line.join(" "));
            }
        }
        s
    }

    /// Parses the output of [`AlgTensor::to_text`].
    pub fn from_text(shape: &Arc<BlockShape>, legs: usize, text: &str) -> Result<AlgTensor, BlockError> {
        let mut out = AlgTensor::zero(shape, legs);
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty()).peekable();
        while let Some(line) = lines.next() {
            let labels = line
                .strip_prefix("block")
                .ok_or_else(|| BlockError::Parse(format!("expected `block`, found `{line}`")))?;
            let key: Key = labels
                .split_whitespace()
                .map(|l| shape.index_of(l).ok_or_else(|| BlockError::Parse(format!("unknown block label `{l}`"))))
                .collect::<Result<_, _>>()?;
            if key.len() != legs {
                return Err(BlockError::Parse(format!("tuple `{labels}` has wrong leg count")));
            }
            let n = shape.tuple_dim(&key);
            let mut entries = Vec::with_capacity(n * n);
            for _ in 0..n {
                let row = lines.next().ok_or_else(|| BlockError::Parse("truncated block".into()))?;
                for tok in split_literals(row) {
                    entries.push(parse_scalar(tok)?);
                }
            }
            if entries.len() != n * n {
                return Err(BlockError::Parse(format!("block `{labels}` has {} entries, expected {}", entries.len(), n * n)));
            }
            out.accumulate(key, Mat::from_dense(n, n, &entries));
        }
        Ok(out)
    }
}

/// Splits a row of literals; `cyc(...)` tokens may contain spaces.
pub fn split_literals(row: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start: Option<usize> = None;
    for (i, ch) in row.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c.is_whitespace() && depth == 0 => {
                if let Some(s) = start.take() {
                    out.push(&row[s..i]);
                }
                continue;
            }
            _ => {}
        }
        if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&row[s..]);
    }
    out
}

/// Scalar literal, also accepting a bare rational `a/b` for cyc(1; a/b).
pub fn parse_scalar(tok: &str) -> Result<CycScalar, BlockError> {
    let tok = tok.trim();
    if tok.starts_with("cyc(") {
        return Ok(tok.parse::<CycScalar>()?);
    }
    let lit = format!("cyc(1; {tok})");
    lit.parse::<CycScalar>().map_err(|_| BlockError::Parse(format!("bad scalar `{tok}`")))
}

/// Block form of [`AlgTensor::contract_pairs`].
pub fn contract_pairs_block(
    shape: &BlockShape,
    key: &[usize],
    x: &Mat,
    first: (usize, usize, &AlgTensor),
    second: (usize, usize, &AlgTensor),
) -> Option<(Key, Mat)> {
    let (a0, a1, ma) = first;
    let (b0, b1, mb) = second;
    if key[a0] != key[a1] || key[b0] != key[b1] {
        return None;
    }
    let (r, s) = (key[a0], key[b0]);
    let (nr, ns) = (shape.dim(r), shape.dim(s));
    let ma = ma.block_or_zero(&[r]);
    let mb = mb.block_or_zero(&[s]);
    let dims: Vec<usize> = key.iter().map(|&q| shape.dim(q)).collect();
    let mut pi = vec![0; key.len()];
    let mut pj = vec![0; key.len()];
    let mut items = Vec::new();
    for (row, col, v) in x.entries() {
        split_index(row, &dims, &mut pi);
        split_index(col, &dims, &mut pj);
        let fa = ma.get(pj[a0], pi[a1]);
        if fa.is_zero() {
            continue;
        }
        let fb = mb.get(pj[b0], pi[b1]);
        if fb.is_zero() {
            continue;
        }
        items.push((pi[a0] * ns + pi[b0], pj[a1] * ns + pj[b1], &(v * &fa) * &fb));
    }
    Some((smallvec::smallvec![r, s], Mat::from_triplets(nr * ns, nr * ns, items)))
}

pub fn block_witness(shape: &BlockShape, key: &[usize], diff: &Mat) -> Option<Witness> {
    let (row, col, magnitude) = diff.max_entry()?;
    Some(Witness { block: shape.key_labels(key), row, col, magnitude })
}

fn permute_block(shape: &BlockShape, key: &[usize], m: &Mat, perm: &[usize]) -> (Key, Mat) {
    let legs = key.len();
    let dims: Vec<usize> = key.iter().map(|&r| shape.dim(r)).collect();
    let mut new_key: Key = smallvec::smallvec![0; legs];
    let mut new_dims = vec![0; legs];
    for j in 0..legs {
        new_key[perm[j]] = key[j];
        new_dims[perm[j]] = dims[j];
    }
    let n = m.rows();
    let mut parts = vec![0; legs];
    let mut moved = vec![0; legs];
    let map: Vec<usize> = (0..n)
        .map(|i| {
            split_index(i, &dims, &mut parts);
            for j in 0..legs {
                moved[perm[j]] = parts[j];
            }
            join_index(&moved, &new_dims)
        })
        .collect();
    (new_key, m.reindex(&map, &map))
}

fn partial_inverse_block(
    shape: &BlockShape,
    key: &[usize],
    t: &Mat,
    p: &Mat,
    q: Option<&Mat>,
) -> Result<(Mat, Mat), BlockError> {
    let fail = || BlockError::NotPartiallyInvertible(key.to_vec());
    let pf = p.cr_factor();
    let (u, v) = (pf.c, pf.r);
    if !v.mul(&u).is_identity() {
        return Err(fail());
    }
    let y = t.mul(&u);
    match q {
        Some(q) => {
            let qf = q.cr_factor();
            let (w, z) = (qf.c, qf.r);
            if !z.mul(&w).is_identity() || q.mul(&y) != y || w.cols() != u.cols() {
                return Err(fail());
            }
            let m = z.mul(&y);
            let minv = m.inverse().ok_or_else(fail)?;
            let l = minv.mul(&z);
            Ok((u.mul(&l), q.clone()))
        }
        None => {
            if u.cols() == 0 {
                let n = t.rows();
                return Ok((Mat::zeros(n, n), Mat::zeros(n, n)));
            }
            let h = Mat::diag(&shape.gram_weights(key));
            let yh = y.conj_transpose().mul(&h);
            let normal = yh.mul(&y);
            let l = match normal.inverse() {
                Some(ninv) => ninv.mul(&yh),
                None => {
                    // fall back to an elimination-chosen left inverse
                    let yf = y.transpose().cr_factor();
                    if yf.pivots.len() < u.cols() {
                        return Err(fail());
                    }
                    let rows = y.submatrix(&yf.pivots, &(0..u.cols()).collect::<Vec<_>>());
                    let inv = rows.inverse().ok_or_else(fail)?;
                    let sel = Mat::from_triplets(
                        u.cols(),
                        y.rows(),
                        yf.pivots.iter().enumerate().map(|(a, &b)| (a, b, CycScalar::one())),
                    );
                    inv.mul(&sel)
                }
            };
            if !l.mul(&y).is_identity() {
                return Err(fail());
            }
            Ok((u.mul(&l), y.mul(&l)))
        }
    }
}

/// One isotypic summand of Δ on a block pair: Δ(x)_{st} ⊇ ι·x_r·π.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub target: usize,
    pub iota: Mat,
    pub pi: Mat,
}

/// A coproduct A → A⊗A stored by its values on matrix units, with the
/// isotypic factorization derived from the table.
#[derive(Debug, Clone)]
pub struct CoproductMap {
    shape: Arc<BlockShape>,
    table: Vec<Vec<AlgTensor>>,
    comps: BTreeMap<(usize, usize), Vec<Component>>,
    by_target: Vec<Vec<(usize, usize, usize)>>,
}

impl CoproductMap {
    /// Validates a table of Δ(e^r_{ij}) (row-major per block) as a homomorphism.
    pub fn from_table(shape: &Arc<BlockShape>, table: Vec<Vec<AlgTensor>>) -> Result<CoproductMap, BlockError> {
        if table.len() != shape.len() {
            return Err(BlockError::Shape("coproduct table needs one entry list per block".into()));
        }
        for (r, t) in table.iter().enumerate() {
            let n = shape.dim(r);
            if t.len() != n * n || t.iter().any(|x| x.legs != 2) {
                return Err(BlockError::Shape(format!("coproduct table for block {r} is malformed")));
            }
        }
        let mut comps: BTreeMap<(usize, usize), Vec<Component>> = BTreeMap::new();
        for (r, t) in table.iter().enumerate() {
            let n = shape.dim(r);
            for (k, w) in t[0].blocks.iter() {
                let f = w.cr_factor();
                for c in 0..f.c.cols() {
                    let col = f.c.submatrix(&(0..f.c.rows()).collect::<Vec<_>>(), &[c]);
                    let row = f.r.submatrix(&[c], &(0..f.r.cols()).collect::<Vec<_>>());
                    let mut iota_cols = Vec::with_capacity(n);
                    let mut pi_rows = Vec::with_capacity(n);
                    for j in 0..n {
                        iota_cols.push(t[j * n].block_or_zero(k).mul(&col));
                        pi_rows.push(row.mul(&t[j].block_or_zero(k)));
                    }
                    let iota = iota_cols.iter().skip(1).fold(iota_cols[0].clone(), |acc, c| acc.hcat(c));
                    let pi = pi_rows.iter().skip(1).fold(pi_rows[0].clone(), |acc, r| acc.vcat(r));
                    comps.entry((k[0], k[1])).or_default().push(Component { target: r, iota, pi });
                }
            }
        }
        let map = CoproductMap::assemble(shape, table, comps);
        map.validate()?;
        Ok(map)
    }

    /// Builds Δ(x)_{st} = Σ ι_c x_{r_c} π_c from explicit summands.
    pub fn from_components(
        shape: &Arc<BlockShape>,
        comps: BTreeMap<(usize, usize), Vec<Component>>,
    ) -> Result<CoproductMap, BlockError> {
        for (&(s, t), list) in &comps {
            let n = shape.dim(s) * shape.dim(t);
            for c in list {
                let nr = shape.dim(c.target);
                if c.iota.rows() != n || c.iota.cols() != nr || c.pi.rows() != nr || c.pi.cols() != n {
                    return Err(BlockError::Shape(format!("component on pair ({s},{t}) has wrong size")));
                }
            }
        }
        let mut table = Vec::with_capacity(shape.len());
        for r in 0..shape.len() {
            let n = shape.dim(r);
            let mut entries = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let mut t = AlgTensor::zero(shape, 2);
                    for (&(s, u), list) in &comps {
                        for c in list.iter().filter(|c| c.target == r) {
                            let m = c.iota.mul(&Mat::unit(n, n, i, j)).mul(&c.pi);
                            t.accumulate(smallvec::smallvec![s, u], m);
                        }
                    }
                    entries.push(t);
                }
            }
            table.push(entries);
        }
        let map = CoproductMap::assemble(shape, table, comps);
        map.validate()?;
        Ok(map)
    }

    fn assemble(
        shape: &Arc<BlockShape>,
        table: Vec<Vec<AlgTensor>>,
        comps: BTreeMap<(usize, usize), Vec<Component>>,
    ) -> CoproductMap {
        let mut by_target = vec![Vec::new(); shape.len()];
        for (&(s, t), list) in &comps {
            for (i, c) in list.iter().enumerate() {
                by_target[c.target].push((s, t, i));
            }
        }
        CoproductMap { shape: shape.clone(), table, comps, by_target }
    }

    /// π_c ι_{c'} = δ and every table entry reproduced from the summands.
    fn validate(&self) -> Result<(), BlockError> {
        for (&(s, t), list) in &self.comps {
            for (a, ca) in list.iter().enumerate() {
                for (b, cb) in list.iter().enumerate() {
                    let m = ca.pi.mul(&cb.iota);
                    let ok = if a == b { m.is_identity() } else { m.is_zero() };
                    if !ok {
                        return Err(BlockError::NotHomomorphism(format!(
                            "summands {a} and {b} on pair ({}, {}) are not orthogonal",
                            self.shape.label(s),
                            self.shape.label(t)
                        )));
                    }
                }
            }
        }
        for r in 0..self.shape.len() {
            let n = self.shape.dim(r);
            for i in 0..n {
                for j in 0..n {
                    let rebuilt = self.apply(&AlgTensor::matrix_unit(&self.shape, r, i, j));
                    if let Some(w) = rebuilt.residual(&self.table[r][i * n + j]) {
                        return Err(BlockError::NotHomomorphism(format!(
                            "image of unit ({i},{j}) in block {} is not multiplicative: {w}",
                            self.shape.label(r)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> &Arc<BlockShape> {
        &self.shape
    }

    pub fn table(&self) -> &[Vec<AlgTensor>] {
        &self.table
    }

    pub fn unit_image(&self, r: usize, i: usize, j: usize) -> &AlgTensor {
        &self.table[r][i * self.shape.dim(r) + j]
    }

    pub fn components(&self, s: usize, t: usize) -> &[Component] {
        self.comps.get(&(s, t)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_components(&self) -> &BTreeMap<(usize, usize), Vec<Component>> {
        &self.comps
    }

    /// Multiplicity of block r in the pair (s, t).
    pub fn multiplicity(&self, s: usize, t: usize, r: usize) -> usize {
        self.components(s, t).iter().filter(|c| c.target == r).count()
    }

    pub fn apply(&self, a: &AlgTensor) -> AlgTensor {
        self.apply_slot(a, 0).expect("one-leg input")
    }

    pub fn delta_identity(&self) -> AlgTensor {
        self.apply(&AlgTensor::identity(&self.shape, 1))
    }

    /// Applies Δ on leg `slot`, identity elsewhere.
    pub fn apply_slot(&self, a: &AlgTensor, slot: usize) -> Result<AlgTensor, BlockError> {
        if a.legs + 1 > MAX_LEGS {
            return Err(BlockError::LegOverflow(a.legs + 1));
        }
        if slot >= a.legs {
            return Err(BlockError::Shape(format!("slot {slot} out of range")));
        }
        let items: Vec<(&Key, &Mat)> = a.blocks.iter().collect();
        let parts = crate::par::map_collect(&items, |(k, m)| {
            let mut out = Vec::new();
            for &(s, t, c) in &self.by_target[k[slot]] {
                let comp = &self.comps[&(s, t)][c];
                let mut nk: Key = k[..slot].iter().copied().collect();
                nk.push(s);
                nk.push(t);
                nk.extend(k[slot + 1..].iter().copied());
                out.push((nk, self.embed(k, slot, comp, m)));
            }
            out
        });
        let mut res = AlgTensor::zero(&self.shape, a.legs + 1);
        for (k, m) in parts.into_iter().flatten() {
            res.accumulate(k, m);
        }
        Ok(res)
    }

    /// Block at `key` of Δ applied on leg `slot` of `a`, computed on demand.
    pub fn slot_block(&self, a: &AlgTensor, slot: usize, key: &[usize]) -> Mat {
        let n = self.shape.tuple_dim(key);
        let mut acc = Mat::zeros(n, n);
        let (s, t) = (key[slot], key[slot + 1]);
        for comp in self.components(s, t) {
            let mut src: Key = key[..slot].iter().copied().collect();
            src.push(comp.target);
            src.extend(key[slot + 2..].iter().copied());
            if let Some(m) = a.blocks.get(&src) {
                acc = acc.add(&self.embed(&src, slot, comp, m));
            }
        }
        acc
    }

    /// (1⊗ι⊗1)·m·(1⊗π⊗1) for a block of the source tensor.
    fn embed(&self, src: &[usize], slot: usize, comp: &Component, m: &Mat) -> Mat {
        let pre: usize = src[..slot].iter().map(|&r| self.shape.dim(r)).product();
        let post: usize = src[slot + 1..].iter().map(|&r| self.shape.dim(r)).product();
        let lift = |x: &Mat| Mat::identity(pre).kron(x).kron(&Mat::identity(post));
        lift(&comp.iota).mul(m).mul(&lift(&comp.pi))
    }

    /// Δ^op(a) = flip of Δ(a).
    pub fn apply_op(&self, a: &AlgTensor) -> AlgTensor {
        self.apply(a).permute_legs(&[1, 0]).expect("two legs")
    }

    /// Direct check Δ(e)Δ(f) = Δ(ef) on all pairs of matrix units; quadratic, for small algebras.
    pub fn check_multiplicative_pairwise(&self) -> Option<Witness> {
        let s = &self.shape;
        let units: Vec<(usize, usize, usize)> =
            (0..s.len()).flat_map(|r| (0..s.dim(r)).flat_map(move |i| (0..s.dim(r)).map(move |j| (r, i, j)))).collect();
        for &(r, i, j) in &units {
            for &(r2, k, l) in &units {
                let lhs = self.unit_image(r, i, j).mul(self.unit_image(r2, k, l)).expect("same shape");
                let rhs = if r == r2 && j == k {
                    self.unit_image(r, i, l).clone()
                } else {
                    AlgTensor::zero(s, 2)
                };
                if let Some(w) = lhs.residual(&rhs) {
                    return Some(w);
                }
            }
        }
        None
    }
}

/// A linear map A → A given by its values on matrix units.
#[derive(Debug, Clone)]
pub struct UnitMap {
    shape: Arc<BlockShape>,
    images: Vec<Vec<AlgTensor>>,
}

impl UnitMap {
    pub fn new(shape: &Arc<BlockShape>, images: Vec<Vec<AlgTensor>>) -> Result<UnitMap, BlockError> {
        if images.len() != shape.len()
            || images.iter().enumerate().any(|(r, v)| v.len() != shape.dim(r) * shape.dim(r) || v.iter().any(|t| t.legs != 1))
        {
            return Err(BlockError::Shape("unit map table is malformed".into()));
        }
        Ok(UnitMap { shape: shape.clone(), images })
    }

    pub fn identity(shape: &Arc<BlockShape>) -> UnitMap {
        UnitMap::from_fn(shape, |r, i, j| AlgTensor::matrix_unit(shape, r, i, j))
    }

    pub fn from_fn(shape: &Arc<BlockShape>, mut f: impl FnMut(usize, usize, usize) -> AlgTensor) -> UnitMap {
        let images = (0..shape.len())
            .map(|r| {
                let n = shape.dim(r);
                (0..n * n).map(|ij| f(r, ij / n, ij % n)).collect()
            })
            .collect();
        UnitMap { shape: shape.clone(), images }
    }

    pub fn image(&self, r: usize, i: usize, j: usize) -> &AlgTensor {
        &self.images[r][i * self.shape.dim(r) + j]
    }

    pub fn images(&self) -> &[Vec<AlgTensor>] {
        &self.images
    }

    pub fn apply(&self, a: &AlgTensor) -> AlgTensor {
        self.apply_leg(a, 0)
    }

    /// Applies the map on one leg of a tensor.
    pub fn apply_leg(&self, a: &AlgTensor, leg: usize) -> AlgTensor {
        let mut acc: BTreeMap<Key, Vec<(usize, usize, CycScalar)>> = BTreeMap::new();
        let mut parts = vec![0; a.legs];
        let mut parts2 = vec![0; a.legs];
        for (k, m) in &a.blocks {
            let dims: Vec<usize> = k.iter().map(|&r| self.shape.dim(r)).collect();
            let r = k[leg];
            for (row, col, x) in m.entries() {
                split_index(row, &dims, &mut parts);
                split_index(col, &dims, &mut parts2);
                let img = self.image(r, parts[leg], parts2[leg]);
                for (ik, im) in &img.blocks {
                    let s = ik[0];
                    let mut nk = k.clone();
                    nk[leg] = s;
                    let ndims: Vec<usize> = nk.iter().map(|&q| self.shape.dim(q)).collect();
                    let entry = acc.entry(nk).or_default();
                    for (i2, j2, y) in im.entries() {
                        parts[leg] = i2;
                        parts2[leg] = j2;
                        entry.push((join_index(&parts, &ndims), join_index(&parts2, &ndims), x * y));
                    }
                }
            }
        }
        let mut out = AlgTensor::zero(&self.shape, a.legs);
        for (k, items) in acc {
            let n = self.shape.tuple_dim(&k);
            out.accumulate(k, Mat::from_triplets(n, n, items));
        }
        out
    }

    pub fn compose(&self, inner: &UnitMap) -> UnitMap {
        UnitMap::from_fn(&self.shape, |r, i, j| self.apply(inner.image(r, i, j)))
    }

    /// Inverse by solving the linear system on the matrix-unit basis.
    pub fn inverse(&self) -> Option<UnitMap> {
        let s = &self.shape;
        let index: Vec<(usize, usize, usize)> =
            (0..s.len()).flat_map(|r| (0..s.dim(r)).flat_map(move |i| (0..s.dim(r)).map(move |j| (r, i, j)))).collect();
        let pos = |r: usize, i: usize, j: usize| index.iter().position(|&u| u == (r, i, j)).expect("unit index");
        let dim = index.len();
        let mut items = Vec::new();
        for (c, &(r, i, j)) in index.iter().enumerate() {
            for (k, m) in &self.image(r, i, j).blocks {
                for (a, b, v) in m.entries() {
                    items.push((pos(k[0], a, b), c, v.clone()));
                }
            }
        }
        let mat = Mat::from_triplets(dim, dim, items);
        let inv = mat.inverse()?;
        Some(UnitMap::from_fn(s, |r, i, j| {
            let c = pos(r, i, j);
            let mut out = AlgTensor::zero(s, 1);
            for (row, &(r2, a, b)) in index.iter().enumerate() {
                let v = inv.get(row, c);
                if !v.is_zero() {
                    let n = s.dim(r2);
                    out.accumulate(smallvec::smallvec![r2], Mat::unit(n, n, a, b).scale(&v));
                }
            }
            out
        }))
    }

    /// First pair of units where S(xy) ≠ S(y)S(x).
    pub fn anti_multiplicative_witness(&self) -> Option<Witness> {
        let s = &self.shape;
        for r in 0..s.len() {
            let n = s.dim(r);
            for i in 0..n {
                for j in 0..n {
                    for r2 in 0..s.len() {
                        let n2 = s.dim(r2);
                        for k in 0..n2 {
                            for l in 0..n2 {
                                let lhs = if r == r2 && j == k {
                                    self.image(r, i, l).clone()
                                } else {
                                    AlgTensor::zero(s, 1)
                                };
                                let rhs = self.image(r2, k, l).mul(self.image(r, i, j)).expect("same shape");
                                if let Some(w) = lhs.residual(&rhs) {
                                    return Some(w);
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// True when the map sends the identity to the identity.
    pub fn is_unital(&self) -> bool {
        self.apply(&AlgTensor::identity(&self.shape, 1)) == AlgTensor::identity(&self.shape, 1)
    }
}

#[cfg(test)]
mod tests;
