//! Floating-point block tensors for data that leaves the cyclotomic field,
//! such as spectral square roots.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::blockalg::{AlgTensor, BlockShape, Key, Mat, Witness};

pub type CMat = DMatrix<Complex64>;

/// A two-leg tensor with complex floating blocks.
#[derive(Debug, Clone)]
pub struct NumTensor {
    shape: Arc<BlockShape>,
    blocks: BTreeMap<Key, CMat>,
}

pub fn to_cmat(m: &Mat) -> CMat {
    let mut out = CMat::zeros(m.rows(), m.cols());
    for (i, j, v) in m.entries() {
        out[(i, j)] = v.embed().value;
    }
    out
}

/// Square roots of the Gram weights of a tuple, as floats.
pub fn gram_sqrt(shape: &BlockShape, key: &[usize]) -> Vec<f64> {
    shape.gram_weights(key).iter().map(|h| h.embed().value.re.sqrt()).collect()
}

impl NumTensor {
    pub fn zero(shape: &Arc<BlockShape>) -> NumTensor {
        NumTensor { shape: shape.clone(), blocks: BTreeMap::new() }
    }

    pub fn from_exact(a: &AlgTensor) -> NumTensor {
        assert_eq!(a.legs(), 2, "numeric tensors have two legs");
        let blocks = a.blocks().map(|(k, m)| (k.clone(), to_cmat(m))).collect();
        NumTensor { shape: a.shape().clone(), blocks }
    }

    pub fn shape(&self) -> &Arc<BlockShape> {
        &self.shape
    }

    pub fn insert(&mut self, key: Key, m: CMat) {
        self.blocks.insert(key, m);
    }

    pub fn block(&self, key: &[usize]) -> CMat {
        self.blocks.get(key).cloned().unwrap_or_else(|| {
            let n = self.shape.tuple_dim(key);
            CMat::zeros(n, n)
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.blocks.keys()
    }

    pub fn mul(&self, other: &NumTensor) -> NumTensor {
        let blocks = self
            .blocks
            .iter()
            .filter_map(|(k, a)| other.blocks.get(k).map(|b| (k.clone(), a * b)))
            .collect();
        NumTensor { shape: self.shape.clone(), blocks }
    }

    pub fn product(factors: &[&NumTensor]) -> NumTensor {
        let (first, rest) = factors.split_first().expect("at least one factor");
        rest.iter().fold((*first).clone(), |acc, f| acc.mul(f))
    }

    pub fn add(&self, other: &NumTensor) -> NumTensor {
        let mut blocks = self.blocks.clone();
        for (k, b) in &other.blocks {
            let entry = blocks.entry(k.clone()).or_insert_with(|| CMat::zeros(b.nrows(), b.ncols()));
            *entry += b;
        }
        NumTensor { shape: self.shape.clone(), blocks }
    }

    pub fn sub(&self, other: &NumTensor) -> NumTensor {
        let mut blocks = self.blocks.clone();
        for (k, b) in &other.blocks {
            let entry = blocks.entry(k.clone()).or_insert_with(|| CMat::zeros(b.nrows(), b.ncols()));
            *entry -= b;
        }
        NumTensor { shape: self.shape.clone(), blocks }
    }

    /// The Gram-weighted adjoint H⁻¹X†H per tuple.
    pub fn adjoint(&self) -> NumTensor {
        let blocks = self
            .blocks
            .iter()
            .map(|(k, m)| {
                let h: Vec<f64> = self.shape.gram_weights(k).iter().map(|x| x.embed().value.re).collect();
                let mut t = m.adjoint();
                for i in 0..t.nrows() {
                    for j in 0..t.ncols() {
                        t[(i, j)] *= h[j] / h[i];
                    }
                }
                (k.clone(), t)
            })
            .collect();
        NumTensor { shape: self.shape.clone(), blocks }
    }

    /// Leg exchange X ↦ X₂₁.
    pub fn flip(&self) -> NumTensor {
        let blocks = self
            .blocks
            .iter()
            .map(|(k, m)| {
                let (a, b) = (self.shape.dim(k[0]), self.shape.dim(k[1]));
                let swap = |i: usize| (i % b) * a + i / b;
                let mut out = CMat::zeros(m.nrows(), m.ncols());
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        out[(swap(i), swap(j))] = m[(i, j)];
                    }
                }
                (smallvec::smallvec![k[1], k[0]], out)
            })
            .collect();
        NumTensor { shape: self.shape.clone(), blocks }
    }

    /// Restriction to the given tuples.
    pub fn restrict<'a>(&self, keys: impl IntoIterator<Item = &'a Key>) -> NumTensor {
        let blocks = keys.into_iter().filter_map(|k| self.blocks.get(k).map(|m| (k.clone(), m.clone()))).collect();
        NumTensor { shape: self.shape.clone(), blocks }
    }

    /// Largest entry of self − other above `tol`, as a witness.
    pub fn residual(&self, other: &NumTensor, tol: f64) -> Option<Witness> {
        let diff = self.sub(other);
        let mut best: Option<Witness> = None;
        for (k, m) in &diff.blocks {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let mag = m[(i, j)].norm();
                    if mag > tol && best.as_ref().is_none_or(|b| mag > b.magnitude) {
                        best = Some(Witness { block: self.shape.key_labels(k), row: i, col: j, magnitude: mag });
                    }
                }
            }
        }
        best
    }

    /// Residual restricted to the given tuples.
    pub fn residual_on(&self, other: &NumTensor, keys: &[Key], tol: f64) -> Option<Witness> {
        self.restrict(keys).residual(&other.restrict(keys), tol)
    }
}
