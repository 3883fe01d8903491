//! Row-sparse matrices over [`CycScalar`] with exact elimination.

use std::fmt;

use crate::scalars::CycScalar;

/// A matrix stored as sorted nonzero entries per row.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, CycScalar)>>,
}

/// Column-row factorization A = C·R with C the pivot columns and R the nonzero rref rows.
pub struct CrFactors {
    pub c: Mat,
    pub r: Mat,
    pub pivots: Vec<usize>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Mat {
        Mat::scalar(n, &CycScalar::one())
    }

    pub fn scalar(n: usize, s: &CycScalar) -> Mat {
        if s.is_zero() {
            return Mat::zeros(n, n);
        }
        Mat { rows: n, cols: n, data: (0..n).map(|i| vec![(i, s.clone())]).collect() }
    }

    pub fn diag(vals: &[CycScalar]) -> Mat {
        let n = vals.len();
        let data = vals
            .iter()
            .enumerate()
            .map(|(i, v)| if v.is_zero() { Vec::new() } else { vec![(i, v.clone())] })
            .collect();
        Mat { rows: n, cols: n, data }
    }

    /// Matrix unit with a single 1 at (i, j).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        m.data[i].push((j, CycScalar::one()));
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CycScalar) -> Mat {
        let data = (0..rows)
            .map(|i| {
                (0..cols)
                    .filter_map(|j| {
                        let v = f(i, j);
                        (!v.is_zero()).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Mat { rows, cols, data }
    }

    /// Row-major dense entries.
    pub fn from_dense(rows: usize, cols: usize, entries: &[CycScalar]) -> Mat {
        assert_eq!(entries.len(), rows * cols);
        Mat::from_fn(rows, cols, |i, j| entries[i * cols + j].clone())
    }

    pub fn from_rows(rows: &[Vec<CycScalar>], cols: usize) -> Mat {
        Mat::from_fn(rows.len(), cols, |i, j| rows[i][j].clone())
    }

    /// Builds from (row, col, value) triples, summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, items: impl IntoIterator<Item = (usize, usize, CycScalar)>) -> Mat {
        let mut data: Vec<Vec<(usize, CycScalar)>> = vec![Vec::new(); rows];
        for (i, j, v) in items {
            data[i].push((j, v));
        }
        for row in &mut data {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, CycScalar)> = Vec::with_capacity(row.len());
            for (j, v) in row.drain(..) {
                match merged.last_mut() {
                    Some((lj, lv)) if *lj == j => *lv += &v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|(_, v)| !v.is_zero());
            *row = merged;
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[(usize, CycScalar)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> CycScalar {
        match self.data[i].binary_search_by_key(&j, |e| e.0) {
            Ok(p) => self.data[i][p].1.clone(),
            Err(_) => CycScalar::zero(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self.data.iter().enumerate().all(|(i, r)| r.len() == 1 && r[0].0 == i && r[0].1.is_one())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &CycScalar)> {
        self.data.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<CycScalar>> {
        let mut out = vec![vec![CycScalar::zero(); self.cols]; self.rows];
        for (i, j, v) in self.entries() {
            out[i][j] = v.clone();
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut acc = vec![CycScalar::zero(); other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.cols];
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    let p = a * b;
                    if !mark[*j] {
                        mark[*j] = true;
                        touched.push(*j);
                        acc[*j] = p;
                    } else {
                        acc[*j] += &p;
                    }
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for &j in &touched {
                mark[j] = false;
                let v = std::mem::take(&mut acc[j]);
                if !v.is_zero() {
                    out.push((j, v));
                }
            }
            touched.clear();
            data.push(out);
        }
        Mat { rows: self.rows, cols: other.cols, data }
    }

    fn merge(&self, other: &Mat, negate: bool) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix sum dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    let ca = a.get(i).map(|e| e.0).unwrap_or(usize::MAX);
                    let cb = b.get(j).map(|e| e.0).unwrap_or(usize::MAX);
                    if ca < cb {
                        out.push(a[i].clone());
                        i += 1;
                    } else if cb < ca {
                        let v = if negate { -&b[j].1 } else { b[j].1.clone() };
                        out.push((cb, v));
                        j += 1;
                    } else {
                        let v = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                        if !v.is_zero() {
                            out.push((ca, v));
                        }
                        i += 1;
                        j += 1;
                    }
                }
                out
            })
            .collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.merge(other, true)
    }

    pub fn scale(&self, s: &CycScalar) -> Mat {
        if s.is_zero() {
            return Mat::zeros(self.rows, self.cols);
        }
        self.map(|v| v * s)
    }

    pub fn neg(&self) -> Mat {
        self.map(|v| -v)
    }

    pub fn map(&self, f: impl Fn(&CycScalar) -> CycScalar) -> Mat {
        let data = self
            .data
            .iter()
            .map(|r| {
                r.iter()
                    .filter_map(|(j, v)| {
                        let w = f(v);
                        (!w.is_zero()).then_some((*j, w))
                    })
                    .collect()
            })
            .collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn kron(&self, other: &Mat) -> Mat {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = Vec::with_capacity(rows);
        for ra in &self.data {
            for rb in &other.data {
                let mut out = Vec::with_capacity(ra.len() * rb.len());
                for (ja, a) in ra {
                    for (jb, b) in rb {
                        out.push((ja * other.cols + jb, a * b));
                    }
                }
                data.push(out);
            }
        }
        Mat { rows, cols, data }
    }

    pub fn transpose(&self) -> Mat {
        let mut data: Vec<Vec<(usize, CycScalar)>> = vec![Vec::new(); self.cols];
        for (i, j, v) in self.entries() {
            data[j].push((i, v.clone()));
        }
        Mat { rows: self.cols, cols: self.rows, data }
    }

    pub fn conj(&self) -> Mat {
        self.map(CycScalar::conj)
    }

    /// Plain conjugate transpose.
    pub fn conj_transpose(&self) -> Mat {
        self.transpose().conj()
    }

    pub fn trace(&self) -> CycScalar {
        let mut t = CycScalar::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self.get(i, i);
        }
        t
    }

    /// Reorders indices: entry (i, j) moves to (row_map[i], col_map[j]).
    pub fn reindex(&self, row_map: &[usize], col_map: &[usize]) -> Mat {
        let items = self.entries().map(|(i, j, v)| (row_map[i], col_map[j], v.clone()));
        Mat::from_triplets(self.rows, self.cols, items)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut inv = vec![usize::MAX; self.cols];
        for (k, &c) in cols.iter().enumerate() {
            inv[c] = k;
        }
        let data = rows
            .iter()
            .map(|&i| {
                let mut r: Vec<(usize, CycScalar)> = self.data[i]
                    .iter()
                    .filter(|(j, _)| inv[*j] != usize::MAX)
                    .map(|(j, v)| (inv[*j], v.clone()))
                    .collect();
                r.sort_by_key(|e| e.0);
                r
            })
            .collect();
        Mat { rows: rows.len(), cols: cols.len(), data }
    }

    /// Stacks columns of `self` then `other`.
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().cloned().chain(b.iter().map(|(j, v)| (j + self.cols, v.clone()))).collect())
            .collect();
        Mat { rows: self.rows, cols: self.cols + other.cols, data }
    }

    pub fn vcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Largest embedded magnitude among entries, with its position.
    pub fn max_entry(&self) -> Option<(usize, usize, f64)> {
        self.entries()
            .map(|(i, j, v)| (i, j, v.embed().value.norm()))
            .max_by(|a, b| a.2.total_cmp(&b.2))
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref_rows(rows: &mut [Vec<CycScalar>], ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let inv = rows[r][c].inv().expect("nonzero pivot");
            for x in rows[r].iter_mut().skip(c) {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                    if !y.is_zero() {
                        *x = &*x - &(&f * y);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.to_dense();
        Mat::rref_rows(&mut rows, self.cols).len()
    }

    /// A = C·R with C the pivot columns of A and R the nonzero rows of rref(A).
    pub fn cr_factor(&self) -> CrFactors {
        let mut rows = self.to_dense();
        let pivots = Mat::rref_rows(&mut rows, self.cols);
        rows.truncate(pivots.len());
        let r = Mat::from_rows(&rows, self.cols);
        let all: Vec<usize> = (0..self.rows).collect();
        let c = self.submatrix(&all, &pivots);
        CrFactors { c, r, pivots }
    }

    pub fn inverse(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        self.solve(&Mat::identity(self.rows))
    }

    /// Unique X with self·X = rhs for square invertible self.
    pub fn solve(&self, rhs: &Mat) -> Option<Mat> {
        let n = self.rows;
        if self.cols != n || rhs.rows != n {
            return None;
        }
        let aug = self.hcat(rhs);
        let mut rows = aug.to_dense();
        let pivots = Mat::rref_rows(&mut rows, aug.cols);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let out: Vec<Vec<CycScalar>> = rows.into_iter().map(|r| r[n..].to_vec()).collect();
        Some(Mat::from_rows(&out, rhs.cols))
    }

    /// Some X with self·X = rhs, or None if inconsistent.
    pub fn solve_any(&self, rhs: &Mat) -> Option<Mat> {
        let aug = self.hcat(rhs);
        let mut rows = aug.to_dense();
        let pivots = Mat::rref_rows(&mut rows, aug.cols);
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = vec![vec![CycScalar::zero(); rhs.cols]; self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = rows[r][self.cols..].to_vec();
        }
        Some(Mat::from_rows(&x, rhs.cols))
    }

    /// Basis of the right null space as columns.
    pub fn nullspace(&self) -> Mat {
        let mut rows = self.to_dense();
        let pivots = Mat::rref_rows(&mut rows, self.cols);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = vec![vec![CycScalar::zero(); free.len()]; self.cols];
        for (k, &f) in free.iter().enumerate() {
            basis[f][k] = CycScalar::one();
            for (r, &p) in pivots.iter().enumerate() {
                basis[p][k] = -&rows[r][f];
            }
        }
        Mat::from_rows(&basis, free.len())
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for (i, j, v) in self.entries() {
            writeln!(f, "  ({i},{j}) {v:?}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::cyc;

    fn s(v: i64) -> CycScalar {
        CycScalar::from_i64(v)
    }

    #[test]
    fn product_and_inverse() {
        let a = Mat::from_dense(2, 2, &[s(1), s(2), s(3), s(4)]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        let sing = Mat::from_dense(2, 2, &[s(1), s(2), s(2), s(4)]);
        assert!(sing.inverse().is_none());
        assert_eq!(sing.rank(), 1);
    }

    #[test]
    fn cr_factor_reproduces() {
        let q = cyc(12, 1).unwrap();
        let a = Mat::from_dense(3, 3, &[s(1), q.clone(), s(0), s(2), &q * &s(2), s(0), s(0), s(1), q.clone()]);
        let f = a.cr_factor();
        assert_eq!(f.c.mul(&f.r), a);
        assert_eq!(f.pivots.len(), 2);
    }

    #[test]
    fn nullspace_is_killed() {
        let a = Mat::from_dense(2, 3, &[s(1), s(1), s(0), s(0), s(1), s(1)]);
        let n = a.nullspace();
        assert_eq!(n.cols(), 1);
        assert!(a.mul(&n).is_zero());
    }

    #[test]
    fn kron_matches_brute_force() {
        let a = Mat::from_dense(2, 2, &[s(1), s(2), s(0), s(3)]);
        let b = Mat::from_dense(2, 1, &[s(5), s(7)]);
        let k = a.kron(&b);
        for i in 0..4 {
            for j in 0..2 {
                assert_eq!(k.get(i, j), &a.get(i / 2, j) * &b.get(i % 2, 0));
            }
        }
    }
}
