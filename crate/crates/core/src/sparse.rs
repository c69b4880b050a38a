//! Compressed-row complex operators.

use crate::circuit::{CMatrix, C64};
use nalgebra::DMatrix;
use std::io::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    /// Duplicates are summed; exact zeros are dropped. Entry order is deterministic.
    pub fn from_triplets(dim: usize, mut t: Vec<(usize, usize, C64)>) -> SparseOperator {
        t.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<C64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            values.push(v);
        }
        let keep: Vec<bool> = values.iter().map(|v| *v != C64::new(0.0, 0.0)).collect();
        let mut k = 0;
        let (mut ri, mut ci, mut vi) = (Vec::new(), Vec::new(), Vec::new());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(values) {
            if keep[k] {
                ri.push(r);
                ci.push(c);
                vi.push(v);
            }
            k += 1;
        }
        for &r in &ri {
            indptr[r + 1] += 1;
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        SparseOperator { dim, indptr, indices: ci, values: vi }
    }

    pub fn from_csr(dim: usize, indptr: Vec<usize>, indices: Vec<usize>, values: Vec<C64>) -> SparseOperator {
        debug_assert_eq!(indptr.len(), dim + 1);
        SparseOperator { dim, indptr, indices, values }
    }

    pub fn identity(dim: usize) -> SparseOperator {
        SparseOperator::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (s, e) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[s..e].iter().copied().zip(self.values[s..e].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (s, e) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[s..e].binary_search(&c) {
            Ok(k) => self.values[s + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r).re).collect()
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// ⟨x|H|x⟩ (real part; exact for Hermitian operators).
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let y = self.apply(x);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest |H_rc − conj(H_cr)|.
    pub fn hermiticity_defect(&self) -> f64 {
        self.triplets().map(|(r, c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Max row sum of |entries|: an upper bound on the operator norm.
    pub fn gershgorin_norm(&self) -> f64 {
        (0..self.dim).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn to_dense_real(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v.re;
        }
        m
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> SparseOperator {
        let mut map = vec![usize::MAX; self.dim];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut t = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            for (c, v) in self.row(i) {
                if map[c] != usize::MAX {
                    t.push((k, map[c], v));
                }
            }
        }
        SparseOperator::from_triplets(keep.len(), t)
    }

    /// Linear combination `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &SparseOperator, b: f64) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let t = self
            .triplets()
            .map(|(r, c, v)| (r, c, v * a))
            .chain(other.triplets().map(|(r, c, v)| (r, c, v * b)))
            .collect();
        SparseOperator::from_triplets(self.dim, t)
    }

    pub fn adjoint(&self) -> SparseOperator {
        SparseOperator::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut t = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    t.push((r, c, a * b));
                }
            }
        }
        SparseOperator::from_triplets(self.dim, t)
    }

    /// Largest entrywise difference |self − other|.
    pub fn max_deviation(&self, other: &SparseOperator) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.axpby(1.0, other, -1.0).values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Connected components of the graph of nonzero off-diagonal entries, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.dim).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (r, c, v) in self.triplets() {
            if r != c && v != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut label = vec![usize::MAX; self.dim];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.dim {
            let root = find(&mut parent, i);
            if label[root] == usize::MAX {
                label[root] = out.len();
                out.push(Vec::new());
            }
            out[label[root]].push(i);
        }
        out
    }

    /// Debug dump: `dim,nnz` header, then one `row,col,re,im` line per entry.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        use crate::numfmt::fmt15;
        writeln!(w, "{},{}", self.dim, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r},{c},{},{}", fmt15(v.re), fmt15(v.im))?;
        }
        Ok(())
    }
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(a: &mut [C64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|x| *x /= n);
    }
    n
}
