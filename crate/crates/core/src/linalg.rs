//! Small dense and sparse matrix kernels.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major dense `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// # Panics
    /// If `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[f64]) {
        for (r, v) in values.iter().enumerate() {
            self.set(r, c, *v);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// # Panics
    /// On incompatible shapes.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, a) in self.row(r).iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other`.
    pub fn tmatmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "tmatmul shape");
        let mut out = DenseMatrix::zeros(self.cols, other.cols);
        for r in 0..self.rows {
            let b = other.row(r);
            for (i, a) in self.row(r).iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, bv) in out_row.iter_mut().zip(b) {
                    *o += a * bv;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Zero values are dropped;
    /// columns within a row are sorted.
    ///
    /// # Panics
    /// If a column index is out of range.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let n_rows = rows.len();
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            for (c, v) in row {
                assert!(c < cols, "column index out of range");
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: n_rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let rows = (0..m.rows())
            .map(|r| m.row(r).iter().copied().enumerate().collect())
            .collect();
        Self::from_rows(m.cols(), rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m.set(r, c, v);
            }
        }
        m
    }

    /// `self · x` for dense `x` of shape `cols × l`.
    pub fn mul_dense(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, x.rows(), "sparse mul shape");
        let l = x.cols();
        let mut out = DenseMatrix::zeros(self.rows, l);
        for r in 0..self.rows {
            let out_row = out.row_mut(r);
            for (c, v) in self.row(r) {
                for (o, b) in out_row.iter_mut().zip(x.row(c)) {
                    *o += v * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · x` for dense `x` of shape `rows × l`.
    pub fn tmul_dense(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, x.rows(), "sparse tmul shape");
        let l = x.cols();
        let mut out = DenseMatrix::zeros(self.cols, l);
        for r in 0..self.rows {
            let xr = x.row(r);
            for (c, v) in self.row(r) {
                for (o, b) in out.row_mut(c).iter_mut().zip(xr) {
                    *o += v * b;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|x| x * x).sum())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

/// Orthonormalizes the columns of `m` in place with two passes of modified
/// Gram-Schmidt. Columns that collapse numerically are replaced by the
/// first coordinate vector that is still independent, so the result always
/// has orthonormal columns when `m.cols() <= m.rows()`.
pub fn orthonormalize_columns(m: &mut DenseMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut next_unit = 0;
    for c in 0..cols {
        let mut v = m.column(c);
        let original = norm(&v);
        project_out(&mut v, &basis);
        project_out(&mut v, &basis);
        let mut n = norm(&v);
        if original == 0.0 || n <= 1e-10 * original {
            n = 0.0;
            while next_unit < rows {
                let mut e = vec![0.0; rows];
                e[next_unit] = 1.0;
                next_unit += 1;
                project_out(&mut e, &basis);
                project_out(&mut e, &basis);
                let en = norm(&e);
                if en > 0.5 {
                    v = e;
                    n = en;
                    break;
                }
            }
        }
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
        m.set_column(c, &v);
        basis.push(v);
    }
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let p = dot(v, b);
        for (x, y) in v.iter_mut().zip(b) {
            *x -= p * y;
        }
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors
/// as columns.
pub fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigen needs a square matrix");
    let mut m = a.clone();
    let mut vecs = DenseMatrix::identity(n);
    let scale = m.frobenius_norm();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if scale == 0.0 || off.sqrt_or_zero() <= f64::EPSILON * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t =
                    theta.signum_nonzero() / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = vecs.get(k, p);
                    let vkq = vecs.get(k, q);
                    vecs.set(k, p, c * vkp - s * vkq);
                    vecs.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).total_cmp(&m.get(i, i)).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let mut sorted = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vecs.column(src));
    }
    (values, sorted)
}

trait FloatExt {
    fn sqrt_or_zero(self) -> f64;
    fn signum_nonzero(self) -> f64;
}

impl FloatExt for f64 {
    fn sqrt_or_zero(self) -> f64 {
        if self > 0.0 {
            libm::sqrt(self)
        } else {
            0.0
        }
    }

    fn signum_nonzero(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}
