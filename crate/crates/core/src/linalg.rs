//! Dense linear-algebra kernels sized for desk-scale least squares
//! (`n` up to a few hundred thousand rows, `d` up to a few hundred columns).
//!
//! Storage is row-major throughout: `data[i * cols + j]` holds `A[i, j]`.
//! Every linear system met by the solvers is symmetric positive definite, so
//! the only factorization offered is Cholesky. Gram products are accumulated
//! as outer products over rows in index order on the calling thread, which
//! makes them bit-for-bit reproducible.

use crate::error::{check_len, Error, Result};

/// Row-major real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Wraps row-major `data`, rejecting a length mismatch or any NaN/Inf entry.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("DenseMatrix::new", rows * cols, data.len())?;
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix from row slices.
    ///
    /// # Panics
    /// Panics if the rows are ragged or contain non-finite values.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, data).expect("finite entries")
    }

    /// Builds a matrix by evaluating `f(i, j)` for every entry.
    pub(crate) fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, and a zero-column matrix has no data anyway
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `A·v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec", self.cols, v.len())?;
        Ok(self.iter_rows().map(|r| dot(r, v)).collect())
    }

    /// `Aᵀ·v`, accumulated row by row.
    pub fn tmatvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("tmatvec", self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &vi) in self.iter_rows().zip(v) {
            axpy(vi, r, &mut out);
        }
        Ok(out)
    }

    /// `A·B`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len("matmul", self.cols, other.rows)?;
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik != 0.0 {
                    axpy(aik, other.row(k), dst);
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub(crate) fn add_diagonal(&mut self, c: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += c;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Symmetric to within `tol` relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol * scale))
    }

    /// Rows `indices` copied in the given order and multiplied by `scale`.
    pub fn select_rows(&self, indices: &[usize], scale: f64) -> DenseMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend(self.row(i).iter().map(|v| v * scale));
        }
        DenseMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    fn symmetrize(&mut self) {
        let n = self.rows;
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }
}

/// Lower-triangular Cholesky factor `L` of an SPD matrix `A = L·Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: DenseMatrix,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// `L·Lᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.lower.matmul(&self.lower.transpose()).expect("square factor")
    }

    /// Solves `L·z = b` in place.
    pub fn forward_solve(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.lower.row(i);
            let s = b[i] - dot(&row[..i], &b[..i]);
            b[i] = s / row[i];
        }
    }

    /// Solves `Lᵀ·x = z` in place.
    pub fn backward_solve(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            b[i] /= self.lower.get(i, i);
            let bi = b[i];
            // column i of Lᵀ below the diagonal is row i of L left of it
            for (bj, &lij) in b[..i].iter_mut().zip(&self.lower.row(i)[..i]) {
                *bj -= lij * bi;
            }
        }
    }

    /// `L⁻¹·B` for a matrix right-hand side, row-oriented.
    pub fn forward_solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        check_len("forward_solve_matrix", self.dim(), b.rows)?;
        let mut out = b.clone();
        for i in 0..self.dim() {
            let lrow = self.lower.row(i);
            for k in 0..i {
                let lik = lrow[k];
                if lik != 0.0 {
                    let (head, tail) = out.data.split_at_mut(i * b.cols);
                    axpy(-lik, &head[k * b.cols..(k + 1) * b.cols], &mut tail[..b.cols]);
                }
            }
            let inv = 1.0 / lrow[i];
            out.row_mut(i).iter_mut().for_each(|v| *v *= inv);
        }
        Ok(out)
    }

    /// `A⁻¹·b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("solve_spd", self.dim(), b.len())?;
        let mut x = b.to_vec();
        self.forward_solve(&mut x);
        self.backward_solve(&mut x);
        Ok(x)
    }

    /// `A⁻¹` assembled column by column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension matches");
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        inv.symmetrize();
        inv
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha·x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `‖a − b‖₂`.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `XᵀX`, accumulated as outer products over rows.
pub fn gram(x: &DenseMatrix) -> DenseMatrix {
    weighted_gram(x, 0..x.rows(), 1.0)
}

/// `scale · Σ_{i ∈ rows} x_i x_iᵀ`.
pub(crate) fn weighted_gram(x: &DenseMatrix, rows: impl IntoIterator<Item = usize>, scale: f64) -> DenseMatrix {
    let d = x.cols();
    let mut g = DenseMatrix::zeros(d, d);
    for i in rows {
        let r = x.row(i);
        for (a, &ra) in r.iter().enumerate() {
            if ra != 0.0 {
                // upper triangle only; mirrored below
                axpy(ra, &r[a..], &mut g.data[a * d + a..(a + 1) * d]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = g.get(a, b) * scale;
            g.set(a, b, v);
            g.set(b, a, v);
        }
    }
    g
}

/// Cholesky factorization `A = L·Lᵀ`.
///
/// Only the lower triangle of `A` is read. A pivot at or below
/// `dim · ε · max|A_ii|` is rejected as [`Error::NotPositiveDefinite`].
pub fn cholesky(a: &DenseMatrix) -> Result<CholeskyFactor> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "cholesky",
            expected: a.rows,
            got: a.cols,
        });
    }
    let n = a.rows;
    let max_diag = (0..n).fold(0.0_f64, |m, i| m.max(a.get(i, i).abs()));
    let threshold = n as f64 * f64::EPSILON * max_diag;
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = a.get(i, j) - dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                if s <= threshold || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite { pivot: i });
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(CholeskyFactor { lower: l })
}

/// Solves `A·x = b` given the Cholesky factor of `A`.
pub fn solve_spd(fac: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>> {
    fac.solve(b)
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
/// rotations iterated until the off-diagonal norm is at most
/// `1e-12 · ‖A‖_F`.
pub fn sym_eigvals(a: &DenseMatrix) -> Vec<f64> {
    assert!(a.is_square(), "sym_eigvals needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let target = 1e-12 * a.frobenius_norm();
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, p, q);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

fn off_diagonal_norm(m: &DenseMatrix) -> f64 {
    let n = m.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m.get(i, j) * m.get(i, j);
            }
        }
    }
    s.sqrt()
}

fn rotate(m: &mut DenseMatrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    let tau = (aqq - app) / (2.0 * apq);
    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = m.rows;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        m.set(k, p, new_kp);
        m.set(p, k, new_kp);
        m.set(k, q, new_kq);
        m.set(q, k, new_kq);
    }
    m.set(p, p, app - t * apq);
    m.set(q, q, aqq + t * apq);
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);
}

/// Eigenvalues of the pencil `(A, B)` where `B = L·Lᵀ` is given by its
/// Cholesky factor, computed as the spectrum of the congruence `L⁻¹·A·L⁻ᵀ`.
pub fn pencil_eigvals(a: &DenseMatrix, b: &CholeskyFactor) -> Result<Vec<f64>> {
    let c = b.forward_solve_matrix(a)?;
    let mut g = b.forward_solve_matrix(&c.transpose())?;
    g.symmetrize();
    Ok(sym_eigvals(&g))
}

/// `λ_max / λ_min` of a symmetric positive definite matrix.
pub fn cond_spd(a: &DenseMatrix) -> Result<f64> {
    cond_from_eigvals(&sym_eigvals(a))
}

pub(crate) fn cond_from_eigvals(eig: &[f64]) -> Result<f64> {
    let (lo, hi) = match (eig.first(), eig.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::EmptyInput),
    };
    if hi <= 0.0 || lo <= 1e-14 * hi {
        return Err(Error::SingularMatrix);
    }
    Ok(hi / lo)
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    sym_eigvals(a).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Squared Euclidean norm of every row.
pub fn row_sq_norms(x: &DenseMatrix) -> Vec<f64> {
    x.iter_rows().map(|r| dot(r, r)).collect()
}

/// Thin orthonormal basis `U` (n×d) of the column space of `X`, by
/// Householder QR.
pub fn orthonormal_colbasis(x: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, d) = (x.rows, x.cols);
    if n < d {
        return Err(Error::RankDeficient { column: n });
    }
    let tol = 1e-12 * x.frobenius_norm();
    let mut a = x.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(d);
    for k in 0..d {
        let col_norm = (k..n).map(|i| a.get(i, k).powi(2)).sum::<f64>().sqrt();
        if col_norm <= tol {
            return Err(Error::RankDeficient { column: k });
        }
        let alpha = if a.get(k, k) >= 0.0 { -col_norm } else { col_norm };
        let mut v: Vec<f64> = (k..n).map(|i| a.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm = norm2(&v);
        v.iter_mut().for_each(|e| *e /= vnorm);
        apply_reflector(&mut a, &v, k, k);
        reflectors.push(v);
    }
    // Q·[I_d; 0], applying reflectors in reverse order
    let mut q = DenseMatrix::zeros(n, d);
    for j in 0..d {
        q.set(j, j, 1.0);
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        apply_reflector(&mut q, v, k, 0);
    }
    Ok(q)
}

/// Applies `I − 2vvᵀ` acting on rows `offset..` to columns `first_col..`.
fn apply_reflector(a: &mut DenseMatrix, v: &[f64], offset: usize, first_col: usize) {
    let cols = a.cols;
    let mut w = vec![0.0; cols - first_col];
    for (vi, i) in v.iter().zip(offset..) {
        axpy(*vi, &a.row(i)[first_col..], &mut w);
    }
    for (vi, i) in v.iter().zip(offset..) {
        axpy(-2.0 * vi, &w, &mut a.row_mut(i)[first_col..]);
    }
}
