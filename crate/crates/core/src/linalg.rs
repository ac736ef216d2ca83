//! Small dense linear algebra: LU solves, thin SVD of `d x 2` matrices and
//! the two leading principal directions of a point cloud.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Pivots whose magnitude falls at or below this are treated as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Dense row-major matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateData(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
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
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// A 3x3 symmetric system `a w = b`, as produced by the normal equations of
/// the metric trainer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem3 {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
}

impl LinearSystem3 {
    pub fn new(a: [[f64; 3]; 3], b: [f64; 3]) -> Self {
        Self { a, b }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (self.a[i][j] - self.a[j][i]).abs() <= tol))
    }

    /// Infinity norm of `a w - b`.
    pub fn residual(&self, w: &[f64; 3]) -> f64 {
        (0..3)
            .map(|i| {
                let aw: f64 = (0..3).map(|j| self.a[i][j] * w[j]).sum();
                (aw - self.b[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Solves a 3x3 system by LU decomposition with partial pivoting.
pub fn lu_solve(system: &LinearSystem3) -> Result<[f64; 3]> {
    let a = Matrix::from_rows(&system.a)?;
    let w = lu_solve_dense(&a, &system.b)?;
    Ok([w[0], w[1], w[2]])
}

/// Solves a square system by LU decomposition with partial pivoting.
pub fn lu_solve_dense(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "system is {}x{} with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs()))
            .unwrap_or(col);
        let pivot = lu[(pivot_row, col)];
        if pivot.abs() <= PIVOT_THRESHOLD {
            return Err(Error::SingularSystem { column: col, pivot });
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            perm.swap(col, pivot_row);
        }
        for i in col + 1..n {
            let factor = lu[(i, col)] / pivot;
            lu[(i, col)] = factor;
            for j in col + 1..n {
                lu[(i, j)] -= factor * lu[(col, j)];
            }
        }
    }

    // forward substitution on the permuted rhs (unit lower triangle)
    let mut y: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            y[i] -= lu[(i, j)] * y[j];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            y[i] -= lu[(i, j)] * y[j];
        }
        y[i] /= lu[(i, i)];
    }
    Ok(y)
}

/// Thin SVD `m = u diag(s) v^T` of a `d x 2` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinSvd {
    /// `d x 2`, orthonormal columns.
    pub u: Matrix,
    /// Descending, nonnegative.
    pub s: [f64; 2],
    /// `2 x 2` orthogonal.
    pub v: [[f64; 2]; 2],
}

impl ThinSvd {
    /// `u v^T`, the orthogonal polar factor of the decomposed matrix.
    pub fn polar_factor(&self) -> Matrix {
        let d = self.u.nrows();
        let mut m = Matrix::zeros(d, 2);
        for i in 0..d {
            for j in 0..2 {
                m[(i, j)] = self.u[(i, 0)] * self.v[j][0] + self.u[(i, 1)] * self.v[j][1];
            }
        }
        m
    }

    pub fn reconstruct(&self) -> Matrix {
        let d = self.u.nrows();
        let mut m = Matrix::zeros(d, 2);
        for i in 0..d {
            for j in 0..2 {
                m[(i, j)] = self.u[(i, 0)] * self.s[0] * self.v[j][0]
                    + self.u[(i, 1)] * self.s[1] * self.v[j][1];
            }
        }
        m
    }
}

/// Thin SVD of a tall `d x 2` matrix through the closed-form eigensystem of
/// the 2x2 Gram matrix `m^T m`.
pub fn thin_svd_tall(m: &Matrix) -> Result<ThinSvd> {
    if m.ncols() != 2 || m.nrows() < 2 {
        return Err(Error::ShapeMismatch(format!(
            "thin SVD needs a d x 2 matrix with d >= 2, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let d = m.nrows();
    let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
    for row in m.rows_iter() {
        p += row[0] * row[0];
        q += row[0] * row[1];
        r += row[1] * row[1];
    }
    // Jacobi angle: (cos, sin) is the eigenvector of the larger eigenvalue.
    let theta = 0.5 * (2.0 * q).atan2(p - r);
    let (sin, cos) = theta.sin_cos();
    let mut v = [[cos, -sin], [sin, cos]];

    let mv = |v0: f64, v1: f64| -> Vec<f64> {
        m.rows_iter().map(|row| row[0] * v0 + row[1] * v1).collect()
    };
    let mut w1 = mv(v[0][0], v[1][0]);
    let mut w2 = mv(v[0][1], v[1][1]);
    let mut s1 = norm(&w1);
    let mut s2 = norm(&w2);
    if s2 > s1 {
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut s1, &mut s2);
        v = [[v[0][1], -v[0][0]], [v[1][1], -v[1][0]]];
        // keep det(v) = +1 by flipping the new second column
        for w in w2.iter_mut() {
            *w = -*w;
        }
    }

    let u1 = if s1 > 0.0 {
        w1.iter().map(|x| x / s1).collect::<Vec<_>>()
    } else {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        e
    };

    // Gram-Schmidt the second column against the first for orthonormality.
    let along = dot(&u1, &w2);
    let mut u2: Vec<f64> = w2.iter().zip(&u1).map(|(w, u)| w - along * u).collect();
    let resid = norm(&u2);
    if resid > 0.0 {
        for x in u2.iter_mut() {
            *x /= resid;
        }
        let again = dot(&u1, &u2);
        for (x, u) in u2.iter_mut().zip(&u1) {
            *x -= again * u;
        }
        let n2 = norm(&u2);
        for x in u2.iter_mut() {
            *x /= n2;
        }
        s2 = resid;
    } else {
        u2 = complete_orthonormal(&u1);
        s2 = 0.0;
    }

    let mut u = Matrix::zeros(d, 2);
    for i in 0..d {
        u[(i, 0)] = u1[i];
        u[(i, 1)] = u2[i];
    }
    Ok(ThinSvd { u, s: [s1, s2], v })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A unit vector orthogonal to the unit vector `u`.
fn complete_orthonormal(u: &[f64]) -> Vec<f64> {
    let j = (0..u.len())
        .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .unwrap_or(0);
    let mut e: Vec<f64> = u.iter().map(|x| -u[j] * x).collect();
    e[j] += 1.0;
    let n = norm(&e);
    e.iter().map(|x| x / n).collect()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with the matching eigenvectors as
/// columns.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::ShapeMismatch(
            "eigensolve needs a square matrix".into(),
        ));
    }
    let mut m = a.clone();
    let mut vecs = Matrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = vecs[(k, p)];
                    let vkq = vecs[(k, q)];
                    vecs[(k, p)] = c * vkp - s * vkq;
                    vecs[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut sorted = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            sorted[(k, new)] = vecs[(k, old)];
        }
    }
    Ok((values, sorted))
}

/// Projects mean-centred points onto their two leading principal directions.
///
/// Each direction is signed so that its largest-magnitude entry is
/// nonnegative. One-dimensional input yields a zero second coordinate.
pub fn pca_top2(points: &Matrix) -> Result<Matrix> {
    let n = points.nrows();
    let d = points.ncols();
    if n < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            available: n,
        });
    }
    let mut mean = vec![0.0; d];
    for row in points.rows_iter() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut centered = points.clone();
    for i in 0..n {
        for (x, m) in centered.row_mut(i).iter_mut().zip(&mean) {
            *x -= m;
        }
    }

    let mut cov = Matrix::zeros(d, d);
    for row in centered.rows_iter() {
        for a in 0..d {
            for b in a..d {
                cov[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[(a, b)] /= (n - 1) as f64;
            cov[(b, a)] = cov[(a, b)];
        }
    }
    let total: f64 = (0..d).map(|a| cov[(a, a)]).sum();
    if total <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateData("total variance is zero".into()));
    }

    let (_, vecs) = symmetric_eigen(&cov)?;
    let ncomp = d.min(2);
    let mut dirs = Matrix::zeros(d, 2);
    for c in 0..ncomp {
        let col = vecs.column(c);
        let lead = (0..d)
            .max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..d {
            dirs[(k, c)] = sign * col[k];
        }
    }
    centered.matmul(&dirs)
}
