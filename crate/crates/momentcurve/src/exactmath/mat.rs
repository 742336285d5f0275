//! Dense exact matrices over any `Scalar` field, with the handful of
//! operations the decision procedures need: products, Gaussian rank and
//! kernels, determinants, linear solves and principal submatrices.

use super::scalar::Scalar;

/// Dense row-major matrix over an exact field.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds from nested rows; all rows must share one length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Builds an `rows x cols` matrix from an entry function.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Column vector from a slice.
    pub fn col_vec(v: &[T]) -> Self {
        Mat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)].clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Entry-wise map into another scalar type.
    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| f(x)).collect() }
    }

    /// Submatrix selected by row and column index lists (order preserved).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Matrix product.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        Mat::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = T::zero();
            for l in 0..self.cols {
                acc = acc + self[(i, l)].clone() * rhs[(l, j)].clone();
            }
            acc
        })
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + rhs[(i, j)].clone())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - rhs[(i, j)].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// True when the matrix is square and exactly symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Reduced row echelon form together with the pivot column list.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].try_inv().expect("pivot is nonzero");
            for j in c..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let factor = m[(i, c)].clone();
                    for j in c..m.cols {
                        m[(i, j)] = m[(i, j)].clone() - factor.clone() * m[(r, j)].clone();
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, one column per free variable.
    pub fn kernel_basis(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![T::zero(); self.cols];
            v[free] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(row, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Determinant by fraction-producing Gaussian elimination.
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let mut m = self.clone();
        let mut det = T::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                return T::zero();
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            det = det * m[(c, c)].clone();
            let inv = m[(c, c)].try_inv().expect("pivot is nonzero");
            for i in c + 1..m.rows {
                if !m[(i, c)].is_zero() {
                    let factor = m[(i, c)].clone() * inv.clone();
                    for j in c..m.cols {
                        m[(i, j)] = m[(i, j)].clone() - factor.clone() * m[(c, j)].clone();
                    }
                }
            }
        }
        det
    }

    /// Solves `self * x = b` for square invertible `self`; `None` when
    /// singular. `b` may have several columns.
    pub fn solve(&self, b: &Mat<T>) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, b.rows, "right-hand side height mismatch");
        let mut m = self.clone();
        let mut rhs = b.clone();
        for c in 0..m.cols {
            let p = (c..m.rows).find(|&i| !m[(i, c)].is_zero())?;
            m.swap_rows(c, p);
            rhs.swap_rows(c, p);
            let inv = m[(c, c)].try_inv().expect("pivot is nonzero");
            for j in 0..m.cols {
                m[(c, j)] = m[(c, j)].clone() * inv.clone();
            }
            for j in 0..rhs.cols {
                rhs[(c, j)] = rhs[(c, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != c && !m[(i, c)].is_zero() {
                    let factor = m[(i, c)].clone();
                    for j in 0..m.cols {
                        m[(i, j)] = m[(i, j)].clone() - factor.clone() * m[(c, j)].clone();
                    }
                    for j in 0..rhs.cols {
                        rhs[(i, j)] = rhs[(i, j)].clone() - factor.clone() * rhs[(c, j)].clone();
                    }
                }
            }
        }
        Some(rhs)
    }

    /// Inverse of a square invertible matrix.
    pub fn inverse(&self) -> Option<Mat<T>> {
        self.solve(&Mat::identity(self.rows))
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric matrix: a `Mat` with the symmetry invariant checked on entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat<T> {
    m: Mat<T>,
}

impl<T: Scalar> SymMat<T> {
    /// Wraps a matrix, asserting exact symmetry.
    pub fn new(m: Mat<T>) -> Self {
        assert!(m.is_symmetric(), "matrix is not symmetric");
        SymMat { m }
    }

    /// Builds an `n x n` symmetric matrix from an upper-triangle entry
    /// function (called only for `i <= j`).
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v.clone();
                m[(j, i)] = v;
            }
        }
        SymMat { m }
    }

    pub fn zeros(n: usize) -> Self {
        SymMat { m: Mat::zeros(n, n) }
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_mat(&self) -> &Mat<T> {
        &self.m
    }

    pub fn into_mat(self) -> Mat<T> {
        self.m
    }

    /// Principal submatrix on the given index list.
    pub fn principal(&self, idx: &[usize]) -> SymMat<T> {
        SymMat { m: self.m.submatrix(idx, idx) }
    }

    /// Sets the symmetric pair of entries.
    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.m[(i, j)] = v.clone();
        self.m[(j, i)] = v;
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> SymMat<U> {
        SymMat { m: self.m.map(f) }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        SymMat { m: self.m.add(&rhs.m) }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        SymMat { m: self.m.sub(&rhs.m) }
    }

    pub fn det(&self) -> T {
        self.m.det()
    }

    pub fn rank(&self) -> usize {
        self.m.rank()
    }
}

impl<T> std::ops::Index<(usize, usize)> for SymMat<T> {
    type Output = T;
    fn index(&self, idx: (usize, usize)) -> &T {
        &self.m[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::scalar::{rat, rat_i64, Rat};

    fn m(rows: &[&[i64]]) -> Mat<Rat> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat_i64(x)).collect()).collect())
    }

    #[test]
    fn product_against_hand_computation() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let b = m(&[&[5, 6], &[7, 8]]);
        assert_eq!(a.mul(&b), m(&[&[19, 22], &[43, 50]]));
    }

    #[test]
    fn rank_and_kernel_of_singular_matrix() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 1, 1]]);
        assert_eq!(a.rank(), 2);
        let kernel = a.kernel_basis();
        assert_eq!(kernel.len(), 1);
        let v = Mat::col_vec(&kernel[0]);
        assert!(a.mul(&v).is_zero(), "kernel vector should be annihilated");
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let a = m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]]);
        // Cofactor expansion along the first row: 2*(3-2) - 0 + 1*(1-3) = 0.
        assert_eq!(a.det(), rat_i64(0));
        let b = m(&[&[2, 1], &[1, 3]]);
        assert_eq!(b.det(), rat_i64(5));
        let c = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(c.det(), rat_i64(-1), "row swap must flip the sign");
    }

    #[test]
    fn solve_and_inverse_round_trip() {
        let a = m(&[&[2, 1], &[1, 3]]);
        let b = m(&[&[1], &[2]]);
        let x = a.solve(&b).expect("invertible");
        assert_eq!(a.mul(&x), b);
        assert_eq!(x, Mat::from_rows(vec![vec![rat(1, 5)], vec![rat(3, 5)]]));
        let inv = a.inverse().expect("invertible");
        assert_eq!(a.mul(&inv), Mat::identity(2));
        let singular = m(&[&[1, 2], &[2, 4]]);
        assert!(singular.solve(&b).is_none());
    }

    #[test]
    fn rref_identifies_pivots() {
        let a = m(&[&[0, 1, 2], &[0, 2, 4]]);
        let (r, pivots) = a.rref();
        assert_eq!(pivots, vec![1]);
        assert_eq!(r, m(&[&[0, 1, 2], &[0, 0, 0]]));
    }

    #[test]
    fn symmetric_wrapper_guards_symmetry() {
        let good = SymMat::new(m(&[&[1, 2], &[2, 5]]));
        assert_eq!(good.principal(&[1]).as_mat(), &m(&[&[5]]));
        let bad = std::panic::catch_unwind(|| SymMat::new(m(&[&[1, 2], &[3, 5]])));
        assert!(bad.is_err(), "asymmetric input must be rejected");
    }

    #[test]
    fn principal_submatrix_preserves_order() {
        let s = SymMat::new(m(&[&[1, 2, 3], &[2, 5, 6], &[3, 6, 9]]));
        let p = s.principal(&[2, 0]);
        assert_eq!(p.as_mat(), &m(&[&[9, 3], &[3, 1]]));
    }
}
