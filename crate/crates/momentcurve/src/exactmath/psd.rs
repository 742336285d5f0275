//! Positive semidefiniteness with exact certificates, Moore-Penrose
//! pseudoinverses via rank factorization, and generalized Schur
//! complements.

use super::mat::{Mat, SymMat};
use super::scalar::Scalar;

/// A principal minor with negative determinant, certifying that a
/// symmetric matrix is not positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorWitness<T> {
    /// Row/column indices of the minor, ascending.
    pub indices: Vec<usize>,
    /// Exact determinant of that principal submatrix; always negative.
    pub det: T,
}

/// Result of the exact positive-semidefiniteness test.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdReport<T> {
    /// Whether the matrix is positive semidefinite.
    pub is_psd: bool,
    /// Exact rank of the matrix (meaningful in both outcomes).
    pub rank: usize,
    /// On failure, a negative principal minor.
    pub witness: Option<MinorWitness<T>>,
}

impl<T> PsdReport<T> {
    /// True when the matrix is positive definite.
    pub fn is_pd(&self, n: usize) -> bool {
        self.is_psd && self.rank == n
    }
}

/// Exact positive-semidefiniteness test by recursive symmetric pivoting.
///
/// Repeatedly eliminates a positive diagonal pivot and recurses on the
/// Schur complement. A negative diagonal entry, or a zero diagonal entry
/// with a nonzero off-diagonal partner, yields a negative principal minor
/// of the original matrix (indices plus exact determinant). For positive
/// semidefinite input the number of pivots is the rank.
pub fn psd_rank<T: Scalar>(a: &SymMat<T>) -> PsdReport<T> {
    let mut work = a.as_mat().clone();
    let mut active: Vec<usize> = (0..a.size()).collect();
    let mut eliminated: Vec<usize> = Vec::new();
    let mut pivot_product = T::one();
    let mut rank = 0usize;

    loop {
        let m = active.len();
        if m == 0 {
            break;
        }
        let mut pivot = None;
        for i in 0..m {
            match work[(i, i)].signum() {
                -1 => {
                    let mut indices = eliminated.clone();
                    indices.push(active[i]);
                    indices.sort_unstable();
                    let det = pivot_product * work[(i, i)].clone();
                    debug_assert_eq!(det.signum(), -1);
                    return PsdReport {
                        is_psd: false,
                        rank: a.as_mat().rank(),
                        witness: Some(MinorWitness { indices, det }),
                    };
                }
                0 => {
                    if let Some(j) = (0..m).find(|&j| j != i && !work[(i, j)].is_zero()) {
                        let mut indices = eliminated.clone();
                        indices.push(active[i]);
                        indices.push(active[j]);
                        indices.sort_unstable();
                        let w = work[(i, j)].clone();
                        let det = pivot_product * (-(w.clone() * w));
                        debug_assert_eq!(det.signum(), -1);
                        return PsdReport {
                            is_psd: false,
                            rank: a.as_mat().rank(),
                            witness: Some(MinorWitness { indices, det }),
                        };
                    }
                }
                _ => {
                    if pivot.is_none() {
                        pivot = Some(i);
                    }
                }
            }
        }
        let Some(p) = pivot else {
            break;
        };
        rank += 1;
        let d = work[(p, p)].clone();
        pivot_product = pivot_product * d.clone();
        eliminated.push(active[p]);
        let dinv = d.try_inv().expect("positive pivot is invertible");
        let keep: Vec<usize> = (0..m).filter(|&i| i != p).collect();
        let mut next = Mat::zeros(m - 1, m - 1);
        for (ii, &i) in keep.iter().enumerate() {
            for (jj, &j) in keep.iter().enumerate() {
                next[(ii, jj)] = work[(i, j)].clone()
                    - work[(i, p)].clone() * dinv.clone() * work[(p, j)].clone();
            }
        }
        active = keep.into_iter().map(|i| active[i]).collect();
        work = next;
    }

    PsdReport { is_psd: true, rank, witness: None }
}

/// Moore-Penrose pseudoinverse by rank factorization.
///
/// With `A = B C` a rank factorization (B the pivot columns of A, C the
/// nonzero rows of its reduced echelon form), the pseudoinverse is
/// `C' (C C')^-1 (B' B)^-1 B'` where `'` is transposition. Exact over any
/// scalar field.
pub fn pinv<T: Scalar>(a: &Mat<T>) -> Mat<T> {
    let (rref, pivots) = a.rref();
    let rank = pivots.len();
    if rank == 0 {
        return Mat::zeros(a.ncols(), a.nrows());
    }
    let all_rows: Vec<usize> = (0..a.nrows()).collect();
    let b = a.submatrix(&all_rows, &pivots);
    let c = rref.submatrix(&(0..rank).collect::<Vec<_>>(), &(0..a.ncols()).collect::<Vec<_>>());
    let ct = c.transpose();
    let bt = b.transpose();
    let cct_inv = c.mul(&ct).inverse().expect("C has full row rank");
    let btb_inv = bt.mul(&b).inverse().expect("B has full column rank");
    ct.mul(&cct_inv).mul(&btb_inv).mul(&bt)
}

/// Pseudoinverse of a symmetric matrix; the result is exactly symmetric.
pub fn pinv_sym<T: Scalar>(a: &SymMat<T>) -> SymMat<T> {
    SymMat::new(pinv(a.as_mat()))
}

/// Generalized Schur complement `M / M[block]` of a symmetric matrix.
///
/// Returns `D - B' A^+ B` over the complement of `block` (ascending),
/// where `A` is the principal block, `B` the off-diagonal slab and `D` the
/// complementary principal block. Uses the Moore-Penrose pseudoinverse, so
/// no invertibility assumption on the block.
pub fn schur<T: Scalar>(m: &SymMat<T>, block: &[usize]) -> SymMat<T> {
    let in_block: std::collections::HashSet<usize> = block.iter().copied().collect();
    let comp: Vec<usize> = (0..m.size()).filter(|i| !in_block.contains(i)).collect();
    let a = m.principal(block);
    let b = m.as_mat().submatrix(block, &comp);
    let d = m.principal(&comp);
    let correction = b.transpose().mul(pinv_sym(&a).as_mat()).mul(&b);
    SymMat::new(d.as_mat().sub(&correction))
}
