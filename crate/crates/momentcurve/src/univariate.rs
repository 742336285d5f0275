//! One-dimensional truncated moment problems on Hankel matrices: rank and
//! positivity analysis, recursive generation, the one-missing-entry
//! positive-semidefinite completion interval, and atom extraction.

use crate::error::{Error, Result};
use crate::exactmath::{psd_rank, rat_approx_f64, Mat, QuadScalar, Rat, Scalar, SymMat};
use num_complex::Complex64;
use num_traits::{One, Zero};

/// A finite moment vector `v_0, ..., v_{2n}` of a measure on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelVec<T = Rat> {
    vals: Vec<T>,
}

impl<T: Scalar> HankelVec<T> {
    /// Wraps an odd-length moment vector.
    pub fn new(vals: Vec<T>) -> Result<Self> {
        if vals.len() % 2 == 0 || vals.is_empty() {
            return Err(Error::InvalidInput(format!(
                "moment vector needs odd length 2n + 1, got {}",
                vals.len()
            )));
        }
        Ok(HankelVec { vals })
    }

    /// Highest matrix order n (the vector covers moments up to `v_{2n}`).
    pub fn n(&self) -> usize {
        (self.vals.len() - 1) / 2
    }

    pub fn get(&self, i: usize) -> &T {
        &self.vals[i]
    }

    pub fn values(&self) -> &[T] {
        &self.vals
    }

    /// The m x m Hankel matrix `(v_{i+j})`.
    pub fn hankel(&self, m: usize) -> SymMat<T> {
        assert!(m >= 1 && 2 * (m - 1) < self.vals.len(), "Hankel order out of range");
        SymMat::from_upper(m, |i, j| self.vals[i + j].clone())
    }

    /// The full (n+1) x (n+1) Hankel matrix.
    pub fn full(&self) -> SymMat<T> {
        self.hankel(self.n() + 1)
    }
}

/// The first index r whose Hankel column is a combination of the previous
/// ones, or n + 1 when all columns are independent.
pub fn rank_of_v<T: Scalar>(v: &HankelVec<T>) -> usize {
    let full = v.full().into_mat();
    let n = v.n();
    let rows: Vec<usize> = (0..=n).collect();
    let mut prev_rank = 0usize;
    for r in 0..=n {
        let cols: Vec<usize> = (0..=r).collect();
        let rank = full.submatrix(&rows, &cols).rank();
        if rank == prev_rank {
            return r;
        }
        prev_rank = rank;
    }
    n + 1
}

/// Positivity-and-rank decision for the truncated moment problem on the
/// line.
#[derive(Debug, Clone)]
pub struct HamburgerReport {
    /// Whether a representing measure exists.
    pub exists: bool,
    /// First column-dependence index of the Hankel matrix.
    pub rank: usize,
    /// Rank of the full Hankel matrix.
    pub matrix_rank: usize,
    /// Minimal atom count of a representing measure, when one exists.
    pub atom_count: Option<usize>,
    /// Whether the full Hankel matrix is positive semidefinite.
    pub psd: bool,
    /// Whether the order-n principal block is positive definite or shares
    /// the rank of the full matrix.
    pub rank_condition: bool,
}

/// Decides existence of a representing measure for `v` through the
/// positivity and rank structure of its Hankel matrices.
pub fn solve_hamburger<T: Scalar>(v: &HankelVec<T>) -> HamburgerReport {
    let n = v.n();
    let full_report = psd_rank(&v.full());
    let psd = full_report.is_psd;
    let matrix_rank = full_report.rank;
    let rank = rank_of_v(v);

    if Scalar::signum(v.get(0)) < 0 {
        return HamburgerReport {
            exists: false,
            rank,
            matrix_rank,
            atom_count: None,
            psd,
            rank_condition: false,
        };
    }
    if v.get(0).is_zero() {
        // A mass-zero sequence represents the empty measure exactly when
        // every moment vanishes.
        let exists = v.values().iter().all(|x| x.is_zero());
        return HamburgerReport {
            exists,
            rank,
            matrix_rank,
            atom_count: exists.then_some(0),
            psd,
            rank_condition: exists,
        };
    }

    let rank_condition = if n == 0 {
        true
    } else {
        let principal = psd_rank(&v.hankel(n));
        principal.is_pd(n) || principal.rank == matrix_rank
    };
    let exists = psd && rank_condition;
    HamburgerReport {
        exists,
        rank,
        matrix_rank,
        atom_count: exists.then_some(matrix_rank),
        psd,
        rank_condition,
    }
}

/// Positive-recursive-generation analysis of a moment vector.
#[derive(Debug, Clone)]
pub struct PrgReport<T> {
    /// Whether the vector is positively recursively generated.
    pub prg: bool,
    /// First column-dependence index.
    pub rank: usize,
    /// Recursion coefficients when the vector is recursively generated
    /// and the dependence index is at most n.
    pub coefficients: Option<Vec<T>>,
}

/// Independent route to the same existence decision: the leading r x r
/// Hankel block must be positive definite and the whole vector must
/// follow the linear recursion determined by column r.
pub fn prg_check<T: Scalar>(v: &HankelVec<T>) -> PrgReport<T> {
    let n = v.n();
    let r = rank_of_v(v);
    if r == 0 {
        let prg = v.values().iter().all(|x| x.is_zero());
        return PrgReport { prg, rank: r, coefficients: None };
    }
    let leading = psd_rank(&v.hankel(r));
    if !leading.is_pd(r) {
        return PrgReport { prg: false, rank: r, coefficients: None };
    }
    if r > n {
        return PrgReport { prg: true, rank: r, coefficients: None };
    }
    let rhs_vals: Vec<T> = (0..r).map(|i| v.get(r + i).clone()).collect();
    let rhs = Mat::col_vec(&rhs_vals);
    let phi = v
        .hankel(r)
        .as_mat()
        .solve(&rhs)
        .expect("positive definite block is invertible");
    for j in r..=2 * n {
        let mut acc = T::zero();
        for i in 0..r {
            acc = acc + phi[(i, 0)].clone() * v.get(j - r + i).clone();
        }
        if acc != *v.get(j) {
            return PrgReport { prg: false, rank: r, coefficients: None };
        }
    }
    let coefficients = (0..r).map(|i| phi[(i, 0)].clone()).collect();
    PrgReport { prg: true, rank: r, coefficients: Some(coefficients) }
}

/// Feasibility interval of the single unknown symmetric entry of an
/// otherwise fixed matrix.
#[derive(Debug, Clone)]
pub struct CompletionReport {
    /// Whether any value of the entry makes the matrix positive
    /// semidefinite.
    pub feasible: bool,
    /// Midpoint of the feasible interval.
    pub center: Rat,
    /// Product of the two scalar Schur complements; its square root is
    /// the interval radius.
    pub radicand: Rat,
    /// Interval endpoints.
    pub lower: QuadScalar,
    pub upper: QuadScalar,
    /// Matrix rank at the endpoints and in the open interval.
    pub boundary_rank: usize,
    pub interior_rank: usize,
    /// Whether the interval is a single point.
    pub collapsed: bool,
}

/// Analyzes the positive-semidefinite completions of a symmetric matrix
/// whose entry at `(p, q)` (and `(q, p)`) is treated as unknown. The
/// current value of that entry is ignored.
pub fn completion_interval(m: &SymMat<Rat>, p: usize, q: usize) -> Result<CompletionReport> {
    let size = m.size();
    if p == q || p >= size || q >= size {
        return Err(Error::InvalidInput(format!(
            "unknown entry must be off-diagonal, got ({}, {}) in size {}",
            p, q, size
        )));
    }
    let others: Vec<usize> = (0..size).filter(|&i| i != p && i != q).collect();
    let with_p: Vec<usize> = others.iter().copied().chain([p]).collect();
    let with_q: Vec<usize> = others.iter().copied().chain([q]).collect();
    let a2 = m.principal(&with_p);
    let a3 = m.principal(&with_q);
    let rep2 = psd_rank(&a2);
    let rep3 = psd_rank(&a3);
    let feasible = rep2.is_psd && rep3.is_psd;

    let a1 = m.principal(&others);
    let a1_pinv = crate::exactmath::pinv_sym(&a1);
    let a_vals: Vec<Rat> = others.iter().map(|&i| m[(i, p)].clone()).collect();
    let b_vals: Vec<Rat> = others.iter().map(|&i| m[(i, q)].clone()).collect();
    let a = Mat::col_vec(&a_vals);
    let b = Mat::col_vec(&b_vals);
    let center = b.transpose().mul(a1_pinv.as_mat()).mul(&a)[(0, 0)].clone();
    let s2 = m[(p, p)].clone() - a.transpose().mul(a1_pinv.as_mat()).mul(&a)[(0, 0)].clone();
    let s3 = m[(q, q)].clone() - b.transpose().mul(a1_pinv.as_mat()).mul(&b)[(0, 0)].clone();
    let radicand = s2.clone() * s3.clone();
    let (lower, upper) = if feasible {
        let root = QuadScalar::sqrt_rat(&radicand)
            .expect("Schur complements of feasible completions are nonnegative");
        let c = QuadScalar::from_rational(center.clone());
        (c.clone() + (-root.clone()), c + root)
    } else {
        let c = QuadScalar::from_rational(center.clone());
        (c.clone(), c)
    };
    let boundary_rank = rep2.rank.max(rep3.rank);
    Ok(CompletionReport {
        feasible,
        center,
        radicand,
        lower,
        upper,
        boundary_rank,
        interior_rank: boundary_rank + 1,
        collapsed: s2.is_zero() || s3.is_zero(),
    })
}

/// Monic polynomial whose roots support a minimal representing measure of
/// `v`, as ascending coefficients with the leading 1 implicit (the degree
/// is the returned length). For a full-rank Hankel matrix the vector is
/// extended by a zero moment first; the result then has degree n + 1.
pub fn generating_polynomial<T: Scalar>(v: &HankelVec<T>) -> Result<Vec<T>> {
    let n = v.n();
    let r = rank_of_v(v);
    if r == 0 {
        return Ok(Vec::new());
    }
    let (order, rhs_vals): (usize, Vec<T>) = if r <= n {
        (r, (0..r).map(|i| v.get(r + i).clone()).collect())
    } else {
        // Independent columns throughout: append one free moment, chosen
        // as zero, and read the dependence of the extended column.
        let mut col = Vec::with_capacity(n + 1);
        for i in 0..n {
            col.push(v.get(n + 1 + i).clone());
        }
        col.push(T::zero());
        (n + 1, col)
    };
    let block = v.hankel(order);
    let rhs = Mat::col_vec(&rhs_vals);
    let phi = block.as_mat().solve(&rhs).ok_or_else(|| {
        Error::Precondition("leading Hankel block is singular; no recursion".into())
    })?;
    let coeffs: Vec<T> = (0..order).map(|i| -phi[(i, 0)].clone()).collect();
    Ok(coeffs)
}

/// Durand-Kerner root finder for a monic complex polynomial given by
/// ascending coefficients (the leading 1 is implicit in `degree =
/// coeffs.len()`), returning all complex roots.
pub fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len();
    if deg == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let bound = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|i| seed.powi(i as i32 + 1) * bound)
        .collect();
    for _ in 0..500 {
        let mut shift = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                // Perturb coincident iterates.
                roots[i] += Complex64::new(1e-8 * bound, 1e-8 * bound);
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-14 * bound {
            break;
        }
    }
    roots
}

/// Real roots of a monic polynomial with rational coefficients
/// (ascending, leading 1 implicit). Roots are located numerically, then
/// polished by Newton steps evaluated in exact arithmetic. Fails when a
/// root keeps a significant imaginary part.
pub fn monic_real_roots(coeffs: &[Rat]) -> Result<Vec<f64>> {
    let deg = coeffs.len();
    if deg == 0 {
        return Ok(Vec::new());
    }
    let approx: Vec<Complex64> = coeffs
        .iter()
        .map(|c| Complex64::new(rat_approx_f64(c), 0.0))
        .collect();
    let bound = 1.0 + approx.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let roots = durand_kerner(&approx);
    let mut out = Vec::with_capacity(deg);
    for z in roots {
        if z.im.abs() > 1e-7 * bound {
            return Err(Error::Numeric(format!(
                "expected real roots, found {} + {}i",
                z.re, z.im
            )));
        }
        out.push(polish_real_root(coeffs, z.re));
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    Ok(out)
}

/// Newton iteration with exact rational evaluation of the polynomial and
/// its derivative, starting from an f64 approximation.
fn polish_real_root(coeffs: &[Rat], x0: f64) -> f64 {
    let deg = coeffs.len();
    let mut x = match Rat::from_float(x0) {
        Some(r) => r,
        None => return x0,
    };
    for _ in 0..3 {
        // p(x) with implicit monic leading term.
        let mut p = Rat::one();
        for c in coeffs.iter().rev() {
            p = p * &x + c;
        }
        // p'(x).
        let mut dp = Rat::from_integer(deg.into());
        for i in (1..deg).rev() {
            dp = dp * &x + coeffs[i].clone() * Rat::from_integer(i.into());
        }
        if dp.is_zero() {
            break;
        }
        x = x - p / dp;
        // Keep the representation small between steps.
        x = Rat::from_float(rat_approx_f64(&x)).unwrap_or(x);
    }
    rat_approx_f64(&x)
}

/// Atoms `(node, weight)` of a minimal representing measure of `v`,
/// sorted by node. The recomputed moments are checked against `v` to the
/// given relative tolerance.
pub fn extract_atoms_hankel(v: &HankelVec<Rat>, tol: f64) -> Result<Vec<(f64, f64)>> {
    let report = solve_hamburger(v);
    if !report.exists {
        return Err(Error::Precondition(
            "moment vector has no representing measure".into(),
        ));
    }
    let atom_count = report.atom_count.expect("existence implies an atom count");
    if atom_count == 0 {
        return Ok(Vec::new());
    }
    let gen = generating_polynomial(v)?;
    let nodes = monic_real_roots(&gen)?;
    if nodes.len() != atom_count {
        return Err(Error::Numeric(format!(
            "expected {} support points, found {}",
            atom_count,
            nodes.len()
        )));
    }
    let moments: Vec<f64> = v.values().iter().map(rat_approx_f64).collect();
    let weights = vandermonde_weights(&nodes, &moments)?;
    let atoms: Vec<(f64, f64)> = nodes.into_iter().zip(weights).collect();
    verify_hankel_atoms(&atoms, v, tol)?;
    Ok(atoms)
}

/// Solves the square Vandermonde system matching the first `nodes.len()`
/// entries of `moments`.
pub(crate) fn vandermonde_weights(nodes: &[f64], moments: &[f64]) -> Result<Vec<f64>> {
    let r = nodes.len();
    let mut a = vec![vec![0.0f64; r]; r];
    for (col, x) in nodes.iter().enumerate() {
        let mut p = 1.0;
        for row in a.iter_mut() {
            row[col] = p;
            p *= x;
        }
    }
    let mut rhs: Vec<f64> = moments[..r].to_vec();
    // Gaussian elimination with partial pivoting.
    for col in 0..r {
        let pivot = (col..r)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Numeric("support points are numerically coincident".into()));
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..r {
            let f = a[row][col] / a[col][col];
            for k in col..r {
                a[row][k] -= f * a[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut w = vec![0.0f64; r];
    for row in (0..r).rev() {
        let mut acc = rhs[row];
        for k in row + 1..r {
            acc -= a[row][k] * w[k];
        }
        w[row] = acc / a[row][row];
    }
    Ok(w)
}

/// Checks that the atoms reproduce every moment of `v` within the
/// relative tolerance, and that no weight is meaningfully negative.
fn verify_hankel_atoms(atoms: &[(f64, f64)], v: &HankelVec<Rat>, tol: f64) -> Result<()> {
    let scale = v
        .values()
        .iter()
        .map(|x| rat_approx_f64(x).abs())
        .fold(1.0, f64::max);
    for (_, w) in atoms {
        if *w < -tol * scale {
            return Err(Error::Numeric(format!("negative weight {} in extraction", w)));
        }
    }
    for (i, want) in v.values().iter().enumerate() {
        let got: f64 = atoms.iter().map(|(x, w)| w * x.powi(i as i32)).sum();
        let err = (got - rat_approx_f64(want)).abs();
        if err > tol * scale {
            return Err(Error::Numeric(format!(
                "moment {} off by {:e} after extraction",
                i, err
            )));
        }
    }
    Ok(())
}
