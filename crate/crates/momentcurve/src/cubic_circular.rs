//! Decision procedure for moment sequences supported on the cubic
//! `y (a y + x^2 + y^2) = 0`, the union of the line `y = 0` and the circle
//! of radius `|a|/2` centered at `(0, -a/2)`.
//!
//! The moment matrix is permuted so that the columns indexed by pure powers
//! of `x` come first, followed by the spanning columns `y x^i` and
//! `y^2 x^i`, with the residual columns last.  Replacing the top-left block
//! by its minimal admissible value `A_min` splits the sequence into a conic
//! candidate and a line candidate, coupled through a two-parameter
//! perturbation `(t, u)` of the corner of `A_min`.  Existence of a
//! representing measure reduces to whether two explicit parameter regions,
//! one parabolic and one cut out by Schur complements, intersect in the
//! right way.  Everything here is exact; the only square root ever taken is
//! the one adjoined for the intersection points of the two boundaries.

use crate::error::{Error, Result};
use crate::exactmath::{
    psd_rank, rat_to_string, Mat, QuadScalar, Rat, Scalar, SymMat,
};
use crate::moments::{
    check_rg_family, moment_matrix, MomentSequence, Poly2, RgFamily,
};
use num_traits::{One, Zero};
use serde_json::{json, Value};

/// Outcome of a cubic (or conic) decision run.
///
/// `exists` is the exact verdict.  `clause` names the branch of the decision
/// tree that settled it and `detail` spells the reason out for humans.  The
/// atom counts and the witness parameter pair are present only when a
/// measure exists; `witness` is the `(t, u)` at which both the conic and the
/// line part of the sequence admit measures, possibly in a quadratic
/// extension.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub exists: bool,
    pub minimal_atoms: Option<usize>,
    pub atom_upper_bound: Option<usize>,
    pub witness: Option<(QuadScalar, QuadScalar)>,
    pub clause: String,
    pub detail: String,
    pub rank: usize,
    pub line_rank: Option<usize>,
    pub line_rank_adjusted: Option<usize>,
    pub measure_property: Option<MeasureProperty>,
}

/// The two interchangeable ways the line candidate of a parabolic-type
/// sequence can admit a measure: its truncation one step down is positive
/// definite, or the full matrix is a flat extension of it.
#[derive(Debug, Clone, Copy)]
pub struct MeasureProperty {
    pub definite: bool,
    pub flat: bool,
}

impl SolveReport {
    fn refusal(clause: &str, detail: String, rank: usize) -> Self {
        SolveReport {
            exists: false,
            minimal_atoms: None,
            atom_upper_bound: None,
            witness: None,
            clause: clause.to_string(),
            detail,
            rank,
            line_rank: None,
            line_rank_adjusted: None,
            measure_property: None,
        }
    }

    /// Deterministic JSON rendering; rationals are `num/den` strings so the
    /// output survives any consumer's number parsing unchanged.
    pub fn to_json(&self) -> Value {
        let witness = match &self.witness {
            None => Value::Null,
            Some((t, u)) => json!({ "t": quad_json(t), "u": quad_json(u) }),
        };
        let property = match &self.measure_property {
            None => Value::Null,
            Some(p) => json!({ "definite": p.definite, "flat": p.flat }),
        };
        json!({
            "exists": self.exists,
            "minimal_atoms": self.minimal_atoms,
            "atom_upper_bound": self.atom_upper_bound,
            "witness": witness,
            "clause": self.clause,
            "detail": self.detail,
            "rank": self.rank,
            "line_rank": self.line_rank,
            "line_rank_adjusted": self.line_rank_adjusted,
            "measure_property": property,
        })
    }
}

/// JSON form of `a + b sqrt(D)`: three exact strings.
pub(crate) fn quad_json(q: &QuadScalar) -> Value {
    json!({
        "rational": rat_to_string(q.rational_part()),
        "radical": rat_to_string(q.radical_part()),
        "radicand": q.radicand().to_string(),
    })
}

/// The moment matrix after the basis permutation, split into blocks.
///
/// Row and column groups, in order: the `k + 1` pure powers of `x`, the `k`
/// columns `y x^i` with `i < k`, the `k - 1` columns `y^2 x^i` with
/// `i < k - 1`, and the remaining columns in degree-lex order.  The first
/// group is the Hankel block `a11`; groups two and three together form the
/// square block `a22` of side `2k - 1`.
#[derive(Debug, Clone)]
pub struct BlockDecomp {
    k: usize,
    perm: Vec<usize>,
    mtilde: SymMat<Rat>,
    pub a11: SymMat<Rat>,
    pub a12: Mat<Rat>,
    pub a13: Mat<Rat>,
    pub a22: SymMat<Rat>,
    pub a23: Mat<Rat>,
    pub a33: SymMat<Rat>,
}

impl BlockDecomp {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mtilde(&self) -> &SymMat<Rat> {
        &self.mtilde
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// The permuted matrix with the top-left Hankel block replaced by
    /// `top`.  With `top = a11` this reproduces the permuted moment matrix.
    pub fn with_corner<T: Scalar>(&self, top: &SymMat<T>) -> SymMat<T> {
        let n = self.mtilde.size();
        let head = self.k + 1;
        assert_eq!(top.size(), head, "corner block has the wrong size");
        SymMat::from_upper(n, |i, j| {
            if i < head && j < head {
                top[(i, j)].clone()
            } else {
                T::from_rat(self.mtilde[(i, j)].clone())
            }
        })
    }

    /// Coefficient vector of `p` in the permuted column order, for testing
    /// column relations of the block matrices.
    pub fn column_vector(&self, p: &Poly2<Rat>) -> Vec<Rat> {
        let order = crate::moments::MonomialIndex::up_to(self.k);
        self.perm
            .iter()
            .map(|&pos| {
                let (i, j) = order.monomial(pos);
                p.coeff(i, j)
            })
            .collect()
    }
}

/// Builds the permuted block decomposition, after checking that the
/// recursive relations of the family hold at every shift they constrain.
pub fn assemble_blocks(
    seq: &MomentSequence<Rat>,
    family: &RgFamily,
) -> Result<BlockDecomp> {
    let k = seq.k();
    if k < 3 {
        return Err(Error::Precondition(format!(
            "cubic decision needs moments of degree 2k with k >= 3, got k = {k}"
        )));
    }
    let bad = check_rg_family(seq, family);
    if !bad.is_empty() {
        return Err(Error::Precondition(format!(
            "recursive relations fail at {} shift(s), first at x^{} y^{}",
            bad.len(),
            bad[0].0,
            bad[0].1
        )));
    }

    let order = crate::moments::MonomialIndex::up_to(k);
    let n = order.size();
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    for i in 0..=k {
        perm.push(order.position(i, 0).expect("x powers up to k exist"));
    }
    for i in 0..k {
        perm.push(order.position(i, 1).expect("y x^i columns exist"));
    }
    for i in 0..k - 1 {
        perm.push(order.position(i, 2).expect("y^2 x^i columns exist"));
    }
    let mut taken = vec![false; n];
    for &p in &perm {
        taken[p] = true;
    }
    for p in 0..n {
        if !taken[p] {
            perm.push(p);
        }
    }

    let m = moment_matrix(seq);
    let mtilde = SymMat::from_upper(n, |i, j| m[(perm[i], perm[j])].clone());

    let head = k + 1;
    let mid = 2 * k - 1;
    let tail = n - head - mid;
    let rows: Vec<usize> = (0..head).collect();
    let mids: Vec<usize> = (head..head + mid).collect();
    let tails: Vec<usize> = (head + mid..n).collect();
    let big = mtilde.as_mat();
    let a11 = mtilde.principal(&rows);
    let a22 = mtilde.principal(&mids);
    let a33 = mtilde.principal(&tails);
    let a12 = big.submatrix(&rows, &mids);
    let a13 = big.submatrix(&rows, &tails);
    let a23 = big.submatrix(&mids, &tails);
    let _ = tail;

    Ok(BlockDecomp { k, perm, mtilde, a11, a12, a13, a22, a23, a33 })
}

/// Everything the circular decision tree consumes, computed once.
///
/// `a_min` is the smallest Hankel-corner candidate `A12 A22^+ A12^T`;
/// `eta` measures its failure to be Hankel on the second antidiagonal, and
/// `a_min_hat` is `a_min` with that failure pushed into the middle entry.
/// `line_block` is the complementary candidate `A11 - a_min_hat` for the
/// line part, `line_block_plain` the uncorrected `A11 - a_min`.  The
/// Schur data `t1`, `s2`, `u0` describe the feasible region of the line
/// part over the perturbation plane.
#[derive(Debug, Clone)]
pub struct CircularWork {
    k: usize,
    pub a_min: SymMat<Rat>,
    pub eta: Rat,
    pub a_min_hat: SymMat<Rat>,
    pub line_block: SymMat<Rat>,
    pub line_block_plain: SymMat<Rat>,
    pub h12_one: Vec<Rat>,
    pub h12_two: Vec<Rat>,
    pub h22: SymMat<Rat>,
    pub h1: SymMat<Rat>,
    pub h2: SymMat<Rat>,
    pub t1: Rat,
    pub s2: Rat,
    pub u0: Rat,
    pub rank_a22: usize,
}

fn quad_form(p: &SymMat<Rat>, x: &[Rat], y: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            acc += xi * &p[(i, j)] * yj;
        }
    }
    acc
}

pub fn compute_work(blocks: &BlockDecomp) -> CircularWork {
    let k = blocks.k;
    let a22_pinv = crate::exactmath::pinv_sym(&blocks.a22);
    let prod = blocks
        .a12
        .mul(a22_pinv.as_mat())
        .mul(&blocks.a12.transpose());
    let a_min = SymMat::new(prod);
    let eta = &a_min[(0, 2)] - &a_min[(1, 1)];

    let mut a_min_hat = a_min.clone();
    let bumped = &a_min[(1, 1)] + &eta;
    a_min_hat.set_sym(1, 1, bumped);

    let line_block = blocks.a11.sub(&a_min_hat);
    let line_block_plain = blocks.a11.sub(&a_min);

    let h12_one: Vec<Rat> = (2..=k).map(|j| line_block[(0, j)].clone()).collect();
    let h12_two: Vec<Rat> = (2..=k).map(|j| line_block[(1, j)].clone()).collect();
    let tail: Vec<usize> = (2..=k).collect();
    let h22 = line_block.principal(&tail);
    let mut one_tail = vec![0usize];
    one_tail.extend(&tail);
    let h1 = line_block.principal(&one_tail);
    let h2 = line_block.principal(&(1..=k).collect::<Vec<_>>());

    let h22_pinv = crate::exactmath::pinv_sym(&h22);
    let t1 = &line_block[(0, 0)] - quad_form(&h22_pinv, &h12_one, &h12_one);
    let s2 = &line_block[(1, 1)] - quad_form(&h22_pinv, &h12_two, &h12_two);
    let u0 = &line_block[(0, 1)] - quad_form(&h22_pinv, &h12_one, &h12_two);

    let rank_a22 = blocks.a22.rank();

    CircularWork {
        k,
        a_min,
        eta,
        a_min_hat,
        line_block,
        line_block_plain,
        h12_one,
        h12_two,
        h22,
        h1,
        h2,
        t1,
        s2,
        u0,
        rank_a22,
    }
}

impl CircularWork {
    /// The conic-part candidate at `(t, u)`: `a_min_hat` with `t` added at
    /// the top-left corner and `u` on the adjacent off-diagonal pair.
    pub fn conic_corner_at<T: Scalar>(&self, t: &T, u: &T) -> SymMat<T> {
        SymMat::from_upper(self.k + 1, |i, j| {
            let base = T::from_rat(self.a_min_hat[(i, j)].clone());
            if i == 0 && j == 0 {
                base + t.clone()
            } else if i == 0 && j == 1 {
                base + u.clone()
            } else {
                base
            }
        })
    }

    /// The line-part candidate at `(t, u)`: the complementary corner
    /// `A11 - conic_corner_at(t, u)`.
    pub fn line_matrix_at<T: Scalar>(&self, t: &T, u: &T) -> SymMat<T> {
        SymMat::from_upper(self.k + 1, |i, j| {
            let base = T::from_rat(self.line_block[(i, j)].clone());
            if i == 0 && j == 0 {
                base - t.clone()
            } else if i == 0 && j == 1 {
                base - u.clone()
            } else {
                base
            }
        })
    }

    /// Moment vector `(v_0, ..., v_{2k})` of the line part at `(t, u)`.
    ///
    /// Fails when the line candidate is not Hankel, which cannot happen for
    /// sequences that passed the recursive-relation check.
    pub fn line_moments_at<T: Scalar>(&self, t: &T, u: &T) -> Result<Vec<T>> {
        let k = self.k;
        for d in 2..=2 * k {
            let lo = d.saturating_sub(k);
            let pivot = (lo.min(d), d - lo.min(d));
            for i in lo..=d.min(k) {
                let j = d - i;
                if j > k {
                    continue;
                }
                if self.line_block[(i, j)] != self.line_block[pivot] {
                    return Err(Error::Precondition(format!(
                        "line candidate is not Hankel on antidiagonal {d}"
                    )));
                }
            }
        }
        let mut v: Vec<T> = (0..=2 * k)
            .map(|d| {
                let i = d.saturating_sub(k).min(d);
                T::from_rat(self.line_block[(i, d - i)].clone())
            })
            .collect();
        v[0] = v[0].clone() - t.clone();
        v[1] = v[1].clone() - u.clone();
        Ok(v)
    }
}

/// A point where the boundary parabola `u^2 = eta t` of the conic region
/// meets the boundary `(u - u0)^2 = (t1 - t) s2` of the line region.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub t: QuadScalar,
    pub u: QuadScalar,
}

/// Intersection points of the two region boundaries, sorted by `t`.
///
/// Eliminating `t = u^2 / eta` leaves one quadratic in `u` with leading
/// coefficient `1 + s2 / eta >= 1`, so there are at most two points; each
/// candidate is filtered by `t <= t1` and re-checked against both boundary
/// equations exactly before it is accepted.  Only meaningful on the branch
/// `eta > 0`.
pub fn boundary_set(work: &CircularWork) -> Result<Vec<BoundaryPoint>> {
    if work.eta.signum() <= 0 {
        return Err(Error::Precondition(
            "boundary intersection is defined only for a positive corner gap".into(),
        ));
    }
    let eta = &work.eta;
    let lead = Rat::one() + &work.s2 / eta;
    let constant = &work.u0 * &work.u0 - &work.t1 * &work.s2;
    let quarter_disc = &work.u0 * &work.u0 - &lead * &constant;
    if quarter_disc.signum() < 0 {
        return Ok(Vec::new());
    }

    let root = QuadScalar::sqrt_rat(&quarter_disc)
        .expect("nonnegative rational has a quadratic square root");
    let inv_lead = QuadScalar::from_rational(lead.recip());
    let u_center = QuadScalar::from_rational(work.u0.clone());
    let mut candidates = vec![u_center.clone() + root.clone()];
    if !root.is_zero() {
        candidates.push(u_center - root);
    }

    let inv_eta = QuadScalar::from_rational(eta.recip());
    let t1q = QuadScalar::from_rational(work.t1.clone());
    let s2q = QuadScalar::from_rational(work.s2.clone());
    let u0q = QuadScalar::from_rational(work.u0.clone());
    let etaq = QuadScalar::from_rational(eta.clone());

    let mut points: Vec<BoundaryPoint> = Vec::new();
    for u in candidates {
        let u = u * inv_lead.clone();
        let t = u.clone() * u.clone() * inv_eta.clone();
        if (t1q.clone() - t.clone()).signum() < 0 {
            continue;
        }
        let du = u.clone() - u0q.clone();
        let line_ok = du.clone() * du == (t1q.clone() - t.clone()) * s2q.clone();
        let conic_ok = u.clone() * u.clone() == etaq.clone() * t.clone();
        if line_ok && conic_ok {
            points.push(BoundaryPoint { t, u });
        }
    }
    points.sort_by(|p, q| match (p.t.clone() - q.t.clone()).signum() {
        -1 => std::cmp::Ordering::Less,
        0 => std::cmp::Ordering::Equal,
        _ => std::cmp::Ordering::Greater,
    });
    points.dedup_by(|p, q| p.t == q.t && p.u == q.u);
    Ok(points)
}

/// Decides whether a degree-`2k` sequence has a representing measure on
/// `y (a y + x^2 + y^2) = 0` and, if so, the minimal number of atoms.
pub fn solve_circular(seq: &MomentSequence<Rat>, a: &Rat) -> Result<SolveReport> {
    if a.is_zero() {
        return Err(Error::Precondition(
            "the circle parameter must be nonzero; a zero parameter degenerates the conic".into(),
        ));
    }
    if seq.k() < 3 {
        return Err(Error::Precondition(format!(
            "circular decision needs k >= 3, got k = {}",
            seq.k()
        )));
    }

    let psd = psd_rank(&moment_matrix(seq));
    let rank = psd.rank;
    if !psd.is_psd {
        let detail = match &psd.witness {
            Some(w) => format!(
                "moment matrix has a negative principal minor on columns {:?}",
                w.indices
            ),
            None => "moment matrix is not positive semidefinite".into(),
        };
        return Ok(SolveReport::refusal("not-psd", detail, rank));
    }

    let family = RgFamily::Circular { a: a.clone() };
    let bad = check_rg_family(seq, &family);
    if !bad.is_empty() {
        return Ok(SolveReport::refusal(
            "relations-violated",
            format!(
                "curve relations fail at {} shift(s), first at x^{} y^{}",
                bad.len(),
                bad[0].0,
                bad[0].1
            ),
            rank,
        ));
    }

    let blocks = assemble_blocks(seq, &family)?;
    let work = compute_work(&blocks);
    let line_rank = work.line_block_plain.rank();
    let line_rank_adjusted = work.line_block.rank();
    let k = work.k;

    let finish = |exists: bool,
                  clause: &str,
                  detail: String,
                  witness: Option<(QuadScalar, QuadScalar)>| {
        let mut report = SolveReport::refusal(clause, detail, rank);
        report.exists = exists;
        report.line_rank = Some(line_rank);
        report.line_rank_adjusted = Some(line_rank_adjusted);
        if exists {
            report.witness = witness;
            report.atom_upper_bound = Some(rank + 1);
            let plain_pd = psd_rank(&work.line_block_plain).is_pd(k + 1);
            let tight = work.eta.is_zero() || (work.eta.signum() > 0 && plain_pd);
            report.minimal_atoms = Some(if tight { rank } else { rank + 1 });
        }
        Ok(report)
    };

    match work.eta.signum() {
        -1 => finish(
            false,
            "eta-negative",
            format!(
                "corner gap eta = {} is negative, so the conic candidate cannot be psd",
                rat_to_string(&work.eta)
            ),
            None,
        ),
        0 => {
            let lead: Vec<usize> = (0..k).collect();
            let top = work.line_block.principal(&lead);
            if psd_rank(&top).is_pd(k) {
                return finish(
                    true,
                    "a-i",
                    "eta vanishes and the order-k truncation of the line candidate is positive definite".into(),
                    Some((QuadScalar::zero(), QuadScalar::zero())),
                );
            }
            let h2_lead: Vec<usize> = (0..k - 1).collect();
            let h2_top_rank = work.h2.principal(&h2_lead).rank();
            if h2_top_rank == work.h2.rank() {
                finish(
                    true,
                    "a-ii",
                    "eta vanishes and the shifted line candidate is a flat extension".into(),
                    Some((QuadScalar::zero(), QuadScalar::zero())),
                )
            } else {
                finish(
                    false,
                    "a",
                    "eta vanishes but the line candidate is neither definite nor flat".into(),
                    None,
                )
            }
        }
        _ => {
            let h2_report = psd_rank(&work.h2);
            if !h2_report.is_psd {
                let detail = match &h2_report.witness {
                    Some(w) => format!(
                        "shifted line block H2 has a negative principal minor on rows {:?}",
                        w.indices
                    ),
                    None => "shifted line block H2 is not psd".into(),
                };
                return finish(false, "b: H2 not psd", detail, None);
            }
            let points = boundary_set(&work)?;
            match points.len() {
                0 => finish(
                    false,
                    "b: boundary set empty",
                    "the conic and line feasible regions have disjoint boundaries".into(),
                    None,
                ),
                2 => {
                    if h2_report.is_pd(k) {
                        let witness = select_witness(&work, &points);
                        finish(
                            true,
                            "b-i",
                            "two boundary intersection points with H2 positive definite".into(),
                            Some(witness),
                        )
                    } else {
                        finish(
                            false,
                            "b: two boundary points, H2 not definite",
                            "two boundary intersection points but H2 is singular".into(),
                            None,
                        )
                    }
                }
                _ => {
                    let p = &points[0];
                    let line = work.line_matrix_at(&p.t, &p.u);
                    let lead: Vec<usize> = (0..k).collect();
                    let top_rank = line.principal(&lead).rank();
                    let full_rank = line.rank();
                    if top_rank == full_rank {
                        finish(
                            true,
                            "b-ii",
                            "single boundary intersection point and the line candidate there is flat".into(),
                            Some((p.t.clone(), p.u.clone())),
                        )
                    } else {
                        finish(
                            false,
                            "b-ii",
                            "single boundary intersection point but the line candidate there is not flat".into(),
                            None,
                        )
                    }
                }
            }
        }
    }
}

/// Picks the boundary point whose line moments pass the one-variable
/// decision, preferring the smaller `t`; at least one always does.
fn select_witness(
    work: &CircularWork,
    points: &[BoundaryPoint],
) -> (QuadScalar, QuadScalar) {
    for p in points {
        if let Ok(v) = work.line_moments_at(&p.t, &p.u) {
            if let Ok(hv) = crate::univariate::HankelVec::new(v) {
                if crate::univariate::solve_hamburger(&hv).exists {
                    return (p.t.clone(), p.u.clone());
                }
            }
        }
    }
    (points[0].t.clone(), points[0].u.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{rat, rat_i64};

    fn circular_seq(k: usize, a: &Rat, line: &[(Rat, Rat)], conic: &[(Rat, Rat)]) -> MomentSequence<Rat> {
        let mut atoms: Vec<(Rat, Rat, Rat)> = Vec::new();
        for (x, w) in line {
            atoms.push((x.clone(), Rat::zero(), w.clone()));
        }
        for (m, w) in conic {
            let denom = Rat::one() + m * m;
            let x = -(a * m) / &denom;
            let y = -(a * m * m) / &denom;
            atoms.push((x, y, w.clone()));
        }
        MomentSequence::from_fn(k, |i, j| {
            let mut acc = Rat::zero();
            for (x, y, w) in &atoms {
                let mut term = w.clone();
                for _ in 0..i {
                    term *= x;
                }
                for _ in 0..j {
                    term *= y;
                }
                acc += term;
            }
            acc
        })
        .expect("moment table size")
    }

    fn section_example() -> MomentSequence<Rat> {
        let table: &[(usize, usize, i64, i64)] = &[
            (0, 0, 10, 1),
            (1, 0, 38, 5),
            (0, 1, 39, 5),
            (2, 0, 602, 25),
            (1, 1, 3, 25),
            (0, 2, 313, 25),
            (3, 0, 9152, 125),
            (2, 1, 421, 125),
            (1, 2, 3, 125),
            (0, 3, 2709, 125),
            (4, 0, 172118, 625),
            (3, 1, 27, 625),
            (2, 2, 2717, 625),
            (1, 3, 3, 625),
            (0, 4, 24373, 625),
            (5, 0, 3303368, 3125),
            (4, 1, 7789, 3125),
            (3, 2, 27, 3125),
            (2, 3, 19381, 3125),
            (1, 4, 3, 3125),
            (0, 5, 224349, 3125),
            (6, 0, 4156, 1),
            (5, 1, 243, 15625),
            (4, 2, 44453, 15625),
            (3, 3, 27, 15625),
            (2, 4, 149357, 15625),
            (1, 5, 3, 15625),
            (0, 6, 2094133, 15625),
        ];
        MomentSequence::from_fn(3, |i, j| {
            let (_, _, n, d) = table
                .iter()
                .find(|(a, b, _, _)| *a == i && *b == j)
                .expect("table covers all moments");
            rat(*n, *d)
        })
        .unwrap()
    }

    #[test]
    fn blocks_reassemble_the_permuted_matrix() {
        let seq = circular_seq(
            3,
            &rat_i64(-2),
            &[(rat(1, 2), rat_i64(1)), (rat_i64(3), rat(1, 3))],
            &[(rat_i64(1), rat_i64(2)), (rat(-1, 2), rat_i64(1))],
        );
        let blocks = assemble_blocks(&seq, &RgFamily::Circular { a: rat_i64(-2) }).unwrap();
        let rebuilt = blocks.with_corner(&blocks.a11);
        assert_eq!(rebuilt.as_mat(), blocks.mtilde().as_mat());
        let m = moment_matrix(&seq);
        let perm = blocks.permutation();
        for i in 0..perm.len() {
            for j in 0..perm.len() {
                assert_eq!(blocks.mtilde()[(i, j)], m[(perm[i], perm[j])]);
            }
        }
    }

    #[test]
    fn minimal_corner_facts_on_a_synthesized_measure() {
        let a = rat_i64(-2);
        let seq = circular_seq(
            3,
            &a,
            &[(rat(1, 2), rat_i64(1)), (rat_i64(3), rat(1, 3)), (rat_i64(-1), rat_i64(2))],
            &[
                (rat_i64(1), rat_i64(2)),
                (rat(-1, 2), rat_i64(1)),
                (rat_i64(2), rat(2, 5)),
                (rat(1, 3), rat_i64(1)),
                (rat_i64(-3), rat(1, 2)),
            ],
        );
        let blocks = assemble_blocks(&seq, &RgFamily::Circular { a: a.clone() }).unwrap();
        let work = compute_work(&blocks);

        let f_min = blocks.with_corner(&work.a_min);
        let f_rep = psd_rank(&f_min);
        assert!(f_rep.is_psd, "conic candidate at the minimal corner is psd");
        assert_eq!(f_rep.rank, work.rank_a22, "corner replacement does not add rank");

        let h_rep = psd_rank(&work.line_block_plain);
        assert!(h_rep.is_psd, "line candidate at the minimal corner is psd");

        let mrank = moment_matrix(&seq).rank();
        assert_eq!(
            mrank,
            work.rank_a22 + work.line_block_plain.rank(),
            "rank splits between conic and line candidates"
        );

        let conic = Poly2::from_terms([
            (0, 1, a.clone()),
            (2, 0, Rat::one()),
            (0, 2, Rat::one()),
        ]);
        for i in 0..=1usize {
            for j in 0..=1usize {
                if i + j > 1 {
                    continue;
                }
                let shifted = Poly2::monomial(i, j).mul(&conic);
                let v = blocks.column_vector(&shifted);
                let fv = f_min.as_mat().mul(&Mat::col_vec(&v));
                assert!(fv.is_zero(), "conic column relation x^{i} y^{j} c");
            }
        }
    }

    #[test]
    fn section_example_is_refused_through_the_shifted_line_block() {
        let seq = section_example();
        let a = rat_i64(-2);
        assert!(check_rg_family(&seq, &RgFamily::Circular { a: a.clone() }).is_empty());

        let blocks = assemble_blocks(&seq, &RgFamily::Circular { a: a.clone() }).unwrap();
        let work = compute_work(&blocks);

        let expected_a_min = [
            [rat(324330, 55783), rat(132789, 278915), rat(77, 25), rat(27, 125)],
            [rat(132789, 278915), rat(4180091, 1394575), rat(27, 125), rat(1493, 625)],
            [rat(77, 25), rat(27, 125), rat(1493, 625), rat(243, 3125)],
            [rat(27, 125), rat(1493, 625), rat(243, 3125), rat(33437, 15625)],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(work.a_min[(i, j)], expected_a_min[i][j], "a_min[{i}][{j}]");
            }
        }
        assert_eq!(work.eta, rat(4608, 55783));

        let expected_h2 = [
            [rat_i64(21), rat_i64(73), rat_i64(273)],
            [rat_i64(73), rat_i64(273), rat_i64(1057)],
            [rat_i64(273), rat_i64(1057), rat(64904063, 15625)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(work.h2[(i, j)], expected_h2[i][j], "h2[{i}][{j}]");
            }
        }
        assert!(!psd_rank(&work.h2).is_psd);

        let report = solve_circular(&seq, &a).unwrap();
        assert!(!report.exists);
        assert_eq!(report.clause, "b: H2 not psd");
        assert!(report.witness.is_none());
        assert_eq!(report.rank, 9);
    }

    #[test]
    fn line_only_with_four_atoms_lands_in_the_definite_clause() {
        let a = rat_i64(-2);
        let seq = circular_seq(
            3,
            &a,
            &[
                (rat_i64(1), rat_i64(1)),
                (rat_i64(2), rat(1, 2)),
                (rat_i64(-1), rat_i64(1)),
                (rat(1, 3), rat_i64(2)),
            ],
            &[],
        );
        let report = solve_circular(&seq, &a).unwrap();
        assert!(report.exists);
        assert_eq!(report.clause, "a-i");
        assert_eq!(report.rank, 4);
        assert_eq!(report.minimal_atoms, Some(4));
        assert_eq!(report.atom_upper_bound, Some(5));
    }

    #[test]
    fn line_only_with_two_atoms_lands_in_the_flat_clause() {
        let a = rat_i64(-2);
        let seq = circular_seq(
            3,
            &a,
            &[(rat(1, 2), rat_i64(1)), (rat_i64(3), rat(1, 3))],
            &[],
        );
        let report = solve_circular(&seq, &a).unwrap();
        assert!(report.exists);
        assert_eq!(report.clause, "a-ii");
        assert_eq!(report.rank, 2);
        assert_eq!(report.minimal_atoms, Some(2));
    }

    #[test]
    fn mixed_measure_admits_and_respects_atom_bounds() {
        let (seq, a) = mixed_nine_atom_seq();
        let report = solve_circular(&seq, &a).unwrap();
        assert!(report.exists, "synthesized measure must be accepted: {}", report.detail);
        assert_eq!(report.clause, "b-i");
        assert_eq!(report.rank, 9);
        assert_eq!(report.minimal_atoms, Some(9), "nine atoms realize the rank");
        assert_eq!(report.atom_upper_bound, Some(10));
        assert!(report.witness.is_some());
    }

    fn mixed_nine_atom_seq() -> (MomentSequence<Rat>, Rat) {
        let a = rat_i64(-2);
        let seq = circular_seq(
            3,
            &a,
            &[(rat(1, 2), rat_i64(1)), (rat_i64(3), rat(1, 3)), (rat_i64(-2), rat(3, 4))],
            &[
                (rat_i64(1), rat_i64(2)),
                (rat(-1, 2), rat_i64(1)),
                (rat_i64(2), rat(2, 5)),
                (rat(1, 3), rat_i64(1)),
                (rat_i64(-3), rat(1, 2)),
                (rat_i64(5), rat(1, 5)),
            ],
        );
        (seq, a)
    }

    #[test]
    fn conic_region_ranks_follow_the_perturbation_pencil() {
        let (seq, a) = mixed_nine_atom_seq();
        let blocks = assemble_blocks(&seq, &RgFamily::Circular { a }).unwrap();
        let work = compute_work(&blocks);
        assert_eq!(work.eta.signum(), 1, "this instance has a positive corner gap");
        let base_rank = blocks.with_corner(&work.a_min).rank();

        let m = rat(1, 3);
        let u_b = &work.eta * &m;
        let t_b = &work.eta * &m * &m;
        let boundary = blocks.with_corner(&work.conic_corner_at(&t_b, &u_b));
        let b_rep = psd_rank(&boundary);
        assert!(b_rep.is_psd, "parabola boundary point stays psd");
        assert_eq!(b_rep.rank, base_rank + 1);

        let t_i = &t_b + rat_i64(1);
        let interior = blocks.with_corner(&work.conic_corner_at(&t_i, &u_b));
        let i_rep = psd_rank(&interior);
        assert!(i_rep.is_psd, "interior point stays psd");
        assert_eq!(i_rep.rank, base_rank + 2);

        let outside = blocks.with_corner(&work.conic_corner_at(&t_b, &(&u_b + rat_i64(1))));
        assert!(!psd_rank(&outside).is_psd, "points above the parabola fail");
    }

    #[test]
    fn line_region_ranks_follow_the_schur_complements() {
        let a = rat_i64(-2);
        let seq = circular_seq(
            3,
            &a,
            &[(rat(1, 2), rat_i64(1)), (rat_i64(3), rat(1, 3)), (rat_i64(-1), rat_i64(2))],
            &[
                (rat_i64(1), rat_i64(2)),
                (rat(-1, 2), rat_i64(1)),
                (rat_i64(2), rat(2, 5)),
                (rat(1, 3), rat_i64(1)),
                (rat_i64(-3), rat(1, 2)),
            ],
        );
        let blocks = assemble_blocks(&seq, &RgFamily::Circular { a }).unwrap();
        let work = compute_work(&blocks);
        assert_eq!(work.s2.signum(), 1, "this instance has a nondegenerate line region");
        let h22_rank = work.h22.rank();

        let apex = work.line_matrix_at(&work.t1, &work.u0);
        let apex_rep = psd_rank(&apex);
        assert!(apex_rep.is_psd, "apex of the line region is psd");
        assert_eq!(apex_rep.rank, work.h2.rank());

        let m = rat(1, 4);
        let t_b = &work.t1 - &work.s2 * &m * &m;
        let u_b = &work.u0 + &work.s2 * &m;
        let edge = work.line_matrix_at(&t_b, &u_b);
        let edge_rep = psd_rank(&edge);
        assert!(edge_rep.is_psd, "boundary arc of the line region is psd");
        assert_eq!(edge_rep.rank, h22_rank + 1);

        let inner = work.line_matrix_at(&(&t_b - rat(1, 100)), &u_b);
        let inner_rep = psd_rank(&inner);
        assert!(inner_rep.is_psd, "interior of the line region is psd");
        assert_eq!(inner_rep.rank, h22_rank + 2);

        let outside = work.line_matrix_at(&(&work.t1 + rat_i64(1)), &work.u0);
        assert!(!psd_rank(&outside).is_psd, "beyond the apex the line candidate fails");
    }

    #[test]
    fn boundary_set_handles_the_degenerate_shapes() {
        let (seq, a) = mixed_nine_atom_seq();
        let blocks = assemble_blocks(&seq, &RgFamily::Circular { a }).unwrap();
        let work = compute_work(&blocks);
        assert_eq!(work.eta.signum(), 1, "this instance has a positive corner gap");
        let points = boundary_set(&work).unwrap();
        assert_eq!(points.len(), 2, "generic instance meets the boundary twice");
        let etaq = QuadScalar::from_rational(work.eta.clone());
        let t1q = QuadScalar::from_rational(work.t1.clone());
        let s2q = QuadScalar::from_rational(work.s2.clone());
        let u0q = QuadScalar::from_rational(work.u0.clone());
        for p in &points {
            assert_eq!(p.u.clone() * p.u.clone(), etaq.clone() * p.t.clone());
            let du = p.u.clone() - u0q.clone();
            assert_eq!(du.clone() * du, (t1q.clone() - p.t.clone()) * s2q.clone());
            assert!(p.t.is_nonneg());
        }
        if points.len() == 2 {
            assert!((points[1].t.clone() - points[0].t.clone()).signum() >= 0);
        }
    }

    #[test]
    fn refusals_name_their_gate() {
        let bad_psd = MomentSequence::from_fn(3, |i, j| {
            if (i, j) == (0, 0) {
                rat_i64(-1)
            } else {
                rat_i64(0)
            }
        })
        .unwrap();
        let report = solve_circular(&bad_psd, &rat_i64(-2)).unwrap();
        assert!(!report.exists);
        assert_eq!(report.clause, "not-psd");

        let off_curve = MomentSequence::from_fn(3, |i, j| {
            rat_i64(2i64.pow(i as u32) * 2i64.pow(j as u32))
        })
        .unwrap();
        let report = solve_circular(&off_curve, &rat_i64(-2)).unwrap();
        assert!(!report.exists);
        assert_eq!(report.clause, "relations-violated");

        assert!(solve_circular(&bad_psd, &rat_i64(0)).is_err());
        let small = MomentSequence::from_fn(2, |_, _| rat_i64(0)).unwrap();
        assert!(solve_circular(&small, &rat_i64(-2)).is_err());
    }
}
