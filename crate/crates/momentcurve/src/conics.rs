//! Decision procedures for moment sequences supported on a single conic,
//! either the circle `a y + x^2 + y^2 = 0` with `a != 0` or the parabola
//! `x = y^2`.
//!
//! On the circle, positivity of the moment matrix together with the conic
//! column relations is already equivalent to the existence of a measure; no
//! rank condition enters.  On the parabola, folding the two-variable
//! sequence onto the curve parameter turns the problem into a one-variable
//! moment problem on the line, and a second, independent route through a
//! principal block of the moment matrix is kept alongside it for
//! cross-checking.

use crate::cubic_circular::SolveReport;
use crate::error::{Error, Result};
use crate::exactmath::{psd_rank, Rat};
use crate::moments::{moment_matrix, MomentSequence, MonomialIndex};
use crate::transforms::AffineMap;
use crate::univariate::{solve_hamburger, HankelVec};
use num_traits::{One, Signed, Zero};

/// One-variable folding `gamma_i = beta_{floor(i/2), i mod 2}` of a
/// sequence whose support lies on `x = y^2`; the power of the curve
/// parameter `y` carried by `x^i y^j` is `2i + j`.
#[derive(Debug, Clone)]
pub struct GammaSeq {
    vals: Vec<Rat>,
}

impl GammaSeq {
    pub fn values(&self) -> &[Rat] {
        &self.vals
    }

    pub fn hankel_vec(&self) -> HankelVec<Rat> {
        HankelVec::new(self.vals.clone()).expect("gamma length 4k + 1 is odd")
    }
}

/// Folds a degree-`2k` sequence to the `4k + 1` parabola parameter moments.
pub fn gamma_of(seq: &MomentSequence<Rat>) -> GammaSeq {
    let vals = (0..=4 * seq.k())
        .map(|i| seq.get(i / 2, i % 2).clone())
        .collect();
    GammaSeq { vals }
}

/// Shifts `(i, j)` where `beta_{2+i,j} + beta_{i,2+j} = beta_{i,j}` fails,
/// the moment-level trace of the circle relation with `a = -1` scaled away;
/// the caller passes moments already living on `a y = -(x^2 + y^2)`.
pub fn circle_violations(seq: &MomentSequence<Rat>, a: &Rat) -> Vec<(usize, usize)> {
    let k = seq.k();
    if k < 1 {
        return Vec::new();
    }
    let mut bad = Vec::new();
    for d in 0..=(2 * k - 2) {
        for j in 0..=d {
            let i = d - j;
            let lhs = a * seq.get(i, j + 1) + seq.get(i + 2, j) + seq.get(i, j + 2);
            if !lhs.is_zero() {
                bad.push((i, j));
            }
        }
    }
    bad
}

/// Shifts `(i, j)` where the parabola relation `beta_{1+i,j} = beta_{i,2+j}`
/// fails.
pub fn parabola_violations(seq: &MomentSequence<Rat>) -> Vec<(usize, usize)> {
    let k = seq.k();
    if k < 1 {
        return Vec::new();
    }
    let mut bad = Vec::new();
    for d in 0..=(2 * k - 2) {
        for j in 0..=d {
            let i = d - j;
            if seq.get(i + 1, j) != seq.get(i, j + 2) {
                bad.push((i, j));
            }
        }
    }
    bad
}

/// Decides representability on the circle `a y + x^2 + y^2 = 0`.
///
/// Positivity plus the conic relations is the whole characterization, and
/// the minimal atom count equals the rank of the moment matrix.
pub fn solve_circle(seq: &MomentSequence<Rat>, a: &Rat) -> Result<SolveReport> {
    if a.is_zero() {
        return Err(Error::Precondition(
            "the circle parameter must be nonzero".into(),
        ));
    }
    if seq.k() < 2 {
        return Err(Error::Precondition(format!(
            "circle decision needs k >= 2, got k = {}",
            seq.k()
        )));
    }
    let psd = psd_rank(&moment_matrix(seq));
    let rank = psd.rank;
    let mut report = base_report(rank);
    if !psd.is_psd {
        report.clause = "not-psd".into();
        report.detail = "moment matrix is not positive semidefinite".into();
        return Ok(report);
    }
    let bad = circle_violations(seq, a);
    if !bad.is_empty() {
        report.clause = "relations-violated".into();
        report.detail = format!(
            "circle relations fail at {} shift(s), first at x^{} y^{}",
            bad.len(),
            bad[0].0,
            bad[0].1
        );
        return Ok(report);
    }
    report.exists = true;
    report.clause = "psd-and-relations".into();
    report.detail = "positivity and the circle column relations settle existence".into();
    report.minimal_atoms = Some(rank);
    report.atom_upper_bound = Some(rank);
    Ok(report)
}

/// Decides representability on the parabola `x = y^2` by folding onto the
/// curve parameter and running the one-variable decision.
pub fn solve_parabola(seq: &MomentSequence<Rat>) -> SolveReport {
    let rank = moment_matrix(seq).rank();
    let mut report = base_report(rank);
    let bad = parabola_violations(seq);
    if !bad.is_empty() {
        report.clause = "relations-violated".into();
        report.detail = format!(
            "parabola relations fail at {} shift(s), first at x^{} y^{}",
            bad.len(),
            bad[0].0,
            bad[0].1
        );
        return report;
    }
    let folded = gamma_of(seq).hankel_vec();
    let line = solve_hamburger(&folded);
    if line.exists {
        report.exists = true;
        report.clause = "gamma-line".into();
        report.detail = "the folded parameter moments admit a one-variable measure".into();
        report.minimal_atoms = Some(rank);
        report.atom_upper_bound = Some(rank);
    } else {
        report.clause = "gamma-no-measure".into();
        report.detail =
            "the folded parameter moments admit no one-variable measure".into();
    }
    report
}

/// Independent route to the parabola decision through the moment matrix:
/// positivity, the relations, and definiteness or flatness of the principal
/// block on the columns `1, y, x, x y, ..., x^{k-1}, x^{k-1} y`.
pub fn parabola_matrix_route(seq: &MomentSequence<Rat>) -> bool {
    let k = seq.k();
    if k < 2 {
        return false;
    }
    let psd = psd_rank(&moment_matrix(seq));
    if !psd.is_psd || !parabola_violations(seq).is_empty() {
        return false;
    }
    let order = MonomialIndex::up_to(k);
    let mut cols: Vec<usize> = Vec::with_capacity(2 * k);
    for i in 0..k {
        cols.push(order.position(i, 0).expect("x^i column"));
        cols.push(order.position(i, 1).expect("x^i y column"));
    }
    let block = moment_matrix(seq).principal(&cols);
    let block_report = psd_rank(&block);
    block_report.is_pd(2 * k) || block_report.rank == psd.rank
}

/// Affine change of variables carrying the circle `a y + x^2 + y^2 = 0`
/// onto the unit circle `u^2 + v^2 = 1`: `(x, y) -> (2x/|a|, 2y/a + 1)`.
pub fn unit_circle_premap(a: &Rat) -> Result<AffineMap<Rat>> {
    if a.is_zero() {
        return Err(Error::Precondition(
            "the circle parameter must be nonzero".into(),
        ));
    }
    let two = Rat::one() + Rat::one();
    AffineMap::new(
        Rat::zero(),
        &two / a.abs(),
        Rat::zero(),
        Rat::one(),
        Rat::zero(),
        &two / a,
    )
}

fn base_report(rank: usize) -> SolveReport {
    SolveReport {
        exists: false,
        minimal_atoms: None,
        atom_upper_bound: None,
        witness: None,
        clause: String::new(),
        detail: String::new(),
        rank,
        line_rank: None,
        line_rank_adjusted: None,
        measure_property: None,
    }
}
