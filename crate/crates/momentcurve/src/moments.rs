//! Bivariate truncated moment sequences, their moment matrices, the Riesz
//! functional, column relations and recursive relation families.

use crate::error::{Error, Result};
use crate::exactmath::{Rat, Scalar, SymMat};
use num_traits::Zero;
use std::collections::BTreeMap;

/// The frozen monomial order on bivariate monomials up to a degree bound:
/// total degree ascending, and inside one degree the power of x descending,
/// so `1, X, Y, X^2, XY, Y^2, X^3, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonomialIndex {
    degree: usize,
}

impl MonomialIndex {
    /// Order covering all monomials of total degree at most `degree`.
    pub fn up_to(degree: usize) -> Self {
        MonomialIndex { degree }
    }

    /// Number of monomials in the order.
    pub fn size(&self) -> usize {
        (self.degree + 1) * (self.degree + 2) / 2
    }

    /// Position of `x^i y^j`; `None` when the total degree exceeds the bound.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let d = i + j;
        if d > self.degree {
            return None;
        }
        Some(d * (d + 1) / 2 + j)
    }

    /// Monomial `(i, j)` at a position.
    pub fn monomial(&self, pos: usize) -> (usize, usize) {
        assert!(pos < self.size(), "monomial position out of range");
        let mut d = 0usize;
        while (d + 1) * (d + 2) / 2 <= pos {
            d += 1;
        }
        let j = pos - d * (d + 1) / 2;
        (d - j, j)
    }

    /// All monomials in order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size()).map(|p| self.monomial(p))
    }
}

/// A complete truncated moment sequence of degree `2k`: one value for every
/// monomial `x^i y^j` with `i + j <= 2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence<T = Rat> {
    k: usize,
    vals: Vec<T>,
}

impl<T: Scalar> MomentSequence<T> {
    /// Wraps a complete value vector in the frozen monomial order of degree
    /// `2k`. Fails when `k = 0` or the vector length does not match.
    pub fn new(k: usize, vals: Vec<T>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("moment sequences need k >= 1".into()));
        }
        let expect = MonomialIndex::up_to(2 * k).size();
        if vals.len() != expect {
            return Err(Error::InvalidInput(format!(
                "degree-{} sequence needs {} moments, got {}",
                2 * k,
                expect,
                vals.len()
            )));
        }
        Ok(MomentSequence { k, vals })
    }

    /// Builds from a value function on exponents.
    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let order = MonomialIndex::up_to(2 * k);
        let vals = order.iter().map(|(i, j)| f(i, j)).collect();
        Self::new(k, vals)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The monomial order of the sequence (degree `2k`).
    pub fn order(&self) -> MonomialIndex {
        MonomialIndex::up_to(2 * self.k)
    }

    /// Moment of `x^i y^j`; panics when `i + j > 2k`.
    pub fn get(&self, i: usize, j: usize) -> &T {
        let pos = self
            .order()
            .position(i, j)
            .unwrap_or_else(|| panic!("moment ({}, {}) exceeds degree {}", i, j, 2 * self.k));
        &self.vals[pos]
    }

    /// Entry-wise conversion to another scalar type.
    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> MomentSequence<U> {
        MomentSequence { k: self.k, vals: self.vals.iter().map(f).collect() }
    }

    /// Entry-wise fallible conversion.
    pub fn try_map<U: Scalar, E>(
        &self,
        f: impl FnMut(&T) -> std::result::Result<U, E>,
    ) -> std::result::Result<MomentSequence<U>, E> {
        let vals = self.vals.iter().map(f).collect::<std::result::Result<Vec<_>, E>>()?;
        Ok(MomentSequence { k: self.k, vals })
    }

    /// All values in the frozen order.
    pub fn values(&self) -> &[T] {
        &self.vals
    }
}

/// Bivariate polynomial with exact coefficients, stored sparsely by
/// exponent pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2<T = Rat> {
    coeffs: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> Poly2<T> {
    pub fn zero() -> Self {
        Poly2 { coeffs: BTreeMap::new() }
    }

    /// Builds from `(i, j, coefficient)` terms, dropping zeros and summing
    /// duplicates.
    pub fn from_terms(terms: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut p = Poly2::zero();
        for (i, j, c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    /// The monomial `x^i y^j`.
    pub fn monomial(i: usize, j: usize) -> Self {
        Poly2::from_terms([(i, j, T::one())])
    }

    /// The constant polynomial.
    pub fn constant(c: T) -> Self {
        Poly2::from_terms([(0, 0, c)])
    }

    pub fn add_term(&mut self, i: usize, j: usize, c: T) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry((i, j)).or_insert_with(T::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> T {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.coeffs.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree; zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (i, j, c) in rhs.terms() {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&(-T::one())))
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.is_zero() {
            return Poly2::zero();
        }
        Poly2 {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&ij, c)| (ij, c.clone() * s.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Poly2::zero();
        for (i1, j1, c1) in self.terms() {
            for (i2, j2, c2) in rhs.terms() {
                out.add_term(i1 + i2, j1 + j2, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Entry-wise conversion to another scalar type.
    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> Poly2<U> {
        Poly2 { coeffs: self.coeffs.iter().map(|(&ij, c)| (ij, f(c))).collect() }
    }

    /// Leading coefficient in the frozen order (largest degree, then
    /// largest power of y within that degree).
    pub fn leading_coeff(&self) -> Option<&T> {
        self.coeffs
            .iter()
            .max_by_key(|(&(i, j), _)| (i + j, j))
            .map(|(_, c)| c)
    }

    /// Scales so the leading coefficient becomes 1; zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading_coeff() {
            None => Poly2::zero(),
            Some(lead) => self.scale(&lead.try_inv().expect("leading coefficient is nonzero")),
        }
    }

    /// True when the polynomials agree up to a nonzero scalar factor.
    pub fn proportional_to(&self, rhs: &Self) -> bool {
        self.monic() == rhs.monic()
    }

    /// Exact quotient by `y`; `None` when some term has no factor `y`.
    pub fn div_y(&self) -> Option<Self> {
        let mut out = Poly2::zero();
        for (i, j, c) in self.terms() {
            if j == 0 {
                return None;
            }
            out.add_term(i, j - 1, c.clone());
        }
        Some(out)
    }

    /// Evaluation at a point.
    pub fn eval(&self, x: &T, y: &T) -> T {
        let mut acc = T::zero();
        for (i, j, c) in self.terms() {
            let mut term = c.clone();
            for _ in 0..i {
                term = term * x.clone();
            }
            for _ in 0..j {
                term = term * y.clone();
            }
            acc = acc + term;
        }
        acc
    }
}

/// Moment matrix of the sequence: rows and columns run over monomials of
/// degree at most `k` in the frozen order, and the entry at
/// `(x^a y^b, x^c y^d)` is the moment of `x^{a+c} y^{b+d}`.
pub fn moment_matrix<T: Scalar>(seq: &MomentSequence<T>) -> SymMat<T> {
    let basis = MonomialIndex::up_to(seq.k());
    let monos: Vec<(usize, usize)> = basis.iter().collect();
    SymMat::from_upper(basis.size(), |r, c| {
        let (a, b) = monos[r];
        let (x, y) = monos[c];
        seq.get(a + x, b + y).clone()
    })
}

/// The Riesz functional: applies the sequence to a polynomial of degree at
/// most `2k`.
pub fn riesz<T: Scalar>(seq: &MomentSequence<T>, p: &Poly2<T>) -> Result<T> {
    if p.degree() > 2 * seq.k() {
        return Err(Error::Precondition(format!(
            "polynomial degree {} exceeds moment degree {}",
            p.degree(),
            2 * seq.k()
        )));
    }
    let mut acc = T::zero();
    for (i, j, c) in p.terms() {
        acc = acc + c.clone() * seq.get(i, j).clone();
    }
    Ok(acc)
}

/// True when `p` (of degree at most `k`) is a column relation of the moment
/// matrix: every product of `p` with a monomial of degree at most `k`
/// evaluates to zero under the Riesz functional.
pub fn is_column_relation<T: Scalar>(seq: &MomentSequence<T>, p: &Poly2<T>) -> Result<bool> {
    if p.degree() > seq.k() {
        return Err(Error::Precondition(format!(
            "column relation degree {} exceeds matrix degree {}",
            p.degree(),
            seq.k()
        )));
    }
    for (i, j) in MonomialIndex::up_to(seq.k()).iter() {
        let shifted = p.mul(&Poly2::monomial(i, j));
        if !riesz(seq, &shifted)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Recursive relation family tied to a conic through the curve relation.
#[derive(Debug, Clone, PartialEq)]
pub enum RgFamily {
    /// Relations induced by `y (a y + x^2 + y^2) = 0`.
    Circular { a: Rat },
    /// Relations induced by `y (x - y^2) = 0`.
    Parabolic,
}

/// Checks the recursive relation family on all shifts `x^i y^j` with
/// `i + j <= 2k - 3`, returning the violated shifts.
pub fn check_rg_family(seq: &MomentSequence<Rat>, family: &RgFamily) -> Vec<(usize, usize)> {
    let k = seq.k();
    if 2 * k < 3 {
        return Vec::new();
    }
    let mut bad = Vec::new();
    for d in 0..=(2 * k - 3) {
        for j in 0..=d {
            let i = d - j;
            let holds = match family {
                RgFamily::Circular { a } => {
                    let lhs = a * seq.get(i, j + 2) + seq.get(i + 2, j + 1) + seq.get(i, j + 3);
                    lhs.is_zero()
                }
                RgFamily::Parabolic => seq.get(i + 1, j + 1) == seq.get(i, j + 3),
            };
            if !holds {
                bad.push((i, j));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{psd_rank, rat, rat_i64};

    #[test]
    fn monomial_order_is_the_frozen_one() {
        let order = MonomialIndex::up_to(3);
        let listed: Vec<(usize, usize)> = order.iter().collect();
        assert_eq!(
            listed,
            vec![
                (0, 0),
                (1, 0),
                (0, 1),
                (2, 0),
                (1, 1),
                (0, 2),
                (3, 0),
                (2, 1),
                (1, 2),
                (0, 3)
            ],
            "order must be 1, X, Y, X^2, XY, Y^2, X^3, X^2Y, XY^2, Y^3"
        );
        for (pos, (i, j)) in listed.iter().enumerate() {
            assert_eq!(order.position(*i, *j), Some(pos));
        }
        assert_eq!(order.position(4, 0), None);
        assert_eq!(order.size(), 10);
    }

    fn dirac_sequence(k: usize, atoms: &[(i64, i64, i64)]) -> MomentSequence<Rat> {
        MomentSequence::from_fn(k, |i, j| {
            let mut acc = Rat::zero();
            for &(x, y, w) in atoms {
                let term = rat_i64(w)
                    * rat_i64(x.pow(i as u32))
                    * rat_i64(y.pow(j as u32));
                acc += term;
            }
            acc
        })
        .unwrap()
    }

    #[test]
    fn moment_matrix_of_atomic_measure_is_psd_with_rank_atoms() {
        let seq = dirac_sequence(2, &[(0, 0, 1), (1, 2, 2), (-1, 1, 3)]);
        let m = moment_matrix(&seq);
        assert_eq!(m.size(), 6);
        let report = psd_rank(&m);
        assert!(report.is_psd, "moment matrix of a positive measure is psd");
        assert_eq!(report.rank, 3, "three atoms in general position give rank 3");
    }

    #[test]
    fn riesz_evaluates_polynomials_against_moments() {
        let seq = dirac_sequence(1, &[(2, 3, 1)]);
        // p = x^2 - xy + 4 evaluated at the single atom (2, 3): 4 - 6 + 4 = 2.
        let p = Poly2::from_terms([
            (2, 0, rat_i64(1)),
            (1, 1, rat_i64(-1)),
            (0, 0, rat_i64(4)),
        ]);
        assert_eq!(riesz(&seq, &p).unwrap(), rat_i64(2));
        let too_big = Poly2::<Rat>::monomial(3, 0);
        assert!(riesz(&seq, &too_big).is_err());
    }

    #[test]
    fn column_relation_detected_for_supported_measure() {
        // Atoms on the parabola x = y^2, so x - y^2 is a column relation at k = 2.
        let seq = dirac_sequence(2, &[(0, 0, 1), (1, 1, 2), (4, 2, 1), (1, -1, 1)]);
        let relation = Poly2::from_terms([(1, 0, rat_i64(1)), (0, 2, rat_i64(-1))]);
        assert!(is_column_relation(&seq, &relation).unwrap());
        let non_relation = Poly2::from_terms([(1, 0, rat_i64(1))]);
        assert!(!is_column_relation(&seq, &non_relation).unwrap());
    }

    #[test]
    fn recursive_family_holds_exactly_for_on_curve_atoms() {
        // Atoms on y (x - y^2) = 0: two on the line y = 0, two on x = y^2.
        let seq = dirac_sequence(3, &[(2, 0, 1), (-1, 0, 2), (1, 1, 1), (4, 2, 3)]);
        assert!(check_rg_family(&seq, &RgFamily::Parabolic).is_empty());
        // Perturb one high-degree moment and the family must break.
        let mut vals = seq.values().to_vec();
        let pos = seq.order().position(1, 3).unwrap();
        vals[pos] += rat(1, 7);
        let broken = MomentSequence::new(3, vals).unwrap();
        let bad = check_rg_family(&broken, &RgFamily::Parabolic);
        assert!(bad.contains(&(0, 2)), "shift (0,2) checks moment (1,3)");
    }

    #[test]
    fn circular_family_matches_riesz_products() {
        // Atoms on y (-2y + x^2 + y^2) = 0.
        let seq = dirac_sequence(3, &[(3, 0, 2), (1, 1, 1), (-1, 1, 1), (0, 2, 5)]);
        let a = rat_i64(-2);
        assert!(check_rg_family(&seq, &RgFamily::Circular { a: a.clone() }).is_empty());
        // The family is exactly the Riesz products of the cubic with shifts.
        let cubic = Poly2::from_terms([
            (0, 2, a),
            (2, 1, rat_i64(1)),
            (0, 3, rat_i64(1)),
        ]);
        for d in 0..=3usize {
            for j in 0..=d {
                let shift = Poly2::monomial(d - j, j);
                assert!(riesz(&seq, &cubic.mul(&shift)).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn poly_quotient_and_proportionality() {
        let p = Poly2::from_terms([(1, 1, rat_i64(2)), (0, 3, rat_i64(-2))]);
        let q = p.div_y().expect("divisible by y");
        assert_eq!(q, Poly2::from_terms([(1, 0, rat_i64(2)), (0, 2, rat_i64(-2))]));
        let r = Poly2::from_terms([(1, 0, rat_i64(-3)), (0, 2, rat_i64(3))]);
        assert!(q.proportional_to(&r));
        assert!(Poly2::from_terms([(1, 0, rat_i64(1))]).div_y().is_none());
    }

    #[test]
    fn sequence_validation_rejects_bad_shapes() {
        assert!(MomentSequence::<Rat>::new(0, vec![]).is_err());
        assert!(MomentSequence::new(1, vec![Rat::zero(); 5]).is_err());
        assert!(MomentSequence::new(1, vec![Rat::zero(); 6]).is_ok());
    }
}
