//! Invertible affine changes of variables, their action on moment
//! sequences, rational linear factors of cubics, and the reduction of a
//! cubic column relation to one of eight canonical forms.

use crate::error::{Error, Result};
use crate::exactmath::{QuadScalar, Rat, Scalar};
use crate::moments::{is_column_relation, moment_matrix, riesz, MomentSequence, Poly2};
use num_traits::{One, Zero};

/// Invertible affine map `phi(x, y) = (a + b x + c y, d + e x + f y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<T = Rat> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
}

impl<T: Scalar> AffineMap<T> {
    /// Builds a map, rejecting a singular linear part.
    pub fn new(a: T, b: T, c: T, d: T, e: T, f: T) -> Result<Self> {
        let m = AffineMap { a, b, c, d, e, f };
        if m.det().is_zero() {
            return Err(Error::InvalidInput("affine map has bf - ce = 0".into()));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        AffineMap {
            a: T::zero(),
            b: T::one(),
            c: T::zero(),
            d: T::zero(),
            e: T::zero(),
            f: T::one(),
        }
    }

    /// The coordinate swap `(x, y) -> (y, x)`.
    pub fn swap() -> Self {
        AffineMap {
            a: T::zero(),
            b: T::zero(),
            c: T::one(),
            d: T::zero(),
            e: T::one(),
            f: T::zero(),
        }
    }

    /// Determinant of the linear part.
    pub fn det(&self) -> T {
        self.b.clone() * self.f.clone() - self.c.clone() * self.e.clone()
    }

    /// First component as a polynomial.
    pub fn comp1(&self) -> Poly2<T> {
        Poly2::from_terms([
            (0, 0, self.a.clone()),
            (1, 0, self.b.clone()),
            (0, 1, self.c.clone()),
        ])
    }

    /// Second component as a polynomial.
    pub fn comp2(&self) -> Poly2<T> {
        Poly2::from_terms([
            (0, 0, self.d.clone()),
            (1, 0, self.e.clone()),
            (0, 1, self.f.clone()),
        ])
    }

    /// Image of a point.
    pub fn apply(&self, x: &T, y: &T) -> (T, T) {
        (
            self.a.clone() + self.b.clone() * x.clone() + self.c.clone() * y.clone(),
            self.d.clone() + self.e.clone() * x.clone() + self.f.clone() * y.clone(),
        )
    }

    /// Exact inverse map.
    pub fn inverse(&self) -> Self {
        let det_inv = self.det().try_inv().expect("affine map is invertible");
        let b = self.f.clone() * det_inv.clone();
        let c = -(self.c.clone() * det_inv.clone());
        let e = -(self.e.clone() * det_inv.clone());
        let f = self.b.clone() * det_inv.clone();
        let a = -(b.clone() * self.a.clone() + c.clone() * self.d.clone());
        let d = -(e.clone() * self.a.clone() + f.clone() * self.d.clone());
        AffineMap { a, b, c, d, e, f }
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        AffineMap {
            a: self.a.clone()
                + self.b.clone() * other.a.clone()
                + self.c.clone() * other.d.clone(),
            b: self.b.clone() * other.b.clone() + self.c.clone() * other.e.clone(),
            c: self.b.clone() * other.c.clone() + self.c.clone() * other.f.clone(),
            d: self.d.clone()
                + self.e.clone() * other.a.clone()
                + self.f.clone() * other.d.clone(),
            e: self.e.clone() * other.b.clone() + self.f.clone() * other.e.clone(),
            f: self.e.clone() * other.c.clone() + self.f.clone() * other.f.clone(),
        }
    }

    /// Entry-wise conversion to another scalar type.
    pub fn map_scalars<U: Scalar>(&self, mut g: impl FnMut(&T) -> U) -> AffineMap<U> {
        AffineMap {
            a: g(&self.a),
            b: g(&self.b),
            c: g(&self.c),
            d: g(&self.d),
            e: g(&self.e),
            f: g(&self.f),
        }
    }
}

/// Substitution `p . phi`: replaces x and y by the map components.
pub fn substitute<T: Scalar>(p: &Poly2<T>, phi: &AffineMap<T>) -> Poly2<T> {
    let deg = p.degree();
    let mut pow1 = Vec::with_capacity(deg + 1);
    let mut pow2 = Vec::with_capacity(deg + 1);
    pow1.push(Poly2::constant(T::one()));
    pow2.push(Poly2::constant(T::one()));
    for m in 1..=deg {
        pow1.push(pow1[m - 1].mul(&phi.comp1()));
        pow2.push(pow2[m - 1].mul(&phi.comp2()));
    }
    let mut out = Poly2::zero();
    for (i, j, c) in p.terms() {
        out = out.add(&pow1[i].mul(&pow2[j]).scale(c));
    }
    out
}

/// Pushforward of a moment sequence along an affine map: the new moment of
/// `x^i y^j` is the Riesz value of `phi1^i phi2^j`.
pub fn pushforward<T: Scalar>(
    seq: &MomentSequence<T>,
    phi: &AffineMap<T>,
) -> Result<MomentSequence<T>> {
    let deg = 2 * seq.k();
    let mut pow1 = vec![Poly2::constant(T::one())];
    let mut pow2 = vec![Poly2::constant(T::one())];
    for m in 1..=deg {
        pow1.push(pow1[m - 1].mul(&phi.comp1()));
        pow2.push(pow2[m - 1].mul(&phi.comp2()));
    }
    MomentSequence::from_fn(seq.k(), |i, j| {
        riesz(seq, &pow1[i].mul(&pow2[j])).expect("pushforward degree fits the sequence")
    })
}

/// One of the eight canonical curve shapes `y * c(x, y) = 0`. Parameters
/// may live in a quadratic extension.
#[derive(Debug, Clone, PartialEq)]
pub enum CanonicalForm {
    /// `y (a + y) (b + y)`, a and b distinct and nonzero.
    ParallelLines { a: QuadScalar, b: QuadScalar },
    /// `y (a y + x^2 + y^2)`, a nonzero.
    Circular { a: QuadScalar },
    /// `y (x - y^2)`.
    Parabolic,
    /// `y (1 - x y)`.
    Hyperbolic1,
    /// `y (x + y + a x y)`, a nonzero.
    Hyperbolic2 { a: QuadScalar },
    /// `y (a y + x^2 - y^2)`, a arbitrary.
    Hyperbolic3 { a: QuadScalar },
    /// `y x (y + 1)`.
    IntersectingLines,
    /// `y (1 + a y + b x^2 + c y^2)`, b nonzero.
    Mixed { a: QuadScalar, b: QuadScalar, c: QuadScalar },
}

impl CanonicalForm {
    /// Stable machine tag.
    pub fn tag(&self) -> &'static str {
        match self {
            CanonicalForm::ParallelLines { .. } => "parallel-lines",
            CanonicalForm::Circular { .. } => "circular",
            CanonicalForm::Parabolic => "parabolic",
            CanonicalForm::Hyperbolic1 => "hyperbolic-1",
            CanonicalForm::Hyperbolic2 { .. } => "hyperbolic-2",
            CanonicalForm::Hyperbolic3 { .. } => "hyperbolic-3",
            CanonicalForm::IntersectingLines => "intersecting-lines",
            CanonicalForm::Mixed { .. } => "mixed",
        }
    }

    /// Position in the canonical listing, used as a deterministic
    /// preference when several factors of one cubic succeed.
    pub fn priority(&self) -> usize {
        match self {
            CanonicalForm::ParallelLines { .. } => 0,
            CanonicalForm::Circular { .. } => 1,
            CanonicalForm::Parabolic => 2,
            CanonicalForm::Hyperbolic1 => 3,
            CanonicalForm::Hyperbolic2 { .. } => 4,
            CanonicalForm::Hyperbolic3 { .. } => 5,
            CanonicalForm::IntersectingLines => 6,
            CanonicalForm::Mixed { .. } => 7,
        }
    }

    /// The conic factor `c` of the canonical relation `y c(x, y)`.
    pub fn conic(&self) -> Poly2<QuadScalar> {
        let one = QuadScalar::one();
        match self {
            CanonicalForm::ParallelLines { a, b } => Poly2::from_terms([
                (0, 0, a.clone() * b.clone()),
                (0, 1, a.clone() + b.clone()),
                (0, 2, one),
            ]),
            CanonicalForm::Circular { a } => Poly2::from_terms([
                (0, 1, a.clone()),
                (2, 0, one.clone()),
                (0, 2, one),
            ]),
            CanonicalForm::Parabolic => {
                Poly2::from_terms([(1, 0, one.clone()), (0, 2, -one)])
            }
            CanonicalForm::Hyperbolic1 => {
                Poly2::from_terms([(0, 0, one.clone()), (1, 1, -one)])
            }
            CanonicalForm::Hyperbolic2 { a } => Poly2::from_terms([
                (1, 0, one.clone()),
                (0, 1, one),
                (1, 1, a.clone()),
            ]),
            CanonicalForm::Hyperbolic3 { a } => Poly2::from_terms([
                (0, 1, a.clone()),
                (2, 0, one.clone()),
                (0, 2, -one),
            ]),
            CanonicalForm::IntersectingLines => {
                Poly2::from_terms([(1, 0, one.clone()), (1, 1, one)])
            }
            CanonicalForm::Mixed { a, b, c } => Poly2::from_terms([
                (0, 0, one),
                (0, 1, a.clone()),
                (2, 0, b.clone()),
                (0, 2, c.clone()),
            ]),
        }
    }

    /// The canonical cubic relation `y c(x, y)`.
    pub fn cubic(&self) -> Poly2<QuadScalar> {
        self.conic().mul(&Poly2::monomial(0, 1))
    }

    /// Parameters as rationals, when all of them are.
    pub fn rational_params(&self) -> Option<Vec<Rat>> {
        let params: Vec<&QuadScalar> = match self {
            CanonicalForm::ParallelLines { a, b } => vec![a, b],
            CanonicalForm::Circular { a }
            | CanonicalForm::Hyperbolic2 { a }
            | CanonicalForm::Hyperbolic3 { a } => vec![a],
            CanonicalForm::Mixed { a, b, c } => vec![a, b, c],
            _ => vec![],
        };
        params.into_iter().map(|p| p.to_rat()).collect()
    }
}

/// Rational mode for canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Reject any step that needs an irrational scaling.
    Strict,
    /// Carry the scaling in a quadratic extension.
    Permissive,
}

/// Outcome of canonicalization: the form, the composed map from input
/// coordinates to canonical coordinates, the transformed sequence and the
/// linear factor that was straightened.
#[derive(Debug, Clone)]
pub struct Canonicalization {
    pub form: CanonicalForm,
    pub map: AffineMap<QuadScalar>,
    pub sequence: MomentSequence<QuadScalar>,
    pub factor: Poly2<Rat>,
}

impl Canonicalization {
    /// The transformed sequence as rationals, when every value is rational.
    pub fn rational_sequence(&self) -> Option<MomentSequence<Rat>> {
        self.sequence.try_map(|v| v.to_rat().ok_or(())).ok()
    }
}

/// All monic rational linear factors of a degree-3 polynomial, each with
/// its exact quadratic cofactor, sorted deterministically.
pub fn linear_factors(p: &Poly2<Rat>) -> Vec<(Poly2<Rat>, Poly2<Rat>)> {
    let mut found: Vec<(Vec<Rat>, Poly2<Rat>, Poly2<Rat>)> = Vec::new();
    let mut push = |line: Poly2<Rat>| {
        let line = line.monic();
        let key = vec![line.coeff(0, 0), line.coeff(1, 0), line.coeff(0, 1)];
        if found.iter().any(|(k, _, _)| *k == key) {
            return;
        }
        if let Some(cofactor) = divide_by_linear(p, &line) {
            found.push((key, line, cofactor));
        }
    };

    // Lines y = s + t x: the x^3 coefficient of p(x, s + t x) pins t.
    let c3 = poly_in_t_top(p);
    for t in rational_roots(&c3) {
        let slices = substitute_y_line(p, &t);
        // slices[m] = coefficient of x^m as a polynomial in s; a factor
        // needs all of them to vanish at one rational s.
        if let Some(level) = (0..slices.len()).find(|&m| !poly_is_zero(&slices[m])) {
            for s in rational_roots(&slices[level]) {
                if slices.iter().all(|q| eval_poly(q, &s).is_zero()) {
                    push(Poly2::from_terms([
                        (0, 0, -s.clone()),
                        (1, 0, -t.clone()),
                        (0, 1, Rat::one()),
                    ]));
                }
            }
        }
    }

    // Vertical lines x = v: every y-slice of p(v, y) must vanish.
    let slices = substitute_x_const(p);
    if let Some(level) = (0..slices.len()).find(|&m| !poly_is_zero(&slices[m])) {
        for v in rational_roots(&slices[level]) {
            if slices.iter().all(|q| eval_poly(q, &v).is_zero()) {
                push(Poly2::from_terms([(0, 0, -v.clone()), (1, 0, Rat::one())]));
            }
        }
    }

    found.sort_by(|(ka, _, _), (kb, _, _)| ka.cmp(kb));
    found.into_iter().map(|(_, l, q)| (l, q)).collect()
}

/// Splits a cubic as (rational linear factor) * (quadratic cofactor),
/// choosing the first factor in the deterministic order. Errors when the
/// polynomial is not a cubic or has no rational linear factor.
pub fn factor_cubic(p: &Poly2<Rat>) -> Result<(Poly2<Rat>, Poly2<Rat>)> {
    if p.degree() != 3 {
        return Err(Error::Precondition(format!(
            "expected a degree-3 polynomial, got degree {}",
            p.degree()
        )));
    }
    linear_factors(p)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Precondition("cubic has no rational linear factor".into()))
}

/// Exact division of `p` by a linear polynomial; `None` when not divisible.
fn divide_by_linear(p: &Poly2<Rat>, line: &Poly2<Rat>) -> Option<Poly2<Rat>> {
    let gamma = line.coeff(0, 1);
    let beta = line.coeff(1, 0);
    let use_y = !gamma.is_zero();
    let lead = if use_y { gamma } else { beta };
    if lead.is_zero() {
        return None;
    }
    let lead_inv = Rat::one() / lead;
    let mut rem = p.clone();
    let mut quot = Poly2::zero();
    loop {
        // Highest remaining term in the elimination variable.
        let top = rem
            .terms()
            .filter(|(i, j, _)| if use_y { *j > 0 } else { *i > 0 })
            .max_by_key(|(i, j, _)| if use_y { (*j, *i) } else { (*i, *j) });
        let Some((i, j, coeff)) = top.map(|(i, j, c)| (i, j, c.clone())) else {
            break;
        };
        let (qi, qj) = if use_y { (i, j - 1) } else { (i - 1, j) };
        let term = Poly2::from_terms([(qi, qj, coeff * &lead_inv)]);
        quot = quot.add(&term);
        rem = rem.sub(&line.mul(&term));
    }
    if rem.is_zero() {
        Some(quot)
    } else {
        None
    }
}

/// Coefficient of x^3 in p(x, t x + s) as a polynomial in t (independent
/// of s): sum over i + j = 3 of p_ij t^j.
fn poly_in_t_top(p: &Poly2<Rat>) -> Vec<Rat> {
    let mut c = vec![Rat::zero(); 4];
    for (i, j, v) in p.terms() {
        if i + j == 3 {
            c[j] = c[j].clone() + v.clone();
        }
    }
    c
}

/// Coefficients of x^m (m = 0..3) in p(x, s + t x) as polynomials in s.
fn substitute_y_line(p: &Poly2<Rat>, t: &Rat) -> Vec<Vec<Rat>> {
    let mut slices = vec![vec![Rat::zero(); 4]; 4];
    for (i, j, v) in p.terms() {
        // (s + t x)^j = sum_l C(j, l) t^l x^l s^(j - l).
        for l in 0..=j {
            let binom = binomial(j, l);
            let xm = i + l;
            let sdeg = j - l;
            let mut tp = Rat::one();
            for _ in 0..l {
                tp *= t;
            }
            slices[xm][sdeg] = slices[xm][sdeg].clone() + v.clone() * binom * tp;
        }
    }
    slices
}

/// Coefficients of y^m (m = 0..3) in p(v, y) as polynomials in v.
fn substitute_x_const(p: &Poly2<Rat>) -> Vec<Vec<Rat>> {
    let mut slices = vec![vec![Rat::zero(); 4]; 4];
    for (i, j, v) in p.terms() {
        slices[j][i] = slices[j][i].clone() + v.clone();
    }
    slices
}

fn binomial(n: usize, k: usize) -> Rat {
    let mut acc = Rat::one();
    for l in 0..k {
        acc = acc * Rat::from_integer((n - l).into()) / Rat::from_integer((l + 1).into());
    }
    acc
}

fn poly_is_zero(c: &[Rat]) -> bool {
    c.iter().all(|x| x.is_zero())
}

fn eval_poly(c: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for coeff in c.iter().rev() {
        acc = acc * x + coeff;
    }
    acc
}

/// All rational roots of a univariate polynomial with rational
/// coefficients (ascending order of coefficients).
fn rational_roots(coeffs: &[Rat]) -> Vec<Rat> {
    use num_bigint::BigInt;
    use num_integer::Integer;

    let deg = match coeffs.iter().rposition(|c| !c.is_zero()) {
        Some(d) => d,
        None => return Vec::new(),
    };
    if deg == 0 {
        return Vec::new();
    }
    // Clear denominators to integer coefficients.
    let mut denom_lcm = BigInt::one();
    for c in &coeffs[..=deg] {
        denom_lcm = denom_lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = coeffs[..=deg]
        .iter()
        .map(|c| c.numer() * (&denom_lcm / c.denom()))
        .collect();
    // Strip trailing zero constant terms: x = 0 is then a root.
    let mut roots = Vec::new();
    let mut low = 0usize;
    while low < deg && ints[low].is_zero() {
        low += 1;
    }
    if low > 0 {
        roots.push(Rat::zero());
    }
    let poly = &ints[low..=deg];
    if poly.len() >= 2 {
        let a0 = poly[0].clone();
        let an = poly[poly.len() - 1].clone();
        for p in divisors(&a0) {
            for q in divisors(&an) {
                for cand in [Rat::new(p.clone(), q.clone()), Rat::new(-p.clone(), q.clone())] {
                    if roots.contains(&cand) {
                        continue;
                    }
                    let val = {
                        let mut acc = Rat::zero();
                        for c in poly.iter().rev() {
                            acc = acc * &cand + Rat::from(c.clone());
                        }
                        acc
                    };
                    if val.is_zero() {
                        roots.push(cand);
                    }
                }
            }
        }
    }
    roots.sort();
    roots
}

/// Positive divisors of a nonzero integer.
fn divisors(n: &num_bigint::BigInt) -> Vec<num_bigint::BigInt> {
    use num_bigint::BigInt;
    use num_traits::Signed;
    let n = n.abs();
    assert!(!n.is_zero(), "divisors of zero are unbounded");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            small.push(d.clone());
            let co = &n / &d;
            if co != d {
                large.push(co);
            }
        }
        d += BigInt::one();
    }
    large.reverse();
    small.extend(large);
    small
}

struct TreeState {
    seq: MomentSequence<QuadScalar>,
    conic: Poly2<QuadScalar>,
    composite: AffineMap<QuadScalar>,
}

impl TreeState {
    fn apply(&mut self, step: AffineMap<QuadScalar>) -> Result<()> {
        self.seq = pushforward(&self.seq, &step)?;
        self.conic = substitute(&self.conic, &step.inverse());
        self.composite = step.compose(&self.composite);
        debug_assert!(
            is_column_relation(&self.seq, &self.conic.mul(&Poly2::monomial(0, 1)))
                .unwrap_or(false),
            "transformed conic relation must stay a column relation"
        );
        Ok(())
    }

    fn coeff(&self, i: usize, j: usize) -> QuadScalar {
        self.conic.coeff(i, j)
    }
}

/// Square root of a rational under the given mode.
fn mode_sqrt(r: &Rat, mode: Mode) -> Result<QuadScalar> {
    let root = QuadScalar::sqrt_rat(r)
        .ok_or_else(|| Error::Precondition(format!("square root of negative value {}", r)))?;
    if mode == Mode::Strict && !root.is_rational() {
        return Err(Error::IrrationalScaling(crate::exactmath::rat_to_string(r)));
    }
    Ok(root)
}

fn qrat(r: &Rat) -> QuadScalar {
    QuadScalar::from_rational(r.clone())
}

/// Human-readable rendering of a polynomial for error messages.
pub(crate) fn poly_display<T: Scalar>(p: &Poly2<T>) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (i, j, c) in p.terms() {
        let mut piece = String::new();
        if !c.is_one() || (i == 0 && j == 0) {
            piece.push_str(&format!("{}", c));
        }
        for (var, e) in [("x", i), ("y", j)] {
            if e > 0 {
                if !piece.is_empty() {
                    piece.push('*');
                }
                piece.push_str(var);
                if e > 1 {
                    piece.push_str(&format!("^{}", e));
                }
            }
        }
        parts.push(piece);
    }
    parts.join(" + ")
}

/// Reduces a moment sequence carrying the cubic column relation
/// `p(X, Y) = 0` to one of the eight canonical shapes.
///
/// Every rational linear factor of the cubic is straightened in turn and
/// walked through the affine case tree; among the successful reductions
/// the one with the smallest canonical priority wins. Each step is
/// verified: the final sequence must carry the canonical relation as an
/// exact column relation.
pub fn canonicalize(
    seq: &MomentSequence<Rat>,
    cubic: &Poly2<Rat>,
    mode: Mode,
) -> Result<Canonicalization> {
    if seq.k() < 3 {
        return Err(Error::Precondition(
            "canonicalization needs moment degree at least 6 (k >= 3)".into(),
        ));
    }
    if cubic.degree() != 3 {
        return Err(Error::Precondition(format!(
            "curve relation must have degree 3, got {}",
            cubic.degree()
        )));
    }
    if !is_column_relation(seq, cubic)? {
        return Err(Error::Precondition(
            "the given cubic is not a column relation of the moment matrix".into(),
        ));
    }
    let mm = moment_matrix(seq);
    let rows: Vec<usize> = (0..mm.size()).collect();
    if mm.as_mat().submatrix(&rows, &[0, 1, 2, 3, 4, 5]).rank() < 6 {
        return Err(Error::Precondition(
            "moment matrix has a column relation of degree at most 2".into(),
        ));
    }

    let factors = linear_factors(cubic);
    if factors.is_empty() {
        return Err(Error::Precondition(
            "cubic relation has no rational linear factor".into(),
        ));
    }

    let mut best: Option<Canonicalization> = None;
    let mut first_err: Option<Error> = None;
    for (line, cofactor) in &factors {
        match attempt_factor(seq, line, cofactor, mode) {
            Ok(c) => {
                let better = match &best {
                    None => true,
                    Some(b) => c.form.priority() < b.form.priority(),
                };
                if better {
                    best = Some(c);
                }
            }
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    match best {
        Some(c) => Ok(c),
        None => Err(first_err.expect("at least one factor was attempted")),
    }
}

/// Runs the case tree for one straightened linear factor.
fn attempt_factor(
    seq: &MomentSequence<Rat>,
    line: &Poly2<Rat>,
    cofactor: &Poly2<Rat>,
    mode: Mode,
) -> Result<Canonicalization> {
    let mut state = TreeState {
        seq: seq.map(|v| qrat(v)),
        conic: cofactor.map(|v| qrat(v)),
        composite: AffineMap::identity(),
    };

    // Straighten the factor onto the x-axis. A factor without a y term is
    // swapped first so the straightening map stays invertible.
    let alpha = line.coeff(0, 0);
    let mut beta = line.coeff(1, 0);
    let mut gamma = line.coeff(0, 1);
    if gamma.is_zero() {
        state.apply(AffineMap::swap())?;
        std::mem::swap(&mut beta, &mut gamma);
    }
    debug_assert!(!gamma.is_zero(), "straightening needs a y coefficient");
    state.apply(AffineMap::new(
        QuadScalar::zero(),
        QuadScalar::one(),
        QuadScalar::zero(),
        qrat(&alpha),
        qrat(&beta),
        qrat(&gamma),
    )?)?;

    let form = if state.coeff(2, 0).is_zero() {
        case_line_direction(&mut state, mode)?
    } else {
        case_transversal_direction(&mut state, mode)?
    };

    // Final verification: the canonical relation must hold exactly.
    let canonical = form.cubic();
    let achieved = state.conic.mul(&Poly2::monomial(0, 1));
    if !achieved.proportional_to(&canonical) || !is_column_relation(&state.seq, &canonical)? {
        return Err(Error::CanonicalMismatch {
            achieved: poly_display(&achieved.monic()),
            expected: poly_display(&canonical),
        });
    }

    Ok(Canonicalization {
        form,
        map: state.composite,
        sequence: state.seq,
        factor: line.clone(),
    })
}

/// Case tree branch where the conic has no x^2 term: the conic is either a
/// line pair containing directions parallel to the base line, or a
/// hyperbola with an asymptote parallel to it.
fn case_line_direction(state: &mut TreeState, _mode: Mode) -> Result<CanonicalForm> {
    let c0 = state.coeff(0, 0);
    let c1 = state.coeff(1, 0);
    if !c0.is_zero() {
        let c0_inv = c0.try_inv().expect("nonzero constant term");
        let ct1 = c1.clone() * c0_inv.clone();
        let ct2 = state.coeff(0, 1) * c0_inv.clone();
        let ct4 = state.coeff(1, 1) * c0_inv.clone();
        let ct5 = state.coeff(0, 2) * c0_inv;
        if ct1.is_zero() {
            if ct4.is_zero() {
                return parallel_lines_from(&ct2, &ct5);
            }
            // Hyperbola whose asymptote is the base line itself.
            state.apply(AffineMap::new(
                -ct2.clone(),
                -ct4.clone(),
                -ct5.clone(),
                QuadScalar::zero(),
                QuadScalar::zero(),
                QuadScalar::one(),
            )?)?;
            return Ok(CanonicalForm::Hyperbolic1);
        }
        state.apply(AffineMap::new(
            QuadScalar::one(),
            ct1,
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::one(),
        )?)?;
        return case_x_plus_tail(state);
    }
    if c1.is_zero() {
        return Err(Error::Precondition(
            "conic factor is divisible by the base line".into(),
        ));
    }
    state.apply(AffineMap::new(
        QuadScalar::zero(),
        c1,
        QuadScalar::zero(),
        QuadScalar::zero(),
        QuadScalar::zero(),
        QuadScalar::one(),
    )?)?;
    case_x_plus_tail(state)
}

/// Subtree for a conic of the shape x + c2 y + c4 xy + c5 y^2 (up to a
/// scalar).
fn case_x_plus_tail(state: &mut TreeState) -> Result<CanonicalForm> {
    let cx = state.coeff(1, 0);
    debug_assert!(!cx.is_zero(), "subtree expects a nonzero x coefficient");
    let cx_inv = cx.try_inv().expect("nonzero x coefficient");
    let h2 = state.coeff(0, 1) * cx_inv.clone();
    let h4 = state.coeff(1, 1) * cx_inv.clone();
    let h5 = state.coeff(0, 2) * cx_inv;

    if !h4.is_zero() {
        // Shear away the y^2 term.
        let shift = h5.clone() * h4.try_inv().expect("nonzero xy coefficient");
        state.apply(AffineMap::new(
            QuadScalar::zero(),
            QuadScalar::one(),
            shift,
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::one(),
        )?)?;
        let cx = state.coeff(1, 0);
        let cx_inv = cx.try_inv().expect("x coefficient survives the shear");
        let b2 = state.coeff(0, 1) * cx_inv.clone();
        let b4 = state.coeff(1, 1) * cx_inv;
        if b2.is_zero() {
            state.apply(AffineMap::new(
                QuadScalar::zero(),
                QuadScalar::one(),
                QuadScalar::zero(),
                QuadScalar::zero(),
                QuadScalar::zero(),
                b4,
            )?)?;
            return Ok(CanonicalForm::IntersectingLines);
        }
        let a = b4.clone() * b2.try_inv().expect("nonzero y coefficient");
        state.apply(AffineMap::new(
            QuadScalar::zero(),
            QuadScalar::one(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            b2,
        )?)?;
        return Ok(CanonicalForm::Hyperbolic2 { a });
    }

    if h5.is_zero() {
        return Err(Error::Precondition(
            "conic factor degenerated to a line".into(),
        ));
    }
    if h2.is_zero() {
        // Rescale x to reach x - y^2.
        let b = -h5.try_inv().expect("nonzero y^2 coefficient");
        state.apply(AffineMap::new(
            QuadScalar::zero(),
            b,
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::one(),
        )?)?;
        return Ok(CanonicalForm::Parabolic);
    }
    // Normalize the y coefficient, then fold x + y into a single variable.
    state.apply(AffineMap::new(
        QuadScalar::zero(),
        QuadScalar::one(),
        QuadScalar::zero(),
        QuadScalar::zero(),
        QuadScalar::zero(),
        h2.clone(),
    )?)?;
    let cx = state.coeff(1, 0);
    let c5 = state.coeff(0, 2) * cx.try_inv().expect("x coefficient survives scaling");
    let s = (-c5).try_inv().expect("nonzero y^2 coefficient");
    state.apply(AffineMap::new(
        QuadScalar::zero(),
        s.clone(),
        s,
        QuadScalar::zero(),
        QuadScalar::zero(),
        QuadScalar::one(),
    )?)?;
    Ok(CanonicalForm::Parabolic)
}

/// Roots of the quadratic 1 + c2 y + c5 y^2 as the two parallel-line
/// positions; they must be real, distinct and nonzero.
fn parallel_lines_from(ct2: &QuadScalar, ct5: &QuadScalar) -> Result<CanonicalForm> {
    let (Some(c2), Some(c5)) = (ct2.to_rat(), ct5.to_rat()) else {
        return Err(Error::Precondition(
            "parallel-line positions need rational conic data".into(),
        ));
    };
    if c5.is_zero() {
        return Err(Error::Precondition(
            "conic factor degenerated to a single line".into(),
        ));
    }
    // (a + y)(b + y) proportional to 1 + c2 y + c5 y^2 forces
    // a + b = c2 / c5 and a b = 1 / c5.
    let sum = &c2 / &c5;
    let prod = Rat::one() / &c5;
    let disc = &sum * &sum - Rat::from_integer(4.into()) * &prod;
    if Scalar::signum(&disc) <= 0 {
        return Err(Error::Precondition(
            "parallel-line conic has no two distinct real lines".into(),
        ));
    }
    let root = QuadScalar::sqrt_rat(&disc).expect("discriminant is positive");
    let half = qrat(&Rat::new(1.into(), 2.into()));
    let a = (qrat(&sum) + (-root.clone())) * half.clone();
    let b = (qrat(&sum) + root) * half;
    if a.is_zero() || b.is_zero() {
        return Err(Error::Precondition(
            "parallel-line conic passes through the base line".into(),
        ));
    }
    Ok(CanonicalForm::ParallelLines { a, b })
}

/// Case tree branch where the conic has an x^2 term: after a rational
/// shear and translation the type is decided by the quadratic discriminant.
fn case_transversal_direction(state: &mut TreeState, mode: Mode) -> Result<CanonicalForm> {
    let c3 = state.coeff(2, 0);
    let c4 = state.coeff(1, 1);
    let half_inv = qrat(&Rat::new(1.into(), 2.into()));
    if !c4.is_zero() {
        // Shear x -> x + (c4 / (2 c3)) y to remove the xy term.
        let lambda = c4 * half_inv.clone() * c3.try_inv().expect("nonzero x^2 coefficient");
        state.apply(AffineMap::new(
            QuadScalar::zero(),
            QuadScalar::one(),
            lambda,
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::one(),
        )?)?;
    }
    let c1 = state.coeff(1, 0);
    if !c1.is_zero() {
        // Translate x to remove the linear x term.
        let c3 = state.coeff(2, 0);
        let delta = c1 * half_inv * c3.try_inv().expect("nonzero x^2 coefficient");
        state.apply(AffineMap::new(
            delta,
            QuadScalar::one(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::one(),
        )?)?;
    }

    let c0 = state.coeff(0, 0);
    let c2 = state.coeff(0, 1);
    let c3 = state.coeff(2, 0);
    let c5 = state.coeff(0, 2);

    if !c0.is_zero() {
        let c0_inv = c0.try_inv().expect("nonzero constant term");
        let a = c2 * c0_inv.clone();
        let b = c3 * c0_inv.clone();
        let c = c5 * c0_inv;
        return Ok(CanonicalForm::Mixed { a, b, c });
    }

    if c5.is_zero() {
        if c2.is_zero() {
            return Err(Error::Precondition(
                "conic factor degenerated to a double line".into(),
            ));
        }
        // Tangent contact between the conic and the base line: the printed
        // reduction target is unreachable and the mismatch surfaces in the
        // final verification.
        let mu = -(c2 * c3.try_inv().expect("nonzero x^2 coefficient"));
        state.apply(AffineMap::new(
            QuadScalar::zero(),
            QuadScalar::one(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            mu,
        )?)?;
        return Ok(CanonicalForm::Parabolic);
    }

    let (Some(c3r), Some(c5r), Some(c2r)) = (c3.to_rat(), c5.to_rat(), c2.to_rat()) else {
        return Err(Error::Precondition(
            "transversal branch needs rational conic data".into(),
        ));
    };
    let ratio = &c5r / &c3r;
    if Scalar::signum(&ratio) > 0 {
        // Elliptic conic: scale y so both squares share one coefficient.
        let mu = mode_sqrt(&ratio, mode)?;
        let a = qrat(&(&c2r / &c3r)) * mu.try_inv().expect("positive scaling");
        if a.is_zero() {
            return Err(Error::Precondition(
                "elliptic conic factor collapses to a single point".into(),
            ));
        }
        state.apply(AffineMap::new(
            QuadScalar::zero(),
            QuadScalar::one(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            mu,
        )?)?;
        Ok(CanonicalForm::Circular { a })
    } else {
        // Hyperbolic conic crossing the base line.
        let mu = mode_sqrt(&(-ratio), mode)?;
        let a = qrat(&(&c2r / &c3r)) * mu.try_inv().expect("positive scaling");
        state.apply(AffineMap::new(
            QuadScalar::zero(),
            QuadScalar::one(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            QuadScalar::zero(),
            mu,
        )?)?;
        Ok(CanonicalForm::Hyperbolic3 { a })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;

    fn atom_sequence<T: Scalar>(k: usize, atoms: &[(T, T, T)]) -> MomentSequence<T> {
        MomentSequence::from_fn(k, |i, j| {
            let mut total = T::zero();
            for (x, y, w) in atoms {
                let mut v = w.clone();
                for _ in 0..i {
                    v = v * x.clone();
                }
                for _ in 0..j {
                    v = v * y.clone();
                }
                total = total + v;
            }
            total
        })
        .unwrap()
    }

    fn rmap(entries: [i64; 6]) -> AffineMap<Rat> {
        let [a, b, c, d, e, f] = entries;
        AffineMap::new(
            rat(a, 1),
            rat(b, 1),
            rat(c, 1),
            rat(d, 1),
            rat(e, 1),
            rat(f, 1),
        )
        .unwrap()
    }

    /// Every input atom, pushed through the canonicalization map, must sit
    /// exactly on the canonical curve that came out.
    fn assert_atoms_land(c: &Canonicalization, atoms: &[(Rat, Rat, Rat)]) {
        let cubic = c.form.cubic();
        for (x, y, _) in atoms {
            let (u, v) = c.map.apply(&qrat(x), &qrat(y));
            assert!(
                cubic.eval(&u, &v).is_zero(),
                "mapped atom must satisfy the canonical relation"
            );
        }
    }

    #[test]
    fn affine_inverse_and_compose_round_trip() {
        let phi = rmap([1, 2, 1, 3, -1, 1]);
        let inv = phi.inverse();
        let id = phi.compose(&inv);
        assert_eq!(id, AffineMap::identity());
        let id2 = inv.compose(&phi);
        assert_eq!(id2, AffineMap::identity());
        let (x, y) = phi.apply(&rat(5, 2), &rat(-1, 3));
        let (bx, by) = inv.apply(&x, &y);
        assert_eq!((bx, by), (rat(5, 2), rat(-1, 3)));
    }

    #[test]
    fn singular_map_rejected() {
        assert!(AffineMap::new(rat(0, 1), rat(2, 1), rat(4, 1), rat(0, 1), rat(1, 1), rat(2, 1))
            .is_err());
    }

    #[test]
    fn substitution_composes_with_inverse() {
        let phi = rmap([0, 1, 2, 1, 1, -1]);
        let p: Poly2<Rat> =
            Poly2::from_terms([(2, 1, rat(3, 1)), (0, 2, rat(-1, 2)), (1, 0, rat(7, 1))]);
        let there = substitute(&p, &phi);
        let back = substitute(&there, &phi.inverse());
        assert_eq!(back, p);
    }

    #[test]
    fn pushforward_matches_mapped_atoms() {
        let atoms = vec![
            (rat(0, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(2, 1), rat(1, 2)),
            (rat(-3, 2), rat(1, 3), rat(2, 1)),
        ];
        let phi = rmap([1, 1, -1, -2, 1, 1]);
        let seq = atom_sequence(2, &atoms);
        let mapped: Vec<_> = atoms
            .iter()
            .map(|(x, y, w)| {
                let (u, v) = phi.apply(x, y);
                (u, v, w.clone())
            })
            .collect();
        assert_eq!(
            pushforward(&seq, &phi).unwrap(),
            atom_sequence(2, &mapped),
            "pushforward must agree with transporting the atoms"
        );
    }

    #[test]
    fn pushforward_composes() {
        let atoms = vec![
            (rat(1, 1), rat(1, 1), rat(1, 1)),
            (rat(2, 1), rat(-1, 1), rat(3, 1)),
            (rat(0, 1), rat(1, 2), rat(1, 3)),
        ];
        let seq = atom_sequence(2, &atoms);
        let phi = rmap([0, 2, 1, 1, 1, 1]);
        let psi = rmap([1, 1, 0, 0, -1, 2]);
        let two_step = pushforward(&pushforward(&seq, &phi).unwrap(), &psi).unwrap();
        let one_step = pushforward(&seq, &psi.compose(&phi)).unwrap();
        assert_eq!(two_step, one_step);
    }

    #[test]
    fn column_relation_transforms_contravariantly() {
        let atoms = vec![
            (rat(0, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(1, 1), rat(1, 1)),
            (rat(1, 1), rat(-1, 1), rat(2, 1)),
            (rat(4, 1), rat(2, 1), rat(1, 1)),
            (rat(9, 1), rat(3, 1), rat(1, 1)),
            (rat(1, 1), rat(0, 1), rat(1, 1)),
            (rat(3, 1), rat(0, 1), rat(1, 1)),
        ];
        let seq = atom_sequence(3, &atoms);
        let relation: Poly2<Rat> =
            Poly2::from_terms([(1, 1, rat(1, 1)), (0, 3, rat(-1, 1))]);
        assert!(is_column_relation(&seq, &relation).unwrap());
        let phi = rmap([1, 1, -1, 0, 1, 2]);
        let moved = pushforward(&seq, &phi).unwrap();
        let moved_relation = substitute(&relation, &phi.inverse());
        assert!(is_column_relation(&moved, &moved_relation).unwrap());
    }

    #[test]
    fn factors_of_a_product_of_three_lines() {
        // x y (1 + y), written out.
        let p: Poly2<Rat> = Poly2::from_terms([(1, 2, rat(1, 1)), (1, 1, rat(1, 1))]);
        let factors = linear_factors(&p);
        assert_eq!(factors.len(), 3);
        let lines: Vec<Poly2<Rat>> = factors.iter().map(|(l, _)| l.clone()).collect();
        assert_eq!(lines[0], Poly2::from_terms([(0, 1, rat(1, 1))]), "y sorts first");
        assert_eq!(lines[1], Poly2::from_terms([(1, 0, rat(1, 1))]));
        assert_eq!(
            lines[2],
            Poly2::from_terms([(0, 0, rat(1, 1)), (0, 1, rat(1, 1))])
        );
        for (line, cof) in &factors {
            assert_eq!(line.mul(cof), p, "factor times cofactor rebuilds the cubic");
        }
        assert_eq!(factor_cubic(&p).unwrap().0, lines[0]);
    }

    #[test]
    fn vertical_line_factors() {
        // x^3 - x = (x - 1) x (x + 1).
        let p: Poly2<Rat> = Poly2::from_terms([(3, 0, rat(1, 1)), (1, 0, rat(-1, 1))]);
        let factors = linear_factors(&p);
        assert_eq!(factors.len(), 3);
        assert_eq!(
            factors[0].0,
            Poly2::from_terms([(0, 0, rat(-1, 1)), (1, 0, rat(1, 1))]),
            "x - 1 sorts first by constant coefficient"
        );
        for (line, cof) in &factors {
            assert_eq!(line.mul(cof), p);
        }
    }

    #[test]
    fn cubic_without_rational_lines() {
        let p: Poly2<Rat> = Poly2::from_terms([(3, 0, rat(1, 1)), (0, 3, rat(2, 1))]);
        assert!(linear_factors(&p).is_empty());
        assert!(matches!(factor_cubic(&p), Err(Error::Precondition(_))));
    }

    #[test]
    fn non_cubic_rejected() {
        let p: Poly2<Rat> = Poly2::from_terms([(1, 1, rat(1, 1))]);
        assert!(matches!(factor_cubic(&p), Err(Error::Precondition(_))));
    }

    fn circle_curve_atoms() -> (Vec<(Rat, Rat, Rat)>, Poly2<Rat>) {
        // Atoms on y = 0 and on the circle x^2 + (y - 1)^2 = 1, which is
        // the conic -2y + x^2 + y^2.
        let atoms = vec![
            (rat(0, 1), rat(0, 1), rat(1, 1)),
            (rat(2, 1), rat(0, 1), rat(1, 1)),
            (rat(-3, 1), rat(0, 1), rat(2, 1)),
            (rat(1, 1), rat(1, 1), rat(1, 1)),
            (rat(-1, 1), rat(1, 1), rat(1, 2)),
            (rat(3, 5), rat(9, 5), rat(2, 1)),
            (rat(0, 1), rat(2, 1), rat(1, 1)),
        ];
        let cubic = Poly2::from_terms([
            (0, 2, rat(-2, 1)),
            (2, 1, rat(1, 1)),
            (0, 3, rat(1, 1)),
        ]);
        (atoms, cubic)
    }

    #[test]
    fn canonicalize_recovers_circular_after_affine_motion() {
        let (atoms, cubic) = circle_curve_atoms();
        let phi = rmap([1, 2, 1, 3, -1, 1]);
        let moved: Vec<_> = atoms
            .iter()
            .map(|(x, y, w)| {
                let (u, v) = phi.apply(x, y);
                (u, v, w.clone())
            })
            .collect();
        let seq = atom_sequence(3, &moved);
        let moved_cubic = substitute(&cubic, &phi.inverse());
        let result = canonicalize(&seq, &moved_cubic, Mode::Strict).unwrap();
        assert_eq!(result.form.tag(), "circular");
        assert!(
            result.rational_sequence().is_some(),
            "rational motions of a circle reduce without leaving the rationals"
        );
        assert_atoms_land(&result, &moved);
    }

    #[test]
    fn canonicalize_recovers_parabolic_after_affine_motion() {
        let atoms = vec![
            (rat(0, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(0, 1), rat(1, 1)),
            (rat(3, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(1, 1), rat(1, 1)),
            (rat(1, 1), rat(-1, 1), rat(1, 1)),
            (rat(4, 1), rat(2, 1), rat(2, 1)),
            (rat(9, 1), rat(3, 1), rat(1, 1)),
        ];
        let cubic: Poly2<Rat> =
            Poly2::from_terms([(1, 1, rat(1, 1)), (0, 3, rat(-1, 1))]);
        let phi = rmap([1, 1, -1, 0, 1, 2]);
        let moved: Vec<_> = atoms
            .iter()
            .map(|(x, y, w)| {
                let (u, v) = phi.apply(x, y);
                (u, v, w.clone())
            })
            .collect();
        let seq = atom_sequence(3, &moved);
        let moved_cubic = substitute(&cubic, &phi.inverse());
        let result = canonicalize(&seq, &moved_cubic, Mode::Strict).unwrap();
        assert_eq!(result.form.tag(), "parabolic");
        assert_atoms_land(&result, &moved);
    }

    #[test]
    fn canonicalize_keeps_hyperbolic_forms() {
        // y (1 - x y) is already canonical.
        let atoms = vec![
            (rat(0, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(0, 1), rat(1, 1)),
            (rat(2, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(1, 1), rat(1, 1)),
            (rat(2, 1), rat(1, 2), rat(1, 1)),
            (rat(-1, 1), rat(-1, 1), rat(1, 1)),
            (rat(1, 2), rat(2, 1), rat(1, 1)),
        ];
        let cubic: Poly2<Rat> =
            Poly2::from_terms([(0, 1, rat(1, 1)), (1, 2, rat(-1, 1))]);
        let seq = atom_sequence(3, &atoms);
        let result = canonicalize(&seq, &cubic, Mode::Strict).unwrap();
        assert_eq!(result.form.tag(), "hyperbolic-1");
        assert_atoms_land(&result, &atoms);

        // y (x + y + x y) has a = 1.
        let atoms2 = vec![
            (rat(1, 1), rat(0, 1), rat(1, 1)),
            (rat(-1, 1), rat(0, 1), rat(1, 1)),
            (rat(3, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(-1, 2), rat(1, 1)),
            (rat(-2, 1), rat(-2, 1), rat(1, 1)),
            (rat(2, 1), rat(-2, 3), rat(1, 1)),
            (rat(-3, 1), rat(-3, 2), rat(1, 1)),
        ];
        let cubic2: Poly2<Rat> = Poly2::from_terms([
            (1, 1, rat(1, 1)),
            (0, 2, rat(1, 1)),
            (1, 2, rat(1, 1)),
        ]);
        let seq2 = atom_sequence(3, &atoms2);
        let result2 = canonicalize(&seq2, &cubic2, Mode::Strict).unwrap();
        match &result2.form {
            CanonicalForm::Hyperbolic2 { a } => {
                assert_eq!(a.to_rat(), Some(rat(1, 1)));
            }
            other => panic!("expected hyperbolic-2, got {}", other.tag()),
        }
        assert_atoms_land(&result2, &atoms2);

        // y (y + x^2 - y^2) has a = 1 and needs no irrational scaling.
        let atoms3 = vec![
            (rat(0, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(0, 1), rat(1, 1)),
            (rat(-1, 1), rat(0, 1), rat(1, 1)),
            (rat(2, 3), rat(-1, 3), rat(1, 1)),
            (rat(6, 5), rat(-4, 5), rat(1, 1)),
            (rat(-2, 3), rat(4, 3), rat(1, 1)),
            (rat(12, 7), rat(-9, 7), rat(1, 1)),
        ];
        let cubic3: Poly2<Rat> = Poly2::from_terms([
            (0, 2, rat(1, 1)),
            (2, 1, rat(1, 1)),
            (0, 3, rat(-1, 1)),
        ]);
        let seq3 = atom_sequence(3, &atoms3);
        let result3 = canonicalize(&seq3, &cubic3, Mode::Strict).unwrap();
        match &result3.form {
            CanonicalForm::Hyperbolic3 { a } => {
                assert_eq!(a.to_rat(), Some(rat(1, 1)));
            }
            other => panic!("expected hyperbolic-3, got {}", other.tag()),
        }
        assert_atoms_land(&result3, &atoms3);
    }

    #[test]
    fn parallel_lines_with_irrational_positions() {
        // y (1 + 3y + y^2): the two line heights are roots of
        // z^2 - 3z + 1, a conjugate irrational pair.
        let five: num_bigint::BigInt = 5.into();
        let a = QuadScalar::new(rat(3, 2), rat(-1, 2), five.clone());
        let b = QuadScalar::new(rat(3, 2), rat(1, 2), five);
        let qa = |n: i64, d: i64| qrat(&rat(n, d));
        let atoms_q = vec![
            (qa(0, 1), qa(0, 1), qa(1, 1)),
            (qa(1, 1), qa(0, 1), qa(1, 1)),
            (qa(-1, 1), qa(0, 1), qa(1, 1)),
            (qa(0, 1), -a.clone(), qa(1, 1)),
            (qa(0, 1), -b.clone(), qa(1, 1)),
            (qa(1, 1), -a.clone(), qa(1, 1)),
            (qa(1, 1), -b.clone(), qa(1, 1)),
        ];
        let seq_q = atom_sequence(3, &atoms_q);
        let seq = seq_q
            .try_map(|v| v.to_rat().ok_or(()))
            .expect("conjugate atom pairs have rational moments");
        let cubic: Poly2<Rat> = Poly2::from_terms([
            (0, 1, rat(1, 1)),
            (0, 2, rat(3, 1)),
            (0, 3, rat(1, 1)),
        ]);
        let result = canonicalize(&seq, &cubic, Mode::Strict).unwrap();
        match &result.form {
            CanonicalForm::ParallelLines { a: ra, b: rb } => {
                assert_eq!(ra, &a);
                assert_eq!(rb, &b);
            }
            other => panic!("expected parallel-lines, got {}", other.tag()),
        }
    }

    #[test]
    fn elliptic_conic_needs_permissive_mode() {
        // y (x^2 + 2y^2 - 3y): the ellipse is not rationally similar to a
        // circle, so reduction scales y by sqrt(2).
        let atoms = vec![
            (rat(0, 1), rat(0, 1), rat(1, 1)),
            (rat(2, 1), rat(0, 1), rat(1, 1)),
            (rat(-1, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(1, 1), rat(1, 1)),
            (rat(-1, 1), rat(1, 1), rat(1, 1)),
            (rat(1, 1), rat(1, 2), rat(1, 1)),
            (rat(-1, 1), rat(1, 2), rat(1, 1)),
        ];
        let cubic: Poly2<Rat> = Poly2::from_terms([
            (2, 1, rat(1, 1)),
            (0, 3, rat(2, 1)),
            (0, 2, rat(-3, 1)),
        ]);
        let seq = atom_sequence(3, &atoms);
        assert!(matches!(
            canonicalize(&seq, &cubic, Mode::Strict),
            Err(Error::IrrationalScaling(_))
        ));
        let result = canonicalize(&seq, &cubic, Mode::Permissive).unwrap();
        match &result.form {
            CanonicalForm::Circular { a } => {
                let two: num_bigint::BigInt = 2.into();
                assert_eq!(a, &QuadScalar::new(rat(0, 1), rat(-3, 2), two));
            }
            other => panic!("expected circular, got {}", other.tag()),
        }
        assert!(result.rational_sequence().is_none());
        assert_atoms_land(&result, &atoms);
    }

    #[test]
    fn mixed_form_keeps_exact_parameters() {
        // y (1 + x^2 - 2y^2).
        let atoms = vec![
            (rat(0, 1), rat(0, 1), rat(1, 1)),
            (rat(2, 1), rat(0, 1), rat(1, 1)),
            (rat(3, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(1, 1), rat(1, 1)),
            (rat(-1, 1), rat(1, 1), rat(1, 1)),
            (rat(1, 1), rat(-1, 1), rat(1, 1)),
            (rat(7, 1), rat(5, 1), rat(1, 1)),
        ];
        let cubic: Poly2<Rat> = Poly2::from_terms([
            (0, 1, rat(1, 1)),
            (2, 1, rat(1, 1)),
            (0, 3, rat(-2, 1)),
        ]);
        let seq = atom_sequence(3, &atoms);
        let result = canonicalize(&seq, &cubic, Mode::Strict).unwrap();
        match &result.form {
            CanonicalForm::Mixed { a, b, c } => {
                assert_eq!(a.to_rat(), Some(rat(0, 1)));
                assert_eq!(b.to_rat(), Some(rat(1, 1)));
                assert_eq!(c.to_rat(), Some(rat(-2, 1)));
            }
            other => panic!("expected mixed, got {}", other.tag()),
        }
        assert_atoms_land(&result, &atoms);
    }

    #[test]
    fn line_pair_prefers_intersecting_lines_over_mixed() {
        // x y (1 + y) factors three ways; the straightened reductions give
        // both an intersecting-lines and a degenerate mixed form, and the
        // canonical listing order picks the former.
        let atoms = vec![
            (rat(1, 1), rat(0, 1), rat(1, 1)),
            (rat(2, 1), rat(0, 1), rat(1, 1)),
            (rat(-1, 1), rat(0, 1), rat(1, 1)),
            (rat(0, 1), rat(1, 1), rat(1, 1)),
            (rat(0, 1), rat(-2, 1), rat(1, 1)),
            (rat(3, 1), rat(-1, 1), rat(1, 1)),
            (rat(-2, 1), rat(-1, 1), rat(1, 1)),
        ];
        let cubic: Poly2<Rat> =
            Poly2::from_terms([(1, 1, rat(1, 1)), (1, 2, rat(1, 1))]);
        let seq = atom_sequence(3, &atoms);
        let result = canonicalize(&seq, &cubic, Mode::Strict).unwrap();
        assert_eq!(result.form.tag(), "intersecting-lines");
        assert_atoms_land(&result, &atoms);
    }

    #[test]
    fn tangent_conic_is_reported_as_mismatch() {
        // y (x^2 - y): the conic is tangent to the base line, a shape none
        // of the canonical reductions can reach.
        let atoms = vec![
            (rat(1, 1), rat(0, 1), rat(1, 1)),
            (rat(2, 1), rat(0, 1), rat(1, 1)),
            (rat(3, 1), rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(1, 1), rat(1, 1)),
            (rat(-1, 1), rat(1, 1), rat(1, 1)),
            (rat(2, 1), rat(4, 1), rat(1, 1)),
            (rat(-2, 1), rat(4, 1), rat(1, 1)),
        ];
        let cubic: Poly2<Rat> =
            Poly2::from_terms([(2, 1, rat(1, 1)), (0, 2, rat(-1, 1))]);
        let seq = atom_sequence(3, &atoms);
        assert!(matches!(
            canonicalize(&seq, &cubic, Mode::Strict),
            Err(Error::CanonicalMismatch { .. })
        ));
    }

    #[test]
    fn degree_two_relation_is_rejected() {
        // Atoms on the circle x^2 + y^2 = 25 satisfy a conic relation, so
        // cubic reduction refuses the input.
        let atoms = vec![
            (rat(3, 1), rat(4, 1), rat(1, 1)),
            (rat(4, 1), rat(3, 1), rat(1, 1)),
            (rat(5, 1), rat(0, 1), rat(1, 1)),
            (rat(-3, 1), rat(4, 1), rat(1, 1)),
            (rat(0, 1), rat(5, 1), rat(1, 1)),
            (rat(-5, 1), rat(0, 1), rat(1, 1)),
            (rat(3, 1), rat(-4, 1), rat(1, 1)),
        ];
        let seq = atom_sequence(3, &atoms);
        let cubic: Poly2<Rat> = Poly2::from_terms([
            (2, 1, rat(1, 1)),
            (0, 3, rat(1, 1)),
            (0, 1, rat(-25, 1)),
        ]);
        assert!(matches!(
            canonicalize(&seq, &cubic, Mode::Strict),
            Err(Error::Precondition(_))
        ));
    }
}
