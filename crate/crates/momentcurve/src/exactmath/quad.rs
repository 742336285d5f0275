//! Exact arithmetic in a real quadratic extension Q(sqrt(D)).
//!
//! A value is `a + b*sqrt(D)` with rational `a`, `b` and a nonnegative
//! square-free integer radicand `D`. Rational values carry `D = 0`.
//! Combining two genuinely irrational values with different radicands is a
//! structural error and panics in the operator impls; checked variants
//! return the incompatibility instead.

use super::scalar::{rat_approx_f64, Rat, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Element of Q(sqrt(D)): `a + b * sqrt(radicand)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadScalar {
    a: Rat,
    b: Rat,
    radicand: BigInt,
}

/// Exact sign of `a + b*sqrt(D)`: -1, 0 or +1.
pub fn quad_sign(x: &QuadScalar) -> i8 {
    let sa = Scalar::signum(&x.a);
    if x.b.is_zero() {
        return sa;
    }
    let sb = Scalar::signum(&x.b);
    if x.a.is_zero() {
        return sb;
    }
    if sa == sb {
        return sa;
    }
    let t = &x.a * &x.a - &x.b * &x.b * Rat::from(x.radicand.clone());
    let st = Scalar::signum(&t);
    if sa > 0 {
        st
    } else {
        -st
    }
}

impl QuadScalar {
    /// Builds `a + b*sqrt(radicand)` and normalizes the representation:
    /// square factors of the radicand move into `b`, and radicands 0 and 1
    /// collapse into the rational part.
    pub fn new(a: Rat, b: Rat, radicand: BigInt) -> Self {
        assert!(
            !radicand.is_negative(),
            "quadratic extension radicand must be nonnegative"
        );
        if b.is_zero() || radicand.is_zero() {
            return QuadScalar { a, b: Rat::zero(), radicand: BigInt::zero() };
        }
        let (square, free) = split_square(&radicand);
        let b = b * Rat::from(square);
        if free.is_one() {
            QuadScalar { a: a + b, b: Rat::zero(), radicand: BigInt::zero() }
        } else {
            QuadScalar { a, b, radicand: free }
        }
    }

    /// The rational embedded as a quadratic scalar.
    pub fn from_rational(a: Rat) -> Self {
        QuadScalar { a, b: Rat::zero(), radicand: BigInt::zero() }
    }

    /// Exact square root of a nonnegative rational, as `(s/q) * sqrt(d)`.
    /// Returns `None` for negative inputs.
    pub fn sqrt_rat(r: &Rat) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if r.is_zero() {
            return Some(Self::zero());
        }
        let m = r.numer() * r.denom();
        let b = Rat::new(BigInt::one(), r.denom().clone());
        Some(QuadScalar::new(Rat::zero(), b, m))
    }

    /// Rational part `a`.
    pub fn rational_part(&self) -> &Rat {
        &self.a
    }

    /// Coefficient `b` of the radical.
    pub fn radical_part(&self) -> &Rat {
        &self.b
    }

    /// Square-free radicand `D` (zero for rational values).
    pub fn radicand(&self) -> &BigInt {
        &self.radicand
    }

    /// True when the value lies in Q.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Checked addition: reports the two radicands on incompatibility.
    pub fn try_add(&self, rhs: &Self) -> Result<Self, (BigInt, BigInt)> {
        let d = unified_radicand(self, rhs)?;
        Ok(QuadScalar { a: &self.a + &rhs.a, b: &self.b + &rhs.b, radicand: d })
    }

    /// Checked multiplication: reports the two radicands on incompatibility.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self, (BigInt, BigInt)> {
        if self.is_rational() {
            return Ok(QuadScalar {
                a: &self.a * &rhs.a,
                b: &self.a * &rhs.b,
                radicand: if self.a.is_zero() { BigInt::zero() } else { rhs.radicand.clone() },
            }
            .renormalize());
        }
        if rhs.is_rational() {
            return rhs.try_mul(self);
        }
        let d = unified_radicand(self, rhs)?;
        let dd = Rat::from(d.clone());
        Ok(QuadScalar {
            a: &self.a * &rhs.a + &self.b * &rhs.b * dd,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            radicand: d,
        }
        .renormalize())
    }

    /// Conjugate `a - b*sqrt(D)`.
    pub fn conjugate(&self) -> Self {
        QuadScalar { a: self.a.clone(), b: -self.b.clone(), radicand: self.radicand.clone() }
    }

    fn renormalize(self) -> Self {
        if self.b.is_zero() {
            QuadScalar { a: self.a, b: Rat::zero(), radicand: BigInt::zero() }
        } else {
            self
        }
    }
}

/// Common radicand of two values, treating rationals as compatible with
/// everything.
fn unified_radicand(x: &QuadScalar, y: &QuadScalar) -> Result<BigInt, (BigInt, BigInt)> {
    if x.is_rational() {
        Ok(y.radicand.clone())
    } else if y.is_rational() || x.radicand == y.radicand {
        Ok(x.radicand.clone())
    } else {
        Err((x.radicand.clone(), y.radicand.clone()))
    }
}

/// Splits `n >= 0` as `s^2 * f` with `f` square-free (up to a trial-division
/// bound; see below), returning `(s, f)`.
///
/// Trial division runs over divisors up to 4096, then repeatedly extracts
/// perfect-square cofactors exactly. A square-free miss beyond that bound
/// cannot produce wrong arithmetic, only a non-minimal radicand; every
/// computation in this library stays inside a single extension at a time.
fn split_square(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut square_root = BigInt::one();
    let mut free = BigInt::one();
    let mut p = BigInt::from(2u32);
    let bound = BigInt::from(4096u32);
    while &p * &p <= rest && p <= bound {
        let mut count = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            count += 1;
        }
        if count > 0 {
            for _ in 0..count / 2 {
                square_root *= &p;
            }
            if count % 2 == 1 {
                free *= &p;
            }
        }
        p += 1;
    }
    loop {
        if rest.is_one() {
            break;
        }
        let r = rest.sqrt();
        if &r * &r == rest {
            square_root *= r;
            rest = BigInt::one();
        } else {
            break;
        }
    }
    (square_root, free * rest)
}

impl std::fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}*sqrt({})", self.b, self.radicand)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.radicand)
        }
    }
}

macro_rules! quad_binop {
    ($trait_:ident, $method:ident, $checked:ident, $what:expr) => {
        impl std::ops::$trait_ for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: QuadScalar) -> QuadScalar {
                self.$checked(&rhs).unwrap_or_else(|(d1, d2)| {
                    panic!("{} of values from Q(sqrt({})) and Q(sqrt({}))", $what, d1, d2)
                })
            }
        }
    };
}

quad_binop!(Add, add, try_add, "addition");
quad_binop!(Mul, mul, try_mul, "multiplication");

impl std::ops::Neg for QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar { a: -self.a, b: -self.b, radicand: self.radicand }
    }
}

impl std::ops::Sub for QuadScalar {
    type Output = QuadScalar;
    fn sub(self, rhs: QuadScalar) -> QuadScalar {
        self + (-rhs)
    }
}

impl Zero for QuadScalar {
    fn zero() -> Self {
        QuadScalar::from_rational(Rat::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadScalar {
    fn one() -> Self {
        QuadScalar::from_rational(Rat::one())
    }
}

impl Scalar for QuadScalar {
    fn signum(&self) -> i8 {
        quad_sign(self)
    }

    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.b.is_zero() {
            return Some(QuadScalar::from_rational(self.a.recip()));
        }
        let norm = &self.a * &self.a - &self.b * &self.b * Rat::from(self.radicand.clone());
        debug_assert!(!norm.is_zero(), "nonzero quadratic scalar has nonzero norm");
        let inv = norm.recip();
        Some(QuadScalar {
            a: &self.a * &inv,
            b: -(&self.b * &inv),
            radicand: self.radicand.clone(),
        })
    }

    fn from_rat(r: Rat) -> Self {
        QuadScalar::from_rational(r)
    }

    fn to_rat(&self) -> Option<Rat> {
        if self.b.is_zero() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    fn approx_f64(&self) -> f64 {
        let radical = rat_approx_f64(&self.b) * bigint_approx_f64(&self.radicand).sqrt();
        rat_approx_f64(&self.a) + radical
    }
}

fn bigint_approx_f64(n: &BigInt) -> f64 {
    rat_approx_f64(&Rat::from(n.clone()))
}
