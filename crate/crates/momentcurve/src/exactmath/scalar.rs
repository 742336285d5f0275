//! The scalar abstraction shared by all exact linear algebra: a field with
//! decidable sign, instantiated by rationals and by quadratic extensions.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rat = BigRational;

/// Builds a rational from an integer pair, reducing automatically.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "rational with zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Builds a rational from an integer.
pub fn rat_i64(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Parses "n" or "n/d" with optional sign, in lowest terms.
pub fn rat_from_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num_s.parse().ok()?;
    let den: BigInt = den_s.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rat::new(num, den))
}

/// Canonical string form: "n" when the denominator is 1, otherwise "n/d".
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// An exactly computable ordered field.
///
/// Everything the decision procedures need from their scalars: field
/// arithmetic, an exact three-valued sign, and a best-effort conversion to
/// `f64` for the quarantined numeric extraction step.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + std::fmt::Display
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + Zero
    + One
{
    /// Exact sign: -1, 0 or +1.
    fn signum(&self) -> i8;

    /// Multiplicative inverse; `None` for zero.
    fn try_inv(&self) -> Option<Self>;

    /// Embeds a rational into the field.
    fn from_rat(r: Rat) -> Self;

    /// Rational part extraction; `None` when the value is irrational.
    fn to_rat(&self) -> Option<Rat>;

    /// Nearest double, used only by the numeric extraction path.
    fn approx_f64(&self) -> f64;

    /// Division panicking on zero divisors, which every caller has already
    /// excluded by an exact sign or rank check.
    fn div_exact(&self, rhs: &Self) -> Self {
        self.clone()
            * rhs
                .try_inv()
                .unwrap_or_else(|| panic!("division by zero in exact arithmetic"))
    }

    /// True when the value is nonnegative.
    fn is_nonneg(&self) -> bool {
        self.signum() >= 0
    }
}

impl Scalar for Rat {
    fn signum(&self) -> i8 {
        match self.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn from_rat(r: Rat) -> Self {
        r
    }

    fn to_rat(&self) -> Option<Rat> {
        Some(self.clone())
    }

    fn approx_f64(&self) -> f64 {
        rat_approx_f64(self)
    }
}

/// Correctly scaled double approximation of a rational, robust to numerators
/// and denominators far outside the `f64` range.
pub fn rat_approx_f64(r: &Rat) -> f64 {
    if r.numer().is_zero() {
        return 0.0;
    }
    let num_bits = r.numer().abs().bits() as i64;
    let den_bits = r.denom().bits() as i64;
    let drop_num = (num_bits - 80).max(0) as usize;
    let drop_den = (den_bits - 80).max(0) as usize;
    let n = (r.numer() >> drop_num).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> drop_den).to_f64().unwrap_or(f64::NAN);
    let shift = (drop_num as i64 - drop_den as i64).clamp(i32::MIN as i64, i32::MAX as i64);
    (n / d) * 2f64.powi(shift as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_string_round_trip() {
        for s in ["0", "7", "-3/4", "22/7", "-1"] {
            let r = rat_from_str(s).expect("parse");
            assert_eq!(rat_to_string(&r), s, "canonical form should round-trip");
        }
    }

    #[test]
    fn rational_parse_reduces() {
        assert_eq!(rat_from_str("6/4").unwrap(), rat(3, 2));
        assert_eq!(rat_from_str("-6/-4").unwrap(), rat(3, 2));
        assert_eq!(rat_to_string(&rat_from_str("4/2").unwrap()), "2");
    }

    #[test]
    fn rational_parse_rejects_garbage() {
        assert!(rat_from_str("1/0").is_none());
        assert!(rat_from_str("a/b").is_none());
        assert!(rat_from_str("1.5").is_none());
    }

    #[test]
    fn signum_matches_value() {
        assert_eq!(Scalar::signum(&rat(-3, 7)), -1);
        assert_eq!(Scalar::signum(&rat(0, 5)), 0);
        assert_eq!(Scalar::signum(&rat(2, 9)), 1);
    }

    #[test]
    fn inverse_of_zero_is_none() {
        assert!(rat_i64(0).try_inv().is_none());
        assert_eq!(rat(3, 4).try_inv().unwrap(), rat(4, 3));
    }

    #[test]
    fn approx_handles_huge_values() {
        let big = Rat::new(BigInt::from(10).pow(400u32), BigInt::from(3));
        let x = big.approx_f64();
        assert!(x.is_infinite() || x > 1e300, "huge rationals should not collapse to NaN");
        let tiny = Rat::new(BigInt::from(3), BigInt::from(10).pow(400u32));
        let y = tiny.approx_f64();
        assert!(y >= 0.0 && y < 1e-300, "tiny rationals should approximate toward zero");
        let moderate = rat(-355, 113);
        assert!((moderate.approx_f64() + 3.14159).abs() < 1e-4);
    }
}
