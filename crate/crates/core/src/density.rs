//! Exact non-negative rational densities and their power-of-two roundings.

use std::cmp::Ordering;
use std::fmt;

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};

/// `num / den` with `den == 0` meaning zero (a star of weight zero).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };

    pub fn new(num: u64, den: u64) -> Self {
        Ratio { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0 || self.den == 0
    }

    /// Same value with `num/den` in lowest terms (zero becomes `0/1`).
    pub fn reduced(&self) -> Ratio {
        if self.is_zero() {
            return Ratio::ZERO;
        }
        let g = num::integer::gcd(self.num, self.den);
        Ratio { num: self.num / g, den: self.den / g }
    }

    pub fn to_big(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::from_integer(BigInt::from(0));
        }
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// The smallest power of two strictly greater than the value.
    pub fn rounded(&self) -> Rounded {
        if self.is_zero() {
            return Rounded::Zero;
        }
        let (p, q) = (self.num as u128, self.den as u128);
        let bits = |x: u128| 127 - x.leading_zeros() as i32;
        // floor(log2(p/q)) is t or t - 1.
        let mut t = bits(p) - bits(q);
        if cmp_pow2(p, q, t) == Ordering::Less {
            t -= 1;
        }
        Rounded::Pow(t + 1)
    }

    /// `value >= 2^e`.
    pub fn at_least_pow2(&self, e: i32) -> bool {
        !self.is_zero() && cmp_pow2(self.num as u128, self.den as u128, e) != Ordering::Less
    }

    /// `value >= r · 2^shift`; every value is at least a zero rounding.
    pub fn at_least(&self, r: Rounded, shift: i32) -> bool {
        match r {
            Rounded::Zero => true,
            Rounded::Pow(e) => self.at_least_pow2(e + shift),
        }
    }
}

/// Compares `p/q` with `2^e` without overflow.
fn cmp_pow2(p: u128, q: u128, e: i32) -> Ordering {
    if e >= 0 {
        cmp_shifted(p, 0, q, e as u32)
    } else {
        cmp_shifted(p, (-e) as u32, q, 0)
    }
}

/// Compares `a · 2^sa` with `b · 2^sb` for `a, b < 2^127`.
pub(crate) fn cmp_shifted(a: u128, sa: u32, b: u128, sb: u32) -> Ordering {
    if a == 0 || b == 0 {
        return a.cmp(&b);
    }
    let base = sa.min(sb);
    let (sa, sb) = (sa - base, sb - base);
    let fits = |x: u128, s: u32| s < x.leading_zeros();
    if !fits(a, sa) {
        return Ordering::Greater;
    }
    if !fits(b, sb) {
        return Ordering::Less;
    }
    (a << sa).cmp(&(b << sb))
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ratio {}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128)),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced();
        write!(f, "{}/{}", r.num, r.den)
    }
}

/// A rounded density: zero, or the power of two `2^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rounded {
    Zero,
    Pow(i32),
}

impl Rounded {
    pub fn exponent(&self) -> Option<i32> {
        match self {
            Rounded::Zero => None,
            Rounded::Pow(e) => Some(*e),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match *self {
            Rounded::Zero => BigRational::from_integer(BigInt::from(0)),
            Rounded::Pow(e) if e >= 0 => BigRational::from_integer(BigInt::from(1) << e as usize),
            Rounded::Pow(e) => BigRational::new(BigInt::from(1), BigInt::from(1) << (-e) as usize),
        }
    }
}

impl fmt::Display for Rounded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rounded::Zero => write!(f, "0/1"),
            Rounded::Pow(e) if e >= 0 => write!(f, "{}/1", 1u128 << e),
            Rounded::Pow(e) => write!(f, "1/{}", 1u128 << (-e)),
        }
    }
}

/// Formats an exact big rational as `num/den`.
pub fn big_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounding_examples() {
        assert_eq!(Ratio::new(1, 1).rounded(), Rounded::Pow(1));
        assert_eq!(Ratio::new(3, 4).rounded(), Rounded::Pow(0));
        assert_eq!(Ratio::new(2, 1).rounded(), Rounded::Pow(2));
        assert_eq!(Ratio::new(1, 2).rounded(), Rounded::Pow(0));
        assert_eq!(Ratio::new(1, 4).rounded(), Rounded::Pow(-1));
        assert_eq!(Ratio::new(0, 3).rounded(), Rounded::Zero);
        assert_eq!(Ratio::new(5, 0).rounded(), Rounded::Zero);
    }

    #[test]
    fn zero_den_orders_as_zero() {
        assert_eq!(Ratio::new(5, 0), Ratio::ZERO);
        assert!(Ratio::new(1, 1000) > Ratio::new(7, 0));
    }

    #[test]
    fn huge_weights_do_not_overflow() {
        let r = Ratio::new(1, u64::MAX);
        assert_eq!(r.rounded(), Rounded::Pow(-63));
        assert!(r.at_least_pow2(-64));
        assert!(!r.at_least_pow2(-63));
        assert!(Ratio::new(u64::MAX, 1).at_least_pow2(63));
    }

    proptest! {
        #[test]
        fn rounding_brackets_value(p in 1u64..1_000_000, q in 1u64..1_000_000) {
            let r = Ratio::new(p, q);
            let Rounded::Pow(e) = r.rounded() else { unreachable!() };
            let value = r.to_big();
            let pow = Rounded::Pow(e).to_big();
            // rho < rho~ <= 2 rho
            prop_assert!(value < pow);
            prop_assert!(pow <= value.clone() + value);
            prop_assert!(r.at_least_pow2(e - 1));
            prop_assert!(!r.at_least_pow2(e));
        }

        #[test]
        fn order_matches_big_rationals(a in 0u64..5000, b in 1u64..5000, c in 0u64..5000, d in 1u64..5000) {
            let (x, y) = (Ratio::new(a, b), Ratio::new(c, d));
            prop_assert_eq!(x.cmp(&y), x.to_big().cmp(&y.to_big()));
        }
    }
}
